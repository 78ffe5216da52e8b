//! Independent damped-Newton solver for the bordered system
//!
//! ```text
//! u - lambda * S(u) = 0,    u_{i*}(t_{k*}) = R,
//! ```
//!
//! where `(i*, k*)` is the max node of the current iterate. This is the
//! oracle route for checking the normalized fixed-point iteration: same
//! discretized operator, entirely different solve. The Jacobian uses plain
//! composite Simpson weights and finite-difference partials of `F`, `H`, `G`
//! (a quasi-Newton approximation; the residual is always the exact one).

use hameig::grid::{Grid, GridFunction, GridPair};
use hameig::kernels::KernelSet;
use hameig::operator::apply_s;
use hameig::problem::{Functional, SystemProblem};
use nalgebra::{DMatrix, DVector};

pub struct NewtonOutcome {
    pub lambda: f64,
    pub u: GridPair,
    pub iterations: usize,
    pub residual: f64,
}

fn unpack(x: &DVector<f64>, grid: Grid) -> Option<GridPair> {
    let n1 = grid.n() + 1;
    let u1 = GridFunction::new(grid, x.as_slice()[..n1].to_vec()).ok()?;
    let u2 = GridFunction::new(grid, x.as_slice()[n1..2 * n1].to_vec()).ok()?;
    GridPair::new(u1, u2).ok()
}

fn residual(
    problem: &SystemProblem,
    grid: Grid,
    x: &DVector<f64>,
    r: f64,
    norm_index: usize,
) -> Option<(DVector<f64>, GridPair)> {
    let n1 = grid.n() + 1;
    let lambda = x[2 * n1];
    let u = unpack(x, grid)?;
    let s = apply_s(problem, &u).ok()?;
    let mut g = DVector::zeros(2 * n1 + 1);
    for i in 0..2 {
        for k in 0..n1 {
            g[i * n1 + k] = u.component(i).values()[k] - lambda * s.component(i).values()[k];
        }
    }
    g[2 * n1] = x[norm_index] - r;
    Some((g, s))
}

/// Nodes and weights of linear interpolation at `p` (a single node when `p`
/// is on the grid).
fn interp_weights(grid: Grid, p: f64) -> Vec<(usize, f64)> {
    if let Some(k) = grid.node_index(p) {
        return vec![(k, 1.0)];
    }
    let n = grid.n();
    let k0 = ((p * n as f64).floor() as usize).min(n - 1);
    let theta = (p - grid.node(k0)) * n as f64;
    vec![(k0, 1.0 - theta), (k0 + 1, theta)]
}

/// Finite-difference partials of a functional with respect to the node
/// values, chained through the interpolation weights of its evaluation
/// points. Returns per-component dense rows.
fn functional_partials(f: &Functional, u: &GridPair, grid: Grid) -> [Vec<f64>; 2] {
    let n1 = grid.n() + 1;
    let mut rows = [vec![0.0; n1], vec![0.0; n1]];
    match f {
        Functional::Affine { terms, .. } => {
            for term in terms {
                for (k, w) in interp_weights(grid, term.point) {
                    rows[(term.component - 1) as usize][k] += term.weight * w;
                }
            }
        }
        Functional::General(expr) => {
            let mut vars = Vec::new();
            expr.collect_point_evals(&mut vars);
            let base: Vec<f64> = vars
                .iter()
                .map(|&(c, p)| u.eval_component(c, p).unwrap_or(0.0))
                .collect();
            let eval_with = |assign: &[f64]| {
                expr.eval_points(&|c, p| {
                    let q = vars
                        .iter()
                        .position(|&(vc, vp)| vc == c && vp == p)
                        .unwrap();
                    assign[q]
                })
            };
            for (q, &(c, p)) in vars.iter().enumerate() {
                let eps = 1e-6 * (1.0 + base[q].abs());
                let mut hi = base.clone();
                let mut lo = base.clone();
                hi[q] += eps;
                lo[q] = (lo[q] - eps).max(0.0);
                let d = match (eval_with(&hi), eval_with(&lo)) {
                    (Ok(a), Ok(b)) if hi[q] > lo[q] => (a - b) / (hi[q] - lo[q]),
                    _ => 0.0,
                };
                for (k, w) in interp_weights(grid, p) {
                    rows[(c - 1) as usize][k] += d * w;
                }
            }
        }
    }
    rows
}

/// Damped Newton solve; returns an error string when the iteration stalls.
pub fn solve_newton(
    problem: &SystemProblem,
    r: f64,
    grid: Grid,
    tol: f64,
    max_iter: usize,
) -> Result<NewtonOutcome, String> {
    let n1 = grid.n() + 1;
    let nn = 2 * n1 + 1;
    let h = grid.h();

    // Composite Simpson weights over the full grid.
    let mut w = vec![2.0 * h / 3.0; n1];
    w[0] = h / 3.0;
    w[n1 - 1] = h / 3.0;
    for k in (1..n1 - 1).step_by(2) {
        w[k] = 4.0 * h / 3.0;
    }

    let kernels: Vec<KernelSet> = problem
        .components
        .iter()
        .map(|c| KernelSet::new(c.bc, &c.params))
        .collect();

    // Start from the constant pair on the sphere.
    let mut x = DVector::zeros(nn);
    for k in 0..2 * n1 {
        x[k] = r;
    }
    let u0 = unpack(&x, grid).unwrap();
    let s0 = apply_s(problem, &u0).map_err(|e| e.to_string())?;
    x[2 * n1] = r / s0.norm_y();

    let mut norm_index = 0usize;
    let (mut g, mut s) = residual(problem, grid, &x, r, norm_index)
        .ok_or_else(|| "initial residual failed".to_string())?;

    for iter in 1..=max_iter {
        // Re-anchor the normalization row at the (signed) max node of the
        // current iterate, then measure the residual against the same row:
        // the line search below must compare like with like.
        let u = unpack(&x, grid).unwrap();
        let mut best = (0usize, f64::NEG_INFINITY);
        for i in 0..2 {
            for (k, v) in u.component(i).values().iter().enumerate() {
                if *v > best.1 {
                    best = (i * n1 + k, *v);
                }
            }
        }
        norm_index = best.0;
        g[2 * n1] = x[norm_index] - r;

        let gnorm = g.amax();
        if gnorm <= tol {
            return Ok(NewtonOutcome {
                lambda: x[2 * n1],
                u,
                iterations: iter - 1,
                residual: gnorm,
            });
        }

        let lambda = x[2 * n1];
        // Finite-difference partials of F at the nodes.
        let mut df = [[vec![0.0; n1], vec![0.0; n1]], [vec![0.0; n1], vec![0.0; n1]]];
        for (i, comp) in problem.components.iter().enumerate() {
            for k in 0..n1 {
                let t = grid.node(k);
                let (u1k, u2k) = (u.u1().values()[k], u.u2().values()[k]);
                for m in 0..2 {
                    let eps = 1e-6 * (1.0 + u.component(m).values()[k].abs());
                    let bump = |d: f64| {
                        let (a, b) = if m == 0 { (u1k + d, u2k) } else { (u1k, u2k + d) };
                        comp.f.eval_state(t, a, b)
                    };
                    df[i][m][k] = match (bump(eps), bump(-eps)) {
                        (Ok(a), Ok(b)) => (a - b) / (2.0 * eps),
                        (Ok(a), Err(_)) => (a - comp.f.eval_state(t, u1k, u2k).unwrap_or(a)) / eps,
                        _ => 0.0,
                    };
                }
            }
        }

        let mut jac = DMatrix::zeros(nn, nn);
        for (i, comp) in problem.components.iter().enumerate() {
            let dh = functional_partials(&comp.h, &u, grid);
            let dg = functional_partials(&comp.g, &u, grid);
            for j in 0..n1 {
                let t_j = grid.node(j);
                let row = i * n1 + j;
                let psi0 = kernels[i].psi0(t_j).unwrap();
                let psi1 = kernels[i].psi1(t_j).unwrap();
                for m in 0..2 {
                    for k in 0..n1 {
                        let kernel_part =
                            kernels[i].kernel_value(t_j, grid.node(k)).unwrap() * w[k] * df[i][m][k];
                        let func_part = psi0 * dh[m][k] + psi1 * dg[m][k];
                        jac[(row, m * n1 + k)] = -lambda * (kernel_part + func_part);
                    }
                }
                jac[(row, row)] += 1.0;
                jac[(row, 2 * n1)] = -s.component(i).values()[j];
            }
        }
        jac[(2 * n1, norm_index)] = 1.0;

        let delta = jac
            .lu()
            .solve(&(-&g))
            .ok_or_else(|| format!("singular Jacobian at iteration {iter}"))?;

        // Backtracking line search on the residual norm.
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = &x + step * &delta;
            if trial[2 * n1] > 0.0 {
                if let Some((g_new, s_new)) = residual(problem, grid, &trial, r, norm_index) {
                    if g_new.amax() < gnorm {
                        x = trial;
                        g = g_new;
                        s = s_new;
                        accepted = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(format!(
                "line search stalled at iteration {iter} with residual {gnorm:e}"
            ));
        }
    }
    Err(format!(
        "no convergence after {max_iter} Newton iterations (residual {:e})",
        g.amax()
    ))
}
