//! Normalized fixed-point iteration for eigenpairs on the cone sphere, plus
//! residual diagnostics and radius sweeps.
//!
//! The iteration is `u_{k+1} = R * S(u_k) / ||S(u_k)||_Y` starting from the
//! constant pair `(R, R)`; at a fixed point, `lambda = R / ||S(u)||_Y` and
//! `u = lambda * S(u)` holds on the grid. Convergence is declared on the
//! successive-iterate distance; the integral, ODE and boundary residuals are
//! reported separately.

use crate::grid::{Grid, GridFunction, GridPair};
use crate::operator::{apply_s, integral_residual, OperatorError};
use crate::problem::{in_cone, BcKind, SystemProblem};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Successive-iterate stopping tolerance, relative to `R`.
    pub tol: f64,
    pub max_iter: usize,
    /// Starting pair; defaults to the constant pair `(R, R)`.
    pub initial: Option<GridPair>,
    /// Cone-membership tolerance factor (times `R`) for diagnostics.
    pub cone_tol_factor: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-11,
            max_iter: 10_000,
            initial: None,
            cone_tol_factor: 1e-9,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(
        "degenerate operator at iteration {iteration}: ||S(u)|| = {norm:e} (the \
         positivity premise fails numerically)"
    )]
    DegenerateOperator { iteration: usize, norm: f64 },
    #[error(
        "no convergence after {iterations} iterations: last step {last_step:e}, \
         period-2 distance {period2:e}"
    )]
    NonConvergence {
        iterations: usize,
        last_step: f64,
        period2: f64,
        last_iterate: Box<GridPair>,
    },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// A computed eigenpair with residual diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    pub lambda: f64,
    pub u: GridPair,
    pub iterations: usize,
    /// `||u - lambda S(u)||_Y`.
    pub integral_residual: f64,
    /// Max central-difference defect of `-u'' = lambda F` over interior nodes.
    pub ode_residual: f64,
    /// The four boundary equations, in order: component 1 at `t = 0`,
    /// component 1 thermostat, component 2 at `t = 0`, component 2 thermostat.
    pub bc_residual: [f64; 4],
    pub cone_ok: bool,
    /// Worst cone margin seen across all iterates (diagnostic; the operator
    /// can leave the cone for some admissible problems).
    pub worst_iterate_cone_margin: f64,
}

fn normalize(s: &GridPair, r: f64) -> (GridPair, f64) {
    let m = s.norm_y();
    let grid = s.grid();
    let scale = |f: &GridFunction| {
        GridFunction::new(grid, f.values().iter().map(|v| r * (v / m)).collect()).unwrap()
    };
    (
        GridPair::new(scale(s.u1()), scale(s.u2())).unwrap(),
        m,
    )
}

/// Normalized fixed-point solve on the cone sphere of radius `r`.
pub fn solve(
    problem: &SystemProblem,
    r: f64,
    grid: Grid,
    opts: &SolveOptions,
) -> Result<EigenPair, SolveError> {
    assert!(r > 0.0, "sphere radius must be positive");
    let cone = problem.cone_spec();
    let cone_tol = opts.cone_tol_factor * r;

    let mut u = opts
        .initial
        .clone()
        .unwrap_or_else(|| GridPair::constant(grid, r, r));
    let mut prev: Option<GridPair> = None;
    let mut last_step = f64::INFINITY;
    let mut period2 = f64::INFINITY;
    let mut stalled = 0usize;
    let mut damping = false;
    let mut worst_margin = f64::INFINITY;
    let mut converged_at = None;

    for iter in 1..=opts.max_iter {
        let s = apply_s(problem, &u)?;
        let norm_s = s.norm_y();
        if norm_s < 1e-14 * r {
            return Err(SolveError::DegenerateOperator {
                iteration: iter,
                norm: norm_s,
            });
        }
        let (mut next, _) = normalize(&s, r);
        if damping {
            let grid = next.grid();
            let avg = |a: &GridFunction, b: &GridFunction| {
                GridFunction::new(
                    grid,
                    a.values()
                        .iter()
                        .zip(b.values())
                        .map(|(x, y)| 0.5 * (x + y))
                        .collect(),
                )
                .unwrap()
            };
            let damped = GridPair::new(avg(next.u1(), u.u1()), avg(next.u2(), u.u2())).unwrap();
            (next, _) = normalize(&damped, r);
        }

        let check = in_cone(&next, &cone, cone_tol);
        for m in check.margins {
            worst_margin = worst_margin.min(m.min_value).min(m.interval_slack);
        }

        let step = next.dist_y(&u).map_err(OperatorError::from)?;
        if let Some(two_ago) = &prev {
            period2 = next.dist_y(two_ago).map_err(OperatorError::from)?;
            // A period-2 cycle keeps the step large while u_{k+2} returns to
            // u_k; after 200 such iterations switch to averaging.
            if period2 < 0.01 * step {
                stalled += 1;
                if stalled > 200 {
                    damping = true;
                }
            } else {
                stalled = 0;
            }
        }
        prev = Some(std::mem::replace(&mut u, next));
        last_step = step;
        if step <= opts.tol * r {
            converged_at = Some(iter);
            break;
        }
    }

    let Some(iterations) = converged_at else {
        return Err(SolveError::NonConvergence {
            iterations: opts.max_iter,
            last_step,
            period2,
            last_iterate: Box::new(u),
        });
    };

    let s = apply_s(problem, &u)?;
    let norm_s = s.norm_y();
    let lambda = r / norm_s;
    let integral_res = integral_residual(problem, lambda, &u)?;
    let pair_stub = (lambda, &u);
    let ode_res = ode_defect(problem, pair_stub.0, pair_stub.1)?;
    let bc_res = bc_defect(problem, lambda, &u)?;
    let cone_ok = in_cone(&u, &cone, cone_tol).ok;

    Ok(EigenPair {
        lambda,
        u,
        iterations,
        integral_residual: integral_res,
        ode_residual: ode_res,
        bc_residual: bc_res,
        cone_ok,
        worst_iterate_cone_margin: worst_margin,
    })
}

/// Max over interior nodes and components of
/// `| -D2 u_i(t) - lambda F_i(t, u1, u2) |` with the central second
/// difference `D2`; expected `O(h^2)` for a converged pair.
pub fn ode_residual(problem: &SystemProblem, pair: &EigenPair) -> Result<f64, OperatorError> {
    ode_defect(problem, pair.lambda, &pair.u)
}

fn ode_defect(problem: &SystemProblem, lambda: f64, u: &GridPair) -> Result<f64, OperatorError> {
    let grid = u.grid();
    let n = grid.n();
    assert!(n >= 10, "ODE residual needs n >= 10");
    let h2 = grid.h() * grid.h();
    let u1 = u.u1().values();
    let u2 = u.u2().values();
    let mut worst: f64 = 0.0;
    for (i, comp) in problem.components.iter().enumerate() {
        let v = u.component(i).values();
        for k in 1..n {
            let t = grid.node(k);
            let d2 = (v[k + 1] - 2.0 * v[k] + v[k - 1]) / h2;
            let f = comp.f.eval_state(t, u1[k], u2[k]).map_err(|source| {
                OperatorError::Nonlinearity {
                    component: i + 1,
                    t,
                    s: t,
                    source,
                }
            })?;
            worst = worst.max((-d2 - lambda * f).abs());
        }
    }
    Ok(worst)
}

/// Defects of the four boundary equations, using one-sided second-order
/// differences for `u'(0)`, `u'(1)` and interpolation for `u(eta)`.
pub fn bc_residual(problem: &SystemProblem, pair: &EigenPair) -> Result<[f64; 4], OperatorError> {
    bc_defect(problem, pair.lambda, &pair.u)
}

fn bc_defect(
    problem: &SystemProblem,
    lambda: f64,
    u: &GridPair,
) -> Result<[f64; 4], OperatorError> {
    let grid = u.grid();
    let n = grid.n();
    let h = grid.h();
    let mut out = [0.0; 4];
    for (i, comp) in problem.components.iter().enumerate() {
        let v = u.component(i).values();
        let d_at_0 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        let d_at_1 = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
        let h_val = comp.h.evaluate(u).map_err(|source| OperatorError::Functional {
            component: i + 1,
            name: "H",
            source,
        })?;
        let g_val = comp.g.evaluate(u).map_err(|source| OperatorError::Functional {
            component: i + 1,
            name: "G",
            source,
        })?;
        out[2 * i] = match comp.bc {
            BcKind::DirichletAtZero => (v[0] - lambda * h_val).abs(),
            BcKind::NeumannAtZero => (d_at_0 + lambda * h_val).abs(),
        };
        let u_eta = u.component(i).point_eval(comp.params.eta.value())?;
        out[2 * i + 1] = (comp.params.beta.value() * d_at_1 + u_eta - lambda * g_val).abs();
    }
    Ok(out)
}

/// One row of a radius sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub lambda: Option<f64>,
    pub iterations: Option<usize>,
    pub integral_residual: Option<f64>,
    pub ode_residual: Option<f64>,
    pub cone_ok: Option<bool>,
    pub error: Option<String>,
}

impl SweepRow {
    fn from_pair(r: f64, pair: &EigenPair) -> SweepRow {
        SweepRow {
            r,
            lambda: Some(pair.lambda),
            iterations: Some(pair.iterations),
            integral_residual: Some(pair.integral_residual),
            ode_residual: Some(pair.ode_residual),
            cone_ok: Some(pair.cone_ok),
            error: None,
        }
    }

    fn from_error(r: f64, err: &SolveError) -> SweepRow {
        SweepRow {
            r,
            lambda: None,
            iterations: None,
            integral_residual: None,
            ode_residual: None,
            cone_ok: None,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    pub solve: SolveOptions,
    /// Start each radius from the previous eigenfunction rescaled. When set
    /// the sweep is sequential by contract.
    pub warm_start: bool,
    /// Thread cap for independent (non-warm-start) solves.
    pub threads: Option<usize>,
}

impl SweepOptions {
    pub fn warm_started(solve: SolveOptions) -> SweepOptions {
        SweepOptions {
            solve,
            warm_start: true,
            threads: None,
        }
    }
}

/// Solve for every radius in `r_values` (assumed positive and sorted).
/// Per-radius failures are recorded in their row; the sweep continues.
pub fn sweep(
    problem: &SystemProblem,
    r_values: &[f64],
    grid: Grid,
    opts: &SweepOptions,
) -> Vec<SweepRow> {
    if r_values.is_empty() {
        return Vec::new();
    }
    if opts.warm_start {
        let mut rows = Vec::with_capacity(r_values.len());
        let mut carry: Option<GridPair> = None;
        for &r in r_values {
            let mut solve_opts = opts.solve.clone();
            if let Some(prev) = &carry {
                let (rescaled, _) = normalize(prev, r);
                solve_opts.initial = Some(rescaled);
            }
            match solve(problem, r, grid, &solve_opts) {
                Ok(pair) => {
                    carry = Some(pair.u.clone());
                    rows.push(SweepRow::from_pair(r, &pair));
                }
                Err(err) => {
                    carry = None;
                    rows.push(SweepRow::from_error(r, &err));
                }
            }
        }
        return rows;
    }

    let threads = opts
        .threads
        .or_else(|| std::thread::available_parallelism().ok().map(|p| p.get()))
        .unwrap_or(1)
        .clamp(1, r_values.len());
    let mut rows: Vec<Option<SweepRow>> = vec![None; r_values.len()];
    std::thread::scope(|scope| {
        let chunks = rows.chunks_mut(r_values.len().div_ceil(threads));
        for (c, chunk) in chunks.enumerate() {
            let offset = c * r_values.len().div_ceil(threads);
            let solve_opts = opts.solve.clone();
            scope.spawn(move || {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    let r = r_values[offset + k];
                    *slot = Some(match solve(problem, r, grid, &solve_opts) {
                        Ok(pair) => SweepRow::from_pair(r, &pair),
                        Err(err) => SweepRow::from_error(r, &err),
                    });
                }
            });
        }
    });
    rows.into_iter().map(Option::unwrap).collect()
}
