//! Discretized Hammerstein operator on a uniform grid.
//!
//! `apply_s` evaluates, at every node `t_j`,
//!
//! ```text
//! S_i(u)(t) = psi_i0(t) H_i[u] + psi_i1(t) G_i[u]
//!           + int_0^1 K_i(t, s) F_i(s, u1(s), u2(s)) ds
//! ```
//!
//! The `s`-integral is split additively at the kernel breakpoints `s = eta_i`
//! and `s = t`, and each smooth piece is integrated by a composite Simpson
//! rule over the grid nodes it contains, with the piece endpoints inserted as
//! extra quadrature points. `F` is evaluated at node values of `u` (Nystrom
//! style); at inserted off-node points `u` is interpolated linearly.

use crate::expr::{EvalError, Expr};
use crate::grid::{Grid, GridError, GridFunction, GridPair, NODE_SNAP_TOL};
use crate::kernels::KernelSet;
use crate::problem::SystemProblem;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OperatorError {
    #[error("component {component} at (t, s) = ({t}, {s}): {source}")]
    Nonlinearity {
        component: usize,
        t: f64,
        s: f64,
        source: EvalError,
    },
    #[error("component {component} functional {name}: {source}")]
    Functional {
        component: usize,
        name: &'static str,
        source: EvalError,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Integral of the parabola through `(x[0..3], f[0..3])` over `[w0, w1]`.
/// Evaluated in coordinates centered on the integration interval; the
/// antiderivative evaluated in global coordinates cancels catastrophically.
fn parabola_integral(x: [f64; 3], f: [f64; 3], w0: f64, w1: f64) -> f64 {
    let c = 0.5 * (w0 + w1);
    let d = 0.5 * (w1 - w0);
    let xl = [x[0] - c, x[1] - c, x[2] - c];
    // int_{-d}^{d} (s - xa)(s - xb) ds = (2/3) d^3 + 2 xa xb d.
    let term = |i: usize, a: usize, b: usize| -> f64 {
        let num = (2.0 / 3.0) * d * d * d + 2.0 * xl[a] * xl[b] * d;
        f[i] * num / ((xl[i] - xl[a]) * (xl[i] - xl[b]))
    };
    term(0, 1, 2) + term(1, 0, 2) + term(2, 0, 1)
}

/// Integrate samples `(pts, vals)` of one smooth piece by piecewise-quadratic
/// interpolation (composite Simpson on uniform interiors; the first and last
/// gaps may be shorter where a breakpoint was inserted). Requires at least
/// three samples.
fn integrate_piece(pts: &[f64], vals: &[f64]) -> f64 {
    let m = pts.len() - 1;
    debug_assert!(m >= 2);
    let mut total = 0.0;
    let mut j = 0;
    while j + 2 <= m {
        total += parabola_integral(
            [pts[j], pts[j + 1], pts[j + 2]],
            [vals[j], vals[j + 1], vals[j + 2]],
            pts[j],
            pts[j + 2],
        );
        j += 2;
    }
    if j == m - 1 {
        // Odd interval count: close with the parabola through the last three
        // points, restricted to the final interval.
        total += parabola_integral(
            [pts[m - 2], pts[m - 1], pts[m]],
            [vals[m - 2], vals[m - 1], vals[m]],
            pts[m - 1],
            pts[m],
        );
    }
    total
}

struct ComponentData {
    kernel: KernelSet,
    f_nodes: Vec<f64>,
    h_value: f64,
    g_value: f64,
}

fn f_at(
    expr: &Expr,
    component: usize,
    t_row: f64,
    s: f64,
    u: &GridPair,
) -> Result<f64, OperatorError> {
    let u1 = u.u1().point_eval(s)?;
    let u2 = u.u2().point_eval(s)?;
    expr.eval_state(s, u1, u2)
        .map_err(|source| OperatorError::Nonlinearity {
            component: component + 1,
            t: t_row,
            s,
            source,
        })
}

fn prepare(problem: &SystemProblem, u: &GridPair) -> Result<[ComponentData; 2], OperatorError> {
    let grid = u.grid();
    let mut out = Vec::with_capacity(2);
    for (i, comp) in problem.components.iter().enumerate() {
        let kernel = KernelSet::new(comp.bc, &comp.params);
        let u1 = u.u1().values();
        let u2 = u.u2().values();
        let mut f_nodes = Vec::with_capacity(grid.n() + 1);
        for k in 0..=grid.n() {
            let t = grid.node(k);
            let v = comp.f.eval_state(t, u1[k], u2[k]).map_err(|source| {
                OperatorError::Nonlinearity {
                    component: i + 1,
                    t,
                    s: t,
                    source,
                }
            })?;
            f_nodes.push(v);
        }
        let h_value = comp.h.evaluate(u).map_err(|source| OperatorError::Functional {
            component: i + 1,
            name: "H",
            source,
        })?;
        let g_value = comp.g.evaluate(u).map_err(|source| OperatorError::Functional {
            component: i + 1,
            name: "G",
            source,
        })?;
        out.push(ComponentData {
            kernel,
            f_nodes,
            h_value,
            g_value,
        });
    }
    Ok(out.try_into().ok().unwrap())
}

/// Quadrature of `s -> K(t_row, s) * F(s, u(s))` over `[0, 1]` with
/// breakpoint splitting at `s = eta` and `s = t_row`.
fn integrate_row(
    data: &ComponentData,
    component: usize,
    expr: &Expr,
    grid: Grid,
    u: &GridPair,
    t_row: f64,
) -> Result<f64, OperatorError> {
    let mut cuts = [0.0, 1.0, 1.0, 1.0];
    let mut m = 2;
    for bp in [data.kernel.eta(), t_row] {
        if bp > NODE_SNAP_TOL && bp < 1.0 - NODE_SNAP_TOL {
            cuts[m] = bp;
            m += 1;
        }
    }
    let cuts = &mut cuts[..m];
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let n = grid.n();
    let mut pts: Vec<f64> = Vec::with_capacity(n + 4);
    let mut vals: Vec<f64> = Vec::with_capacity(n + 4);
    let mut total = 0.0;

    for w in cuts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x1 - x0 <= NODE_SNAP_TOL {
            continue;
        }
        pts.clear();
        vals.clear();

        // Both kernel indicators are constant on the open piece.
        let mid = 0.5 * (x0 + x1);
        let le_eta = mid <= data.kernel.eta();
        let le_t = mid <= t_row;

        let sample = |s: f64, pts: &mut Vec<f64>, vals: &mut Vec<f64>| -> Result<(), OperatorError> {
            let fv = match grid.node_index(s) {
                Some(k) => data.f_nodes[k],
                None => f_at(expr, component, t_row, s, u)?,
            };
            pts.push(s);
            vals.push(data.kernel.kernel_branch(t_row, s, le_eta, le_t) * fv);
            Ok(())
        };

        sample(x0, &mut pts, &mut vals)?;
        // Grid nodes strictly inside the piece.
        let k_lo = (x0 * n as f64).floor() as usize;
        for k in k_lo..=n {
            let t_k = grid.node(k);
            if t_k <= x0 + NODE_SNAP_TOL {
                continue;
            }
            if t_k >= x1 - NODE_SNAP_TOL {
                break;
            }
            pts.push(t_k);
            vals.push(data.kernel.kernel_branch(t_row, t_k, le_eta, le_t) * data.f_nodes[k]);
        }
        sample(x1, &mut pts, &mut vals)?;

        if pts.len() == 2 {
            // A piece with no interior node: borrow the nearest node outside
            // the piece, extending the kernel branch smoothly past the
            // breakpoint, and integrate the parabola over the piece only.
            // A plain trapezoid here would cost an O(h^3) kink in the rows.
            let mut after = (x1 * n as f64).floor() as usize + 1;
            while after <= n && grid.node(after) <= x1 + NODE_SNAP_TOL {
                after += 1;
            }
            let k_ext = if after <= n {
                after
            } else {
                let mut before = (x0 * n as f64).ceil() as isize - 1;
                while before > 0 && grid.node(before as usize) >= x0 - NODE_SNAP_TOL {
                    before -= 1;
                }
                debug_assert!(before >= 0);
                before as usize
            };
            let s_ext = grid.node(k_ext);
            debug_assert!(s_ext < x0 - NODE_SNAP_TOL || s_ext > x1 + NODE_SNAP_TOL);
            total += parabola_integral(
                [pts[0], pts[1], s_ext],
                [
                    vals[0],
                    vals[1],
                    data.kernel.kernel_branch(t_row, s_ext, le_eta, le_t) * data.f_nodes[k_ext],
                ],
                x0,
                x1,
            );
        } else {
            total += integrate_piece(&pts, &vals);
        }
    }
    Ok(total)
}

/// Apply the discretized operator `S` to a grid pair.
pub fn apply_s(problem: &SystemProblem, u: &GridPair) -> Result<GridPair, OperatorError> {
    let grid = u.grid();
    let data = prepare(problem, u)?;
    let mut outputs = Vec::with_capacity(2);
    for (i, comp) in problem.components.iter().enumerate() {
        let d = &data[i];
        let mut values = Vec::with_capacity(grid.n() + 1);
        for j in 0..=grid.n() {
            let t = grid.node(j);
            let integral = integrate_row(d, i, &comp.f, grid, u, t)?;
            values.push(
                d.kernel.psi0_unchecked(t) * d.h_value
                    + d.kernel.psi1_unchecked(t) * d.g_value
                    + integral,
            );
        }
        outputs.push(GridFunction::new(grid, values)?);
    }
    let u2 = outputs.pop().unwrap();
    let u1 = outputs.pop().unwrap();
    Ok(GridPair::new(u1, u2)?)
}

/// Residual `||u - lambda * S(u)||_Y` on the grid.
pub fn integral_residual(
    problem: &SystemProblem,
    lambda: f64,
    u: &GridPair,
) -> Result<f64, OperatorError> {
    let s = apply_s(problem, u)?;
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        let a = u.component(i).values();
        let b = s.component(i).values();
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x - lambda * y).abs());
        }
    }
    Ok(worst)
}
