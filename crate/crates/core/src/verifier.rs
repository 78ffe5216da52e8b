//! Numerical certification of the existence-theorem hypotheses: kernel
//! envelope bounds, lower constants for the nonlinearities and functionals,
//! and the positivity condition
//!
//! ```text
//! sup_{t in [a_i, b_i]} [ psi_i0(t) zeta_H + psi_i1(t) zeta_G
//!                         + gamma * int_{a_i}^{b_i} K_i(t, s) ds ] > 0
//! ```
//!
//! for both components. A verdict of `true` means the sufficient condition
//! for an eigenpair on every cone sphere holds for the given radius.

use crate::expr::{EvalError, Expr};
use crate::kernels::KernelSet;
use crate::problem::{ConeSpec, Functional, SystemProblem};
use crate::presets::Preset;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

/// Sampling densities and tolerances for `verify`.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Per-axis density of the kernel-bound sample grid.
    pub kernel_grid_m: usize,
    /// Per-axis density of the `(t, u1, u2)` box when the nonlinearity is not
    /// recognized as monotone.
    pub box_m: usize,
    /// Node count on `[a_i, b_i]` for the positivity supremum.
    pub t_grid_m: usize,
    /// Monte Carlo samples for general-functional lower estimates.
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            kernel_grid_m: 200,
            box_m: 50,
            t_grid_m: 200,
            mc_samples: 4096,
            seed: 0x5eed_cafe,
        }
    }
}

/// Slack of the four kernel inequalities on a sample grid; `ok` requires
/// every slack to be at least `-1e-12`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelBoundsReport {
    /// `min (Phi(s) - K(t,s))` over `t, s` in `[0,1]`.
    pub upper_slack: f64,
    /// `min (K(t,s) - c * Phi(s))` over `t` in `[a,b]`, `s` in `[0,1]`.
    pub lower_slack: f64,
    /// `min (psi0(t) - c0 * max psi0)` over `t` in `[a,b]`.
    pub psi0_slack: f64,
    /// `min (psi1(t) - c1 * max psi1)` over `t` in `[a,b]`.
    pub psi1_slack: f64,
    pub d3_ok: bool,
    pub d4_ok: bool,
    /// Set when `c_tilde` is so small that the lower bounds are vacuous.
    pub near_degenerate: bool,
}

pub const BOUND_SLACK_TOL: f64 = 1e-12;

/// Sample the envelope and boundary-function inequalities on an `m x m` grid.
pub fn check_kernel_bounds(ks: &KernelSet, m: usize) -> KernelBoundsReport {
    assert!(m >= 50, "kernel bound checks need m >= 50");
    let (a, b) = ks.interval();
    let c = ks.constants.c;

    let mut upper_slack = f64::INFINITY;
    let mut lower_slack = f64::INFINITY;
    for i in 0..=m {
        let s = i as f64 / m as f64;
        let phi = ks.phi_upper(s).unwrap();
        for j in 0..=m {
            let t = j as f64 / m as f64;
            upper_slack = upper_slack.min(phi - ks.kernel_value(t, s).unwrap());
            let t_in = a + (b - a) * j as f64 / m as f64;
            lower_slack = lower_slack.min(ks.kernel_value(t_in, s).unwrap() - c * phi);
        }
    }

    let mut psi0_max = f64::NEG_INFINITY;
    let mut psi1_max = f64::NEG_INFINITY;
    for j in 0..=m {
        let t = j as f64 / m as f64;
        psi0_max = psi0_max.max(ks.psi0(t).unwrap());
        psi1_max = psi1_max.max(ks.psi1(t).unwrap());
    }
    let mut psi0_slack = f64::INFINITY;
    let mut psi1_slack = f64::INFINITY;
    for j in 0..=m {
        let t = a + (b - a) * j as f64 / m as f64;
        psi0_slack = psi0_slack.min(ks.psi0(t).unwrap() - ks.constants.c0 * psi0_max);
        psi1_slack = psi1_slack.min(ks.psi1(t).unwrap() - ks.constants.c1 * psi1_max);
    }

    KernelBoundsReport {
        upper_slack,
        lower_slack,
        psi0_slack,
        psi1_slack,
        d3_ok: upper_slack >= -BOUND_SLACK_TOL && lower_slack >= -BOUND_SLACK_TOL,
        d4_ok: psi0_slack >= -BOUND_SLACK_TOL && psi1_slack >= -BOUND_SLACK_TOL,
        near_degenerate: ks.constants.c_tilde < 1e-6,
    }
}

/// A lower bound together with a rigor flag: `rigorous` means the bound is a
/// corner evaluation or an exact constant, not a sampled estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LowerBound {
    pub value: f64,
    pub rigorous: bool,
}

/// Uniform lower constant `gamma` for a nonlinearity over
/// `[a_i, b_i] x prod_k [delta_ik * c_tilde_i * R, R]`.
///
/// Componentwise-monotone, `t`-free expressions are evaluated exactly at the
/// lower corner; everything else is sampled on an `m^3` grid (corner
/// included) and flagged non-rigorous.
pub fn gamma_lower(
    f: &Expr,
    component: usize,
    cone: &ConeSpec,
    r: f64,
    m: usize,
) -> Result<LowerBound, EvalError> {
    assert!(r > 0.0);
    let (a, b) = cone.intervals[component];
    let ct = cone.c_tilde[component];
    let lo = [
        if component == 0 { ct * r } else { 0.0 },
        if component == 1 { ct * r } else { 0.0 },
    ];

    if !f.references_t() && f.is_monotone_nondecreasing() {
        let value = f.eval_state(a, lo[0], lo[1])?;
        return Ok(LowerBound {
            value,
            rigorous: true,
        });
    }

    let m = m.max(2);
    let mut min = f.eval_state(a, lo[0], lo[1])?;
    for it in 0..=m {
        let t = a + (b - a) * it as f64 / m as f64;
        for i1 in 0..=m {
            let u1 = lo[0] + (r - lo[0]) * i1 as f64 / m as f64;
            for i2 in 0..=m {
                let u2 = lo[1] + (r - lo[1]) * i2 as f64 / m as f64;
                min = min.min(f.eval_state(t, u1, u2)?);
            }
        }
    }
    Ok(LowerBound {
        value: min,
        rigorous: false,
    })
}

/// Lower bound `zeta` for a functional over the cone sphere of radius `r`.
///
/// Affine nonnegative functionals return their constant term (rigorous: all
/// point-evaluation terms are nonnegative on the cone). General expressions
/// are minimized over random point-evaluation tuples in `[0, r]` plus the
/// zero corner, and flagged non-rigorous.
pub fn zeta_lower(
    f: &Functional,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<LowerBound, EvalError> {
    match f {
        Functional::Affine { constant, .. } => Ok(LowerBound {
            value: *constant,
            rigorous: true,
        }),
        Functional::General(expr) => {
            let mut vars = Vec::new();
            expr.collect_point_evals(&mut vars);
            let eval_at = |assign: &[f64]| -> Result<f64, EvalError> {
                expr.eval_points(&|c, p| {
                    let idx = vars
                        .iter()
                        .position(|&(vc, vp)| vc == c && vp == p)
                        .unwrap();
                    assign[idx]
                })
            };
            let mut min = eval_at(&vec![0.0; vars.len()])?;
            min = min.min(eval_at(&vec![r; vars.len()])?);
            let mut rng = StdRng::seed_from_u64(seed);
            let mut assign = vec![0.0; vars.len()];
            for _ in 0..samples {
                for v in assign.iter_mut() {
                    *v = rng.random_range(0.0..=r);
                }
                min = min.min(eval_at(&assign)?);
            }
            Ok(LowerBound {
                value: min,
                rigorous: false,
            })
        }
    }
}

/// Supremum over `t` in `[a, b]` of
/// `psi0(t) * zeta_h + psi1(t) * zeta_g + gamma * int_a^b K(t, s) ds`,
/// sampled on a `t_m + 1`-node grid; the kernel integral is exact.
pub fn c3_value(ks: &KernelSet, gamma: f64, zeta_h: f64, zeta_g: f64, t_m: usize) -> f64 {
    let (a, b) = ks.interval();
    let mut sup = f64::NEG_INFINITY;
    for j in 0..=t_m {
        let t = a + (b - a) * j as f64 / t_m as f64;
        let v = ks.psi0(t).unwrap() * zeta_h
            + ks.psi1(t).unwrap() * zeta_g
            + gamma * ks.integral_over(a, b, t);
        sup = sup.max(v);
    }
    sup
}

/// Per-component verification data.
#[derive(Debug, Clone, Serialize)]
pub struct ComponentReport {
    pub gamma_min: f64,
    pub gamma_rigorous: bool,
    pub zeta_h: f64,
    pub zeta_h_rigorous: bool,
    pub zeta_g: f64,
    pub zeta_g_rigorous: bool,
    /// Supremum of the positivity expression over `[a_i, b_i]`.
    pub c3_sup: f64,
    /// Closed-form lower-estimate chain recorded for the built-in examples.
    pub reference_bound: Option<f64>,
    pub d3_ok: bool,
    pub d4_ok: bool,
    pub kernel_bounds: KernelBoundsReport,
    /// All bounds entering `c3_sup` were computed rigorously.
    pub rigorous: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub r: f64,
    pub components: [ComponentReport; 2],
    /// `min_i c3_sup > 0` and all kernel bounds hold.
    pub verdict: bool,
}

impl VerificationReport {
    pub fn min_c3_sup(&self) -> f64 {
        self.components[0].c3_sup.min(self.components[1].c3_sup)
    }
}

/// Run all hypothesis checks for radius `r`. For named built-in examples the
/// recorded closed-form chain value is attached as `reference_bound`.
pub fn verify(
    problem: &SystemProblem,
    r: f64,
    opts: &VerifyOptions,
) -> Result<VerificationReport, EvalError> {
    assert!(r > 0.0, "verification radius must be positive");
    let cone = problem.cone_spec();
    let preset = problem
        .name
        .as_deref()
        .and_then(Preset::from_name);

    let mut components = Vec::with_capacity(2);
    for (i, comp) in problem.components.iter().enumerate() {
        let ks = KernelSet::new(comp.bc, &comp.params);
        let bounds = check_kernel_bounds(&ks, opts.kernel_grid_m);
        let gamma = gamma_lower(&comp.f, i, &cone, r, opts.box_m)?;
        let zeta_h = zeta_lower(&comp.h, r, opts.mc_samples, opts.seed)?;
        let zeta_g = zeta_lower(&comp.g, r, opts.mc_samples, opts.seed ^ 1)?;
        let c3_sup = c3_value(&ks, gamma.value, zeta_h.value, zeta_g.value, opts.t_grid_m);
        components.push(ComponentReport {
            gamma_min: gamma.value,
            gamma_rigorous: gamma.rigorous,
            zeta_h: zeta_h.value,
            zeta_h_rigorous: zeta_h.rigorous,
            zeta_g: zeta_g.value,
            zeta_g_rigorous: zeta_g.rigorous,
            c3_sup,
            reference_bound: preset.map(|p| p.reference_chain_bound(i, r)),
            d3_ok: bounds.d3_ok,
            d4_ok: bounds.d4_ok,
            kernel_bounds: bounds,
            rigorous: gamma.rigorous && zeta_h.rigorous && zeta_g.rigorous,
        });
    }
    let components: [ComponentReport; 2] = components.try_into().ok().unwrap();
    let verdict = components
        .iter()
        .all(|c| c.c3_sup > 0.0 && c.d3_ok && c.d4_ok);
    Ok(VerificationReport {
        r,
        components,
        verdict,
    })
}
