//! Closed-form kernels, boundary-influence functions and cone constants for
//! the two per-component boundary-condition kinds.
//!
//! For `DirichletAtZero` (with `q = beta + eta`):
//!
//! ```text
//! K(t,s)  = (t/q) * beta + (t/q) * (eta - s) * 1[s <= eta] - (t - s) * 1[s <= t]
//! psi0(t) = 1 - t/q        psi1(t) = t/q
//! Phi(s)  = s               if q >= 1/2,   ((1-q)/q) * s  otherwise
//! c       = min(a*beta/q, (q-b)/q)         if q >= 1/2
//!           min(a*beta/(1-q), (q-b)/(1-q)) otherwise
//! c0 = 1 - b/q    c1 = a
//! ```
//!
//! For `NeumannAtZero`:
//!
//! ```text
//! K(t,s)  = beta + (eta - s) * 1[s <= eta] - (t - s) * 1[s <= t]
//! psi0(t) = q - t           psi1(t) = 1
//! Phi(s)  = q               if q >= 1/2,   1 - q          otherwise
//! c       = (q-b)/q         if q >= 1/2,   (q-b)/(1-q)    otherwise
//! c0 = (q-b)/q    c1 = 1
//! ```
//!
//! Indicators are closed at the breakpoint (`1[s <= x]` includes `s = x`);
//! the kernels are continuous there, so the convention only fixes code paths.
//! The kernels are piecewise linear in `s` with breakpoints at `s = eta` and
//! `s = t`, and may change sign outside the strip `t < beta + eta`.

use crate::problem::{BcKind, ComponentParams};
use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
#[error("argument {0} outside the domain [0, 1]")]
pub struct DomainError(pub f64);

/// Derived cone constants `c`, `c0`, `c1` and `c_tilde = min(c, c0, c1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeConstants {
    pub c: f64,
    pub c0: f64,
    pub c1: f64,
    pub c_tilde: f64,
    /// Exact values when all parameters were given as rationals.
    #[serde(skip)]
    pub exact: Option<ExactConeConstants>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactConeConstants {
    pub c: Rational64,
    pub c0: Rational64,
    pub c1: Rational64,
    pub c_tilde: Rational64,
}

/// Kernel data for one component: the BC kind, the parameters, and the
/// derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSet {
    pub kind: BcKind,
    beta: f64,
    eta: f64,
    a: f64,
    b: f64,
    pub constants: ConeConstants,
}

impl KernelSet {
    pub fn new(kind: BcKind, params: &ComponentParams) -> KernelSet {
        KernelSet {
            kind,
            beta: params.beta.value(),
            eta: params.eta.value(),
            a: params.a.value(),
            b: params.b.value(),
            constants: cone_constants(kind, params),
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn check_domain(x: f64) -> Result<(), DomainError> {
        if (0.0..=1.0).contains(&x) {
            Ok(())
        } else {
            Err(DomainError(x))
        }
    }

    /// Kernel `K(t, s)` for `t, s` in `[0, 1]`.
    pub fn kernel_value(&self, t: f64, s: f64) -> Result<f64, DomainError> {
        Self::check_domain(t)?;
        Self::check_domain(s)?;
        Ok(self.kernel_unchecked(t, s))
    }

    #[inline]
    pub(crate) fn kernel_unchecked(&self, t: f64, s: f64) -> f64 {
        self.kernel_branch(t, s, s <= self.eta, s <= t)
    }

    /// Kernel with the two indicator branches fixed by the caller. The
    /// quadrature uses this to extend a smooth piece past its breakpoint when
    /// it needs an extra interpolation node.
    #[inline]
    pub(crate) fn kernel_branch(&self, t: f64, s: f64, le_eta: bool, le_t: bool) -> f64 {
        let boundary = match self.kind {
            BcKind::DirichletAtZero => {
                let q = self.beta + self.eta;
                let tq = t / q;
                tq * self.beta + if le_eta { tq * (self.eta - s) } else { 0.0 }
            }
            BcKind::NeumannAtZero => self.beta + if le_eta { self.eta - s } else { 0.0 },
        };
        boundary - if le_t { t - s } else { 0.0 }
    }

    /// Boundary-influence function multiplying `H` in the integral form.
    pub fn psi0(&self, t: f64) -> Result<f64, DomainError> {
        Self::check_domain(t)?;
        Ok(self.psi0_unchecked(t))
    }

    #[inline]
    pub(crate) fn psi0_unchecked(&self, t: f64) -> f64 {
        let q = self.beta + self.eta;
        match self.kind {
            BcKind::DirichletAtZero => 1.0 - t / q,
            BcKind::NeumannAtZero => q - t,
        }
    }

    /// Boundary-influence function multiplying `G` in the integral form.
    pub fn psi1(&self, t: f64) -> Result<f64, DomainError> {
        Self::check_domain(t)?;
        Ok(self.psi1_unchecked(t))
    }

    #[inline]
    pub(crate) fn psi1_unchecked(&self, t: f64) -> f64 {
        match self.kind {
            BcKind::DirichletAtZero => t / (self.beta + self.eta),
            BcKind::NeumannAtZero => 1.0,
        }
    }

    /// Upper envelope `Phi(s)` with `K(t,s) <= Phi(s)` for all `t`.
    pub fn phi_upper(&self, s: f64) -> Result<f64, DomainError> {
        Self::check_domain(s)?;
        let q = self.beta + self.eta;
        Ok(match self.kind {
            BcKind::DirichletAtZero => {
                if q >= 0.5 {
                    s
                } else {
                    (1.0 - q) / q * s
                }
            }
            BcKind::NeumannAtZero => {
                if q >= 0.5 {
                    q
                } else {
                    1.0 - q
                }
            }
        })
    }

    /// Lipschitz bound for `t`-continuity: `|K(t,s) - K(t',s)| <= L |t - t'|`.
    pub fn t_lipschitz(&self) -> f64 {
        match self.kind {
            BcKind::DirichletAtZero => 1.0 + self.eta / (self.beta + self.eta),
            BcKind::NeumannAtZero => 1.0,
        }
    }

    /// Exact integral of `s -> K(t, s)` over `[lo, hi]`, splitting at the
    /// kernel breakpoints. Each smooth piece is linear in `s`, so one
    /// trapezoid per piece integrates it exactly.
    pub fn integral_over(&self, lo: f64, hi: f64, t: f64) -> f64 {
        debug_assert!(lo <= hi);
        let mut cuts = [lo, hi, hi, hi];
        let mut m = 2;
        for bp in [self.eta, t] {
            if bp > lo && bp < hi {
                cuts[m] = bp;
                m += 1;
            }
        }
        let cuts = &mut cuts[..m];
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            if x1 - x0 <= 0.0 {
                continue;
            }
            total += 0.5 * (x1 - x0) * (self.kernel_unchecked(t, x0) + self.kernel_unchecked(t, x1));
        }
        total
    }
}

/// Cone constants for the given kind and parameters. Computed in exact
/// rational arithmetic when all parameters carry rational forms, else in
/// floating point (the `f64` fields are always populated).
pub fn cone_constants(kind: BcKind, params: &ComponentParams) -> ConeConstants {
    if let Some((beta, eta, a, b)) = params.exact() {
        let half = Rational64::new(1, 2);
        let one = Rational64::new(1, 1);
        let q = beta + eta;
        let (c, c0, c1) = match kind {
            BcKind::DirichletAtZero => {
                let c = if q >= half {
                    (a * beta / q).min((q - b) / q)
                } else {
                    (a * beta / (one - q)).min((q - b) / (one - q))
                };
                (c, one - b / q, a)
            }
            BcKind::NeumannAtZero => {
                let c = if q >= half {
                    (q - b) / q
                } else {
                    (q - b) / (one - q)
                };
                (c, (q - b) / q, one)
            }
        };
        let c_tilde = c.min(c0).min(c1);
        return ConeConstants {
            c: c.to_f64().unwrap(),
            c0: c0.to_f64().unwrap(),
            c1: c1.to_f64().unwrap(),
            c_tilde: c_tilde.to_f64().unwrap(),
            exact: Some(ExactConeConstants { c, c0, c1, c_tilde }),
        };
    }

    let (beta, eta, a, b) = (
        params.beta.value(),
        params.eta.value(),
        params.a.value(),
        params.b.value(),
    );
    let q = beta + eta;
    let (c, c0, c1) = match kind {
        BcKind::DirichletAtZero => {
            let c = if q >= 0.5 {
                (a * beta / q).min((q - b) / q)
            } else {
                (a * beta / (1.0 - q)).min((q - b) / (1.0 - q))
            };
            (c, 1.0 - b / q, a)
        }
        BcKind::NeumannAtZero => {
            let c = if q >= 0.5 { (q - b) / q } else { (q - b) / (1.0 - q) };
            (c, (q - b) / q, 1.0)
        }
    };
    ConeConstants {
        c,
        c0,
        c1,
        c_tilde: c.min(c0).min(c1),
        exact: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ParamValue;
    use proptest::prelude::*;

    fn params_rational(
        beta: (i64, i64),
        eta: (i64, i64),
        a: (i64, i64),
        b: (i64, i64),
    ) -> ComponentParams {
        ComponentParams {
            beta: ParamValue::from_rational(beta.0, beta.1),
            eta: ParamValue::from_rational(eta.0, eta.1),
            a: ParamValue::from_rational(a.0, a.1),
            b: ParamValue::from_rational(b.0, b.1),
        }
    }

    fn quarter_params() -> ComponentParams {
        params_rational((1, 4), (1, 4), (1, 6), (1, 3))
    }

    fn third_params() -> ComponentParams {
        params_rational((1, 3), (1, 4), (1, 6), (1, 3))
    }

    #[test]
    fn neumann_kernel_at_origin() {
        let ks = KernelSet::new(BcKind::NeumannAtZero, &quarter_params());
        assert_eq!(ks.kernel_value(0.0, 0.0).unwrap(), 0.5);
    }

    #[test]
    fn dirichlet_kernel_vanishes_at_t_zero() {
        let ks = KernelSet::new(BcKind::DirichletAtZero, &third_params());
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            assert_eq!(ks.kernel_value(0.0, s).unwrap(), 0.0);
        }
    }

    #[test]
    fn dirichlet_kernel_changes_sign_outside_strip() {
        let ks = KernelSet::new(BcKind::DirichletAtZero, &quarter_params());
        let v = ks.kernel_value(1.0, 0.2).unwrap();
        assert!((v - (-0.2)).abs() < 1e-15, "got {v}");
    }

    #[test]
    fn kernel_rejects_out_of_domain_arguments() {
        let ks = KernelSet::new(BcKind::NeumannAtZero, &quarter_params());
        assert!(ks.kernel_value(-0.1, 0.5).is_err());
        assert!(ks.kernel_value(0.5, 1.5).is_err());
        assert!(ks.psi0(2.0).is_err());
        assert!(ks.psi1(-1.0).is_err());
        assert!(ks.phi_upper(1.0 + 1e-9).is_err());
    }

    #[test]
    fn psi_endpoint_values() {
        let dir = KernelSet::new(BcKind::DirichletAtZero, &quarter_params());
        assert_eq!(dir.psi0(0.0).unwrap(), 1.0);
        assert_eq!(dir.psi1(0.0).unwrap(), 0.0);
        // beta + eta = 1/2, so psi1(1) = 2 = 1/(beta+eta).
        assert_eq!(dir.psi1(1.0).unwrap(), 2.0);

        let neu = KernelSet::new(BcKind::NeumannAtZero, &quarter_params());
        assert_eq!(neu.psi0(0.5).unwrap(), 0.0);
        assert_eq!(neu.psi1(0.7).unwrap(), 1.0);
    }

    #[test]
    fn phi_upper_branches() {
        let dir = KernelSet::new(BcKind::DirichletAtZero, &quarter_params());
        assert_eq!(dir.phi_upper(0.3).unwrap(), 0.3);

        let params = ComponentParams::from_f64(0.75, 0.2, 1.0 / 6.0, 1.0 / 3.0);
        let neu = KernelSet::new(BcKind::NeumannAtZero, &params);
        for k in 0..=10 {
            assert!((neu.phi_upper(k as f64 / 10.0).unwrap() - 0.95).abs() < 1e-15);
        }

        let small = ComponentParams::from_f64(0.2, 0.2, 0.1, 0.3);
        let neu_small = KernelSet::new(BcKind::NeumannAtZero, &small);
        assert!((neu_small.phi_upper(0.5).unwrap() - 0.6).abs() < 1e-15);
        let dir_small = KernelSet::new(BcKind::DirichletAtZero, &small);
        assert!((dir_small.phi_upper(0.5).unwrap() - 0.5 * 0.6 / 0.4).abs() < 1e-15);

        assert!(dir.phi_upper(0.0).unwrap() >= 0.0);
        assert!(neu.phi_upper(0.0).unwrap() >= 0.0);
    }

    #[test]
    fn cone_constants_reference_configurations() {
        // Dirichlet, beta = eta = 1/4, [1/6, 1/3].
        let d = cone_constants(BcKind::DirichletAtZero, &quarter_params());
        let e = d.exact.unwrap();
        assert_eq!(e.c, Rational64::new(1, 12));
        assert_eq!(e.c0, Rational64::new(1, 3));
        assert_eq!(e.c1, Rational64::new(1, 6));
        assert_eq!(e.c_tilde, Rational64::new(1, 12));

        // Neumann, beta = eta = 1/4.
        let n = cone_constants(BcKind::NeumannAtZero, &quarter_params());
        let e = n.exact.unwrap();
        assert_eq!(e.c, Rational64::new(1, 3));
        assert_eq!(e.c0, Rational64::new(1, 3));
        assert_eq!(e.c1, Rational64::new(1, 1));
        assert_eq!(e.c_tilde, Rational64::new(1, 3));

        // Neumann, beta = 1/3, eta = 1/4.
        let n = cone_constants(BcKind::NeumannAtZero, &third_params());
        let e = n.exact.unwrap();
        assert_eq!(e.c, Rational64::new(3, 7));
        assert_eq!(e.c_tilde, Rational64::new(3, 7));

        // Dirichlet, beta = 1/3, eta = 1/4: the corner formula gives 2/21.
        let d = cone_constants(BcKind::DirichletAtZero, &third_params());
        let e = d.exact.unwrap();
        assert_eq!(e.c, Rational64::new(2, 21));
        assert_eq!(e.c0, Rational64::new(3, 7));
        assert_eq!(e.c1, Rational64::new(1, 6));
        assert_eq!(e.c_tilde, Rational64::new(2, 21));
    }

    #[test]
    fn float_params_give_float_constants() {
        let params = ComponentParams::from_f64(0.25, 0.25, 1.0 / 6.0, 1.0 / 3.0);
        let c = cone_constants(BcKind::DirichletAtZero, &params);
        assert!(c.exact.is_none());
        assert!((c.c_tilde - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn kernel_bounded_by_envelope_on_sample_grid() {
        // D3 on a 200 x 200 grid for both kinds and both parameter sets.
        for kind in [BcKind::DirichletAtZero, BcKind::NeumannAtZero] {
            for params in [quarter_params(), third_params()] {
                let ks = KernelSet::new(kind, &params);
                let (a, b) = ks.interval();
                let m = 200;
                for i in 0..=m {
                    let s = i as f64 / m as f64;
                    let phi = ks.phi_upper(s).unwrap();
                    for j in 0..=m {
                        let t = j as f64 / m as f64;
                        let k = ks.kernel_unchecked(t, s);
                        assert!(
                            k <= phi + 1e-12,
                            "upper bound fails: kind {kind:?} K({t},{s}) = {k} > {phi}"
                        );
                        let t_in = a + (b - a) * j as f64 / m as f64;
                        let k_in = ks.kernel_unchecked(t_in, s);
                        assert!(
                            k_in >= ks.constants.c * phi - 1e-12,
                            "lower bound fails: kind {kind:?} K({t_in},{s}) = {k_in}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn kernel_is_lipschitz_in_t() {
        for kind in [BcKind::DirichletAtZero, BcKind::NeumannAtZero] {
            let ks = KernelSet::new(kind, &third_params());
            let lip = ks.t_lipschitz();
            let m = 101;
            for i in 0..m {
                let t = i as f64 / (m - 1) as f64;
                let t2 = (t + 0.013).min(1.0);
                for j in 0..m {
                    let s = j as f64 / (m - 1) as f64;
                    let d = (ks.kernel_unchecked(t, s) - ks.kernel_unchecked(t2, s)).abs();
                    assert!(d <= lip * (t2 - t) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn integral_over_matches_closed_form() {
        // Neumann with F = 1: int_0^1 K(t,s) ds = beta + eta^2/2 - t^2/2.
        let params = ComponentParams::from_f64(0.75, 0.2, 1.0 / 6.0, 1.0 / 3.0);
        let ks = KernelSet::new(BcKind::NeumannAtZero, &params);
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            let v = ks.integral_over(0.0, 1.0, t);
            let expect = 0.75 + 0.02 - t * t / 2.0;
            assert!((v - expect).abs() < 1e-14, "t = {t}: {v} vs {expect}");
        }
        // Dirichlet closed form: int_0^1 K(t,s) ds
        //   = (t/q)(beta + eta^2/2) - t^2/2.
        let ks = KernelSet::new(BcKind::DirichletAtZero, &quarter_params());
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            let v = ks.integral_over(0.0, 1.0, t);
            let expect = (t / 0.5) * (0.25 + 0.25 * 0.25 / 2.0) - t * t / 2.0;
            assert!((v - expect).abs() < 1e-14, "t = {t}: {v} vs {expect}");
        }
    }

    proptest! {
        #[test]
        fn cone_constants_lie_in_unit_interval(
            beta in 0.01..0.9f64,
            eta_frac in 0.05..0.95f64,
            a_frac in 0.05..0.9f64,
            b_frac in 0.05..0.95f64,
        ) {
            // Build valid parameters: beta + eta < 1, 0 < a < b < beta + eta.
            let eta = (1.0 - beta) * eta_frac * 0.99;
            prop_assume!(eta > 1e-6 && eta < 1.0);
            let q = beta + eta;
            let b = q * (0.1 + 0.89 * b_frac);
            let a = b * a_frac * 0.99;
            prop_assume!(a > 1e-9);
            let params = ComponentParams::from_f64(beta, eta, a, b);
            for kind in [BcKind::DirichletAtZero, BcKind::NeumannAtZero] {
                let c = cone_constants(kind, &params);
                for v in [c.c, c.c0, c.c1, c.c_tilde] {
                    prop_assert!(v > 0.0 && v <= 1.0, "constant {v} out of (0,1]");
                }
                prop_assert!(c.c_tilde <= c.c && c.c_tilde <= c.c0 && c.c_tilde <= c.c1);
            }
        }
    }
}
