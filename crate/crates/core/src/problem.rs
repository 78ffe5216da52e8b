//! Domain types for a coupled two-component system: boundary-condition kinds,
//! parameters, boundary functionals, cone geometry and validation.

use crate::expr::{EvalError, Expr};
use crate::grid::GridPair;
use crate::kernels;
use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::Serialize;
use std::fmt;

/// Boundary-condition family at `t = 0`, per component. Every component also
/// carries the thermostat condition `beta * u'(1) + u(eta) = lambda * G[u]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BcKind {
    /// `u(0) = lambda * H[u]`.
    DirichletAtZero,
    /// `u'(0) + lambda * H[u] = 0`.
    NeumannAtZero,
}

impl BcKind {
    pub fn file_name(&self) -> &'static str {
        match self {
            BcKind::DirichletAtZero => "dirichlet0",
            BcKind::NeumannAtZero => "neumann0",
        }
    }

    pub fn from_file_name(s: &str) -> Option<BcKind> {
        match s {
            "dirichlet0" => Some(BcKind::DirichletAtZero),
            "neumann0" => Some(BcKind::NeumannAtZero),
            _ => None,
        }
    }
}

/// A scalar parameter that remembers an exact rational form when it was given
/// as one (e.g. "1/4" in a problem file). Derived cone constants are computed
/// in exact arithmetic whenever all inputs carry a rational form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamValue {
    value: f64,
    exact: Option<Rational64>,
}

impl ParamValue {
    pub fn from_f64(value: f64) -> ParamValue {
        ParamValue { value, exact: None }
    }

    pub fn from_rational(numer: i64, denom: i64) -> ParamValue {
        let r = Rational64::new(numer, denom);
        ParamValue {
            value: r.to_f64().unwrap(),
            exact: Some(r),
        }
    }

    /// Parse "p/q" as an exact rational, otherwise a plain float literal.
    pub fn parse(s: &str) -> Result<ParamValue, String> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let numer: i64 = p.trim().parse().map_err(|_| format!("bad numerator in '{s}'"))?;
            let denom: i64 = q.trim().parse().map_err(|_| format!("bad denominator in '{s}'"))?;
            if denom == 0 {
                return Err(format!("zero denominator in '{s}'"));
            }
            Ok(ParamValue::from_rational(numer, denom))
        } else {
            let value: f64 = s.parse().map_err(|_| format!("bad numeric literal '{s}'"))?;
            if !value.is_finite() {
                return Err(format!("non-finite literal '{s}'"));
            }
            Ok(ParamValue::from_f64(value))
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<Rational64> {
        self.exact
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            None => write!(f, "{}", self.value),
        }
    }
}

/// Per-component parameters: the thermostat coefficients `beta`, `eta` and the
/// subinterval `[a, b]` carried by the cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentParams {
    pub beta: ParamValue,
    pub eta: ParamValue,
    pub a: ParamValue,
    pub b: ParamValue,
}

impl ComponentParams {
    pub fn from_f64(beta: f64, eta: f64, a: f64, b: f64) -> ComponentParams {
        ComponentParams {
            beta: ParamValue::from_f64(beta),
            eta: ParamValue::from_f64(eta),
            a: ParamValue::from_f64(a),
            b: ParamValue::from_f64(b),
        }
    }

    pub fn beta_plus_eta(&self) -> f64 {
        self.beta.value() + self.eta.value()
    }

    /// Exact `(beta, eta, a, b)` when every entry carries a rational form.
    pub fn exact(&self) -> Option<(Rational64, Rational64, Rational64, Rational64)> {
        Some((
            self.beta.exact()?,
            self.eta.exact()?,
            self.a.exact()?,
            self.b.exact()?,
        ))
    }
}

/// One term `weight * u_component(point)` of an affine functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTerm {
    pub component: u8,
    pub point: f64,
    pub weight: f64,
}

/// A boundary functional. The affine nonnegative form admits rigorous lower
/// bounds on the cone; general expressions fall back to sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum Functional {
    Affine {
        terms: Vec<AffineTerm>,
        constant: f64,
    },
    General(Expr),
}

impl Functional {
    pub fn zero() -> Functional {
        Functional::Affine {
            terms: Vec::new(),
            constant: 0.0,
        }
    }

    pub fn evaluate(&self, u: &GridPair) -> Result<f64, EvalError> {
        match self {
            Functional::Affine { terms, constant } => {
                let mut acc = *constant;
                for term in terms {
                    let v = u.eval_component(term.component, term.point).map_err(|e| {
                        EvalError {
                            kind: crate::expr::EvalErrorKind::NonFinite,
                            subexpr: e.to_string(),
                        }
                    })?;
                    acc += term.weight * v;
                }
                Ok(acc)
            }
            Functional::General(expr) => {
                expr.eval_points(&|c, p| u.eval_component(c, p).unwrap_or(f64::NAN))
            }
        }
    }

    /// All `(component, point)` evaluations the functional reads.
    pub fn point_evals(&self) -> Vec<(u8, f64)> {
        match self {
            Functional::Affine { terms, .. } => {
                terms.iter().map(|t| (t.component, t.point)).collect()
            }
            Functional::General(expr) => {
                let mut out = Vec::new();
                expr.collect_point_evals(&mut out);
                out
            }
        }
    }
}

/// One component of the coupled system.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub bc: BcKind,
    pub params: ComponentParams,
    /// Nonlinearity `F(t, u1, u2)` (variables `t`, `u1`, `u2`).
    pub f: Expr,
    /// Functional on the condition at `t = 0`.
    pub h: Functional,
    /// Functional on the thermostat condition.
    pub g: Functional,
}

/// A full coupled problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemProblem {
    pub components: [Component; 2],
    /// Optional name; built-in presets carry "example1".."example3".
    pub name: Option<String>,
}

impl SystemProblem {
    /// Cone data derived from the kernels of both components.
    pub fn cone_spec(&self) -> ConeSpec {
        let mut c_tilde = [0.0; 2];
        let mut intervals = [(0.0, 0.0); 2];
        for i in 0..2 {
            let comp = &self.components[i];
            let consts = kernels::cone_constants(comp.bc, &comp.params);
            c_tilde[i] = consts.c_tilde;
            intervals[i] = (comp.params.a.value(), comp.params.b.value());
        }
        ConeSpec { c_tilde, intervals }
    }
}

/// The cone `Q`: componentwise nonnegative functions whose minimum on
/// `[a_i, b_i]` dominates `c_tilde_i` times the sup norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConeSpec {
    pub c_tilde: [f64; 2],
    pub intervals: [(f64, f64); 2],
}

/// Worst margins of the two cone inequalities for one component.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConeMargin {
    /// `min_t u_i(t)`; nonnegativity requires this `>= -tol`.
    pub min_value: f64,
    /// `min_{[a,b]} u_i - c_tilde * ||u_i||_inf`; requires `>= -tol`.
    pub interval_slack: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConeCheck {
    pub ok: bool,
    pub margins: [ConeMargin; 2],
}

/// Sampled cone membership test with tolerance `tol >= 0`.
pub fn in_cone(u: &GridPair, cone: &ConeSpec, tol: f64) -> ConeCheck {
    let mut margins = [ConeMargin {
        min_value: 0.0,
        interval_slack: 0.0,
    }; 2];
    let mut ok = true;
    for i in 0..2 {
        let f = u.component(i);
        let (a, b) = cone.intervals[i];
        let min_value = f.min();
        let interval_slack = f.min_on(a, b) - cone.c_tilde[i] * f.max_abs();
        margins[i] = ConeMargin {
            min_value,
            interval_slack,
        };
        if min_value < -tol || interval_slack < -tol {
            ok = false;
        }
    }
    ConeCheck { ok, margins }
}

/// Default cone tolerance relative to the pair's norm.
pub fn default_cone_tol(u: &GridPair) -> f64 {
    1e-10 * u.norm_y()
}

/// Validation output: a problem is admissible iff `violations` is empty.
/// Warnings flag accepted-but-unusual inputs.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check the standing parameter assumptions and the functional shape rules.
/// Returns every violated constraint; an empty list means valid.
pub fn validate(problem: &SystemProblem) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (i, comp) in problem.components.iter().enumerate() {
        let label = format!("component {}", i + 1);
        let p = &comp.params;
        let (beta, eta, a, b) = (p.beta.value(), p.eta.value(), p.a.value(), p.b.value());
        if beta <= 0.0 {
            report.violations.push(format!("{label}: beta <= 0"));
        }
        if !(eta > 0.0 && eta < 1.0) {
            report.violations.push(format!("{label}: eta outside (0,1)"));
        }
        if beta + eta >= 1.0 {
            report.violations.push(format!("{label}: beta+eta >= 1"));
        }
        if !(a > 0.0) {
            report.violations.push(format!("{label}: a <= 0"));
        }
        if !(a < b) {
            report.violations.push(format!("{label}: a >= b"));
        }
        if b >= beta + eta {
            report.violations.push(format!("{label}: b >= beta+eta"));
        }

        for (name, func) in [("H", &comp.h), ("G", &comp.g)] {
            match func {
                Functional::Affine { terms, constant } => {
                    if *constant < 0.0 {
                        report
                            .violations
                            .push(format!("{label}: {name} has a negative constant term"));
                    }
                    for term in terms {
                        if term.weight < 0.0 {
                            report.violations.push(format!(
                                "{label}: {name} has a negative weight on u{}({})",
                                term.component, term.point
                            ));
                        }
                        if !(0.0..=1.0).contains(&term.point) {
                            report.violations.push(format!(
                                "{label}: {name} evaluates u{} at {} outside [0,1]",
                                term.component, term.point
                            ));
                        }
                        if !(term.component == 1 || term.component == 2) {
                            report.violations.push(format!(
                                "{label}: {name} references component {}",
                                term.component
                            ));
                        }
                    }
                }
                Functional::General(expr) => {
                    report.warnings.push(format!(
                        "{label}: {name} is a general expression; its cone lower bound \
                         is sampled and not rigorous"
                    ));
                    let mut pts = Vec::new();
                    expr.collect_point_evals(&mut pts);
                    for (c, pt) in pts {
                        if !(0.0..=1.0).contains(&pt) {
                            report.violations.push(format!(
                                "{label}: {name} evaluates u{c} at {pt} outside [0,1]"
                            ));
                        }
                    }
                }
            }
        }

        // Smoke-sample the nonlinearity on [0,1] x [0,1]^2: admissible
        // problems must return finite nonnegative values.
        'sampling: for ti in 0..=4 {
            for v1 in 0..=4 {
                for v2 in 0..=4 {
                    let (t, u1, u2) = (ti as f64 / 4.0, v1 as f64 / 4.0, v2 as f64 / 4.0);
                    match comp.f.eval_state(t, u1, u2) {
                        Ok(v) if v >= 0.0 => {}
                        Ok(v) => {
                            report.violations.push(format!(
                                "{label}: F({t}, {u1}, {u2}) = {v} is negative"
                            ));
                            break 'sampling;
                        }
                        Err(e) => {
                            report.violations.push(format!(
                                "{label}: F({t}, {u1}, {u2}) failed to evaluate: {e}"
                            ));
                            break 'sampling;
                        }
                    }
                }
            }
        }
    }

    // The (Dirichlet, Neumann) ordering is accepted but is outside the three
    // standard families; flag it.
    if problem.components[0].bc == BcKind::DirichletAtZero
        && problem.components[1].bc == BcKind::NeumannAtZero
    {
        report.warnings.push(
            "component 1 Dirichlet with component 2 Neumann is outside the standard \
             three families; proceeding with per-component kernels"
                .to_string(),
        );
    }

    report
}
