//! Problem-definition files.
//!
//! ```toml
//! name = "example1"            # optional
//!
//! [component.1]
//! bc = "dirichlet0"            # or "neumann0"
//! beta = "1/4"                 # rationals as strings, or plain numbers
//! eta = "1/4"
//! a = "1/6"
//! b = "1/3"
//! F = "0.5*(u1 + u2^3 + 2)"
//! H = { affine = [[1, "1/3", "1/12"], [2, 1.0, "1/12"]], const = "1/3" }
//! G = { expr = "0.5*sqrt(u1(1/6))" }
//!
//! [component.2]
//! # ...
//! ```
//!
//! A functional is either `affine = [[component, point, weight], ...]` with
//! an optional `const`, or a general `expr` string.

use crate::expr::{parse, Context};
use crate::problem::{
    validate, AffineTerm, BcKind, Component, ComponentParams, Functional, ParamValue,
    SystemProblem, ValidationReport,
};
use serde::Deserialize;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    /// Structural / syntax error in the file, with line and column where the
    /// underlying parser provides them.
    #[error("problem file: {0}")]
    Format(String),
    #[error("{context}: {message}")]
    Field { context: String, message: String },
    #[error("invalid problem: {}", .0.violations.join("; "))]
    Validation(ValidationReport),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    name: Option<String>,
    component: RawComponents,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponents {
    #[serde(rename = "1")]
    first: RawComponent,
    #[serde(rename = "2")]
    second: RawComponent,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    bc: String,
    beta: RawScalar,
    eta: RawScalar,
    a: RawScalar,
    b: RawScalar,
    #[serde(rename = "F")]
    f: String,
    #[serde(rename = "H")]
    h: RawFunctional,
    #[serde(rename = "G")]
    g: RawFunctional,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawScalar {
    Float(f64),
    Int(i64),
    Text(String),
}

impl RawScalar {
    fn to_param(&self, context: &str) -> Result<ParamValue, LoadError> {
        let parsed = match self {
            RawScalar::Float(v) => {
                if v.is_finite() {
                    Ok(ParamValue::from_f64(*v))
                } else {
                    Err(format!("non-finite value {v}"))
                }
            }
            RawScalar::Int(v) => Ok(ParamValue::from_rational(*v, 1)),
            RawScalar::Text(s) => ParamValue::parse(s),
        };
        parsed.map_err(|message| LoadError::Field {
            context: context.to_string(),
            message,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunctional {
    affine: Option<Vec<[RawScalar; 3]>>,
    #[serde(rename = "const")]
    constant: Option<RawScalar>,
    expr: Option<String>,
}

fn build_functional(raw: &RawFunctional, context: &str) -> Result<Functional, LoadError> {
    match (&raw.affine, &raw.expr) {
        (Some(_), Some(_)) => Err(LoadError::Field {
            context: context.to_string(),
            message: "give either `affine` or `expr`, not both".to_string(),
        }),
        (None, None) => Err(LoadError::Field {
            context: context.to_string(),
            message: "functional needs `affine = [[comp, point, weight], ...]` or `expr = \"...\"`"
                .to_string(),
        }),
        (Some(rows), None) => {
            let mut terms = Vec::with_capacity(rows.len());
            for (k, row) in rows.iter().enumerate() {
                let term_ctx = format!("{context}.affine[{k}]");
                let component = row[0].to_param(&term_ctx)?.value();
                if component != 1.0 && component != 2.0 {
                    return Err(LoadError::Field {
                        context: term_ctx,
                        message: format!("component must be 1 or 2, got {component}"),
                    });
                }
                terms.push(AffineTerm {
                    component: component as u8,
                    point: row[1].to_param(&term_ctx)?.value(),
                    weight: row[2].to_param(&term_ctx)?.value(),
                });
            }
            let constant = match &raw.constant {
                Some(c) => c.to_param(&format!("{context}.const"))?.value(),
                None => 0.0,
            };
            Ok(Functional::Affine { terms, constant })
        }
        (None, Some(src)) => {
            if raw.constant.is_some() {
                return Err(LoadError::Field {
                    context: context.to_string(),
                    message: "`const` only applies to the affine form".to_string(),
                });
            }
            let expr = parse(src, Context::Functional).map_err(|e| LoadError::Field {
                context: format!("{context}.expr"),
                message: e.to_string(),
            })?;
            Ok(Functional::General(expr))
        }
    }
}

fn build_component(raw: &RawComponent, index: usize) -> Result<Component, LoadError> {
    let ctx = |field: &str| format!("component.{index}.{field}");
    let bc = BcKind::from_file_name(&raw.bc).ok_or_else(|| LoadError::Field {
        context: ctx("bc"),
        message: format!("expected \"dirichlet0\" or \"neumann0\", got \"{}\"", raw.bc),
    })?;
    let params = ComponentParams {
        beta: raw.beta.to_param(&ctx("beta"))?,
        eta: raw.eta.to_param(&ctx("eta"))?,
        a: raw.a.to_param(&ctx("a"))?,
        b: raw.b.to_param(&ctx("b"))?,
    };
    let f = parse(&raw.f, Context::Nonlinearity).map_err(|e| LoadError::Field {
        context: ctx("F"),
        message: e.to_string(),
    })?;
    let h = build_functional(&raw.h, &ctx("H"))?;
    let g = build_functional(&raw.g, &ctx("G"))?;
    Ok(Component {
        bc,
        params,
        f,
        h,
        g,
    })
}

/// Parse and validate a problem definition.
pub fn load_problem(text: &str) -> Result<SystemProblem, LoadError> {
    let raw: RawProblem = toml::from_str(text).map_err(|e| LoadError::Format(e.to_string()))?;
    let problem = SystemProblem {
        components: [
            build_component(&raw.component.first, 1)?,
            build_component(&raw.component.second, 2)?,
        ],
        name: raw.name,
    };
    let report = validate(&problem);
    if !report.is_valid() {
        return Err(LoadError::Validation(report));
    }
    Ok(problem)
}

fn write_scalar(out: &mut String, v: &ParamValue) {
    match v.exact() {
        Some(_) => {
            let _ = write!(out, "\"{v}\"");
        }
        None => write_float(out, v.value()),
    }
}

fn write_float(out: &mut String, v: f64) {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        let _ = write!(out, "{v:.1}");
    } else {
        let _ = write!(out, "{v}");
    }
}

fn write_functional(out: &mut String, f: &Functional) {
    match f {
        Functional::Affine { terms, constant } => {
            let _ = write!(out, "{{ affine = [");
            for (k, t) in terms.iter().enumerate() {
                if k > 0 {
                    let _ = write!(out, ", ");
                }
                let _ = write!(out, "[{}, ", t.component);
                write_float(out, t.point);
                let _ = write!(out, ", ");
                write_float(out, t.weight);
                let _ = write!(out, "]");
            }
            let _ = write!(out, "], const = ");
            write_float(out, *constant);
            let _ = write!(out, " }}");
        }
        Functional::General(expr) => {
            let _ = write!(out, "{{ expr = \"{expr}\" }}");
        }
    }
}

/// Serialize a problem in the format accepted by [`load_problem`]. For every
/// valid problem, `load_problem(serialize_problem(p)) == p`.
pub fn serialize_problem(problem: &SystemProblem) -> String {
    let mut out = String::new();
    if let Some(name) = &problem.name {
        let _ = writeln!(out, "name = \"{name}\"");
        let _ = writeln!(out);
    }
    for (i, comp) in problem.components.iter().enumerate() {
        let _ = writeln!(out, "[component.{}]", i + 1);
        let _ = writeln!(out, "bc = \"{}\"", comp.bc.file_name());
        for (key, value) in [
            ("beta", &comp.params.beta),
            ("eta", &comp.params.eta),
            ("a", &comp.params.a),
            ("b", &comp.params.b),
        ] {
            let _ = write!(out, "{key} = ");
            write_scalar(&mut out, value);
            let _ = writeln!(out);
        }
        let _ = writeln!(out, "F = \"{}\"", comp.f);
        for (key, f) in [("H", &comp.h), ("G", &comp.g)] {
            let _ = write!(out, "{key} = ");
            write_functional(&mut out, f);
            let _ = writeln!(out);
        }
        if i == 0 {
            let _ = writeln!(out);
        }
    }
    out
}
