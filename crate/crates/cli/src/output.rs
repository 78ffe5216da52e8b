//! Rendering of reports as text, JSON and CSV.

use anyhow::{Context as _, Result};
use hameig::problem::SystemProblem;
use hameig::solver::{EigenPair, SweepRow};
use hameig::verifier::VerificationReport;
use std::fmt::Write as _;
use std::io::Write as _;

/// Serialize with pretty-printing; key order follows the struct definitions,
/// floats use the shortest round-trip form, so parse + re-emit is
/// byte-identical.
pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn emit(target: &str, content: &str) -> Result<()> {
    if target == "-" {
        std::io::stdout()
            .write_all(content.as_bytes())
            .context("writing to stdout")?;
    } else {
        std::fs::write(target, content).with_context(|| format!("writing {target}"))?;
    }
    Ok(())
}

fn csv_f64(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v}"),
        None => "nan".to_string(),
    }
}

pub fn verify_text(problem: &SystemProblem, report: &VerificationReport) -> String {
    let mut out = String::new();
    let name = problem.name.as_deref().unwrap_or("<unnamed>");
    let _ = writeln!(out, "hypothesis check: {} at R = {}", name, report.r);
    for (i, c) in report.components.iter().enumerate() {
        let _ = writeln!(out, "component {}:", i + 1);
        let _ = writeln!(
            out,
            "  gamma lower bound     = {:.12} ({})",
            c.gamma_min,
            if c.gamma_rigorous { "corner evaluation" } else { "sampled" }
        );
        let _ = writeln!(
            out,
            "  zeta_H                = {:.12} ({})",
            c.zeta_h,
            if c.zeta_h_rigorous { "exact" } else { "sampled" }
        );
        let _ = writeln!(
            out,
            "  zeta_G                = {:.12} ({})",
            c.zeta_g,
            if c.zeta_g_rigorous { "exact" } else { "sampled" }
        );
        let _ = writeln!(out, "  positivity supremum   = {:.12}", c.c3_sup);
        if let Some(bound) = c.reference_bound {
            let _ = writeln!(
                out,
                "  recorded chain value  = {:.12} (slack {:+.3e})",
                bound,
                c.c3_sup - bound
            );
        }
        let _ = writeln!(
            out,
            "  kernel bounds         = upper {} / lower {} / psi {}{}",
            if c.d3_ok { "ok" } else { "VIOLATED" },
            if c.kernel_bounds.lower_slack >= -1e-12 { "ok" } else { "VIOLATED" },
            if c.d4_ok { "ok" } else { "VIOLATED" },
            if c.kernel_bounds.near_degenerate {
                " (near-degenerate subinterval)"
            } else {
                ""
            }
        );
        let _ = writeln!(
            out,
            "  rigorous              = {}",
            if c.rigorous { "yes" } else { "no (sampled bounds involved)" }
        );
    }
    let _ = writeln!(
        out,
        "verdict: {}",
        if report.verdict {
            "hypotheses hold (an eigenpair exists on this sphere)"
        } else {
            "hypotheses NOT certified"
        }
    );
    out
}

pub fn verify_csv(report: &VerificationReport) -> String {
    let mut out = String::from(
        "component,gamma_min,zeta_H,zeta_G,c3_sup,reference_bound,d3_ok,d4_ok,rigorous,verdict\n",
    );
    for (i, c) in report.components.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            i + 1,
            c.gamma_min,
            c.zeta_h,
            c.zeta_g,
            c.c3_sup,
            csv_f64(c.reference_bound),
            c.d3_ok,
            c.d4_ok,
            c.rigorous,
            report.verdict
        );
    }
    out
}

pub fn solve_text(r: f64, pair: &EigenPair) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "eigenpair on the sphere R = {r}");
    let _ = writeln!(out, "  lambda            = {:.15}", pair.lambda);
    let _ = writeln!(out, "  iterations        = {}", pair.iterations);
    let _ = writeln!(out, "  integral residual = {:.3e}", pair.integral_residual);
    let _ = writeln!(out, "  ode residual      = {:.3e}", pair.ode_residual);
    let _ = writeln!(
        out,
        "  bc residuals      = [{:.3e}, {:.3e}, {:.3e}, {:.3e}]",
        pair.bc_residual[0], pair.bc_residual[1], pair.bc_residual[2], pair.bc_residual[3]
    );
    let _ = writeln!(out, "  in cone           = {}", pair.cone_ok);
    let n = pair.u.grid().n();
    let _ = writeln!(out, "  eigenfunction samples (n = {n}):");
    let _ = writeln!(out, "      t        u1              u2");
    let step = (n / 12).max(1);
    let mut k = 0;
    while k <= n {
        let _ = writeln!(
            out,
            "    {:.4}  {:14.10}  {:14.10}",
            pair.u.grid().node(k),
            pair.u.u1().values()[k],
            pair.u.u2().values()[k]
        );
        if k == n {
            break;
        }
        k = (k + step).min(n);
    }
    out
}

pub const SWEEP_CSV_HEADER: &str = "R,lambda,iterations,integral_residual,ode_residual,cone_ok";

pub fn solve_csv(r: f64, pair: &EigenPair) -> String {
    format!(
        "{SWEEP_CSV_HEADER}\n{},{},{},{},{},{}\n",
        r,
        pair.lambda,
        pair.iterations,
        pair.integral_residual,
        pair.ode_residual,
        pair.cone_ok
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.r,
            csv_f64(row.lambda),
            row.iterations.map_or("nan".to_string(), |i| i.to_string()),
            csv_f64(row.integral_residual),
            csv_f64(row.ode_residual),
            row.cone_ok.map_or("false".to_string(), |b| b.to_string()),
        );
    }
    out
}

pub fn sweep_text(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>10}  {:>18}  {:>6}  {:>12}  {:>12}  {:>7}",
        "R", "lambda", "iters", "int.residual", "ode.residual", "in cone"
    );
    for row in rows {
        match row.error.as_deref() {
            None => {
                let _ = writeln!(
                    out,
                    "{:>10}  {:>18.12}  {:>6}  {:>12.3e}  {:>12.3e}  {:>7}",
                    row.r,
                    row.lambda.unwrap(),
                    row.iterations.unwrap(),
                    row.integral_residual.unwrap(),
                    row.ode_residual.unwrap(),
                    row.cone_ok.unwrap()
                );
            }
            Some(err) => {
                let _ = writeln!(out, "{:>10}  failed: {err}", row.r);
            }
        }
    }
    out
}
