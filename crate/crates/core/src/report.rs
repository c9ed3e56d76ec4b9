//! Inequality reports and their CSV/JSON emission.
//!
//! CSV column order is part of the external contract:
//! `name,family,p,lhs,rhs,ratio,tracked_constant,pass`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Relative slack applied to every pass decision, absorbing accumulated
/// rounding in exact-arithmetic identities.
pub const PASS_REL_TOL: f64 = 1e-9;
pub const PASS_ABS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub family: String,
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub tracked_constant: Option<f64>,
    pub pass: bool,
}

impl InequalityReport {
    fn build(
        name: &str,
        family: &str,
        p: f64,
        lhs: f64,
        rhs: f64,
        tracked_constant: Option<f64>,
        constant: f64,
    ) -> Self {
        // rhs = 0 is degenerate: the inequality only survives if lhs = 0.
        let (ratio, pass) = if rhs == 0.0 {
            if lhs.abs() <= PASS_ABS_TOL {
                (0.0, true)
            } else {
                (f64::INFINITY, false)
            }
        } else {
            (
                lhs / rhs,
                lhs <= constant * rhs * (1.0 + PASS_REL_TOL) + PASS_ABS_TOL,
            )
        };
        Self {
            name: name.into(),
            family: family.into(),
            p,
            lhs,
            rhs,
            ratio,
            tracked_constant,
            pass,
        }
    }

    /// Pass iff `lhs <= c * rhs` (with slack), where `c` is the tracked
    /// constant, or 1 when no constant is tracked.
    pub fn evaluate(
        name: &str,
        family: &str,
        p: f64,
        lhs: f64,
        rhs: f64,
        tracked_constant: Option<f64>,
    ) -> Self {
        let c = tracked_constant.unwrap_or(1.0);
        Self::build(name, family, p, lhs, rhs, tracked_constant, c)
    }

    /// Pass against a configured cap; no constant is recorded as tracked
    /// (used where only a qualitative `<=_p` claim exists).
    pub fn evaluate_capped(name: &str, family: &str, p: f64, lhs: f64, rhs: f64, cap: f64) -> Self {
        Self::build(name, family, p, lhs, rhs, None, cap)
    }

    /// Residual-style report: `lhs` is a computed residual, `rhs` the
    /// tolerance it must stay under.
    pub fn residual(name: &str, family: &str, p: f64, residual: f64, tol: f64) -> Self {
        Self::build(name, family, p, residual, tol, Some(1.0), 1.0)
    }

    /// Marks the report as failed regardless of the numeric comparison.
    pub fn force_fail(mut self) -> Self {
        self.pass = false;
        self
    }
}

pub fn write_csv<W: Write>(reports: &[InequalityReport], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in reports {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn to_csv_string(reports: &[InequalityReport]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(reports, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

pub fn write_json<W: Write>(reports: &[InequalityReport], mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, reports)?;
    writeln!(w)?;
    Ok(())
}

pub fn to_json_string(reports: &[InequalityReport]) -> Result<String> {
    let mut buf = Vec::new();
    write_json(reports, &mut buf)?;
    Ok(String::from_utf8(buf).expect("JSON output is UTF-8"))
}
