//! Machine-readable run output: result rows with enclosures, recorded
//! cross-row constraints, CSV/JSON writers, and the re-verification pass.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::formulas::EntropyEstimate;

/// One numeric result with its enclosure and provenance; never a bare number.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub quantity: String,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    pub method: String,
    /// PASS/FAIL where a check applies; absent for plain values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
    pub wall_time_s: f64,
}

impl ResultRow {
    pub fn from_estimate(experiment: &str, quantity: &str, est: &EntropyEstimate) -> Self {
        ResultRow {
            experiment: experiment.to_string(),
            quantity: quantity.to_string(),
            value: est.value,
            lower: est.lower,
            upper: est.upper,
            stderr: est.stderr,
            method: est.method.tag().to_string(),
            pass: None,
            wall_time_s: 0.0,
        }
    }

    pub fn exact_value(experiment: &str, quantity: &str, value: f64) -> Self {
        ResultRow {
            experiment: experiment.to_string(),
            quantity: quantity.to_string(),
            value,
            lower: value,
            upper: value,
            stderr: None,
            method: "exact".to_string(),
            pass: None,
            wall_time_s: 0.0,
        }
    }

    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = Some(pass);
        self
    }
}

/// A re-checkable relation between recorded rows, referenced by quantity name.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    /// `value(lhs) <= value(rhs) + tol`.
    Le { lhs: String, rhs: String, tol: f64 },
    /// `|value(lhs) - target| <= tol`.
    Eq { lhs: String, target: f64, tol: f64 },
    /// `value(lower) - tol <= value(inner) <= value(upper) + tol`.
    Contains {
        inner: String,
        lower: String,
        upper: String,
        tol: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOutput {
    /// Fully resolved config (defaults filled) that produced these rows.
    pub config: crate::config::ExperimentConfig,
    pub rows: Vec<ResultRow>,
    pub constraints: Vec<Constraint>,
}

impl RunOutput {
    pub fn any_fail(&self) -> bool {
        self.rows.iter().any(|r| r.pass == Some(false))
    }

    /// Re-check every recorded invariant: per-row enclosures plus the
    /// cross-row constraints. Returns the list of violations.
    pub fn verify(&self) -> Vec<String> {
        let mut violations = Vec::new();
        let by_name: HashMap<&str, &ResultRow> = self
            .rows
            .iter()
            .map(|r| (r.quantity.as_str(), r))
            .collect();
        for r in &self.rows {
            if !(r.lower <= r.value + 1e-12 && r.value <= r.upper + 1e-12) {
                violations.push(format!(
                    "row '{}': value {} outside enclosure [{}, {}]",
                    r.quantity, r.value, r.lower, r.upper
                ));
            }
            if r.pass == Some(false) {
                violations.push(format!("row '{}' is flagged FAIL", r.quantity));
            }
        }
        let get = |name: &str, violations: &mut Vec<String>| -> Option<f64> {
            match by_name.get(name) {
                Some(r) => Some(r.value),
                None => {
                    violations.push(format!("constraint references missing row '{name}'"));
                    None
                }
            }
        };
        for c in &self.constraints {
            match c {
                Constraint::Le { lhs, rhs, tol } => {
                    if let (Some(a), Some(b)) = (get(lhs, &mut violations), get(rhs, &mut violations)) {
                        if a > b + tol {
                            violations.push(format!("'{lhs}' = {a} exceeds '{rhs}' = {b} + {tol}"));
                        }
                    }
                }
                Constraint::Eq { lhs, target, tol } => {
                    if let Some(a) = get(lhs, &mut violations) {
                        if (a - target).abs() > *tol {
                            violations.push(format!("'{lhs}' = {a} differs from {target} by more than {tol}"));
                        }
                    }
                }
                Constraint::Contains { inner, lower, upper, tol } => {
                    if let (Some(v), Some(lo), Some(hi)) = (
                        get(inner, &mut violations),
                        get(lower, &mut violations),
                        get(upper, &mut violations),
                    ) {
                        if v < lo - tol || v > hi + tol {
                            violations.push(format!(
                                "'{inner}' = {v} outside ['{lower}' = {lo}, '{upper}' = {hi}] + {tol}"
                            ));
                        }
                    }
                }
            }
        }
        violations
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        std::fs::create_dir_all(out_dir)
            .map_err(|e| Error::InvalidArgument(format!("cannot create output dir: {e}")))?;
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidArgument(format!("serialize: {e}")))?;
        std::fs::write(out_dir.join("results.json"), json)
            .map_err(|e| Error::InvalidArgument(format!("write results.json: {e}")))?;
        write_csv(&self.rows, &out_dir.join("results.csv"))
    }

    pub fn read(out_dir: &Path) -> Result<RunOutput> {
        let text = std::fs::read_to_string(out_dir.join("results.json"))
            .map_err(|e| Error::InvalidArgument(format!("read results.json: {e}")))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidArgument(format!("parse results.json: {e}")))
    }
}

/// 12 significant digits, stable across platforms.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.11e}")
}

fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::InvalidArgument(format!("open csv: {e}")))?;
    w.write_record([
        "experiment",
        "quantity",
        "value",
        "lower",
        "upper",
        "stderr",
        "method",
        "pass",
        "wall_time_s",
    ])
    .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    for r in rows {
        w.write_record([
            r.experiment.as_str(),
            r.quantity.as_str(),
            &fmt_float(r.value),
            &fmt_float(r.lower),
            &fmt_float(r.upper),
            &r.stderr.map(fmt_float).unwrap_or_default(),
            r.method.as_str(),
            &r.pass.map(|p| if p { "PASS" } else { "FAIL" }.to_string()).unwrap_or_default(),
            &format!("{:.3}", r.wall_time_s),
        ])
        .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("csv flush: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    fn sample_output() -> RunOutput {
        let config = ExperimentConfig::from_json(
            r#"{"experiment": "c4", "x_model": {"type": "bernoulli", "theta": 0.5}}"#,
        )
        .unwrap();
        RunOutput {
            config,
            rows: vec![
                ResultRow::exact_value("c4", "c4_lower", 0.2),
                ResultRow::exact_value("c4", "value", 0.3).with_pass(true),
                ResultRow::exact_value("c4", "c4_upper", 0.5),
            ],
            constraints: vec![Constraint::Contains {
                inner: "value".into(),
                lower: "c4_lower".into(),
                upper: "c4_upper".into(),
                tol: 1e-9,
            }],
        }
    }

    #[test]
    fn verify_clean_output() {
        assert!(sample_output().verify().is_empty());
    }

    #[test]
    fn verify_catches_edited_value() {
        let mut out = sample_output();
        out.rows[1].value = 0.9; // above the recorded upper bound
        let v = out.verify();
        assert!(v.iter().any(|m| m.contains("outside")), "{v:?}");
    }

    #[test]
    fn verify_catches_fail_flag_and_missing_reference() {
        let mut out = sample_output();
        out.rows[1].pass = Some(false);
        out.rows[1].lower = 0.0; // keep enclosure valid so only the flag trips
        out.rows[1].upper = 1.0;
        assert_eq!(out.verify().len(), 1);

        let mut out = sample_output();
        out.rows.remove(0);
        assert!(!out.verify().is_empty());
    }

    #[test]
    fn round_trip_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = sample_output();
        out.write(dir.path()).unwrap();
        let back = RunOutput::read(dir.path()).unwrap();
        assert_eq!(back.rows.len(), 3);
        assert_eq!(back.rows[1].value, out.rows[1].value);
        let csv_text = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
        assert!(csv_text.starts_with("experiment,quantity,value"));
        assert!(csv_text.contains("PASS"));
    }

    #[test]
    fn float_formatting_has_twelve_significant_digits() {
        assert_eq!(fmt_float(0.5), "5.00000000000e-1");
        assert_eq!(fmt_float(0.340038522864139_9), "3.40038522864e-1");
    }
}
