//! Named checks and the report that collects them.

use serde::Serialize;
use serde_json::Value;

use crate::error::Error;

/// One named check: `pass ⇔ max_residual ≤ tolerance`.
///
/// Failures that prevent a residual from being computed at all are recorded
/// with an infinite residual (serialized as `null`) and the error in `detail`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub anchor: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        anchor: impl Into<String>,
        max_residual: f64,
        tolerance: f64,
        samples: usize,
    ) -> Self {
        Check {
            name: name.into(),
            anchor: anchor.into(),
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
            samples,
            detail: None,
        }
    }

    /// Aggregate per-sample residuals; any error fails the check.
    pub fn from_samples(
        name: impl Into<String>,
        anchor: impl Into<String>,
        tolerance: f64,
        residuals: impl IntoIterator<Item = Result<f64, Error>>,
    ) -> Self {
        let mut max: f64 = 0.0;
        let mut samples = 0;
        let mut first_error = None;
        for (i, r) in residuals.into_iter().enumerate() {
            samples += 1;
            match r {
                Ok(v) if v.is_nan() => max = f64::INFINITY,
                Ok(v) => max = max.max(v),
                Err(e) => {
                    max = f64::INFINITY;
                    first_error.get_or_insert_with(|| format!("sample {i}: {e}"));
                }
            }
        }
        let mut check = Check::new(name, anchor, max, tolerance, samples);
        check.detail = first_error;
        check
    }

    /// A check that could not be run.
    pub fn failed(name: impl Into<String>, anchor: impl Into<String>, tolerance: f64, error: &Error) -> Self {
        Check::new(name, anchor, f64::INFINITY, tolerance, 0).with_detail(error.to_string())
    }

    /// Control check passing iff `value > threshold`; the residual is
    /// `threshold / value` against a tolerance of 1.
    pub fn lower_bound(
        name: impl Into<String>,
        anchor: impl Into<String>,
        value: f64,
        threshold: f64,
        samples: usize,
    ) -> Self {
        let residual = if value > threshold {
            threshold / value
        } else {
            f64::INFINITY
        };
        Check::new(name, anchor, residual, 1.0, samples)
            .with_detail(format!("observed {value:e}, required > {threshold:e}"))
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub version: String,
    pub config: Value,
    pub checks: Vec<Check>,
    pub wall_ms: u64,
}

impl VerificationReport {
    pub fn new(config: Value) -> Self {
        VerificationReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            checks: Vec::new(),
            wall_ms: 0,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Pretty JSON with keys sorted at every level.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report is always serializable");
        let mut s = serde_json::to_string_pretty(&value).expect("value is always serializable");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_residual_within_tolerance() {
        assert!(Check::new("a", "x", 1e-9, 1e-8, 3).pass);
        assert!(!Check::new("a", "x", 2e-8, 1e-8, 3).pass);
        assert!(!Check::new("a", "x", f64::NAN, 1e-8, 3).pass);
    }

    #[test]
    fn sample_errors_fail_the_check() {
        let c = Check::from_samples(
            "a",
            "x",
            1.0,
            vec![Ok(0.1), Err(Error::DegenerateDirection(0.0)), Ok(0.2)],
        );
        assert!(!c.pass);
        assert_eq!(c.samples, 3);
        assert!(c.detail.unwrap().starts_with("sample 1"));
    }

    #[test]
    fn lower_bound_controls() {
        assert!(Check::lower_bound("c", "x", 0.5, 1e-3, 1).pass);
        assert!(!Check::lower_bound("c", "x", 1e-4, 1e-3, 1).pass);
    }

    #[test]
    fn json_keys_are_sorted() {
        let mut r = VerificationReport::new(serde_json::json!({"zeta": 1, "alpha": 2}));
        r.push(Check::new("n", "a", 0.0, 1.0, 1));
        let s = r.to_json();
        assert!(s.find("\"alpha\"").unwrap() < s.find("\"zeta\"").unwrap());
        assert!(s.find("\"anchor\"").unwrap() < s.find("\"max_residual\"").unwrap());
        assert!(s.find("\"checks\"").unwrap() < s.find("\"version\"").unwrap());
    }
}
