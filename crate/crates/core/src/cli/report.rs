//! Serializable report pieces shared by the subcommands.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

/// A float that serializes infinities and NaN as `"inf"`, `"-inf"`, `"nan"`
/// instead of JSON `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            serializer.serialize_f64(x)
        } else if x.is_nan() {
            serializer.serialize_str("nan")
        } else if x > 0.0 {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_str("-inf")
        }
    }
}

pub fn reals(values: &[f64]) -> Vec<Real> {
    values.iter().copied().map(Real).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    /// Passes when `value ≤ tolerance` (NaN fails).
    pub fn at_most(name: &'static str, value: f64, tolerance: f64) -> Check {
        Check {
            name,
            status: if value <= tolerance {
                Status::Pass
            } else {
                Status::Fail
            },
            value: Some(Real(value)),
            tolerance: Some(Real(tolerance)),
            detail: None,
        }
    }

    pub fn holds(name: &'static str, ok: bool) -> Check {
        Check {
            name,
            status: if ok { Status::Pass } else { Status::Fail },
            value: None,
            tolerance: None,
            detail: None,
        }
    }

    pub fn skipped(name: &'static str, reason: String) -> Check {
        Check {
            name,
            status: Status::Skipped,
            value: None,
            tolerance: None,
            detail: Some(reason),
        }
    }

    pub fn with_detail(mut self, detail: String) -> Check {
        self.detail = Some(detail);
        self
    }
}

/// Pass/fail checks plus informational distances to independent oracles.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Verification {
    pub passed: bool,
    pub checks: Vec<Check>,
    pub oracle_deltas: BTreeMap<&'static str, Real>,
}

impl Verification {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn delta(&mut self, name: &'static str, value: f64) {
        self.oracle_deltas.insert(name, Real(value));
    }

    /// Sets `passed`: no check may have failed.
    pub fn finish(mut self) -> Self {
        self.passed = self.checks.iter().all(|c| c.status != Status::Fail);
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub elapsed_ms: Real,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: &'a str,
}

#[derive(Serialize)]
struct ErrorDocument<'a> {
    error: ErrorBody<'a>,
}

pub fn error_json(kind: &str, message: &str) -> String {
    let doc = ErrorDocument {
        error: ErrorBody { kind, message },
    };
    serde_json::to_string_pretty(&doc).expect("error document serializes") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_reals_are_strings() {
        let json =
            serde_json::to_string(&reals(&[1.5, f64::INFINITY, f64::NEG_INFINITY, f64::NAN]))
                .unwrap();
        assert_eq!(json, r#"[1.5,"inf","-inf","nan"]"#);
    }

    #[test]
    fn verification_fails_on_any_failed_check() {
        let mut v = Verification::default();
        v.push(Check::at_most("a", 1e-12, 1e-9));
        v.push(Check::skipped("b", "n/a".into()));
        assert!(v.clone().finish().passed);
        v.push(Check::at_most("c", f64::NAN, 1.0));
        assert!(!v.finish().passed);
    }
}
