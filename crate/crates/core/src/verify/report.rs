//! JSON-shaped verification report.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// One named check. `worst_margin` is the largest amount by which a sample
/// exceeded its allowance; the check passes iff it is `<= 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub lattice: String,
    pub worst_margin: f64,
    pub passed: bool,
    pub slack: f64,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl CheckRecord {
    pub fn new(
        name: impl Into<String>,
        lattice: impl Into<String>,
        worst_margin: f64,
        slack: f64,
    ) -> Self {
        Self {
            name: name.into(),
            lattice: lattice.into(),
            worst_margin,
            passed: worst_margin <= 0.0,
            slack,
            tolerances: BTreeMap::new(),
            detail: None,
        }
    }

    pub fn tolerance(mut self, key: &str, value: f64) -> Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }

    pub fn detail<T: Serialize>(mut self, detail: &T) -> Self {
        self.detail = serde_json::to_value(detail).ok();
        self
    }

    /// Force a failure (e.g. when a secondary condition is not met).
    pub fn require(mut self, ok: bool) -> Self {
        self.passed &= ok;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub p: f64,
    pub checks: Vec<CheckRecord>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn new(p: f64) -> Self {
        Self {
            p,
            checks: Vec::new(),
            passed: true,
        }
    }

    pub fn push(&mut self, check: CheckRecord) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_tracks_failures_and_serializes() {
        let mut r = VerificationReport::new(0.5);
        r.push(CheckRecord::new("a", "none", -1.0, 0.0).tolerance("tol", 1e-3));
        assert!(r.passed);
        r.push(CheckRecord::new("b", "none", 0.5, 0.0));
        assert!(!r.passed);
        assert_eq!(r.failed().count(), 1);
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(v["checks"][0]["name"], "a");
        assert_eq!(v["checks"][0]["tolerances"]["tol"], 1e-3);
        assert_eq!(v["checks"][1]["passed"], false);
    }
}
