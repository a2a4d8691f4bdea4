//! Pass/fail bands evaluated on study results.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    /// `lo <= value <= hi`; a missing value fails.
    pub fn band(name: impl Into<String>, value: Option<f64>, lo: f64, hi: f64) -> Self {
        let passed = value.is_some_and(|v| (lo..=hi).contains(&v));
        let detail = match value {
            Some(v) => format!("{v:.4} in [{lo}, {hi}]"),
            None => format!("missing, want [{lo}, {hi}]"),
        };
        Check::new(name, passed, detail)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bands() {
        assert!(Check::band("a", Some(2.0), 1.9, 2.1).passed);
        assert!(!Check::band("a", Some(2.2), 1.9, 2.1).passed);
        assert!(!Check::band("a", None, 1.9, 2.1).passed);
        assert!(Check::band("a", Some(1.9), 1.9, 2.1).to_string().starts_with("PASS a:"));
        assert!(!all_passed(&[Check::new("x", true, ""), Check::new("y", false, "")]));
    }
}
