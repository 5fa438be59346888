//! Inequality checkers, seeded instance ensembles and the suite runner.
//!
//! Every checker evaluates both sides of one inequality or identity and
//! returns a [`GapReport`] whose margin is oriented so that `margin >= 0`
//! means the statement holds. A report passes when `margin >= -slack`.

mod checks;
mod ensemble;
mod runner;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use checks::*;
pub use ensemble::{EnsembleChannelKind, EnsembleStateKind, Instance, InstanceEnsemble};
pub use runner::{
    fidelity_grid, random_exponential_sum, registry, run_suite, CheckSummary, ReportFormat, SuiteConfig, SuiteOutcome, SuiteReport, CHECK_NAMES,
};

/// Relative slack used by inequality checks.
pub const RELATIVE_SLACK: f64 = 1e-7;

/// `1e−7 · max(1, |lhs|, |rhs|)`, ignoring non-finite sides.
pub fn default_slack(lhs: f64, rhs: f64) -> f64 {
    let scale = [lhs, rhs]
        .iter()
        .filter(|x| x.is_finite())
        .fold(1.0f64, |m, x| m.max(x.abs()));
    RELATIVE_SLACK * scale
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub check: String,
    pub instance_id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub slack: f64,
    pub pass: bool,
    pub diagnostics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl GapReport {
    /// Report for `lhs <= rhs`. An infinite right side passes outright.
    pub fn new(check: &str, lhs: f64, rhs: f64) -> Self {
        let margin = if rhs == f64::INFINITY || lhs == f64::NEG_INFINITY { f64::INFINITY } else { rhs - lhs };
        Self::with_margin(check, lhs, rhs, margin)
    }

    pub fn with_margin(check: &str, lhs: f64, rhs: f64, margin: f64) -> Self {
        let slack = default_slack(lhs, rhs);
        Self {
            check: check.to_string(),
            instance_id: String::new(),
            lhs,
            rhs,
            margin,
            slack,
            pass: passes(margin, slack),
            diagnostics: BTreeMap::new(),
            error: None,
        }
    }

    /// Failed report carrying an evaluation error.
    pub fn errored(check: &str, instance_id: &str, message: impl Into<String>) -> Self {
        Self {
            check: check.to_string(),
            instance_id: instance_id.to_string(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            margin: f64::NAN,
            slack: 0.0,
            pass: false,
            diagnostics: BTreeMap::new(),
            error: Some(message.into()),
        }
    }

    pub fn slack(mut self, slack: f64) -> Self {
        self.slack = slack;
        self.pass = passes(self.margin, slack);
        self
    }

    pub fn id(mut self, instance_id: impl Into<String>) -> Self {
        self.instance_id = instance_id.into();
        self
    }

    pub fn diag(mut self, key: impl Into<String>, value: f64) -> Self {
        self.diagnostics.insert(key.into(), value);
        self
    }

    /// Headroom relative to the pass threshold; negative iff the report fails.
    pub fn headroom(&self) -> f64 {
        if self.margin.is_nan() {
            f64::NEG_INFINITY
        } else {
            self.margin + self.slack
        }
    }

    /// Worst of several labelled sub-reports, with every sub-margin kept as a
    /// diagnostic `margin[label]` and the sub-diagnostics as `key[label]`.
    pub fn worst(check: &str, parts: Vec<(String, GapReport)>) -> Self {
        assert!(!parts.is_empty(), "no sub-reports");
        let mut diagnostics = BTreeMap::new();
        for (label, part) in &parts {
            diagnostics.insert(format!("margin[{label}]"), part.margin);
            for (k, v) in &part.diagnostics {
                diagnostics.insert(format!("{k}[{label}]"), *v);
            }
        }
        let pass = parts.iter().all(|(_, r)| r.pass);
        let (_, worst) = parts
            .into_iter()
            .min_by(|a, b| a.1.headroom().total_cmp(&b.1.headroom()))
            .expect("non-empty");
        Self {
            check: check.to_string(),
            diagnostics,
            pass,
            ..worst
        }
    }
}

fn passes(margin: f64, slack: f64) -> bool {
    !margin.is_nan() && margin >= -slack
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_scales_with_sides() {
        assert_eq!(default_slack(0.5, -0.2), 1e-7);
        assert_eq!(default_slack(30.0, -50.0), 50.0 * RELATIVE_SLACK);
        assert_eq!(default_slack(f64::INFINITY, 2.0), 2.0 * RELATIVE_SLACK);
    }

    #[test]
    fn pass_flag_follows_margin() {
        let r = GapReport::new("x", 1.0, 1.0 - 5e-8);
        assert!(r.pass);
        let r = GapReport::new("x", 1.0, 1.0 - 2e-7);
        assert!(!r.pass);
        assert!(GapReport::new("x", 3.0, f64::INFINITY).pass);
        assert!(!GapReport::with_margin("x", 0.0, 0.0, f64::NAN).pass);
    }

    #[test]
    fn worst_keeps_failing_part() {
        let parts = vec![
            ("a".to_string(), GapReport::new("x", 0.0, 1.0)),
            ("b".to_string(), GapReport::new("x", 1.0, 0.0).diag("n", 2.0)),
        ];
        let w = GapReport::worst("x", parts);
        assert!(!w.pass);
        assert_eq!(w.margin, -1.0);
        assert_eq!(w.diagnostics["margin[a]"], 1.0);
        assert_eq!(w.diagnostics["n[b]"], 2.0);
    }
}
