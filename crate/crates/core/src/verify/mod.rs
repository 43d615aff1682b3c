//! Experiment harness: each check runs one numerical experiment and returns a
//! [`Report`] whose verdict is a pure function of its metrics and tolerance.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::mlf::MlError;
use crate::norms::NormError;
use crate::solver::SolveError;
use crate::spectral::SpectralError;

mod analytic;
mod flow;
mod smoothing;

pub use analytic::*;
pub use flow::*;
pub use smoothing::*;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("scaled probes leave the trusted region: {0}")]
    InsufficientOverlap(String),
    #[error("decay window holds {0} saved times, need at least 3")]
    WindowTooShort(usize),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Ml(#[from] MlError),
}

/// A tabulated curve, written out as CSV by the front end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub inputs: serde_json::Value,
    pub metrics: BTreeMap<String, f64>,
    pub pass: bool,
    pub tolerance: f64,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default)]
    pub curves: Vec<Curve>,
    /// Paths of files written for this report (filled in by the writer).
    #[serde(default)]
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn new(name: &str, inputs: serde_json::Value, tolerance: f64) -> Self {
        Report {
            name: name.into(),
            inputs,
            metrics: BTreeMap::new(),
            pass: false,
            tolerance,
            notes: Vec::new(),
            curves: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn metric(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.into(), v);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }

    /// Set the verdict; a non-finite metric always fails.
    fn decide(mut self, ok: bool) -> Self {
        let bad: Vec<&String> = self.metrics.iter().filter(|(_, v)| !v.is_finite()).map(|(k, _)| k).collect();
        if !bad.is_empty() {
            let msg = format!("non-finite metrics: {bad:?}");
            self.notes.push(msg);
            self.pass = false;
        } else {
            self.pass = ok;
        }
        self
    }

    /// One-line verdict for logs.
    pub fn summary_line(&self) -> String {
        let key = self.metrics.iter().next().map(|(k, v)| format!(" {k}={v:.3e}")).unwrap_or_default();
        format!("{} {}{} (tol {:.3e})", if self.pass { "PASS" } else { "FAIL" }, self.name, key, self.tolerance)
    }
}

/// Least-squares slope of y against x.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Names of the checks, as exposed by the command-line front end.
pub const CHECK_NAMES: &[&str] = &[
    "check_decomposition",
    "check_relaxation_mass",
    "check_identities",
    "check_closed_forms",
    "check_duhamel",
    "check_solver_order",
    "check_mikhlin",
    "check_smoothing",
    "check_norm_layer",
    "check_feasibility",
    "check_selfsimilarity",
    "check_decay",
    "check_symmetry",
    "check_stability",
    "extract_profile",
];
