//! The audit report written as JSON.

use std::collections::BTreeMap;

use adp_core::optimizer::GcpTrace;
use adp_core::{AdpError, Interval};
use serde::{Deserialize, Serialize};

use crate::config::AuditSettings;
use crate::error::{CliError, CliResult};

/// Final utility of one candidate target in an instance-set search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub row: usize,
    pub utility: Option<f64>,
}

/// Everything needed to redraw and reproduce one automatically chosen plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub engine_version: String,
    pub model: String,
    pub space: String,
    /// Dataset row of the plotted target.
    pub target_index: usize,
    pub target: Vec<f64>,
    pub prediction: f64,
    /// Nonzero direction weights keyed by coordinate name.
    pub direction: BTreeMap<String, f64>,
    pub interval: Interval,
    pub ts: Vec<f64>,
    pub fs: Vec<f64>,
    /// Fitted reference or contrast curve on the same grid.
    pub fit_values: Vec<f64>,
    pub utility: f64,
    pub utility_spec: String,
    pub feature_names: Vec<String>,
    /// Names of the coordinates the direction lives in.
    pub coordinate_names: Vec<String>,
    /// For each grid point, the values of the changing coordinates.
    pub tick_labels: Vec<Vec<(String, f64)>>,
    pub eval_count: u64,
    pub reconstruction_residual: Option<f64>,
    pub candidates: Option<Vec<CandidateScore>>,
    pub trace: GcpTrace,
    pub config: AuditSettings,
}

impl AuditReport {
    /// Checks the structural invariants of a report.
    pub fn validate(&self) -> CliResult<()> {
        let k = self.ts.len();
        if self.fs.len() != k || self.fit_values.len() != k || self.tick_labels.len() != k {
            return Err(CliError::Core(AdpError::LengthMismatch(k, self.fs.len())));
        }
        if let Some(name) = self.direction.keys().find(|n| !self.coordinate_names.contains(n)) {
            return Err(CliError::Config(format!("direction names unknown coordinate {name:?}")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed report: {e}")))
    }
}
