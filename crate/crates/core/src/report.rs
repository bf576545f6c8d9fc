//! Machine-diffable run reports.
//!
//! Keys are stable and emitted in a fixed order; non-finite numbers become
//! `null`. Identical inputs give byte-identical output.

use serde::{Deserialize, Serialize};

use crate::minimax::{MinimaxReport, MinimaxStatus};
use crate::theorems::{Conclusion, Hypothesis, Tally, TheoremReport};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub seed: u64,
    pub version: String,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxEntry {
    pub k: usize,
    pub direct: f64,
    pub candidate: f64,
    pub probe_min: f64,
    pub refined: Option<f64>,
    pub status: MinimaxStatus,
}

impl From<&MinimaxReport> for MinimaxEntry {
    fn from(m: &MinimaxReport) -> Self {
        Self {
            k: m.k,
            direct: m.direct,
            candidate: m.candidate_value,
            probe_min: m.probe_min,
            refined: m.refined_value,
            status: m.status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceEntry {
    pub id: String,
    pub kind: String,
    pub theorem: String,
    pub hypotheses: Vec<Hypothesis>,
    pub conclusions: Vec<Conclusion>,
    pub minimax: Vec<MinimaxEntry>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub run: RunInfo,
    pub instances: Vec<InstanceEntry>,
    pub summary: Tally,
}

impl RunReport {
    pub fn new(seed: u64, config: serde_json::Value) -> Self {
        Self {
            run: RunInfo {
                seed,
                version: VERSION.to_string(),
                config,
            },
            instances: Vec::new(),
            summary: Tally::default(),
        }
    }

    pub fn push(&mut self, id: impl Into<String>, kind: impl Into<String>, report: TheoremReport) {
        self.summary.add(report.tally());
        self.instances.push(InstanceEntry {
            id: id.into(),
            kind: kind.into(),
            theorem: report.theorem,
            hypotheses: report.hypotheses,
            conclusions: report.conclusions,
            minimax: report.minimax.iter().map(MinimaxEntry::from).collect(),
            notes: report.notes,
        });
    }

    /// Instances whose hypotheses did not all hold.
    pub fn gated(&self) -> usize {
        self.instances
            .iter()
            .filter(|i| i.hypotheses.iter().any(|h| !h.holds))
            .count()
    }

    pub fn passed(&self) -> bool {
        self.summary.fail == 0
    }

    /// `0` when every applicable conclusion holds, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
