//! The machine-readable run summary written next to each experiment's
//! outputs and consumed by `compare`.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use isocluster_core::analyze::ComparableRun;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub exponent: f64,
    pub target_areas: BTreeMap<String, f64>,
    pub measured_areas: BTreeMap<String, f64>,
    pub perimeter: f64,
    pub residual_norm: f64,
    pub converged: bool,
    pub stagnated: bool,
    pub iterations: usize,
    pub accepted_steps: usize,
    pub transitions: Vec<String>,
    pub stages: Vec<StageRecord>,
    pub checks: CheckOutcome,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub p: f64,
    pub perimeter: f64,
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub central_edge_length: Option<f64>,
    pub origin_valence4: bool,
    pub transitions: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub enabled: bool,
    pub passed: bool,
    pub angle_violations: Vec<u64>,
    pub max_angle_deviation_deg: f64,
    pub max_constancy_defect: f64,
    pub inner_arcs_through_origin: Option<bool>,
    pub notes: Vec<String>,
}

impl RunSummary {
    pub fn comparable(&self) -> ComparableRun {
        ComparableRun {
            name: self.name.clone(),
            exponent: self.exponent,
            target_areas: self.target_areas.values().copied().collect(),
            perimeter: self.perimeter,
        }
    }
}

pub fn write_summary(path: &Path, summary: &RunSummary) -> Result<()> {
    let text = serde_json::to_string_pretty(summary)?;
    std::fs::write(path, text + "\n")
        .with_context(|| format!("writing summary {}", path.display()))
}

pub fn read_summary(path: &Path) -> Result<RunSummary> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading summary {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing summary {}", path.display()))
}
