//! The experiment configuration file: one TOML document defining many
//! named experiments (seed constructor, target areas, schedule, checks,
//! render options).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(rename = "experiment", default)]
    pub experiments: Vec<ExperimentSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub seed: SeedSpec,
    /// Explicit target weighted areas; omitted means "keep the seed's own
    /// targets" (constructor areas or document values).
    #[serde(default)]
    pub target_areas: Option<TargetAreas>,
    pub schedule: ScheduleSpec,
    #[serde(default)]
    pub checks: CheckSpec,
    #[serde(default)]
    pub render: RenderSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TargetAreas {
    /// Fixed list, one entry per region in region-id order.
    Explicit(Vec<f64>),
    /// "measured": measure the (re-placed) seed's weighted areas at the
    /// final stage exponent and use those as targets.
    Keyword(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeedSpec {
    Double {
        r1: f64,
        r2: f64,
        #[serde(default = "default_placement")]
        placement: String,
        #[serde(default = "default_segments")]
        segments_per_arc: usize,
    },
    Triple {
        areas: [f64; 3],
        #[serde(default = "default_segments")]
        segments_per_arc: usize,
    },
    /// Areas are assigned clockwise starting from the top lobe:
    /// [top, right, bottom, left].
    Quadruple {
        areas: [f64; 4],
        #[serde(default = "default_segments")]
        segments_per_arc: usize,
    },
    Chain {
        areas: Vec<f64>,
        #[serde(default = "default_segments")]
        segments_per_arc: usize,
    },
    Circle {
        area: f64,
        center: [f64; 2],
        #[serde(default = "default_segments")]
        segments_per_arc: usize,
    },
    /// A saved cluster document, optionally re-placed before evolving.
    File {
        path: PathBuf,
        /// "central_edge_midpoint" translates that midpoint to the origin
        /// (and unpins every vertex).
        #[serde(default)]
        recenter: Option<String>,
    },
}

fn default_placement() -> String {
    "vertex_at_origin".to_string()
}

fn default_segments() -> usize {
    isocluster_core::seeds::DEFAULT_SEGMENTS_PER_ARC
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub stages: Vec<StageSpec>,
    /// Defaults applied to every stage unless the stage overrides them.
    #[serde(default)]
    pub jiggle_amplitude_rel: f64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub symmetrize_x: bool,
    #[serde(default = "default_resample_every")]
    pub resample_every: usize,
}

fn default_resample_every() -> usize {
    10
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub p: f64,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub convergence_residual: Option<f64>,
    /// Refinement levels as divisors of the seed diameter, e.g. [16, 48, 128].
    #[serde(default)]
    pub refinement_divisors: Option<Vec<f64>>,
    #[serde(default)]
    pub collapse_threshold_rel: Option<f64>,
    #[serde(default)]
    pub initial_step: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    /// Run the regularity suite and gate the exit code on it.
    #[serde(default = "default_true")]
    pub regularity: bool,
    #[serde(default = "default_angle_tol")]
    pub angle_tolerance_deg: f64,
    #[serde(default = "default_defect_tol")]
    pub curvature_defect_tol: f64,
    /// Every interior-interior arc (with enough samples, away from the
    /// origin zone) must classify as circular-through-origin.
    #[serde(default)]
    pub require_inner_arcs_through_origin: bool,
    #[serde(default = "default_true")]
    pub require_convergence: bool,
}

fn default_true() -> bool {
    true
}

fn default_angle_tol() -> f64 {
    isocluster_core::analyze::ANGLE_TOL_DEG
}

fn default_defect_tol() -> f64 {
    isocluster_core::analyze::CURVATURE_DEFECT_TOL
}

impl Default for CheckSpec {
    fn default() -> Self {
        CheckSpec {
            regularity: true,
            angle_tolerance_deg: default_angle_tol(),
            curvature_defect_tol: default_defect_tol(),
            require_inner_arcs_through_origin: false,
            require_convergence: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderSpec {
    #[serde(default = "default_px")]
    pub width: u32,
    #[serde(default = "default_px")]
    pub height: u32,
    /// Mark the origin with a plus sign.
    #[serde(default = "default_true")]
    pub origin_marker: bool,
    /// Emit an SVG frame every this many accepted steps (0 = final only).
    #[serde(default)]
    pub frame_every: usize,
}

fn default_px() -> u32 {
    720
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            width: default_px(),
            height: default_px(),
            origin_marker: true,
            frame_every: 0,
        }
    }
}

/// Parses the config file and indexes experiments by name.
pub fn load_config(path: &Path) -> Result<(ConfigFile, BTreeMap<String, usize>)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let config: ConfigFile =
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
    let mut index = BTreeMap::new();
    for (i, e) in config.experiments.iter().enumerate() {
        if index.insert(e.name.clone(), i).is_some() {
            bail!("duplicate experiment name {:?}", e.name);
        }
    }
    Ok((config, index))
}
