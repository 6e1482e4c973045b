//! The minimization loop: projected-gradient descent with Armijo
//! backtracking on the re-projected perimeter, interleaved refinement,
//! topology-transition detection, and continuation in the density exponent.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thiserror::Error;

use crate::analyze;
use crate::cluster::{Cluster, EdgeId, RegionId, Severity, VertexId};
use crate::energy::{self, EnergyError};
use crate::geom::{DensityField, GeomError, Point};
use crate::surgery::SurgeryError;

/// Largest jump in the density exponent applied at once; bigger stage-to-
/// stage changes are walked in increments with re-convergence, since large
/// jumps cross the p = 1 transition non-physically.
pub const MAX_P_INCREMENT: f64 = 0.25;

/// Number of consecutive shrinking steps required before an edge collapse
/// is proposed; persistent tiny edges stabilize and are preserved.
pub const COLLAPSE_HYSTERESIS: usize = 20;

/// Relative per-step shrinkage below which an edge counts as stabilized
/// rather than shrinking.
const SHRINK_FLOOR_REL: f64 = 1e-12;

/// Edges this far below the collapse threshold are proposed regardless of
/// their trend: at that scale the edge is numerically degenerate for the
/// current resolution, and the hysteresis only exists to protect small
/// stabilized edges near the threshold.
pub const DEEP_COLLAPSE_FACTOR: f64 = 0.1;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Surgery(#[from] SurgeryError),
    #[error("invalid density exponent: {0}")]
    Density(#[from] GeomError),
    #[error("cluster invalid after {what}: {details}")]
    InvalidAfterSurgery { what: String, details: String },
    #[error("stage {stage} (p = {p}): {source}")]
    InStage {
        stage: usize,
        p: f64,
        #[source]
        source: Box<EvolveError>,
    },
}

/// Step control and transition thresholds for one evolution stage.
#[derive(Debug, Clone)]
pub struct EvolveConfig {
    pub initial_step: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub max_backtracks: usize,
    pub convergence_residual: f64,
    pub max_iterations: usize,
    /// Collapse proposals fire below this fraction of the cluster diameter.
    pub collapse_threshold_rel: f64,
    /// Max segment lengths for the successive refinement passes.
    pub refinement_levels: Vec<f64>,
    /// One-time upward displacement (plus seeded noise) applied before the
    /// first stage; breaks symmetry the way a slight upward nudge does.
    pub jiggle_amplitude: f64,
    pub rng_seed: u64,
    /// Re-space arc vertices every this many accepted steps (0 = never);
    /// keeps the discretization clean as vertices drift tangentially.
    pub resample_every: usize,
    /// Average the cluster with its x-axis mirror image at every resample;
    /// holds configurations on an unstable symmetric equilibrium (the
    /// straight chain) instead of letting rounding noise bend them.
    pub symmetrize_x: bool,
}

impl EvolveConfig {
    /// Scale-aware defaults derived from the cluster.
    pub fn defaults_for(cluster: &Cluster, p: f64) -> EvolveConfig {
        let diameter = cluster.diameter().max(1e-9);
        let min_target = cluster
            .regions()
            .map(|r| r.target_area)
            .fold(f64::INFINITY, f64::min)
            .max(1e-12);
        let perimeter = energy::measure_perimeter(cluster).unwrap_or(diameter);
        EvolveConfig {
            initial_step: 0.1 * min_target.powf(1.0 / (p + 2.0)),
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            max_backtracks: 30,
            convergence_residual: 1e-8 * perimeter / diameter,
            max_iterations: 20_000,
            collapse_threshold_rel: 5e-4,
            refinement_levels: vec![diameter / 16.0, diameter / 64.0, diameter / 256.0],
            jiggle_amplitude: 0.0,
            rng_seed: 0,
            resample_every: 50,
            symmetrize_x: false,
        }
    }
}

/// One stage of a schedule: a density exponent plus its step control.
#[derive(Debug, Clone)]
pub struct Stage {
    pub p: f64,
    pub config: EvolveConfig,
}

/// The continuation plan: exponents visited in order.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub stages: Vec<Stage>,
}

/// A topology transition applied during a run.
#[derive(Debug, Clone, PartialEq)]
pub enum TransitionEvent {
    Collapse { edge: EdgeId, merged: VertexId },
    Pop { vertex: VertexId, new_edge: EdgeId },
}

impl fmt::Display for TransitionEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionEvent::Collapse { edge, merged } => {
                write!(f, "collapse {edge} -> {merged}")
            }
            TransitionEvent::Pop { vertex, new_edge } => {
                write!(f, "pop {vertex} -> {new_edge}")
            }
        }
    }
}

/// Diagnostics of one descent step.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub accepted_step: f64,
    pub perimeter_before: f64,
    pub perimeter_after: f64,
    pub residual_norm: f64,
    /// Line search exhausted its backtracks; the caller treats this as
    /// stagnation, not an error.
    pub stagnated: bool,
    pub transitions: Vec<TransitionEvent>,
}

/// Proposed surgeries; applying them is the runner's decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Proposal {
    Collapse(EdgeId),
    Pop(VertexId),
}

/// Trailing junction-to-junction edge lengths over accepted steps.
#[derive(Debug, Default, Clone)]
pub struct EdgeTrend {
    history: BTreeMap<EdgeId, VecDeque<f64>>,
}

impl EdgeTrend {
    pub fn new() -> EdgeTrend {
        EdgeTrend::default()
    }

    pub fn clear(&mut self) {
        self.history.clear();
    }

    /// Records current lengths of junction-to-junction edges.
    pub fn record(&mut self, cluster: &Cluster) {
        let valences = cluster.valences();
        let mut seen = Vec::new();
        for e in cluster.edges() {
            if valences[&e.tail] >= 3 && valences[&e.head] >= 3 {
                let entry = self.history.entry(e.id).or_default();
                entry.push_back(cluster.edge_length(e.id));
                while entry.len() > COLLAPSE_HYSTERESIS + 1 {
                    entry.pop_front();
                }
                seen.push(e.id);
            }
        }
        self.history.retain(|id, _| seen.contains(id));
    }

    /// True when the edge shrank on each of the trailing
    /// [`COLLAPSE_HYSTERESIS`] accepted steps (by more than floating-point
    /// noise, so stabilized edges do not qualify).
    pub fn shrinking(&self, edge: EdgeId) -> bool {
        let Some(hist) = self.history.get(&edge) else {
            return false;
        };
        if hist.len() < COLLAPSE_HYSTERESIS + 1 {
            return false;
        }
        hist.iter()
            .zip(hist.iter().skip(1))
            .all(|(a, b)| a - b > SHRINK_FLOOR_REL * a.abs())
    }
}

/// Proposes collapses for short, monotonically shrinking junction-to-
/// junction edges and pops for valence-4 vertices away from the origin.
pub fn detect_transitions(cluster: &Cluster, cfg: &EvolveConfig, trend: &EdgeTrend) -> Vec<Proposal> {
    let mut out = Vec::new();
    let threshold = cfg.collapse_threshold_rel * cluster.diameter();
    let valences = cluster.valences();
    for e in cluster.edges() {
        if valences[&e.tail] < 3 || valences[&e.head] < 3 {
            continue;
        }
        let length = cluster.edge_length(e.id);
        if (length < threshold && trend.shrinking(e.id))
            || length < DEEP_COLLAPSE_FACTOR * threshold
        {
            out.push(Proposal::Collapse(e.id));
        }
    }
    let eps = cluster.epsilon_origin();
    for (v, valence) in valences {
        if valence == 4 && cluster.position(v).norm() > eps {
            out.push(Proposal::Pop(v));
        }
    }
    out
}

/// Constraint-tangent descent direction preconditioned by the lumped
/// weighted vertex measure.
///
/// Dividing the projected gradient by each vertex's share of the weighted
/// perimeter turns the raw gradient into the geometric flow velocity
/// (weighted curvature), so the step size is uniform across mesh density
/// and refinement levels. `residual_norm` is still the RMS of the plain
/// projected gradient, the quantity that vanishes at equilibrium.
struct DescentDirection {
    /// Per-vertex velocity in dense-index order.
    direction: Vec<Point>,
    /// <grad P, direction>; negative along a descent direction.
    slope: f64,
    residual_norm: f64,
    perimeter: f64,
}

fn descent_direction(
    cluster: &Cluster,
    ws: &mut energy::Workspace,
) -> Result<DescentDirection, EvolveError> {
    energy::dense_evaluate(cluster, ws)?;
    let dense = cluster.dense_topology().map_err(EnergyError::from)?;
    let n = dense.order.len();
    let m = ws.jac.len();

    let mean_mass = ws.mass.iter().sum::<f64>() / n.max(1) as f64;
    let floor = (1e-9 * mean_mass).max(1e-300);

    // Plain and mass-weighted Gram systems in one sweep.
    let mut plain_g = vec![vec![0.0; m]; m];
    let mut weighted_g = vec![vec![0.0; m]; m];
    let mut plain_rhs = vec![0.0; m];
    let mut weighted_rhs = vec![0.0; m];
    for i in 0..m {
        for j in i..m {
            let mut plain = 0.0;
            let mut weighted = 0.0;
            for k in 0..n {
                let d = ws.jac[i][k].dot(ws.jac[j][k]);
                plain += d;
                weighted += d / ws.mass[k].max(floor);
            }
            plain_g[i][j] = plain;
            plain_g[j][i] = plain;
            weighted_g[i][j] = weighted;
            weighted_g[j][i] = weighted;
        }
        let mut plain = 0.0;
        let mut weighted = 0.0;
        for k in 0..n {
            let d = ws.jac[i][k].dot(ws.grad_p[k]);
            plain += d;
            weighted += d / ws.mass[k].max(floor);
        }
        plain_rhs[i] = plain;
        weighted_rhs[i] = weighted;
    }
    let plain_lambda = energy::solve_gram_matrix(&plain_g, &plain_rhs)?;
    let weighted_lambda = energy::solve_gram_matrix(&weighted_g, &weighted_rhs)?;

    let mut direction = vec![Point::ORIGIN; n];
    let mut slope = 0.0;
    let mut resid_sq = 0.0;
    let mut unpinned = 0usize;
    for k in 0..n {
        if dense.pinned[k] {
            continue;
        }
        let gp = ws.grad_p[k];
        let mut raw = -gp;
        let mut precond = -gp;
        for i in 0..m {
            let g = ws.jac[i][k];
            raw = raw + g * plain_lambda[i];
            precond = precond + g * weighted_lambda[i];
        }
        resid_sq += raw.norm_sq();
        unpinned += 1;
        let d = precond * (1.0 / ws.mass[k].max(floor));
        slope += gp.dot(d);
        direction[k] = d;
    }
    Ok(DescentDirection {
        direction,
        slope,
        residual_norm: if unpinned == 0 {
            0.0
        } else {
            (resid_sq / unpinned as f64).sqrt()
        },
        perimeter: ws.perimeter,
    })
}

/// One descent step along the preconditioned constraint-tangent direction,
/// with Armijo backtracking on the perimeter after re-projection.
/// `trial_step` warm-starts the line search and is updated for the next
/// call.
pub fn step_with_hint(
    cluster: &mut Cluster,
    cfg: &EvolveConfig,
    trial_step: &mut f64,
    ws: &mut energy::Workspace,
) -> Result<StepResult, EvolveError> {
    let dd = descent_direction(cluster, ws)?;
    let perimeter_before = dd.perimeter;
    if dd.residual_norm <= cfg.convergence_residual || dd.slope >= 0.0 {
        return Ok(StepResult {
            accepted_step: 0.0,
            perimeter_before,
            perimeter_after: perimeter_before,
            residual_norm: dd.residual_norm,
            stagnated: dd.slope >= 0.0 && dd.residual_norm > cfg.convergence_residual,
            transitions: Vec::new(),
        });
    }

    let dense = cluster.dense_topology().map_err(EnergyError::from)?;
    let saved = cluster.dense_positions(&dense);
    let restore = |cluster: &mut Cluster| {
        for (k, &v) in dense.order.iter().enumerate() {
            cluster.set_position(v, saved[k]);
        }
    };
    let mut t = trial_step.min(cfg.initial_step).max(f64::MIN_POSITIVE);
    for _ in 0..=cfg.max_backtracks {
        for (k, &v) in dense.order.iter().enumerate() {
            let d = dd.direction[k];
            if d.x != 0.0 || d.y != 0.0 {
                cluster.set_position(v, saved[k] + d * t);
            }
        }
        let projected = energy::project_to_constraints(cluster, 50);
        match projected {
            Ok(_) => {
                let perimeter_after = energy::measure_perimeter(cluster)?;
                if perimeter_after <= perimeter_before + cfg.armijo_c * t * dd.slope {
                    *trial_step = (t * 2.0).min(cfg.initial_step);
                    return Ok(StepResult {
                        accepted_step: t,
                        perimeter_before,
                        perimeter_after,
                        residual_norm: dd.residual_norm,
                        stagnated: false,
                        transitions: Vec::new(),
                    });
                }
            }
            Err(EnergyError::NoConvergence { .. }) | Err(EnergyError::SingularGram { .. }) => {
                // Too-large trial step wrecked the constraint geometry; back
                // off like a failed Armijo test.
            }
            Err(e) => {
                restore(cluster);
                return Err(e.into());
            }
        }
        restore(cluster);
        t *= cfg.backtrack_factor;
    }
    *trial_step = cfg.initial_step;
    Ok(StepResult {
        accepted_step: 0.0,
        perimeter_before,
        perimeter_after: perimeter_before,
        residual_norm: dd.residual_norm,
        stagnated: true,
        transitions: Vec::new(),
    })
}

/// [`step_with_hint`] starting from the configured initial step.
pub fn step(cluster: &mut Cluster, cfg: &EvolveConfig) -> Result<StepResult, EvolveError> {
    let mut trial = cfg.initial_step;
    let mut ws = energy::Workspace::new();
    step_with_hint(cluster, cfg, &mut trial, &mut ws)
}

/// One line of the run log.
#[derive(Debug, Clone)]
pub struct LogRecord {
    pub stage: usize,
    pub p: f64,
    pub level: usize,
    pub iteration: usize,
    pub perimeter: f64,
    pub max_area_residual: f64,
    pub residual_norm: f64,
    pub event: String,
}

impl fmt::Display for LogRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "stage={} p={:.4} level={} iter={:06} perimeter={:.12e} area_resid={:.3e} resid={:.6e}{}{}",
            self.stage,
            self.p,
            self.level,
            self.iteration,
            self.perimeter,
            self.max_area_residual,
            self.residual_norm,
            if self.event.is_empty() { "" } else { " event=" },
            self.event
        )
    }
}

/// Converged state of one schedule stage.
#[derive(Debug, Clone)]
pub struct StageSummary {
    pub p: f64,
    pub perimeter: f64,
    pub areas: BTreeMap<RegionId, f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stagnated: bool,
    pub transitions: Vec<String>,
    /// Euclidean length of the central junction-to-junction edge, when one
    /// exists (both sides interior, both endpoints interior junctions).
    pub central_edge_length: Option<f64>,
    /// Whether a valence-4 vertex sits within epsilon of the origin.
    pub origin_valence4: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RunLog {
    pub records: Vec<LogRecord>,
    pub stages: Vec<StageSummary>,
    pub accepted_steps: usize,
}

impl RunLog {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }
}

/// Called after every accepted descent step with the running count.
pub type FrameObserver<'a> = dyn FnMut(usize, &Cluster) + 'a;

/// Runs the full schedule: for each stage, walk the density exponent over,
/// re-project, then refine and descend to convergence, applying proposed
/// transitions as they fire. Deterministic for a fixed seed and schedule.
pub fn run(cluster: Cluster, schedule: &Schedule) -> Result<(Cluster, RunLog), EvolveError> {
    run_observed(cluster, schedule, None)
}

pub fn run_observed(
    mut cluster: Cluster,
    schedule: &Schedule,
    mut observer: Option<&mut FrameObserver<'_>>,
) -> Result<(Cluster, RunLog), EvolveError> {
    let mut log = RunLog::default();

    if let Some(first) = schedule.stages.first() {
        apply_jiggle(&mut cluster, &first.config);
    }

    for (stage_idx, stage) in schedule.stages.iter().enumerate() {
        let in_stage = |e: EvolveError| EvolveError::InStage {
            stage: stage_idx,
            p: stage.p,
            source: Box::new(e),
        };
        run_stage(
            &mut cluster,
            stage_idx,
            stage,
            &mut log,
            observer.as_deref_mut(),
        )
        .map_err(in_stage)?;
    }
    Ok((cluster, log))
}

fn apply_jiggle(cluster: &mut Cluster, cfg: &EvolveConfig) {
    if cfg.jiggle_amplitude <= 0.0 {
        return;
    }
    let amp = cfg.jiggle_amplitude;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let ids: Vec<VertexId> = cluster
        .vertices()
        .filter(|v| !v.pinned)
        .map(|v| v.id)
        .collect();
    for id in ids {
        let noise = Point::new(
            amp * 1e-3 * rng.random_range(-1.0..1.0),
            amp * 1e-3 * rng.random_range(-1.0..1.0),
        );
        let pos = cluster.position(id);
        cluster.set_position(id, pos + Point::new(0.0, amp) + noise);
    }
}

fn continuation_exponents(from: f64, to: f64) -> Vec<f64> {
    if (from - to).abs() < 1e-12 {
        return vec![];
    }
    let steps = ((to - from).abs() / MAX_P_INCREMENT).ceil() as usize;
    (1..=steps)
        .map(|k| from + (to - from) * k as f64 / steps as f64)
        .collect()
}

fn run_stage(
    cluster: &mut Cluster,
    stage_idx: usize,
    stage: &Stage,
    log: &mut RunLog,
    mut observer: Option<&mut FrameObserver<'_>>,
) -> Result<(), EvolveError> {
    let cfg = &stage.config;
    let mut iterations = 0usize;
    let mut stagnated = false;
    let mut transitions: Vec<String> = Vec::new();
    let mut trend = EdgeTrend::new();

    // Start the stage on the coarsest mesh: the preconditioned step size
    // scales with the squared spacing, so shape changes travel much faster
    // there; the level loop then re-refines.
    if let Some(&coarsest) = cfg.refinement_levels.first() {
        cluster.resample_arcs_to(0.75 * coarsest);
        if cfg.symmetrize_x {
            cluster.symmetrize_about_x_axis();
        }
        energy::project_to_constraints(cluster, 100)?;
    }

    // Walk the exponent over in small increments, re-converging coarsely at
    // each intermediate value.
    let ramp = continuation_exponents(cluster.density().exponent(), stage.p);
    for &p_mid in &ramp {
        cluster.set_density(DensityField::new(p_mid)?);
        energy::project_to_constraints(cluster, 100)?;
        if (p_mid - stage.p).abs() > 1e-12 {
            let mut sub_cfg = cfg.clone();
            sub_cfg.convergence_residual = cfg.convergence_residual * 10.0;
            sub_cfg.max_iterations = (cfg.max_iterations / 4).max(200);
            let (iters, stag) = descend(
                cluster,
                stage_idx,
                p_mid,
                usize::MAX,
                None,
                &sub_cfg,
                log,
                &mut trend,
                &mut transitions,
                observer.as_deref_mut(),
            )?;
            iterations += iters;
            stagnated |= stag;
        }
    }
    cluster.set_density(DensityField::new(stage.p)?);
    energy::project_to_constraints(cluster, 100)?;

    let levels: Vec<(usize, f64)> = cfg.refinement_levels.iter().copied().enumerate().collect();
    let mut last_spacing = None;
    for &(level_idx, max_len) in &levels {
        cluster.refine(max_len);
        last_spacing = Some(0.75 * max_len);
        log.records.push(LogRecord {
            stage: stage_idx,
            p: stage.p,
            level: level_idx,
            iteration: iterations,
            perimeter: energy::measure_perimeter(cluster)?,
            max_area_residual: 0.0,
            residual_norm: f64::NAN,
            event: format!(
                "refine max_len={max_len:.6e} vertices={}",
                cluster.vertex_count()
            ),
        });
        energy::project_to_constraints(cluster, 100)?;
        let (iters, stag) = descend(
            cluster,
            stage_idx,
            stage.p,
            level_idx,
            Some(0.75 * max_len),
            cfg,
            log,
            &mut trend,
            &mut transitions,
            observer.as_deref_mut(),
        )?;
        iterations += iters;
        stagnated |= stag;
        if stag {
            break;
        }
    }

    // Polish: a fresh resample followed by pure descent, so the stage ends
    // on an evenly spaced, relaxed mesh.
    if !stagnated {
        for _ in 0..2 {
            match last_spacing {
                Some(h) => cluster.resample_arcs_to(h),
                None => cluster.resample_arcs(),
            }
            if cfg.symmetrize_x {
                cluster.symmetrize_about_x_axis();
            }
            energy::project_to_constraints(cluster, 100)?;
            let mut polish_cfg = cfg.clone();
            polish_cfg.resample_every = 0;
            polish_cfg.max_iterations = (2 * cfg.resample_every).max(100);
            let (iters, _) = descend(
                cluster,
                stage_idx,
                stage.p,
                levels.last().map(|&(i, _)| i).unwrap_or(0),
                None,
                &polish_cfg,
                log,
                &mut trend,
                &mut transitions,
                observer.as_deref_mut(),
            )?;
            iterations += iters;
            if iters < polish_cfg.max_iterations {
                break;
            }
        }
    }

    let pg = energy::projected_gradient(cluster)?;
    let central = analyze::central_arcs(cluster)
        .iter()
        .map(|arc| cluster.arc_euclidean_length(arc))
        .fold(f64::INFINITY, f64::min);
    let eps = cluster.epsilon_origin();
    let origin_valence4 = cluster
        .valences()
        .iter()
        .any(|(&v, &val)| val == 4 && cluster.position(v).norm() <= eps);
    log.stages.push(StageSummary {
        p: stage.p,
        perimeter: pg.energy.perimeter,
        areas: pg.energy.areas.clone(),
        residual_norm: pg.residual_norm,
        iterations,
        converged: pg.residual_norm <= cfg.convergence_residual,
        stagnated,
        transitions,
        central_edge_length: central.is_finite().then_some(central),
        origin_valence4,
    });
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn descend(
    cluster: &mut Cluster,
    stage_idx: usize,
    p: f64,
    level: usize,
    resample_spacing: Option<f64>,
    cfg: &EvolveConfig,
    log: &mut RunLog,
    trend: &mut EdgeTrend,
    transitions: &mut Vec<String>,
    mut observer: Option<&mut FrameObserver<'_>>,
) -> Result<(usize, bool), EvolveError> {
    trend.record(cluster);
    let mut trial = cfg.initial_step;
    let mut ws = energy::Workspace::new();
    let level_tag = if level == usize::MAX { 99 } else { level };

    for iter in 0..cfg.max_iterations {
        let result = step_with_hint(cluster, cfg, &mut trial, &mut ws)?;
        let area_resid = max_area_residual(cluster)?;
        let mut event = String::new();

        if result.accepted_step > 0.0 {
            log.accepted_steps += 1;
            trend.record(cluster);
            if let Some(obs) = observer.as_deref_mut() {
                obs(log.accepted_steps, cluster);
            }
            if cfg.resample_every > 0 && log.accepted_steps % cfg.resample_every == 0 {
                match resample_spacing {
                    Some(h) => cluster.resample_arcs_to(h),
                    None => cluster.resample_arcs(),
                }
                if cfg.symmetrize_x {
                    cluster.symmetrize_about_x_axis();
                }
                energy::project_to_constraints(cluster, 100)?;
            }
            let proposals = detect_transitions(cluster, cfg, trend);
            for proposal in proposals {
                match apply_proposal(cluster, proposal) {
                    Ok(Some(t)) => {
                        let violations = cluster.validate();
                        if violations.iter().any(|v| v.severity == Severity::Error) {
                            return Err(EvolveError::InvalidAfterSurgery {
                                what: t.to_string(),
                                details: violations
                                    .iter()
                                    .map(|v| v.message.clone())
                                    .collect::<Vec<_>>()
                                    .join("; "),
                            });
                        }
                        energy::project_to_constraints(cluster, 100)?;
                        trend.clear();
                        trend.record(cluster);
                        trial = cfg.initial_step;
                        event = t.to_string();
                        transitions.push(t.to_string());
                    }
                    Ok(None) => {}
                    Err(e) => {
                        event = format!("skipped transition: {e}");
                    }
                }
            }
        }

        if iter % 25 == 0 || !event.is_empty() || result.stagnated {
            log.records.push(LogRecord {
                stage: stage_idx,
                p,
                level: level_tag,
                iteration: iter,
                perimeter: result.perimeter_after,
                max_area_residual: area_resid,
                residual_norm: result.residual_norm,
                event: event.clone(),
            });
        }

        if result.stagnated {
            log.records.push(LogRecord {
                stage: stage_idx,
                p,
                level: level_tag,
                iteration: iter,
                perimeter: result.perimeter_after,
                max_area_residual: area_resid,
                residual_norm: result.residual_norm,
                event: "stagnated line search".to_string(),
            });
            return Ok((iter + 1, true));
        }
        if result.accepted_step == 0.0 {
            // Converged: residual below threshold.
            return Ok((iter + 1, false));
        }
    }
    Ok((cfg.max_iterations, false))
}

fn apply_proposal(
    cluster: &mut Cluster,
    proposal: Proposal,
) -> Result<Option<TransitionEvent>, SurgeryError> {
    match proposal {
        Proposal::Collapse(edge) => {
            if cluster.edge(edge).is_none() {
                return Ok(None);
            }
            let merged = cluster.collapse_edge(edge)?;
            Ok(Some(TransitionEvent::Collapse { edge, merged }))
        }
        Proposal::Pop(vertex) => {
            if cluster.vertex(vertex).is_none() {
                return Ok(None);
            }
            let (_, _, new_edge) = cluster.pop_vertex(vertex)?;
            Ok(Some(TransitionEvent::Pop { vertex, new_edge }))
        }
    }
}

fn max_area_residual(cluster: &Cluster) -> Result<f64, EnergyError> {
    let areas = energy::measure_areas(cluster)?;
    Ok(areas
        .iter()
        .map(|(rid, a)| {
            let t = cluster.region(*rid).unwrap().target_area;
            (a - t).abs() / t
        })
        .fold(0.0, f64::max))
}
