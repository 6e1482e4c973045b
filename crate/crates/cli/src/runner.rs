//! Builds a seed from an experiment spec, runs the schedule, applies the
//! configured checks, and writes the output bundle:
//! out/<experiment>/{summary.json, cluster.json, log.txt, final.svg, frames/}.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

use isocluster_core::analyze::{self, ArcClass};
use isocluster_core::doc;
use isocluster_core::energy;
use isocluster_core::evolve::{self, EvolveConfig, Schedule, Stage};
use isocluster_core::geom::{DensityField, Point};
use isocluster_core::seeds;
use isocluster_core::Cluster;

use crate::config::{CheckSpec, ExperimentSpec, SeedSpec, StageSpec, TargetAreas};
use crate::summary::{CheckOutcome, RunSummary, StageRecord};
use crate::svg;

pub struct ExperimentOutcome {
    pub summary: RunSummary,
    pub out_dir: PathBuf,
}

pub fn build_seed(spec: &SeedSpec, config_dir: &Path, first_p: f64) -> Result<Cluster> {
    let density = DensityField::new(first_p).map_err(|e| anyhow!("{e}"))?;
    let cluster = match spec {
        SeedSpec::Double {
            r1,
            r2,
            placement,
            segments_per_arc,
        } => {
            let placement = match placement.as_str() {
                "vertex_at_origin" => seeds::Placement::VertexAtOrigin,
                "center_at_origin" => seeds::Placement::CenterAtOrigin,
                other => bail!("unknown placement {other:?}"),
            };
            let mut spec = seeds::DoubleBubbleSpec::new(*r1, *r2);
            spec.segments_per_arc = *segments_per_arc;
            seeds::standard_double_bubble(&spec, placement, density)
        }
        SeedSpec::Triple {
            areas,
            segments_per_arc,
        } => seeds::triple_seed(*areas, density, *segments_per_arc),
        SeedSpec::Quadruple {
            areas,
            segments_per_arc,
        } => seeds::quadruple_seed(*areas, density, *segments_per_arc),
        SeedSpec::Chain {
            areas,
            segments_per_arc,
        } => seeds::chain_seed(areas, density, *segments_per_arc),
        SeedSpec::Circle {
            area,
            center,
            segments_per_arc,
        } => seeds::circle_seed(
            *area,
            Point::new(center[0], center[1]),
            density,
            *segments_per_arc,
        ),
        SeedSpec::File { path, recenter } => {
            let full = if path.is_absolute() {
                path.clone()
            } else {
                config_dir.join(path)
            };
            let text = fs::read_to_string(&full)
                .with_context(|| format!("reading seed document {}", full.display()))?;
            let mut cluster = doc::load_cluster(&text).map_err(|e| anyhow!("{e}"))?;
            match recenter.as_deref() {
                None => {}
                Some("central_edge_midpoint") => {
                    let arcs = analyze::central_arcs(&cluster);
                    let arc = arcs
                        .first()
                        .ok_or_else(|| anyhow!("no central edge to recenter on"))?;
                    let a = cluster.position(arc.vertices[0]);
                    let b = cluster.position(*arc.vertices.last().unwrap());
                    cluster.translate((a + b) * -0.5);
                }
                Some(other) => bail!("unknown recenter mode {other:?}"),
            }
            cluster
        }
    };
    Ok(cluster)
}

fn stage_config(
    seed: &Cluster,
    spec: &ExperimentSpec,
    stage: &StageSpec,
    is_first: bool,
    rng_seed_override: Option<u64>,
) -> EvolveConfig {
    let mut cfg = EvolveConfig::defaults_for(seed, stage.p);
    let diameter = seed.diameter();
    if let Some(divisors) = &stage.refinement_divisors {
        cfg.refinement_levels = divisors.iter().map(|d| diameter / d).collect();
    }
    if let Some(v) = stage.max_iterations {
        cfg.max_iterations = v;
    }
    if let Some(v) = stage.convergence_residual {
        cfg.convergence_residual = v;
    }
    if let Some(v) = stage.collapse_threshold_rel {
        cfg.collapse_threshold_rel = v;
    }
    if let Some(v) = stage.initial_step {
        cfg.initial_step = v;
    }
    cfg.resample_every = spec.schedule.resample_every;
    cfg.symmetrize_x = spec.schedule.symmetrize_x;
    // The jiggle fires once, from the first stage's config.
    cfg.jiggle_amplitude = if is_first {
        spec.schedule.jiggle_amplitude_rel * diameter
    } else {
        0.0
    };
    cfg.rng_seed = rng_seed_override.unwrap_or(spec.schedule.rng_seed);
    cfg
}

/// Resolves the experiment's target areas onto the seed and projects once.
fn apply_targets(cluster: &mut Cluster, spec: &ExperimentSpec, final_p: f64) -> Result<()> {
    match &spec.target_areas {
        None => {}
        Some(TargetAreas::Explicit(list)) => {
            let ids: Vec<_> = cluster.regions().map(|r| r.id).collect();
            if list.len() != ids.len() {
                bail!(
                    "target_areas has {} entries for {} regions",
                    list.len(),
                    ids.len()
                );
            }
            for (rid, target) in ids.into_iter().zip(list) {
                if !(*target > 0.0) {
                    bail!("target areas must be positive");
                }
                cluster.set_target_area(rid, *target);
            }
            seeds::rescale_to_targets(cluster);
        }
        Some(TargetAreas::Keyword(word)) if word == "measured" => {
            // Measure the placed seed under the final-stage density and
            // freeze those values as the targets.
            let original = cluster.density();
            cluster.set_density(DensityField::new(final_p).map_err(|e| anyhow!("{e}"))?);
            let areas = energy::measure_areas(cluster).map_err(|e| anyhow!("{e}"))?;
            cluster.set_density(original);
            for (rid, area) in areas {
                if !(area > 0.0) {
                    bail!("measured area for {rid} is not positive");
                }
                cluster.set_target_area(rid, area);
            }
        }
        Some(TargetAreas::Keyword(other)) => bail!("unknown target_areas keyword {other:?}"),
    }
    energy::project_to_constraints(cluster, 100).map_err(|e| anyhow!("projection failed: {e}"))?;
    Ok(())
}

fn run_checks(cluster: &Cluster, checks: &CheckSpec, converged: bool, stagnated: bool) -> CheckOutcome {
    if !checks.regularity {
        let passed = !checks.require_convergence || converged;
        return CheckOutcome {
            enabled: false,
            passed,
            angle_violations: Vec::new(),
            max_angle_deviation_deg: f64::NAN,
            max_constancy_defect: f64::NAN,
            inner_arcs_through_origin: None,
            notes: if stagnated {
                vec!["stagnated line search; stage ended early".into()]
            } else {
                Vec::new()
            },
        };
    }

    let mut notes = Vec::new();
    let report = match analyze::regularity_report(cluster, checks.angle_tolerance_deg) {
        Ok(r) => r,
        Err(e) => {
            return CheckOutcome {
                enabled: true,
                passed: false,
                angle_violations: Vec::new(),
                max_angle_deviation_deg: f64::NAN,
                max_constancy_defect: f64::NAN,
                inner_arcs_through_origin: None,
                notes: vec![format!("regularity report failed: {e}")],
            }
        }
    };
    let max_dev = report
        .junctions
        .iter()
        .filter(|j| !j.origin_exempt)
        .map(|j| j.max_deviation_deg)
        .fold(0.0_f64, f64::max);
    let max_defect = report
        .arcs
        .iter()
        .filter(|a| a.class != ArcClass::Insufficient && a.vertex_count >= 5 && !a.origin_local)
        .map(|a| a.constancy_defect)
        .fold(0.0_f64, f64::max);
    let mut passed = report.angle_violations.is_empty() && max_defect < checks.curvature_defect_tol;

    let inner_through_origin = if checks.require_inner_arcs_through_origin {
        let ok = report
            .arcs
            .iter()
            .filter(|a| {
                a.left != "exterior"
                    && a.right != "exterior"
                    && a.vertex_count >= 5
                    && !a.origin_local
            })
            .all(|a| a.class == ArcClass::CircularThroughOrigin);
        if !ok {
            notes.push("an inner arc is not circular-through-origin".into());
        }
        passed &= ok;
        Some(ok)
    } else {
        None
    };

    if checks.require_convergence && !converged {
        notes.push("stage did not reach its convergence residual".into());
        passed = false;
    }
    if stagnated {
        notes.push("stagnated line search; stage ended early".into());
    }

    CheckOutcome {
        enabled: true,
        passed,
        angle_violations: report.angle_violations.clone(),
        max_angle_deviation_deg: max_dev,
        max_constancy_defect: max_defect,
        inner_arcs_through_origin: inner_through_origin,
        notes,
    }
}

pub fn run_experiment(
    spec: &ExperimentSpec,
    config_dir: &Path,
    out_root: &Path,
    rng_seed_override: Option<u64>,
) -> Result<ExperimentOutcome> {
    let first_p = spec
        .schedule
        .stages
        .first()
        .ok_or_else(|| anyhow!("experiment {} has no stages", spec.name))?
        .p;
    let final_p = spec.schedule.stages.last().unwrap().p;

    let mut cluster = build_seed(&spec.seed, config_dir, first_p)?;
    let violations = cluster.validate();
    if violations
        .iter()
        .any(|v| v.severity == isocluster_core::cluster::Severity::Error)
    {
        bail!("seed for {} is invalid: {violations:?}", spec.name);
    }
    apply_targets(&mut cluster, spec, final_p)?;

    let schedule = Schedule {
        stages: spec
            .schedule
            .stages
            .iter()
            .enumerate()
            .map(|(i, s)| Stage {
                p: s.p,
                config: stage_config(&cluster, spec, s, i == 0, rng_seed_override),
            })
            .collect(),
    };

    let out_dir = out_root.join(&spec.name);
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;
    let frames_dir = out_dir.join("frames");
    if spec.render.frame_every > 0 {
        fs::create_dir_all(&frames_dir)?;
    }

    let frame_every = spec.render.frame_every;
    let render_spec = spec.render.clone();
    let mut frame_error: Option<anyhow::Error> = None;
    let mut observer = |count: usize, cluster: &Cluster| {
        if frame_every == 0 || count % frame_every != 0 || frame_error.is_some() {
            return;
        }
        let svg_text = svg::render_cluster(cluster, &render_spec);
        let path = frames_dir.join(format!("frame_{count:06}.svg"));
        if let Err(e) = fs::write(&path, svg_text) {
            frame_error = Some(e.into());
        }
    };

    let (converged_cluster, log) = evolve::run_observed(cluster, &schedule, Some(&mut observer))
        .map_err(|e| anyhow!("evolution failed: {e}"))?;
    if let Some(e) = frame_error {
        return Err(e.context("writing frames"));
    }

    fs::write(out_dir.join("log.txt"), log.to_text())?;
    fs::write(out_dir.join("cluster.json"), doc::save_cluster(&converged_cluster))?;
    fs::write(
        out_dir.join("final.svg"),
        svg::render_cluster(&converged_cluster, &spec.render),
    )?;

    let last = log
        .stages
        .last()
        .ok_or_else(|| anyhow!("run produced no stages"))?;
    let stagnated = log.stages.iter().any(|s| s.stagnated);
    let checks = run_checks(&converged_cluster, &spec.checks, last.converged, stagnated);

    let label_of = |rid| converged_cluster.region(rid).unwrap().label.clone();
    let summary = RunSummary {
        name: spec.name.clone(),
        exponent: final_p,
        target_areas: converged_cluster
            .regions()
            .map(|r| (r.label.clone(), r.target_area))
            .collect(),
        measured_areas: energy::measure_areas(&converged_cluster)
            .map_err(|e| anyhow!("{e}"))?
            .into_iter()
            .map(|(rid, a)| (label_of(rid), a))
            .collect(),
        perimeter: last.perimeter,
        residual_norm: last.residual_norm,
        converged: last.converged,
        stagnated,
        iterations: log.stages.iter().map(|s| s.iterations).sum(),
        accepted_steps: log.accepted_steps,
        transitions: log.stages.iter().flat_map(|s| s.transitions.clone()).collect(),
        stages: log
            .stages
            .iter()
            .map(|s| StageRecord {
                p: s.p,
                perimeter: s.perimeter,
                residual_norm: s.residual_norm,
                converged: s.converged,
                iterations: s.iterations,
                central_edge_length: s.central_edge_length,
                origin_valence4: s.origin_valence4,
                transitions: s.transitions.clone(),
            })
            .collect(),
        checks,
    };
    crate::summary::write_summary(&out_dir.join("summary.json"), &summary)?;
    Ok(ExperimentOutcome { summary, out_dir })
}
