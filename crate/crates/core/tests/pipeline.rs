//! Seed-to-convergence pipelines at desk scale: small meshes, loose
//! residuals, checking the qualitative equilibrium structure end to end.

use isocluster_core::analyze::{self, ArcClass};
use isocluster_core::energy::{self, project_to_constraints};
use isocluster_core::evolve::{run, step_with_hint, EvolveConfig, Schedule, Stage};
use isocluster_core::geom::{DensityField, Point};
use isocluster_core::seeds::{circle_seed, standard_double_bubble, DoubleBubbleSpec, Placement};

fn p2() -> DensityField {
    DensityField::new(2.0).unwrap()
}

fn mini_config(cluster: &isocluster_core::Cluster, p: f64) -> EvolveConfig {
    let d = cluster.diameter();
    let mut cfg = EvolveConfig::defaults_for(cluster, p);
    cfg.convergence_residual = 3e-6;
    cfg.refinement_levels = vec![d / 16.0, d / 64.0];
    cfg.max_iterations = 6000;
    cfg.resample_every = 10;
    cfg
}

/// A single weighted area pi/2 at p = 2 evolves from an off-origin circle
/// to a circle through the origin, with kappa_f = (p+2)/(2R) and the
/// Lagrange multiplier equal to that curvature.
#[test]
fn single_bubble_finds_the_circle_through_origin() {
    let mut seed = circle_seed(std::f64::consts::FRAC_PI_2, Point::new(1.5, 0.5), p2(), 32);
    project_to_constraints(&mut seed, 50).unwrap();
    let cfg = mini_config(&seed, 2.0);
    let schedule = Schedule {
        stages: vec![Stage { p: 2.0, config: cfg }],
    };
    let (out, log) = run(seed, &schedule).unwrap();
    let stage = &log.stages[0];

    // Weighted area pi/2 forces R = (1/3)^(1/4); perimeter 4 pi R^3.
    let r_theory = (1.0_f64 / 3.0).powf(0.25);
    let p_theory = 4.0 * std::f64::consts::PI * r_theory.powi(3);
    assert!(
        (stage.perimeter - p_theory).abs() / p_theory < 1e-3,
        "perimeter {} vs {}",
        stage.perimeter,
        p_theory
    );

    let arcs = analyze::arc_regularity(&out);
    assert_eq!(arcs.len(), 1);
    let arc = &arcs[0];
    assert_eq!(arc.class, ArcClass::CircularThroughOrigin);
    let fit = arc.fit.unwrap();
    assert!(fit.rms_residual / fit.radius < 1e-3);
    assert!(fit.through_origin_residual < 1e-2);
    assert!((fit.radius - r_theory).abs() / r_theory < 1e-2);
    assert!(arc.constancy_defect < 1e-2);

    // Multiplier = dP/dA = the generalized curvature (p+2)/(2R).
    let pg = energy::projected_gradient(&out).unwrap();
    let lambda = *pg.multipliers.values().next().unwrap();
    let kappa = (2.0 + 2.0) / (2.0 * fit.radius);
    assert!(
        (lambda - kappa).abs() / kappa < 1e-3,
        "lambda {lambda} vs kappa {kappa}"
    );
    assert!((lambda - arc.kappa_mean).abs() / arc.kappa_mean < 1e-3);
}

/// The free double bubble stays the analytic standard construction.
#[test]
fn double_bubble_matches_analytic_construction() {
    // Reference lobe area of the unit construction; targets of 1 give
    // r* = (1 / A(1))^(1/4) by the scaling law.
    let mut probe_spec = DoubleBubbleSpec::new(1.0, 1.0);
    probe_spec.segments_per_arc = 128;
    let probe = standard_double_bubble(&probe_spec, Placement::VertexAtOrigin, p2());
    let unit_area = *energy::measure_areas(&probe).unwrap().values().next().unwrap();
    let r_star = (1.0 / unit_area).powf(0.25);

    let mut spec = DoubleBubbleSpec::new(r_star, r_star);
    spec.segments_per_arc = 24;
    let mut seed = standard_double_bubble(&spec, Placement::VertexAtOrigin, p2());
    for rid in seed.regions().map(|r| r.id).collect::<Vec<_>>() {
        seed.set_target_area(rid, 1.0);
    }
    project_to_constraints(&mut seed, 80).unwrap();
    let cfg = mini_config(&seed, 2.0);
    let (out, log) = run(seed, &Schedule { stages: vec![Stage { p: 2.0, config: cfg }] }).unwrap();

    let mut ref_spec = DoubleBubbleSpec::new(r_star, r_star);
    ref_spec.segments_per_arc = 128;
    let reference = standard_double_bubble(&ref_spec, Placement::VertexAtOrigin, p2());
    let hd = analyze::hausdorff_distance(&out, &reference);
    assert!(
        hd / out.diameter() < 1e-2,
        "hausdorff {} on diameter {}",
        hd,
        out.diameter()
    );

    let report = analyze::regularity_report(&out, 0.5).unwrap();
    assert!(report.angle_violations.is_empty());
    assert!(report.passes(1e-2));
    assert!(log.stages[0].perimeter < 7.7);
}

/// Accepted descent steps never increase the perimeter.
#[test]
fn descent_is_monotone_across_accepted_steps() {
    let mut c = standard_double_bubble(&DoubleBubbleSpec::new(1.0, 0.8), Placement::VertexAtOrigin, p2());
    for rid in c.regions().map(|r| r.id).collect::<Vec<_>>() {
        let t = c.region(rid).unwrap().target_area;
        c.set_target_area(rid, t * 1.1);
    }
    project_to_constraints(&mut c, 80).unwrap();
    let mut cfg = mini_config(&c, 2.0);
    cfg.convergence_residual = 1e-7;
    let mut trial = cfg.initial_step;
    let mut ws = energy::Workspace::new();
    let mut last = f64::INFINITY;
    let mut accepted = 0;
    for _ in 0..400 {
        let r = step_with_hint(&mut c, &cfg, &mut trial, &mut ws).unwrap();
        if r.accepted_step == 0.0 {
            break;
        }
        assert!(r.perimeter_after <= r.perimeter_before);
        assert!(r.perimeter_after <= last + 1e-12);
        last = r.perimeter_after;
        accepted += 1;
    }
    assert!(accepted > 10);
}

/// Equilibrium regularity: every junction of the converged double bubble
/// meets at 120 degrees and every arc has constant generalized curvature.
#[test]
fn converged_double_bubble_is_regular() {
    let mut seed = standard_double_bubble(&DoubleBubbleSpec::new(1.0, 0.7), Placement::VertexAtOrigin, p2());
    project_to_constraints(&mut seed, 80).unwrap();
    let cfg = mini_config(&seed, 2.0);
    let (out, _) = run(seed, &Schedule { stages: vec![Stage { p: 2.0, config: cfg }] }).unwrap();
    let report = analyze::regularity_report(&out, 0.5).unwrap();
    assert!(report.angle_violations.is_empty(), "{:?}", report.to_table());
    assert!(report.passes(1e-2), "{}", report.to_table());
}
