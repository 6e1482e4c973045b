//! Post-convergence verification: junction angle spectra, per-arc circle
//! fits and through-origin residuals, generalized-curvature constancy, and
//! perimeter comparisons between runs.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::circle::{fit_circle, CircleFit};
use crate::cluster::{Arc, Cluster, RegionId, VertexId};
use crate::curvature::{generalized_curvature_samples, mean_std, NormalSide};
use crate::energy::{self, EnergyError};
use crate::geom::{GeomError, Point};

/// Default tolerance on the 120-degree junction condition, in degrees.
pub const ANGLE_TOL_DEG: f64 = 0.5;

/// Default bound on the curvature constancy defect (std / |mean|).
pub const CURVATURE_DEFECT_TOL: f64 = 1e-2;

/// Relative circle-fit residual below which an arc counts as circular.
pub const CIRCULAR_RMS_REL: f64 = 1e-3;

/// Through-origin residual below which a circular arc counts as passing
/// through the origin.
pub const THROUGH_ORIGIN_TOL: f64 = 1e-2;

/// Extrapolated tangent directions (radians) of the arcs leaving each
/// junction vertex. On an exact circular arc with uniform angular sampling,
/// chord directions are linear in arc position, so the two-chord
/// extrapolation (3 a1 - a2) / 2 recovers the tangent exactly.
pub fn junction_tangents(cluster: &Cluster) -> BTreeMap<VertexId, Vec<f64>> {
    let valences = cluster.valences();
    let mut out: BTreeMap<VertexId, Vec<f64>> = BTreeMap::new();
    for arc in cluster.extract_arcs() {
        if arc.closed {
            continue;
        }
        let pts = cluster.arc_positions(&arc);
        for (junction, ordered) in [
            (arc.vertices[0], pts.clone()),
            (*arc.vertices.last().unwrap(), {
                let mut rev = pts.clone();
                rev.reverse();
                rev
            }),
        ] {
            if valences.get(&junction).copied().unwrap_or(0) < 3 {
                continue;
            }
            out.entry(junction).or_default().push(tangent_angle(&ordered));
        }
    }
    out
}

fn tangent_angle(pts: &[Point]) -> f64 {
    let a1 = (pts[1] - pts[0]).angle();
    if pts.len() < 3 {
        return a1;
    }
    let mut a2 = (pts[2] - pts[1]).angle();
    // Unwrap a2 next to a1.
    while a2 - a1 > std::f64::consts::PI {
        a2 -= TAU;
    }
    while a1 - a2 > std::f64::consts::PI {
        a2 += TAU;
    }
    (3.0 * a1 - a2) / 2.0
}

/// Angles (degrees) between consecutive incident arc tangents at each
/// junction, sorted cyclically. The angles at a junction sum to 360.
pub fn junction_angles(cluster: &Cluster) -> BTreeMap<VertexId, Vec<f64>> {
    junction_tangents(cluster)
        .into_iter()
        .map(|(v, mut tangents)| {
            tangents.sort_by(f64::total_cmp);
            let n = tangents.len();
            let gaps: Vec<f64> = (0..n)
                .map(|i| {
                    let next = if i + 1 == n {
                        tangents[0] + TAU
                    } else {
                        tangents[i + 1]
                    };
                    (next - tangents[i]).to_degrees()
                })
                .collect();
            (v, gaps)
        })
        .collect()
}

/// How an arc's fitted geometry relates to the regularity conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ArcClass {
    /// Circular within tolerance and the circle passes through the origin.
    CircularThroughOrigin,
    /// Circular within tolerance but away from the origin.
    Circular,
    /// Collinear samples: a straight segment.
    Straight,
    /// Not circular within tolerance.
    Irregular,
    /// Too few samples to analyze; the caller should refine.
    Insufficient,
}

/// Samples within this many local spacings of the origin are excluded from
/// the curvature-constancy statistic: the normal-derivative term p(x.N)/r^2
/// amplifies discretization error without bound as r -> 0, and the origin is
/// precisely where the density vanishes and regularity admits an exception.
pub const KAPPA_ORIGIN_SKIP_SPACINGS: f64 = 4.0;

/// Arcs whose farthest point stays within this fraction of the cluster
/// diameter from the origin count as origin-local: the persistent tiny
/// edges next to the origin live entirely inside the exceptional zone.
pub const ORIGIN_LOCAL_REL: f64 = 0.03;

/// Regularity diagnostics of one arc.
#[derive(Debug, Clone, Serialize)]
pub struct ArcReport {
    pub left: String,
    pub right: String,
    pub vertex_count: usize,
    pub class: ArcClass,
    pub fit: Option<CircleFit>,
    /// Generalized curvature statistics; the inward normal points into the
    /// region on the arc's left. Samples in the origin's ill-conditioned
    /// neighbourhood are excluded (see [`KAPPA_ORIGIN_SKIP_SPACINGS`]).
    pub kappa_mean: f64,
    pub kappa_std: f64,
    /// std / max(|mean|, 1/diameter): the constancy defect with curvature
    /// floored at the cluster scale so straight arcs do not divide by zero.
    pub constancy_defect: f64,
    /// Samples used by the statistics / samples available.
    pub kappa_samples_used: usize,
    pub kappa_samples_total: usize,
    /// The whole arc lies inside the origin's exceptional neighbourhood
    /// (where the density vanishes and the curvature estimate is
    /// ill-conditioned); constancy is reported but not enforced there.
    pub origin_local: bool,
    pub closed: bool,
}

/// Per-arc circle fits and generalized-curvature constancy.
pub fn arc_regularity(cluster: &Cluster) -> Vec<ArcReport> {
    let density = cluster.density();
    let diameter = cluster.diameter().max(1e-300);
    let mut out = Vec::new();
    for arc in cluster.extract_arcs() {
        let pts = cluster.arc_positions(&arc);
        let (fit_pts, kappa_pts): (Vec<Point>, Vec<Point>) = if arc.closed {
            let mut ext = Vec::with_capacity(pts.len() + 2);
            ext.push(*pts.last().unwrap());
            ext.extend_from_slice(&pts);
            ext.push(pts[0]);
            (pts.clone(), ext)
        } else {
            (pts.clone(), pts.clone())
        };

        let mut report = ArcReport {
            left: arc.left.to_string(),
            right: arc.right.to_string(),
            vertex_count: arc.vertices.len(),
            class: ArcClass::Insufficient,
            fit: None,
            kappa_mean: 0.0,
            kappa_std: 0.0,
            constancy_defect: 0.0,
            kappa_samples_used: 0,
            kappa_samples_total: 0,
            origin_local: pts
                .iter()
                .map(|q| q.norm())
                .fold(0.0_f64, f64::max)
                < ORIGIN_LOCAL_REL * diameter,
            closed: arc.closed,
        };
        if fit_pts.len() < 5 {
            out.push(report);
            continue;
        }

        match generalized_curvature_samples(&kappa_pts, NormalSide::Left, &density) {
            Ok(kappas) if !kappas.is_empty() => {
                // Positions and local spacings of the estimator's samples,
                // replicating its own origin-skip rule so the lists align.
                let interior: Vec<(Point, f64)> = kappa_pts
                    .windows(3)
                    .map(|w| (w[1], 0.5 * (w[0].dist(w[1]) + w[1].dist(w[2]))))
                    .filter(|(q, _)| q.norm() > crate::geom::ORIGIN_EPS)
                    .collect();
                debug_assert_eq!(interior.len(), kappas.len());
                let kept: Vec<f64> = kappas
                    .iter()
                    .zip(interior.iter())
                    .filter(|(_, (q, local))| q.norm() >= KAPPA_ORIGIN_SKIP_SPACINGS * local)
                    .map(|(k, _)| *k)
                    .collect();
                report.kappa_samples_total = kappas.len();
                let stats_over = if kept.len() >= 3 { &kept } else { &kappas };
                report.kappa_samples_used = stats_over.len();
                let (mean, std) = mean_std(stats_over);
                report.kappa_mean = mean;
                report.kappa_std = std;
                report.constancy_defect = std / mean.abs().max(1.0 / diameter);
            }
            _ => {}
        }

        match fit_circle(&fit_pts) {
            Ok(fit) => {
                let circular = fit.rms_residual / fit.radius < CIRCULAR_RMS_REL;
                report.class = if circular && fit.through_origin_residual < THROUGH_ORIGIN_TOL {
                    ArcClass::CircularThroughOrigin
                } else if circular {
                    ArcClass::Circular
                } else {
                    ArcClass::Irregular
                };
                report.fit = Some(fit);
            }
            Err(GeomError::Collinear) => {
                report.class = ArcClass::Straight;
            }
            Err(_) => {
                report.class = ArcClass::Insufficient;
            }
        }
        out.push(report);
    }
    out
}

/// One junction's angle spectrum in the report.
#[derive(Debug, Clone, Serialize)]
pub struct JunctionReport {
    pub vertex: u64,
    pub angles_deg: Vec<f64>,
    /// Junctions at the origin are exempt from the 120-degree condition
    /// (the density vanishes there).
    pub origin_exempt: bool,
    pub max_deviation_deg: f64,
}

/// The full post-convergence verification document.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub junctions: Vec<JunctionReport>,
    /// Junctions (non-exempt) with an angle off 120 degrees beyond tolerance.
    pub angle_violations: Vec<u64>,
    pub angle_tolerance_deg: f64,
    pub arcs: Vec<ArcReport>,
    pub perimeter: f64,
    pub areas: BTreeMap<String, f64>,
    pub residual_norm: f64,
}

impl RegularityReport {
    pub fn passes(&self, defect_tol: f64) -> bool {
        self.angle_violations.is_empty()
            && self
                .arcs
                .iter()
                .filter(|a| {
                    a.class != ArcClass::Insufficient && a.vertex_count >= 5 && !a.origin_local
                })
                .all(|a| a.constancy_defect < defect_tol)
    }

    /// Flat fixed-width table for diffing.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "perimeter {:.12e}\nresidual  {:.6e}\n",
            self.perimeter, self.residual_norm
        ));
        for (label, area) in &self.areas {
            out.push_str(&format!("area {label:<10} {area:.12e}\n"));
        }
        for j in &self.junctions {
            out.push_str(&format!(
                "junction v{:<6} {} dev={:8.4} deg {}\n",
                j.vertex,
                j.angles_deg
                    .iter()
                    .map(|a| format!("{a:8.3}"))
                    .collect::<Vec<_>>()
                    .join(" "),
                j.max_deviation_deg,
                if j.origin_exempt { "(origin-exempt)" } else { "" }
            ));
        }
        for (i, a) in self.arcs.iter().enumerate() {
            let fit = a
                .fit
                .map(|f| {
                    format!(
                        "R={:-10.6} rms/R={:-9.3e} origin_resid={:-9.3e}",
                        f.radius,
                        f.rms_residual / f.radius,
                        f.through_origin_residual
                    )
                })
                .unwrap_or_else(|| "no fit".to_string());
            out.push_str(&format!(
                "arc {i:<3} {:<9}|{:<9} n={:<5} {:?}{} kappa={:-10.6} defect={:-9.3e} {fit}\n",
                a.left,
                a.right,
                a.vertex_count,
                a.class,
                if a.closed { " closed" } else { "" },
                a.kappa_mean,
                a.constancy_defect
            ));
        }
        out
    }
}

/// Builds the regularity report for a (typically converged) cluster.
pub fn regularity_report(
    cluster: &Cluster,
    angle_tolerance_deg: f64,
) -> Result<RegularityReport, EnergyError> {
    let pg = energy::projected_gradient(cluster)?;
    let eps = cluster.epsilon_origin();
    let mut junctions = Vec::new();
    let mut violations = Vec::new();
    for (v, angles) in junction_angles(cluster) {
        let origin_exempt = cluster.position(v).norm() <= eps;
        let max_dev = angles
            .iter()
            .map(|a| (a - 120.0).abs())
            .fold(0.0_f64, f64::max);
        if !origin_exempt && max_dev > angle_tolerance_deg {
            violations.push(v.0);
        }
        junctions.push(JunctionReport {
            vertex: v.0,
            angles_deg: angles,
            origin_exempt,
            max_deviation_deg: max_dev,
        });
    }
    let areas = pg
        .energy
        .areas
        .iter()
        .map(|(rid, a)| (cluster.region(*rid).unwrap().label.clone(), *a))
        .collect();
    Ok(RegularityReport {
        junctions,
        angle_violations: violations,
        angle_tolerance_deg,
        arcs: arc_regularity(cluster),
        perimeter: pg.energy.perimeter,
        areas,
        residual_norm: pg.residual_norm,
    })
}

/// Arcs separating two interior regions whose endpoint junctions touch no
/// exterior boundary: the quadruple bubble's central edge is the one such
/// arc while it exists.
pub fn central_arcs(cluster: &Cluster) -> Vec<Arc> {
    let mut exterior_vertex: BTreeMap<VertexId, bool> = BTreeMap::new();
    for e in cluster.edges() {
        let touches = e.left.is_exterior() || e.right.is_exterior();
        *exterior_vertex.entry(e.tail).or_insert(false) |= touches;
        *exterior_vertex.entry(e.head).or_insert(false) |= touches;
    }
    cluster
        .extract_arcs()
        .into_iter()
        .filter(|arc| {
            !arc.closed
                && !arc.left.is_exterior()
                && !arc.right.is_exterior()
                && !exterior_vertex[&arc.vertices[0]]
                && !exterior_vertex[arc.vertices.last().unwrap()]
        })
        .collect()
}

/// Symmetric Hausdorff distance between the boundary polylines of two
/// clusters: max over one cluster's vertices of the distance to the other's
/// segments, both ways.
pub fn hausdorff_distance(a: &Cluster, b: &Cluster) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

fn directed_hausdorff(from: &Cluster, to: &Cluster) -> f64 {
    let segments: Vec<(Point, Point)> = to
        .edges()
        .map(|e| (to.position(e.tail), to.position(e.head)))
        .collect();
    let mut worst = 0.0_f64;
    for v in from.vertices() {
        let mut best = f64::INFINITY;
        for &(p, q) in &segments {
            best = best.min(point_segment_distance(v.pos, p, q));
            if best == 0.0 {
                break;
            }
        }
        worst = worst.max(best);
    }
    worst
}

fn point_segment_distance(x: Point, a: Point, b: Point) -> f64 {
    let d = b - a;
    let len_sq = d.norm_sq();
    if len_sq == 0.0 {
        return x.dist(a);
    }
    let t = ((x - a).dot(d) / len_sq).clamp(0.0, 1.0);
    x.dist(a + d * t)
}

/// A converged run, reduced to what perimeter comparison needs.
#[derive(Debug, Clone, Serialize)]
pub struct ComparableRun {
    pub name: String,
    pub exponent: f64,
    /// Target weighted areas (any order).
    pub target_areas: Vec<f64>,
    pub perimeter: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum CompareError {
    #[error("need at least two runs to compare")]
    TooFew,
    #[error("runs are incomparable: {0}")]
    Incomparable(String),
}

/// Pairwise perimeter comparison of runs sharing the density exponent and
/// the multiset of target areas.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub entries: Vec<(String, f64)>,
    /// (name_i, name_j, perimeter_i - perimeter_j) for i < j.
    pub differences: Vec<(String, String, f64)>,
    pub winner: String,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, perimeter) in &self.entries {
            writeln!(f, "{name:<32} perimeter {perimeter:.6}")?;
        }
        for (a, b, d) in &self.differences {
            writeln!(f, "{a} - {b} = {d:+.6}")?;
        }
        write!(f, "winner: {}", self.winner)
    }
}

/// Compares converged runs at fixed volumes; refuses mismatched areas or
/// exponents since the perimeter comparison is meaningless across them.
pub fn compare(runs: &[ComparableRun]) -> Result<Comparison, CompareError> {
    if runs.len() < 2 {
        return Err(CompareError::TooFew);
    }
    let first = &runs[0];
    let mut sorted_first = first.target_areas.clone();
    sorted_first.sort_by(f64::total_cmp);
    for run in &runs[1..] {
        if (run.exponent - first.exponent).abs() > 1e-12 {
            return Err(CompareError::Incomparable(format!(
                "density exponents differ: {} has p={}, {} has p={}",
                first.name, first.exponent, run.name, run.exponent
            )));
        }
        let mut sorted = run.target_areas.clone();
        sorted.sort_by(f64::total_cmp);
        let same_len = sorted.len() == sorted_first.len();
        let same = same_len
            && sorted
                .iter()
                .zip(&sorted_first)
                .all(|(a, b)| (a - b).abs() <= 1e-9 * b.abs().max(1.0));
        if !same {
            return Err(CompareError::Incomparable(format!(
                "target areas differ between {} and {}",
                first.name, run.name
            )));
        }
    }
    let entries: Vec<(String, f64)> = runs.iter().map(|r| (r.name.clone(), r.perimeter)).collect();
    let mut differences = Vec::new();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            differences.push((
                runs[i].name.clone(),
                runs[j].name.clone(),
                runs[i].perimeter - runs[j].perimeter,
            ));
        }
    }
    let winner = runs
        .iter()
        .min_by(|a, b| a.perimeter.total_cmp(&b.perimeter))
        .unwrap()
        .name
        .clone();
    Ok(Comparison {
        entries,
        differences,
        winner,
    })
}

/// Measured weighted areas keyed by region id, with their targets.
pub fn area_table(cluster: &Cluster) -> Result<BTreeMap<RegionId, (f64, f64)>, EnergyError> {
    let areas = energy::measure_areas(cluster)?;
    Ok(areas
        .into_iter()
        .map(|(rid, a)| (rid, (cluster.region(rid).unwrap().target_area, a)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::RegionRef;
    use crate::geom::DensityField;
    use crate::seeds::{circle_seed, standard_double_bubble, DoubleBubbleSpec, Placement};
    use approx::assert_relative_eq;

    fn p2() -> DensityField {
        DensityField::new(2.0).unwrap()
    }

    #[test]
    fn junction_angles_sum_to_full_turn() {
        let c = standard_double_bubble(&DoubleBubbleSpec::new(1.7, 0.8), Placement::VertexAtOrigin, p2());
        let angles = junction_angles(&c);
        assert_eq!(angles.len(), 2);
        for (_, gaps) in angles {
            let sum: f64 = gaps.iter().sum();
            assert!((sum - 360.0).abs() < 1e-9, "sum {sum}");
        }
    }

    #[test]
    fn bent_junction_is_reported() {
        let mut c = standard_double_bubble(&DoubleBubbleSpec::new(1.0, 1.0), Placement::VertexAtOrigin, p2());
        // Bend an interior vertex next to the junction that is away from
        // the origin (the origin junction is exempt from the angle check).
        let eps = c.epsilon_origin();
        let arcs = c.extract_arcs();
        let arc = arcs.iter().find(|a| a.vertices.len() > 3).unwrap();
        let v = if c.position(arc.vertices[0]).norm() > eps {
            arc.vertices[1]
        } else {
            arc.vertices[arc.vertices.len() - 2]
        };
        let pos = c.position(v);
        c.set_position(v, pos + Point::new(0.05, 0.05));
        let report = regularity_report(&c, 0.5).unwrap();
        assert!(!report.angle_violations.is_empty());
    }

    #[test]
    fn exact_circle_through_origin_is_classified() {
        // Polygon sampled exactly on the circle of radius 2 centered (2, 0).
        let c = exact_circle_cluster(2.0, 128);
        let arcs = arc_regularity(&c);
        assert_eq!(arcs.len(), 1);
        let a = &arcs[0];
        assert_eq!(a.class, ArcClass::CircularThroughOrigin);
        // kappa_f = (p + 2) / (2R) = 1 for p = 2, R = 2.
        assert_relative_eq!(a.kappa_mean, 1.0, max_relative = 1e-6);
        assert!(a.constancy_defect < 1e-6);
        assert!(a.fit.unwrap().through_origin_residual < 1e-9);
    }

    fn exact_circle_cluster(radius: f64, n: usize) -> Cluster {
        let mut c = Cluster::new(p2());
        c.add_region(crate::cluster::RegionId(0), "a", 1.0);
        let ids: Vec<_> = (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
                c.add_vertex(
                    Point::new(radius + radius * t.cos(), radius * t.sin()),
                    false,
                )
            })
            .collect();
        for k in 0..n {
            c.add_edge(
                ids[k],
                ids[(k + 1) % n],
                RegionRef::Region(crate::cluster::RegionId(0)),
                RegionRef::Exterior,
            );
        }
        c
    }

    #[test]
    fn circle_far_from_origin_is_circular_only() {
        let c = circle_seed(1.0, Point::new(6.0, 0.0), p2(), 64);
        let arcs = arc_regularity(&c);
        assert_eq!(arcs[0].class, ArcClass::Circular);
    }

    #[test]
    fn comparison_is_antisymmetric_and_picky() {
        let a = ComparableRun {
            name: "triple".into(),
            exponent: 2.0,
            target_areas: vec![10.0, 10.0, 10.0],
            perimeter: 63.3,
        };
        let b = ComparableRun {
            name: "chain".into(),
            exponent: 2.0,
            target_areas: vec![10.0, 10.0, 10.0],
            perimeter: 66.6,
        };
        let fwd = compare(&[a.clone(), b.clone()]).unwrap();
        let rev = compare(&[b.clone(), a.clone()]).unwrap();
        assert_eq!(fwd.winner, "triple");
        assert_eq!(rev.winner, "triple");
        let (_, _, d_fwd) = &fwd.differences[0];
        let (_, _, d_rev) = &rev.differences[0];
        assert_eq!(d_fwd.to_bits(), (-d_rev).to_bits());

        let mut different_p = a.clone();
        different_p.exponent = 0.5;
        assert!(matches!(
            compare(&[different_p, b.clone()]),
            Err(CompareError::Incomparable(_))
        ));
        let mut different_areas = a.clone();
        different_areas.target_areas = vec![10.0, 10.0, 20.0];
        assert!(matches!(
            compare(&[different_areas, b]),
            Err(CompareError::Incomparable(_))
        ));
        assert!(matches!(compare(&[a]), Err(CompareError::TooFew)));
    }

    #[test]
    fn hausdorff_distance_basics() {
        let a = circle_seed(1.0, Point::new(2.0, 0.0), p2(), 64);
        assert_eq!(hausdorff_distance(&a, &a), 0.0);
        let mut b = a.clone();
        b.translate(Point::new(0.25, 0.0));
        let d = hausdorff_distance(&a, &b);
        assert!(d <= 0.25 + 1e-12 && d > 0.2, "d = {d}");
    }

    #[test]
    fn central_arcs_identify_the_quadruple_edge() {
        let quad = crate::seeds::quadruple_seed([3.0; 4], p2(), 16);
        let central = central_arcs(&quad);
        assert_eq!(central.len(), 1);
        assert!(!central[0].left.is_exterior() && !central[0].right.is_exterior());

        let triple = crate::seeds::triple_seed([10.0; 3], p2(), 16);
        assert!(central_arcs(&triple).is_empty());
        let chain = crate::seeds::chain_seed(&[10.0; 3], p2(), 16);
        assert!(central_arcs(&chain).is_empty());
    }

    #[test]
    fn report_table_is_renderable() {
        let c = standard_double_bubble(&DoubleBubbleSpec::new(1.0, 1.0), Placement::VertexAtOrigin, p2());
        let report = regularity_report(&c, 0.5).unwrap();
        let table = report.to_table();
        assert!(table.contains("perimeter"));
        assert!(table.contains("junction"));
        assert!(table.contains("arc"));
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("angle_violations"));
    }
}
