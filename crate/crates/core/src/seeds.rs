//! Initial configurations.
//!
//! The double bubble is the exact standard construction: two circles whose
//! centers sit at distance L = sqrt(r1^2 + r2^2 - r1 r2) (law of cosines
//! with a 60-degree angle), which forces all three arcs to meet at 120
//! degrees. The middle interface is the straight chord for equal radii and
//! otherwise the arc of radius 1/|1/r1 - 1/r2| through the two intersection
//! points, bulging into the larger lobe.
//!
//! The triple, quadruple and chain seeds are coarse polygonal templates of
//! the right combinatorial type; the constraint projector and the evolver
//! do the rest.

use std::f64::consts::{PI, TAU};

use crate::cluster::{Cluster, RegionId, RegionRef, VertexId};
use crate::energy;
use crate::geom::{DensityField, Point};

/// Default number of segments per arc before evolver refinement.
pub const DEFAULT_SEGMENTS_PER_ARC: usize = 32;

const REGION_LABELS: [&str; 4] = ["a", "b", "c", "d"];

/// Parameters of the standard double bubble of Euclidean radii r1 and r2.
#[derive(Debug, Clone, Copy)]
pub struct DoubleBubbleSpec {
    pub r1: f64,
    pub r2: f64,
    pub segments_per_arc: usize,
}

impl DoubleBubbleSpec {
    pub fn new(r1: f64, r2: f64) -> DoubleBubbleSpec {
        assert!(r1 > 0.0 && r2 > 0.0, "radii must be positive");
        DoubleBubbleSpec {
            r1,
            r2,
            segments_per_arc: DEFAULT_SEGMENTS_PER_ARC,
        }
    }

    /// Distance between the two circle centers.
    pub fn center_distance(&self) -> f64 {
        (self.r1 * self.r1 + self.r2 * self.r2 - self.r1 * self.r2).sqrt()
    }

    /// Radius of the middle interface arc; `None` means a straight chord
    /// (equal radii).
    pub fn bulge_radius(&self) -> Option<f64> {
        if self.r1 == self.r2 {
            None
        } else {
            Some(1.0 / (1.0 / self.r1 - 1.0 / self.r2).abs())
        }
    }
}

/// Where to put the configuration relative to the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// One junction vertex exactly at the origin, pinned.
    VertexAtOrigin,
    /// The midpoint of the two circle centers at the origin; nothing pinned.
    CenterAtOrigin,
}

/// Inclusive arc samples from angle `a0` to `a1` (walked as given, so the
/// caller controls direction and winding).
fn arc_samples(center: Point, radius: f64, a0: f64, a1: f64, n: usize) -> Vec<Point> {
    (0..=n)
        .map(|k| {
            let t = a0 + (a1 - a0) * k as f64 / n as f64;
            center + Point::new(radius * t.cos(), radius * t.sin())
        })
        .collect()
}

/// Adds the chain `points[0] -> ... -> points[last]` as edges between the
/// existing end vertices, creating the interior vertices.
fn add_chain(
    cluster: &mut Cluster,
    start: VertexId,
    end: VertexId,
    points: &[Point],
    left: RegionRef,
    right: RegionRef,
) {
    let mut prev = start;
    for q in &points[1..points.len() - 1] {
        let v = cluster.add_vertex(*q, false);
        cluster.add_edge(prev, v, left, right);
        prev = v;
    }
    cluster.add_edge(prev, end, left, right);
}

/// The standard double bubble, discretized with `segments_per_arc` segments
/// per arc. Junction angles are 120 degrees by construction.
pub fn standard_double_bubble(
    spec: &DoubleBubbleSpec,
    placement: Placement,
    density: DensityField,
) -> Cluster {
    let (r1, r2) = (spec.r1, spec.r2);
    let n = spec.segments_per_arc.max(2);
    let length = spec.center_distance();
    let xi = (length * length + r1 * r1 - r2 * r2) / (2.0 * length);
    let yi = (r1 * r1 - xi * xi).sqrt();
    let i_plus = Point::new(xi, yi);
    let i_minus = Point::new(xi, -yi);
    let c1 = Point::ORIGIN;
    let c2 = Point::new(length, 0.0);

    let mut cluster = Cluster::new(density);
    let ra = RegionId(0);
    let rb = RegionId(1);
    cluster.add_region(ra, REGION_LABELS[0], 1.0);
    cluster.add_region(rb, REGION_LABELS[1], 1.0);
    let va = RegionRef::Region(ra);
    let vb = RegionRef::Region(rb);

    let v_plus = cluster.add_vertex(i_plus, false);
    let v_minus = cluster.add_vertex(i_minus, false);

    // Outer arc of lobe 1: counterclockwise the long way, i_plus -> i_minus.
    let theta1 = yi.atan2(xi);
    let arc1 = arc_samples(c1, r1, theta1, TAU - theta1, n);
    add_chain(&mut cluster, v_plus, v_minus, &arc1, va, RegionRef::Exterior);

    // Outer arc of lobe 2: counterclockwise through the rightmost point,
    // i_minus -> i_plus.
    let phi = yi.atan2(xi - length);
    let arc2 = arc_samples(c2, r2, -phi, phi, n);
    add_chain(&mut cluster, v_minus, v_plus, &arc2, vb, RegionRef::Exterior);

    // Middle interface, i_minus -> i_plus, lobe 1 on the left.
    match spec.bulge_radius() {
        None => {
            let pts: Vec<Point> = (0..=n)
                .map(|k| {
                    let t = k as f64 / n as f64;
                    Point::new(xi, -yi + 2.0 * yi * t)
                })
                .collect();
            add_chain(&mut cluster, v_minus, v_plus, &pts, va, vb);
        }
        Some(rho) => {
            // Center on the perpendicular bisector of the chord, on the far
            // side from the larger lobe so the interface bulges into it.
            let off = (rho * rho - yi * yi).sqrt();
            let xc = if r1 > r2 { xi + off } else { xi - off };
            let center = Point::new(xc, 0.0);
            let psi_plus = (yi).atan2(xi - xc);
            let psi_minus = (-yi).atan2(xi - xc);
            // Walk i_minus -> i_plus around the side away from the chord:
            // through angle pi when the center is right of the chord,
            // through angle 0 otherwise.
            let (a0, a1) = if r1 > r2 {
                (psi_minus, psi_plus - TAU)
            } else {
                (psi_minus, psi_plus)
            };
            let pts = arc_samples(center, rho, a0, a1, n);
            add_chain(&mut cluster, v_minus, v_plus, &pts, va, vb);
        }
    }

    match placement {
        Placement::VertexAtOrigin => {
            cluster.translate(-i_plus);
            cluster.set_position(v_plus, Point::ORIGIN);
            cluster.set_pinned(v_plus, true);
        }
        Placement::CenterAtOrigin => {
            cluster.translate((c1 + c2) * -0.5);
        }
    }

    let areas = energy::measure_areas(&cluster).expect("double bubble seed measures");
    for (rid, area) in areas {
        cluster.set_target_area(rid, area);
    }
    cluster
}

/// A regular polygon approximating a circle of the given weighted area.
pub fn circle_seed(area: f64, center: Point, density: DensityField, segments: usize) -> Cluster {
    assert!(area > 0.0, "area must be positive");
    let n = segments.max(8);
    let p = density.exponent();
    let mut radius = if center.norm() < 1e-9 {
        ((p + 2.0) * area / TAU).powf(1.0 / (p + 2.0))
    } else {
        let w = density.value(center).max(1e-12);
        (area / (PI * w)).sqrt()
    };

    let build = |radius: f64| -> Vec<Point> {
        (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                center + Point::new(radius * t.cos(), radius * t.sin())
            })
            .collect()
    };

    // A few multiplicative corrections get the polygon's weighted area close
    // to the target; exact matching is the constraint projector's job.
    let quad = crate::quadrature::QuadratureRule::default_rule();
    for _ in 0..12 {
        let pts = build(radius);
        let measured = crate::measure::loop_weighted_area(&pts, &density, &quad);
        if measured > 0.0 && (measured / area - 1.0).abs() < 1e-9 {
            break;
        }
        if measured > 0.0 {
            radius *= (area / measured).powf(1.0 / (p + 2.0));
        } else {
            radius *= 2.0;
        }
    }

    let mut cluster = Cluster::new(density);
    let rid = RegionId(0);
    cluster.add_region(rid, REGION_LABELS[0], area);
    let pts = build(radius);
    let first = cluster.add_vertex(pts[0], false);
    let mut prev = first;
    for q in &pts[1..] {
        let v = cluster.add_vertex(*q, false);
        cluster.add_edge(prev, v, RegionRef::Region(rid), RegionRef::Exterior);
        prev = v;
    }
    cluster.add_edge(prev, first, RegionRef::Region(rid), RegionRef::Exterior);
    cluster
}

/// Rescales the whole cluster about the origin so the total weighted area
/// matches the total target. Scaling by lambda multiplies every weighted
/// area by lambda^(p+2) exactly, so this fixes the overall size and leaves
/// only the per-region balance to the constraint projector. Pinned vertices
/// stay at the origin.
pub fn rescale_to_targets(cluster: &mut Cluster) {
    let measured = energy::measure_areas(cluster).expect("seed measures");
    let total_measured: f64 = measured.values().sum();
    let total_target: f64 = cluster.regions().map(|r| r.target_area).sum();
    if !(total_measured > 0.0) {
        return;
    }
    let p = cluster.density().exponent();
    let lambda = (total_target / total_measured).powf(1.0 / (p + 2.0));
    let ids: Vec<VertexId> = cluster.vertices().map(|v| v.id).collect();
    for id in ids {
        let pos = cluster.position(id);
        cluster.set_position(id, pos * lambda);
    }
}

/// Angular spans proportional to sqrt(area), floored so tiny lobes stay
/// workable, normalized to a full turn.
fn angular_spans(areas: &[f64], floor: f64) -> Vec<f64> {
    let weights: Vec<f64> = areas.iter().map(|a| a.sqrt()).collect();
    let total: f64 = weights.iter().sum();
    let mut spans: Vec<f64> = weights
        .iter()
        .map(|w| (TAU * w / total).max(floor))
        .collect();
    let s: f64 = spans.iter().sum();
    for span in &mut spans {
        *span *= TAU / s;
    }
    spans
}

/// Three lobes around a central junction pinned at the origin, with the
/// cluster hanging to one side: two long straight spokes, one short spoke,
/// circular outer arcs. This is the combinatorial type of the Euclidean
/// triple bubble, placed in the basin where all three interfaces meet at
/// the origin and the outer arcs meet near it.
///
/// `areas` are assigned clockwise starting from the upper lobe:
/// [upper, right, lower].
pub fn triple_seed(areas: [f64; 3], density: DensityField, segments: usize) -> Cluster {
    assert!(areas.iter().all(|a| *a > 0.0), "areas must be positive");
    let n = segments.max(4);
    let p = density.exponent();
    let total: f64 = areas.iter().sum();
    let radius = ((p + 2.0) * total / TAU).powf(1.0 / (p + 2.0));
    // The right lobe spans +-alpha about the +x axis; the short spoke points
    // along -x to a nearby junction.
    let alpha = (PI * areas[1] / total).clamp(0.5, 2.2);
    let short = 0.2 * radius;

    let mut cluster = Cluster::new(density);
    for (k, area) in areas.iter().enumerate() {
        cluster.add_region(RegionId(k as u64), REGION_LABELS[k], *area);
    }
    let upper = RegionRef::Region(RegionId(0));
    let right = RegionRef::Region(RegionId(1));
    let lower = RegionRef::Region(RegionId(2));

    let origin = cluster.add_vertex(Point::ORIGIN, true);
    let j_left = cluster.add_vertex(Point::new(-short, 0.0), false);
    let o_up = cluster.add_vertex(Point::new(radius * alpha.cos(), radius * alpha.sin()), false);
    let o_dn = cluster.add_vertex(Point::new(radius * alpha.cos(), -radius * alpha.sin()), false);

    let straight = |a: Point, b: Point, segs: usize| -> Vec<Point> {
        (0..=segs)
            .map(|k| a + (b - a) * (k as f64 / segs as f64))
            .collect()
    };
    let pos_up = cluster.position(o_up);
    let pos_dn = cluster.position(o_dn);
    let pos_left = cluster.position(j_left);

    // Spokes from the origin. Walking outward, the left side is the region
    // counterclockwise of the spoke direction.
    add_chain(
        &mut cluster,
        origin,
        j_left,
        &straight(Point::ORIGIN, pos_left, (n / 4).max(2)),
        lower,
        upper,
    );
    add_chain(
        &mut cluster,
        origin,
        o_up,
        &straight(Point::ORIGIN, pos_up, n / 2),
        upper,
        right,
    );
    add_chain(
        &mut cluster,
        origin,
        o_dn,
        &straight(Point::ORIGIN, pos_dn, n / 2),
        right,
        lower,
    );
    // Right lobe's outer arc, counterclockwise through the +x axis.
    add_chain(
        &mut cluster,
        o_dn,
        o_up,
        &arc_samples(Point::ORIGIN, radius, -alpha, alpha, n),
        right,
        RegionRef::Exterior,
    );
    // Upper lobe's outer arc: from the upper ring junction over the top-left
    // apex down to the short-spoke junction.
    let apex_angle = (alpha + PI) / 2.0;
    let apex_up = Point::new(radius * apex_angle.cos(), radius * apex_angle.sin());
    add_chain(
        &mut cluster,
        o_up,
        j_left,
        &arc_through(pos_up, apex_up, pos_left, n),
        upper,
        RegionRef::Exterior,
    );
    // Lower lobe's outer arc, mirror image.
    let apex_dn = Point::new(apex_up.x, -apex_up.y);
    add_chain(
        &mut cluster,
        j_left,
        o_dn,
        &arc_through(pos_left, apex_dn, pos_dn, n),
        lower,
        RegionRef::Exterior,
    );
    rescale_to_targets(&mut cluster);
    cluster
}

/// Four lobes around a central edge whose lower endpoint is pinned at the
/// origin. `areas` are assigned clockwise starting from the top lobe:
/// [top, right, bottom, left].
pub fn quadruple_seed(areas: [f64; 4], density: DensityField, segments: usize) -> Cluster {
    assert!(areas.iter().all(|a| *a > 0.0), "areas must be positive");
    let n = segments.max(4);
    let p = density.exponent();
    let total: f64 = areas.iter().sum();
    let radius = ((p + 2.0) * total / TAU).powf(1.0 / (p + 2.0));
    let height = 0.6 * radius;
    let ring_center = Point::new(0.0, height / 2.0);
    let spans = angular_spans(&areas, 0.3);
    let (span_top, span_right, span_bottom, span_left) = (spans[0], spans[1], spans[2], spans[3]);

    let mut cluster = Cluster::new(density);
    for (k, area) in areas.iter().enumerate() {
        cluster.add_region(RegionId(k as u64), REGION_LABELS[k], *area);
    }
    let top_r = RegionRef::Region(RegionId(0));
    let right_r = RegionRef::Region(RegionId(1));
    let bottom_r = RegionRef::Region(RegionId(2));
    let left_r = RegionRef::Region(RegionId(3));

    let b = cluster.add_vertex(Point::ORIGIN, true);
    let t = cluster.add_vertex(Point::new(0.0, height), false);

    // Ring junction angles (counterclockwise positions on the ring).
    let a_ne = PI / 2.0 - span_top / 2.0;
    let a_nw = PI / 2.0 + span_top / 2.0;
    let a_sw = a_nw + span_left;
    let a_se = a_sw + span_bottom;
    debug_assert!((a_se + span_right - (a_ne + TAU)).abs() < 1e-9);
    let ring = |a: f64| ring_center + Point::new(radius * a.cos(), radius * a.sin());
    let j_ne = cluster.add_vertex(ring(a_ne), false);
    let j_nw = cluster.add_vertex(ring(a_nw), false);
    let j_sw = cluster.add_vertex(ring(a_sw), false);
    let j_se = cluster.add_vertex(ring(a_se), false);

    let straight = |a: Point, b: Point, n: usize| -> Vec<Point> {
        (0..=n)
            .map(|k| a + (b - a) * (k as f64 / n as f64))
            .collect()
    };

    let pos_t = cluster.position(t);
    let pos_ne = cluster.position(j_ne);
    let pos_nw = cluster.position(j_nw);
    let pos_sw = cluster.position(j_sw);
    let pos_se = cluster.position(j_se);

    // Central edge, bottom -> top: left lobe to the west, right lobe east.
    add_chain(
        &mut cluster,
        b,
        t,
        &straight(Point::ORIGIN, pos_t, n / 2),
        left_r,
        right_r,
    );
    // Spokes from the top junction.
    add_chain(&mut cluster, t, j_ne, &straight(pos_t, pos_ne, n / 2), top_r, right_r);
    add_chain(&mut cluster, t, j_nw, &straight(pos_t, pos_nw, n / 2), left_r, top_r);
    // Spokes from the bottom junction.
    add_chain(
        &mut cluster,
        b,
        j_sw,
        &straight(Point::ORIGIN, pos_sw, n / 2),
        bottom_r,
        left_r,
    );
    add_chain(
        &mut cluster,
        b,
        j_se,
        &straight(Point::ORIGIN, pos_se, n / 2),
        right_r,
        bottom_r,
    );
    // Outer arcs, counterclockwise around the ring.
    add_chain(
        &mut cluster,
        j_ne,
        j_nw,
        &arc_samples(ring_center, radius, a_ne, a_nw, n),
        top_r,
        RegionRef::Exterior,
    );
    add_chain(
        &mut cluster,
        j_nw,
        j_sw,
        &arc_samples(ring_center, radius, a_nw, a_sw, n),
        left_r,
        RegionRef::Exterior,
    );
    add_chain(
        &mut cluster,
        j_sw,
        j_se,
        &arc_samples(ring_center, radius, a_sw, a_se, n),
        bottom_r,
        RegionRef::Exterior,
    );
    add_chain(
        &mut cluster,
        j_se,
        j_ne,
        &arc_samples(ring_center, radius, a_se, a_ne + TAU, n),
        right_r,
        RegionRef::Exterior,
    );
    rescale_to_targets(&mut cluster);
    cluster
}

/// Circumcircle of three points; the points must not be collinear.
fn circumcircle(p1: Point, p2: Point, p3: Point) -> (Point, f64) {
    let d = 2.0 * (p1.x * (p2.y - p3.y) + p2.x * (p3.y - p1.y) + p3.x * (p1.y - p2.y));
    let s1 = p1.norm_sq();
    let s2 = p2.norm_sq();
    let s3 = p3.norm_sq();
    let ux = (s1 * (p2.y - p3.y) + s2 * (p3.y - p1.y) + s3 * (p1.y - p2.y)) / d;
    let uy = (s1 * (p3.x - p2.x) + s2 * (p1.x - p3.x) + s3 * (p2.x - p1.x)) / d;
    let center = Point::new(ux, uy);
    (center, center.dist(p1))
}

/// Arc samples from `from` to `to` passing through `via`, on the
/// circumcircle of the three points.
fn arc_through(from: Point, via: Point, to: Point, n: usize) -> Vec<Point> {
    let (center, radius) = circumcircle(from, via, to);
    let a0 = (from - center).angle();
    let mut a_via = (via - center).angle();
    let mut a1 = (to - center).angle();
    // Unwrap so the walk passes a_via between a0 and a1.
    let dir = if (via - from).cross(to - via) >= 0.0 { 1.0 } else { -1.0 };
    while dir * (a_via - a0) <= 0.0 {
        a_via += dir * TAU;
    }
    while dir * (a1 - a_via) <= 0.0 {
        a1 += dir * TAU;
    }
    arc_samples(center, radius, a0, a1, n)
}

/// Bubbles in a row sharing straight vertical interfaces; the leftmost
/// vertex sits at the origin (unpinned).
pub fn chain_seed(areas: &[f64], density: DensityField, segments: usize) -> Cluster {
    assert!(areas.len() >= 2, "a chain needs at least two areas");
    assert!(areas.iter().all(|a| *a > 0.0), "areas must be positive");
    let n = segments.max(4);
    let count = areas.len();

    // Euclidean radii sized so each bubble's weighted area approximates its
    // target given where it lands along the row: pi rho^2 * f(center) ~ A.
    let mut radii: Vec<f64> = areas.iter().map(|a| (a / PI).sqrt()).collect();
    for _ in 0..30 {
        let mut centers = Vec::with_capacity(count);
        let mut x = 0.0;
        for rho in &radii {
            centers.push(x + rho);
            x += 2.0 * rho;
        }
        for k in 0..count {
            let r_eff = centers[k].max(0.8 * radii[k]);
            let w = density.value_rsq(r_eff * r_eff).max(1e-12);
            radii[k] = (areas[k] / (PI * w)).sqrt();
        }
    }
    let mut centers = Vec::with_capacity(count);
    let mut x = 0.0;
    for rho in &radii {
        centers.push(x + rho);
        x += 2.0 * rho;
    }

    let mut cluster = Cluster::new(density);
    for (k, area) in areas.iter().enumerate() {
        let label = REGION_LABELS
            .get(k)
            .map(|s| s.to_string())
            .unwrap_or_else(|| format!("r{k}"));
        cluster.add_region(RegionId(k as u64), label, *area);
    }
    let region = |k: usize| RegionRef::Region(RegionId(k as u64));

    // Interface k between bubble k and k+1, with its junction pair.
    let mut tops = Vec::new();
    let mut bots = Vec::new();
    for k in 0..count - 1 {
        let xi = centers[k] + radii[k];
        let h = 0.7 * radii[k].min(radii[k + 1]);
        tops.push(cluster.add_vertex(Point::new(xi, h), false));
        bots.push(cluster.add_vertex(Point::new(xi, -h), false));
    }
    for k in 0..count - 1 {
        let bot = cluster.position(bots[k]);
        let top = cluster.position(tops[k]);
        let pts: Vec<Point> = (0..=n / 2)
            .map(|i| bot + (top - bot) * (i as f64 / (n / 2) as f64))
            .collect();
        // Walking upward, bubble k is on the left.
        add_chain(&mut cluster, bots[k], tops[k], &pts, region(k), region(k + 1));
    }

    // Left cap: top_0 over the west side to bot_0, bubble 0 on the left.
    {
        let west = Point::new(centers[0] - radii[0], 0.0);
        let pts = arc_through(cluster.position(tops[0]), west, cluster.position(bots[0]), n);
        add_chain(&mut cluster, tops[0], bots[0], &pts, region(0), RegionRef::Exterior);
    }
    // Right cap: bot_last over the east side to top_last.
    {
        let last = count - 1;
        let east = Point::new(centers[last] + radii[last], 0.0);
        let pts = arc_through(
            cluster.position(bots[last - 1]),
            east,
            cluster.position(tops[last - 1]),
            n,
        );
        add_chain(
            &mut cluster,
            bots[last - 1],
            tops[last - 1],
            &pts,
            region(last),
            RegionRef::Exterior,
        );
    }
    // Middle bubbles: upper and lower outer arcs.
    for k in 1..count - 1 {
        let apex_up = Point::new(centers[k], radii[k]);
        let apex_dn = Point::new(centers[k], -radii[k]);
        // Upper arc stored west -> east: bubble below, so it is on the right.
        let pts_up = arc_through(
            cluster.position(tops[k - 1]),
            apex_up,
            cluster.position(tops[k]),
            n,
        );
        add_chain(
            &mut cluster,
            tops[k - 1],
            tops[k],
            &pts_up,
            RegionRef::Exterior,
            region(k),
        );
        // Lower arc stored west -> east: bubble above, on the left.
        let pts_dn = arc_through(
            cluster.position(bots[k - 1]),
            apex_dn,
            cluster.position(bots[k]),
            n,
        );
        add_chain(
            &mut cluster,
            bots[k - 1],
            bots[k],
            &pts_dn,
            region(k),
            RegionRef::Exterior,
        );
    }

    // Put the leftmost vertex at the origin, then fix the overall scale.
    let west_x = cluster
        .vertices()
        .map(|v| v.pos.x)
        .fold(f64::INFINITY, f64::min);
    cluster.translate(Point::new(-west_x, 0.0));
    rescale_to_targets(&mut cluster);
    cluster
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyze;
    use crate::energy::{measure_areas, project_to_constraints};
    use approx::assert_relative_eq;

    fn p2() -> DensityField {
        DensityField::new(2.0).unwrap()
    }

    #[test]
    fn double_bubble_derived_quantities() {
        let equal = DoubleBubbleSpec::new(1.0, 1.0);
        assert_relative_eq!(equal.center_distance(), 1.0, epsilon = 1e-15);
        assert!(equal.bulge_radius().is_none());

        let unequal = DoubleBubbleSpec::new(2.0, 1.0);
        assert_relative_eq!(unequal.center_distance(), 3.0_f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(unequal.bulge_radius().unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn double_bubble_junctions_are_120_degrees() {
        // The law-of-cosines construction forces 120-degree junctions for
        // any radii; check a spread of random pairs at seed resolution.
        let mut rng_state = 0x243f6a8885a308d3u64;
        let mut next = move || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            0.2 + 3.0 * ((rng_state >> 11) as f64 / (1u64 << 53) as f64)
        };
        for _ in 0..50 {
            let spec = DoubleBubbleSpec::new(next(), next());
            let c = standard_double_bubble(&spec, Placement::CenterAtOrigin, p2());
            for (_, angles) in analyze::junction_angles(&c) {
                for a in angles {
                    assert!((a - 120.0).abs() < 1e-9, "angle {a} for {spec:?}");
                }
            }
        }
    }

    #[test]
    fn double_bubble_interface_bulges_into_larger_lobe() {
        let mut rng_state = 0x13198a2e03707344u64;
        let mut next = move || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            0.3 + 2.0 * ((rng_state >> 11) as f64 / (1u64 << 53) as f64)
        };
        for _ in 0..50 {
            let (r1, r2) = (next(), next());
            if (r1 - r2).abs() < 1e-3 {
                continue;
            }
            let spec = DoubleBubbleSpec::new(r1, r2);
            let c = standard_double_bubble(&spec, Placement::CenterAtOrigin, DensityField::euclidean());
            // The interface arc's midpoint deviates from the chord toward
            // the larger lobe (the chord is vertical; larger lobe 1 means
            // bulging toward -x in construction coordinates).
            let arcs = c.extract_arcs();
            let interface = arcs
                .iter()
                .find(|a| !a.left.is_exterior() && !a.right.is_exterior())
                .unwrap();
            let pts = c.arc_positions(interface);
            let chord_x = (pts[0].x + pts.last().unwrap().x) / 2.0;
            let mid_x = pts[pts.len() / 2].x;
            if r1 > r2 {
                assert!(mid_x < chord_x, "r1={r1} r2={r2}");
            } else {
                assert!(mid_x > chord_x, "r1={r1} r2={r2}");
            }
        }
    }

    #[test]
    fn double_bubble_shares_junction_vertices_exactly() {
        let c = standard_double_bubble(&DoubleBubbleSpec::new(2.0, 1.0), Placement::VertexAtOrigin, p2());
        let arcs = c.extract_arcs();
        assert_eq!(arcs.len(), 3);
        // All three arcs end at the same two junction vertex ids.
        let mut endpoints: Vec<(VertexId, VertexId)> = arcs
            .iter()
            .map(|a| {
                let mut pair = (a.vertices[0], *a.vertices.last().unwrap());
                if pair.1 < pair.0 {
                    pair = (pair.1, pair.0);
                }
                pair
            })
            .collect();
        endpoints.dedup();
        assert_eq!(endpoints.len(), 1);
    }

    #[test]
    fn seeds_validate_and_project_to_targets() {
        let seeds: Vec<(&str, Cluster)> = vec![
            ("double", {
                let mut c = standard_double_bubble(&DoubleBubbleSpec::new(1.0, 1.0), Placement::VertexAtOrigin, p2());
                for rid in c.regions().map(|r| r.id).collect::<Vec<_>>() {
                    c.set_target_area(rid, 1.0);
                }
                c
            }),
            ("triple", triple_seed([10.0, 10.0, 10.0], p2(), 16)),
            ("quadruple", quadruple_seed([3.0, 3.0, 3.0, 3.0], p2(), 16)),
            ("quad-unequal", quadruple_seed([30.0, 30.0, 1.0, 1.0], p2(), 16)),
            ("chain", chain_seed(&[10.0, 10.0, 10.0], p2(), 16)),
            ("circle", circle_seed(std::f64::consts::FRAC_PI_2, Point::new(1.5, 0.5), p2(), 32)),
        ];
        for (name, mut c) in seeds {
            assert!(c.validate().is_empty(), "{name} seed invalid");
            project_to_constraints(&mut c, 80).unwrap_or_else(|e| panic!("{name}: {e}"));
            let areas = measure_areas(&c).unwrap();
            for (rid, area) in areas {
                let target = c.region(rid).unwrap().target_area;
                assert!(
                    ((area - target) / target).abs() <= 1e-9,
                    "{name} region {rid}: {area} vs {target}"
                );
            }
        }
    }

    #[test]
    fn chain_of_two_is_a_crude_double_bubble() {
        let c = chain_seed(&[4.0, 4.0], DensityField::euclidean(), 16);
        assert!(c.validate().is_empty());
        assert_eq!(c.region_count(), 2);
        assert_eq!(c.extract_arcs().len(), 3);
    }

    #[test]
    fn equal_chain_is_mirror_symmetric() {
        let c = chain_seed(&[10.0; 3], p2(), 16);
        let positions: Vec<Point> = c.vertices().map(|v| v.pos).collect();
        for p in &positions {
            let mirrored = Point::new(p.x, -p.y);
            let best = positions.iter().map(|q| q.dist(mirrored)).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9);
        }
    }

    #[test]
    fn euclidean_circle_seed_has_unit_radius() {
        let c = circle_seed(std::f64::consts::PI, Point::new(3.0, -1.0), DensityField::euclidean(), 128);
        for v in c.vertices() {
            assert_relative_eq!(v.pos.dist(Point::new(3.0, -1.0)), 1.0, max_relative = 1e-2);
        }
    }

    #[test]
    fn offset_circle_seed_matches_polar_oracle() {
        // Weighted area of the unit disk centered at (1, 0) under r^2:
        // expand |x|^2 = |u|^2 + 2 u.c + |c|^2 over the centered disk:
        // pi/2 + 0 + pi = 3 pi / 2. A seed asked for that area at that
        // center comes out with unit radius.
        let target = 1.5 * std::f64::consts::PI;
        let c = circle_seed(target, Point::new(1.0, 0.0), p2(), 256);
        for v in c.vertices() {
            assert_relative_eq!(v.pos.dist(Point::new(1.0, 0.0)), 1.0, max_relative = 1e-3);
        }
    }

    #[test]
    fn quadruple_seed_structure() {
        let c = quadruple_seed([1.0, 2.0, 4.0, 3.0], p2(), 16);
        assert!(c.validate().is_empty());
        assert_eq!(c.extract_arcs().len(), 9);
        assert_eq!(analyze::central_arcs(&c).len(), 1);
        // One pinned vertex at the origin: a central-edge endpoint.
        let pinned: Vec<_> = c.vertices().filter(|v| v.pinned).collect();
        assert_eq!(pinned.len(), 1);
        assert_eq!(pinned[0].pos, Point::ORIGIN);
    }

    #[test]
    fn rescale_hits_total_target() {
        let mut c = quadruple_seed([30.0, 30.0, 1.0, 1.0], p2(), 16);
        rescale_to_targets(&mut c);
        let areas = measure_areas(&c).unwrap();
        let total: f64 = areas.values().sum();
        let want: f64 = c.regions().map(|r| r.target_area).sum();
        assert_relative_eq!(total, want, max_relative = 1e-9);
    }
}
