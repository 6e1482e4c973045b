//! Weighted measures of straight segments and polygon loops.
//!
//! The weighted length of the segment a->b is
//!   L(a,b) = |b-a| * Int_0^1 f(a + t(b-a)) dt
//! and the signed weighted-area contribution of the directed segment is
//!   A(a,b) = cross(a,b)/(p+2) * Int_0^1 f(a + t(b-a)) dt,
//! obtained from the divergence theorem applied to F = f(x) * x / (p+2);
//! summing A over a counterclockwise closed polygon gives the region's
//! weighted area.
//!
//! Gradients differentiate the quadrature formula term by term, so they are
//! exact derivatives of the implemented functional rather than of the ideal
//! integral.

use crate::geom::{DensityField, GeomError, Point};
use crate::quadrature::QuadratureRule;

/// Fixed dyadic split of [0, 1] used for segments that pass close to the
/// origin. Refines toward both endpoints; all breakpoints are exact binary
/// fractions so the list mirrors onto itself bit-exactly under t -> 1 - t.
const DYADIC_SPLITS: [(f64, f64); 8] = [
    (0.0, 0.0625),
    (0.0625, 0.125),
    (0.125, 0.25),
    (0.25, 0.5),
    (0.5, 0.75),
    (0.75, 0.875),
    (0.875, 0.9375),
    (0.9375, 1.0),
];

const WHOLE: [(f64, f64); 1] = [(0.0, 1.0)];

/// Subintervals on which to apply the rule: the whole interval, or the
/// dyadic split when the segment's minimal distance to the origin is below
/// 0.2 x its length (the integrand's derivatives blow up mildly there for
/// fractional p, and a single order-16 pass loses its last digits).
fn splits_for(a: Point, b: Point) -> &'static [(f64, f64)] {
    let d = b - a;
    let len_sq = d.norm_sq();
    if len_sq == 0.0 {
        return &WHOLE;
    }
    let t = (-(a.dot(d)) / len_sq).clamp(0.0, 1.0);
    let nearest = a + d * t;
    if nearest.norm_sq() < 0.04 * len_sq {
        &DYADIC_SPLITS
    } else {
        &WHOLE
    }
}

/// One quadrature node of the composite rule, in segment coordinates.
/// The evaluation point is `c * a + s * b` with s + c = 1.
#[derive(Clone, Copy)]
struct SegNode {
    s: f64,
    c: f64,
    w: f64,
}

#[inline]
fn seg_node(splits: &[(f64, f64)], rule: &QuadratureRule, flat: usize) -> SegNode {
    let order = rule.order();
    let (alpha, beta) = splits[flat / order];
    let node = rule.nodes()[flat % order];
    let width = beta - alpha;
    SegNode {
        s: alpha + node.s * width,
        c: (1.0 - beta) + node.c * width,
        w: node.w * width,
    }
}

/// Sums `term` over all composite nodes, pairing node k with its mirror
/// node N-1-k from the two ends inward. Reversing the segment permutes the
/// node values by exactly this pairing, so the pairwise sums (and hence the
/// total) are bit-identical for both traversal directions.
fn sym_node_sum<F: FnMut(SegNode) -> f64>(
    splits: &[(f64, f64)],
    rule: &QuadratureRule,
    mut term: F,
) -> f64 {
    let n = splits.len() * rule.order();
    let mut acc = 0.0;
    for k in 0..n / 2 {
        acc += term(seg_node(splits, rule, k)) + term(seg_node(splits, rule, n - 1 - k));
    }
    if n % 2 == 1 {
        acc += term(seg_node(splits, rule, n / 2));
    }
    acc
}

#[inline]
fn point_at(node: SegNode, a: Point, b: Point) -> Point {
    Point::new(node.c * a.x + node.s * b.x, node.c * a.y + node.s * b.y)
}

fn check_not_degenerate(a: Point, b: Point) -> Result<(), GeomError> {
    if a.x == b.x && a.y == b.y {
        Err(GeomError::DegenerateSegment(a.x, a.y))
    } else {
        Ok(())
    }
}

/// Weighted length of the segment a->b. Symmetric in (a, b) bit-exactly.
pub fn weighted_segment_length(
    a: Point,
    b: Point,
    density: &DensityField,
    quad: &QuadratureRule,
) -> Result<f64, GeomError> {
    check_not_degenerate(a, b)?;
    let splits = splits_for(a, b);
    let integral = sym_node_sum(splits, quad, |n| {
        n.w * density.value_rsq(point_at(n, a, b).norm_sq())
    });
    Ok(a.dist(b) * integral)
}

/// Signed weighted-area contribution of the directed segment a->b.
/// Reversing the segment negates the value bit-exactly.
pub fn weighted_area_contribution(
    a: Point,
    b: Point,
    density: &DensityField,
    quad: &QuadratureRule,
) -> f64 {
    let splits = splits_for(a, b);
    let integral = sym_node_sum(splits, quad, |n| {
        n.w * density.value_rsq(point_at(n, a, b).norm_sq())
    });
    a.cross(b) / (density.exponent() + 2.0) * integral
}

/// Value and endpoint gradients of the weighted length in one node sweep.
pub fn weighted_segment_length_with_grad(
    a: Point,
    b: Point,
    density: &DensityField,
    quad: &QuadratureRule,
) -> Result<(f64, Point, Point), GeomError> {
    check_not_degenerate(a, b)?;
    let splits = splits_for(a, b);
    let len = a.dist(b);
    let unit = (b - a) * (1.0 / len);
    let mut val = 0.0;
    let mut grad_a = Point::ORIGIN;
    let mut grad_b = Point::ORIGIN;
    let n = splits.len() * quad.order();
    for k in 0..n {
        let node = seg_node(splits, quad, k);
        let q = point_at(node, a, b);
        let rsq = q.norm_sq();
        val += node.w * density.value_rsq(rsq);
        let g = q * (density.grad_factor_rsq(rsq) * node.w);
        grad_a = grad_a + g * node.c;
        grad_b = grad_b + g * node.s;
    }
    Ok((
        len * val,
        grad_a * len - unit * val,
        grad_b * len + unit * val,
    ))
}

/// Value and endpoint gradients of the signed area contribution in one node
/// sweep.
pub fn weighted_area_contribution_with_grad(
    a: Point,
    b: Point,
    density: &DensityField,
    quad: &QuadratureRule,
) -> (f64, Point, Point) {
    let splits = splits_for(a, b);
    let scale = 1.0 / (density.exponent() + 2.0);
    let k_cross = a.cross(b);
    let mut val = 0.0;
    let mut ja = Point::ORIGIN;
    let mut jb = Point::ORIGIN;
    let n = splits.len() * quad.order();
    for i in 0..n {
        let node = seg_node(splits, quad, i);
        let q = point_at(node, a, b);
        let rsq = q.norm_sq();
        val += node.w * density.value_rsq(rsq);
        let g = q * (density.grad_factor_rsq(rsq) * node.w);
        ja = ja + g * node.c;
        jb = jb + g * node.s;
    }
    let ga = (Point::new(b.y, -b.x) * val + ja * k_cross) * scale;
    let gb = (Point::new(-a.y, a.x) * val + jb * k_cross) * scale;
    (k_cross * scale * val, ga, gb)
}

/// Gradient of [`weighted_segment_length`] with respect to both endpoints.
pub fn grad_weighted_segment_length(
    a: Point,
    b: Point,
    density: &DensityField,
    quad: &QuadratureRule,
) -> Result<(Point, Point), GeomError> {
    check_not_degenerate(a, b)?;
    let splits = splits_for(a, b);
    let len = a.dist(b);
    let unit = (b - a) * (1.0 / len);

    let mut val = 0.0;
    let mut grad_a = Point::ORIGIN;
    let mut grad_b = Point::ORIGIN;
    let n = splits.len() * quad.order();
    for k in 0..n {
        let node = seg_node(splits, quad, k);
        let q = point_at(node, a, b);
        let rsq = q.norm_sq();
        val += node.w * density.value_rsq(rsq);
        let g = q * (density.grad_factor_rsq(rsq) * node.w);
        grad_a = grad_a + g * node.c;
        grad_b = grad_b + g * node.s;
    }
    Ok((grad_a * len - unit * val, grad_b * len + unit * val))
}

/// Gradient of [`weighted_area_contribution`] with respect to both endpoints.
pub fn grad_weighted_area_contribution(
    a: Point,
    b: Point,
    density: &DensityField,
    quad: &QuadratureRule,
) -> (Point, Point) {
    let splits = splits_for(a, b);
    let scale = 1.0 / (density.exponent() + 2.0);
    let k_cross = a.cross(b);

    let mut val = 0.0;
    let mut ja = Point::ORIGIN;
    let mut jb = Point::ORIGIN;
    let n = splits.len() * quad.order();
    for i in 0..n {
        let node = seg_node(splits, quad, i);
        let q = point_at(node, a, b);
        let rsq = q.norm_sq();
        val += node.w * density.value_rsq(rsq);
        let g = q * (density.grad_factor_rsq(rsq) * node.w);
        ja = ja + g * node.c;
        jb = jb + g * node.s;
    }
    let ga = (Point::new(b.y, -b.x) * val + ja * k_cross) * scale;
    let gb = (Point::new(-a.y, a.x) * val + jb * k_cross) * scale;
    (ga, gb)
}

/// Weighted area enclosed by a closed polygon loop (positive when the loop
/// runs counterclockwise around its interior).
///
/// The per-segment contributions are summed in a canonical traversal of the
/// loop and the result is signed by the input orientation, so reversing the
/// loop negates the value bit-exactly.
pub fn loop_weighted_area(points: &[Point], density: &DensityField, quad: &QuadratureRule) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let (order, flip) = canonical_order(points);
    let m = points.len();
    let mut sum = 0.0;
    for k in 0..m {
        let a = points[order[k]];
        let b = points[order[(k + 1) % m]];
        sum += weighted_area_contribution(a, b, density, quad);
    }
    if flip {
        -sum
    } else {
        sum
    }
}

/// Canonical cyclic ordering of a loop: start at the lexicographically
/// smallest vertex and walk toward the smaller neighbour. Returns the index
/// order and whether it reverses the input orientation.
fn canonical_order(points: &[Point]) -> (Vec<usize>, bool) {
    let m = points.len();
    let key = |p: &Point| (p.x.to_bits() as i64 ^ i64::MIN, p.y.to_bits() as i64 ^ i64::MIN);
    // Representative start: smallest key; ties broken by comparing the
    // whole rotated sequence so that equal-position vertices are handled
    // consistently for both directions.
    let less = |i: usize, j: usize, step_i: usize, step_j: usize| -> bool {
        for k in 0..m {
            let a = key(&points[(i + k * step_i) % m]);
            let b = key(&points[(j + k * step_j) % m]);
            if a != b {
                return a < b;
            }
        }
        false
    };
    let fwd = 1usize;
    let bwd = m - 1;
    let mut best = (0usize, fwd);
    for start in 0..m {
        for step in [fwd, bwd] {
            if less(start, best.0, step, best.1) {
                best = (start, step);
            }
        }
    }
    let order: Vec<usize> = (0..m).map(|k| (best.0 + k * best.1) % m).collect();
    (order, best.1 == bwd)
}

/// Parameter range [0,1] distance from the segment a->b to the origin.
pub fn segment_origin_distance(a: Point, b: Point) -> f64 {
    let d = b - a;
    let len_sq = d.norm_sq();
    if len_sq == 0.0 {
        return a.norm();
    }
    let t = (-(a.dot(d)) / len_sq).clamp(0.0, 1.0);
    (a + d * t).norm()
}
