//! Generalized curvature along sampled arcs.
//!
//! In the plane with density f, a curve with inward unit normal N has
//! generalized curvature
//!   kappa_f = kappa_0 - d(log f)/dN,
//! the first-variation cost of moving area across the curve. For f = |x|^p
//! the normal derivative is p (x . N) / |x|^2, and a circular arc has
//! constant kappa_f exactly when the circle passes through the origin
//! (where it equals (p + 2) / (2 R)).

use crate::geom::{DensityField, GeomError, Point, ORIGIN_EPS};

/// Which side of the traversal direction the inward normal lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalSide {
    Left,
    Right,
}

/// Signed curvature of the circumcircle through three consecutive samples,
/// positive when the polyline turns left.
pub fn circumcircle_curvature(a: Point, b: Point, c: Point) -> f64 {
    let ab = b - a;
    let bc = c - b;
    let ac = c - a;
    let denom = ab.norm() * bc.norm() * ac.norm();
    if denom == 0.0 {
        return 0.0;
    }
    2.0 * ab.cross(bc) / denom
}

/// Estimates kappa_f at each interior sample of an ordered arc polyline.
///
/// kappa_0 comes from the circumcircle of three consecutive samples, signed
/// by the normal side; samples within [`ORIGIN_EPS`] of the origin are
/// skipped (the density vanishes there).
pub fn generalized_curvature_samples(
    samples: &[Point],
    inward_normal: NormalSide,
    density: &DensityField,
) -> Result<Vec<f64>, GeomError> {
    if samples.len() < 5 {
        return Err(GeomError::InsufficientSamples {
            needed: 5,
            got: samples.len(),
        });
    }
    for i in 1..samples.len() {
        if samples[i] == samples[i - 1] {
            return Err(GeomError::RepeatedSample(i));
        }
    }
    let sign = match inward_normal {
        NormalSide::Left => 1.0,
        NormalSide::Right => -1.0,
    };
    let mut out = Vec::with_capacity(samples.len() - 2);
    for i in 1..samples.len() - 1 {
        let q = samples[i];
        if q.norm() <= ORIGIN_EPS {
            continue;
        }
        let kappa0 = sign * circumcircle_curvature(samples[i - 1], q, samples[i + 1]);
        let tangent = samples[i + 1] - samples[i - 1];
        let normal = (tangent.perp() * sign).normalized();
        out.push(kappa0 - density.log_normal_derivative(q, normal));
    }
    Ok(out)
}

/// Mean and population standard deviation of a slice.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn circle_through_origin(radius: f64, n: usize) -> Vec<Point> {
        // Center at (radius, 0): passes through the origin.
        (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
                Point::new(radius + radius * t.cos(), radius * t.sin())
            })
            .collect()
    }

    #[test]
    fn circle_through_origin_has_constant_value() {
        for pe in [0.5, 2.0, 5.0] {
            let d = DensityField::new(pe).unwrap();
            for radius in [0.5, 2.0] {
                let samples = circle_through_origin(radius, 64);
                // Inward normal points toward the center; traversal is CCW,
                // so the center is on the left.
                let vals = generalized_curvature_samples(&samples, NormalSide::Left, &d).unwrap();
                let want = (pe + 2.0) / (2.0 * radius);
                let (mean, std) = mean_std(&vals);
                assert_relative_eq!(mean, want, max_relative = 1e-6);
                assert!(std < 1e-6 * mean.abs(), "p={pe} R={radius}: std {std}");
            }
        }
    }

    #[test]
    fn radial_segment_has_zero_value() {
        // Straight run along the x axis: kappa_0 = 0 and x.N = 0.
        let samples: Vec<Point> = (0..9)
            .map(|k| Point::new(1.0 + 0.125 * k as f64, 0.0))
            .collect();
        for pe in [0.0, 1.3, 4.0] {
            let d = DensityField::new(pe).unwrap();
            let vals = generalized_curvature_samples(&samples, NormalSide::Left, &d).unwrap();
            for v in vals {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn euclidean_circle_gives_inverse_radius() {
        let d = DensityField::euclidean();
        for radius in [0.7, 3.0] {
            let samples: Vec<Point> = (0..40)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / 40.0;
                    Point::new(5.0 + radius * t.cos(), -1.0 + radius * t.sin())
                })
                .collect();
            let vals = generalized_curvature_samples(&samples, NormalSide::Left, &d).unwrap();
            for v in vals {
                assert_relative_eq!(v, 1.0 / radius, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn normal_side_flips_sign() {
        let d = DensityField::euclidean();
        let samples = circle_through_origin(1.0, 16);
        let left = generalized_curvature_samples(&samples, NormalSide::Left, &d).unwrap();
        let right = generalized_curvature_samples(&samples, NormalSide::Right, &d).unwrap();
        for (l, r) in left.iter().zip(right.iter()) {
            assert_relative_eq!(*l, -*r, max_relative = 1e-12);
        }
    }

    #[test]
    fn too_few_samples_rejected() {
        let d = DensityField::euclidean();
        let samples = circle_through_origin(1.0, 4);
        assert!(matches!(
            generalized_curvature_samples(&samples, NormalSide::Left, &d),
            Err(GeomError::InsufficientSamples { needed: 5, got: 4 })
        ));
    }

    #[test]
    fn origin_samples_are_skipped() {
        let d = DensityField::new(2.0).unwrap();
        let samples = vec![
            Point::new(-2.0, 0.1),
            Point::new(-1.0, 0.05),
            Point::ORIGIN,
            Point::new(1.0, -0.05),
            Point::new(2.0, -0.1),
        ];
        let vals = generalized_curvature_samples(&samples, NormalSide::Left, &d).unwrap();
        assert_eq!(vals.len(), 2);
    }
}
