//! Points in the weighted plane and the density field |x|^p.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Radius below which gradient evaluations clamp |q| to keep the density
/// gradient finite (the functional itself is integrable and never clamped).
pub const ORIGIN_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("degenerate segment: endpoints coincide at ({0}, {1})")]
    DegenerateSegment(f64, f64),
    #[error("invalid scale factor {0}: must be > 0")]
    InvalidScale(f64),
    #[error("samples are collinear; no circle fits")]
    Collinear,
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("consecutive samples coincide at index {0}")]
    RepeatedSample(usize),
    #[error("density exponent {0} must be finite and >= 0")]
    InvalidExponent(f64),
}

/// A point of the plane. Also used as a 2-vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Signed area of the parallelogram spanned by `self` and `other`.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Rotation by 90 degrees counterclockwise.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        Point::new(self.x / n, self.y / n)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn rotated(self, theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// The radial power density f(x) = |x|^p, p >= 0.
///
/// At the origin the density is 0 for p > 0 and 1 for p = 0 (uniform plane).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    exponent: f64,
}

impl DensityField {
    pub fn new(p: f64) -> Result<DensityField, GeomError> {
        if !p.is_finite() || p < 0.0 {
            return Err(GeomError::InvalidExponent(p));
        }
        Ok(DensityField { exponent: p })
    }

    pub fn euclidean() -> DensityField {
        DensityField { exponent: 0.0 }
    }

    pub fn exponent(self) -> f64 {
        self.exponent
    }

    /// Density value at `q`.
    pub fn value(self, q: Point) -> f64 {
        self.value_rsq(q.norm_sq())
    }

    /// Density value from the squared radius. Fast paths for the exponents
    /// the experiments use most.
    #[inline]
    pub fn value_rsq(self, rsq: f64) -> f64 {
        let p = self.exponent;
        if p == 0.0 {
            1.0
        } else if p == 2.0 {
            rsq
        } else if p == 1.0 {
            rsq.sqrt()
        } else if p == 4.0 {
            rsq * rsq
        } else {
            rsq.powf(0.5 * p)
        }
    }

    /// Scalar factor g(rsq) such that grad(|q|^p) = g(|q|^2) * q.
    ///
    /// Equals p * |q|^(p-2); for p < 2 the factor diverges at the origin and
    /// the radius is clamped to [`ORIGIN_EPS`].
    #[inline]
    pub fn grad_factor_rsq(self, rsq: f64) -> f64 {
        let p = self.exponent;
        if p == 0.0 {
            return 0.0;
        }
        if p == 2.0 {
            return 2.0;
        }
        let rsq = if p < 2.0 {
            rsq.max(ORIGIN_EPS * ORIGIN_EPS)
        } else {
            rsq
        };
        if p == 4.0 {
            4.0 * rsq
        } else if p == 1.0 {
            1.0 / rsq.sqrt()
        } else {
            p * rsq.powf(0.5 * p - 1.0)
        }
    }

    /// Normal derivative of log f at `q` for unit normal `n`: p (q . n) / |q|^2.
    pub fn log_normal_derivative(self, q: Point, n: Point) -> f64 {
        let rsq = q.norm_sq().max(ORIGIN_EPS * ORIGIN_EPS);
        self.exponent * q.dot(n) / rsq
    }
}

/// Scale every point by `lambda` about the origin.
///
/// Under this map the weighted length of a curve scales by lambda^(p+1) and
/// the weighted area of a region by lambda^(p+2).
pub fn scale_points(points: &[Point], lambda: f64) -> Result<Vec<Point>, GeomError> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(GeomError::InvalidScale(lambda));
    }
    Ok(points.iter().map(|&q| q * lambda).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_values() {
        let p2 = DensityField::new(2.0).unwrap();
        assert_eq!(p2.value(Point::new(1.0, 0.0)), 1.0);
        assert_eq!(p2.value(Point::ORIGIN), 0.0);
        // r = 5, r^2 = 25
        assert_eq!(p2.value(Point::new(3.0, 4.0)), 25.0);
        let p0 = DensityField::euclidean();
        assert_eq!(p0.value(Point::ORIGIN), 1.0);
        assert_eq!(p0.value(Point::new(7.0, -2.0)), 1.0);
    }

    #[test]
    fn density_rejects_bad_exponent() {
        assert!(DensityField::new(-1.0).is_err());
        assert!(DensityField::new(f64::NAN).is_err());
    }

    #[test]
    fn fast_paths_match_powf() {
        for &p in &[0.0, 1.0, 2.0, 4.0] {
            let d = DensityField::new(p).unwrap();
            for &r in &[0.3, 1.0, 2.7] {
                let q = Point::new(r, 0.0);
                assert!((d.value(q) - r.powf(p)).abs() < 1e-14);
                let g = d.grad_factor_rsq(r * r);
                assert!((g - p * r.powf(p - 2.0)).abs() / g.max(1.0) < 1e-14);
            }
        }
    }

    #[test]
    fn scale_points_identity_and_errors() {
        let pts = vec![Point::new(1.0, 2.0), Point::new(-0.5, 0.25)];
        let same = scale_points(&pts, 1.0).unwrap();
        assert_eq!(same, pts);
        assert_eq!(
            scale_points(&pts, 0.0).unwrap_err(),
            GeomError::InvalidScale(0.0)
        );
        assert!(scale_points(&pts, -2.0).is_err());
    }
}
