//! Least-squares circle fitting: algebraic seed, geometric refinement.

use serde::Serialize;

use crate::geom::{GeomError, Point};
use crate::linsolve::solve_small;

/// A fitted circle with its residual diagnostics.
///
/// `through_origin_residual` is |dist(center, origin) - radius| / radius:
/// zero exactly when the circle passes through the origin, which for the
/// density |x|^p characterizes the circular arcs of constant generalized
/// curvature.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CircleFit {
    pub center: Point,
    pub radius: f64,
    /// Root-mean-square orthogonal distance of the samples to the circle.
    pub rms_residual: f64,
    pub through_origin_residual: f64,
}

const GN_MAX_ITERS: usize = 50;
const GN_PARAM_TOL: f64 = 1e-12;

/// Fits a circle to >= 3 non-collinear samples: a Kasa-style algebraic fit
/// seeds a Gauss-Newton refinement of the geometric distance.
pub fn fit_circle(samples: &[Point]) -> Result<CircleFit, GeomError> {
    if samples.len() < 3 {
        return Err(GeomError::InsufficientSamples {
            needed: 3,
            got: samples.len(),
        });
    }
    let n = samples.len() as f64;
    let centroid = samples
        .iter()
        .fold(Point::ORIGIN, |acc, &q| acc + q * (1.0 / n));

    // Kasa fit on centered data: minimize sum (|u|^2 - 2 c.u - t)^2 over the
    // center c and t = R^2 - |c|^2. Centering decouples the normal equations
    // into a 2x2 scatter system plus the mean.
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    let mut sxz = 0.0;
    let mut syz = 0.0;
    let mut sz = 0.0;
    for &q in samples {
        let u = q - centroid;
        let z = u.norm_sq();
        sxx += u.x * u.x;
        sxy += u.x * u.y;
        syy += u.y * u.y;
        sxz += u.x * z;
        syz += u.y * z;
        sz += z;
    }
    // Collinear samples leave the scatter matrix rank deficient.
    let det = sxx * syy - sxy * sxy;
    let scale = sxx + syy;
    if scale == 0.0 || det <= 1e-24 * scale * scale {
        return Err(GeomError::Collinear);
    }
    let cx = 0.5 * (syy * sxz - sxy * syz) / det;
    let cy = 0.5 * (sxx * syz - sxy * sxz) / det;
    let mut center = centroid + Point::new(cx, cy);
    let mut radius = (cx * cx + cy * cy + sz / n).sqrt();

    // Gauss-Newton on residuals r_i = |q_i - center| - radius.
    for _ in 0..GN_MAX_ITERS {
        let mut jtj = vec![vec![0.0; 3]; 3];
        let mut jtr = vec![0.0; 3];
        for &q in samples {
            let d = center - q;
            let dist = d.norm();
            if dist < 1e-300 {
                continue;
            }
            let jac = [d.x / dist, d.y / dist, -1.0];
            let res = dist - radius;
            for i in 0..3 {
                for j in 0..3 {
                    jtj[i][j] += jac[i] * jac[j];
                }
                jtr[i] += jac[i] * res;
            }
        }
        let Some((delta, _cond)) = solve_small(&jtj, &jtr) else {
            break; // keep the algebraic estimate
        };
        let new_center = center - Point::new(delta[0], delta[1]);
        let new_radius = radius - delta[2];
        if !new_center.is_finite() || !new_radius.is_finite() || new_radius <= 0.0 {
            break;
        }
        let step = delta.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
        center = new_center;
        radius = new_radius;
        if step <= GN_PARAM_TOL * radius.max(1.0) {
            break;
        }
    }

    let mut sq_sum = 0.0;
    for &q in samples {
        let r = q.dist(center) - radius;
        sq_sum += r * r;
    }
    let rms = (sq_sum / n).sqrt();
    Ok(CircleFit {
        center,
        radius,
        rms_residual: rms,
        through_origin_residual: (center.norm() - radius).abs() / radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn circle_samples(center: Point, radius: f64, n: usize, span: f64) -> Vec<Point> {
        (0..n)
            .map(|k| {
                let t = span * k as f64 / (n - 1) as f64;
                center + Point::new(radius * t.cos(), radius * t.sin())
            })
            .collect()
    }

    #[test]
    fn exact_circle_through_origin() {
        let samples = circle_samples(Point::new(2.0, 0.0), 2.0, 16, std::f64::consts::TAU * 0.94);
        let fit = fit_circle(&samples).unwrap();
        assert_relative_eq!(fit.center.x, 2.0, epsilon = 1e-12);
        assert!(fit.center.y.abs() < 1e-12);
        assert_relative_eq!(fit.radius, 2.0, epsilon = 1e-12);
        assert!(fit.rms_residual < 1e-12);
        assert!(fit.through_origin_residual < 1e-12);
    }

    #[test]
    fn circle_far_from_origin() {
        let samples = circle_samples(Point::new(3.0, 0.0), 1.0, 16, std::f64::consts::TAU);
        let fit = fit_circle(&samples).unwrap();
        // |dist(center, 0) - R| / R = |3 - 1| / 1 = 2.
        assert_relative_eq!(fit.through_origin_residual, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn collinear_points_rejected() {
        let pts = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(2.0, 2.0),
        ];
        assert!(matches!(fit_circle(&pts), Err(GeomError::Collinear)));
    }

    #[test]
    fn too_few_points_rejected() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        assert!(matches!(
            fit_circle(&pts),
            Err(GeomError::InsufficientSamples { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn shallow_arc_is_stable() {
        // 5-degree arc of a radius-10 circle: nearly straight but not
        // collinear; the fit should still recover the circle.
        let samples = circle_samples(Point::new(0.0, -10.0), 10.0, 24, 5.0_f64.to_radians());
        let fit = fit_circle(&samples).unwrap();
        assert_relative_eq!(fit.radius, 10.0, max_relative = 1e-6);
        assert!(fit.rms_residual < 1e-9);
    }

    #[test]
    fn noisy_circle_rms_reported() {
        // Deterministic low-amplitude radial perturbation.
        let samples: Vec<Point> = (0..32)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 32.0;
                let r = 1.0 + 1e-4 * (7.0 * t).sin();
                Point::new(r * t.cos() + 0.5, r * t.sin())
            })
            .collect();
        let fit = fit_circle(&samples).unwrap();
        assert!(fit.rms_residual > 1e-5 && fit.rms_residual < 2e-4);
        assert_relative_eq!(fit.radius, 1.0, max_relative = 1e-3);
    }
}
