//! Gauss-Legendre quadrature on the unit interval.

use std::f64::consts::PI;

/// One node of a rule on [0, 1].
///
/// `s` is the abscissa and `c` its complement; both are computed directly
/// from the Legendre root so that the node list is exactly mirror-symmetric:
/// node i and node (order-1-i) carry bit-identical swapped (s, c) and equal
/// weights. Evaluating a segment point as `c * tail + s * head` then makes
/// reversed traversals produce bit-identical integrand values.
#[derive(Debug, Clone, Copy)]
pub struct QuadNode {
    pub s: f64,
    pub c: f64,
    pub w: f64,
}

/// A Gauss-Legendre rule with `order` nodes on [0, 1].
///
/// Weights sum to 1; polynomials up to degree 2*order - 1 integrate exactly.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<QuadNode>,
}

impl QuadratureRule {
    /// The order used throughout the evolver.
    pub const DEFAULT_ORDER: usize = 16;

    pub fn gauss_legendre(order: usize) -> QuadratureRule {
        assert!(order >= 1, "quadrature order must be >= 1");
        let half = order / 2;
        let mut nodes = vec![
            QuadNode {
                s: 0.0,
                c: 0.0,
                w: 0.0
            };
            order
        ];
        for k in 0..half {
            let (xi, w) = legendre_root(order, k);
            // xi > 0 for k < order/2. Low node near 0, high node near 1.
            let lo = QuadNode {
                s: 0.5 * (1.0 - xi),
                c: 0.5 * (1.0 + xi),
                w: 0.5 * w,
            };
            let hi = QuadNode {
                s: lo.c,
                c: lo.s,
                w: lo.w,
            };
            nodes[k] = lo;
            nodes[order - 1 - k] = hi;
        }
        if order % 2 == 1 {
            let (_, w) = legendre_root(order, half);
            nodes[half] = QuadNode {
                s: 0.5,
                c: 0.5,
                w: 0.5 * w,
            };
        }
        QuadratureRule { nodes }
    }

    pub fn default_rule() -> QuadratureRule {
        QuadratureRule::gauss_legendre(Self::DEFAULT_ORDER)
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[QuadNode] {
        &self.nodes
    }

    /// Integrate `f` over [0, 1].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().map(|n| n.w * f(n.s)).sum()
    }
}

/// k-th root of P_n in descending order (k = 0 is the largest), with its
/// Gauss weight on [-1, 1]. Newton iteration on the three-term recurrence.
fn legendre_root(n: usize, k: usize) -> (f64, f64) {
    let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
    for _ in 0..100 {
        let (p, dp) = legendre_eval(n, x);
        let dx = p / dp;
        x -= dx;
        if dx.abs() < 1e-15 {
            break;
        }
    }
    let (_, dp) = legendre_eval(n, x);
    let w = 2.0 / ((1.0 - x * x) * dp * dp);
    (x, w)
}

/// (P_n(x), P_n'(x)) by the standard recurrence.
fn legendre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
