//! Gauss rules on intervals and conical-product rules on simplices.
//!
//! Simplex rules are stored in barycentric form (weights sum to one), so a
//! rule can be pushed onto any embedded simplex by mixing its vertices and
//! scaling the weights by the simplex measure.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n > 0);
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Newton iteration on P_n starting from the Chebyshev-like guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((0.5 * (1.0 - x), 0.5 * w));
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// A quadrature rule on the reference `k`-simplex.
#[derive(Debug, Clone)]
pub struct SimplexRule {
    pub dim: usize,
    /// Barycentric coordinates (length `dim + 1`) of each node.
    pub nodes: Vec<Vec<f64>>,
    /// Weights normalized to sum to one.
    pub weights: Vec<f64>,
}

impl SimplexRule {
    /// Conical-product rule exact for polynomials of total degree `degree`.
    pub fn with_degree(dim: usize, degree: usize) -> Self {
        let points = (degree + dim).div_ceil(2).max(1);
        Self::conical(dim, points)
    }

    /// Collapsed-coordinate Gauss rule with `points` nodes per direction.
    pub fn conical(dim: usize, points: usize) -> Self {
        let gl = gauss_legendre(points);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        match dim {
            0 => {
                nodes.push(vec![1.0]);
                weights.push(1.0);
            }
            1 => {
                for &(t, w) in &gl {
                    nodes.push(vec![1.0 - t, t]);
                    weights.push(w);
                }
            }
            2 => {
                for &(u, wu) in &gl {
                    for &(v, wv) in &gl {
                        let x1 = u;
                        let x2 = v * (1.0 - u);
                        nodes.push(vec![1.0 - x1 - x2, x1, x2]);
                        weights.push(2.0 * wu * wv * (1.0 - u));
                    }
                }
            }
            3 => {
                for &(u, wu) in &gl {
                    for &(v, wv) in &gl {
                        for &(s, ws) in &gl {
                            let x1 = u;
                            let x2 = v * (1.0 - u);
                            let x3 = s * (1.0 - u) * (1.0 - v);
                            nodes.push(vec![1.0 - x1 - x2 - x3, x1, x2, x3]);
                            weights.push(6.0 * wu * wv * ws * (1.0 - u).powi(2) * (1.0 - v));
                        }
                    }
                }
            }
            _ => panic!("simplex rules are only provided up to dimension 3"),
        }
        Self {
            dim,
            nodes,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}
