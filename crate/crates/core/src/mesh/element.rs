use nalgebra::DMatrix;

use crate::tensor::{centroid, norm, sub, Point};

/// Vertices of the equilateral reference simplex with unit `dim`-volume.
pub fn reference_simplex(dim: usize) -> Vec<Point> {
    let unit_edge: Vec<Point> = match dim {
        1 => vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
        2 => vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.5, 3f64.sqrt() / 2.0, 0.0],
        ],
        3 => vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.5, 3f64.sqrt() / 2.0, 0.0],
            [0.5, 3f64.sqrt() / 6.0, (2.0f64 / 3.0).sqrt()],
        ],
        _ => panic!("reference simplex only defined for dimensions 1 to 3"),
    };
    let volume = simplex_measure(&unit_edge, dim);
    let s = volume.powf(-1.0 / dim as f64);
    unit_edge
        .iter()
        .map(|p| [p[0] * s, p[1] * s, p[2] * s])
        .collect()
}

/// Edge matrix `[p1 - p0, ..., pk - p0]` restricted to the first `dim` rows.
pub fn edge_matrix(points: &[Point], dim: usize) -> DMatrix<f64> {
    let k = points.len() - 1;
    DMatrix::from_fn(dim, k, |r, c| points[c + 1][r] - points[0][r])
}

fn factorial(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64
}

/// `k`-dimensional measure of the simplex spanned by `points` (k + 1 of
/// them) embedded in `dim` dimensions. A single point has measure one.
pub fn simplex_measure(points: &[Point], dim: usize) -> f64 {
    let k = points.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let e = edge_matrix(points, dim);
    if k == dim {
        return e.determinant().abs() / factorial(k);
    }
    let gram = e.transpose() * &e;
    gram.determinant().max(0.0).sqrt() / factorial(k)
}

/// Affine data of one simplex relative to the equilateral unit-volume
/// reference simplex.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub volume: f64,
    pub diameter: f64,
    pub barycenter: Point,
    /// `F_K'`, mapping the reference simplex onto the element.
    pub jacobian: DMatrix<f64>,
    pub jacobian_inv: DMatrix<f64>,
    /// Gradients of the local linear basis functions, one per vertex.
    pub gradients: Vec<Point>,
    /// Longest edge over shortest altitude.
    pub aspect_ratio: f64,
}

impl ElementGeometry {
    /// Returns `None` when the edge matrix is singular.
    pub fn new(points: &[Point], dim: usize) -> Option<Self> {
        let e = edge_matrix(points, dim);
        let det = e.determinant();
        let e_inv = e.clone().try_inverse()?;
        let reference = reference_simplex(dim);
        let e_ref = edge_matrix(&reference, dim);
        let e_ref_inv = e_ref.try_inverse()?;
        let jacobian = &e * e_ref_inv;
        let jacobian_inv = jacobian.clone().try_inverse()?;

        let mut gradients = vec![[0.0; 3]; dim + 1];
        for k in 1..=dim {
            for r in 0..dim {
                gradients[k][r] = e_inv[(k - 1, r)];
                gradients[0][r] -= e_inv[(k - 1, r)];
            }
        }

        let mut diameter: f64 = 0.0;
        for a in 0..points.len() {
            for b in a + 1..points.len() {
                diameter = diameter.max(norm(&sub(&points[a], &points[b])));
            }
        }
        // altitude of vertex i is 1 / |grad phi_i|
        let max_grad = gradients.iter().map(norm).fold(0.0, f64::max);
        Some(Self {
            volume: det.abs() / factorial(dim),
            diameter,
            barycenter: centroid(points),
            jacobian,
            jacobian_inv,
            gradients,
            aspect_ratio: diameter * max_grad,
        })
    }

    /// `(F')^{-1} D (F')^{-T}` for a `dim x dim` tensor `d`.
    pub fn metric(&self, d: &DMatrix<f64>) -> DMatrix<f64> {
        &self.jacobian_inv * d * self.jacobian_inv.transpose()
    }
}
