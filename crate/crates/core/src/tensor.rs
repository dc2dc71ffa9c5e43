//! Small fixed-capacity points and tensors for dimensions 1 to 3.

use nalgebra::DMatrix;

/// Coordinates padded with zeros beyond the mesh dimension.
pub type Point = [f64; 3];

pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &Point, y: &mut Point) {
    for k in 0..3 {
        y[k] += alpha * x[k];
    }
}

/// Convex combination `sum_a lambda_a * p_a`.
pub fn mix(points: &[Point], lambda: &[f64]) -> Point {
    let mut x = [0.0; 3];
    for (p, &l) in points.iter().zip(lambda) {
        axpy(l, p, &mut x);
    }
    x
}

pub fn centroid(points: &[Point]) -> Point {
    let w = 1.0 / points.len() as f64;
    let mut x = [0.0; 3];
    for p in points {
        axpy(w, p, &mut x);
    }
    x
}

/// A `dim x dim` real matrix stored in a 3x3 array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor {
    dim: usize,
    m: [[f64; 3]; 3],
}

impl Tensor {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=3).contains(&dim));
        Self {
            dim,
            m: [[0.0; 3]; 3],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, 1.0)
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            t.m[i][i] = value;
        }
        t
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut t = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            t.m[i][i] = v;
        }
        t
    }

    /// Builds a tensor from row-major entries; `entries.len()` must be a
    /// perfect square between 1 and 9.
    pub fn from_row_major(entries: &[f64]) -> Option<Self> {
        let dim = match entries.len() {
            1 => 1,
            4 => 2,
            9 => 3,
            _ => return None,
        };
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                t.m[i][j] = entries[i * dim + j];
            }
        }
        Some(t)
    }

    pub fn from_dmatrix(a: &DMatrix<f64>) -> Self {
        let mut t = Self::zeros(a.nrows());
        for i in 0..t.dim {
            for j in 0..t.dim {
                t.m[i][j] = a[(i, j)];
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.m[i][j] = v;
    }

    pub fn apply(&self, v: &Point) -> Point {
        let mut y = [0.0; 3];
        for (i, yi) in y.iter_mut().enumerate().take(self.dim) {
            *yi = (0..self.dim).map(|j| self.m[i][j] * v[j]).sum();
        }
        y
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut t = *self;
        for row in t.m.iter_mut() {
            for v in row.iter_mut() {
                *v *= alpha;
            }
        }
        t
    }

    pub fn add_scaled(&mut self, alpha: f64, other: &Tensor) {
        for i in 0..3 {
            for j in 0..3 {
                self.m[i][j] += alpha * other.m[i][j];
            }
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = *self;
        for i in 0..3 {
            for j in 0..3 {
                t.m[i][j] = self.m[j][i];
            }
        }
        t
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn entries(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.dim).flat_map(move |i| (0..self.dim).map(move |j| self.m[i][j]))
    }

    pub fn asymmetry(&self) -> f64 {
        let mut a: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..i {
                a = a.max((self.m[i][j] - self.m[j][i]).abs());
            }
        }
        a
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.asymmetry() <= rel_tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.m[i][j])
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        let mut a = self.to_dmatrix();
        a = (&a + a.transpose()) * 0.5;
        let mut ev: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn determinant(&self) -> f64 {
        self.to_dmatrix().determinant()
    }

    /// Spectral norm of the symmetric part (for SPD tensors, the largest
    /// eigenvalue).
    pub fn spectral_norm_sym(&self) -> f64 {
        let ev = self.symmetric_eigenvalues();
        ev.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}
