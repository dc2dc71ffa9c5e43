//! Compressed sparse row matrices and Matrix Market input/output.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Symmetry {
    Symmetric,
    General,
}

/// Square CSR matrix with sorted column indices in every row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRealMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    symmetry: Symmetry,
}

impl SparseRealMatrix {
    /// Sums duplicate entries in the order they appear, so equal inputs give
    /// bitwise equal matrices.
    pub fn from_triplets(
        n: usize,
        mut triplets: Vec<(usize, usize, f64)>,
        symmetry: Symmetry,
    ) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < n && j < n, "entry ({i}, {j}) outside a {n}x{n} matrix");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseRealMatrix {
            n,
            row_ptr,
            col_idx,
            values,
            symmetry,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        SparseRealMatrix {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
            symmetry: Symmetry::Symmetric,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    /// Keeps the nonzero entries of a dense matrix.
    pub fn from_dense(a: &DMatrix<f64>, symmetry: Symmetry) -> Self {
        let mut t = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if a[(i, j)] != 0.0 {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.nrows(), t, symmetry)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn with_symmetry(mut self, symmetry: Symmetry) -> Self {
        self.symmetry = symmetry;
        self
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// `y = Aᵀ x`.
    pub fn transpose_matvec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, &xi) in x.iter().enumerate().take(self.n) {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[k]] += self.values[k] * xi;
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let t = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.n, t, self.symmetry)
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetric_part(&self) -> Self {
        let t = self
            .triplets()
            .flat_map(|(i, j, v)| [(i, j, 0.5 * v), (j, i, 0.5 * v)])
            .collect();
        Self::from_triplets(self.n, t, Symmetry::Symmetric)
    }

    /// `L A R` for diagonal `L = diag(left)`, `R = diag(right)`.
    pub fn scale(&self, left: &[f64], right: &[f64]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.values[k] *= left[i] * right[self.col_idx[k]];
            }
        }
        out
    }

    /// `A - B`.
    pub fn sub(&self, other: &Self) -> Self {
        let t = self
            .triplets()
            .chain(other.triplets().map(|(i, j, v)| (i, j, -v)))
            .collect();
        Self::from_triplets(self.n, t, Symmetry::General)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `‖A - Aᵀ‖_∞`.
    pub fn asymmetry(&self) -> f64 {
        self.sub(&self.transpose()).norm_inf()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            a[(i, j)] += v;
        }
        a
    }

    /// Writes Matrix Market coordinate format; symmetric matrices store
    /// their lower triangle.
    pub fn write_matrix_market(&self, mut w: impl Write) -> Result<()> {
        let sym = self.symmetry == Symmetry::Symmetric;
        let entries: Vec<(usize, usize, f64)> = self
            .triplets()
            .filter(|&(i, j, _)| !sym || j <= i)
            .collect();
        writeln!(
            w,
            "%%MatrixMarket matrix coordinate real {}",
            if sym { "symmetric" } else { "general" }
        )?;
        writeln!(w, "{} {} {}", self.n, self.n, entries.len())?;
        for (i, j, v) in entries {
            writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }

    pub fn read_matrix_market(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty Matrix Market file".into()))??;
        let fields: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
        if fields.len() != 5
            || fields[0] != "%%matrixmarket"
            || fields[1] != "matrix"
            || fields[2] != "coordinate"
            || !matches!(fields[3].as_str(), "real" | "integer")
        {
            return Err(Error::Parse(format!("unsupported header `{header}`")));
        }
        let symmetry = match fields[4].as_str() {
            "general" => Symmetry::General,
            "symmetric" => Symmetry::Symmetric,
            other => return Err(Error::Parse(format!("unsupported symmetry `{other}`"))),
        };
        let mut data = lines
            .map_while(|l| l.ok())
            .filter(|l| !l.trim().is_empty() && !l.starts_with('%'));
        let size = data
            .next()
            .ok_or_else(|| Error::Parse("missing size line".into()))?;
        let size: Vec<usize> = parse_fields(&size)?;
        if size.len() != 3 || size[0] != size[1] {
            return Err(Error::Parse(format!(
                "expected a square size line, got `{size:?}`"
            )));
        }
        let (n, nnz) = (size[0], size[2]);
        let mut t = Vec::with_capacity(nnz);
        for line in data.by_ref().take(nnz) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!("bad entry line `{line}`")));
            }
            let idx = |s: &str| -> Result<usize> {
                let k: usize = s.parse().map_err(|e| Error::Parse(format!("{s}: {e}")))?;
                if k == 0 || k > n {
                    return Err(Error::Parse(format!("index {k} outside 1..={n}")));
                }
                Ok(k - 1)
            };
            let (i, j) = (idx(parts[0])?, idx(parts[1])?);
            let v: f64 = parts[2]
                .parse()
                .map_err(|e| Error::Parse(format!("{}: {e}", parts[2])))?;
            t.push((i, j, v));
            if symmetry == Symmetry::Symmetric && i != j {
                t.push((j, i, v));
            }
        }
        let read = if symmetry == Symmetry::Symmetric {
            t.iter().filter(|(i, j, _)| j <= i).count()
        } else {
            t.len()
        };
        if read != nnz {
            return Err(Error::Parse(format!(
                "expected {nnz} entries, found {read}"
            )));
        }
        Ok(Self::from_triplets(n, t, symmetry))
    }
}

fn parse_fields<T: std::str::FromStr>(line: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    line.split_whitespace()
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| Error::Parse(format!("{s}: {e}")))
        })
        .collect()
}

/// Writes a vector as one value per line.
pub fn write_vector(mut w: impl Write, v: &[f64]) -> Result<()> {
    for x in v {
        writeln!(w, "{x:e}")?;
    }
    Ok(())
}

pub fn read_vector(r: impl BufRead) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        let s = line.trim();
        if !s.is_empty() {
            out.push(s.parse().map_err(|e| Error::Parse(format!("{s}: {e}")))?);
        }
    }
    Ok(out)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
