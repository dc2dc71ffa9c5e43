//! Extremal singular values and eigenvalues of sparse matrices.
//!
//! All quantities come from the Lanczos process without reorthogonalization
//! on a symmetric operator: `AᵀA` for the largest singular value and `B⁻¹`
//! (applied by preconditioned CG) for the smallest eigenvalue of a symmetric
//! positive definite `B`. The largest Ritz value is recomputed every step and
//! the iteration stops once it no longer moves between step `m/2` and step
//! `m`, or when the Krylov space is exhausted.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::krylov::pcg;
use crate::sparse::{dot, norm2, SparseRealMatrix, Symmetry};

/// Tolerances and limits for the extremal solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralOptions {
    /// Relative stagnation tolerance for `σ_max`.
    pub sigma_tol: f64,
    /// Relative stagnation tolerance for `λ_min`.
    pub lambda_tol: f64,
    pub maxit: usize,
    /// Relative residual of the inner CG solves.
    pub inner_tol: f64,
    pub inner_maxit: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            sigma_tol: 1e-10,
            lambda_tol: 1e-8,
            maxit: 5000,
            inner_tol: 1e-12,
            inner_maxit: 100_000,
        }
    }
}

impl SpectralOptions {
    /// Looser outer tolerances, enough for plotted quantities.
    pub fn experiment() -> Self {
        SpectralOptions {
            sigma_tol: 1e-6,
            lambda_tol: 1e-6,
            ..Self::default()
        }
    }
}

/// One converged extremal value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremal {
    pub value: f64,
    pub iterations: usize,
    /// Relative change of the Ritz value over the second half of the run.
    pub change: f64,
}

/// Deterministic start vector: ones plus a small seeded alternating
/// perturbation that breaks symmetry against the wanted eigenvector.
pub fn start_vector(n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..n)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            1.0 + 1e-3 * sign * (1.0 + 0.5 * rng.gen::<f64>())
        })
        .collect()
}

/// Number of eigenvalues of the symmetric tridiagonal `(alpha, beta)` below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..alpha.len() {
        let b2 = if i == 0 {
            0.0
        } else {
            beta[i - 1] * beta[i - 1]
        };
        q = alpha[i] - x - if i == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (alpha[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest and smallest eigenvalues of a symmetric tridiagonal matrix.
fn tridiagonal_extremes(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let m = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 }
            + if i + 1 < m { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    let bisect = |k: usize| {
        // smallest x with at least k + 1 eigenvalues below it
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if sturm_count(alpha, beta, mid) > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        0.5 * (a + b)
    };
    (bisect(m - 1), bisect(0))
}

struct LanczosOutcome {
    largest: f64,
    smallest_ritz: f64,
    iterations: usize,
    change: f64,
}

/// Largest eigenvalue of the symmetric operator `op`.
fn lanczos_largest(
    n: usize,
    mut op: impl FnMut(&[f64], &mut [f64]) -> Result<()>,
    tol: f64,
    maxit: usize,
) -> Result<LanczosOutcome> {
    if n == 0 {
        return Err(Error::InvalidParams("empty matrix".into()));
    }
    let mut v = start_vector(n);
    let s = norm2(&v);
    v.iter_mut().for_each(|x| *x /= s);
    let mut v_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut history: Vec<f64> = Vec::new();
    for m in 1..=maxit {
        op(&v, &mut w)?;
        let a = dot(&w, &v);
        let b_prev = beta.last().copied().unwrap_or(0.0);
        for i in 0..n {
            w[i] -= a * v[i] + b_prev * v_prev[i];
        }
        let b = norm2(&w);
        alpha.push(a);
        let (largest, low) = tridiagonal_extremes(&alpha, &beta);
        history.push(largest);
        let scale = largest.abs().max(low.abs()).max(f64::MIN_POSITIVE);
        let exhausted = b <= 1e-12 * scale;
        let change = (largest - history[m / 2]).abs() / largest.abs().max(f64::MIN_POSITIVE);
        if exhausted || (m >= 4 && change <= tol) {
            return Ok(LanczosOutcome {
                largest,
                smallest_ritz: low,
                iterations: m,
                change: if exhausted { 0.0 } else { change },
            });
        }
        beta.push(b);
        std::mem::swap(&mut v_prev, &mut v);
        for i in 0..n {
            v[i] = w[i] / b;
        }
    }
    Err(Error::NoConvergence {
        iterations: maxit,
        estimate: history.last().copied().unwrap_or(0.0),
    })
}

/// Largest singular value, from Lanczos on `AᵀA`.
pub fn sigma_max(a: &SparseRealMatrix, tol: f64, maxit: usize) -> Result<Extremal> {
    let mut tmp = vec![0.0; a.n()];
    let out = lanczos_largest(
        a.n(),
        |x, y| {
            a.matvec(x, &mut tmp);
            a.transpose_matvec(&tmp, y);
            Ok(())
        },
        tol,
        maxit,
    )?;
    Ok(Extremal {
        value: out.largest.max(0.0).sqrt(),
        iterations: out.iterations,
        change: out.change,
    })
}

/// Largest eigenvalue of a symmetric matrix.
pub fn lambda_max_sym(b: &SparseRealMatrix, tol: f64, maxit: usize) -> Result<Extremal> {
    let out = lanczos_largest(
        b.n(),
        |x, y| {
            b.matvec(x, y);
            Ok(())
        },
        tol,
        maxit,
    )?;
    Ok(Extremal {
        value: out.largest,
        iterations: out.iterations,
        change: out.change,
    })
}

/// Smallest eigenvalue of the symmetric positive definite `b`, from Lanczos
/// on `b⁻¹` with Jacobi-preconditioned CG solves.
fn lambda_min_spd(b: &SparseRealMatrix, tol: f64, opts: &SpectralOptions) -> Result<Extremal> {
    let out = lanczos_largest(
        b.n(),
        |x, y| {
            let r = pcg(b, x, opts.inner_tol, opts.inner_maxit)?;
            y.copy_from_slice(&r.solution);
            Ok(())
        },
        tol,
        opts.maxit,
    )?;
    if !(out.largest > 0.0) || out.smallest_ritz < 0.0 {
        return Err(Error::IndefiniteSymmetricPart {
            curvature: 1.0 / out.smallest_ritz.min(out.largest),
        });
    }
    Ok(Extremal {
        value: 1.0 / out.largest,
        iterations: out.iterations,
        change: out.change,
    })
}

/// Smallest eigenvalue of `(A + Aᵀ)/2`.
pub fn lambda_min_sym(a: &SparseRealMatrix, tol: f64, maxit: usize) -> Result<Extremal> {
    let opts = SpectralOptions {
        maxit,
        ..SpectralOptions::default()
    };
    lambda_min_spd(&a.symmetric_part(), tol, &opts)
}

/// `σ_max(A)`, `λ_min((A+Aᵀ)/2)` and their ratio.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub n: usize,
    pub sigma_max: f64,
    pub lambda_min_sym: f64,
    pub kappa: f64,
    pub sigma_iterations: usize,
    pub lambda_iterations: usize,
    pub sigma_change: f64,
    pub lambda_change: f64,
    pub positive_definite: bool,
    /// For matrices tagged symmetric: relative difference between `σ_max`
    /// and an independent `λ_max` computation.
    pub symmetric_crosscheck: Option<f64>,
}

pub fn condition_number(a: &SparseRealMatrix, opts: &SpectralOptions) -> Result<SpectralReport> {
    let sigma = sigma_max(a, opts.sigma_tol, opts.maxit)?;
    let lambda = lambda_min_spd(&a.symmetric_part(), opts.lambda_tol, opts)?;
    let symmetric_crosscheck = if a.symmetry() == Symmetry::Symmetric {
        let lmax = lambda_max_sym(a, opts.sigma_tol, opts.maxit)?;
        Some((lmax.value - sigma.value).abs() / sigma.value)
    } else {
        None
    };
    Ok(SpectralReport {
        n: a.n(),
        sigma_max: sigma.value,
        lambda_min_sym: lambda.value,
        kappa: sigma.value / lambda.value,
        sigma_iterations: sigma.iterations,
        lambda_iterations: lambda.iterations,
        sigma_change: sigma.change,
        lambda_change: lambda.change,
        positive_definite: lambda.value > 0.0,
        symmetric_crosscheck,
    })
}

/// `(λ_min, λ_max)` of a symmetric positive definite (mass) matrix.
pub fn mass_extremal(m: &SparseRealMatrix, opts: &SpectralOptions) -> Result<(f64, f64)> {
    let hi = lambda_max_sym(m, opts.sigma_tol, opts.maxit)?;
    let lo = lambda_min_spd(m, opts.lambda_tol, opts)?;
    Ok((lo.value, hi.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn laplacian(n: usize) -> SparseRealMatrix {
        // N = n + 1 intervals of size h = 1/N
        let h = 1.0 / (n + 1) as f64;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 / h));
            if i + 1 < n {
                t.push((i, i + 1, -1.0 / h));
                t.push((i + 1, i, -1.0 / h));
            }
        }
        SparseRealMatrix::from_triplets(n, t, Symmetry::Symmetric)
    }

    #[test]
    fn trivial_matrices() {
        let i = SparseRealMatrix::identity(7);
        assert!((sigma_max(&i, 1e-12, 100).unwrap().value - 1.0).abs() < 1e-14);
        let d = SparseRealMatrix::from_diagonal(&[3.0, -7.0]);
        assert!((sigma_max(&d, 1e-12, 100).unwrap().value - 7.0).abs() < 1e-12);
        let d = SparseRealMatrix::from_diagonal(&[2.0, 5.0]);
        assert!((lambda_min_sym(&d, 1e-12, 100).unwrap().value - 2.0).abs() < 1e-12);
        let a = SparseRealMatrix::from_triplets(
            2,
            vec![(0, 0, 2.0), (0, 1, 1.0), (1, 1, 2.0)],
            Symmetry::General,
        );
        assert!((lambda_min_sym(&a, 1e-12, 100).unwrap().value - 1.5).abs() < 1e-12);
        let r = condition_number(
            &SparseRealMatrix::from_diagonal(&[1.0, 100.0]),
            &Default::default(),
        )
        .unwrap();
        assert!((r.kappa - 100.0).abs() < 1e-9);
        let r = condition_number(&SparseRealMatrix::identity(4), &Default::default()).unwrap();
        assert!((r.kappa - 1.0).abs() < 1e-12);
    }

    #[test]
    fn laplacian_closed_forms() {
        for big_n in [16usize, 64, 256] {
            let a = laplacian(big_n - 1);
            let h = 1.0 / big_n as f64;
            let c = (PI / big_n as f64).cos();
            let r = condition_number(&a, &Default::default()).unwrap();
            let smax = 2.0 / h * (1.0 + c);
            let lmin = 2.0 / h * (1.0 - c);
            assert!(
                (r.sigma_max - smax).abs() <= 1e-8 * smax,
                "{big_n}: {}",
                r.sigma_max
            );
            assert!(
                (r.lambda_min_sym - lmin).abs() <= 1e-8 * lmin,
                "{big_n}: {}",
                r.lambda_min_sym
            );
            assert!(r.symmetric_crosscheck.unwrap() < 1e-6);
        }
    }

    #[test]
    fn indefinite_symmetric_part_is_reported() {
        let a = SparseRealMatrix::from_triplets(
            3,
            vec![
                (0, 0, 1.0),
                (0, 1, 3.0),
                (1, 0, 3.0),
                (1, 1, 1.0),
                (2, 2, 1.0),
            ],
            Symmetry::Symmetric,
        );
        assert!(matches!(
            lambda_min_sym(&a, 1e-8, 100),
            Err(Error::IndefiniteSymmetricPart { .. })
        ));
    }

    #[test]
    fn mass_extremal_diagonal() {
        let m = SparseRealMatrix::from_diagonal(&[0.5, 2.0, 1.0]);
        let (lo, hi) = mass_extremal(&m, &Default::default()).unwrap();
        assert!((lo - 0.5).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn start_vector_is_reproducible() {
        assert_eq!(start_vector(10), start_vector(10));
    }

    #[test]
    fn tridiagonal_extremes_match_dense() {
        let alpha = [2.0, -1.0, 0.5, 3.0];
        let beta = [1.0, 0.2, -0.7];
        let t = nalgebra::DMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let ev = t.symmetric_eigenvalues();
        let (hi, lo) = tridiagonal_extremes(&alpha, &beta);
        assert!((hi - ev.max()).abs() < 1e-12 && (lo - ev.min()).abs() < 1e-12);
    }
}
