//! Conjugate gradients, full GMRES and the GMRES residual envelope check.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, SparseRealMatrix};

/// Outcome of a CG solve.
#[derive(Debug, Clone)]
pub struct CgReport {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Plain conjugate gradients for symmetric positive definite `b`.
pub fn cg(b: &SparseRealMatrix, rhs: &[f64], tol: f64, maxit: usize) -> Result<CgReport> {
    pcg_impl(b, rhs, None, tol, maxit)
}

/// Jacobi-preconditioned conjugate gradients. A nonpositive diagonal entry
/// already proves `b` is not positive definite.
pub fn pcg(b: &SparseRealMatrix, rhs: &[f64], tol: f64, maxit: usize) -> Result<CgReport> {
    let diag = b.diagonal();
    if let Some(&v) = diag.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::IndefiniteSymmetricPart { curvature: v });
    }
    let inv: Vec<f64> = diag.iter().map(|v| 1.0 / v).collect();
    pcg_impl(b, rhs, Some(&inv), tol, maxit)
}

fn pcg_impl(
    b: &SparseRealMatrix,
    rhs: &[f64],
    inv_diag: Option<&[f64]>,
    tol: f64,
    maxit: usize,
) -> Result<CgReport> {
    let n = b.n();
    let precondition = |r: &[f64]| -> Vec<f64> {
        match inv_diag {
            Some(m) => r.iter().zip(m).map(|(a, b)| a * b).collect(),
            None => r.to_vec(),
        }
    };
    let bnorm = norm2(rhs);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(CgReport {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = rhs.to_vec();
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut rel = 1.0;
    for it in 1..=maxit {
        b.matvec(&p, &mut q);
        let curvature = dot(&p, &q);
        if !(curvature > 0.0) {
            return Err(Error::IndefiniteSymmetricPart {
                curvature: curvature / dot(&p, &p),
            });
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        rel = norm2(&r) / bnorm;
        if rel <= tol {
            return Ok(CgReport {
                solution: x,
                iterations: it,
                relative_residual: rel,
            });
        }
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence {
        iterations: maxit,
        estimate: rel,
    })
}

/// Per-iteration comparison of GMRES residuals with
/// `(1 − λ_min²/σ_max²)^{n/2} ‖r₀‖`.
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeRecord {
    /// `(1 − λ_min²/σ_max²)^{1/2}`.
    pub rate: f64,
    pub bounds: Vec<f64>,
    pub satisfied: Vec<bool>,
    pub all_satisfied: bool,
}

/// Outcome of a GMRES solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    /// `‖r_0‖, …, ‖r_n‖`.
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub envelope: Option<EnvelopeRecord>,
}

/// Full (unrestarted) GMRES from a zero initial guess; fails with
/// `NoConvergence` when `maxit` iterations do not reach `tol`.
pub fn gmres(a: &SparseRealMatrix, b: &[f64], tol: f64, maxit: usize) -> Result<SolveReport> {
    let report = gmres_history(a, b, tol, maxit);
    if report.converged {
        Ok(report)
    } else {
        Err(Error::NoConvergence {
            iterations: report.iterations,
            estimate: report.residuals.last().copied().unwrap_or(0.0)
                / report.residuals[0].max(f64::MIN_POSITIVE),
        })
    }
}

/// GMRES that always returns its report, converged or not.
pub fn gmres_history(a: &SparseRealMatrix, b: &[f64], tol: f64, maxit: usize) -> SolveReport {
    let n = a.n();
    let beta = norm2(b);
    let mut residuals = vec![beta];
    if beta == 0.0 {
        return SolveReport {
            solution: vec![0.0; n],
            residuals,
            iterations: 0,
            converged: true,
            envelope: None,
        };
    }
    let m = maxit.min(n);
    let mut basis: Vec<Vec<f64>> = vec![b.iter().map(|v| v / beta).collect()];
    // Columns of the (rotated) Hessenberg matrix.
    let mut hess: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut cs: Vec<f64> = Vec::with_capacity(m);
    let mut sn: Vec<f64> = Vec::with_capacity(m);
    let mut g = vec![beta];
    let mut converged = false;
    let mut k = 0;
    while k < m {
        let mut w = a.mul_vec(&basis[k]);
        let wnorm0 = norm2(&w);
        let mut h = vec![0.0; k + 2];
        for (j, v) in basis.iter().enumerate() {
            let hj = dot(&w, v);
            h[j] = hj;
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= hj * vi;
            }
        }
        let hnext = norm2(&w);
        h[k + 1] = hnext;
        for j in 0..k {
            let (c, s) = (cs[j], sn[j]);
            let t = c * h[j] + s * h[j + 1];
            h[j + 1] = -s * h[j] + c * h[j + 1];
            h[j] = t;
        }
        let r = h[k].hypot(h[k + 1]);
        let (c, s) = if r == 0.0 {
            (1.0, 0.0)
        } else {
            (h[k] / r, h[k + 1] / r)
        };
        h[k] = r;
        h[k + 1] = 0.0;
        cs.push(c);
        sn.push(s);
        let gk = g[k];
        g[k] = c * gk;
        g.push(-s * gk);
        hess.push(h);
        k += 1;
        let res = g[k].abs();
        residuals.push(res);
        let breakdown = hnext <= 1e-14 * wnorm0.max(f64::MIN_POSITIVE);
        if res <= tol * beta || breakdown {
            converged = true;
            break;
        }
        basis.push(w.iter().map(|v| v / hnext).collect());
    }
    // Back substitution for the least-squares coefficients.
    let mut y = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= hess[j][i] * y[j];
        }
        y[i] = s / hess[i][i];
    }
    let mut x = vec![0.0; n];
    for (yj, v) in y.iter().zip(&basis) {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi += yj * vi;
        }
    }
    SolveReport {
        solution: x,
        residuals,
        iterations: k,
        converged,
        envelope: None,
    }
}

/// Checks `‖r_n‖ ≤ (1 − λ²/σ²)^{n/2}‖r₀‖(1 + 1e−8)` at every iteration.
pub fn check_eisenstat(
    report: &SolveReport,
    sigma_max: f64,
    lambda_min_sym: f64,
) -> Result<EnvelopeRecord> {
    if !(lambda_min_sym > 0.0) {
        return Err(Error::IndefiniteSymmetricPart {
            curvature: lambda_min_sym,
        });
    }
    let ratio = (lambda_min_sym / sigma_max).min(1.0);
    let rate = (1.0 - ratio * ratio).max(0.0).sqrt();
    let r0 = report.residuals[0];
    let bounds: Vec<f64> = (0..report.residuals.len())
        .map(|n| rate.powi(n as i32) * r0)
        .collect();
    let satisfied: Vec<bool> = report
        .residuals
        .iter()
        .zip(&bounds)
        // the absolute floor only matters once the bound itself underflows
        // to round-off, e.g. for A = I
        .map(|(r, b)| *r <= b * (1.0 + 1e-8) + 1e-14 * r0)
        .collect();
    Ok(EnvelopeRecord {
        rate,
        all_satisfied: satisfied.iter().all(|&s| s),
        bounds,
        satisfied,
    })
}

/// CSV with columns `iteration,residual,envelope` (envelope empty when not
/// checked).
pub fn residual_csv(report: &SolveReport) -> String {
    let mut out = String::from("iteration,residual,envelope\n");
    for (n, r) in report.residuals.iter().enumerate() {
        let env = report
            .envelope
            .as_ref()
            .map(|e| format!("{:e}", e.bounds[n]))
            .unwrap_or_default();
        out.push_str(&format!("{n},{r:e},{env}\n"));
    }
    out
}
