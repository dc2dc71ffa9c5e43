//! A-priori bounds on the extremal singular value, the smallest eigenvalue
//! of the symmetric part and the condition number of the FVEM stiffness and
//! mass matrices, and checks of the underlying inequalities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assembly::{
    assemble_fem_stiffness, assemble_fvem_stiffness, assemble_lumped_mass, assemble_mass,
    jacobi_scale, MassConstants,
};
use crate::diffusion::{
    d_inverse_metric_size, d_inverse_uniform_deviation, element_data, global_spectral_bounds,
    DiffusionField, ElementDiffusionData,
};
use crate::error::{Error, Result};
use crate::mesh::{generate_mesh, mesh_stats, MeshParams, MeshStats, PatchIndex, SimplicialMesh};
use crate::sparse::{dot, SparseRealMatrix};
use crate::spectral::{condition_number, mass_extremal, SpectralOptions, SpectralReport};
use crate::tensor::norm;

/// Slack applied to inequalities whose constants use sampled seminorms.
pub const SEMINORM_SLACK: f64 = 1.05;

/// Deviation from `D⁻¹`-uniformity below which the uniform-mesh
/// specializations are reported.
pub const UNIFORM_DEVIATION_THRESHOLD: f64 = 0.1;

/// `C_∇̃ = (d/(d+1)) (√(d+1)/d!)^{2/d}`.
pub fn c_grad(dim: usize) -> f64 {
    let d = dim as f64;
    let fact: f64 = (1..=dim).map(|i| i as f64).product();
    d / (d + 1.0) * ((d + 1.0).sqrt() / fact).powf(2.0 / d)
}

/// Global and per-element constants entering the bounds.
#[derive(Debug, Clone, Serialize)]
pub struct BoundConstants {
    pub dim: usize,
    /// Sampled minimum eigenvalue `d̲` of `D`.
    pub d_lower: f64,
    pub d_upper: f64,
    pub p_max: usize,
    /// `C₀ = √p_max / d̲`.
    pub c0: f64,
    pub c_grad: f64,
    /// `H_h = max_K C_{D,h_K} h_K`.
    pub h_h: f64,
    /// `H_h < d̲`.
    pub fine: bool,
    /// Whether seminorms (hence `H_h`) are sampled surrogates rather than
    /// exact zeros.
    pub seminorm_surrogate: bool,
    #[serde(skip)]
    pub c_dh: Vec<f64>,
}

/// Mesh, field and constants gathered once for evaluating several bounds.
#[derive(Debug)]
pub struct BoundContext<'a> {
    pub mesh: &'a SimplicialMesh,
    pub field: &'a dyn DiffusionField,
    pub data: Vec<ElementDiffusionData>,
    pub constants: BoundConstants,
    pub stats: MeshStats,
    pub patches: PatchIndex,
    pub metric_size: f64,
    pub uniform_deviation: f64,
}

impl<'a> BoundContext<'a> {
    pub fn new(mesh: &'a SimplicialMesh, field: &'a dyn DiffusionField) -> Result<Self> {
        let data = element_data(field, mesh)?;
        let (d_lower, d_upper) = global_spectral_bounds(field, mesh)?;
        let patches = PatchIndex::new(mesh);
        let dim = mesh.dim();
        let d2 = (dim * dim) as f64;
        let c_dh: Vec<f64> = data
            .iter()
            .zip(mesh.geometries())
            .map(|(k, g)| d2 * (g.diameter * k.seminorm2 + k.seminorm1))
            .collect();
        let h_h = c_dh
            .iter()
            .zip(mesh.geometries())
            .map(|(c, g)| c * g.diameter)
            .fold(0.0, f64::max);
        let p_max = patches.p_max();
        let constants = BoundConstants {
            dim,
            d_lower,
            d_upper,
            p_max,
            c0: (p_max as f64).sqrt() / d_lower,
            c_grad: c_grad(dim),
            h_h,
            fine: h_h < d_lower,
            seminorm_surrogate: field.smoothness() == crate::diffusion::Smoothness::Smooth,
            c_dh,
        };
        Ok(BoundContext {
            metric_size: d_inverse_metric_size(&data, mesh),
            uniform_deviation: d_inverse_uniform_deviation(&data, mesh),
            stats: mesh_stats(mesh),
            mesh,
            field,
            data,
            constants,
            patches,
        })
    }

    fn require_fine(&self) -> Result<()> {
        if !self.constants.fine {
            return Err(Error::CoarseMeshRegime {
                h_h: self.constants.h_h,
                d_lower: self.constants.d_lower,
            });
        }
        Ok(())
    }

    /// `max_j Σ_{K∈ω_j} |K| μ_K` over interior vertices, for per-element
    /// values `mu`.
    fn max_patch_sum(&self, mu: &dyn Fn(usize) -> f64) -> f64 {
        self.mesh
            .interior_vertices()
            .iter()
            .map(|&j| {
                self.patches
                    .patch(j)
                    .iter()
                    .map(|&e| self.mesh.geometry(e).volume * mu(e))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    fn metric_norms(&self, uniform: bool) -> Vec<f64> {
        if uniform {
            vec![self.metric_size.powi(-2); self.data.len()]
        } else {
            self.data.iter().map(|k| k.metric_norm).collect()
        }
    }

    fn sigma_bound_with(&self, scaled: bool, norms: &[f64]) -> Result<f64> {
        let c = &self.constants;
        let d = c.dim as f64;
        if scaled {
            self.require_fine()?;
            Ok((1.0 + c.c0 * c.h_h) / (1.0 - c.h_h / c.d_lower) * (d + 1.0))
        } else {
            Ok(c.c_grad * (d + 1.0) * (1.0 + c.c0 * c.h_h) * self.max_patch_sum(&|e| norms[e]))
        }
    }

    /// Upper bound on `σ_max(A_FV)` or, with `scaled`, on `σ_max(S⁻¹A_FVS⁻¹)`.
    pub fn sigma_max_bound(&self, scaled: bool) -> Result<f64> {
        self.sigma_bound_with(scaled, &self.metric_norms(false))
    }

    fn lambda_factor_with(&self, scaled: bool, norms: &[f64]) -> Result<f64> {
        self.require_fine()?;
        let c = &self.constants;
        let n = self.mesh.n_elements() as f64;
        let dim = c.dim;
        let d = dim as f64;
        let reduction = 1.0 - c.h_h / c.d_lower;
        if !scaled {
            let divisor = match dim {
                1 => 1.0,
                2 => reduction * self.stats.log_factor,
                _ => reduction * self.stats.nonuniformity,
            };
            return Ok(c.d_lower / n / divisor);
        }
        let vols: Vec<f64> = self.mesh.geometries().iter().map(|g| g.volume).collect();
        let divisor = match dim {
            1 => {
                let mean = self.stats.mean_volume;
                let s: f64 = (0..vols.len())
                    .map(|e| {
                        let x = self.mesh.geometry(e).barycenter;
                        self.field.eval_on(e, &x).get(0, 0) * mean / vols[e]
                    })
                    .sum();
                s / (n * c.d_lower)
            }
            2 => {
                let weighted: f64 = vols.iter().zip(norms).map(|(v, m)| v * m).sum();
                let max_norm = norms.iter().copied().fold(0.0, f64::max);
                weighted / (n * (c.d_lower - c.h_h)) * (1.0 + (max_norm / weighted).ln().abs())
            }
            _ => {
                let s: f64 = vols
                    .iter()
                    .zip(norms)
                    .map(|(v, m)| v * m.powf(d / 2.0))
                    .sum();
                (s / (n * (c.d_lower - c.h_h).powf(d / 2.0))).powf(2.0 / d)
            }
        };
        Ok(n.powf(-2.0 / d) / divisor)
    }

    /// The `λ_min` lower bound divided by the generic constant `C`.
    pub fn lambda_min_factor(&self, scaled: bool) -> Result<f64> {
        self.lambda_factor_with(scaled, &self.metric_norms(false))
    }

    pub fn lambda_min_bound(&self, c: f64, scaled: bool) -> Result<f64> {
        Ok(c * self.lambda_min_factor(scaled)?)
    }

    /// Condition-number bound: the `σ_max` bound over the calibrated
    /// `λ_min` bound.
    pub fn cond_bound(&self, c: f64, scaled: bool) -> Result<f64> {
        Ok(self.sigma_max_bound(scaled)? / self.lambda_min_bound(c, scaled)?)
    }

    /// The condition-number bound with `M_K` replaced by `h_{D⁻¹}⁻² I`;
    /// `None` unless the mesh is close to `D⁻¹`-uniform.
    pub fn uniform_cond_bound(&self, c: f64, scaled: bool) -> Result<Option<f64>> {
        if self.uniform_deviation >= UNIFORM_DEVIATION_THRESHOLD {
            return Ok(None);
        }
        let norms = self.metric_norms(true);
        let sigma = self.sigma_bound_with(scaled, &norms)?;
        Ok(Some(sigma / (c * self.lambda_factor_with(scaled, &norms)?)))
    }

    /// Largest ratio `|a^FV_ij − a^FE_ij| / (slack · Σ_{K∈ω_ij} C_{D,h_K}|K|^{1/2}|φ_j|_{1,K})`;
    /// the entrywise difference inequality holds when this is at most one.
    pub fn entry_difference_ratio(&self) -> Result<f64> {
        let fv = assemble_fvem_stiffness(self.mesh, self.field)?;
        let fe = assemble_fem_stiffness(self.mesh, self.field)?;
        let diff = fv.sub(&fe);
        let mut rhs = SparseRealMatrix::from_triplets(fv.n(), Vec::new(), fv.symmetry());
        let mut t = Vec::new();
        for e in 0..self.mesh.n_elements() {
            let g = self.mesh.geometry(e);
            let simplex = self.mesh.simplex(e);
            for &vi in simplex {
                let Some(i) = self.mesh.dof(vi) else { continue };
                for (lj, &vj) in simplex.iter().enumerate() {
                    if let Some(j) = self.mesh.dof(vj) {
                        // |K|^{1/2} |φ_j|_{1,K} = |K| |∇φ_j|
                        t.push((
                            i,
                            j,
                            self.constants.c_dh[e] * g.volume * norm(&g.gradients[lj]),
                        ));
                    }
                }
            }
        }
        if !t.is_empty() {
            rhs = SparseRealMatrix::from_triplets(fv.n(), t, fv.symmetry());
        }
        let floor = 1e-12 * fe.norm_inf();
        let mut worst: f64 = 0.0;
        for (i, j, d) in diff.triplets() {
            let allowed = SEMINORM_SLACK * rhs.get(i, j) + floor;
            worst = worst.max(d.abs() / allowed);
        }
        Ok(worst)
    }

    /// Largest ratio `|uᵀ(A_FV − A_FE)u| / (slack · H_h |u|²_{1,Ω})` over
    /// seeded random probes.
    pub fn form_difference_ratio(&self, probes: usize, seed: u64) -> Result<f64> {
        let fv = assemble_fvem_stiffness(self.mesh, self.field)?;
        let fe = assemble_fem_stiffness(self.mesh, self.field)?;
        let diff = fv.sub(&fe);
        let scale = fe.norm_inf();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..probes {
            let u: Vec<f64> = (0..fv.n()).map(|_| rng.gen::<f64>() - 0.5).collect();
            let lhs = dot(&u, &diff.mul_vec(&u)).abs();
            let seminorm = h1_seminorm_squared(self.mesh, &u);
            let allowed =
                SEMINORM_SLACK * self.constants.h_h * seminorm + 1e-12 * scale * dot(&u, &u);
            worst = worst.max(lhs / allowed);
        }
        Ok(worst)
    }

    /// Largest ratio `a^FE_jj / (C_∇̃ Σ_{K∈ω_j} |K| ‖M_K‖)`.
    pub fn fe_diagonal_ratio(&self) -> Result<f64> {
        let fe = assemble_fem_stiffness(self.mesh, self.field)?;
        let diag = fe.diagonal();
        let mut worst: f64 = 0.0;
        for &j in self.mesh.interior_vertices() {
            let bound: f64 = self
                .patches
                .patch(j)
                .iter()
                .map(|&e| self.mesh.geometry(e).volume * self.data[e].metric_norm)
                .sum::<f64>()
                * self.constants.c_grad;
            worst = worst.max(diag[self.mesh.dof(j).unwrap()] / bound);
        }
        Ok(worst)
    }
}

/// `|u|²_{1,Ω}` of the piecewise linear function with interior nodal values
/// `u` and zero boundary values.
pub fn h1_seminorm_squared(mesh: &SimplicialMesh, u: &[f64]) -> f64 {
    let mut s = 0.0;
    for e in 0..mesh.n_elements() {
        let g = mesh.geometry(e);
        let mut grad = [0.0; 3];
        for (l, &v) in mesh.simplex(e).iter().enumerate() {
            if let Some(i) = mesh.dof(v) {
                for c in 0..3 {
                    grad[c] += u[i] * g.gradients[l][c];
                }
            }
        }
        s += g.volume * dot(&grad, &grad);
    }
    s
}

pub fn compute_constants(
    mesh: &SimplicialMesh,
    field: &dyn DiffusionField,
) -> Result<BoundConstants> {
    Ok(BoundContext::new(mesh, field)?.constants)
}

pub fn sigma_max_bound(
    mesh: &SimplicialMesh,
    field: &dyn DiffusionField,
    scaled: bool,
) -> Result<f64> {
    BoundContext::new(mesh, field)?.sigma_max_bound(scaled)
}

pub fn lambda_min_bound(
    mesh: &SimplicialMesh,
    field: &dyn DiffusionField,
    c: f64,
    scaled: bool,
) -> Result<f64> {
    BoundContext::new(mesh, field)?.lambda_min_bound(c, scaled)
}

pub fn cond_bound(
    mesh: &SimplicialMesh,
    field: &dyn DiffusionField,
    c: f64,
    scaled: bool,
) -> Result<f64> {
    BoundContext::new(mesh, field)?.cond_bound(c, scaled)
}

/// Exact conditioning of `A_FV` and `S⁻¹A_FVS⁻¹`.
#[derive(Debug, Clone, Serialize)]
pub struct ExactConditioning {
    pub unscaled: SpectralReport,
    pub scaled: Option<SpectralReport>,
}

pub fn exact_conditioning(
    a: &SparseRealMatrix,
    opts: &SpectralOptions,
) -> Result<ExactConditioning> {
    let unscaled = condition_number(a, opts)?;
    let scaled = match jacobi_scale(a) {
        Ok((s, _)) => Some(condition_number(&s, opts)?),
        Err(Error::NonpositiveDiagonal { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(ExactConditioning { unscaled, scaled })
}

/// Generic constant `C` fitted on a mesh family.
#[derive(Debug, Clone, Serialize)]
pub struct Calibration {
    pub dim: usize,
    pub field: String,
    pub scaled: bool,
    pub c: f64,
    /// Description of the calibration family.
    pub family: String,
    /// `(N, exact λ_min / bound with C = 1)` per mesh.
    pub ratios: Vec<(usize, f64)>,
}

/// `C = min` over the meshes of exact `λ_min` over the bound with `C = 1`.
pub fn calibrate_c(
    meshes: &[SimplicialMesh],
    field: &dyn DiffusionField,
    scaled: bool,
    opts: &SpectralOptions,
    family: &str,
) -> Result<Calibration> {
    if meshes.len() < 4 {
        return Err(Error::InsufficientFamily(meshes.len()));
    }
    let mut ratios = Vec::with_capacity(meshes.len());
    for mesh in meshes {
        let ctx = BoundContext::new(mesh, field)?;
        let factor = ctx.lambda_min_factor(scaled)?;
        let a = assemble_fvem_stiffness(mesh, field)?;
        let a = if scaled { jacobi_scale(&a)?.0 } else { a };
        let exact = condition_number(&a, opts)?.lambda_min_sym;
        ratios.push((mesh.n_elements(), exact / factor));
    }
    let c = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    Ok(Calibration {
        dim: meshes[0].dim(),
        field: field.name(),
        scaled,
        c,
        family: family.to_string(),
        ratios,
    })
}

/// Default uniform calibration sizes (cells per side) for each dimension.
pub fn default_calibration_sizes(dim: usize) -> Vec<usize> {
    match dim {
        1 => vec![16, 32, 64, 128],
        2 => vec![4, 8, 16, 32],
        _ => vec![3, 4, 6, 8],
    }
}

/// Calibrates `C` on uniform refinements of the unit interval, square or cube.
pub fn calibrate_uniform(
    dim: usize,
    field: &dyn DiffusionField,
    sizes: &[usize],
    scaled: bool,
    opts: &SpectralOptions,
) -> Result<Calibration> {
    let meshes = sizes
        .iter()
        .map(|&n| generate_mesh("uniform", &MeshParams::new(dim, n)))
        .collect::<Result<Vec<_>>>()?;
    calibrate_c(
        &meshes,
        field,
        scaled,
        opts,
        &format!("uniform d={dim} n={sizes:?}"),
    )
}

/// Bounds paired with exact values for one mesh and field. Bound fields
/// are `None` when their hypotheses fail (coarse mesh, missing calibration,
/// mesh not `D⁻¹`-uniform).
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub constants: BoundConstants,
    pub stats: MeshStats,
    pub metric_size: f64,
    pub uniform_deviation: f64,
    pub calibration_unscaled: Option<Calibration>,
    pub calibration_scaled: Option<Calibration>,
    #[serde(rename = "eigFV_max")]
    pub eig_fv_max: Option<f64>,
    #[serde(rename = "eigSFVS_max")]
    pub eig_sfvs_max: Option<f64>,
    #[serde(rename = "eigFV_min")]
    pub eig_fv_min: Option<f64>,
    #[serde(rename = "eigFVscaling_min")]
    pub eig_fv_scaling_min: Option<f64>,
    #[serde(rename = "cond-1")]
    pub cond1: Option<f64>,
    #[serde(rename = "cond-2")]
    pub cond2: Option<f64>,
    #[serde(rename = "cond-3")]
    pub cond3: Option<f64>,
    #[serde(rename = "cond-4")]
    pub cond4: Option<f64>,
    pub exact: Option<ExactConditioning>,
    /// bound / exact for each available pair (upper bounds) or
    /// exact / bound (lower bounds); at least one when the bound holds.
    pub slack: Vec<(String, f64)>,
}

/// Evaluates every bound for `mesh`/`field`; exact values are computed when
/// `opts` is given.
pub fn bound_report(
    mesh: &SimplicialMesh,
    field: &dyn DiffusionField,
    calibration_unscaled: Option<Calibration>,
    calibration_scaled: Option<Calibration>,
    opts: Option<&SpectralOptions>,
) -> Result<BoundReport> {
    let ctx = BoundContext::new(mesh, field)?;
    let ok = |r: Result<f64>| -> Result<Option<f64>> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(Error::CoarseMeshRegime { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let cu = calibration_unscaled.as_ref().map(|c| c.c);
    let cs = calibration_scaled.as_ref().map(|c| c.c);
    let eig_fv_max = ok(ctx.sigma_max_bound(false))?;
    let eig_sfvs_max = ok(ctx.sigma_max_bound(true))?;
    let eig_fv_min = cu
        .map(|c| ok(ctx.lambda_min_bound(c, false)))
        .transpose()?
        .flatten();
    let eig_fv_scaling_min = cs
        .map(|c| ok(ctx.lambda_min_bound(c, true)))
        .transpose()?
        .flatten();
    let cond1 = cu
        .map(|c| ok(ctx.cond_bound(c, false)))
        .transpose()?
        .flatten();
    let cond2 = cs
        .map(|c| ok(ctx.cond_bound(c, true)))
        .transpose()?
        .flatten();
    let uniform = |c: Option<f64>, scaled: bool| -> Result<Option<f64>> {
        match c {
            Some(c) => match ctx.uniform_cond_bound(c, scaled) {
                Ok(v) => Ok(v),
                Err(Error::CoarseMeshRegime { .. }) => Ok(None),
                Err(e) => Err(e),
            },
            None => Ok(None),
        }
    };
    let cond3 = uniform(cu, false)?;
    let cond4 = uniform(cs, true)?;
    let exact = match opts {
        Some(o) => {
            let a = assemble_fvem_stiffness(mesh, field)?;
            match exact_conditioning(&a, o) {
                Ok(x) => Some(x),
                Err(Error::IndefiniteSymmetricPart { .. }) => None,
                Err(e) => return Err(e),
            }
        }
        None => None,
    };
    let mut slack = Vec::new();
    if let Some(x) = &exact {
        let mut push = |name: &str, v: Option<f64>| {
            if let Some(v) = v {
                slack.push((name.to_string(), v));
            }
        };
        push("eigFV_max", eig_fv_max.map(|b| b / x.unscaled.sigma_max));
        push(
            "eigFV_min",
            eig_fv_min.map(|b| x.unscaled.lambda_min_sym / b),
        );
        push("cond-1", cond1.map(|b| b / x.unscaled.kappa));
        push("cond-3", cond3.map(|b| b / x.unscaled.kappa));
        if let Some(s) = &x.scaled {
            push("eigSFVS_max", eig_sfvs_max.map(|b| b / s.sigma_max));
            push(
                "eigFVscaling_min",
                eig_fv_scaling_min.map(|b| s.lambda_min_sym / b),
            );
            push("cond-2", cond2.map(|b| b / s.kappa));
            push("cond-4", cond4.map(|b| b / s.kappa));
        }
    }
    Ok(BoundReport {
        constants: ctx.constants.clone(),
        stats: ctx.stats.clone(),
        metric_size: ctx.metric_size,
        uniform_deviation: ctx.uniform_deviation,
        calibration_unscaled,
        calibration_scaled,
        eig_fv_max,
        eig_sfvs_max,
        eig_fv_min,
        eig_fv_scaling_min,
        cond1,
        cond2,
        cond3,
        cond4,
        exact,
        slack,
    })
}

/// Exact mass-matrix conditioning with its bounds.
#[derive(Debug, Clone, Serialize)]
pub struct MassBoundReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa: f64,
    /// `|ω_max| / |ω_min|` over interior vertices.
    pub patch_ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub scaled_kappa: f64,
    /// `1 / ((d+1)(m₁ − m₂))`.
    pub scaled_upper: f64,
    /// Eigenvalue sandwiches against the diagonal.
    pub max_diag: f64,
    pub min_diag: f64,
    pub lambda_max_upper: f64,
    pub lambda_min_lower: f64,
}

impl MassBoundReport {
    pub fn holds(&self, rel: f64) -> bool {
        let le = |a: f64, b: f64| a <= b * (1.0 + rel);
        le(self.lower, self.kappa)
            && le(self.kappa, self.upper)
            && le(self.scaled_kappa, self.scaled_upper)
            && le(self.max_diag, self.lambda_max)
            && le(self.lambda_max, self.lambda_max_upper)
            && le(self.lambda_min_lower, self.lambda_min)
            && le(self.lambda_min, self.min_diag)
    }
}

pub fn mass_bounds(mesh: &SimplicialMesh, opts: &SpectralOptions) -> Result<MassBoundReport> {
    let c = MassConstants::new(mesh.dim());
    let d1 = (mesh.dim() + 1) as f64;
    let m = assemble_mass(mesh);
    let (lambda_min, lambda_max) = mass_extremal(&m, opts)?;
    let (sm, _) = jacobi_scale(&m)?;
    let (slo, shi) = mass_extremal(&sm, opts)?;
    let patches = PatchIndex::new(mesh);
    let measures: Vec<f64> = mesh
        .interior_vertices()
        .iter()
        .map(|&v| patches.patch_measure(v))
        .collect();
    let wmax = measures.iter().copied().fold(0.0, f64::max);
    let wmin = measures.iter().copied().fold(f64::INFINITY, f64::min);
    let diag = m.diagonal();
    let max_diag = diag.iter().copied().fold(0.0, f64::max);
    let min_diag = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let scaled_upper = 1.0 / (d1 * c.gap());
    Ok(MassBoundReport {
        lambda_min,
        lambda_max,
        kappa: lambda_max / lambda_min,
        patch_ratio: wmax / wmin,
        lower: wmax / wmin,
        upper: scaled_upper * wmax / wmin,
        scaled_kappa: shi / slo,
        scaled_upper,
        max_diag,
        min_diag,
        lambda_max_upper: max_diag / (c.m1 * d1),
        lambda_min_lower: c.gap() / c.m1 * min_diag,
    })
}

/// Worst violations of the quadratic-form sandwiches between `M`, its
/// diagonal `M_D` and the lumped matrix, over random probes. Each entry is
/// `max(lower / uᵀMu, uᵀMu / upper)`; a value at most one means the
/// sandwich held on every probe.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub diagonal: f64,
    pub lumped: f64,
    /// `max_i max(m₁|ω_i| / M_ii,lump, M_ii,lump (d+1) / |ω_i|)`.
    pub lumped_entries: f64,
}

pub fn mass_sandwiches(mesh: &SimplicialMesh, probes: usize, seed: u64) -> SandwichReport {
    let c = MassConstants::new(mesh.dim());
    let d1 = (mesh.dim() + 1) as f64;
    let m = assemble_mass(mesh);
    let lump = assemble_lumped_mass(mesh);
    let md = SparseRealMatrix::from_diagonal(&m.diagonal());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let form = |a: &SparseRealMatrix, u: &[f64]| dot(u, &a.mul_vec(u));
    let (mut diagonal, mut lumped): (f64, f64) = (0.0, 0.0);
    for _ in 0..probes {
        let u: Vec<f64> = (0..m.n()).map(|_| rng.gen::<f64>() - 0.5).collect();
        let um = form(&m, &u);
        let ud = form(&md, &u);
        let ul = form(&lump, &u);
        diagonal = diagonal
            .max(c.gap() / c.m1 * ud / um)
            .max(um / (ud / (c.m1 * d1)));
        lumped = lumped
            .max(d1 * c.gap() * ul / um)
            .max(um / (ul / (c.m1 * d1)));
    }
    let patches = PatchIndex::new(mesh);
    let mut lumped_entries: f64 = 0.0;
    for &v in mesh.interior_vertices() {
        let i = mesh.dof(v).unwrap();
        let w = patches.patch_measure(v);
        let l = lump.get(i, i);
        lumped_entries = lumped_entries.max(c.m1 * w / l).max(l * d1 / w);
    }
    SandwichReport {
        diagonal,
        lumped,
        lumped_entries,
    }
}
