//! Reproducible sweeps for the four numerical examples: exact conditioning,
//! bounds, mass conditioning and GMRES histories, written as CSV rows.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::assembly::{assemble_fvem_stiffness, assemble_load, assemble_mass, jacobi_scale};
use crate::bounds::{
    bound_report, calibrate_uniform, default_calibration_sizes, mass_bounds, Calibration,
};
use crate::diffusion::{field_by_name, DiffusionField};
use crate::error::{Error, Result};
use crate::krylov::{check_eisenstat, gmres_history};
use crate::mesh::{generate_mesh, MeshParams, SimplicialMesh};
use crate::sparse::SparseRealMatrix;
use crate::spectral::{condition_number, mass_extremal, SpectralOptions, SpectralReport};

/// Quantities an experiment can compute for each sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quantity {
    Kappa,
    Bounds,
    Mass,
    Gmres,
}

impl FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kappa" => Ok(Quantity::Kappa),
            "bounds" => Ok(Quantity::Bounds),
            "mass" => Ok(Quantity::Mass),
            "gmres" => Ok(Quantity::Gmres),
            _ => Err(Error::InvalidParams(format!("unknown quantity {s:?}"))),
        }
    }
}

pub const ALL_QUANTITIES: [Quantity; 4] = [
    Quantity::Kappa,
    Quantity::Bounds,
    Quantity::Mass,
    Quantity::Gmres,
];

/// One sweep: a mesh family over increasing size (or aspect) parameters.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub id: Option<usize>,
    pub family: String,
    pub dim: usize,
    pub field: String,
    /// Cells per side for each point, or the fixed value for aspect sweeps.
    pub sizes: Vec<usize>,
    /// Aspect-ratio targets; empty for size sweeps.
    pub aspects: Vec<f64>,
    pub quantities: Vec<Quantity>,
    pub gmres_tol: f64,
    pub gmres_maxit: usize,
}

impl ExperimentSpec {
    /// The sweep of numbered example `id`; `full` selects the largest sizes.
    pub fn example(id: usize, full: bool) -> Result<Self> {
        let (family, dim, field, sizes, aspects): (&str, usize, &str, Vec<usize>, Vec<f64>) =
            match id {
                1 => (
                    "chebyshev1d",
                    1,
                    "one_plus_exp_x5",
                    (4..=12).map(|k| 1 << k).collect(),
                    vec![],
                ),
                2 => ("skew2d", 2, "identity", vec![4, 8, 16, 32, 64], vec![]),
                3 => ("skew3d", 3, "identity", vec![4, 6, 8, 12], vec![]),
                4 => (
                    "aspect2d",
                    2,
                    "rotated_anisotropic_0.01",
                    vec![if full { 127 } else { 63 }],
                    vec![4.0, 16.0, 64.0, 125.0, 256.0],
                ),
                _ => return Err(Error::InvalidParams(format!("unknown example {id}"))),
            };
        let spec = ExperimentSpec {
            id: Some(id),
            family: family.into(),
            dim,
            field: field.into(),
            sizes,
            aspects,
            quantities: ALL_QUANTITIES.to_vec(),
            gmres_tol: 1e-10,
            gmres_maxit: 500,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        let sizes: Vec<f64> = self.sizes.iter().map(|&n| n as f64).collect();
        if self.sizes.is_empty() || !increasing(&sizes) || !increasing(&self.aspects) {
            return Err(Error::InvalidParams(
                "sweep values must be strictly increasing".into(),
            ));
        }
        if !self.aspects.is_empty() && self.sizes.len() != 1 {
            return Err(Error::InvalidParams(
                "aspect sweeps take a single size".into(),
            ));
        }
        Ok(())
    }

    fn points(&self) -> Vec<MeshParams> {
        if self.aspects.is_empty() {
            self.sizes
                .iter()
                .map(|&n| MeshParams::new(self.dim, n))
                .collect()
        } else {
            self.aspects
                .iter()
                .map(|&a| MeshParams::new(self.dim, self.sizes[0]).with_aspect(a))
                .collect()
        }
    }

    fn wants(&self, q: Quantity) -> bool {
        self.quantities.contains(&q)
    }
}

/// Results for one sweep point; `None` marks an unavailable quantity.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ExperimentRow {
    pub n_elements: usize,
    pub n_param: usize,
    pub aspect: Option<f64>,
    pub n_interior: usize,
    pub max_aspect_ratio: f64,
    pub fine: Option<bool>,
    pub h_h: Option<f64>,
    pub d_lower: Option<f64>,
    pub positive_definite: Option<bool>,
    pub kappa_afv: Option<f64>,
    pub sigma_max: Option<f64>,
    pub lambda_min: Option<f64>,
    pub kappa_sas: Option<f64>,
    pub sigma_max_sas: Option<f64>,
    pub lambda_min_sas: Option<f64>,
    pub bound_eig_fv_max: Option<f64>,
    pub bound_eig_fv_min: Option<f64>,
    pub bound_cond1: Option<f64>,
    pub bound_eig_sfvs_max: Option<f64>,
    pub bound_eig_fv_scaling_min: Option<f64>,
    pub bound_cond2: Option<f64>,
    pub bound_cond3: Option<f64>,
    pub bound_cond4: Option<f64>,
    pub kappa_m: Option<f64>,
    pub kappa_sms: Option<f64>,
    pub bound_kappa_m_lower: Option<f64>,
    pub bound_kappa_m_upper: Option<f64>,
    pub gmres_iters: Option<usize>,
    pub gmres_iters_sas: Option<usize>,
    pub envelope_afv: Option<bool>,
    pub envelope_sas: Option<bool>,
}

/// CSV column names, in row order.
pub const CSV_COLUMNS: [&str; 31] = [
    "N",
    "n_param",
    "aspect",
    "n_interior",
    "max_aspect_ratio",
    "fine",
    "H_h",
    "d_lower",
    "positive_definite",
    "kappa_AFV",
    "sigma_max",
    "lambda_min",
    "kappa_SAS",
    "sigma_max_SAS",
    "lambda_min_SAS",
    "bound_eigFV_max",
    "bound_eigFV_min",
    "bound_cond1",
    "bound_eigSFVS_max",
    "bound_eigFVscaling_min",
    "bound_cond2",
    "bound_cond3",
    "bound_cond4",
    "kappa_M",
    "kappa_SMS",
    "bound_kappaM_lower",
    "bound_kappaM_upper",
    "gmres_iters",
    "gmres_iters_SAS",
    "envelope_AFV",
    "envelope_SAS",
];

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn real(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl ExperimentRow {
    fn cells(&self) -> Vec<String> {
        vec![
            self.n_elements.to_string(),
            self.n_param.to_string(),
            real(self.aspect),
            self.n_interior.to_string(),
            format!("{:e}", self.max_aspect_ratio),
            cell(self.fine),
            real(self.h_h),
            real(self.d_lower),
            cell(self.positive_definite),
            real(self.kappa_afv),
            real(self.sigma_max),
            real(self.lambda_min),
            real(self.kappa_sas),
            real(self.sigma_max_sas),
            real(self.lambda_min_sas),
            real(self.bound_eig_fv_max),
            real(self.bound_eig_fv_min),
            real(self.bound_cond1),
            real(self.bound_eig_sfvs_max),
            real(self.bound_eig_fv_scaling_min),
            real(self.bound_cond2),
            real(self.bound_cond3),
            real(self.bound_cond4),
            real(self.kappa_m),
            real(self.kappa_sms),
            real(self.bound_kappa_m_lower),
            real(self.bound_kappa_m_upper),
            cell(self.gmres_iters),
            cell(self.gmres_iters_sas),
            cell(self.envelope_afv),
            cell(self.envelope_sas),
        ]
    }
}

/// Comma-separated rows with a header line and LF endings.
pub fn rows_to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.cells().join(","));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub calibration_unscaled: Option<Calibration>,
    pub calibration_scaled: Option<Calibration>,
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentResult {
    pub fn csv(&self) -> String {
        rows_to_csv(&self.rows)
    }
}

/// Calibrates `C` on uniform meshes; `None` when the field is too rough for
/// the fine-mesh regime on every affordable calibration mesh.
fn try_calibrate(
    dim: usize,
    field: &dyn DiffusionField,
    scaled: bool,
    opts: &SpectralOptions,
) -> Result<Option<Calibration>> {
    match calibrate_uniform(dim, field, &default_calibration_sizes(dim), scaled, opts) {
        Ok(c) => Ok(Some(c)),
        Err(Error::CoarseMeshRegime { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn conditioning(a: &SparseRealMatrix, opts: &SpectralOptions) -> Result<Option<SpectralReport>> {
    match condition_number(a, opts) {
        Ok(r) => Ok(Some(r)),
        Err(Error::IndefiniteSymmetricPart { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// GMRES iterations and envelope outcome; the envelope is only checked when
/// the symmetric part is positive definite.
fn gmres_point(
    a: &SparseRealMatrix,
    b: &[f64],
    report: Option<&SpectralReport>,
    spec: &ExperimentSpec,
) -> Result<(usize, Option<bool>)> {
    let solve = gmres_history(a, b, spec.gmres_tol, spec.gmres_maxit);
    let envelope = match report {
        Some(r) => Some(check_eisenstat(&solve, r.sigma_max, r.lambda_min_sym)?.all_satisfied),
        None => None,
    };
    Ok((solve.iterations, envelope))
}

/// Runs every point of `spec` and collects one row per mesh.
pub fn run_experiment(spec: &ExperimentSpec, opts: &SpectralOptions) -> Result<ExperimentResult> {
    spec.validate()?;
    let field = field_by_name(&spec.field, spec.dim)?;
    let (cal_u, cal_s) = if spec.wants(Quantity::Bounds) {
        (
            try_calibrate(spec.dim, field.as_ref(), false, opts)?,
            try_calibrate(spec.dim, field.as_ref(), true, opts)?,
        )
    } else {
        (None, None)
    };
    let mut rows = Vec::new();
    for params in spec.points() {
        let mesh = generate_mesh(&spec.family, &params)?;
        rows.push(run_point(
            spec,
            &mesh,
            &params,
            field.as_ref(),
            &cal_u,
            &cal_s,
            opts,
        )?);
    }
    Ok(ExperimentResult {
        spec: spec.clone(),
        calibration_unscaled: cal_u,
        calibration_scaled: cal_s,
        rows,
    })
}

fn run_point(
    spec: &ExperimentSpec,
    mesh: &SimplicialMesh,
    params: &MeshParams,
    field: &dyn DiffusionField,
    cal_u: &Option<Calibration>,
    cal_s: &Option<Calibration>,
    opts: &SpectralOptions,
) -> Result<ExperimentRow> {
    let mut row = ExperimentRow {
        n_elements: mesh.n_elements(),
        n_param: params.n,
        aspect: params.aspect.filter(|_| !spec.aspects.is_empty()),
        n_interior: mesh.n_interior(),
        max_aspect_ratio: mesh.max_aspect_ratio(),
        ..Default::default()
    };
    let a = assemble_fvem_stiffness(mesh, field)?;
    let (sa, s) = jacobi_scale(&a)?;
    let needs_exact = spec.wants(Quantity::Kappa) || spec.wants(Quantity::Gmres);
    let (exact, exact_scaled) = if needs_exact {
        (conditioning(&a, opts)?, conditioning(&sa, opts)?)
    } else {
        (None, None)
    };
    if spec.wants(Quantity::Kappa) {
        row.positive_definite = Some(exact.is_some());
        if let Some(r) = &exact {
            row.kappa_afv = Some(r.kappa);
            row.sigma_max = Some(r.sigma_max);
            row.lambda_min = Some(r.lambda_min_sym);
        }
        if let Some(r) = &exact_scaled {
            row.kappa_sas = Some(r.kappa);
            row.sigma_max_sas = Some(r.sigma_max);
            row.lambda_min_sas = Some(r.lambda_min_sym);
        }
    }
    if spec.wants(Quantity::Bounds) {
        let b = bound_report(mesh, field, cal_u.clone(), cal_s.clone(), None)?;
        row.fine = Some(b.constants.fine);
        row.h_h = Some(b.constants.h_h);
        row.d_lower = Some(b.constants.d_lower);
        row.bound_eig_fv_max = b.eig_fv_max;
        row.bound_eig_fv_min = b.eig_fv_min;
        row.bound_cond1 = b.cond1;
        row.bound_eig_sfvs_max = b.eig_sfvs_max;
        row.bound_eig_fv_scaling_min = b.eig_fv_scaling_min;
        row.bound_cond2 = b.cond2;
        row.bound_cond3 = b.cond3;
        row.bound_cond4 = b.cond4;
    }
    if spec.wants(Quantity::Mass) {
        let mb = mass_bounds(mesh, opts)?;
        row.kappa_m = Some(mb.kappa);
        row.kappa_sms = Some(mb.scaled_kappa);
        row.bound_kappa_m_lower = Some(mb.lower);
        row.bound_kappa_m_upper = Some(mb.upper);
    }
    if spec.wants(Quantity::Gmres) {
        let b = assemble_load(mesh, &|_| 1.0);
        let (it, env) = gmres_point(&a, &b, exact.as_ref(), spec)?;
        row.gmres_iters = Some(it);
        row.envelope_afv = env;
        let sb: Vec<f64> = b.iter().zip(&s).map(|(v, si)| v / si).collect();
        let (it, env) = gmres_point(&sa, &sb, exact_scaled.as_ref(), spec)?;
        row.gmres_iters_sas = Some(it);
        row.envelope_sas = env;
    }
    Ok(row)
}

/// Mass-matrix conditioning with and without Jacobi scaling.
pub fn mass_conditioning(mesh: &SimplicialMesh, opts: &SpectralOptions) -> Result<(f64, f64)> {
    let m = assemble_mass(mesh);
    let (lo, hi) = mass_extremal(&m, opts)?;
    let (sm, _) = jacobi_scale(&m)?;
    let (slo, shi) = mass_extremal(&sm, opts)?;
    Ok((hi / lo, shi / slo))
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
