//! Browser bindings: every function takes plain numbers/strings and returns
//! a JSON string for the page script to draw.

use fvem::assembly::assemble_fvem_stiffness;
use fvem::assembly::jacobi_scale;
use fvem::bounds::{bound_report, calibrate_uniform, default_calibration_sizes};
use fvem::diffusion::field_by_name;
use fvem::experiments::mass_conditioning;
use fvem::mesh::{generate_mesh, MeshParams, SimplicialMesh};
use fvem::spectral::{condition_number, SpectralOptions};
use fvem::Error;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn json<T: Serialize>(value: &T) -> Result<String, JsValue> {
    serde_json::to_string(value).map_err(js_err)
}

fn planar_mesh(family: &str, n: usize, aspect: f64) -> Result<SimplicialMesh, JsValue> {
    let params = MeshParams::new(2, n).with_aspect(aspect);
    generate_mesh(family, &params).map_err(js_err)
}

#[derive(Serialize)]
struct DrawableMesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    /// Dual-cell boundary segments `[x0, y0, x1, y1]`.
    dual_segments: Vec<[f64; 4]>,
    max_aspect_ratio: f64,
}

/// A planar mesh with the segments of its barycentric dual cells.
#[wasm_bindgen]
pub fn mesh_with_dual(family: &str, n: usize, aspect: f64) -> Result<String, JsValue> {
    let mesh = planar_mesh(family, n, aspect)?;
    let mut dual_segments = Vec::new();
    for e in 0..mesh.n_elements() {
        for face in &mesh.dual_subdivision(e).faces {
            // each interior face appears once per side; draw it once
            if face.vertex < face.neighbor {
                for piece in &face.pieces {
                    dual_segments.push([piece[0][0], piece[0][1], piece[1][0], piece[1][1]]);
                }
            }
        }
    }
    json(&DrawableMesh {
        vertices: mesh.vertices().iter().map(|p| [p[0], p[1]]).collect(),
        triangles: mesh
            .simplices()
            .iter()
            .map(|s| [s[0], s[1], s[2]])
            .collect(),
        boundary: mesh.boundary_flags().to_vec(),
        dual_segments,
        max_aspect_ratio: mesh.max_aspect_ratio(),
    })
}

#[derive(Serialize)]
struct Conditioning {
    n_elements: usize,
    n_interior: usize,
    kappa_afv: Option<f64>,
    kappa_sas: Option<f64>,
    fine: bool,
    h_h: f64,
    d_lower: f64,
    bound_cond1: Option<f64>,
    bound_cond2: Option<f64>,
    bound_eig_fv_max: Option<f64>,
    sigma_max: Option<f64>,
}

/// Exact `κ(A_FV)`, `κ(S⁻¹A_FVS⁻¹)` and their bounds for a planar mesh and
/// a named diffusion field.
#[wasm_bindgen]
pub fn conditioning(family: &str, n: usize, aspect: f64, field: &str) -> Result<String, JsValue> {
    let mesh = planar_mesh(family, n, aspect)?;
    let f = field_by_name(field, 2).map_err(js_err)?;
    let opts = SpectralOptions::experiment();
    let calibrate = |scaled| match calibrate_uniform(
        2,
        f.as_ref(),
        &default_calibration_sizes(2),
        scaled,
        &opts,
    ) {
        Ok(c) => Ok(Some(c)),
        Err(Error::CoarseMeshRegime { .. }) => Ok(None),
        Err(e) => Err(js_err(e)),
    };
    let report = bound_report(&mesh, f.as_ref(), calibrate(false)?, calibrate(true)?, None)
        .map_err(js_err)?;
    let a = assemble_fvem_stiffness(&mesh, f.as_ref()).map_err(js_err)?;
    let exact = condition_number(&a, &opts).ok();
    let scaled = jacobi_scale(&a)
        .ok()
        .and_then(|(s, _)| condition_number(&s, &opts).ok());
    json(&Conditioning {
        n_elements: mesh.n_elements(),
        n_interior: mesh.n_interior(),
        kappa_afv: exact.as_ref().map(|r| r.kappa),
        kappa_sas: scaled.map(|r| r.kappa),
        fine: report.constants.fine,
        h_h: report.constants.h_h,
        d_lower: report.constants.d_lower,
        bound_cond1: report.cond1,
        bound_cond2: report.cond2,
        bound_eig_fv_max: report.eig_fv_max,
        sigma_max: exact.map(|r| r.sigma_max),
    })
}

#[derive(Serialize)]
struct MassPoint {
    aspect: f64,
    max_aspect_ratio: f64,
    kappa_m: f64,
    kappa_sms: f64,
}

/// Mass-matrix conditioning with and without Jacobi scaling over a sweep of
/// aspect-ratio targets (comma separated).
#[wasm_bindgen]
pub fn mass_aspect_sweep(n: usize, aspects: &str) -> Result<String, JsValue> {
    let opts = SpectralOptions::experiment();
    let mut points = Vec::new();
    for a in aspects.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let aspect: f64 = a.parse().map_err(js_err)?;
        let mesh = planar_mesh("aspect2d", n, aspect)?;
        let (kappa_m, kappa_sms) = mass_conditioning(&mesh, &opts).map_err(js_err)?;
        points.push(MassPoint {
            aspect,
            max_aspect_ratio: mesh.max_aspect_ratio(),
            kappa_m,
            kappa_sms,
        });
    }
    json(&points)
}
