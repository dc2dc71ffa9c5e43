use serde::Serialize;

use super::SimplicialMesh;

/// Element-size statistics entering the condition-number bounds.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MeshStats {
    pub n_elements: usize,
    pub n_interior: usize,
    /// `|K̄| = |Ω| / N`.
    pub mean_volume: f64,
    /// `|K_min|`; ties resolve to the first element attaining it.
    pub min_volume: f64,
    pub min_element: usize,
    /// `1 + ln(|K̄| / |K_min|)`.
    pub log_factor: f64,
    /// `((1/N) Σ_K (|K̄|/|K|)^((d-2)/2))^(2/d)`.
    pub nonuniformity: f64,
    pub max_aspect_ratio: f64,
}

pub fn mesh_stats(mesh: &SimplicialMesh) -> MeshStats {
    let n = mesh.n_elements();
    let d = mesh.dim() as f64;
    let mean_volume = mesh.domain_measure() / n as f64;
    let (min_element, min_volume) =
        mesh.geometries()
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(ie, v), (e, g)| {
                if g.volume < v {
                    (e, g.volume)
                } else {
                    (ie, v)
                }
            });
    let sum: f64 = mesh
        .geometries()
        .iter()
        .map(|g| (mean_volume / g.volume).powf((d - 2.0) / 2.0))
        .sum();
    MeshStats {
        n_elements: n,
        n_interior: mesh.n_interior(),
        mean_volume,
        min_volume,
        min_element,
        log_factor: 1.0 + (mean_volume / min_volume).ln(),
        nonuniformity: (sum / n as f64).powf(2.0 / d),
        max_aspect_ratio: mesh.max_aspect_ratio(),
    }
}
