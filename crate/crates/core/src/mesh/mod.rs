//! Simplicial meshes in one to three dimensions.

mod dual;
mod element;
mod generate;
mod patch;
mod stats;

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use dual::{chambers, face_pieces, DualCellGeometry, DualFace};
pub use element::{reference_simplex, simplex_measure, ElementGeometry};
pub use generate::{chebyshev_nodes, generate_mesh, MeshFamily, MeshParams};
pub use patch::PatchIndex;
pub use stats::{mesh_stats, MeshStats};

pub(crate) use dual::permutations;

use crate::error::{Error, Result};
use crate::tensor::Point;

/// Generator provenance recorded alongside generated meshes.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct MeshMetadata {
    pub family: String,
    pub params: String,
    /// Largest element aspect ratio (longest edge over shortest altitude).
    pub max_aspect_ratio: f64,
    /// Free-form description of the generator layout.
    pub layout: String,
}

/// A conforming simplicial mesh with validated, positively sized elements.
#[derive(Debug, Clone)]
pub struct SimplicialMesh {
    dim: usize,
    vertices: Vec<Point>,
    simplices: Vec<Vec<usize>>,
    boundary: Vec<bool>,
    domain_measure: f64,
    interior: Vec<usize>,
    dof: Vec<Option<usize>>,
    geometry: Vec<ElementGeometry>,
    metadata: MeshMetadata,
}

/// On-disk mesh representation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshFile {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub simplices: Vec<Vec<usize>>,
    pub boundary: Vec<u8>,
    pub domain_measure: f64,
}

/// Validates the raw arrays and builds a mesh. When `domain_measure` is
/// given it must match the sum of element volumes to 1e-12 relative.
pub fn build_mesh(
    dim: usize,
    vertices: Vec<Point>,
    simplices: Vec<Vec<usize>>,
    boundary: Vec<bool>,
    domain_measure: Option<f64>,
) -> Result<SimplicialMesh> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InconsistentDimension(format!(
            "mesh dimension must be 1, 2 or 3, got {dim}"
        )));
    }
    if boundary.len() != vertices.len() {
        return Err(Error::InconsistentDimension(format!(
            "{} boundary flags for {} vertices",
            boundary.len(),
            vertices.len()
        )));
    }
    let mut geometry = Vec::with_capacity(simplices.len());
    for (e, simplex) in simplices.iter().enumerate() {
        if simplex.len() != dim + 1 {
            return Err(Error::InconsistentDimension(format!(
                "element {e} has {} vertices, expected {}",
                simplex.len(),
                dim + 1
            )));
        }
        if let Some(&bad) = simplex.iter().find(|&&v| v >= vertices.len()) {
            return Err(Error::IndexOutOfRange {
                element: e,
                index: bad,
                n_vertices: vertices.len(),
            });
        }
        let points: Vec<Point> = simplex.iter().map(|&v| vertices[v]).collect();
        let degenerate = |volume: f64, diameter: f64| Error::DegenerateElement {
            element: e,
            volume,
            threshold: 1e-14 * diameter.powi(dim as i32),
        };
        let g = ElementGeometry::new(&points, dim).ok_or_else(|| degenerate(0.0, 0.0))?;
        if g.volume <= 1e-14 * g.diameter.powi(dim as i32) {
            return Err(degenerate(g.volume, g.diameter));
        }
        geometry.push(g);
    }
    let total: f64 = geometry.iter().map(|g| g.volume).sum();
    let domain_measure = match domain_measure {
        Some(m) => {
            if (m - total).abs() > 1e-12 * m.abs().max(total) {
                return Err(Error::InvalidParams(format!(
                    "domain measure {m} does not match total element volume {total}"
                )));
            }
            m
        }
        None => total,
    };
    let mut dof = vec![None; vertices.len()];
    let mut interior = Vec::new();
    for (v, &b) in boundary.iter().enumerate() {
        if !b {
            dof[v] = Some(interior.len());
            interior.push(v);
        }
    }
    Ok(SimplicialMesh {
        dim,
        vertices,
        simplices,
        boundary,
        domain_measure,
        interior,
        dof,
        geometry,
        metadata: MeshMetadata::default(),
    })
}

impl SimplicialMesh {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Number of elements `N`.
    pub fn n_elements(&self) -> usize {
        self.simplices.len()
    }

    /// Number of interior vertices `N_vi`.
    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn simplices(&self) -> &[Vec<usize>] {
        &self.simplices
    }

    pub fn simplex(&self, element: usize) -> &[usize] {
        &self.simplices[element]
    }

    pub fn is_boundary(&self, vertex: usize) -> bool {
        self.boundary[vertex]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    /// Interior vertex ids, in the order used for matrix rows and columns.
    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior
    }

    /// Row index of a vertex, `None` for boundary vertices.
    pub fn dof(&self, vertex: usize) -> Option<usize> {
        self.dof[vertex]
    }

    pub fn domain_measure(&self) -> f64 {
        self.domain_measure
    }

    pub fn geometry(&self, element: usize) -> &ElementGeometry {
        &self.geometry[element]
    }

    pub fn geometries(&self) -> &[ElementGeometry] {
        &self.geometry
    }

    pub fn element_points(&self, element: usize) -> Vec<Point> {
        self.simplices[element]
            .iter()
            .map(|&v| self.vertices[v])
            .collect()
    }

    pub fn metadata(&self) -> &MeshMetadata {
        &self.metadata
    }

    pub fn with_metadata(mut self, metadata: MeshMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn max_aspect_ratio(&self) -> f64 {
        self.geometry
            .iter()
            .map(|g| g.aspect_ratio)
            .fold(0.0, f64::max)
    }

    pub fn to_file(&self) -> MeshFile {
        MeshFile {
            dim: self.dim,
            vertices: self
                .vertices
                .iter()
                .map(|p| p[..self.dim].to_vec())
                .collect(),
            simplices: self.simplices.clone(),
            boundary: self.boundary.iter().map(|&b| b as u8).collect(),
            domain_measure: self.domain_measure,
        }
    }

    pub fn from_file(file: MeshFile) -> Result<Self> {
        let dim = file.dim;
        let mut vertices = Vec::with_capacity(file.vertices.len());
        for (v, coords) in file.vertices.iter().enumerate() {
            if coords.len() != dim {
                return Err(Error::InconsistentDimension(format!(
                    "vertex {v} has {} coordinates, expected {dim}",
                    coords.len()
                )));
            }
            let mut p = [0.0; 3];
            p[..dim].copy_from_slice(coords);
            vertices.push(p);
        }
        let boundary = file
            .boundary
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::Parse(format!(
                    "boundary flag must be 0 or 1, got {other}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        build_mesh(
            dim,
            vertices,
            file.simplices,
            boundary,
            Some(file.domain_measure),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Faces lying on the domain boundary, as `(element, local vertex
    /// opposite the face)`, in element order.
    pub fn boundary_faces(&self) -> Vec<(usize, usize)> {
        let key = |e: usize, m: usize| {
            let mut f: Vec<usize> = self.simplices[e]
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != m)
                .map(|(_, &v)| v)
                .collect();
            f.sort_unstable();
            f
        };
        let mut count: HashMap<Vec<usize>, usize> = HashMap::new();
        for e in 0..self.n_elements() {
            for m in 0..=self.dim {
                *count.entry(key(e, m)).or_insert(0) += 1;
            }
        }
        let mut out = Vec::new();
        for e in 0..self.n_elements() {
            for m in 0..=self.dim {
                if count[&key(e, m)] == 1 {
                    out.push((e, m));
                }
            }
        }
        out
    }

    /// Vertex-to-element incidence for all vertices.
    pub fn vertex_elements(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.n_vertices()];
        for (e, s) in self.simplices.iter().enumerate() {
            for &v in s {
                inc[v].push(e);
            }
        }
        inc
    }
}
