use std::collections::BTreeMap;

use super::SimplicialMesh;

/// Element patches and interior-vertex adjacency.
///
/// All indices are vertex ids. Neighbor lists contain interior vertices only
/// and always include the vertex itself.
#[derive(Debug, Clone)]
pub struct PatchIndex {
    patches: Vec<Vec<usize>>,
    patch_measure: Vec<f64>,
    neighbors: Vec<Vec<usize>>,
    pair_measure: Vec<Vec<f64>>,
    p_max: usize,
    volumes: Vec<f64>,
}

impl PatchIndex {
    pub fn new(mesh: &SimplicialMesh) -> Self {
        let patches = mesh.vertex_elements();
        let patch_measure = patches
            .iter()
            .map(|p| p.iter().map(|&e| mesh.geometry(e).volume).sum())
            .collect();
        let mut neighbors = vec![Vec::new(); mesh.n_vertices()];
        let mut pair_measure = vec![Vec::new(); mesh.n_vertices()];
        for &j in mesh.interior_vertices() {
            let mut shared: BTreeMap<usize, f64> = BTreeMap::new();
            for &e in &patches[j] {
                let vol = mesh.geometry(e).volume;
                for &i in mesh.simplex(e) {
                    if !mesh.is_boundary(i) {
                        *shared.entry(i).or_insert(0.0) += vol;
                    }
                }
            }
            neighbors[j] = shared.keys().copied().collect();
            pair_measure[j] = shared.values().copied().collect();
        }
        let p_max = mesh
            .interior_vertices()
            .iter()
            .map(|&j| neighbors[j].len())
            .max()
            .unwrap_or(0);
        PatchIndex {
            patches,
            patch_measure,
            neighbors,
            pair_measure,
            p_max,
            volumes: mesh.geometries().iter().map(|g| g.volume).collect(),
        }
    }

    /// Elements incident to vertex `j`.
    pub fn patch(&self, j: usize) -> &[usize] {
        &self.patches[j]
    }

    /// `|ω_j|`.
    pub fn patch_measure(&self, j: usize) -> f64 {
        self.patch_measure[j]
    }

    /// Interior vertices sharing an element with interior vertex `j`, sorted, `j` included.
    pub fn neighbors(&self, j: usize) -> &[usize] {
        &self.neighbors[j]
    }

    /// `|ω_ij|` for each entry of `neighbors(j)`.
    pub fn pair_measures(&self, j: usize) -> &[f64] {
        &self.pair_measure[j]
    }

    /// `|ω_ij|` for any vertex pair, zero when the patches are disjoint.
    pub fn pair_measure(&self, i: usize, j: usize) -> f64 {
        if let Ok(k) = self.neighbors[j].binary_search(&i) {
            return self.pair_measure[j][k];
        }
        self.patches[i]
            .iter()
            .filter(|e| self.patches[j].contains(e))
            .map(|&e| self.volumes[e])
            .sum()
    }

    /// `p_{N_j}`: size of the neighbor set including `j`.
    pub fn p_count(&self, j: usize) -> usize {
        self.neighbors[j].len()
    }

    pub fn p_max(&self) -> usize {
        self.p_max
    }
}
