//! Assembly of the FVEM and FE stiffness matrices, the FVEM mass matrices
//! and the load vector, with homogeneous Dirichlet vertices eliminated.

use serde::Serialize;

use crate::diffusion::{check_dims, check_spd, element_average, volume_rule, DiffusionField};
use crate::error::{Error, Result};
use crate::mesh::{chambers, simplex_measure, SimplicialMesh};
use crate::quadrature::SimplexRule;
use crate::sparse::{SparseRealMatrix, Symmetry};
use crate::tensor::{dot, mix, Point, Tensor};

/// Row/column numbering used by the FVEM assemblers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Indexing {
    /// Interior vertices only (Dirichlet elimination).
    Interior,
    /// Every vertex, boundary rows and columns included.
    Full,
}

fn index_of(mesh: &SimplicialMesh, v: usize, indexing: Indexing) -> Option<usize> {
    match indexing {
        Indexing::Interior => mesh.dof(v),
        Indexing::Full => Some(v),
    }
}

fn size_of(mesh: &SimplicialMesh, indexing: Indexing) -> usize {
    match indexing {
        Indexing::Interior => mesh.n_interior(),
        Indexing::Full => mesh.n_vertices(),
    }
}

/// FVEM stiffness matrix `a_ij = −∫_{∂K*_{P_i}} (D∇φ_j)·n ds`, accumulated
/// element by element over the interior dual faces.
pub fn assemble_fvem_stiffness(
    mesh: &SimplicialMesh,
    field: &dyn DiffusionField,
) -> Result<SparseRealMatrix> {
    assemble_fvem(mesh, field, Indexing::Interior)
}

/// FVEM stiffness over all vertices, boundary rows and columns kept.
pub fn assemble_fvem_stiffness_full(
    mesh: &SimplicialMesh,
    field: &dyn DiffusionField,
) -> Result<SparseRealMatrix> {
    assemble_fvem(mesh, field, Indexing::Full)
}

fn assemble_fvem(
    mesh: &SimplicialMesh,
    field: &dyn DiffusionField,
    indexing: Indexing,
) -> Result<SparseRealMatrix> {
    check_dims(field, mesh)?;
    let d = mesh.dim();
    let rule = SimplexRule::with_degree(d - 1, 4);
    let mut triplets = Vec::new();
    for e in 0..mesh.n_elements() {
        let simplex = mesh.simplex(e);
        let grads = &mesh.geometry(e).gradients;
        let dual = mesh.dual_subdivision_with(e, &rule);
        for face in &dual.faces {
            let Some(row) = index_of(mesh, simplex[face.vertex], indexing) else {
                continue;
            };
            // ∫_S D ds, then the flux of every basis gradient through S.
            let mut integral = Tensor::zeros(d);
            for (x, &w) in face.nodes.iter().zip(&face.weights) {
                let t = field.eval_on(e, x);
                check_spd(&t, x)?;
                integral.add_scaled(w, &t);
            }
            for (j, &vj) in simplex.iter().enumerate() {
                if let Some(col) = index_of(mesh, vj, indexing) {
                    let flux = dot(&integral.apply(&grads[j]), &face.normal);
                    triplets.push((row, col, -flux));
                }
            }
        }
    }
    Ok(SparseRealMatrix::from_triplets(
        size_of(mesh, indexing),
        triplets,
        Symmetry::General,
    ))
}

/// Linear FE stiffness `a_ij = Σ_K ∫_K (D∇φ_j)·∇φ_i`.
pub fn assemble_fem_stiffness(
    mesh: &SimplicialMesh,
    field: &dyn DiffusionField,
) -> Result<SparseRealMatrix> {
    check_dims(field, mesh)?;
    let mut triplets = Vec::new();
    for e in 0..mesh.n_elements() {
        let g = mesh.geometry(e);
        let dk = element_average(field, mesh, e)?;
        let simplex = mesh.simplex(e);
        // computed once per pair and mirrored so the result is exactly symmetric
        for (i, &vi) in simplex.iter().enumerate() {
            let Some(row) = mesh.dof(vi) else { continue };
            for (j, &vj) in simplex.iter().enumerate().skip(i) {
                if let Some(col) = mesh.dof(vj) {
                    let v = g.volume * dot(&dk.apply(&g.gradients[j]), &g.gradients[i]);
                    triplets.push((row, col, v));
                    if col != row {
                        triplets.push((col, row, v));
                    }
                }
            }
        }
    }
    Ok(SparseRealMatrix::from_triplets(
        mesh.n_interior(),
        triplets,
        Symmetry::Symmetric,
    ))
}

/// The moment constants of the linear basis on dual cells:
/// `m₁|K| = ∫_{K*_{P_i}∩K} φ_i`, `m₂|K| = ∫_{K*_{P_i}∩K} φ_j` (`j ≠ i`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassConstants {
    pub dim: usize,
    pub m1: f64,
    pub m2: f64,
}

impl MassConstants {
    pub fn new(dim: usize) -> Self {
        let d = dim as f64;
        let harmonic: f64 = (1..=dim).map(|i| 1.0 / i as f64).sum();
        let c = (d + 1.0).powi(3);
        MassConstants {
            dim,
            m1: (1.0 + (d + 1.0) * harmonic) / c,
            m2: (d * d + 2.0 * d - (d + 1.0) * harmonic) / (d * c),
        }
    }

    /// `m₁ − m₂ = ((d+1)H_d − d) / (d (d+1)²)`.
    pub fn gap(&self) -> f64 {
        self.m1 - self.m2
    }
}

/// Result of checking the closed-form constants against direct integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassConstantCheck {
    pub m1: f64,
    pub m2: f64,
    pub oracle_m1: f64,
    pub oracle_m2: f64,
}

/// Integrates `φ_{P₁}` and `φ_{P₂}` over the dual sub-region of `P₁` in the
/// right simplex `P₁ = 0`, `P_{k+1} = e₁ + … + e_k`, independently of the
/// closed form.
pub fn verify_mass_constants(dim: usize) -> MassConstantCheck {
    let mut points = vec![[0.0; 3]; dim + 1];
    for k in 1..=dim {
        points[k] = points[k - 1];
        points[k][k - 1] = 1.0;
    }
    let volume = simplex_measure(&points, dim);
    let rule = SimplexRule::conical(dim, 6);
    let (mut i1, mut i2) = (0.0, 0.0);
    for chamber in chambers(&points, 0) {
        let m = simplex_measure(&chamber, dim);
        for (node, &w) in rule.nodes.iter().zip(&rule.weights) {
            let x = mix(&chamber, node);
            // barycentric coordinates of the right simplex: λ₁ = 1 − x₁,
            // λ₂ = x₁ − x₂, …
            let phi1 = 1.0 - x[0];
            let phi2 = x[0] - if dim > 1 { x[1] } else { 0.0 };
            i1 += w * m * phi1;
            i2 += w * m * phi2;
        }
    }
    let c = MassConstants::new(dim);
    MassConstantCheck {
        m1: c.m1,
        m2: c.m2,
        oracle_m1: i1 / volume,
        oracle_m2: i2 / volume,
    }
}

/// FVEM mass matrix: `m₁|ω_i|` on the diagonal, `m₂|ω_ij|` off it.
pub fn assemble_mass(mesh: &SimplicialMesh) -> SparseRealMatrix {
    let c = MassConstants::new(mesh.dim());
    let mut triplets = Vec::new();
    for e in 0..mesh.n_elements() {
        let vol = mesh.geometry(e).volume;
        let dofs: Vec<usize> = mesh
            .simplex(e)
            .iter()
            .filter_map(|&v| mesh.dof(v))
            .collect();
        for &i in &dofs {
            for &j in &dofs {
                triplets.push((i, j, if i == j { c.m1 * vol } else { c.m2 * vol }));
            }
        }
    }
    SparseRealMatrix::from_triplets(mesh.n_interior(), triplets, Symmetry::Symmetric)
}

/// Lumped mass `M_ii = ∫_{K*_{P_i}} Σ_j φ_j`, the sum over interior `j`.
pub fn assemble_lumped_mass(mesh: &SimplicialMesh) -> SparseRealMatrix {
    let c = MassConstants::new(mesh.dim());
    let mut diag = vec![0.0; mesh.n_interior()];
    for e in 0..mesh.n_elements() {
        let vol = mesh.geometry(e).volume;
        let dofs: Vec<usize> = mesh
            .simplex(e)
            .iter()
            .filter_map(|&v| mesh.dof(v))
            .collect();
        let others = dofs.len().saturating_sub(1) as f64;
        for &i in &dofs {
            diag[i] += vol * (c.m1 + c.m2 * others);
        }
    }
    SparseRealMatrix::from_diagonal(&diag)
}

/// Load vector `f_i = ∫_{K*_{P_i}} f`.
pub fn assemble_load(mesh: &SimplicialMesh, f: &dyn Fn(&Point) -> f64) -> Vec<f64> {
    let d = mesh.dim();
    let rule = volume_rule(d);
    let mut load = vec![0.0; mesh.n_interior()];
    for e in 0..mesh.n_elements() {
        let points = mesh.element_points(e);
        for (local, &v) in mesh.simplex(e).iter().enumerate() {
            let Some(i) = mesh.dof(v) else { continue };
            for chamber in chambers(&points, local) {
                let m = simplex_measure(&chamber, d);
                for (node, &w) in rule.nodes.iter().zip(&rule.weights) {
                    load[i] += w * m * f(&mix(&chamber, node));
                }
            }
        }
    }
    load
}

/// Returns `S⁻¹AS⁻¹` and `S = diag(a_jj)^{1/2}`.
pub fn jacobi_scale(a: &SparseRealMatrix) -> Result<(SparseRealMatrix, Vec<f64>)> {
    let diag = a.diagonal();
    if let Some((row, &value)) = diag.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
        return Err(Error::NonpositiveDiagonal { row, value });
    }
    let s: Vec<f64> = diag.iter().map(|v| v.sqrt()).collect();
    let inv: Vec<f64> = s.iter().map(|v| 1.0 / v).collect();
    Ok((a.scale(&inv, &inv), s))
}

/// Largest violation of the two orthogonality properties of the dual
/// projection `Π_h* v = v(P)` on `K*_P`: `∫_K (v − Π_h* v)` over elements
/// and `∫_l (v − Π_h* v)` over boundary faces. `values` holds the nodal
/// values at every vertex.
pub fn projection_orthogonality_residual(mesh: &SimplicialMesh, values: &[f64]) -> f64 {
    let d = mesh.dim();
    let mut worst: f64 = 0.0;
    let rule = volume_rule(d);
    for e in 0..mesh.n_elements() {
        let points = mesh.element_points(e);
        let nodal: Vec<f64> = mesh.simplex(e).iter().map(|&v| values[v]).collect();
        let vol = mesh.geometry(e).volume;
        let exact: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(node, &w)| w * vol * dot_slice(node, &nodal))
            .sum();
        let projected: f64 = (0..=d)
            .map(|i| {
                nodal[i]
                    * chambers(&points, i)
                        .iter()
                        .map(|c| simplex_measure(c, d))
                        .sum::<f64>()
            })
            .sum();
        worst = worst.max((exact - projected).abs());
    }
    if d > 1 {
        let face_rule = volume_rule(d - 1);
        for (e, opposite) in mesh.boundary_faces() {
            let face: Vec<usize> = mesh
                .simplex(e)
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != opposite)
                .map(|(_, &v)| v)
                .collect();
            let points: Vec<Point> = face.iter().map(|&v| mesh.vertices()[v]).collect();
            let nodal: Vec<f64> = face.iter().map(|&v| values[v]).collect();
            let area = simplex_measure(&points, d);
            let exact: f64 = face_rule
                .nodes
                .iter()
                .zip(&face_rule.weights)
                .map(|(node, &w)| w * area * dot_slice(node, &nodal))
                .sum();
            let projected: f64 = (0..d)
                .map(|i| {
                    nodal[i]
                        * chambers(&points, i)
                            .iter()
                            .map(|c| simplex_measure(c, d))
                            .sum::<f64>()
                })
                .sum();
            worst = worst.max((exact - projected).abs());
        }
    }
    worst
}

fn dot_slice(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::{field_by_name, ConstantField};
    use crate::mesh::{generate_mesh, MeshParams, PatchIndex};

    fn uniform(d: usize, n: usize) -> SimplicialMesh {
        generate_mesh("uniform", &MeshParams::new(d, n)).unwrap()
    }

    #[test]
    fn one_dimensional_stencils() {
        let n = 8;
        let h = 1.0 / n as f64;
        let m = uniform(1, n);
        let id = field_by_name("identity", 1).unwrap();
        let fv = assemble_fvem_stiffness(&m, id.as_ref()).unwrap();
        let fe = assemble_fem_stiffness(&m, id.as_ref()).unwrap();
        for a in [&fv, &fe] {
            assert!((a.get(3, 2) + 1.0 / h).abs() < 1e-12);
            assert!((a.get(3, 3) - 2.0 / h).abs() < 1e-12);
            assert!((a.get(3, 4) + 1.0 / h).abs() < 1e-12);
        }
        let mass = assemble_mass(&m);
        assert!((mass.get(3, 2) - h / 8.0).abs() < 1e-15);
        assert!((mass.get(3, 3) - 0.75 * h).abs() < 1e-15);
        let lump = assemble_lumped_mass(&m);
        assert!((lump.get(3, 3) - h).abs() < 1e-15);
        let load = assemble_load(&m, &|_| 1.0);
        assert!(load.iter().all(|&f| (f - h).abs() < 1e-15));
    }

    #[test]
    fn constants_match_tables_and_oracle() {
        let expected = [
            (3.0 / 8.0, 1.0 / 8.0),
            (11.0 / 54.0, 7.0 / 108.0),
            (25.0 / 192.0, 23.0 / 576.0),
        ];
        for (d, &(m1, m2)) in (1..=3).zip(&expected) {
            let c = verify_mass_constants(d);
            assert!((c.m1 - m1).abs() < 1e-15 && (c.m2 - m2).abs() < 1e-15);
            assert!((c.oracle_m1 - m1).abs() < 1e-10, "d={d}: {}", c.oracle_m1);
            assert!((c.oracle_m2 - m2).abs() < 1e-10, "d={d}: {}", c.oracle_m2);
            let k = MassConstants::new(d);
            assert!((k.m1 + d as f64 * k.m2 - 1.0 / (d as f64 + 1.0)).abs() < 1e-15);
            assert!(k.m1 > k.m2 && k.m2 > 0.0);
        }
    }

    #[test]
    fn constant_field_fv_equals_fe() {
        let t = Tensor::from_row_major(&[2.0, 0.3, -0.1, 0.3, 1.0, 0.2, -0.1, 0.2, 0.5]).unwrap();
        let f = ConstantField(t);
        let m = generate_mesh("jittered", &MeshParams::new(3, 3).with_seed(1)).unwrap();
        let fv = assemble_fvem_stiffness(&m, &f).unwrap();
        let fe = assemble_fem_stiffness(&m, &f).unwrap();
        assert!(fv.sub(&fe).norm_inf() <= 1e-12 * fe.norm_inf());
    }

    #[test]
    fn variable_field_gives_nonsymmetric_fv() {
        // In 1-D the single dual point per element makes A_FV symmetric.
        let m = generate_mesh("chebyshev1d", &MeshParams::new(1, 16)).unwrap();
        let f = field_by_name("one_plus_exp_x5", 1).unwrap();
        let fv = assemble_fvem_stiffness(&m, f.as_ref()).unwrap();
        assert!(fv.asymmetry() <= 1e-14 * fv.norm_inf());
        let m = generate_mesh("jittered", &MeshParams::new(2, 6).with_seed(3)).unwrap();
        let f = field_by_name("one_plus_exp_x5", 2).unwrap();
        let fv = assemble_fvem_stiffness(&m, f.as_ref()).unwrap();
        assert!(fv.asymmetry() > 1e-6 * fv.norm_inf());
        let fe = assemble_fem_stiffness(&m, f.as_ref()).unwrap();
        assert!(fe.asymmetry() <= 1e-12 * fe.norm_inf());
    }

    #[test]
    fn fv_rows_annihilate_constants() {
        let m = generate_mesh("jittered", &MeshParams::new(2, 5).with_seed(4)).unwrap();
        let f = field_by_name("rotated_anisotropic_0.01", 2).unwrap();
        let full = assemble_fvem_stiffness_full(&m, f.as_ref()).unwrap();
        let r = full.mul_vec(&vec![1.0; m.n_vertices()]);
        let scale = full.norm_inf();
        for &v in m.interior_vertices() {
            assert!(r[v].abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn mass_matches_patch_measures() {
        let m = generate_mesh("jittered", &MeshParams::new(2, 4).with_seed(2)).unwrap();
        let mass = assemble_mass(&m);
        let p = PatchIndex::new(&m);
        let c = MassConstants::new(2);
        for &i in m.interior_vertices() {
            let r = m.dof(i).unwrap();
            assert!((mass.get(r, r) - c.m1 * p.patch_measure(i)).abs() < 1e-15);
            for &j in p.neighbors(i) {
                if j != i {
                    let col = m.dof(j).unwrap();
                    assert!((mass.get(r, col) - c.m2 * p.pair_measure(i, j)).abs() < 1e-15);
                }
            }
        }
        assert_eq!(mass.asymmetry(), 0.0);
    }

    #[test]
    fn lumped_mass_sandwich_and_interior_cells() {
        let m = uniform(2, 5);
        let lump = assemble_lumped_mass(&m);
        let p = PatchIndex::new(&m);
        let c = MassConstants::new(2);
        for &i in m.interior_vertices() {
            let v = lump.get(m.dof(i).unwrap(), m.dof(i).unwrap());
            let w = p.patch_measure(i);
            assert!(c.m1 * w <= v + 1e-15 && v <= w / 3.0 + 1e-15);
            if p.neighbors(i).len() == 7 {
                assert!((v - w / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn load_of_constant_is_dual_measure() {
        let m = generate_mesh("jittered", &MeshParams::new(3, 3).with_seed(5)).unwrap();
        let p = PatchIndex::new(&m);
        let f = assemble_load(&m, &|_| 1.0);
        for &i in m.interior_vertices() {
            assert!((f[m.dof(i).unwrap()] - p.patch_measure(i) / 4.0).abs() < 1e-14);
        }
        assert!(assemble_load(&m, &|_| 0.0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn jacobi_scaling() {
        let (s, d) = jacobi_scale(&SparseRealMatrix::from_diagonal(&[4.0])).unwrap();
        assert_eq!(d, vec![2.0]);
        assert_eq!(s.get(0, 0), 1.0);
        let m = uniform(2, 4);
        let a =
            assemble_fvem_stiffness(&m, field_by_name("identity", 2).unwrap().as_ref()).unwrap();
        let (sa, _) = jacobi_scale(&a).unwrap();
        let dense = a.to_dense();
        for (i, j, v) in sa.triplets() {
            let expected = dense[(i, j)] / (dense[(i, i)] * dense[(j, j)]).sqrt();
            assert!((v - expected).abs() < 1e-14);
        }
        for v in sa.diagonal() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let bad = SparseRealMatrix::from_diagonal(&[1.0, 0.0]);
        assert!(matches!(
            jacobi_scale(&bad),
            Err(Error::NonpositiveDiagonal { row: 1, .. })
        ));
    }

    #[test]
    fn projection_residual_vanishes() {
        for d in 1..=3 {
            let m = generate_mesh("jittered", &MeshParams::new(d, 3).with_seed(9)).unwrap();
            let v: Vec<f64> = (0..m.n_vertices())
                .map(|i| (i as f64 * 0.7).sin())
                .collect();
            assert!(projection_orthogonality_residual(&m, &v) < 1e-14);
            assert!(
                projection_orthogonality_residual(&m, &vec![2.0; m.n_vertices()]).abs() < 1e-15
            );
        }
    }
}
