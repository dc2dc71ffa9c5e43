//! Barycentric dual subdivision of a simplex.
//!
//! The part of the control volume of vertex `i` inside an element is
//! `{x : lambda_i(x) >= lambda_l(x) for all l}`. It is the union of the
//! chambers of the barycentric subdivision whose flags start at `i`, and its
//! boundary interior to the element consists of the faces
//! `S_{i,k} = {lambda_i = lambda_k >= lambda_l}`, one per other vertex `k`.

use super::element::simplex_measure;
use super::SimplicialMesh;
use crate::quadrature::SimplexRule;
use crate::tensor::{centroid, mix, norm, sub, Point};

/// One interior dual face `S_{i,k}` of an element.
#[derive(Debug, Clone)]
pub struct DualFace {
    /// Local index of the vertex whose control volume the face bounds.
    pub vertex: usize,
    /// Local index of the vertex on the other side.
    pub neighbor: usize,
    /// Flat `(d-1)`-simplices tiling the face; the last point of each is the
    /// element centroid.
    pub pieces: Vec<Vec<Point>>,
    /// Unit normal pointing away from `vertex`.
    pub normal: Point,
    pub measure: f64,
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DualCellGeometry {
    pub element: usize,
    /// `faces[i * d + m]` is the `m`-th face around local vertex `i`.
    pub faces: Vec<DualFace>,
    /// `|K*_{P_i} ∩ K|` per local vertex, measured from the chambers.
    pub sub_volumes: Vec<f64>,
}

impl DualCellGeometry {
    pub fn faces_of(&self, local: usize) -> &[DualFace] {
        let d = self.faces.len() / self.sub_volumes.len();
        &self.faces[local * d..(local + 1) * d]
    }
}

pub(crate) fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (pos, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(pos);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

fn subset_barycenter(points: &[Point], subset: &[usize]) -> Point {
    let sel: Vec<Point> = subset.iter().map(|&s| points[s]).collect();
    centroid(&sel)
}

/// Chambers (flat `d`-simplices) making up `K*_{P_i} ∩ K` for the simplex
/// with the given vertices.
pub fn chambers(points: &[Point], local: usize) -> Vec<Vec<Point>> {
    let others: Vec<usize> = (0..points.len()).filter(|&l| l != local).collect();
    permutations(&others)
        .into_iter()
        .map(|perm| {
            let mut flag = vec![local];
            let mut simplex = vec![points[local]];
            for &p in &perm {
                flag.push(p);
                simplex.push(subset_barycenter(points, &flag));
            }
            simplex
        })
        .collect()
}

/// Flat pieces of the dual face `S_{i,k}`.
pub fn face_pieces(points: &[Point], local: usize, neighbor: usize) -> Vec<Vec<Point>> {
    let others: Vec<usize> = (0..points.len())
        .filter(|&l| l != local && l != neighbor)
        .collect();
    permutations(&others)
        .into_iter()
        .map(|perm| {
            let mut flag = vec![local, neighbor];
            let mut simplex = vec![subset_barycenter(points, &flag)];
            for &p in &perm {
                flag.push(p);
                simplex.push(subset_barycenter(points, &flag));
            }
            simplex
        })
        .collect()
}

/// Dual geometry of a free-standing simplex; `gradients` are the gradients
/// of its barycentric basis functions.
pub fn subdivide(
    points: &[Point],
    gradients: &[Point],
    dim: usize,
    face_rule: &SimplexRule,
) -> (Vec<DualFace>, Vec<f64>) {
    let nv = dim + 1;
    let mut faces = Vec::with_capacity(nv * dim);
    let mut sub_volumes = Vec::with_capacity(nv);
    for i in 0..nv {
        for k in (0..nv).filter(|&k| k != i) {
            let mut normal = sub(&gradients[k], &gradients[i]);
            let len = norm(&normal);
            for c in normal.iter_mut() {
                *c /= len;
            }
            let pieces = face_pieces(points, i, k);
            let mut nodes = Vec::new();
            let mut weights = Vec::new();
            let mut measure = 0.0;
            for piece in &pieces {
                let m = simplex_measure(piece, dim);
                measure += m;
                for (bary, w) in face_rule.nodes.iter().zip(&face_rule.weights) {
                    nodes.push(mix(piece, bary));
                    weights.push(w * m);
                }
            }
            faces.push(DualFace {
                vertex: i,
                neighbor: k,
                pieces,
                normal,
                measure,
                nodes,
                weights,
            });
        }
        sub_volumes.push(
            chambers(points, i)
                .iter()
                .map(|c| simplex_measure(c, dim))
                .sum(),
        );
    }
    (faces, sub_volumes)
}

impl SimplicialMesh {
    /// Interior dual faces and dual sub-volumes of one element, with
    /// degree-4 quadrature on every face piece.
    pub fn dual_subdivision(&self, element: usize) -> DualCellGeometry {
        let rule = SimplexRule::with_degree(self.dim() - 1, 4);
        self.dual_subdivision_with(element, &rule)
    }

    pub(crate) fn dual_subdivision_with(
        &self,
        element: usize,
        rule: &SimplexRule,
    ) -> DualCellGeometry {
        let points = self.element_points(element);
        let (faces, sub_volumes) =
            subdivide(&points, &self.geometry(element).gradients, self.dim(), rule);
        DualCellGeometry {
            element,
            faces,
            sub_volumes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::ElementGeometry;

    fn check_identity(points: &[Point], dim: usize) {
        let g = ElementGeometry::new(points, dim).unwrap();
        let rule = SimplexRule::with_degree(dim - 1, 4);
        let (faces, subs) = subdivide(points, &g.gradients, dim, &rule);
        for i in 0..=dim {
            let mut s = [0.0; 3];
            for f in faces.iter().filter(|f| f.vertex == i) {
                let wsum: f64 = f.weights.iter().sum();
                assert!((wsum - f.measure).abs() <= 1e-13 * f.measure.max(1.0));
                for c in 0..3 {
                    s[c] += f.normal[c] * f.measure;
                }
            }
            let target: Vec<f64> = (0..3).map(|c| -g.volume * g.gradients[i][c]).collect();
            let scale = norm(&[target[0], target[1], target[2]]);
            for c in 0..3 {
                assert!((s[c] - target[c]).abs() <= 1e-10 * scale, "dim {dim} i {i}");
            }
            assert!((subs[i] - g.volume / (dim as f64 + 1.0)).abs() <= 1e-12 * g.volume);
        }
    }

    #[test]
    fn interval_dual_face_is_the_midpoint() {
        let pts = [[0.2, 0.0, 0.0], [0.7, 0.0, 0.0]];
        let g = ElementGeometry::new(&pts, 1).unwrap();
        let (faces, subs) = subdivide(&pts, &g.gradients, 1, &SimplexRule::with_degree(0, 4));
        assert_eq!(faces.len(), 2);
        assert!((faces[0].nodes[0][0] - 0.45).abs() < 1e-15);
        assert_eq!(faces[0].measure, 1.0);
        assert_eq!(faces[0].normal[0], 1.0);
        assert_eq!(faces[1].normal[0], -1.0);
        assert!((subs[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn triangle_faces_join_midpoints_to_centroid() {
        let pts = [[0.0; 3], [2.0, 0.0, 0.0], [0.5, 1.5, 0.0]];
        let g = ElementGeometry::new(&pts, 2).unwrap();
        let (faces, _) = subdivide(&pts, &g.gradients, 2, &SimplexRule::with_degree(1, 4));
        let c = centroid(&pts);
        for f in &faces {
            assert_eq!(f.pieces.len(), 1);
            let mid = centroid(&[pts[f.vertex], pts[f.neighbor]]);
            assert!(norm(&sub(&f.pieces[0][0], &mid)) < 1e-15);
            assert!(norm(&sub(&f.pieces[0][1], &c)) < 1e-15);
            // normal points from P_i towards P_k
            let dir = sub(&pts[f.neighbor], &pts[f.vertex]);
            assert!(crate::tensor::dot(&dir, &f.normal) > 0.0);
        }
        check_identity(&pts, 2);
    }

    #[test]
    fn tetrahedron_faces_are_planar_quadrilaterals() {
        let pts = [[0.0; 3], [1.0, 0.1, 0.0], [0.3, 1.2, 0.1], [0.2, 0.4, 0.9]];
        let g = ElementGeometry::new(&pts, 3).unwrap();
        let (faces, _) = subdivide(&pts, &g.gradients, 3, &SimplexRule::with_degree(2, 4));
        for f in &faces {
            assert_eq!(f.pieces.len(), 2);
            for piece in &f.pieces {
                for p in piece {
                    // every point lies on lambda_i = lambda_k
                    let li = 1.0 / 4.0
                        + crate::tensor::dot(&g.gradients[f.vertex], &sub(p, &g.barycenter));
                    let lk = 1.0 / 4.0
                        + crate::tensor::dot(&g.gradients[f.neighbor], &sub(p, &g.barycenter));
                    assert!((li - lk).abs() < 1e-13);
                }
            }
        }
        check_identity(&pts, 3);
    }

    #[test]
    fn chambers_count() {
        let pts = [[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(chambers(&pts, 0).len(), 6);
        assert_eq!(chambers(&pts[..3], 1).len(), 2);
    }
}
