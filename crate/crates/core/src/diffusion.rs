//! Diffusion tensor fields and the per-element data derived from them.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::SimplicialMesh;
use crate::quadrature::SimplexRule;
use crate::tensor::{mix, Point, Tensor};

/// How regular a field is; constant and element-wise constant fields have
/// vanishing seminorms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Smoothness {
    Constant,
    PiecewiseConstant,
    Smooth,
}

/// A symmetric positive definite tensor field `D(x)`.
///
/// Implementations must be pure functions of their arguments.
pub trait DiffusionField: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> String;

    fn eval(&self, x: &Point) -> Tensor;

    /// Value seen by `element`; differs from `eval` only for fields that are
    /// defined element by element.
    fn eval_on(&self, _element: usize, x: &Point) -> Tensor {
        self.eval(x)
    }

    /// `∂D/∂x_k` for `k < dim`.
    fn gradient(&self, _x: &Point) -> Option<Vec<Tensor>> {
        None
    }

    /// `∂²D/∂x_k∂x_l`, row-major over `(k, l)`.
    fn hessian(&self, _x: &Point) -> Option<Vec<Tensor>> {
        None
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Smooth
    }
}

impl fmt::Debug for dyn DiffusionField + '_ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffusionField({})", self.name())
    }
}

/// A spatially constant tensor.
#[derive(Debug, Clone)]
pub struct ConstantField(pub Tensor);

impl DiffusionField for ConstantField {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn name(&self) -> String {
        let entries: Vec<String> = self.0.entries().map(|v| v.to_string()).collect();
        format!("constant:{}", entries.join(","))
    }

    fn eval(&self, _x: &Point) -> Tensor {
        self.0
    }

    fn gradient(&self, _x: &Point) -> Option<Vec<Tensor>> {
        Some(vec![Tensor::zeros(self.0.dim()); self.0.dim()])
    }

    fn hessian(&self, _x: &Point) -> Option<Vec<Tensor>> {
        let d = self.0.dim();
        Some(vec![Tensor::zeros(d); d * d])
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::Constant
    }
}

/// `(1 + exp(x₁⁵)) I`.
#[derive(Debug, Clone)]
pub struct OnePlusExpX5 {
    pub dim: usize,
}

impl DiffusionField for OnePlusExpX5 {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> String {
        "one_plus_exp_x5".into()
    }

    fn eval(&self, x: &Point) -> Tensor {
        Tensor::scalar(self.dim, 1.0 + x[0].powi(5).exp())
    }

    fn gradient(&self, x: &Point) -> Option<Vec<Tensor>> {
        let t = x[0];
        let mut g = vec![Tensor::zeros(self.dim); self.dim];
        g[0] = Tensor::scalar(self.dim, 5.0 * t.powi(4) * t.powi(5).exp());
        Some(g)
    }

    fn hessian(&self, x: &Point) -> Option<Vec<Tensor>> {
        let t = x[0];
        let mut h = vec![Tensor::zeros(self.dim); self.dim * self.dim];
        h[0] = Tensor::scalar(
            self.dim,
            (20.0 * t.powi(3) + 25.0 * t.powi(8)) * t.powi(5).exp(),
        );
        Some(h)
    }
}

/// `R(θ) diag(1, ε) R(θ)ᵀ` with `θ = π sin(x) cos(y)`.
#[derive(Debug, Clone)]
pub struct RotatedAnisotropic {
    pub epsilon: f64,
}

impl RotatedAnisotropic {
    fn angle(x: &Point) -> (f64, [f64; 2], [f64; 4]) {
        let (sx, cx) = x[0].sin_cos();
        let (sy, cy) = x[1].sin_cos();
        let theta = PI * sx * cy;
        let grad = [PI * cx * cy, -PI * sx * sy];
        let hess = [-PI * sx * cy, -PI * cx * sy, -PI * cx * sy, -PI * sx * cy];
        (theta, grad, hess)
    }

    fn tensor(entries: [f64; 3]) -> Tensor {
        Tensor::from_row_major(&[entries[0], entries[1], entries[1], entries[2]]).unwrap()
    }
}

impl DiffusionField for RotatedAnisotropic {
    fn dim(&self) -> usize {
        2
    }

    fn name(&self) -> String {
        format!("rotated_anisotropic_{}", self.epsilon)
    }

    fn eval(&self, x: &Point) -> Tensor {
        let (theta, _, _) = Self::angle(x);
        let (s, c) = theta.sin_cos();
        let e = self.epsilon;
        Self::tensor([
            e + (1.0 - e) * c * c,
            (1.0 - e) * c * s,
            e + (1.0 - e) * s * s,
        ])
    }

    fn gradient(&self, x: &Point) -> Option<Vec<Tensor>> {
        let (theta, g, _) = Self::angle(x);
        let (s2, c2) = (2.0 * theta).sin_cos();
        let a = 1.0 - self.epsilon;
        let dtheta = [-a * s2, a * c2, a * s2];
        Some(
            g.iter()
                .map(|&gk| Self::tensor(dtheta.map(|v| v * gk)))
                .collect(),
        )
    }

    fn hessian(&self, x: &Point) -> Option<Vec<Tensor>> {
        let (theta, g, h) = Self::angle(x);
        let (s2, c2) = (2.0 * theta).sin_cos();
        let a = 1.0 - self.epsilon;
        let d1 = [-a * s2, a * c2, a * s2];
        let d2 = [-2.0 * a * c2, -2.0 * a * s2, 2.0 * a * c2];
        let mut out = Vec::with_capacity(4);
        for k in 0..2 {
            for l in 0..2 {
                let gg = g[k] * g[l];
                let hh = h[k * 2 + l];
                out.push(Self::tensor([0, 1, 2].map(|i| d2[i] * gg + d1[i] * hh)));
            }
        }
        Some(out)
    }
}

/// One constant tensor per element.
#[derive(Debug, Clone)]
pub struct PiecewiseConstantField {
    pub values: Vec<Tensor>,
}

impl DiffusionField for PiecewiseConstantField {
    fn dim(&self) -> usize {
        self.values.first().map_or(1, Tensor::dim)
    }

    fn name(&self) -> String {
        "piecewise_constant".into()
    }

    /// Away from an element the field has no single value; the first
    /// element's tensor is returned.
    fn eval(&self, _x: &Point) -> Tensor {
        self.values[0]
    }

    fn eval_on(&self, element: usize, _x: &Point) -> Tensor {
        self.values[element]
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::PiecewiseConstant
    }
}

type TensorFn = dyn Fn(&Point) -> Tensor + Send + Sync;

/// A field given by a closure, without derivative information.
#[derive(Clone)]
pub struct FnField {
    dim: usize,
    name: String,
    f: Arc<TensorFn>,
}

impl FnField {
    pub fn new(
        dim: usize,
        name: impl Into<String>,
        f: impl Fn(&Point) -> Tensor + Send + Sync + 'static,
    ) -> Self {
        FnField {
            dim,
            name: name.into(),
            f: Arc::new(f),
        }
    }
}

impl DiffusionField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> String {
        self.name.clone()
    }

    fn eval(&self, x: &Point) -> Tensor {
        (self.f)(x)
    }
}

/// Names accepted by [`field_by_name`], besides `constant:<entries>`.
pub const BUILTIN_FIELDS: [&str; 3] = ["identity", "one_plus_exp_x5", "rotated_anisotropic_0.01"];

/// Resolves a built-in field. `constant:<entries>` takes `d` diagonal
/// entries or `d²` row-major entries, comma separated.
pub fn field_by_name(name: &str, dim: usize) -> Result<Arc<dyn DiffusionField>> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InconsistentDimension(format!(
            "field dimension must be 1, 2 or 3, got {dim}"
        )));
    }
    match name {
        "identity" => Ok(Arc::new(ConstantField(Tensor::identity(dim)))),
        "one_plus_exp_x5" => Ok(Arc::new(OnePlusExpX5 { dim })),
        "rotated_anisotropic_0.01" => {
            if dim != 2 {
                return Err(Error::InconsistentDimension(format!(
                    "{name} is two-dimensional, mesh has dimension {dim}"
                )));
            }
            Ok(Arc::new(RotatedAnisotropic { epsilon: 0.01 }))
        }
        _ => {
            let Some(list) = name.strip_prefix("constant:") else {
                return Err(Error::UnknownField(name.to_string()));
            };
            let entries = list
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("constant field entries `{list}`: {e}")))?;
            let tensor = if entries.len() == dim {
                Tensor::diagonal(&entries)
            } else if entries.len() == dim * dim {
                Tensor::from_row_major(&entries).unwrap()
            } else {
                return Err(Error::InconsistentDimension(format!(
                    "constant field needs {dim} or {} entries, got {}",
                    dim * dim,
                    entries.len()
                )));
            };
            check_spd(&tensor, &[0.0; 3])?;
            Ok(Arc::new(ConstantField(tensor)))
        }
    }
}

/// Checks symmetry (1e-12 relative) and positive definiteness of a sample.
pub fn check_spd(t: &Tensor, x: &Point) -> Result<()> {
    let min = t.symmetric_eigenvalues()[0];
    if !t.is_symmetric(1e-12) || !(min > 0.0) {
        return Err(Error::NonSpdSample {
            point: *x,
            min_eigenvalue: min,
        });
    }
    Ok(())
}

pub(crate) fn volume_rule(dim: usize) -> SimplexRule {
    SimplexRule::with_degree(dim, 4)
}

/// `D_K = (1/|K|) ∫_K D`, by a degree-4 volume rule.
pub fn element_average(
    field: &dyn DiffusionField,
    mesh: &SimplicialMesh,
    element: usize,
) -> Result<Tensor> {
    element_average_with(field, mesh, element, &volume_rule(mesh.dim()))
}

fn element_average_with(
    field: &dyn DiffusionField,
    mesh: &SimplicialMesh,
    element: usize,
    rule: &SimplexRule,
) -> Result<Tensor> {
    let points = mesh.element_points(element);
    if field.smoothness() != Smoothness::Smooth {
        let x = mesh.geometry(element).barycenter;
        let t = field.eval_on(element, &x);
        check_spd(&t, &x)?;
        return Ok(t);
    }
    let mut avg = Tensor::zeros(mesh.dim());
    for (node, &w) in rule.nodes.iter().zip(&rule.weights) {
        let x = mix(&points, node);
        let t = field.eval_on(element, &x);
        check_spd(&t, &x)?;
        avg.add_scaled(w, &t);
    }
    Ok(avg)
}

/// Points at which seminorms are sampled: vertices, edge midpoints,
/// barycenter and volume quadrature nodes.
pub fn seminorm_samples(points: &[Point], rule: &SimplexRule) -> Vec<Point> {
    let mut out: Vec<Point> = points.to_vec();
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            out.push(mix(&[points[a], points[b]], &[0.5, 0.5]));
        }
    }
    out.push(crate::tensor::centroid(points));
    out.extend(rule.nodes.iter().map(|n| mix(points, n)));
    out
}

fn shifted(x: &Point, k: usize, delta: f64) -> Point {
    let mut y = *x;
    y[k] += delta;
    y
}

fn max_entry_diff(a: &Tensor, b: &Tensor, scale: f64) -> f64 {
    a.entries()
        .zip(b.entries())
        .fold(0.0, |m, (u, v)| m.max(((u - v) * scale).abs()))
}

/// First derivatives at `x`: analytic when available, otherwise central
/// differences with step `delta`.
fn first_derivatives(field: &dyn DiffusionField, x: &Point, delta: f64) -> Vec<Tensor> {
    if let Some(g) = field.gradient(x) {
        return g;
    }
    (0..field.dim())
        .map(|k| {
            let mut t = field.eval(&shifted(x, k, delta));
            t.add_scaled(-1.0, &field.eval(&shifted(x, k, -delta)));
            t.scaled(0.5 / delta)
        })
        .collect()
}

/// Sampled surrogates `(|D|_{1,∞,K}, |D|_{2,∞,K})`: the largest absolute
/// first and second partial derivative of any entry over the sample set.
pub fn seminorms(field: &dyn DiffusionField, mesh: &SimplicialMesh, element: usize) -> (f64, f64) {
    seminorms_with(field, mesh, element, &volume_rule(mesh.dim()))
}

fn seminorms_with(
    field: &dyn DiffusionField,
    mesh: &SimplicialMesh,
    element: usize,
    rule: &SimplexRule,
) -> (f64, f64) {
    if field.smoothness() != Smoothness::Smooth {
        return (0.0, 0.0);
    }
    let d = mesh.dim();
    let h = mesh.geometry(element).diameter;
    let delta = 1e-5 * h;
    // Second differences of values lose too many digits at 1e-5 h.
    let delta2 = 1e-3 * h;
    let mut s1: f64 = 0.0;
    let mut s2: f64 = 0.0;
    for x in seminorm_samples(&mesh.element_points(element), rule) {
        for g in first_derivatives(field, &x, delta) {
            s1 = s1.max(g.max_abs());
        }
        if let Some(hess) = field.hessian(&x) {
            for t in hess {
                s2 = s2.max(t.max_abs());
            }
        } else if field.gradient(&x).is_some() {
            for l in 0..d {
                let plus = field.gradient(&shifted(&x, l, delta)).unwrap();
                let minus = field.gradient(&shifted(&x, l, -delta)).unwrap();
                for k in 0..d {
                    s2 = s2.max(max_entry_diff(&plus[k], &minus[k], 0.5 / delta));
                }
            }
        } else {
            let center = field.eval(&x);
            for k in 0..d {
                for l in k..d {
                    let v = if k == l {
                        let mut t = field.eval(&shifted(&x, k, delta2));
                        t.add_scaled(1.0, &field.eval(&shifted(&x, k, -delta2)));
                        t.add_scaled(-2.0, &center);
                        t.scaled(1.0 / (delta2 * delta2))
                    } else {
                        let pp = field.eval(&shifted(&shifted(&x, k, delta2), l, delta2));
                        let pm = field.eval(&shifted(&shifted(&x, k, delta2), l, -delta2));
                        let mp = field.eval(&shifted(&shifted(&x, k, -delta2), l, delta2));
                        let mm = field.eval(&shifted(&shifted(&x, k, -delta2), l, -delta2));
                        let mut t = pp;
                        t.add_scaled(-1.0, &pm);
                        t.add_scaled(-1.0, &mp);
                        t.add_scaled(1.0, &mm);
                        t.scaled(0.25 / (delta2 * delta2))
                    };
                    s2 = s2.max(v.max_abs());
                }
            }
        }
    }
    (s1, s2)
}

/// Per-element diffusion quantities.
#[derive(Debug, Clone)]
pub struct ElementDiffusionData {
    pub average: Tensor,
    pub seminorm1: f64,
    pub seminorm2: f64,
    /// `M_K = (F_K')⁻¹ D_K (F_K')⁻ᵀ`.
    pub metric: Tensor,
    pub metric_norm: f64,
}

pub fn element_data(
    field: &dyn DiffusionField,
    mesh: &SimplicialMesh,
) -> Result<Vec<ElementDiffusionData>> {
    check_dims(field, mesh)?;
    let rule = volume_rule(mesh.dim());
    (0..mesh.n_elements())
        .map(|e| {
            let average = element_average_with(field, mesh, e, &rule)?;
            let (seminorm1, seminorm2) = seminorms_with(field, mesh, e, &rule);
            let metric = Tensor::from_dmatrix(&mesh.geometry(e).metric(&average.to_dmatrix()));
            Ok(ElementDiffusionData {
                average,
                seminorm1,
                seminorm2,
                metric_norm: metric.spectral_norm_sym(),
                metric,
            })
        })
        .collect()
}

pub(crate) fn check_dims(field: &dyn DiffusionField, mesh: &SimplicialMesh) -> Result<()> {
    if field.dim() != mesh.dim() {
        return Err(Error::DimensionMismatch {
            expected: mesh.dim(),
            got: field.dim(),
        });
    }
    Ok(())
}

/// Sampled `(d̲, d̄)`: extreme eigenvalues of `D` over the volume and
/// dual-face quadrature nodes used by assembly.
pub fn global_spectral_bounds(
    field: &dyn DiffusionField,
    mesh: &SimplicialMesh,
) -> Result<(f64, f64)> {
    check_dims(field, mesh)?;
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut visit = |e: usize, x: &Point| -> Result<()> {
        let t = field.eval_on(e, x);
        check_spd(&t, x)?;
        let ev = t.symmetric_eigenvalues();
        lo = lo.min(ev[0]);
        hi = hi.max(ev[ev.len() - 1]);
        Ok(())
    };
    if field.smoothness() == Smoothness::Constant {
        visit(0, &[0.0; 3])?;
        return Ok((lo, hi));
    }
    let rule = volume_rule(mesh.dim());
    for e in 0..mesh.n_elements() {
        let points = mesh.element_points(e);
        for node in &rule.nodes {
            visit(e, &mix(&points, node))?;
        }
        if field.smoothness() == Smoothness::Smooth {
            for face in &mesh.dual_subdivision(e).faces {
                for x in &face.nodes {
                    visit(e, x)?;
                }
            }
        }
    }
    Ok((lo, hi))
}

/// `h_{D⁻¹} = ((1/N) Σ_K |K| det(D_K)^{-1/2})^{1/d}`.
pub fn d_inverse_metric_size(data: &[ElementDiffusionData], mesh: &SimplicialMesh) -> f64 {
    let n = mesh.n_elements() as f64;
    let sum: f64 = data
        .iter()
        .zip(mesh.geometries())
        .map(|(k, g)| g.volume / k.average.determinant().sqrt())
        .sum();
    (sum / n).powf(1.0 / mesh.dim() as f64)
}

/// `max_K ‖h_{D⁻¹}² M_K − I‖₂`; zero exactly on meshes uniform in the
/// metric of `D⁻¹`.
pub fn d_inverse_uniform_deviation(data: &[ElementDiffusionData], mesh: &SimplicialMesh) -> f64 {
    let h = d_inverse_metric_size(data, mesh);
    let d = mesh.dim();
    data.iter()
        .map(|k| {
            let mut t = k.metric.scaled(h * h);
            t.add_scaled(-1.0, &Tensor::identity(d));
            t.spectral_norm_sym()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, generate_mesh, MeshParams};

    fn interval(a: f64, b: f64) -> SimplicialMesh {
        build_mesh(
            1,
            vec![[a, 0.0, 0.0], [b, 0.0, 0.0]],
            vec![vec![0, 1]],
            vec![true, true],
            None,
        )
        .unwrap()
    }

    #[test]
    fn constant_average_and_zero_seminorms() {
        let m = generate_mesh("uniform", &MeshParams::new(2, 3)).unwrap();
        let f = field_by_name("identity", 2).unwrap();
        for e in 0..m.n_elements() {
            assert_eq!(
                element_average(f.as_ref(), &m, e).unwrap(),
                Tensor::identity(2)
            );
            assert_eq!(seminorms(f.as_ref(), &m, e), (0.0, 0.0));
        }
    }

    #[test]
    fn linear_field_average() {
        let m = interval(0.0, 1.0);
        let f = FnField::new(1, "x", |x| Tensor::scalar(1, x[0]));
        let avg = element_average(&f, &m, 0).unwrap();
        assert!((avg.get(0, 0) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn quartic_average_is_exact() {
        let m = generate_mesh("jittered", &MeshParams::new(2, 3).with_seed(3)).unwrap();
        let f = FnField::new(2, "quartic", |x| {
            Tensor::scalar(2, 1.0 + x[0].powi(3) * x[1] + x[1].powi(4))
        });
        // Reference by a much finer conical rule.
        let fine = SimplexRule::conical(2, 8);
        for e in 0..m.n_elements() {
            let a = element_average(&f, &m, e).unwrap().get(0, 0);
            let b = element_average_with(&f, &m, e, &fine).unwrap().get(0, 0);
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn rotated_field_is_constant_where_angle_is() {
        let f = RotatedAnisotropic { epsilon: 0.01 };
        // theta vanishes on the line x = 0
        let t = f.eval(&[0.0, 0.4, 0.0]);
        assert!((t.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((t.get(1, 1) - 0.01).abs() < 1e-15);
        assert!(t.get(0, 1).abs() < 1e-15);
        let x = [0.3, 0.7, 0.0];
        let theta: f64 = PI * 0.3f64.sin() * 0.7f64.cos();
        let (s, c) = theta.sin_cos();
        let expected = [c * c + 0.01 * s * s, c * s * 0.99, s * s + 0.01 * c * c];
        let t = f.eval(&x);
        assert!((t.get(0, 0) - expected[0]).abs() < 1e-14);
        assert!((t.get(0, 1) - expected[1]).abs() < 1e-14);
        assert!((t.get(1, 1) - expected[2]).abs() < 1e-14);
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let fields: Vec<Arc<dyn DiffusionField>> = vec![
            Arc::new(RotatedAnisotropic { epsilon: 0.01 }),
            Arc::new(OnePlusExpX5 { dim: 2 }),
        ];
        let x = [0.37, 0.61, 0.0];
        let delta = 1e-6;
        for f in fields {
            let g = f.gradient(&x).unwrap();
            let h = f.hessian(&x).unwrap();
            for k in 0..2 {
                let mut fd = f.eval(&shifted(&x, k, delta));
                fd.add_scaled(-1.0, &f.eval(&shifted(&x, k, -delta)));
                assert!(max_entry_diff(&fd.scaled(0.5 / delta), &g[k], 1.0) < 1e-7);
                let gp = f.gradient(&shifted(&x, k, delta)).unwrap();
                let gm = f.gradient(&shifted(&x, k, -delta)).unwrap();
                for l in 0..2 {
                    let mut fd = gp[l];
                    fd.add_scaled(-1.0, &gm[l]);
                    assert!(max_entry_diff(&fd.scaled(0.5 / delta), &h[k * 2 + l], 1.0) < 1e-6);
                }
            }
        }
    }

    #[test]
    fn exp_field_seminorm_near_right_end() {
        let m = interval(0.9, 1.0);
        let f = OnePlusExpX5 { dim: 1 };
        let (s1, _) = seminorms(&f, &m, 0);
        let scan = (0..=10_000)
            .map(|i| {
                let x: f64 = 0.9 + 0.1 * i as f64 / 10_000.0;
                5.0 * x.powi(4) * x.powi(5).exp()
            })
            .fold(0.0, f64::max);
        assert!((s1 - scan).abs() < 1e-12 * scan);
        assert!((s1 - 5.0 * std::f64::consts::E).abs() < 1e-12);
        // finite-difference surrogate agrees
        let plain = FnField::new(1, "fd", |x| Tensor::scalar(1, 1.0 + x[0].powi(5).exp()));
        let (fd1, fd2) = seminorms(&plain, &m, 0);
        let (_, s2) = seminorms(&f, &m, 0);
        assert!((fd1 - s1).abs() < 1e-6 * s1);
        assert!((fd2 - s2).abs() < 1e-4 * s2);
    }

    #[test]
    fn piecewise_constant_has_zero_seminorms() {
        let m = generate_mesh("uniform", &MeshParams::new(2, 2)).unwrap();
        let values = (0..m.n_elements())
            .map(|e| Tensor::scalar(2, 1.0 + e as f64))
            .collect();
        let f = PiecewiseConstantField { values };
        for e in 0..m.n_elements() {
            assert_eq!(seminorms(&f, &m, e), (0.0, 0.0));
            assert_eq!(
                element_average(&f, &m, e).unwrap().get(0, 0),
                1.0 + e as f64
            );
        }
        assert_eq!(global_spectral_bounds(&f, &m).unwrap(), (1.0, 8.0));
    }

    #[test]
    fn spectral_bounds_of_named_fields() {
        let m = generate_mesh("uniform", &MeshParams::new(2, 4)).unwrap();
        let (lo, hi) =
            global_spectral_bounds(field_by_name("identity", 2).unwrap().as_ref(), &m).unwrap();
        assert_eq!((lo, hi), (1.0, 1.0));
        let f = field_by_name("constant:2,5", 2).unwrap();
        let (lo, hi) = global_spectral_bounds(f.as_ref(), &m).unwrap();
        assert!((lo - 2.0).abs() < 1e-14 && (hi - 5.0).abs() < 1e-14);
        let f = field_by_name("rotated_anisotropic_0.01", 2).unwrap();
        let (lo, hi) = global_spectral_bounds(f.as_ref(), &m).unwrap();
        assert!((lo - 0.01).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn name_errors() {
        assert!(matches!(
            field_by_name("banana", 2),
            Err(Error::UnknownField(_))
        ));
        assert!(matches!(
            field_by_name("rotated_anisotropic_0.01", 3),
            Err(Error::InconsistentDimension(_))
        ));
        assert!(matches!(
            field_by_name("constant:1,2,3", 2),
            Err(Error::InconsistentDimension(_))
        ));
        assert!(matches!(
            field_by_name("constant:1,-1", 2),
            Err(Error::NonSpdSample { .. })
        ));
        assert!(matches!(
            field_by_name("constant:1,2,0,1", 2),
            Err(Error::NonSpdSample { .. })
        ));
        assert!(matches!(
            field_by_name("constant:x", 1),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn metric_size_of_constant_scalar() {
        for n in [3, 10] {
            let m = generate_mesh("uniform", &MeshParams::new(1, n)).unwrap();
            let f = field_by_name("constant:4", 1).unwrap();
            let data = element_data(f.as_ref(), &m).unwrap();
            assert!((d_inverse_metric_size(&data, &m) - 0.5 / n as f64).abs() < 1e-15);
            assert!(d_inverse_uniform_deviation(&data, &m) < 1e-12);
        }
    }

    #[test]
    fn equilateral_mesh_is_metric_uniform_for_identity() {
        let m = generate_mesh("equilateral2d", &MeshParams::new(2, 6)).unwrap();
        let f = field_by_name("identity", 2).unwrap();
        let data = element_data(f.as_ref(), &m).unwrap();
        assert!(d_inverse_uniform_deviation(&data, &m) < 1e-10);
    }

    #[test]
    fn skew_deviation_grows_with_aspect() {
        let f = field_by_name("identity", 2).unwrap();
        let mut last = 0.0;
        for aspect in [5.0, 25.0, 125.0] {
            let m = generate_mesh("skew2d", &MeshParams::new(2, 8).with_aspect(aspect)).unwrap();
            let data = element_data(f.as_ref(), &m).unwrap();
            let dev = d_inverse_uniform_deviation(&data, &m);
            assert!(dev > last && dev > 1.0);
            last = dev;
        }
    }
}
