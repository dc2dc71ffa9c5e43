//! Acceptance criteria 1–13. Each criterion is one test; run with
//! `cargo test -p fvem --test acceptance -- --nocapture` to see the
//! per-criterion summary lines.

use std::sync::OnceLock;
use std::time::Instant;

use fvem::assembly::{
    assemble_fem_stiffness, assemble_fvem_stiffness, projection_orthogonality_residual,
    verify_mass_constants,
};
use fvem::bounds::mass_bounds;
use fvem::bounds::mass_sandwiches;
use fvem::diffusion::ConstantField;
use fvem::experiments::{
    loglog_slope, run_experiment, ExperimentResult, ExperimentRow, ExperimentSpec, ALL_QUANTITIES,
};
use fvem::mesh::{build_mesh, generate_mesh, MeshParams, SimplicialMesh};
use fvem::spectral::{condition_number, SpectralOptions};
use fvem::tensor::{Point, Tensor};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: usize, name: &str, start: Instant, failures: &[String]) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!(
        "criterion {id:2} {status} {name} ({:.2} s)",
        start.elapsed().as_secs_f64()
    );
    for f in failures.iter().take(10) {
        println!("    {f}");
    }
    assert!(failures.is_empty(), "criterion {id} failed: {failures:?}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_spd(dim: usize, rng: &mut ChaCha8Rng) -> Tensor {
    let l = DMatrix::from_fn(dim, dim, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
    let a = &l * l.transpose() + DMatrix::identity(dim, dim) * 0.1;
    Tensor::from_dmatrix(&a)
}

fn random_simplex(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    loop {
        let pts: Vec<Point> = (0..=dim)
            .map(|_| {
                let mut p = [0.0; 3];
                for c in p.iter_mut().take(dim) {
                    *c = rng.gen::<f64>() * 2.0 - 1.0;
                }
                p
            })
            .collect();
        let e = DMatrix::from_fn(dim, dim, |r, c| pts[c + 1][r] - pts[0][r]);
        // keep elements away from degeneracy so the relative check is meaningful
        let scale: f64 = (1..=dim)
            .map(|k| (0..dim).map(|r| e[(r, k - 1)].powi(2)).sum::<f64>().sqrt())
            .product();
        if e.determinant().abs() > 1e-3 * scale {
            return pts;
        }
    }
}

/// `(|K|, ∇λ_0..∇λ_d)` from the inverse of the barycentric system.
fn oracle_gradients(points: &[Point], dim: usize) -> (f64, Vec<DVector<f64>>) {
    let mut t = DMatrix::zeros(dim + 1, dim + 1);
    for (j, p) in points.iter().enumerate() {
        t[(0, j)] = 1.0;
        for r in 0..dim {
            t[(r + 1, j)] = p[r];
        }
    }
    let fact: f64 = (1..=dim).map(|k| k as f64).product();
    let vol = t.determinant().abs() / fact;
    let inv = t.try_inverse().unwrap();
    let grads = (0..=dim)
        .map(|i| DVector::from_fn(dim, |r, _| inv[(i, r + 1)]))
        .collect();
    (vol, grads)
}

fn random_meshes(dim: usize, count: usize, seed: u64) -> Vec<SimplicialMesh> {
    let sizes: &[usize] = match dim {
        1 => &[5, 8, 13],
        2 => &[3, 4, 6],
        _ => &[2, 3],
    };
    (0..count)
        .map(|k| {
            let params = MeshParams::new(dim, sizes[k % sizes.len()])
                .with_seed(seed + k as u64)
                .with_amplitude(0.4);
            generate_mesh("jittered", &params).unwrap()
        })
        .collect()
}

#[test]
fn criterion_01_mass_constants() {
    let start = Instant::now();
    let expected = [
        (3.0 / 8.0, 1.0 / 8.0),
        (11.0 / 54.0, 7.0 / 108.0),
        (25.0 / 192.0, 23.0 / 576.0),
    ];
    let mut failures = Vec::new();
    for (d, (m1, m2)) in (1..=3).zip(expected) {
        let c = verify_mass_constants(d);
        for (name, got, want) in [
            ("m1", c.m1, m1),
            ("m2", c.m2, m2),
            ("oracle m1", c.oracle_m1, m1),
            ("oracle m2", c.oracle_m2, m2),
        ] {
            if (got - want).abs() > 1e-10 {
                failures.push(format!("d={d} {name}: {got} vs {want}"));
            }
        }
    }
    report(1, "mass constants", start, &failures);
}

#[test]
fn criterion_02_constant_field_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    for dim in 1..=3 {
        for mesh in random_meshes(dim, 20, 200) {
            for _ in 0..5 {
                let field = ConstantField(random_spd(dim, &mut rng));
                let fv = assemble_fvem_stiffness(&mesh, &field).unwrap();
                let fe = assemble_fem_stiffness(&mesh, &field).unwrap();
                let diff = fv.sub(&fe).norm_inf();
                if diff > 1e-12 * fe.norm_inf() {
                    failures.push(format!("d={dim}: {diff:e} vs {:e}", fe.norm_inf()));
                }
            }
        }
    }
    report(2, "constant-field FV/FE equivalence", start, &failures);
}

#[test]
fn criterion_03_dual_geometry_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = Vec::new();
    for dim in 1..=3 {
        for _ in 0..10_000 {
            let pts = random_simplex(dim, &mut rng);
            let (vol, grads) = oracle_gradients(&pts, dim);
            let mesh = build_mesh(
                dim,
                pts.clone(),
                vec![(0..=dim).collect()],
                vec![false; dim + 1],
                None,
            )
            .unwrap();
            let cells = mesh.dual_subdivision(0);
            for (i, grad) in grads.iter().enumerate() {
                let mut sum = DVector::zeros(dim);
                for f in cells.faces_of(i) {
                    for r in 0..dim {
                        sum[r] += f.normal[r] * f.measure;
                    }
                }
                let want = -grad * vol;
                let err = (&sum - &want).norm() / want.norm();
                if err > 1e-10 {
                    failures.push(format!("d={dim} vertex {i}: relative error {err:e}"));
                }
            }
        }
    }
    report(3, "dual-geometry identity", start, &failures);
}

#[test]
fn criterion_04_projection_orthogonality() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    for dim in 1..=3 {
        for mesh in random_meshes(dim, 100, 400) {
            let v: Vec<f64> = (0..mesh.n_vertices())
                .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
                .collect();
            let scale = mesh.domain_measure() * v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let r = projection_orthogonality_residual(&mesh, &v);
            if r > 1e-12 * scale {
                failures.push(format!("d={dim}: residual {r:e}, scale {scale:e}"));
            }
        }
    }
    report(4, "projection orthogonality", start, &failures);
}

#[test]
fn criterion_05_spectral_anchors() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let identity = ConstantField(Tensor::identity(1));
    for n in [16usize, 64, 256] {
        let mesh = generate_mesh("uniform", &MeshParams::new(1, n)).unwrap();
        let a = assemble_fvem_stiffness(&mesh, &identity).unwrap();
        let r = condition_number(&a, &SpectralOptions::default()).unwrap();
        let h = 1.0 / n as f64;
        let c = (std::f64::consts::PI / n as f64).cos();
        let (smax, lmin) = (2.0 / h * (1.0 + c), 2.0 / h * (1.0 - c));
        if rel(r.sigma_max, smax) > 1e-8 {
            failures.push(format!("N={n}: sigma_max {} vs {smax}", r.sigma_max));
        }
        if rel(r.lambda_min_sym, lmin) > 1e-8 {
            failures.push(format!("N={n}: lambda_min {} vs {lmin}", r.lambda_min_sym));
        }
    }
    report(5, "1-D Laplacian closed forms", start, &failures);
}

/// One instance of every mesh family the generator offers.
fn family_instances() -> Vec<SimplicialMesh> {
    let mut out = Vec::new();
    for n in [8, 33, 64] {
        out.push(generate_mesh("chebyshev1d", &MeshParams::new(1, n)).unwrap());
    }
    for dim in 1..=3 {
        for n in match dim {
            1 => vec![8, 32],
            2 => vec![4, 16],
            _ => vec![3, 6],
        } {
            out.push(generate_mesh("uniform", &MeshParams::new(dim, n)).unwrap());
            out.push(
                generate_mesh("jittered", &MeshParams::new(dim, n).with_seed(n as u64)).unwrap(),
            );
        }
    }
    for n in [4, 8, 16] {
        out.push(generate_mesh("skew2d", &MeshParams::new(2, n)).unwrap());
        out.push(generate_mesh("equilateral2d", &MeshParams::new(2, n)).unwrap());
    }
    for n in [4, 6] {
        out.push(generate_mesh("skew3d", &MeshParams::new(3, n)).unwrap());
    }
    for aspect in [4.0, 125.0, 500.0] {
        out.push(generate_mesh("aspect2d", &MeshParams::new(2, 31).with_aspect(aspect)).unwrap());
    }
    out
}

#[test]
fn criterion_06_mass_condition_bracket() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let opts = SpectralOptions::default();
    for mesh in family_instances() {
        let r = mass_bounds(&mesh, &opts).unwrap();
        let scaled_cap = [2.0, 2.4, 36.0 / 13.0][mesh.dim() - 1];
        let tag = format!("{} {}", mesh.metadata().family, mesh.metadata().params);
        if !(r.lower <= r.kappa * (1.0 + 1e-9) && r.kappa <= r.upper * (1.0 + 1e-9)) {
            failures.push(format!(
                "{tag}: kappa {} outside [{}, {}]",
                r.kappa, r.lower, r.upper
            ));
        }
        if r.scaled_kappa > scaled_cap * (1.0 + 1e-9) {
            failures.push(format!(
                "{tag}: scaled kappa {} > {scaled_cap}",
                r.scaled_kappa
            ));
        }
    }
    report(6, "mass condition bracket", start, &failures);
}

#[test]
fn criterion_07_mass_form_sandwiches() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (k, mesh) in family_instances().iter().enumerate() {
        let s = mass_sandwiches(mesh, 200, 700 + k as u64);
        let tag = format!("{} {}", mesh.metadata().family, mesh.metadata().params);
        for (name, v) in [
            ("diagonal", s.diagonal),
            ("lumped", s.lumped),
            ("lumped entries", s.lumped_entries),
        ] {
            if v > 1.0 + 1e-12 {
                failures.push(format!("{tag}: {name} sandwich ratio {v}"));
            }
        }
    }
    report(7, "mass quadratic-form sandwiches", start, &failures);
}

fn example(id: usize) -> &'static ExperimentResult {
    static CACHE: [OnceLock<ExperimentResult>; 4] = [
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
        OnceLock::new(),
    ];
    CACHE[id - 1].get_or_init(|| {
        let spec = ExperimentSpec::example(id, false).unwrap();
        run_experiment(&spec, &SpectralOptions::experiment()).unwrap()
    })
}

fn uniform_sweep(dim: usize) -> &'static ExperimentResult {
    static CACHE: [OnceLock<ExperimentResult>; 3] =
        [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    CACHE[dim - 1].get_or_init(|| {
        let sizes = match dim {
            1 => vec![64, 128, 256, 512, 1024],
            2 => vec![8, 16, 32, 64],
            _ => vec![4, 6, 8, 12, 16],
        };
        let spec = ExperimentSpec {
            id: None,
            family: "uniform".into(),
            dim,
            field: "identity".into(),
            sizes,
            aspects: vec![],
            quantities: ALL_QUANTITIES.to_vec(),
            gmres_tol: 1e-10,
            gmres_maxit: 500,
        };
        run_experiment(&spec, &SpectralOptions::experiment()).unwrap()
    })
}

fn all_sweeps() -> Vec<(String, &'static ExperimentResult)> {
    let mut v: Vec<(String, &'static ExperimentResult)> = (1..=4)
        .map(|id| (format!("example {id}"), example(id)))
        .collect();
    for dim in 1..=3 {
        v.push((format!("uniform d={dim}"), uniform_sweep(dim)));
    }
    v
}

#[test]
fn criterion_08_bound_dominance() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut checked = 0;
    for id in 1..=3 {
        for r in &example(id).rows {
            if r.fine != Some(true) {
                continue;
            }
            let tag = format!("example {id} N={}", r.n_elements);
            let (Some(s), Some(l), Some(k)) = (r.sigma_max, r.lambda_min, r.kappa_afv) else {
                failures.push(format!("{tag}: exact values missing"));
                continue;
            };
            match (r.bound_eig_fv_max, r.bound_eig_fv_min, r.bound_cond1) {
                (Some(bs), Some(bl), Some(bk)) => {
                    if bs < s {
                        failures.push(format!("{tag}: sigma bound {bs} < {s}"));
                    }
                    if bl > l {
                        failures.push(format!("{tag}: lambda bound {bl} > {l}"));
                    }
                    if bk < k {
                        failures.push(format!("{tag}: cond-1 bound {bk} < {k}"));
                    }
                    checked += 1;
                }
                _ => failures.push(format!("{tag}: bounds missing")),
            }
        }
    }
    if checked == 0 {
        failures.push("no fine-mesh rows".into());
    }
    report(8, "bound dominance", start, &failures);
}

#[test]
fn criterion_09_asymptotic_order() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for dim in 1..=3 {
        let rows = &uniform_sweep(dim).rows;
        let n: Vec<f64> = rows.iter().map(|r| r.n_elements as f64).collect();
        let exact: Vec<f64> = rows.iter().map(|r| r.kappa_afv.unwrap()).collect();
        let bound: Vec<f64> = rows.iter().map(|r| r.bound_cond1.unwrap()).collect();
        let want = 2.0 / dim as f64;
        let (se, sb) = (loglog_slope(&n, &exact), loglog_slope(&n, &bound));
        println!("    d={dim}: exact slope {se:.4}, bound slope {sb:.4}, expected {want:.4}");
        if rel(se, want) > 0.1 {
            failures.push(format!("d={dim}: exact slope {se} vs {want}"));
        }
        if rel(sb, want) > 0.1 {
            failures.push(format!("d={dim}: bound slope {sb} vs {want}"));
        }
    }
    report(9, "asymptotic order", start, &failures);
}

#[test]
fn criterion_10_scaling_effect() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let rows = &example(1).rows;
    for r in rows {
        let (k, ks) = (r.kappa_afv.unwrap(), r.kappa_sas.unwrap());
        if ks >= k {
            failures.push(format!("N={}: scaled {ks} >= unscaled {k}", r.n_elements));
        }
    }
    let n: Vec<f64> = rows.iter().map(|r| r.n_elements as f64).collect();
    let k: Vec<f64> = rows.iter().map(|r| r.kappa_afv.unwrap()).collect();
    let ks: Vec<f64> = rows.iter().map(|r| r.kappa_sas.unwrap()).collect();
    let (s, ss) = (loglog_slope(&n, &k), loglog_slope(&n, &ks));
    println!("    unscaled slope {s:.4}, scaled slope {ss:.4}");
    if ss >= s {
        failures.push(format!("scaled slope {ss} >= unscaled slope {s}"));
    }
    report(10, "Jacobi scaling effect", start, &failures);
}

#[test]
fn criterion_11_aspect_sweep() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let rows = &example(4).rows;
    let increasing =
        |f: &dyn Fn(&ExperimentRow) -> f64| rows.windows(2).all(|w| f(&w[0]) < f(&w[1]));
    if !increasing(&|r| r.kappa_afv.unwrap()) {
        failures.push("stiffness kappa not increasing with aspect".into());
    }
    if !increasing(&|r| r.kappa_m.unwrap()) {
        failures.push("mass kappa not increasing with aspect".into());
    }
    let sms: Vec<f64> = rows.iter().map(|r| r.kappa_sms.unwrap()).collect();
    let (lo, hi) = sms
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    if (hi - lo) / lo >= 0.05 {
        failures.push(format!("scaled mass kappa varies from {lo} to {hi}"));
    }
    if hi > 2.4 {
        failures.push(format!("scaled mass kappa {hi} > 2.4"));
    }
    for r in rows {
        println!(
            "    aspect {:>6}: kappa_AFV {:.4e}, kappa_M {:.4e}, kappa_SMS {:.6}",
            r.aspect.unwrap(),
            r.kappa_afv.unwrap(),
            r.kappa_m.unwrap(),
            r.kappa_sms.unwrap()
        );
    }
    report(11, "aspect-ratio sweep", start, &failures);
}

#[test]
fn criterion_12_gmres_envelope() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (name, res) in all_sweeps() {
        for r in &res.rows {
            if r.kappa_afv.is_some() && r.envelope_afv != Some(true) {
                failures.push(format!(
                    "{name} N={}: unscaled envelope {:?}",
                    r.n_elements, r.envelope_afv
                ));
            }
            if r.kappa_sas.is_some() && r.envelope_sas != Some(true) {
                failures.push(format!(
                    "{name} N={}: scaled envelope {:?}",
                    r.n_elements, r.envelope_sas
                ));
            }
        }
    }
    report(12, "GMRES residual envelope", start, &failures);
}

#[test]
fn criterion_13_positive_definiteness() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (name, res) in all_sweeps() {
        for r in &res.rows {
            if r.fine == Some(true) && !matches!(r.lambda_min, Some(l) if l > 0.0) {
                failures.push(format!(
                    "{name} N={}: fine mesh but lambda_min {:?}",
                    r.n_elements, r.lambda_min
                ));
            }
        }
    }
    report(13, "positive definiteness on fine meshes", start, &failures);
}
