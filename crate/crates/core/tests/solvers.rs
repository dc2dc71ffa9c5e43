use fvem::assembly::{assemble_fvem_stiffness, assemble_load, jacobi_scale};
use fvem::diffusion::OnePlusExpX5;
use fvem::krylov::{check_eisenstat, gmres};
use fvem::mesh::{generate_mesh, MeshParams};
use fvem::spectral::{condition_number, SpectralOptions};

fn gmres_counts(n: usize) -> (usize, usize) {
    let mesh = generate_mesh("chebyshev1d", &MeshParams::new(1, n)).unwrap();
    let field = OnePlusExpX5 { dim: 1 };
    let a = assemble_fvem_stiffness(&mesh, &field).unwrap();
    let b = assemble_load(&mesh, &|_| 1.0);
    let (sa, s) = jacobi_scale(&a).unwrap();
    let sb: Vec<f64> = b.iter().zip(&s).map(|(v, si)| v / si).collect();
    let plain = gmres(&a, &b, 1e-10, a.n()).unwrap();
    let scaled = gmres(&sa, &sb, 1e-10, a.n()).unwrap();
    let opts = SpectralOptions::default();
    for (m, r) in [(&a, &plain), (&sa, &scaled)] {
        let spec = condition_number(m, &opts).unwrap();
        let env = check_eisenstat(r, spec.sigma_max, spec.lambda_min_sym).unwrap();
        assert!(env.all_satisfied);
    }
    (plain.iterations, scaled.iterations)
}

#[test]
fn chebyshev_system_converges_with_and_without_scaling() {
    let (plain, scaled) = gmres_counts(64);
    // both runs reach the Krylov dimension of the 63 unknowns
    assert!(scaled <= plain && plain <= 63, "{plain} {scaled}");
}

#[test]
fn scaling_does_not_increase_gmres_iterations() {
    for n in [256, 512] {
        let (plain, scaled) = gmres_counts(n);
        assert!(scaled <= plain, "N={n}: {scaled} > {plain}");
    }
}
