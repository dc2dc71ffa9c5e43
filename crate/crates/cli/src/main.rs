use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fvem::assembly::{
    assemble_fem_stiffness, assemble_fvem_stiffness, assemble_load, assemble_lumped_mass,
    assemble_mass, jacobi_scale,
};
use fvem::bounds::{bound_report, calibrate_uniform, default_calibration_sizes, mass_bounds};
use fvem::diffusion::field_by_name;
use fvem::experiments::{run_experiment, ExperimentSpec, Quantity};
use fvem::krylov::{check_eisenstat, gmres_history, residual_csv};
use fvem::mesh::{generate_mesh, mesh_stats, MeshParams, SimplicialMesh};
use fvem::sparse::{write_vector, SparseRealMatrix};
use fvem::spectral::{condition_number, SpectralOptions};
use fvem::{Error, ErrorFamily};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "fvem",
    version,
    about = "Finite volume element conditioning experiments"
)]
struct Cli {
    /// Use fixed seeds for random meshes and start vectors.
    #[arg(long, global = true, default_value_t = true, action = clap::ArgAction::Set)]
    seed_deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or inspect meshes.
    Mesh {
        #[command(subcommand)]
        action: MeshAction,
    },
    /// Assemble an operator or load vector.
    Assemble {
        #[arg(value_enum)]
        operator: Operator,
        #[command(flatten)]
        mesh: MeshSource,
        #[arg(long, default_value = "identity")]
        field: String,
        /// Apply symmetric Jacobi scaling S⁻¹AS⁻¹.
        #[arg(long)]
        scaled: bool,
        #[command(flatten)]
        output: Output,
    },
    /// σ_max, λ_min of the symmetric part and κ of A_FV.
    Spectrum {
        #[command(flatten)]
        mesh: MeshSource,
        #[arg(long, default_value = "identity")]
        field: String,
        #[arg(long)]
        scaled: bool,
        /// Relative tolerance of the extremal eigenvalue iterations.
        #[arg(long)]
        tol: Option<f64>,
        /// Report the mass matrix instead of the stiffness matrix.
        #[arg(long)]
        mass: bool,
        #[command(flatten)]
        output: Output,
    },
    /// A-priori bounds alongside the exact values.
    Bounds {
        #[command(flatten)]
        mesh: MeshSource,
        #[arg(long, default_value = "identity")]
        field: String,
        #[arg(long)]
        tol: Option<f64>,
        /// Skip the uniform-mesh calibration of the generic constant.
        #[arg(long)]
        no_calibration: bool,
        #[command(flatten)]
        output: Output,
    },
    /// GMRES on A_FV u = F for f = 1, with the residual envelope check.
    Solve {
        #[command(flatten)]
        mesh: MeshSource,
        #[arg(long, default_value = "identity")]
        field: String,
        #[arg(long)]
        scaled: bool,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 1000)]
        maxit: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Run a numbered example sweep.
    Experiment {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        example: u8,
        /// Use the largest (slow) example sizes.
        #[arg(long)]
        full: bool,
        /// Override the size sweep (cells per side), comma separated.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Override the aspect-ratio sweep, comma separated.
        #[arg(long, value_delimiter = ',')]
        aspects: Option<Vec<f64>>,
        /// Subset of kappa,bounds,mass,gmres.
        #[arg(long, value_delimiter = ',')]
        quantities: Option<Vec<String>>,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand)]
enum MeshAction {
    /// Generate a mesh and write it as JSON.
    Gen {
        #[command(flatten)]
        params: GenParams,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print mesh statistics.
    Info {
        #[command(flatten)]
        mesh: MeshSource,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Operator {
    Fv,
    Fe,
    Mass,
    Lump,
    Load,
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
    Mtx,
}

#[derive(Args)]
struct GenParams {
    #[arg(long, default_value = "uniform")]
    family: String,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long)]
    aspect: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Either `--mesh <file>` or generator parameters.
#[derive(Args)]
struct MeshSource {
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[command(flatten)]
    params: GenParams,
}

#[derive(Args)]
struct Output {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Library(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Library(Error::Json(e))
    }
}

type CliResult<T> = Result<T, CliError>;

fn exit_code(e: &CliError) -> u8 {
    match e {
        CliError::Usage(_) => 2,
        CliError::Io(_) => 8,
        CliError::Library(e) => match e.family() {
            ErrorFamily::Mesh => 3,
            ErrorFamily::Field => 4,
            ErrorFamily::Assembly => 5,
            ErrorFamily::Solver => 6,
            ErrorFamily::Bounds => 7,
            ErrorFamily::Input => 8,
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

impl GenParams {
    fn generate(&self, deterministic: bool) -> CliResult<SimplicialMesh> {
        let seed = if deterministic {
            self.seed
        } else {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos() as u64)
                .unwrap_or(self.seed)
        };
        let mut params = MeshParams::new(self.d, self.n).with_seed(seed);
        if let Some(a) = self.aspect {
            params = params.with_aspect(a);
        }
        Ok(generate_mesh(&self.family, &params)?)
    }
}

impl MeshSource {
    fn load(&self, deterministic: bool) -> CliResult<SimplicialMesh> {
        match &self.mesh {
            Some(path) => Ok(SimplicialMesh::read(path)?),
            None => self.params.generate(deterministic),
        }
    }
}

impl Output {
    fn writer(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        })
    }

    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn json<T: Serialize>(&self, value: &T) -> CliResult<()> {
        let mut w = self.writer()?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    fn text(&self, body: &str) -> CliResult<()> {
        let mut w = self.writer()?;
        w.write_all(body.as_bytes())?;
        w.flush()?;
        Ok(())
    }
}

fn spectral_options(tol: Option<f64>, default: SpectralOptions) -> SpectralOptions {
    match tol {
        Some(t) => SpectralOptions {
            sigma_tol: t,
            lambda_tol: t,
            ..default
        },
        None => default,
    }
}

fn matrix_output(a: &SparseRealMatrix, output: &Output) -> CliResult<()> {
    match output.format_or(Format::Mtx) {
        Format::Mtx => {
            let mut w = output.writer()?;
            a.write_matrix_market(&mut w)?;
            w.flush()?;
            Ok(())
        }
        Format::Csv => {
            let mut body = String::from("row,col,value\n");
            for (i, j, v) in a.triplets() {
                body.push_str(&format!("{i},{j},{v:e}\n"));
            }
            output.text(&body)
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Triplets {
                n: usize,
                symmetry: fvem::sparse::Symmetry,
                entries: Vec<(usize, usize, f64)>,
            }
            output.json(&Triplets {
                n: a.n(),
                symmetry: a.symmetry(),
                entries: a.triplets().collect(),
            })
        }
    }
}

fn key_value_csv(pairs: &[(&str, String)]) -> String {
    let keys: Vec<&str> = pairs.iter().map(|p| p.0).collect();
    let values: Vec<&str> = pairs.iter().map(|p| p.1.as_str()).collect();
    format!("{}\n{}\n", keys.join(","), values.join(","))
}

fn run(cli: Cli) -> CliResult<()> {
    let det = cli.seed_deterministic;
    match cli.command {
        Command::Mesh { action } => match action {
            MeshAction::Gen { params, out } => {
                let mesh = params.generate(det)?;
                let output = Output {
                    out,
                    format: Some(Format::Json),
                };
                output.text(&(mesh.to_json()? + "\n"))
            }
            MeshAction::Info { mesh, output } => {
                let mesh = mesh.load(det)?;
                let stats = mesh_stats(&mesh);
                match output.format_or(Format::Json) {
                    Format::Json => {
                        #[derive(Serialize)]
                        struct Info<'a> {
                            dim: usize,
                            n_vertices: usize,
                            metadata: &'a fvem::mesh::MeshMetadata,
                            stats: fvem::mesh::MeshStats,
                        }
                        output.json(&Info {
                            dim: mesh.dim(),
                            n_vertices: mesh.n_vertices(),
                            metadata: mesh.metadata(),
                            stats,
                        })
                    }
                    Format::Csv => output.text(&key_value_csv(&[
                        ("dim", mesh.dim().to_string()),
                        ("n_vertices", mesh.n_vertices().to_string()),
                        ("N", stats.n_elements.to_string()),
                        ("n_interior", stats.n_interior.to_string()),
                        ("mean_volume", format!("{:e}", stats.mean_volume)),
                        ("min_volume", format!("{:e}", stats.min_volume)),
                        ("max_aspect_ratio", format!("{:e}", stats.max_aspect_ratio)),
                    ])),
                    Format::Mtx => Err(CliError::Usage("mesh info supports csv or json".into())),
                }
            }
        },
        Command::Assemble {
            operator,
            mesh,
            field,
            scaled,
            output,
        } => {
            let mesh = mesh.load(det)?;
            if let Operator::Load = operator {
                let b = assemble_load(&mesh, &|_| 1.0);
                return match output.format_or(Format::Mtx) {
                    Format::Json => output.json(&b),
                    Format::Csv => {
                        let body: String = std::iter::once("value\n".to_string())
                            .chain(b.iter().map(|v| format!("{v:e}\n")))
                            .collect();
                        output.text(&body)
                    }
                    Format::Mtx => {
                        let mut w = output.writer()?;
                        writeln!(w, "%%MatrixMarket matrix array real general")?;
                        writeln!(w, "{} 1", b.len())?;
                        write_vector(&mut w, &b)?;
                        w.flush()?;
                        Ok(())
                    }
                };
            }
            let f = field_by_name(&field, mesh.dim())?;
            let a = match operator {
                Operator::Fv => assemble_fvem_stiffness(&mesh, f.as_ref())?,
                Operator::Fe => assemble_fem_stiffness(&mesh, f.as_ref())?,
                Operator::Mass => assemble_mass(&mesh),
                Operator::Lump => assemble_lumped_mass(&mesh),
                Operator::Load => unreachable!(),
            };
            let a = if scaled { jacobi_scale(&a)?.0 } else { a };
            matrix_output(&a, &output)
        }
        Command::Spectrum {
            mesh,
            field,
            scaled,
            tol,
            mass,
            output,
        } => {
            let mesh = mesh.load(det)?;
            let opts = spectral_options(tol, SpectralOptions::default());
            if mass {
                let r = mass_bounds(&mesh, &opts)?;
                return match output.format_or(Format::Json) {
                    Format::Csv => output.text(&key_value_csv(&[
                        ("kappa_M", format!("{:e}", r.kappa)),
                        ("kappa_SMS", format!("{:e}", r.scaled_kappa)),
                        ("bound_kappaM_lower", format!("{:e}", r.lower)),
                        ("bound_kappaM_upper", format!("{:e}", r.upper)),
                        ("bound_kappaSMS_upper", format!("{:e}", r.scaled_upper)),
                    ])),
                    _ => output.json(&r),
                };
            }
            let f = field_by_name(&field, mesh.dim())?;
            let a = assemble_fvem_stiffness(&mesh, f.as_ref())?;
            let a = if scaled { jacobi_scale(&a)?.0 } else { a };
            let r = condition_number(&a, &opts)?;
            match output.format_or(Format::Json) {
                Format::Csv => output.text(&key_value_csv(&[
                    ("n", r.n.to_string()),
                    ("sigma_max", format!("{:e}", r.sigma_max)),
                    ("lambda_min", format!("{:e}", r.lambda_min_sym)),
                    ("kappa", format!("{:e}", r.kappa)),
                    ("sigma_iterations", r.sigma_iterations.to_string()),
                    ("lambda_iterations", r.lambda_iterations.to_string()),
                ])),
                _ => output.json(&r),
            }
        }
        Command::Bounds {
            mesh,
            field,
            tol,
            no_calibration,
            output,
        } => {
            let mesh = mesh.load(det)?;
            let f = field_by_name(&field, mesh.dim())?;
            let opts = spectral_options(tol, SpectralOptions::experiment());
            let calibrate = |scaled: bool| -> CliResult<Option<_>> {
                if no_calibration {
                    return Ok(None);
                }
                let sizes = default_calibration_sizes(mesh.dim());
                match calibrate_uniform(mesh.dim(), f.as_ref(), &sizes, scaled, &opts) {
                    Ok(c) => Ok(Some(c)),
                    Err(Error::CoarseMeshRegime { .. }) => Ok(None),
                    Err(e) => Err(e.into()),
                }
            };
            let (cu, cs) = (calibrate(false)?, calibrate(true)?);
            let report = bound_report(&mesh, f.as_ref(), cu, cs, Some(&opts))?;
            output.json(&report)
        }
        Command::Solve {
            mesh,
            field,
            scaled,
            tol,
            maxit,
            output,
        } => {
            let mesh = mesh.load(det)?;
            let f = field_by_name(&field, mesh.dim())?;
            let a = assemble_fvem_stiffness(&mesh, f.as_ref())?;
            let b = assemble_load(&mesh, &|_| 1.0);
            let (a, b) = if scaled {
                let (sa, s) = jacobi_scale(&a)?;
                let sb = b.iter().zip(&s).map(|(v, si)| v / si).collect();
                (sa, sb)
            } else {
                (a, b)
            };
            let mut report = gmres_history(&a, &b, tol, maxit);
            match condition_number(&a, &SpectralOptions::default()) {
                Ok(r) => {
                    report.envelope = Some(check_eisenstat(&report, r.sigma_max, r.lambda_min_sym)?)
                }
                Err(Error::IndefiniteSymmetricPart { .. }) => {
                    eprintln!("symmetric part is not positive definite; envelope not checked")
                }
                Err(e) => return Err(e.into()),
            }
            match output.format_or(Format::Csv) {
                Format::Json => output.json(&report),
                _ => output.text(&residual_csv(&report)),
            }
        }
        Command::Experiment {
            example,
            full,
            sizes,
            aspects,
            quantities,
            tol,
            output,
        } => {
            let mut spec = ExperimentSpec::example(example as usize, full)?;
            if let Some(s) = sizes {
                spec.sizes = s;
            }
            if let Some(a) = aspects {
                spec.aspects = a;
            }
            if let Some(q) = quantities {
                spec.quantities = q
                    .iter()
                    .map(|s| s.parse::<Quantity>())
                    .collect::<Result<_, _>>()?;
            }
            let opts = spectral_options(tol, SpectralOptions::experiment());
            let result = run_experiment(&spec, &opts)?;
            match output.format_or(Format::Csv) {
                Format::Json => output.json(&result),
                _ => output.text(&result.csv()),
            }
        }
    }
}
