use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_mesh, ElementGeometry, MeshMetadata, SimplicialMesh};
use crate::error::{Error, Result};
use crate::tensor::Point;

/// Mesh families produced by [`generate_mesh`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFamily {
    /// Interval mesh on Chebyshev nodes, `n` elements.
    Chebyshev1d,
    /// Structured mesh of the unit interval, square or cube.
    Uniform,
    /// Unit square with a band of compressed layers reaching a target aspect ratio.
    Skew2d,
    /// Unit cube analog of `Skew2d`.
    Skew3d,
    /// `Skew2d` layout at a fixed size, intended for aspect-ratio sweeps.
    Aspect2d,
    /// Parallelogram tiled by congruent equilateral triangles.
    Equilateral2d,
    /// `Uniform` with interior vertices randomly displaced.
    Jittered,
}

impl FromStr for MeshFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "chebyshev1d" => MeshFamily::Chebyshev1d,
            "uniform" => MeshFamily::Uniform,
            "skew2d" => MeshFamily::Skew2d,
            "skew3d" => MeshFamily::Skew3d,
            "aspect2d" => MeshFamily::Aspect2d,
            "equilateral2d" => MeshFamily::Equilateral2d,
            "jittered" => MeshFamily::Jittered,
            other => return Err(Error::UnknownFamily(other.to_string())),
        })
    }
}

impl MeshFamily {
    pub fn name(self) -> &'static str {
        match self {
            MeshFamily::Chebyshev1d => "chebyshev1d",
            MeshFamily::Uniform => "uniform",
            MeshFamily::Skew2d => "skew2d",
            MeshFamily::Skew3d => "skew3d",
            MeshFamily::Aspect2d => "aspect2d",
            MeshFamily::Equilateral2d => "equilateral2d",
            MeshFamily::Jittered => "jittered",
        }
    }
}

/// Generator parameters. `n` is the element count for 1-D families and the
/// number of cells per side otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshParams {
    pub dim: usize,
    pub n: usize,
    /// Target maximum aspect ratio for the skew families (default 125).
    pub aspect: Option<f64>,
    /// Displacement amplitude for `jittered`, as a fraction of the cell size.
    pub amplitude: f64,
    pub seed: u64,
}

impl MeshParams {
    pub fn new(dim: usize, n: usize) -> Self {
        MeshParams {
            dim,
            n,
            aspect: None,
            amplitude: 0.2,
            seed: 0,
        }
    }

    pub fn with_aspect(mut self, aspect: f64) -> Self {
        self.aspect = Some(aspect);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }
}

/// Number of compressed layers in the skew band.
const BAND_LAYERS: usize = 2;
const DEFAULT_ASPECT: f64 = 125.0;

/// Builds a mesh of the named family.
pub fn generate_mesh(family: &str, params: &MeshParams) -> Result<SimplicialMesh> {
    let family: MeshFamily = family.parse()?;
    let mesh = match family {
        MeshFamily::Chebyshev1d => chebyshev1d(params.n)?,
        MeshFamily::Uniform => uniform(params.dim, params.n)?,
        MeshFamily::Skew2d | MeshFamily::Aspect2d => {
            skew(2, params.n, params.aspect.unwrap_or(DEFAULT_ASPECT), family)?
        }
        MeshFamily::Skew3d => skew(3, params.n, params.aspect.unwrap_or(DEFAULT_ASPECT), family)?,
        MeshFamily::Equilateral2d => equilateral2d(params.n)?,
        MeshFamily::Jittered => jittered(params)?,
    };
    Ok(mesh)
}

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidParams(format!(
            "n must be at least {min}, got {n}"
        )));
    }
    Ok(())
}

fn finish(
    mesh: SimplicialMesh,
    family: MeshFamily,
    params: String,
    layout: String,
) -> SimplicialMesh {
    let max_aspect_ratio = mesh.max_aspect_ratio();
    mesh.with_metadata(MeshMetadata {
        family: family.name().to_string(),
        params,
        max_aspect_ratio,
        layout,
    })
}

/// Chebyshev nodes `x_i = (1 - cos(pi (2i - 1) / (2 (n - 1)))) / 2`,
/// `i = 1..n-1`, plus the endpoints; `n` elements.
pub fn chebyshev_nodes(n: usize) -> Vec<f64> {
    let mut x = Vec::with_capacity(n + 1);
    x.push(0.0);
    for i in 1..n {
        x.push(0.5 * (1.0 - (PI * (2 * i - 1) as f64 / (2 * (n - 1)) as f64).cos()));
    }
    x.push(1.0);
    x
}

fn chebyshev1d(n: usize) -> Result<SimplicialMesh> {
    check_n(n, 2)?;
    let nodes = chebyshev_nodes(n);
    let mesh = interval_mesh(&nodes)?;
    Ok(finish(
        mesh,
        MeshFamily::Chebyshev1d,
        format!("n={n}"),
        "Chebyshev nodes on [0,1]".into(),
    ))
}

fn interval_mesh(nodes: &[f64]) -> Result<SimplicialMesh> {
    let m = nodes.len();
    let vertices = nodes.iter().map(|&x| [x, 0.0, 0.0]).collect();
    let simplices = (0..m - 1).map(|i| vec![i, i + 1]).collect();
    let boundary = (0..m).map(|i| i == 0 || i == m - 1).collect();
    build_mesh(
        1,
        vertices,
        simplices,
        boundary,
        Some(nodes[m - 1] - nodes[0]),
    )
}

/// Tensor-product grid split into simplices: two triangles per square along
/// the (0,0)-(1,1) diagonal, six Kuhn tetrahedra per cube along the main
/// diagonal.
fn grid_mesh(coords: &[Vec<f64>]) -> Result<SimplicialMesh> {
    let dim = coords.len();
    let counts: Vec<usize> = coords.iter().map(|c| c.len()).collect();
    let n_vertices: usize = counts.iter().product();
    let index = |ijk: &[usize]| -> usize {
        let mut idx = 0;
        for a in (0..dim).rev() {
            idx = idx * counts[a] + ijk[a];
        }
        idx
    };
    let mut vertices = vec![[0.0; 3]; n_vertices];
    let mut boundary = vec![false; n_vertices];
    let mut ijk = vec![0usize; dim];
    for v in 0..n_vertices {
        let mut rest = v;
        for a in 0..dim {
            ijk[a] = rest % counts[a];
            rest /= counts[a];
        }
        for a in 0..dim {
            vertices[v][a] = coords[a][ijk[a]];
        }
        boundary[v] = (0..dim).any(|a| ijk[a] == 0 || ijk[a] == counts[a] - 1);
    }
    let cells: Vec<usize> = counts.iter().map(|c| c - 1).collect();
    let n_cells: usize = cells.iter().product();
    let paths = super::permutations(&(0..dim).collect::<Vec<_>>());
    let mut simplices = Vec::with_capacity(n_cells * paths.len());
    let mut corner = vec![0usize; dim];
    for c in 0..n_cells {
        let mut rest = c;
        for a in 0..dim {
            corner[a] = rest % cells[a];
            rest /= cells[a];
        }
        for path in &paths {
            let mut cur = corner.clone();
            let mut s = vec![index(&cur)];
            for &axis in path {
                cur[axis] += 1;
                s.push(index(&cur));
            }
            simplices.push(s);
        }
    }
    let measure = coords
        .iter()
        .map(|c| c[c.len() - 1] - c[0])
        .product::<f64>();
    build_mesh(dim, vertices, simplices, boundary, Some(measure))
}

fn uniform_coords(n: usize) -> Vec<f64> {
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

fn uniform(dim: usize, n: usize) -> Result<SimplicialMesh> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidParams(format!(
            "dimension must be 1, 2 or 3, got {dim}"
        )));
    }
    check_n(n, 1)?;
    let mesh = if dim == 1 {
        interval_mesh(&uniform_coords(n))?
    } else {
        grid_mesh(&vec![uniform_coords(n); dim])?
    };
    Ok(finish(
        mesh,
        MeshFamily::Uniform,
        format!("d={dim} n={n}"),
        "structured grid on the unit box".into(),
    ))
}

/// Largest aspect ratio among the simplices of one grid cell with the given
/// edge lengths.
fn cell_aspect(sizes: &[f64]) -> f64 {
    let dim = sizes.len();
    let coords: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![0.0, s]).collect();
    let paths = super::permutations(&(0..dim).collect::<Vec<_>>());
    let mut worst: f64 = 0.0;
    for path in &paths {
        let mut cur = vec![0usize; dim];
        let mut pts = Vec::with_capacity(dim + 1);
        let point = |cur: &[usize]| -> Point {
            let mut p = [0.0; 3];
            for a in 0..dim {
                p[a] = coords[a][cur[a]];
            }
            p
        };
        pts.push(point(&cur));
        for &axis in path {
            cur[axis] += 1;
            pts.push(point(&cur));
        }
        if let Some(g) = ElementGeometry::new(&pts, dim) {
            worst = worst.max(g.aspect_ratio);
        }
    }
    worst
}

/// Thickness of the compressed layers so that their cells reach `aspect`.
fn band_thickness(dim: usize, n: usize, aspect: f64) -> f64 {
    let h = 1.0 / n as f64;
    let sizes = |t: f64| {
        let mut s = vec![h; dim];
        s[dim - 1] = t;
        s
    };
    let regular = cell_aspect(&sizes(h));
    if aspect <= regular {
        return h;
    }
    // Aspect ratio grows monotonically as the layer thins.
    let (mut lo, mut hi) = (h * 1e-12, h);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if cell_aspect(&sizes(mid)) > aspect {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo < 1.0 + 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn skew(dim: usize, n: usize, aspect: f64, family: MeshFamily) -> Result<SimplicialMesh> {
    check_n(n, 2)?;
    if !(aspect >= 1.0) || !aspect.is_finite() {
        return Err(Error::InvalidParams(format!(
            "aspect ratio must be >= 1, got {aspect}"
        )));
    }
    let band = BAND_LAYERS.min(n - 1);
    let t = band_thickness(dim, n, aspect);
    let first = (n - band) / 2;
    let rest = (1.0 - band as f64 * t) / (n - band) as f64;
    let mut last = vec![0.0];
    let mut y = 0.0;
    for layer in 0..n {
        y += if (first..first + band).contains(&layer) {
            t
        } else {
            rest
        };
        last.push(if layer == n - 1 { 1.0 } else { y });
    }
    let mut coords = vec![uniform_coords(n); dim - 1];
    coords.push(last);
    let mesh = grid_mesh(&coords)?;
    Ok(finish(
        mesh,
        family,
        format!("d={dim} n={n} aspect={aspect}"),
        format!(
            "layers {first}..{} normal to axis {} compressed to thickness {t:e}; other layers {rest:e}",
            first + band,
            dim - 1
        ),
    ))
}

fn equilateral2d(n: usize) -> Result<SimplicialMesh> {
    check_n(n, 1)?;
    let h = 1.0 / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    let mut boundary = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let (i_f, j_f) = (i as f64, j as f64);
            vertices.push([h * (i_f + 0.5 * j_f), h * j_f * 3f64.sqrt() / 2.0, 0.0]);
            boundary.push(i == 0 || j == 0 || i == n || j == n);
        }
    }
    let mut simplices = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            simplices.push(vec![idx(i, j), idx(i + 1, j), idx(i, j + 1)]);
            simplices.push(vec![idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    let mesh = build_mesh(2, vertices, simplices, boundary, Some(3f64.sqrt() / 2.0))?;
    Ok(finish(
        mesh,
        MeshFamily::Equilateral2d,
        format!("n={n}"),
        "rhombus with unit sides split into equilateral triangles".into(),
    ))
}

fn signed_volume(points: &[Point], dim: usize) -> f64 {
    super::element::edge_matrix(points, dim).determinant()
}

fn jittered(params: &MeshParams) -> Result<SimplicialMesh> {
    let base = uniform(params.dim, params.n)?;
    let dim = params.dim;
    if !(0.0..0.5).contains(&params.amplitude) {
        return Err(Error::InvalidParams(format!(
            "jitter amplitude must lie in [0, 0.5), got {}",
            params.amplitude
        )));
    }
    let h = 1.0 / params.n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut vertices = base.vertices().to_vec();
    for (v, p) in vertices.iter_mut().enumerate() {
        if base.is_boundary(v) {
            continue;
        }
        for x in p.iter_mut().take(dim) {
            *x += params.amplitude * h * (rng.gen::<f64>() - 0.5);
        }
    }
    for (e, s) in base.simplices().iter().enumerate() {
        let before: Vec<Point> = s.iter().map(|&v| base.vertices()[v]).collect();
        let after: Vec<Point> = s.iter().map(|&v| vertices[v]).collect();
        if signed_volume(&before, dim) * signed_volume(&after, dim) <= 0.0 {
            return Err(Error::DegenerateElement {
                element: e,
                volume: signed_volume(&after, dim),
                threshold: 0.0,
            });
        }
    }
    let mesh = build_mesh(
        dim,
        vertices,
        base.simplices().to_vec(),
        base.boundary_flags().to_vec(),
        Some(base.domain_measure()),
    )?;
    Ok(finish(
        mesh,
        MeshFamily::Jittered,
        format!(
            "d={dim} n={} amplitude={} seed={}",
            params.n, params.amplitude, params.seed
        ),
        "structured grid with interior vertices displaced uniformly".into(),
    ))
}
