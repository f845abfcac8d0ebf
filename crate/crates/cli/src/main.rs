use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use semisparse::distance::SurfaceDistance;
use semisparse::io::{self, RawMesh, ReadOptions, DEFAULT_ERROR_CLAMP, DEFAULT_PRECISION};
use semisparse::metrics::{angular_errors, vertex_error_with};
use semisparse::{denoise_mesh, mean_angular_difference, Mesh, NoiseDirection, NoiseSpec};

mod params;

use params::{parse_assignments, Grid, Settings};

#[derive(Parser)]
#[command(name = "semisparse", version, about = "Feature-preserving triangle mesh denoising")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Add seeded Gaussian noise to a mesh.
    AddNoise(AddNoiseArgs),
    /// Filter face normals and refit the vertices.
    Denoise(DenoiseArgs),
    /// Compare a mesh with a reference mesh.
    Evaluate(EvaluateArgs),
    /// Compare the full model with its first- and second-order-only variants.
    Ablate(AblateArgs),
}

#[derive(Args)]
struct IoFlags {
    /// Significant digits for written coordinates.
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: usize,
    /// Fan-split polygonal faces when reading.
    #[arg(long)]
    triangulate: bool,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct AddNoiseArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Noise standard deviation relative to the mean edge length.
    #[arg(long, default_value_t = 0.2)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `random` (every coordinate) or `normal` (along vertex normals).
    #[arg(long, default_value = "random")]
    noise_dir: NoiseDirection,
    #[command(flatten)]
    io: IoFlags,
}

#[derive(Args, Default)]
struct SolverFlags {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    rho1: Option<f64>,
    #[arg(long)]
    rho2: Option<f64>,
    #[arg(long)]
    sigma_e: Option<f64>,
    #[arg(long)]
    sigma_l: Option<f64>,
    /// Stop once the squared normal change drops to this (default 1e-8 per face).
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    vertex_iters: Option<usize>,
    #[arg(long)]
    cg_tol: Option<f64>,
    /// `key=value` file; its entries override the flags above.
    #[arg(long)]
    params: Option<PathBuf>,
}

impl SolverFlags {
    fn settings(&self) -> Result<Settings, String> {
        let mut s = Settings::default();
        let p = &mut s.solver;
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { p.$f = v; } )* };
        }
        take!(lambda, alpha, beta, rho1, rho2, sigma_e, sigma_l, max_iters, cg_tol);
        if self.eps.is_some() {
            p.eps = self.eps;
        }
        if let Some(v) = self.vertex_iters {
            s.vertex_iters = v;
        }
        if let Some(path) = &self.params {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            for (k, v) in parse_assignments(&text).map_err(|e| format!("{}: {e}", path.display()))? {
                s.set(&k, &v).map_err(|e| format!("{}: {e}", path.display()))?;
            }
        }
        s.solver.validate().map_err(|e| e.to_string())?;
        Ok(s)
    }
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct DenoiseArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
    /// Per-iteration diagnostics CSV.
    #[arg(long)]
    diag: Option<PathBuf>,
    /// Ground truth; enables the metrics line and `--error-map`.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// PLY file with faces colored by angular error against `--reference`.
    #[arg(long, requires = "reference")]
    error_map: Option<PathBuf>,
    #[command(flatten)]
    io: IoFlags,
}

#[derive(Args)]
struct EvaluateArgs {
    input: PathBuf,
    #[arg(long)]
    reference: PathBuf,
    /// Noise level to report in the metrics line.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    triangulate: bool,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct AblateArgs {
    input: PathBuf,
    #[arg(long)]
    reference: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
    /// `key=v1,v2,...` lines; each configuration keeps its best grid point.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long)]
    triangulate: bool,
}

fn load(path: &Path, triangulate: bool) -> Result<Mesh, String> {
    io::load_mesh(path, None, ReadOptions { triangulate })
        .and_then(RawMesh::into_mesh)
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn save(mesh: &Mesh, path: &Path, precision: usize) -> Result<(), String> {
    io::write_mesh(&RawMesh::from(mesh), path, None, precision).map_err(|e| format!("{}: {e}", path.display()))
}

fn mesh_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// `theta` from filtered normals (or the mesh's own) and `E_v` from positions.
fn metrics(mesh: &Mesh, normals: &[semisparse::Point], reference: &Mesh) -> Result<(f64, f64), String> {
    if reference.num_faces() != mesh.num_faces() {
        return Err(format!(
            "reference has {} faces, mesh has {}; normal error needs matching faces",
            reference.num_faces(),
            mesh.num_faces()
        ));
    }
    let theta = mean_angular_difference(normals, &reference.face_normals()).map_err(|e| e.to_string())?;
    let e_v = vertex_error_with(mesh, &SurfaceDistance::new(reference)).map_err(|e| e.to_string())?;
    Ok((theta, e_v))
}

fn metrics_line(name: &str, sigma: Option<f64>, theta: f64, e_v: f64) -> String {
    let sigma = sigma.map(|s| s.to_string()).unwrap_or_default();
    format!("{name},{sigma},{theta:.6},{e_v:.9e}")
}

fn add_noise(args: &AddNoiseArgs) -> Result<(), String> {
    let mesh = load(&args.input, args.io.triangulate)?;
    let spec = NoiseSpec { sigma_rel: args.sigma, direction: args.noise_dir, seed: args.seed };
    let noisy = semisparse::add_gaussian_noise(&mesh, &spec).map_err(|e| e.to_string())?;
    save(&noisy, &args.output, args.io.precision)
}

fn denoise(args: &DenoiseArgs) -> Result<(), String> {
    let settings = args.solver.settings()?;
    let mesh = load(&args.input, args.io.triangulate)?;
    let out = denoise_mesh(&mesh, &settings.solver, settings.vertex_iters).map_err(|e| e.to_string())?;
    let d = &out.diagnostics;
    log::info!(
        "{} iterations{}, {} flipped faces",
        d.iterations.len(),
        if d.converged { " (converged)" } else { "" },
        out.flipped_faces
    );
    save(&out.mesh, &args.output, args.io.precision)?;
    if let Some(path) = &args.diag {
        let file = fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
        d.write_csv(std::io::BufWriter::new(file)).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    if let Some(ref_path) = &args.reference {
        let reference = load(ref_path, args.io.triangulate)?;
        let (theta, e_v) = metrics(&out.mesh, &out.normals, &reference)?;
        println!("{}", metrics_line(&mesh_name(&args.output), None, theta, e_v));
        if let Some(path) = &args.error_map {
            let angles = angular_errors(&out.normals, &reference.face_normals()).map_err(|e| e.to_string())?;
            io::write_error_map(&out.mesh, &angles, path, DEFAULT_ERROR_CLAMP, args.io.precision)
                .map_err(|e| format!("{}: {e}", path.display()))?;
        }
    }
    Ok(())
}

fn evaluate(args: &EvaluateArgs) -> Result<(), String> {
    let mesh = load(&args.input, args.triangulate)?;
    let reference = load(&args.reference, args.triangulate)?;
    let (theta, e_v) = metrics(&mesh, &mesh.face_normals(), &reference)?;
    println!("{}", metrics_line(&mesh_name(&args.input), args.sigma, theta, e_v));
    Ok(())
}

fn ablate(args: &AblateArgs) -> Result<(), String> {
    let base = args.solver.settings()?;
    let mesh = load(&args.input, args.triangulate)?;
    let reference = load(&args.reference, args.triangulate)?;
    let grid = match &args.grid {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            Grid::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => Grid::default(),
    };
    let surface = SurfaceDistance::new(&reference);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "config,lambda,alpha,beta,rho1,rho2,points,theta_deg,e_v").map_err(|e| e.to_string())?;
    for (name, fixed) in [("full", None), ("beta=0", Some("beta")), ("alpha=0", Some("alpha"))] {
        let mut start = base.clone();
        let fixed: Vec<&str> = fixed.into_iter().collect();
        match fixed.first() {
            Some(&"beta") => start.solver.beta = 0.0,
            Some(&"alpha") => start.solver.alpha = 0.0,
            _ => {}
        }
        let points = grid.expand(&start, &fixed)?;
        let mut best: Option<(f64, Settings, semisparse::Denoised)> = None;
        for s in &points {
            s.solver.validate().map_err(|e| e.to_string())?;
            let run = denoise_mesh(&mesh, &s.solver, s.vertex_iters).map_err(|e| e.to_string())?;
            if reference.num_faces() != mesh.num_faces() {
                return Err("reference and input must share connectivity".into());
            }
            let theta = mean_angular_difference(&run.normals, &reference.face_normals()).map_err(|e| e.to_string())?;
            if best.as_ref().is_none_or(|(t, _, _)| theta < *t) {
                best = Some((theta, s.clone(), run));
            }
        }
        let (theta, s, run) = best.ok_or("empty parameter grid")?;
        let e_v = vertex_error_with(&run.mesh, &surface).map_err(|e| e.to_string())?;
        let p = &s.solver;
        writeln!(
            out,
            "{name},{},{},{},{},{},{},{theta:.6},{e_v:.9e}",
            p.lambda,
            p.alpha,
            p.beta,
            p.rho1,
            p.rho2,
            points.len()
        )
        .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match &cli.command {
        Command::AddNoise(a) => add_noise(a),
        Command::Denoise(a) => denoise(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Ablate(a) => ablate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
