//! Command-line driver: `radial` (exact disk solution), `optimize`
//! (p-continuation on a mesh), `eigen` (single eigensolve), `mesh`
//! (mesh generation and text export).
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 numerical failure.

mod config;
mod io;
mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{load_config, resolve, Domain, PSchedule};
use io::num;
use stiffen_core::eigen::dirichlet_eigenpair;
use stiffen_core::fem::{assemble_mass, assemble_stiffness, DensityField};
use stiffen_core::mesh::{disk_mesh, rect_mesh, Mesh};
use stiffen_core::optimize::{continuation_solve, ContinuationSchedule};
use stiffen_core::radial::{
    smooth_fit_residual, solve_radial, theta_profile, u_prime_profile, u_profile,
};
use stiffen_core::specfun::first_j0_zero;

const EXIT_VALIDATION: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

struct Failure {
    code: u8,
    message: String,
}

fn validation(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_VALIDATION, message: message.into() }
}

fn numerical(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_NUMERICAL, message: message.into() }
}

impl From<stiffen_core::Error> for Failure {
    fn from(e: stiffen_core::Error) -> Self {
        use stiffen_core::Error::*;
        match e {
            NotAdmissible { .. } => validation("lambda not admissible (≤ j00²)"),
            OutOfRange { .. } | DimensionMismatch { .. } => validation(e.to_string()),
            _ => numerical(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "stiffen", version, about = "Optimal membrane reinforcement densities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact radial optimum on the unit disk for a given eigenvalue
    Radial(RadialArgs),
    /// p-continuation density optimization on a mesh
    Optimize(OptimizeArgs),
    /// Single eigensolve for a fixed (possibly zero) density
    Eigen(EigenArgs),
    /// Generate a mesh and write it in the plain-text format
    Mesh(MeshArgs),
}

#[derive(Args)]
struct RadialArgs {
    /// Target eigenvalue lambda_1 (must exceed j_{0,0}^2)
    #[arg(long)]
    lambda: Option<f64>,
    /// Stiffness factor m in the coefficient 1 + m*theta
    #[arg(long)]
    m: Option<f64>,
    /// Rows in the profile CSV
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key=value config file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Stiffness factor m
    #[arg(long)]
    m: Option<f64>,
    /// Density mass budget L
    #[arg(long = "mass-L")]
    mass_l: Option<f64>,
    /// Mesh source: disk, rect, or file:PATH
    #[arg(long)]
    domain: Option<Domain>,
    /// Mesh refinement for generated domains
    #[arg(long)]
    refinement: Option<usize>,
    /// Comma list of decreasing exponents > 1
    #[arg(long = "p-schedule")]
    p_schedule: Option<PSchedule>,
    /// Fixed-point tolerance on the density (L^1 change)
    #[arg(long)]
    tol: Option<f64>,
    /// Fixed-point iteration cap per stage
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// Relaxation factor in (0, 1]
    #[arg(long)]
    damping: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key=value config file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EigenArgs {
    /// Stiffness factor m (only relevant with a nonzero density)
    #[arg(long)]
    m: Option<f64>,
    /// Mesh source: disk, rect, or file:PATH
    #[arg(long)]
    domain: Option<Domain>,
    /// Mesh refinement for generated domains
    #[arg(long)]
    refinement: Option<usize>,
    /// Per-triangle density CSV (tri_or_node,x,y,value); zero if omitted
    #[arg(long)]
    theta: Option<PathBuf>,
    /// Eigensolver residual tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Eigensolver iteration cap
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also dump stiffness/mass matrices in coordinate format
    #[arg(long)]
    dump_matrices: bool,
    /// Flat key=value config file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct MeshArgs {
    /// Mesh source: disk, rect, or file:PATH
    #[arg(long)]
    domain: Option<Domain>,
    /// Mesh refinement for generated domains
    #[arg(long)]
    refinement: Option<usize>,
    /// Output mesh file path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key=value config file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes, not usage errors
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Radial(args) => cmd_radial(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Eigen(args) => cmd_eigen(args),
        Command::Mesh(args) => cmd_mesh(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn file_config(path: &Option<PathBuf>) -> Result<BTreeMap<String, String>, Failure> {
    match path {
        Some(p) => load_config(p).map_err(validation),
        None => Ok(BTreeMap::new()),
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, Failure> {
    value.ok_or_else(|| validation(format!("missing required parameter --{flag}")))
}

fn ensure_out_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| validation(format!("cannot create output directory {}: {e}", dir.display())))
}

fn build_mesh(domain: &Domain, refinement: usize) -> Result<Mesh, Failure> {
    if refinement < 1 {
        return Err(validation("refinement must be >= 1"));
    }
    match domain {
        Domain::Disk => Ok(disk_mesh(refinement)),
        Domain::Rect => Ok(rect_mesh(refinement, refinement, 1.0, 1.0)),
        Domain::File(path) => io::load_mesh(Path::new(path)).map_err(validation),
    }
}

fn cmd_radial(args: RadialArgs) -> Result<(), Failure> {
    let cfg = file_config(&args.config)?;
    let lambda = require(resolve(args.lambda, &cfg, "lambda", None).map_err(validation)?, "lambda")?;
    let m = require(resolve(args.m, &cfg, "m", None).map_err(validation)?, "m")?;
    let samples = resolve(args.samples, &cfg, "samples", Some(512)).map_err(validation)?.unwrap();
    let out = resolve(args.out, &cfg, "out", Some(PathBuf::from("."))).map_err(validation)?.unwrap();

    if m <= 0.0 || !m.is_finite() {
        return Err(validation("m must be positive"));
    }
    if samples < 2 {
        return Err(validation("samples must be >= 2"));
    }
    let j00 = first_j0_zero();
    // NaN lambda also fails this admissibility test
    if lambda.partial_cmp(&(j00 * j00)) != Some(std::cmp::Ordering::Greater) {
        return Err(validation("lambda not admissible (≤ j00²)"));
    }
    let opt = solve_radial(lambda, m)?;
    ensure_out_dir(&out)?;

    let path = out.join("radial.csv");
    let file = std::fs::File::create(&path)
        .map_err(|e| validation(format!("cannot write {}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    use std::io::Write;
    let write = |w: &mut dyn Write| -> std::io::Result<()> {
        writeln!(w, "r,theta,u,u_prime")?;
        for i in 0..samples {
            let r = i as f64 / (samples - 1) as f64;
            writeln!(
                w,
                "{},{},{},{}",
                num(r),
                num(theta_profile(r, &opt).unwrap_or(0.0)),
                num(u_profile(r, &opt).unwrap_or(0.0)),
                num(u_prime_profile(r, &opt).unwrap_or(0.0)),
            )?;
        }
        Ok(())
    };
    write(&mut w).map_err(|e| validation(format!("cannot write {}: {e}", path.display())))?;

    println!("a_bar = {}", num(opt.a_bar));
    println!("L = {}", num(opt.mass_l));
    println!("r_bar = {}", num(opt.theta_argmax()));
    println!("smooth_fit_residual = {}", num(smooth_fit_residual(opt.a_bar, opt.lambda1)?));
    println!("profile = {}", path.display());
    Ok(())
}

fn cmd_optimize(args: OptimizeArgs) -> Result<(), Failure> {
    let cfg = file_config(&args.config)?;
    let m = require(resolve(args.m, &cfg, "m", None).map_err(validation)?, "m")?;
    let mass_l = require(resolve(args.mass_l, &cfg, "mass-L", None).map_err(validation)?, "mass-L")?;
    let domain = resolve(args.domain, &cfg, "domain", Some(Domain::Disk)).map_err(validation)?.unwrap();
    let refinement = resolve(args.refinement, &cfg, "refinement", Some(32)).map_err(validation)?.unwrap();
    let p_schedule = resolve(args.p_schedule, &cfg, "p-schedule", None)
        .map_err(validation)?
        .map(|s| s.0)
        .unwrap_or_else(|| ContinuationSchedule::default_schedule().p_values);
    let tol = resolve(args.tol, &cfg, "tol", Some(1e-5)).map_err(validation)?.unwrap();
    let max_iter = resolve(args.max_iter, &cfg, "max-iter", Some(400)).map_err(validation)?.unwrap();
    let damping = resolve(args.damping, &cfg, "damping", Some(0.5)).map_err(validation)?.unwrap();
    let out = resolve(args.out, &cfg, "out", Some(PathBuf::from("out"))).map_err(validation)?.unwrap();

    if m <= 0.0 || !m.is_finite() {
        return Err(validation("m must be positive"));
    }
    if mass_l < 0.0 || !mass_l.is_finite() {
        return Err(validation("mass-L must be >= 0"));
    }
    let schedule = ContinuationSchedule::new(p_schedule, tol, max_iter, damping)?;
    let mesh = build_mesh(&domain, refinement)?;
    ensure_out_dir(&out)?;

    let run = continuation_solve(&mesh, m, mass_l, &schedule)?;

    let theta_path = out.join("theta.csv");
    io::write_field_csv(
        &theta_path,
        "tri_or_node,x,y,value",
        mesh.triangles.iter().enumerate().map(|(t, tri)| {
            let cx = (mesh.nodes[tri[0]][0] + mesh.nodes[tri[1]][0] + mesh.nodes[tri[2]][0]) / 3.0;
            let cy = (mesh.nodes[tri[0]][1] + mesh.nodes[tri[1]][1] + mesh.nodes[tri[2]][1]) / 3.0;
            (t, cx, cy, run.theta.values[t])
        }),
    )
    .map_err(validation)?;
    let u_path = out.join("u.csv");
    io::write_field_csv(
        &u_path,
        "tri_or_node,x,y,value",
        mesh.nodes.iter().enumerate().map(|(i, p)| (i, p[0], p[1], run.u.u[i])),
    )
    .map_err(validation)?;

    let mut fields = BTreeMap::new();
    fields.insert("theta".to_string(), theta_path.display().to_string());
    fields.insert("u".to_string(), u_path.display().to_string());
    let mut resolved = BTreeMap::new();
    resolved.insert("m".to_string(), num(m));
    resolved.insert("mass-L".to_string(), num(mass_l));
    resolved.insert("domain".to_string(), domain_name(&domain));
    resolved.insert("refinement".to_string(), refinement.to_string());
    resolved.insert(
        "p-schedule".to_string(),
        schedule.p_values.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(","),
    );
    resolved.insert("tol".to_string(), num(tol));
    resolved.insert("max-iter".to_string(), max_iter.to_string());
    resolved.insert("damping".to_string(), num(damping));
    resolved.insert("out".to_string(), out.display().to_string());

    let report = report::Report::new(m, mass_l, &schedule, &run, fields, resolved);
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| numerical(format!("report serialization failed: {e}")))?;
    let report_path = out.join("report.json");
    std::fs::write(&report_path, json + "\n")
        .map_err(|e| validation(format!("cannot write {}: {e}", report_path.display())))?;

    println!("lambda1 = {}", num(run.lambda1));
    println!("upper_bound = {}", num(run.upper_bound));
    println!("gap = {}", num(run.duality_gap));
    println!("report = {}", report_path.display());
    if !run.converged {
        return Err(numerical(format!(
            "continuation did not converge (partial report at {})",
            report_path.display()
        )));
    }
    Ok(())
}

fn cmd_eigen(args: EigenArgs) -> Result<(), Failure> {
    let cfg = file_config(&args.config)?;
    let m = resolve(args.m, &cfg, "m", Some(1.0)).map_err(validation)?.unwrap();
    let domain = resolve(args.domain, &cfg, "domain", Some(Domain::Disk)).map_err(validation)?.unwrap();
    let refinement = resolve(args.refinement, &cfg, "refinement", Some(32)).map_err(validation)?.unwrap();
    let theta_path = resolve(args.theta, &cfg, "theta", None).map_err(validation)?;
    let tol = resolve(args.tol, &cfg, "tol", Some(1e-10)).map_err(validation)?.unwrap();
    let max_iter = resolve(args.max_iter, &cfg, "max-iter", Some(500)).map_err(validation)?.unwrap();
    let out = resolve(args.out, &cfg, "out", Some(PathBuf::from("out"))).map_err(validation)?.unwrap();

    if m <= 0.0 || !m.is_finite() {
        return Err(validation("m must be positive"));
    }
    let mesh = build_mesh(&domain, refinement)?;
    let theta = match &theta_path {
        Some(path) => {
            let values = io::load_theta_csv(path, mesh.triangles.len()).map_err(validation)?;
            DensityField::new(values, 2.0)?
        }
        None => DensityField::zero(&mesh, 2.0),
    };
    ensure_out_dir(&out)?;

    let pair = dirichlet_eigenpair(&mesh, &theta, m, tol, max_iter, None)?;
    if !pair.converged {
        return Err(numerical(format!(
            "eigensolver did not converge in {max_iter} iterations (residual {})",
            num(pair.residual)
        )));
    }

    let path = out.join("eigen.csv");
    io::write_field_csv(
        &path,
        "node,x,y,u",
        mesh.nodes.iter().enumerate().map(|(i, p)| (i, p[0], p[1], pair.u[i])),
    )
    .map_err(validation)?;

    if args.dump_matrices {
        let k = assemble_stiffness(&mesh, &theta, m)?;
        io::write_matrix(&out.join("stiffness.txt"), &k).map_err(validation)?;
        io::write_matrix(&out.join("mass.txt"), &assemble_mass(&mesh)).map_err(validation)?;
    }

    println!("lambda1 = {}", num(pair.lambda));
    println!("residual = {}", num(pair.residual));
    println!("eigenfunction = {}", path.display());
    Ok(())
}

fn cmd_mesh(args: MeshArgs) -> Result<(), Failure> {
    let cfg = file_config(&args.config)?;
    let domain = resolve(args.domain, &cfg, "domain", Some(Domain::Disk)).map_err(validation)?.unwrap();
    let refinement = resolve(args.refinement, &cfg, "refinement", Some(8)).map_err(validation)?.unwrap();
    let out = resolve(args.out, &cfg, "out", Some(PathBuf::from("mesh.txt"))).map_err(validation)?.unwrap();

    let mesh = build_mesh(&domain, refinement)?;
    if let Some(dir) = out.parent() {
        if !dir.as_os_str().is_empty() {
            ensure_out_dir(dir)?;
        }
    }
    io::save_mesh(&mesh, &out).map_err(validation)?;
    println!("nodes = {}", mesh.nodes.len());
    println!("triangles = {}", mesh.triangles.len());
    println!("h = {}", num(mesh.h));
    println!("area = {}", num(mesh.area()));
    println!("mesh = {}", out.display());
    Ok(())
}

fn domain_name(domain: &Domain) -> String {
    match domain {
        Domain::Disk => "disk".to_string(),
        Domain::Rect => "rect".to_string(),
        Domain::File(p) => format!("file:{p}"),
    }
}
