//! Command-line front end: synthetic data generation, reconstruction runs,
//! and method comparison. Every run appends one record to a `manifest.txt`
//! in its output directory with the resolved configuration, input digests,
//! output digests, and wall-clock duration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::admm::{self, parse_config, AdmmConfig, ShapeSpec};
use crate::geometry::{check_admissibility, BoundaryPolyline, GeometryConstraints, Point2};
use crate::metrics::{read_history, snapshot_name, write_history, ReconstructionHistory};
use crate::problems::{generate_synthetic_data, CauchyData};
use crate::shape::Method;
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "shaperecon",
    version,
    about = "Reconstructs a perfectly conducting inclusion from one Cauchy pair of boundary data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate synthetic Cauchy data for a known inclusion.
    Generate(GenerateArgs),
    /// Run a reconstruction from a data file.
    Reconstruct(ReconstructArgs),
    /// Compare two reconstruction histories.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// True inclusion: circle:cx,cy,r | ellipse:cx,cy,rx,ry | peanut:cx,cy,r0,c | flower:r0,eps,m
    #[arg(long)]
    pub shape: String,
    /// Imposed Neumann flux on the outer boundary.
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
    /// Relative noise level on the measured trace.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Mesh size of the fine forward mesh (kept well below the inversion h).
    #[arg(long = "fine_h", default_value_t = 0.01)]
    pub fine_h: f64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    /// Config file with `key = value` lines; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// admm | som
    #[arg(long)]
    pub method: Option<String>,
    /// Data CSV (expects its JSON sidecar next to it, and uses a truth.csv
    /// sibling for Hausdorff tracking when present).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long = "max_outer")]
    pub max_outer: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long = "init_shape")]
    pub init_shape: Option<String>,
    #[arg(long = "save_every")]
    pub save_every: Option<usize>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// First history.csv (or a run directory containing one).
    #[arg(long)]
    pub a: PathBuf,
    /// Second history.csv (or a run directory containing one).
    #[arg(long)]
    pub b: PathBuf,
    /// Also write the table to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reserved for sweep drivers; comparing two finished runs is serial.
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Maps an error to the process exit code: 2 for usage, configuration, and
/// input problems; 3 for numerical failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Data(_) | Error::Io(_) | Error::Geometry(_) => 2,
        _ => 3,
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(&args),
        Command::Reconstruct(args) => cmd_reconstruct(&args),
        Command::Compare(args) => cmd_compare(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

struct Manifest {
    command: String,
    config: String,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Manifest {
    fn append(&self, dir: &Path, started: Instant) -> Result<()> {
        use std::io::Write;
        let mut text = String::new();
        let _ = writeln!(text, "[run] {}", self.command);
        for line in self.config.lines() {
            let _ = writeln!(text, "config {line}");
        }
        for p in &self.inputs {
            let _ = writeln!(text, "input {} sha256={}", p.display(), sha256_file(p)?);
        }
        for p in &self.outputs {
            let _ = writeln!(text, "output {} sha256={}", p.display(), sha256_file(p)?);
        }
        let _ = writeln!(text, "duration_s = {:.3}", started.elapsed().as_secs_f64());
        let _ = writeln!(text, "---");
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(dir.join("manifest.txt"))?;
        file.write_all(text.as_bytes())?;
        Ok(())
    }
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<i32> {
    let started = Instant::now();
    let spec = ShapeSpec::parse(&args.shape)?;
    if !(args.fine_h > 0.0 && args.fine_h < 0.5) {
        return Err(Error::Config(format!(
            "fine_h must lie in (0, 0.5), got {}",
            args.fine_h
        )));
    }
    let truth = spec.sample(args.fine_h)?;
    let n_outer = ((2.0 * std::f64::consts::PI / args.fine_h).ceil() as usize).max(16);
    let outer = BoundaryPolyline::circle(Point2::new(0.0, 0.0), 1.0, n_outer)?;
    let report = check_admissibility(&truth, &outer, &GeometryConstraints::default());
    if !report.admissible {
        return Err(Error::Geometry(format!(
            "inadmissible true shape: {}",
            report.violations.join("; ")
        )));
    }
    let data = generate_synthetic_data(&truth, &outer, args.g, args.fine_h, args.noise, args.seed)?;

    std::fs::create_dir_all(&args.out)?;
    let csv = args.out.join("data.csv");
    let sidecar = args.out.join("data.json");
    let truth_path = args.out.join("truth.csv");
    data.write(&csv, &sidecar)?;
    truth.write_csv(&truth_path)?;

    Manifest {
        command: format!(
            "generate --shape {} --g {} --noise {} --seed {} --fine_h {}",
            args.shape, args.g, args.noise, args.seed, args.fine_h
        ),
        config: String::new(),
        inputs: vec![],
        outputs: vec![csv.clone(), sidecar, truth_path],
    }
    .append(&args.out, started)?;
    println!(
        "generated {} samples of boundary data in {}",
        data.f_samples.len(),
        csv.display()
    );
    Ok(0)
}

fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Resolves defaults, an optional config file, and flag overrides into the
/// final run configuration plus the data and output paths.
pub fn resolve_reconstruct(
    args: &ReconstructArgs,
) -> Result<(AdmmConfig, PathBuf, PathBuf)> {
    let (mut config, mut paths) = match &args.config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => (AdmmConfig::default(), Default::default()),
    };
    if let Some(m) = &args.method {
        config.method = match m.to_ascii_lowercase().as_str() {
            "admm" => Method::Admm,
            "som" => Method::Som,
            other => return Err(Error::Config(format!("unknown method '{other}'"))),
        };
    }
    if let Some(beta) = args.beta {
        config.beta = beta;
    }
    if let Some(n) = args.max_outer {
        config.max_outer = n;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(h) = args.h {
        config.h = h;
    }
    if let Some(spec) = &args.init_shape {
        config.init_shape = ShapeSpec::parse(spec)?;
    }
    if let Some(n) = args.save_every {
        config.save_every = n;
    }
    config.validate()?;
    if let Some(data) = &args.data {
        paths.data_file = Some(data.display().to_string());
    }
    if let Some(out) = &args.out {
        paths.out_dir = Some(out.display().to_string());
    }
    let data_file = paths
        .data_file
        .ok_or_else(|| Error::Config("no data file given (--data or data_file)".into()))?;
    let out_dir = paths
        .out_dir
        .ok_or_else(|| Error::Config("no output directory given (--out or out_dir)".into()))?;
    Ok((config, PathBuf::from(data_file), PathBuf::from(out_dir)))
}

pub fn cmd_reconstruct(args: &ReconstructArgs) -> Result<i32> {
    let started = Instant::now();
    let (config, data_path, out_dir) = resolve_reconstruct(args)?;
    let sidecar = sidecar_path(&data_path);
    let data = CauchyData::read(&data_path, &sidecar)?;
    let truth_path = data_path.with_file_name("truth.csv");
    let reference = if truth_path.exists() {
        Some(BoundaryPolyline::read_csv(&truth_path)?)
    } else {
        None
    };

    std::fs::create_dir_all(&out_dir)?;
    let output = admm::run(&config, &data, reference.as_ref())?;

    let history_path = out_dir.join("history.csv");
    write_history(&output.history, &history_path)?;
    let mut outputs = vec![history_path];
    for (k, boundary) in &output.snapshots {
        let path = out_dir.join(snapshot_name(*k));
        boundary.write_csv(&path)?;
        outputs.push(path);
    }
    let data_copy = out_dir.join("data.csv");
    if data_copy != data_path {
        std::fs::copy(&data_path, &data_copy)?;
        std::fs::copy(&sidecar, out_dir.join("data.json"))?;
    }
    outputs.push(data_copy);

    let mut inputs = vec![data_path, sidecar];
    if reference.is_some() {
        inputs.push(truth_path);
    }
    Manifest {
        command: format!(
            "reconstruct --method {}",
            match config.method {
                Method::Admm => "admm",
                Method::Som => "som",
            }
        ),
        config: config.render(),
        inputs,
        outputs,
    }
    .append(&out_dir, started)?;

    let last = output
        .history
        .last()
        .ok_or_else(|| Error::Data("empty history".into()))?;
    println!(
        "finished at iteration {}: J_norm = {:.3e}, hausdorff = {:.3e}",
        last.k, last.j_norm, last.hausdorff
    );
    if let Some(diag) = &output.aborted {
        eprintln!("numerical abort: {diag} (partial history written)");
        return Ok(3);
    }
    Ok(0)
}

fn history_path_of(arg: &Path) -> PathBuf {
    if arg.is_dir() {
        arg.join("history.csv")
    } else {
        arg.to_path_buf()
    }
}

fn manifest_truth_digest(history: &Path) -> Option<String> {
    let manifest = history.parent()?.join("manifest.txt");
    let text = std::fs::read_to_string(manifest).ok()?;
    text.lines()
        .filter(|l| l.starts_with("input") && l.contains("truth.csv"))
        .filter_map(|l| l.split("sha256=").nth(1))
        .last()
        .map(str::to_string)
}

fn manifest_duration(history: &Path) -> f64 {
    let Some(parent) = history.parent() else {
        return f64::NAN;
    };
    let Ok(text) = std::fs::read_to_string(parent.join("manifest.txt")) else {
        return f64::NAN;
    };
    text.lines()
        .filter_map(|l| l.strip_prefix("duration_s = "))
        .filter_map(|v| v.trim().parse().ok())
        .last()
        .unwrap_or(f64::NAN)
}

fn summarize(label: &str, path: &Path, history: &ReconstructionHistory) -> String {
    let last = history.records().last();
    let (k, j_norm, final_h) = last
        .map(|r| (r.k, r.j_norm, r.hausdorff))
        .unwrap_or((0, f64::NAN, f64::NAN));
    format!(
        "{label:<2} {:<40} iterations={k:<5} final_hausdorff={final_h:<12.5e} best_hausdorff={:<12.5e} final_J_norm={j_norm:<12.5e} wall_s={:.3}",
        path.display(),
        history.best_hausdorff(),
        manifest_duration(path),
    )
}

pub fn cmd_compare(args: &CompareArgs) -> Result<i32> {
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
    }
    let path_a = history_path_of(&args.a);
    let path_b = history_path_of(&args.b);
    let hist_a = read_history(&path_a)?;
    let hist_b = read_history(&path_b)?;

    if let (Some(da), Some(db)) = (manifest_truth_digest(&path_a), manifest_truth_digest(&path_b)) {
        if da != db {
            return Err(Error::Data(
                "histories were produced against different reference shapes".into(),
            ));
        }
    }

    let mut table = String::new();
    table.push_str(&summarize("a", &path_a, &hist_a));
    table.push('\n');
    table.push_str(&summarize("b", &path_b, &hist_b));
    table.push('\n');
    let fa = hist_a.records().last().map(|r| r.hausdorff).unwrap_or(f64::NAN);
    let fb = hist_b.records().last().map(|r| r.hausdorff).unwrap_or(f64::NAN);
    let _ = writeln!(table, "final_hausdorff ratio a/b = {:.5}", fa / fb);

    print!("{table}");
    if let Some(out) = &args.out {
        std::fs::write(out, table)?;
    }
    Ok(0)
}
