//! File-first command-line front end: JSON in, JSON/CSV out, one manifest
//! per run.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::diagnostics::{
    self, classify_stability, default_frequency_window, fit_decay, fit_resolvent_growth, logspace,
    matched_time_window, sample_decay, sample_resolvent, Profile,
};
use crate::error::{Error, Result, EXIT_USAGE};
use crate::linalg::CVector;
use crate::march::{self, converge_with, suggested_step};
use crate::operators::{make_model, Generator, ModelSpec};
use crate::periodic::{solve_periodic, verify_loss_estimate, FourierForcing, LossConfig};

const EXIT_CODES: &str = "\
Exit codes:
   0  success
   2  usage error (bad flag, missing --seed for a randomized command)
  10  invalid model spec
  11  invalid input
  12  dimension mismatch
  13  singular generator
  14  resonant frequency
  15  lattice resonance
  16  unstable growth
  17  too few points
  18  step too large
  19  no imaginary-axis eigenvalue
  20  parse error
  21  i/o error";

#[derive(Debug, Parser)]
#[command(name = "polystab", version, about = "Resolvent growth, polynomial decay and time-periodic solutions of damped linear systems", after_help = EXIT_CODES)]
pub struct Cli {
    /// Directory receiving all outputs and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Seed for randomized commands (required by them).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a model and summarize it.
    Model(ModelArgs),
    /// Sample the resolvent or the decay profile and fit its exponent.
    Probe(ProbeArgs),
    /// Solve the periodic problem for a forcing.
    Solve(SolveArgs),
    /// Certify the loss estimate on random forcings.
    Verify(VerifyArgs),
    /// March a trajectory and track its convergence to the periodic orbit.
    March(MarchArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    /// Model spec JSON.
    pub spec: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[command(group(clap::ArgGroup::new("kind").required(true).args(["resolvent", "decay"])))]
pub struct ProbeArgs {
    pub spec: PathBuf,
    /// Sample `s -> ||(isI - A)^{-1}||_H`.
    #[arg(long)]
    pub resolvent: bool,
    /// Sample `t -> ||S(t) A^{-1}||_H`.
    #[arg(long)]
    pub decay: bool,
    /// Grid start (s or t).
    #[arg(long)]
    pub lo: Option<f64>,
    /// Grid end (s or t).
    #[arg(long)]
    pub hi: Option<f64>,
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    /// Fit window start (defaults to the grid start).
    #[arg(long)]
    pub fit_lo: Option<f64>,
    /// Fit window end (defaults to the grid end).
    #[arg(long)]
    pub fit_hi: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    pub spec: PathBuf,
    /// Forcing JSON.
    pub forcing: PathBuf,
    /// Sobolev index of the solution norm.
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    /// Loss exponent; fitted from the resolvent when omitted.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Time samples per period in the CSV (default `max(64, 4 (N_max + 1))`).
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    pub spec: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    /// Loss exponent; fitted from the resolvent when omitted.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 2.0)]
    pub period: f64,
    #[arg(long, default_value_t = crate::periodic::DEFAULT_N_MAX)]
    pub n_max: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct MarchArgs {
    pub spec: PathBuf,
    pub forcing: PathBuf,
    /// `periodic`, `zero`, `random` (needs --seed) or a JSON file
    /// `{"re": [...], "im": [...]}`.
    #[arg(long, default_value = "zero")]
    pub u0: String,
    #[arg(long, default_value_t = 10)]
    pub periods: usize,
    /// Step size (default: largest stable step dividing the period).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Verdict threshold on `gap(final) / gap(0)`.
    #[arg(long, default_value_t = 1e-3)]
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run; output paths are relative to
/// `--out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub model: Value,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary sibling and renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

struct Run {
    out: PathBuf,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

impl Run {
    fn read(&mut self, path: &Path) -> Result<String> {
        let text = fs::read_to_string(path)?;
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(text.as_bytes()),
        });
        Ok(text)
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        write_atomic(&self.out.join(name), contents.as_bytes())?;
        self.outputs.push(FileDigest {
            path: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(())
    }

    fn model(&mut self, path: &Path) -> Result<(Value, Generator)> {
        let text = self.read(path)?;
        let spec = ModelSpec::from_json(&text)?;
        let g = make_model(&spec)?;
        Ok((serde_json::to_value(&spec).expect("spec serializes"), g))
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn require_seed(seed: Option<u64>, command: &str) -> Result<u64> {
    seed.ok_or_else(|| Error::InvalidInput(format!("`{command}` is randomized and needs --seed")))
}

fn fitted_alpha(g: &Generator) -> Option<f64> {
    fit_resolvent_growth(g, default_frequency_window(g))
        .ok()
        .map(|f| f.exponent.max(0.0))
}

#[derive(Serialize)]
struct ModelSummary<'a> {
    kind: &'a str,
    label: &'a str,
    dim: usize,
    abscissa: f64,
    numerical_abscissa: f64,
    flags: crate::operators::Flags,
    metadata: &'a BTreeMap<String, Value>,
}

fn cmd_model(run: &mut Run, args: &ModelArgs) -> Result<Value> {
    let (spec, g) = run.model(&args.spec)?;
    let summary = ModelSummary {
        kind: spec["kind"].as_str().unwrap_or_default(),
        label: g.label(),
        dim: g.dim(),
        abscissa: g.spectral_abscissa(),
        numerical_abscissa: g.numerical_abscissa(),
        flags: g.flags(),
        metadata: g.metadata(),
    };
    run.write("model.json", &json(&summary))?;
    Ok(spec)
}

fn cmd_probe(run: &mut Run, args: &ProbeArgs) -> Result<Value> {
    let (spec, g) = run.model(&args.spec)?;
    if args.points < 2 {
        return Err(Error::InvalidInput("--points must be >= 2".into()));
    }
    let (csv, fit, name) = if args.resolvent {
        let (dlo, dhi) = default_frequency_window(&g);
        let (lo, hi) = (args.lo.unwrap_or(dlo), args.hi.unwrap_or(dhi));
        let grid = diagnostics::linspace(lo, hi, args.points);
        let profile = sample_resolvent(&g, &grid)?;
        let window = (args.fit_lo.unwrap_or(lo), args.fit_hi.unwrap_or(hi));
        (
            profile.to_csv(),
            fit_resolvent_growth(&g, window),
            "resolvent.csv",
        )
    } else {
        let fallback = (1.0, 100.0);
        let (dlo, dhi) = matched_time_window(&g, default_frequency_window(&g))
            .map(|(a, b)| (a.max(1e-3), b))
            .unwrap_or(fallback);
        let (lo, hi) = (args.lo.unwrap_or(dlo), args.hi.unwrap_or(dhi));
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::InvalidInput(format!(
                "decay grid needs 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
        let profile = sample_decay(&g, &logspace(lo, hi, args.points))?;
        let window = (args.fit_lo.unwrap_or(lo), args.fit_hi.unwrap_or(hi));
        (profile.to_csv(), fit_decay(&g, window), "decay.csv")
    };
    run.write(name, &csv)?;
    let report = serde_json::json!({
        "profile": name,
        "fit": fit.as_ref().ok(),
        "fit_error": fit.as_ref().err().map(|e| e.to_string()),
        "stability": classify_stability(&g),
    });
    run.write("fit.json", &json(&report))?;
    Ok(spec)
}

fn cmd_solve(run: &mut Run, args: &SolveArgs) -> Result<Value> {
    let (spec, g) = run.model(&args.spec)?;
    let text = run.read(&args.forcing)?;
    let forcing = FourierForcing::from_json(&text, &g)?;
    let alpha = args.alpha.or_else(|| fitted_alpha(&g));
    let solution = solve_periodic(&g, &forcing, args.m, alpha)?;
    let samples = args
        .samples
        .unwrap_or_else(|| (4 * (forcing.n_max() + 1)).max(64));
    run.write("solution.json", &solution.to_json())?;
    run.write("series.csv", &solution.time_series_csv(samples)?)?;
    Ok(spec)
}

fn cmd_verify(run: &mut Run, args: &VerifyArgs, seed: Option<u64>) -> Result<Value> {
    let seed = require_seed(seed, "verify")?;
    let (spec, g) = run.model(&args.spec)?;
    let alpha = match args.alpha.or_else(|| fitted_alpha(&g)) {
        Some(a) => a,
        None => {
            return Err(Error::InvalidInput(
                "no --alpha given and the resolvent fit failed".into(),
            ))
        }
    };
    let mut config = LossConfig::new(alpha, args.m, args.trials, seed);
    config.period = args.period;
    config.n_max = args.n_max;
    let certificate = verify_loss_estimate(&g, &config)?;
    run.write("certificate.json", &json(&certificate))?;
    Ok(spec)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    re: Vec<f64>,
    #[serde(default)]
    im: Option<Vec<f64>>,
}

fn read_state(run: &mut Run, path: &Path, dim: usize) -> Result<CVector> {
    let text = run.read(path)?;
    let state: StateFile = serde_json::from_str(&text)?;
    let im = state.im.unwrap_or_else(|| vec![0.0; state.re.len()]);
    if state.re.len() != dim || im.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: if state.re.len() != dim {
                state.re.len()
            } else {
                im.len()
            },
        });
    }
    Ok(CVector::from_iterator(
        dim,
        state
            .re
            .iter()
            .zip(&im)
            .map(|(&a, &b)| Complex64::new(a, b)),
    ))
}

fn cmd_march(run: &mut Run, args: &MarchArgs, seed: Option<u64>) -> Result<Value> {
    let (spec, g) = run.model(&args.spec)?;
    let text = run.read(&args.forcing)?;
    let forcing = FourierForcing::from_json(&text, &g)?;
    let solution = solve_periodic(&g, &forcing, 1.0, None)?;
    let periodic = solution.evaluate(0.0);
    let u0 = match args.u0.as_str() {
        "periodic" => periodic,
        "zero" => CVector::zeros(g.dim()),
        "random" => {
            let seed = require_seed(seed, "march --u0 random")?;
            let scale = g.energy_norm(&periodic)?.max(1.0);
            let kick = march::resolved_band_state(&g, march::resolved_band(&g), seed)?;
            periodic + kick * Complex64::new(scale, 0.0)
        }
        path => read_state(run, Path::new(path), g.dim())?,
    };
    let dt = args.dt.unwrap_or_else(|| suggested_step(&g, &forcing));
    let report = converge_with(&g, &forcing, &solution, &u0, args.periods, dt)?;
    run.write("gaps.csv", &report.gaps_csv())?;
    let verdict = serde_json::json!({
        "converged": report.converged(args.threshold),
        "threshold": args.threshold,
        "report": report,
    });
    run.write("march.json", &json(&verdict))?;
    Ok(spec)
}

fn parameters<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

/// Executes a parsed command line and writes `manifest.json` next to the
/// outputs.
pub fn run(cli: &Cli) -> Result<RunManifest> {
    fs::create_dir_all(&cli.out)?;
    let mut run = Run {
        out: cli.out.clone(),
        inputs: Vec::new(),
        outputs: Vec::new(),
    };
    let (command, model, params, seed) = match &cli.command {
        Command::Model(a) => ("model", cmd_model(&mut run, a)?, parameters(a), None),
        Command::Probe(a) => ("probe", cmd_probe(&mut run, a)?, parameters(a), None),
        Command::Solve(a) => ("solve", cmd_solve(&mut run, a)?, parameters(a), cli.seed),
        Command::Verify(a) => (
            "verify",
            cmd_verify(&mut run, a, cli.seed)?,
            parameters(a),
            cli.seed,
        ),
        Command::March(a) => (
            "march",
            cmd_march(&mut run, a, cli.seed)?,
            parameters(a),
            cli.seed,
        ),
    };
    let manifest = RunManifest {
        command: command.to_string(),
        model,
        parameters: params,
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        inputs: run.inputs,
        outputs: run.outputs,
    };
    write_atomic(&cli.out.join("manifest.json"), json(&manifest).as_bytes())?;
    Ok(manifest)
}

/// Parses `args`, runs the command and returns the process exit code.
/// A randomized command without `--seed` is a usage error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let needs_seed = match &cli.command {
        Command::Verify(_) => true,
        Command::March(a) => a.u0 == "random",
        _ => false,
    };
    if needs_seed && cli.seed.is_none() {
        eprintln!("error: this command is randomized; pass --seed N");
        return EXIT_USAGE;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return EXIT_USAGE;
        }
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(&cli) {
        Ok(manifest) => {
            for o in &manifest.outputs {
                println!("{}", cli.out.join(&o.path).display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
