//! The `wspline` command-line front end.
//!
//! Every command that writes a file also writes `<file>.manifest.json`
//! recording the resolved configuration, seed, wall time and SHA-256
//! checksums of its inputs and outputs. Errors are reported as a single
//! `error: <Kind>: <reason>` line on stderr.

pub mod config;
pub mod manifest;
pub mod plot;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::datasets::{
    gen_converging_gaussian, gen_diverging_gaussian, load_sequence_csv, save_sequence_csv,
    CONVERGING_DEFAULT_COUNTS, DIVERGING_DEFAULT_N, DIVERGING_DEFAULT_STEPS,
};
use crate::error::{Error, Result};
use crate::eval::{evaluate, level_growth_ratios, runtime_scaling_probe};
use crate::subdivision::{four_point_refine, wlr_refine, Scheme};
use crate::trace::{assign_times, trace_paths, TrajectoryForest};
use config::{FileConfig, RunConfig};
use manifest::{Artifact, RunManifest};

#[derive(Debug, Parser)]
#[command(
    name = "wspline",
    version,
    about = "Wasserstein subdivision for point-cloud trajectories"
)]
pub struct Cli {
    /// Worker threads for parallel transport solves.
    #[arg(long, global = true, env = "WSPLINE_JOBS")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic Gaussian sequence as CSV.
    Generate(GenerateArgs),
    /// Refine a sequence with WLR or the four-point scheme.
    Refine(RefineArgs),
    /// Trace mass through consecutive clouds of a (refined) sequence.
    Trace(TraceArgs),
    /// Leave-one-out evaluation of WLR at one held-out step.
    Evaluate(EvaluateArgs),
    /// Render a sequence, optionally with traced paths, as SVG.
    Plot(PlotArgs),
    /// Time WLR over a grid of levels and degrees.
    Probe(ProbeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    DivergingGaussian,
    ConvergingGaussian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Wlr,
    FourPoint,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Wlr => Scheme::Wlr,
            SchemeArg::FourPoint => Scheme::FourPoint,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Atoms per cloud (diverging only).
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of clouds (diverging only).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Atoms per cloud, comma separated (converging only).
    #[arg(long, value_delimiter = ',')]
    pub counts: Option<Vec<usize>>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
}

/// Refinement settings shared by several commands. Unset flags fall back to
/// the `--config` file and then to the defaults.
#[derive(Debug, Args, Default)]
pub struct ConfigArgs {
    /// JSON file with any of: degree, level, scheme, p, epsilon, w, merge_tol,
    /// mass_threshold, seed.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    /// Plan entries at or below this mass are pruned when averaging.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub merge_tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ConfigArgs {
    fn flags(&self) -> FileConfig {
        FileConfig {
            degree: self.degree,
            level: self.level,
            p: self.p,
            epsilon: self.epsilon,
            merge_tol: self.merge_tol,
            seed: self.seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// `wlr` approximates a degree-M B-spline. `four-point` interpolates the
    /// input; each round it repeats the two end clouds once so the refined
    /// curve still spans the whole input, with input k at position k * 2^R.
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// Four-point tension, in (0, (sqrt(5) - 1) / 8).
    #[arg(long)]
    pub w: Option<f64>,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Plan entries at or below this mass are not recorded as edges.
    #[arg(long)]
    pub mass_threshold: Option<f64>,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub held_out: usize,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, num_args = 2, value_names = ["I", "J"], default_values_t = [0, 1])]
    pub dims: Vec<usize>,
    /// Forest JSON from `trace`, drawn as lines between atoms.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Sequence to time; a 50-atom diverging Gaussian when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [3, 4, 5])]
    pub levels: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [2])]
    pub degrees: Vec<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let reason = text
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("error: UsageError: {reason}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let start = Instant::now();
    match cli.command {
        Command::Generate(a) => cmd_generate(a, start),
        Command::Refine(a) => cmd_refine(a, start),
        Command::Trace(a) => cmd_trace(a, start),
        Command::Evaluate(a) => cmd_evaluate(a, start),
        Command::Plot(a) => cmd_plot(a, start),
        Command::Probe(a) => cmd_probe(a, start),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn finish(
    command: &str,
    config: impl Serialize,
    seed: Option<u64>,
    inputs: &[&Path],
    output: &Path,
    start: Instant,
) -> Result<()> {
    let manifest = RunManifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: serde_json::to_value(config).expect("config is serializable"),
        seed,
        inputs: inputs
            .iter()
            .map(|p| Artifact::of(p))
            .collect::<Result<_>>()?,
        outputs: vec![Artifact::of(output)?],
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    manifest.write(&RunManifest::path_for(output))
}

#[derive(Serialize)]
struct GenerateConfig<'a> {
    kind: &'a str,
    n: Option<usize>,
    steps: Option<usize>,
    counts: Option<&'a [usize]>,
    dim: usize,
}

pub fn cmd_generate(a: GenerateArgs, start: Instant) -> Result<()> {
    let (seq, config) = match a.kind {
        Kind::DivergingGaussian => {
            if a.counts.is_some() {
                return Err(Error::Config(
                    "--counts applies to converging-gaussian only".into(),
                ));
            }
            let n = a.n.unwrap_or(DIVERGING_DEFAULT_N);
            let steps = a.steps.unwrap_or(DIVERGING_DEFAULT_STEPS);
            let seq = gen_diverging_gaussian(a.seed, n, steps, a.dim)?;
            let cfg = GenerateConfig {
                kind: "diverging-gaussian",
                n: Some(n),
                steps: Some(steps),
                counts: None,
                dim: a.dim,
            };
            (seq, serde_json::to_value(cfg).expect("serializable"))
        }
        Kind::ConvergingGaussian => {
            if a.n.is_some() || a.steps.is_some() {
                return Err(Error::Config(
                    "--n and --steps apply to diverging-gaussian only; use --counts".into(),
                ));
            }
            let counts = a
                .counts
                .unwrap_or_else(|| CONVERGING_DEFAULT_COUNTS.to_vec());
            let seq = gen_converging_gaussian(a.seed, &counts, a.dim)?;
            let cfg = GenerateConfig {
                kind: "converging-gaussian",
                n: None,
                steps: None,
                counts: Some(&counts),
                dim: a.dim,
            };
            (seq, serde_json::to_value(cfg).expect("serializable"))
        }
    };
    save_sequence_csv(&seq, &a.out)?;
    finish("generate", config, Some(a.seed), &[], &a.out, start)
}

pub fn cmd_refine(a: RefineArgs, start: Instant) -> Result<()> {
    let flags = FileConfig {
        scheme: a.scheme.map(Scheme::from),
        w: a.w,
        ..a.cfg.flags()
    };
    let cfg = config::resolve(flags, a.cfg.config.as_deref())?;
    let seq = load_sequence_csv(&a.input)?;
    let refined = match cfg.scheme {
        Scheme::Wlr => wlr_refine(&seq, &cfg.refinement)?,
        Scheme::FourPoint => four_point_refine(&seq, cfg.refinement.level, cfg.w, &cfg.refinement)?,
    };
    let timed = assign_times(&refined, seq.time(0), seq.time(seq.len() - 1))?;
    save_sequence_csv(&timed, &a.out)?;
    finish(
        "refine",
        cfg,
        Some(cfg.refinement.seed),
        &[&a.input],
        &a.out,
        start,
    )
}

pub fn cmd_trace(a: TraceArgs, start: Instant) -> Result<()> {
    let flags = FileConfig {
        mass_threshold: a.mass_threshold,
        ..a.cfg.flags()
    };
    let cfg = config::resolve(flags, a.cfg.config.as_deref())?;
    let seq = load_sequence_csv(&a.input)?;
    let forest = trace_paths(&seq.measures(), cfg.mass_threshold, &cfg.refinement)?;
    write_text(&a.out, &(forest.to_json() + "\n"))?;
    finish(
        "trace",
        cfg,
        Some(cfg.refinement.seed),
        &[&a.input],
        &a.out,
        start,
    )
}

pub fn cmd_evaluate(a: EvaluateArgs, start: Instant) -> Result<()> {
    let cfg: RunConfig = config::resolve(a.cfg.flags(), a.cfg.config.as_deref())?;
    let seq = load_sequence_csv(&a.input)?;
    let report = evaluate(&seq, a.held_out, &cfg.refinement)?;
    let text = serde_json::to_string_pretty(&report).expect("report is serializable") + "\n";
    match &a.out {
        Some(out) => {
            write_text(out, &text)?;
            finish(
                "evaluate",
                cfg,
                Some(cfg.refinement.seed),
                &[&a.input],
                out,
                start,
            )
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

pub fn cmd_plot(a: PlotArgs, start: Instant) -> Result<()> {
    let seq = load_sequence_csv(&a.input)?;
    let forest = match &a.trace {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            Some(TrajectoryForest::from_json(&text)?)
        }
        None => None,
    };
    let svg = plot::render_svg(&seq, (a.dims[0], a.dims[1]), forest.as_ref())?;
    write_text(&a.out, &svg)?;
    let mut inputs: Vec<&Path> = vec![&a.input];
    if let Some(t) = &a.trace {
        inputs.push(t);
    }
    finish(
        "plot",
        serde_json::json!({ "dims": a.dims }),
        None,
        &inputs,
        &a.out,
        start,
    )
}

#[derive(Serialize)]
struct ProbeReport {
    rows: Vec<crate::eval::ScalingRow>,
    /// `(degree, level, seconds(level + 1) / seconds(level))`
    level_growth: Vec<(usize, usize, f64)>,
}

pub fn cmd_probe(a: ProbeArgs, start: Instant) -> Result<()> {
    let cfg = config::resolve(a.cfg.flags(), a.cfg.config.as_deref())?;
    let seq = match &a.input {
        Some(path) => load_sequence_csv(path)?,
        None => gen_diverging_gaussian(cfg.refinement.seed, 50, 3, 2)?,
    };
    // one worker so timings are comparable across runs
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::Config(format!("cannot start timing pool: {e}")))?;
    let rows =
        pool.install(|| runtime_scaling_probe(&seq, &a.levels, &a.degrees, &cfg.refinement))?;
    let report = ProbeReport {
        level_growth: level_growth_ratios(&rows),
        rows,
    };
    let text = serde_json::to_string_pretty(&report).expect("report is serializable") + "\n";
    match &a.out {
        Some(out) => {
            write_text(out, &text)?;
            let inputs: Vec<&Path> = a.input.iter().map(PathBuf::as_path).collect();
            finish("probe", cfg, Some(cfg.refinement.seed), &inputs, out, start)
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}
