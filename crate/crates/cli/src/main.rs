//! `bel`: code tables, error bounds, sweeps, simulation and toy training.
//!
//! Tabular artifacts are CSV, everything else JSON. Output goes to stdout
//! unless `--out` names a file. The resolved configuration of every run is
//! echoed to stderr as one JSON line.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use bel_core::bounds::{compare_sweep, default_grid, gaussian_bound, parse_grid};
use bel_core::decoder::DecoderKind;
use bel_core::error_model::model_from_code;
use bel_core::losses::{LossKind, Norm};
use bel_core::mc_sim::simulate;
use bel_core::quantizer::parse_range;
use bel_core::toytrain::{train, write_trace_csv, TaskKind, TrainConfig};
use bel_core::CodeKind;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Debug, Parser)]
#[command(
    name = "bel",
    version,
    about = "Binary-encoded label regression toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Output {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a code matrix as CSV; metrics go to stderr.
    Codes {
        /// unary, johnson, b1jdj, b2jdj, hexj or hadamard.
        #[arg(long)]
        kind: CodeKind,
        #[arg(long)]
        levels: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Expected-error bound under the Gaussian error model, as JSON.
    Bound {
        /// unary or johnson.
        #[arg(long)]
        kind: CodeKind,
        /// Convention size N; labels are 1..N-1.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        sigma: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Percent increase of the unary bound over the Johnson bound on an (r, sigma) grid, as CSV.
    Sweep {
        #[arg(long, default_value_t = 16)]
        n: usize,
        /// r grid as start:stop:count with inclusive endpoints, or a single value.
        #[arg(long, value_parser = parse_grid_arg)]
        r: Option<Grid>,
        /// sigma grid as start:stop:count with inclusive endpoints, or a single value.
        #[arg(long, value_parser = parse_grid_arg)]
        sigma: Option<Grid>,
        #[command(flatten)]
        output: Output,
    },
    /// Monte-Carlo decoding error under the Gaussian error model, as JSON.
    Simulate {
        #[arg(long)]
        kind: CodeKind,
        /// custom, gen or gen-ex.
        #[arg(long, default_value = "gen")]
        decoder: DecoderKind,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, env = "BEL_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        streams: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Train BEL and direct-regression MLPs on a synthetic task, as JSON.
    Train(Box<TrainArgs>),
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// identity, sinusoid, piecewise-linear or step-heavy.
    #[arg(long)]
    task: Option<TaskKind>,
    /// Target noise as a fraction of the label range.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    input_dim: Option<usize>,
    /// Label range as a:b.
    #[arg(long, value_parser = parse_range_arg)]
    range: Option<(f64, f64)>,
    /// Target dimensions per sample.
    #[arg(long)]
    outputs: Option<usize>,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    encoding: Option<CodeKind>,
    /// bce, ce, l1 or l2.
    #[arg(long)]
    loss: Option<LossKind>,
    #[arg(long)]
    decoder: Option<DecoderKind>,
    /// Bottleneck width.
    #[arg(long)]
    theta: Option<usize>,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long, env = "BEL_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    /// l1 or l2 loss for the direct baseline.
    #[arg(long)]
    direct_loss: Option<Norm>,
    /// Directory for per-run `epoch,loss` CSV traces.
    #[arg(long)]
    traces: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

impl TrainArgs {
    fn config(&self) -> TrainConfig {
        let mut c = TrainConfig::default();
        macro_rules! set {
            ($($field:ident).+ = $arg:expr) => {
                if let Some(v) = $arg.clone() {
                    c.$($field).+ = v;
                }
            };
        }
        set!(task.kind = self.task);
        set!(task.noise = self.noise);
        set!(task.input_dim = self.input_dim);
        set!(task.range = self.range);
        set!(task.outputs = self.outputs);
        set!(n_train = self.n_train);
        set!(n_test = self.n_test);
        set!(levels = self.levels);
        set!(encoding = self.encoding);
        set!(loss = self.loss);
        set!(decoder = self.decoder);
        set!(theta = self.theta);
        set!(hidden = self.hidden);
        set!(lr = self.lr);
        set!(epochs = self.epochs);
        set!(batch = self.batch);
        set!(seed = self.seed);
        set!(runs = self.runs);
        set!(direct_loss = self.direct_loss);
        c
    }
}

#[derive(Debug, Clone)]
struct Grid(Vec<f64>);

fn parse_grid_arg(s: &str) -> Result<Grid, String> {
    parse_grid(s).map(Grid).map_err(|e| e.to_string())
}

fn parse_range_arg(s: &str) -> Result<(f64, f64), String> {
    parse_range(s).map_err(|e| e.to_string())
}

fn echo(config: serde_json::Value) {
    eprintln!("config: {config}");
}

fn emit(out: &Option<PathBuf>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn emit_json<T: serde::Serialize>(out: &Option<PathBuf>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    emit(out, |w| writeln!(w, "{text}"))
}

fn write_traces(dir: &Path, report: &bel_core::toytrain::TrainReport) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (i, run) in report.runs.iter().enumerate() {
        for (name, result) in [("bel", &run.bel), ("direct", &run.direct)] {
            let path = dir.join(format!("run{i}_{name}.csv"));
            let file =
                File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_trace_csv(&result.trace, BufWriter::new(file))?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Codes {
            kind,
            levels,
            output,
        } => {
            echo(json!({ "command": "codes", "kind": kind, "levels": levels }));
            let code = kind.generate(levels)?;
            let m = code.metrics();
            emit(&output.out, |w| code.write_csv(w))?;
            eprintln!(
                "bits={} max_transitions={} min_adjacent_hamming={}",
                code.bits(),
                m.max_transitions(),
                m.min_adjacent_hamming()
            );
        }
        Command::Bound {
            kind,
            n,
            r,
            sigma,
            output,
        } => {
            echo(json!({ "command": "bound", "kind": kind, "n": n, "r": r, "sigma": sigma }));
            let report = gaussian_bound(kind, n, r, sigma)?;
            emit_json(&output.out, &report)?;
        }
        Command::Sweep {
            n,
            r,
            sigma,
            output,
        } => {
            let (default_r, default_sigma) = default_grid();
            let r = r.map_or(default_r, |g| g.0);
            let sigma = sigma.map_or(default_sigma, |g| g.0);
            echo(json!({ "command": "sweep", "n": n, "r": r, "sigma": sigma }));
            let grid = compare_sweep(n, &r, &sigma)?;
            emit(&output.out, |w| grid.write_csv(w))?;
        }
        Command::Simulate {
            kind,
            decoder,
            levels,
            r,
            sigma,
            samples,
            seed,
            streams,
            output,
        } => {
            echo(json!({
                "command": "simulate", "kind": kind, "decoder": decoder, "levels": levels,
                "r": r, "sigma": sigma, "samples": samples, "seed": seed, "streams": streams,
            }));
            let code = kind.generate(levels)?;
            let model = model_from_code(&code, r, sigma)?;
            let report = simulate(&code, decoder, &model, samples, seed, streams)?;
            emit_json(&output.out, &report)?;
        }
        Command::Train(args) => {
            let config = args.config();
            echo(json!({ "command": "train", "config": config }));
            let report = train(&config)?;
            if let Some(dir) = &args.traces {
                write_traces(dir, &report)?;
            }
            emit_json(&args.output.out, &report)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bel: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
