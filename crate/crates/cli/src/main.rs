use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fairmpc::fl::SynthParams;
use fairmpc_cli::{
    bench_mpc, gen_data, run_pipeline, write_report, ExperimentConfig, HarnessError, HarnessResult, Overrides,
    Pipeline, Primitive,
};

#[derive(Parser)]
#[command(name = "fairmpc", version, about = "Privacy-preserving fairness pipelines over simulated 3-party MPC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a pipeline for every configured seed and emit a JSON report.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        pipeline: Option<Pipeline>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        no_noise: bool,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include wall-clock per phase (reports are then not reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Cost of `size` sequential invocations of one primitive.
    Bench {
        #[arg(long)]
        primitive: String,
        #[arg(long, default_value_t = 1000)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic federation as CSV.
    GenData {
        #[arg(long)]
        out: PathBuf,
        /// TOML file with generator parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        clients: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        bias_gap: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn emit(json: String, out: Option<PathBuf>) -> HarnessResult<()> {
    match out {
        Some(p) => std::fs::write(p, json)?,
        None => print!("{json}"),
    }
    Ok(())
}

fn execute(cmd: Command) -> HarnessResult<()> {
    match cmd {
        Command::Run {
            config,
            pipeline,
            epsilon,
            no_noise,
            seeds,
            out,
            timings,
        } => {
            let mut cfg = match config {
                Some(p) => ExperimentConfig::load(&p)?,
                None => ExperimentConfig::default(),
            };
            cfg.apply(Overrides {
                pipeline,
                epsilon,
                no_noise,
                seeds,
                out,
                timings,
            });
            let report = run_pipeline(&cfg)?;
            if cfg.out.is_some() {
                write_report(&report)?;
            } else {
                print!("{}", report.to_json());
            }
        }
        Command::Bench {
            primitive,
            size,
            seed,
            out,
        } => {
            let rec = bench_mpc(primitive.parse::<Primitive>()?, size, seed)?;
            emit(serde_json::to_string_pretty(&rec).expect("record serializes") + "\n", out)?;
        }
        Command::GenData {
            out,
            params,
            clients,
            samples,
            bias_gap,
            seed,
        } => {
            let mut p: SynthParams = match params {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| HarnessError::config(format!("cannot read {}: {e}", path.display())))?;
                    toml::from_str(&text).map_err(|e| HarnessError::config(e.to_string()))?
                }
                None => SynthParams::default(),
            };
            p.clients = clients.unwrap_or(p.clients);
            p.samples = samples.unwrap_or(p.samples);
            p.bias_gap = bias_gap.unwrap_or(p.bias_gap);
            let rows = gen_data(&p, seed, &out)?;
            eprintln!("wrote {rows} rows to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
