//! The `tracelab` experiment harness.
//!
//! Every subcommand reads a JSON config, writes CSV results into an output
//! directory and finally commits a `manifest.json` describing the run. A
//! directory without a manifest holds an incomplete run.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use chrono::Utc;
use clap::{Args, Parser, Subcommand};

pub use config::{
    ArcConfig, CertifyConfig, MeanTraceConfig, PairSelection, ReconstructConfig, SampleConfig,
    SeparationConfig, Truncation,
};
pub use error::{CliError, Result};
pub use output::{RunManifest, MANIFEST};

use config::Common;
use output::{commit, describe_outputs, sha256_hex, timestamp, OutDir};

#[derive(Debug, Parser)]
#[command(
    name = "tracelab",
    version,
    about = "Trace reconstruction experiments over replication-insertion channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample traces of one input word.
    Sample(RunArgs),
    /// Exact and empirical mean trace of one input word.
    MeanTrace(RunArgs),
    /// Mean-based reconstruction success rates.
    Reconstruct(RunArgs),
    /// Minimum mean-trace distance over pairs of inputs.
    Separation(RunArgs),
    /// Check the generating-function lower bound on pairs of inputs.
    Certify(RunArgs),
    /// Inversion of g_M along the arc and arc maxima of polynomials.
    Arc(RunArgs),
}

#[derive(Clone, Debug, Args)]
pub struct RunArgs {
    /// JSON config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Root seed; overrides the config's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides the config's `out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, env = "TRACELAB_THREADS")]
    pub threads: Option<usize>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sample(_) => "sample",
            Command::MeanTrace(_) => "mean-trace",
            Command::Reconstruct(_) => "reconstruct",
            Command::Separation(_) => "separation",
            Command::Certify(_) => "certify",
            Command::Arc(_) => "arc",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Sample(a)
            | Command::MeanTrace(a)
            | Command::Reconstruct(a)
            | Command::Separation(a)
            | Command::Certify(a)
            | Command::Arc(a) => a,
        }
    }
}

/// Where a finished run left its results.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub out: PathBuf,
    pub manifest: PathBuf,
    pub outputs: Vec<String>,
}

pub fn run(cli: &Cli) -> Result<RunReport> {
    let name = cli.command.name();
    let args = cli.command.args();
    match &cli.command {
        Command::Sample(_) => execute(name, args, commands::sample),
        Command::MeanTrace(_) => execute(name, args, commands::mean_trace),
        Command::Reconstruct(_) => execute(name, args, commands::reconstruct),
        Command::Separation(_) => execute(name, args, commands::separation),
        Command::Certify(_) => execute(name, args, commands::certify),
        Command::Arc(_) => execute(name, args, commands::arc),
    }
}

fn thread_pool(threads: Option<usize>) -> Result<Option<rayon::ThreadPool>> {
    match threads {
        None => Ok(None),
        Some(0) => Err(CliError::config("--threads", "must be at least 1")),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map(Some)
            .map_err(|e| CliError::config("--threads", e)),
    }
}

fn execute<C: Common + Sync>(
    name: &str,
    args: &RunArgs,
    body: fn(&C, u64, &mut OutDir) -> Result<()>,
) -> Result<RunReport> {
    let mut cfg: C = config::load(&args.config)?;
    let seed = args.seed.or(*cfg.seed_mut()).unwrap_or(0);
    *cfg.seed_mut() = Some(seed);
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out_mut().clone())
        .unwrap_or_else(|| PathBuf::from(config::DEFAULT_OUT));
    let pool = thread_pool(args.threads)?;

    // The digest identifies the experiment, so it leaves out where the
    // results are written.
    let saved_out = cfg.out_mut().take();
    let digest = sha256_hex(
        serde_json::to_string(&cfg)
            .expect("config serializes")
            .as_bytes(),
    );
    *cfg.out_mut() = saved_out.or(Some(out.clone()));
    let resolved = serde_json::to_value(&cfg).expect("config serializes");

    let mut dir = OutDir::prepare(&out)?;
    let started_at = Utc::now();
    match &pool {
        Some(pool) => pool.install(|| body(&cfg, seed, &mut dir))?,
        None => body(&cfg, seed, &mut dir)?,
    }
    let outputs = describe_outputs(&dir)?;
    let manifest = RunManifest {
        tool: "tracelab",
        tool_version: env!("CARGO_PKG_VERSION"),
        command: name.to_string(),
        config_digest: format!("sha256:{digest}"),
        root_seed: seed,
        started_at: timestamp(started_at),
        finished_at: timestamp(Utc::now()),
        config: resolved,
        outputs,
    };
    let path = commit(&dir, &manifest)?;
    Ok(RunReport {
        out,
        manifest: path,
        outputs: dir.written().to_vec(),
    })
}
