//! `graphon-lab`: graphon distances, mixing times and GCN distinguishability
//! experiments from the command line.

mod commands;
mod config;
mod error;
mod output;
mod spec;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{dataset, delta, experiment, family, mixing};
use error::{CliError, Result};

/// Environment variable setting the number of worker threads.
const WORKERS_VAR: &str = "GRAPHON_LAB_WORKERS";

const GRAPHON_HELP: &str = "\
Graphon specs are JSON, inline or in a file:
  {\"sbm\": {\"k1\": 0.5, \"p1\": 0.6, \"p2\": 0.4, \"q\": 0.2}}
  {\"family\": {\"base\": {\"k1\": 0.5, \"p1\": 0.6, \"p2\": 0.4, \"q\": 0.2}, \"tau\": 0.05}}
  {\"step\": {\"weights\": [0.5, 0.5], \"densities\": [[0.6, 0.2], [0.2, 0.4]]}}
  {\"constant\": 1.0}

Worker threads: set GRAPHON_LAB_WORKERS (default: all cores).
All randomness derives from --seed or the config's seed.
Exit codes: 0 success, 2 config error, 3 model or output error.";

const MIXING_HELP: &str = "\
Outputs in --out-dir:
  mixing.csv    n,sample,seed,status,t_mix,gap,relaxation_time,fitted_d
                status is ok, not_mixed, disconnected or isolated_vertex;
                fitted_d = t_mix / ln(n / eps)
  traces.csv    n,sample,t,worst_row_tv
  manifest.json config hash, version, timestamp, checksums, status";

const EXPERIMENT_HELP: &str = "\
Config (JSON):
  schema_version   1
  models           [w0, w1], each an inline graphon spec or a file path
  n_list           graph sizes, each >= 2
  k_rule           {\"fixed\": K} or {\"log\": {\"d\": D}} for ceil(D ln n); default D = 6
  eps_rule         {\"fixed\": e}, {\"per_n\": {\"c\": c}} for c/n,
                   or {\"delta_per_n\": {\"f\": f}} for f * delta / n
  activation       identity | relu | tanh | swish | selu (default identity)
  trials           Monte Carlo trials per size, >= 1
  distance_trials  coupled-pair trials per size (default: trials)
  seed             master seed
  coupling         independent | shared (default independent)
  const_c          constant of the zero-distance error formula (default 1)
  envelope         {\"separated\": c, \"exceptional\": c', \"coordinate\": c''}
  output           {\"dir\": path relative to the config file}

Outputs:
  distances.csv  n,depth,delta,regime,trials,sorted_median,sorted_p95,raw_median,
                 raw_p95,envelope,mean_fraction_within,fitted_exponent
  error.csv      n,depth,eps_res,trials,errors,error_rate,accuracy,ci_low,ci_high,
                 lecam_floor,floor_p_value,significantly_below_floor,thm2_bound
  trials.csv     n,trial,seed,label,decision,distance,lecam_floor
  report.json    config plus full per-size reports
  manifest.json  status is partial if a size failed";

const DATASET_HELP: &str = "\
Outputs in --out-dir:
  graph_profiles.csv  file,label,n,edges,grid_index,u,value
  class_profiles.csv  label,graphs,grid_index,u,value
  class_delta.csv     label_a,label_b,delta
  summary.json        counts and deltas
  manifest.json
Profiles are sorted degrees over total degree, scaled by n and read at grid
midpoints. delta is the mean absolute difference of two class profiles.
Unreadable files are skipped with a warning.";

#[derive(Debug, Parser)]
#[command(name = "graphon-lab", version, about, after_help = GRAPHON_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Degree distance between two graphons.
    Delta(delta::DeltaArgs),
    /// Point of the degree-preserving SBM family and its valid offsets.
    Family(family::FamilyArgs),
    /// Mixing times of random walks on sampled graphs.
    #[command(after_help = MIXING_HELP)]
    Mixing(mixing::MixingArgs),
    /// Distance and error experiments from a JSON config.
    #[command(after_help = EXPERIMENT_HELP)]
    Experiment(experiment::ExperimentArgs),
    /// Per-class degree profiles of a directory of edge lists.
    #[command(name = "dataset-profile", after_help = DATASET_HELP)]
    DatasetProfile(dataset::DatasetArgs),
}

fn configure_workers() -> Result<()> {
    let Ok(raw) = std::env::var(WORKERS_VAR) else {
        return Ok(());
    };
    let workers: usize = raw
        .parse()
        .ok()
        .filter(|&w| w > 0)
        .ok_or_else(|| CliError::config(format!("{WORKERS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::config(format!("cannot start {workers} workers: {e}")))
}

fn dispatch(cli: &Cli) -> Result<()> {
    configure_workers()?;
    match &cli.command {
        Command::Delta(a) => delta::run(a).map(drop),
        Command::Family(a) => family::run(a).map(drop),
        Command::Mixing(a) => mixing::run(a).map(drop),
        Command::Experiment(a) => experiment::run(a).map(drop),
        Command::DatasetProfile(a) => dataset::run(a).map(drop),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
