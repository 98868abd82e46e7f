use std::path::PathBuf;

use clap::Args;
use graphon_lab::rng::derive_seed;
use graphon_lab::sampling::sample_graph;
use graphon_lab::spectral::{graph_mixing_time, SpectralError, DEFAULT_EXHAUSTIVE_LIMIT};
use graphon_lab::testing::stats::quantile_sorted;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::output::{sha256_hex, with_outputs, RunManifest};
use crate::spec::{parse_spec, GraphonSpec};

#[derive(Debug, Args, Serialize)]
pub struct MixingArgs {
    /// Graphon: inline JSON or a path to a JSON file.
    #[arg(long)]
    pub graphon: String,
    /// Graph sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Total variation target.
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    /// Samples per size.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    /// Master seed; each sample derives its own.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Steps tried before giving up on a run.
    #[arg(long, default_value_t = 10_000)]
    pub t_max: usize,
    /// Use the lazy walk (P + I)/2.
    #[arg(long)]
    pub lazy: bool,
    /// Output directory.
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MixingRow {
    pub n: usize,
    pub sample: u64,
    pub seed: u64,
    pub status: String,
    pub t_mix: Option<usize>,
    pub gap: Option<f64>,
    pub relaxation_time: Option<f64>,
    /// `t_mix / ln(n / eps)`.
    pub fitted_d: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TraceRow {
    pub n: usize,
    pub sample: u64,
    pub t: usize,
    pub worst_row_tv: f64,
}

fn status_of(e: &SpectralError) -> &'static str {
    match e {
        SpectralError::NotMixed(_) => "not_mixed",
        SpectralError::Disconnected => "disconnected",
        SpectralError::IsolatedVertex(_) => "isolated_vertex",
        _ => "error",
    }
}

fn validate(args: &MixingArgs) -> Result<GraphonSpec> {
    if args.n.iter().any(|&n| n < 2) {
        return Err(CliError::config("every n must be at least 2"));
    }
    if args.eps.is_nan() || args.eps <= 0.0 {
        return Err(CliError::config(format!("eps must be positive, got {}", args.eps)));
    }
    if args.seeds == 0 {
        return Err(CliError::config("seeds must be at least 1"));
    }
    parse_spec(&args.graphon, None)
}

pub fn run(args: &MixingArgs) -> Result<RunManifest> {
    let spec = validate(args)?;
    let w = spec.to_graphon()?;
    let config_hash = sha256_hex(&serde_json::to_vec(&(args, &spec)).expect("serializable args"));
    let jobs: Vec<(usize, u64)> = args.n.iter().flat_map(|&n| (0..args.seeds).map(move |s| (n, s))).collect();
    let runs = jobs
        .par_iter()
        .map(|&(n, s)| {
            let seed = derive_seed(derive_seed(args.seed, n as u64), s);
            let g = sample_graph(&w, n, seed).map_err(CliError::model(format!("sampling n = {n}")))?;
            let row = |status: &str| MixingRow {
                n,
                sample: s,
                seed,
                status: status.to_string(),
                t_mix: None,
                gap: None,
                relaxation_time: None,
                fitted_d: None,
            };
            Ok(match graph_mixing_time(&g, args.eps, args.t_max, args.lazy, DEFAULT_EXHAUSTIVE_LIMIT) {
                Ok(r) => {
                    let trace = r
                        .worst_row_tv_trace
                        .iter()
                        .map(|&(t, tv)| TraceRow { n, sample: s, t, worst_row_tv: tv })
                        .collect();
                    let mixed = MixingRow {
                        t_mix: Some(r.t_mix),
                        gap: Some(r.gap),
                        relaxation_time: Some(r.relaxation_time),
                        fitted_d: Some(r.fitted_slope),
                        ..row("ok")
                    };
                    (mixed, trace)
                }
                Err(e) => {
                    log::warn!("n = {n}, sample {s}: {e}");
                    (row(status_of(&e)), Vec::new())
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (rows, traces): (Vec<MixingRow>, Vec<Vec<TraceRow>>) = runs.into_iter().unzip();
    let traces: Vec<TraceRow> = traces.into_iter().flatten().collect();
    for &n in &args.n {
        let mut d: Vec<f64> = rows.iter().filter(|r| r.n == n).filter_map(|r| r.fitted_d).collect();
        if d.is_empty() {
            println!("n = {n}: no run mixed within {} steps", args.t_max);
            continue;
        }
        d.sort_by(f64::total_cmp);
        let mut t: Vec<f64> = rows.iter().filter(|r| r.n == n).filter_map(|r| r.t_mix.map(|t| t as f64)).collect();
        t.sort_by(f64::total_cmp);
        println!(
            "n = {n}: median t_mix {} median D {:.4} ({} of {} mixed)",
            quantile_sorted(&t, 0.5),
            quantile_sorted(&d, 0.5),
            d.len(),
            args.seeds
        );
    }
    with_outputs(&args.out_dir, "mixing", config_hash, |out| {
        out.write_csv("mixing.csv", &rows)?;
        out.write_csv("traces.csv", &traces)
    })
}
