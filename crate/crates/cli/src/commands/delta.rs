use clap::Args;
use graphon_lab::graphon::{degree_function, delta_distance};
use graphon_lab::DegreeProfile;
use serde::Serialize;

use crate::error::Result;
use crate::spec::parse_spec;

#[derive(Debug, Args)]
pub struct DeltaArgs {
    /// First graphon: inline JSON or a path to a JSON file.
    #[arg(long)]
    pub w0: String,
    /// Second graphon: inline JSON or a path to a JSON file.
    #[arg(long)]
    pub w1: String,
    /// Pairs with delta at or below this are reported as exceptional.
    #[arg(long, default_value_t = 1e-9)]
    pub threshold: f64,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Serialize)]
pub struct DeltaReport {
    pub delta: f64,
    pub threshold: f64,
    pub verdict: &'static str,
    pub profile0: DegreeProfile,
    pub profile1: DegreeProfile,
}

pub fn run(args: &DeltaArgs) -> Result<DeltaReport> {
    let w0 = parse_spec(&args.w0, None)?.to_graphon()?;
    let w1 = parse_spec(&args.w1, None)?.to_graphon()?;
    let delta = delta_distance(&w0, &w1);
    let report = DeltaReport {
        delta,
        threshold: args.threshold,
        verdict: if delta <= args.threshold { "exceptional" } else { "separated" },
        profile0: degree_function(&w0).normalize(),
        profile1: degree_function(&w1).normalize(),
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable report"));
    } else {
        println!("delta = {:.12}", report.delta);
        println!("verdict: {} (threshold {})", report.verdict, report.threshold);
        for (name, p) in [("w0", &report.profile0), ("w1", &report.profile1)] {
            let pieces: Vec<String> = p.weights.iter().zip(&p.values).map(|(w, v)| format!("{w:.6}:{v:.6}")).collect();
            println!("{name} normalized degree profile (weight:value): {}", pieces.join(" "));
        }
    }
    Ok(report)
}
