use clap::Args;
use graphon_lab::graphon::{family_generate, family_validity_range, GraphonError};
use graphon_lab::{FamilySpec, SbmParams};
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Args)]
pub struct FamilyArgs {
    /// Fraction of vertices in block 1.
    #[arg(long, default_value_t = 0.5)]
    pub k1: f64,
    /// Within-block density of block 1.
    #[arg(long)]
    pub p1: f64,
    /// Within-block density of block 2.
    #[arg(long)]
    pub p2: f64,
    /// Cross-block density.
    #[arg(long)]
    pub q: f64,
    /// Offset along the degree-preserving direction.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub tau: f64,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Serialize)]
pub struct FamilyReport {
    pub base: SbmParams,
    pub tau: f64,
    pub generated: SbmParams,
    pub tau_min: f64,
    pub tau_min_inclusive: bool,
    pub tau_max: f64,
    pub tau_max_inclusive: bool,
    pub direction: [f64; 3],
}

pub fn run(args: &FamilyArgs) -> Result<FamilyReport> {
    let base = SbmParams { k1: args.k1, p1: args.p1, p2: args.p2, q: args.q };
    let range = family_validity_range(&base).map_err(CliError::model("invalid base point"))?;
    if !range.contains(args.tau) {
        let binding = range.violated_by(args.tau).unwrap_or("?");
        return Err(CliError::model(format!(
            "tau = {} outside ({}, {}], binding constraint on {binding}",
            args.tau, range.min, range.max
        ))(GraphonError::OutOfRange { coordinate: binding, value: args.tau }));
    }
    let generated = family_generate(&FamilySpec { base, tau: args.tau }).map_err(CliError::model("family point"))?;
    let report = FamilyReport {
        base,
        tau: args.tau,
        generated,
        tau_min: range.min,
        tau_min_inclusive: range.min_inclusive,
        tau_max: range.max,
        tau_max_inclusive: range.max_inclusive,
        direction: graphon_lab::graphon::family_direction(args.k1),
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable report"));
    } else {
        let g = &report.generated;
        println!("generated (k1, p1, p2, q) = ({}, {:.6}, {:.6}, {:.6})", g.k1, g.p1, g.p2, g.q);
        println!(
            "tau range: {}{:.6}, {:.6}{} (binding: {} below, {} above)",
            if range.min_inclusive { "[" } else { "(" },
            range.min,
            range.max,
            if range.max_inclusive { "]" } else { ")" },
            range.min_binding,
            range.max_binding
        );
        println!(
            "note: only points on this line share the base block degrees; changing p2 alone, as in (0.7, 0.7, 0.1) for base (0.6, 0.4, 0.2), breaks the match"
        );
    }
    Ok(report)
}
