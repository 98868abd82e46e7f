use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use clap::Args;
use graphon_lab::sampling::{empirical_degree_profile, load_edge_list_path};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::output::{sha256_hex, with_outputs, RunManifest};

#[derive(Debug, Args, Serialize)]
pub struct DatasetArgs {
    /// Directory of edge-list files.
    #[arg(long)]
    pub dir: PathBuf,
    /// CSV with header `filename,label`.
    #[arg(long)]
    pub labels: PathBuf,
    /// Points on the common grid over [0, 1].
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    /// Output directory.
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Deserialize)]
struct LabelRow {
    filename: String,
    label: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GraphProfileRow {
    pub file: String,
    pub label: String,
    pub n: usize,
    pub edges: usize,
    pub grid_index: usize,
    pub u: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ClassProfileRow {
    pub label: String,
    pub graphs: usize,
    pub grid_index: usize,
    pub u: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ClassDeltaRow {
    pub label_a: String,
    pub label_b: String,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub graphs_loaded: usize,
    pub skipped: usize,
    pub unlabeled_files: usize,
    pub classes: BTreeMap<String, usize>,
    pub deltas: Vec<ClassDeltaRow>,
}

fn grid_point(i: usize, m: usize) -> f64 {
    (i as f64 + 0.5) / m as f64
}

/// Evaluates the sorted profile, read as a step function with `n` equal
/// pieces, at the grid midpoints. Values are scaled by `n` so that they are
/// comparable with the graphon's normalized degree function.
pub fn on_grid(sorted: &[f64], m: usize) -> Vec<f64> {
    let n = sorted.len();
    (0..m)
        .map(|i| sorted[((grid_point(i, m) * n as f64) as usize).min(n - 1)] * n as f64)
        .collect()
}

fn read_labels(path: &Path) -> Result<Vec<LabelRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let rows = reader
        .deserialize()
        .collect::<std::result::Result<Vec<LabelRow>, _>>()
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    if rows.is_empty() {
        return Err(CliError::config(format!("{}: no labels", path.display())));
    }
    Ok(rows)
}

pub fn run(args: &DatasetArgs) -> Result<RunManifest> {
    if args.grid == 0 {
        return Err(CliError::config("grid must be at least 1"));
    }
    let labels = read_labels(&args.labels)?;
    let entries = std::fs::read_dir(&args.dir).map_err(|e| CliError::config(format!("{}: {e}", args.dir.display())))?;
    let mut files: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter(|e| e.path().is_file())
        .filter_map(|e| e.file_name().into_string().ok())
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::config(format!("{}: no files", args.dir.display())));
    }
    let labelled: HashSet<&str> = labels.iter().map(|r| r.filename.as_str()).collect();
    let label_file = args.labels.file_name().and_then(|f| f.to_str());
    let unlabeled = files.iter().filter(|f| !labelled.contains(f.as_str()) && Some(f.as_str()) != label_file).count();
    if unlabeled > 0 {
        log::warn!("{unlabeled} files in {} have no label and were ignored", args.dir.display());
    }

    let m = args.grid;
    let mut skipped = 0;
    let mut per_graph = Vec::new();
    let mut sums: BTreeMap<String, (usize, Vec<f64>)> = BTreeMap::new();
    for row in &labels {
        let path = args.dir.join(&row.filename);
        let loaded = load_edge_list_path(&path).and_then(|(g, _)| {
            let profile = empirical_degree_profile::<f64>(&g)?;
            Ok((g, profile))
        });
        let (g, profile) = match loaded {
            Ok(x) => x,
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                skipped += 1;
                continue;
            }
        };
        let values = on_grid(&profile, m);
        let entry = sums.entry(row.label.clone()).or_insert_with(|| (0, vec![0.0; m]));
        entry.0 += 1;
        for (i, v) in values.iter().enumerate() {
            entry.1[i] += v;
            per_graph.push(GraphProfileRow {
                file: row.filename.clone(),
                label: row.label.clone(),
                n: g.n(),
                edges: g.edge_count(),
                grid_index: i,
                u: grid_point(i, m),
                value: *v,
            });
        }
    }
    if sums.is_empty() {
        return Err(CliError::config(format!("no readable labelled graphs in {}", args.dir.display())));
    }
    if skipped > 0 {
        log::warn!("{skipped} graphs skipped");
    }
    let means: Vec<(String, usize, Vec<f64>)> =
        sums.into_iter().map(|(label, (count, s))| (label, count, s.iter().map(|v| v / count as f64).collect())).collect();
    let class_rows: Vec<ClassProfileRow> = means
        .iter()
        .flat_map(|(label, count, v)| {
            v.iter().enumerate().map(move |(i, &value)| ClassProfileRow {
                label: label.clone(),
                graphs: *count,
                grid_index: i,
                u: grid_point(i, m),
                value,
            })
        })
        .collect();
    let mut deltas = Vec::new();
    for (a, (la, _, va)) in means.iter().enumerate() {
        for (lb, _, vb) in &means[a + 1..] {
            let delta = va.iter().zip(vb).map(|(x, y)| (x - y).abs()).sum::<f64>() / m as f64;
            println!("delta({la}, {lb}) = {delta:.6}");
            deltas.push(ClassDeltaRow { label_a: la.clone(), label_b: lb.clone(), delta });
        }
    }
    let summary = DatasetSummary {
        graphs_loaded: per_graph.len() / m,
        skipped,
        unlabeled_files: unlabeled,
        classes: means.iter().map(|(l, c, _)| (l.clone(), *c)).collect(),
        deltas: deltas.clone(),
    };
    let config_hash = sha256_hex(&serde_json::to_vec(args).expect("serializable args"));
    with_outputs(&args.out_dir, "dataset-profile", config_hash, |out| {
        out.write_csv("graph_profiles.csv", &per_graph)?;
        out.write_csv("class_profiles.csv", &class_rows)?;
        out.write_csv("class_delta.csv", &deltas)?;
        out.write_json("summary.json", &summary)
    })
}
