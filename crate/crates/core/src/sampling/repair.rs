use serde::{Deserialize, Serialize};

use super::{GraphSource, SampledGraph, SamplingError};

/// Outcome of [`repair_coupling`]. Vertex classes refer to the graph before
/// repair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairReport {
    #[serde(rename = "C")]
    pub c: f64,
    pub n_small: usize,
    pub n_large: usize,
    pub n_just_right: usize,
    pub edges_added: usize,
    pub edges_removed: usize,
    pub max_per_vertex_modification: usize,
    /// Largest `|deg_g0(v) - deg_g1(v)|` before repair.
    pub max_degree_discrepancy: usize,
}

/// `2 * sqrt(n)`.
pub fn default_repair_threshold(n: usize) -> f64 {
    2.0 * (n as f64).sqrt()
}

/// Moves the degrees of `g0_raw` towards those of `g1`.
///
/// A vertex is C-small when `deg(v) < deg_g1(v) - C` and C-large when
/// `deg(v) > deg_g1(v) + C`. One pass over pairs `u < v` in index order adds
/// every missing edge whose endpoints are both currently C-small; a second
/// pass removes every edge whose endpoints are both currently C-large.
/// Additions can only end smallness and removals can only end largeness, so
/// afterwards the C-small vertices form a clique and the C-large vertices an
/// independent set. Requires `C >= 0`, which keeps the two passes from
/// creating new members of the opposite class.
pub fn repair_coupling(
    g0_raw: &SampledGraph,
    g1: &SampledGraph,
    c: f64,
) -> Result<(SampledGraph, RepairReport), SamplingError> {
    let n = g0_raw.n();
    if g1.n() != n {
        return Err(SamplingError::DimensionMismatch { left: n, right: g1.n() });
    }
    if !c.is_finite() || c < 0.0 {
        return Err(SamplingError::InvalidThreshold(c));
    }
    let target: Vec<f64> = g1.degrees().iter().map(|&d| d as f64).collect();
    let small = |g: &SampledGraph, v: usize| (g.degree(v) as f64) < target[v] - c;
    let large = |g: &SampledGraph, v: usize| (g.degree(v) as f64) > target[v] + c;

    let n_small = (0..n).filter(|&v| small(g0_raw, v)).count();
    let n_large = (0..n).filter(|&v| large(g0_raw, v)).count();
    let max_degree_discrepancy = (0..n)
        .map(|v| g0_raw.degree(v).abs_diff(g1.degree(v)))
        .max()
        .unwrap_or(0);

    let mut g = g0_raw.clone();
    let mut touched = vec![0usize; n];
    let mut edges_added = 0;
    let mut edges_removed = 0;

    if n_small > 1 {
        for u in 0..n {
            for v in u + 1..n {
                if !small(&g, u) {
                    break;
                }
                if small(&g, v) && g.add_edge(u, v) {
                    edges_added += 1;
                    touched[u] += 1;
                    touched[v] += 1;
                }
            }
        }
    }
    if n_large > 1 {
        for u in 0..n {
            for v in u + 1..n {
                if !large(&g, u) {
                    break;
                }
                if large(&g, v) && g.remove_edge(u, v) {
                    edges_removed += 1;
                    touched[u] += 1;
                    touched[v] += 1;
                }
            }
        }
    }

    let positions = g.latent_positions().map(<[f64]>::to_vec);
    let seed = g.seed();
    let report = RepairReport {
        c,
        n_small,
        n_large,
        n_just_right: n - n_small - n_large,
        edges_added,
        edges_removed,
        max_per_vertex_modification: touched.into_iter().max().unwrap_or(0),
        max_degree_discrepancy,
    };
    Ok((g.with_provenance(positions, seed, GraphSource::Repaired), report))
}
