//! Graph samples drawn from step graphons, couplings between them, and
//! ingestion of external edge lists.

mod edge_list;
mod repair;

pub use edge_list::{load_edge_list, load_edge_list_path, write_edge_list, EdgeListStats, GraphSidecar};
pub use repair::{default_repair_threshold, repair_coupling, RepairReport};

use fixedbitset::FixedBitSet;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphon::StepGraphon;
use crate::rng::{rng_for, stream};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("need at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("graphs have {left} and {right} vertices")]
    DimensionMismatch { left: usize, right: usize },
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edge list is empty")]
    EmptyInput,
    #[error("repair threshold must be finite, got {0}")]
    InvalidThreshold(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where a graph came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphSource {
    Sampled,
    Repaired,
    External,
    Constructed,
}

/// Simple undirected graph with optional latent vertex positions.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGraph {
    adjacency: Vec<FixedBitSet>,
    degrees: Vec<usize>,
    latent_positions: Option<Vec<f64>>,
    seed: Option<u64>,
    source: GraphSource,
}

impl SampledGraph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Self {
            adjacency: vec![FixedBitSet::with_capacity(n); n],
            degrees: vec![0; n],
            latent_positions: None,
            seed: None,
            source: GraphSource::Constructed,
        }
    }

    /// Builds from an edge list. Self-loops and duplicates are ignored.
    pub fn from_edges<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        Self::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
    }

    pub fn path(n: usize) -> Self {
        Self::from_edges(n, (1..n).map(|v| (v - 1, v)))
    }

    pub fn cycle(n: usize) -> Self {
        Self::from_edges(n, (0..n).map(|v| (v, (v + 1) % n)))
    }

    /// Star with vertex 0 as centre.
    pub fn star(leaves: usize) -> Self {
        Self::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v)))
    }

    /// Two copies of `K_k` joined by the edge `(k - 1, k)`.
    pub fn barbell(k: usize) -> Self {
        let clique = move |base: usize| (0..k).flat_map(move |u| (u + 1..k).map(move |v| (base + u, base + v)));
        Self::from_edges(2 * k, clique(0).chain(clique(k)).chain(std::iter::once((k - 1, k))))
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn total_degree(&self) -> usize {
        self.degrees.iter().sum()
    }

    pub fn edge_count(&self) -> usize {
        self.total_degree() / 2
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].contains(v)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v].ones()
    }

    pub(crate) fn row(&self, v: usize) -> &FixedBitSet {
        &self.adjacency[v]
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| self.adjacency[u].ones().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    pub fn latent_positions(&self) -> Option<&[f64]> {
        self.latent_positions.as_deref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn source(&self) -> &GraphSource {
        &self.source
    }

    /// Returns true if the edge was new.
    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        if u == v || self.adjacency[u].contains(v) {
            return false;
        }
        self.adjacency[u].insert(v);
        self.adjacency[v].insert(u);
        self.degrees[u] += 1;
        self.degrees[v] += 1;
        true
    }

    /// Returns true if the edge existed.
    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        if u == v || !self.adjacency[u].contains(v) {
            return false;
        }
        self.adjacency[u].set(v, false);
        self.adjacency[v].set(u, false);
        self.degrees[u] -= 1;
        self.degrees[v] -= 1;
        true
    }

    pub fn isolated_vertex(&self) -> Option<usize> {
        self.degrees.iter().position(|&d| d == 0)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut seen = FixedBitSet::with_capacity(n);
        let mut stack = vec![0];
        seen.insert(0);
        while let Some(u) = stack.pop() {
            for v in self.adjacency[u].ones() {
                if !seen.put(v) {
                    stack.push(v);
                }
            }
        }
        seen.count_ones(..) == n
    }

    /// Two-colourable (per component).
    pub fn is_bipartite(&self) -> bool {
        let n = self.n();
        let mut colour: Vec<Option<bool>> = vec![None; n];
        for s in 0..n {
            if colour[s].is_some() {
                continue;
            }
            colour[s] = Some(false);
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                let cu = colour[u].expect("coloured");
                for v in self.adjacency[u].ones() {
                    match colour[v] {
                        None => {
                            colour[v] = Some(!cu);
                            stack.push(v);
                        }
                        Some(cv) if cv == cu => return false,
                        _ => {}
                    }
                }
            }
        }
        true
    }

    /// Same graph with vertex `v` renamed to `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n(), "permutation length");
        let mut g = Self::from_edges(self.n(), self.edges().map(|(u, v)| (perm[u], perm[v])));
        if let Some(pos) = &self.latent_positions {
            let mut moved = vec![0.0; pos.len()];
            for (v, &p) in perm.iter().enumerate() {
                moved[p] = pos[v];
            }
            g.latent_positions = Some(moved);
        }
        g.seed = self.seed;
        g.source = self.source.clone();
        g
    }

    pub(crate) fn with_provenance(mut self, positions: Option<Vec<f64>>, seed: Option<u64>, source: GraphSource) -> Self {
        self.latent_positions = positions;
        self.seed = seed;
        self.source = source;
        self
    }
}

/// Two graphs drawn on one set of latent positions.
#[derive(Debug, Clone)]
pub struct CoupledPair {
    pub g0: SampledGraph,
    pub g1: SampledGraph,
}

/// How the edge indicators of a [`CoupledPair`] relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeCoupling {
    /// Independent uniforms per graph: edges conditionally independent
    /// given positions.
    #[default]
    Independent,
    /// One uniform per vertex pair shared by both graphs.
    Shared,
}

fn draw_positions<T: Scalar>(w: &StepGraphon<T>, n: usize, seed: u64) -> (Vec<f64>, Vec<usize>) {
    let mut rng = rng_for(seed, stream::POSITIONS);
    let positions: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let blocks = positions.iter().map(|&x| w.block_of(x)).collect();
    (positions, blocks)
}

fn density_table<T: Scalar>(w: &StepGraphon<T>) -> Vec<f64> {
    w.densities().iter().map(|d| d.as_f64()).collect()
}

fn draw_edges(blocks: &[usize], k: usize, table: &[f64], seed: u64, edge_stream: u64) -> SampledGraph {
    let n = blocks.len();
    let mut rng = rng_for(seed, edge_stream);
    let mut g = SampledGraph::empty(n);
    for i in 0..n {
        let row = &table[blocks[i] * k..(blocks[i] + 1) * k];
        for j in i + 1..n {
            if rng.gen::<f64>() < row[blocks[j]] {
                g.add_edge(i, j);
            }
        }
    }
    g
}

/// Draws `G ~ W` on `n` vertices: uniform latent positions, then one uniform
/// per unordered pair compared against `W(x_i, x_j)`.
pub fn sample_graph<T: Scalar>(w: &StepGraphon<T>, n: usize, seed: u64) -> Result<SampledGraph, SamplingError> {
    if n < 2 {
        return Err(SamplingError::TooFewVertices(n));
    }
    let (positions, blocks) = draw_positions(w, n, seed);
    let g = draw_edges(&blocks, w.blocks(), &density_table(w), seed, stream::EDGES_0);
    Ok(g.with_provenance(Some(positions), Some(seed), GraphSource::Sampled))
}

/// Draws `G0 ~ W0` and `G1 ~ W1` on shared latent positions.
///
/// Both graphs resolve positions through their own block partition, so the
/// pair realises the identity measure-preserving map between `W0` and `W1`.
/// `g0` is identical to `sample_graph(w0, n, seed)`.
pub fn sample_coupled<T: Scalar>(
    w0: &StepGraphon<T>,
    w1: &StepGraphon<T>,
    n: usize,
    seed: u64,
    coupling: EdgeCoupling,
) -> Result<CoupledPair, SamplingError> {
    if n < 2 {
        return Err(SamplingError::TooFewVertices(n));
    }
    let (positions, blocks0) = draw_positions(w0, n, seed);
    let blocks1: Vec<usize> = positions.iter().map(|&x| w1.block_of(x)).collect();
    let g0 = draw_edges(&blocks0, w0.blocks(), &density_table(w0), seed, stream::EDGES_0);
    let s1 = match coupling {
        EdgeCoupling::Independent => stream::EDGES_1,
        EdgeCoupling::Shared => stream::EDGES_0,
    };
    let g1 = draw_edges(&blocks1, w1.blocks(), &density_table(w1), seed, s1);
    Ok(CoupledPair {
        g0: g0.with_provenance(Some(positions.clone()), Some(seed), GraphSource::Sampled),
        g1: g1.with_provenance(Some(positions), Some(seed), GraphSource::Sampled),
    })
}

/// Degrees over total degree, sorted decreasing (the stationary distribution
/// of the walk, up to vertex order).
pub fn empirical_degree_profile<T: Scalar>(g: &SampledGraph) -> Result<Vec<T>, SamplingError> {
    let total = g.total_degree();
    if total == 0 {
        return Err(SamplingError::EmptyGraph);
    }
    let mut degrees = g.degrees().to_vec();
    degrees.sort_unstable_by(|a, b| b.cmp(a));
    let total = T::from_usize_lossy(total);
    Ok(degrees.into_iter().map(|d| T::from_usize_lossy(d) / total).collect())
}
