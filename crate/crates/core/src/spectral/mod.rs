//! Random-walk chains on graphs: stationary law, mixing times, spectral gap
//! and the bottleneck ratio.

mod bottleneck;
mod eigen;

pub use bottleneck::{bottleneck_ratio, Bottleneck, DEFAULT_EXHAUSTIVE_LIMIT, MAX_EXHAUSTIVE};
pub use eigen::symmetric_eigenvalues;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gcn::{rw_matrix, GcnError};
use crate::sampling::SampledGraph;
use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("graph is disconnected")]
    Disconnected,
    #[error("vertex {0} is isolated")]
    IsolatedVertex(usize),
    #[error("need at least 2 vertices, got {0}")]
    TooSmall(usize),
    #[error("worst-row distance still above eps after {0} steps")]
    NotMixed(usize),
    #[error("eps must be positive, got {0}")]
    InvalidEpsilon(f64),
    #[error("eigenvalue iteration did not converge")]
    EigenFailure,
    #[error("{n} vertices exceed the exhaustive limit {limit}")]
    TooLargeForExhaustive { n: usize, limit: usize },
}

impl From<GcnError> for SpectralError {
    fn from(e: GcnError) -> Self {
        match e {
            GcnError::IsolatedVertex(v) => SpectralError::IsolatedVertex(v),
            other => unreachable!("random-walk matrix construction only fails on isolated vertices: {other}"),
        }
    }
}

/// Row-stochastic transition matrix with its stationary distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct RwChain<T: Scalar> {
    p: Array2<T>,
    pi: Array1<T>,
    lazy: bool,
}

/// `π(v) = deg(v) / Σ_w deg(w)`.
pub fn stationary<T: Scalar>(g: &SampledGraph) -> Result<Array1<T>, SpectralError> {
    if let Some(v) = g.isolated_vertex() {
        return Err(SpectralError::IsolatedVertex(v));
    }
    if !g.is_connected() {
        return Err(SpectralError::Disconnected);
    }
    let total = T::from_usize_lossy(g.total_degree());
    Ok(g.degrees().iter().map(|&d| T::from_usize_lossy(d) / total).collect())
}

impl<T: Scalar> RwChain<T> {
    /// Simple random walk on a connected graph.
    pub fn from_graph(g: &SampledGraph) -> Result<Self, SpectralError> {
        if g.n() < 2 {
            return Err(SpectralError::TooSmall(g.n()));
        }
        let pi = stationary(g)?;
        Ok(Self { p: rw_matrix(g)?, pi, lazy: false })
    }

    /// `(P + I) / 2`. The stationary law is unchanged.
    pub fn lazy(&self) -> Self {
        let half = T::lit(0.5);
        let mut p = self.p.mapv(|x| x * half);
        p.diag_mut().mapv_inplace(|x| x + half);
        Self { p, pi: self.pi.clone(), lazy: true }
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn p(&self) -> &Array2<T> {
        &self.p
    }

    pub fn pi(&self) -> &Array1<T> {
        &self.pi
    }

    pub fn is_lazy(&self) -> bool {
        self.lazy
    }

    pub fn pi_min(&self) -> T {
        self.pi.iter().copied().fold(T::infinity(), T::min)
    }

    /// Eigenvalues of `P` in decreasing order, through the symmetric matrix
    /// `S_ij = sqrt(π_i) P_ij / sqrt(π_j)`.
    pub fn eigenvalues(&self) -> Result<Vec<T>, SpectralError> {
        let sq: Vec<T> = self.pi.iter().map(|x| x.sqrt()).collect();
        let n = self.n();
        let half = T::lit(0.5);
        let s = Array2::from_shape_fn((n, n), |(i, j)| {
            let a = sq[i] * self.p[[i, j]] / sq[j];
            let b = sq[j] * self.p[[j, i]] / sq[i];
            (a + b) * half
        });
        symmetric_eigenvalues(s).map_err(|_| SpectralError::EigenFailure)
    }
}

/// `P^t` by repeated squaring.
pub fn matrix_power<T: Scalar>(p: ArrayView2<T>, t: usize) -> Array2<T> {
    let n = p.nrows();
    let mut result = Array2::eye(n);
    let mut base = p.to_owned();
    let mut t = t;
    let mut first = true;
    while t > 0 {
        if t & 1 == 1 {
            result = if first { base.clone() } else { result.dot(&base) };
            first = false;
        }
        t >>= 1;
        if t > 0 {
            base = base.dot(&base);
        }
    }
    result
}

fn worst_row_tv<T: Scalar>(pt: &Array2<T>, pi: &Array1<T>) -> f64 {
    pt.axis_iter(Axis(0))
        .map(|row| {
            row.iter()
                .zip(pi.iter())
                .map(|(&a, &b)| (a - b).abs().as_f64())
                .sum::<f64>()
                * 0.5
        })
        .fold(0.0, f64::max)
}

/// `‖P^t - 1π‖_∞`, the largest absolute entry.
pub fn power_limit_gap<T: Scalar>(chain: &RwChain<T>, t: usize) -> f64 {
    limit_gap(&matrix_power(chain.p.view(), t), &chain.pi)
}

fn limit_gap<T: Scalar>(pt: &Array2<T>, pi: &Array1<T>) -> f64 {
    pt.axis_iter(Axis(0))
        .flat_map(|row| row.iter().zip(pi.iter()).map(|(&a, &b)| (a - b).abs().as_f64()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

/// Spectral quantities of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGap {
    /// `1 - λ_2`.
    pub relative: f64,
    /// `1 - max(|λ_2|, |λ_n|)`.
    pub absolute: f64,
}

impl SpectralGap {
    pub fn relaxation_time(&self) -> f64 {
        1.0 / self.absolute
    }
}

pub fn spectral_gaps<T: Scalar>(chain: &RwChain<T>) -> Result<SpectralGap, SpectralError> {
    let ev = chain.eigenvalues()?;
    let l2 = ev[1].as_f64();
    let ln = ev[ev.len() - 1].as_f64();
    Ok(SpectralGap { relative: 1.0 - l2, absolute: 1.0 - l2.abs().max(ln.abs()) })
}

/// Absolute spectral gap `γ* = 1 - max(|λ_2|, |λ_n|)`.
pub fn spectral_gap<T: Scalar>(chain: &RwChain<T>) -> Result<f64, SpectralError> {
    spectral_gaps(chain).map(|g| g.absolute)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub eps: f64,
    pub t_mix: usize,
    /// `(t, max_j TV(e_j P^t, π))` for `t = 0..=t_mix`.
    pub worst_row_tv_trace: Vec<(usize, f64)>,
    pub gap: f64,
    pub relaxation_time: f64,
    /// Exact bottleneck ratio, when the source graph was small enough.
    pub bottleneck: Option<f64>,
    /// `t_mix / ln(n / eps)`, the empirical constant in
    /// `t_mix <= D ln(n / eps)`.
    pub fitted_slope: f64,
}

/// Smallest `t <= t_max` with worst-row total variation at most `eps`.
/// `P^t` is accumulated densely, one product per step.
pub fn mixing_time<T: Scalar>(chain: &RwChain<T>, eps: f64, t_max: usize) -> Result<MixingReport, SpectralError> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(SpectralError::InvalidEpsilon(eps));
    }
    let mut pt: Array2<T> = Array2::eye(chain.n());
    let mut trace = vec![(0, worst_row_tv(&pt, &chain.pi))];
    let mut t = 0;
    while trace[t].1 > eps {
        if t == t_max {
            return Err(SpectralError::NotMixed(t_max));
        }
        pt = pt.dot(&chain.p);
        t += 1;
        let tv = worst_row_tv(&pt, &chain.pi);
        if tv > trace[t - 1].1 + 1e-12 {
            log::warn!("worst-row distance rose from {} to {tv} at step {t}", trace[t - 1].1);
        }
        trace.push((t, tv));
    }
    let gap = spectral_gap(chain)?;
    Ok(MixingReport {
        eps,
        t_mix: t,
        worst_row_tv_trace: trace,
        gap,
        relaxation_time: 1.0 / gap,
        bottleneck: None,
        fitted_slope: t as f64 / (chain.n() as f64 / eps).ln(),
    })
}

/// [`mixing_time`] on the walk of `g`, adding the exact bottleneck ratio when
/// `n <= exhaustive_limit`.
pub fn graph_mixing_time(
    g: &SampledGraph,
    eps: f64,
    t_max: usize,
    lazy: bool,
    exhaustive_limit: usize,
) -> Result<MixingReport, SpectralError> {
    let chain = RwChain::<f64>::from_graph(g)?;
    let chain = if lazy { chain.lazy() } else { chain };
    let mut report = mixing_time(&chain, eps, t_max)?;
    if g.n() <= exhaustive_limit.min(MAX_EXHAUSTIVE) {
        let phi = bottleneck_ratio(g, exhaustive_limit)?.value;
        report.bottleneck = Some(if lazy { phi / 2.0 } else { phi });
    }
    Ok(report)
}

/// Both sides of `Φ²/2 <= γ <= 2Φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheegerReport {
    pub lazy: bool,
    /// Exact bottleneck ratio of the chain (halved for the lazy walk).
    pub phi: f64,
    /// `1 - λ_2`, the gap the inequality is about.
    pub gap: f64,
    /// `1 - max(|λ_2|, |λ_n|)`; equals `gap` for lazy chains.
    pub absolute_gap: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

/// Checks Cheeger's inequality with an exactly enumerated `Φ`.
///
/// The inequality bounds `1 - λ_2`. For lazy chains every eigenvalue is
/// nonnegative, so this is also the absolute gap; for the plain walk the
/// absolute gap is reported alongside and can be 0 on bipartite graphs.
pub fn cheeger_check(g: &SampledGraph, lazy: bool, exhaustive_limit: usize) -> Result<CheegerReport, SpectralError> {
    let limit = exhaustive_limit.min(MAX_EXHAUSTIVE);
    if g.n() > limit {
        return Err(SpectralError::TooLargeForExhaustive { n: g.n(), limit });
    }
    let b = bottleneck_ratio(g, limit)?;
    debug_assert!(!b.heuristic);
    let phi = if lazy { b.value / 2.0 } else { b.value };
    let chain = RwChain::<f64>::from_graph(g)?;
    let chain = if lazy { chain.lazy() } else { chain };
    let gaps = spectral_gaps(&chain)?;
    let (lower, upper) = (phi * phi / 2.0, 2.0 * phi);
    let tol = 1e-10;
    Ok(CheegerReport {
        lazy,
        phi,
        gap: gaps.relative,
        absolute_gap: gaps.absolute,
        lower,
        upper,
        holds: lower <= gaps.relative + tol && gaps.relative <= upper + tol,
    })
}
