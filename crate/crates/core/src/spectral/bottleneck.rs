use std::cmp::Ordering;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::SpectralError;
use crate::rng::{rng_for, stream};
use crate::sampling::SampledGraph;

/// Default vertex count up to which the bottleneck ratio is enumerated.
pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 20;
/// Hard cap on exhaustive enumeration.
pub const MAX_EXHAUSTIVE: usize = 30;
/// Random orders tried by the heuristic sweep.
const HEURISTIC_ORDERS: usize = 16;

/// `Φ = min_{π(S) <= 1/2} |∂S| / vol(S)` for the simple random walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bottleneck {
    pub value: f64,
    pub boundary: usize,
    pub volume: usize,
    /// A minimising set.
    pub set: Vec<usize>,
    /// True when the value is an upper bound from sweep cuts rather than the
    /// exact minimum.
    pub heuristic: bool,
}

/// Compares `a_num / a_den` with `b_num / b_den` exactly.
fn ratio_cmp(a_num: usize, a_den: usize, b_num: usize, b_den: usize) -> Ordering {
    (a_num as u128 * b_den as u128).cmp(&(b_num as u128 * a_den as u128))
}

/// Exact minimum when `n <= min(exhaustive_limit, 30)`, otherwise the best of
/// several sweep cuts, flagged as heuristic.
pub fn bottleneck_ratio(g: &SampledGraph, exhaustive_limit: usize) -> Result<Bottleneck, SpectralError> {
    if g.n() < 2 {
        return Err(SpectralError::TooSmall(g.n()));
    }
    if !g.is_connected() {
        return Err(SpectralError::Disconnected);
    }
    if g.n() <= exhaustive_limit.min(MAX_EXHAUSTIVE) {
        Ok(exhaustive(g))
    } else {
        Ok(sweep(g))
    }
}

fn exhaustive(g: &SampledGraph) -> Bottleneck {
    let n = g.n();
    let adj: Vec<u32> = (0..n).map(|v| g.neighbors(v).fold(0u32, |m, u| m | 1 << u)).collect();
    let deg = g.degrees();
    let total = g.total_degree();
    let (mut s, mut boundary, mut volume) = (0u32, 0usize, 0usize);
    let mut best: Option<(usize, usize, u32)> = None;
    // Gray code: step i toggles bit trailing_zeros(i).
    for i in 1u64..1 << n {
        let v = i.trailing_zeros() as usize;
        let bit = 1u32 << v;
        if s & bit == 0 {
            let inside = (adj[v] & s).count_ones() as usize;
            boundary = boundary + deg[v] - 2 * inside;
            volume += deg[v];
            s |= bit;
        } else {
            s &= !bit;
            let inside = (adj[v] & s).count_ones() as usize;
            boundary = boundary + 2 * inside - deg[v];
            volume -= deg[v];
        }
        if 2 * volume <= total
            && best.is_none_or(|(b, vol, _)| ratio_cmp(boundary, volume, b, vol) == Ordering::Less)
        {
            best = Some((boundary, volume, s));
        }
    }
    let (boundary, volume, mask) = best.expect("connected graph with n >= 2 has a vertex of at most half volume");
    Bottleneck {
        value: boundary as f64 / volume as f64,
        boundary,
        volume,
        set: (0..n).filter(|&v| mask >> v & 1 == 1).collect(),
        heuristic: false,
    }
}

fn sweep(g: &SampledGraph) -> Bottleneck {
    let n = g.n();
    let mut orders: Vec<Vec<usize>> = Vec::with_capacity(HEURISTIC_ORDERS + 2);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| g.degree(v));
    orders.push(by_degree.clone());
    by_degree.reverse();
    orders.push(by_degree);
    let mut rng = rng_for(0, stream::HEURISTIC);
    for _ in 0..HEURISTIC_ORDERS {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        orders.push(order);
    }
    let total = g.total_degree();
    let mut best: Option<(usize, usize, Vec<usize>)> = None;
    for order in &orders {
        let mut s = FixedBitSet::with_capacity(n);
        let (mut boundary, mut volume) = (0usize, 0usize);
        for (k, &v) in order.iter().enumerate() {
            let inside = g.row(v).intersection(&s).count();
            boundary = boundary + g.degree(v) - 2 * inside;
            volume += g.degree(v);
            s.insert(v);
            if 2 * volume > total {
                break;
            }
            if best.as_ref().is_none_or(|(b, vol, _)| ratio_cmp(boundary, volume, *b, *vol) == Ordering::Less) {
                best = Some((boundary, volume, order[..=k].to_vec()));
            }
        }
    }
    let (boundary, volume, mut set) = best.expect("some prefix has at most half volume");
    set.sort_unstable();
    Bottleneck { value: boundary as f64 / volume as f64, boundary, volume, set, heuristic: true }
}
