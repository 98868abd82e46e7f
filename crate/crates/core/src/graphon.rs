//! Step graphons, stochastic block models and their degree functionals.
//!
//! A step graphon is piecewise constant on a product partition of `[0,1]`.
//! Blocks are laid out left to right in the order of `weights`, so block `i`
//! covers `[w_0 + .. + w_{i-1}, w_0 + .. + w_i)`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

/// Default lower bound `ℓ` enforced on every density.
pub const DEFAULT_MIN_DENSITY: f64 = 1e-6;

/// Largest block count accepted by [`cut_norm_step`].
pub const CUT_NORM_MAX_BLOCKS: usize = 16;

/// Largest block count accepted by [`cut_distance_blocks`].
pub const CUT_DISTANCE_MAX_BLOCKS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphonError {
    #[error("graphon needs at least one block")]
    NoBlocks,
    #[error("block weight {index} is {value}, must be strictly positive")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("block weights sum to {sum}, expected 1")]
    WeightsDoNotSumToOne { sum: f64 },
    #[error("density matrix is {rows}x{cols}, expected {blocks}x{blocks}")]
    DensityShape { rows: usize, cols: usize, blocks: usize },
    #[error("density matrix is not symmetric at ({i}, {j})")]
    NotSymmetric { i: usize, j: usize },
    #[error("density ({i}, {j}) = {value} outside [{min}, 1]")]
    DensityOutOfRange { i: usize, j: usize, value: f64, min: f64 },
    #[error("invalid minimum density {0}, must lie in (0, 1]")]
    InvalidMinDensity(f64),
    #[error("SBM block fraction k1 = {0} outside (0, 1)")]
    InvalidBlockFraction(f64),
    #[error("SBM parameter {name} = {value} outside (0, 1]")]
    InvalidSbmDensity { name: &'static str, value: f64 },
    #[error("family offset leaves the unit cube: {coordinate} would be {value}")]
    OutOfRange { coordinate: &'static str, value: f64 },
    #[error("kernel has {blocks} blocks, exhaustive search supports at most {limit}")]
    TooManyBlocks { blocks: usize, limit: usize },
    #[error("block weights cannot be matched by a permutation")]
    UnmatchableWeights,
}

// ---------------------------------------------------------------------------
// StepGraphon

/// Symmetric piecewise-constant kernel on `[0,1]^2` with densities in `[ℓ, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepGraphon<T>", into = "RawStepGraphon<T>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct StepGraphon<T: Scalar> {
    weights: Vec<T>,
    densities: Array2<T>,
    min_density: T,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
struct RawStepGraphon<T: Scalar> {
    weights: Vec<T>,
    densities: Vec<Vec<T>>,
}

impl<T: Scalar> TryFrom<RawStepGraphon<T>> for StepGraphon<T> {
    type Error = GraphonError;

    fn try_from(raw: RawStepGraphon<T>) -> Result<Self, Self::Error> {
        StepGraphon::from_rows(raw.weights, raw.densities)
    }
}

impl<T: Scalar> From<StepGraphon<T>> for RawStepGraphon<T> {
    fn from(w: StepGraphon<T>) -> Self {
        RawStepGraphon {
            densities: w.densities.rows().into_iter().map(|r| r.to_vec()).collect(),
            weights: w.weights,
        }
    }
}

impl<T: Scalar> StepGraphon<T> {
    /// Builds a graphon with the default minimum density.
    pub fn new(weights: Vec<T>, densities: Array2<T>) -> Result<Self, GraphonError> {
        Self::with_min_density(weights, densities, T::lit(DEFAULT_MIN_DENSITY))
    }

    pub fn with_min_density(
        weights: Vec<T>,
        densities: Array2<T>,
        min_density: T,
    ) -> Result<Self, GraphonError> {
        if !(min_density > T::zero() && min_density <= T::one()) {
            return Err(GraphonError::InvalidMinDensity(min_density.as_f64()));
        }
        let k = weights.len();
        if k == 0 {
            return Err(GraphonError::NoBlocks);
        }
        for (index, &w) in weights.iter().enumerate() {
            if w.is_nan() || w <= T::zero() {
                return Err(GraphonError::NonPositiveWeight { index, value: w.as_f64() });
            }
        }
        let sum: T = weights.iter().copied().sum();
        if (sum - T::one()).abs() > T::unit_tolerance() {
            return Err(GraphonError::WeightsDoNotSumToOne { sum: sum.as_f64() });
        }
        let (rows, cols) = densities.dim();
        if rows != k || cols != k {
            return Err(GraphonError::DensityShape { rows, cols, blocks: k });
        }
        for i in 0..k {
            for j in 0..k {
                let v = densities[[i, j]];
                if !(v >= min_density && v <= T::one()) {
                    return Err(GraphonError::DensityOutOfRange {
                        i,
                        j,
                        value: v.as_f64(),
                        min: min_density.as_f64(),
                    });
                }
                if j > i && (v - densities[[j, i]]).abs() > T::unit_tolerance() {
                    return Err(GraphonError::NotSymmetric { i, j });
                }
            }
        }
        Ok(Self { weights, densities, min_density })
    }

    /// Builds from nested rows, as read from JSON.
    pub fn from_rows(weights: Vec<T>, rows: Vec<Vec<T>>) -> Result<Self, GraphonError> {
        let k = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(GraphonError::DensityShape { rows: k, cols, blocks: weights.len() });
        }
        let flat: Vec<T> = rows.into_iter().flatten().collect();
        let densities = Array2::from_shape_vec((k, cols), flat)
            .map_err(|_| GraphonError::DensityShape { rows: k, cols, blocks: weights.len() })?;
        Self::new(weights, densities)
    }

    /// `W ≡ c` as a single block.
    pub fn constant(c: T) -> Result<Self, GraphonError> {
        Self::new(vec![T::one()], Array2::from_elem((1, 1), c))
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn densities(&self) -> &Array2<T> {
        &self.densities
    }

    pub fn blocks(&self) -> usize {
        self.weights.len()
    }

    pub fn min_density(&self) -> T {
        self.min_density
    }

    #[inline]
    pub fn density(&self, i: usize, j: usize) -> T {
        self.densities[[i, j]]
    }

    /// Block containing latent position `x ∈ [0,1]`.
    pub fn block_of(&self, x: f64) -> usize {
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w.as_f64();
            if x < acc {
                return i;
            }
        }
        self.weights.len() - 1
    }

    /// Reorders blocks: new block `i` is old block `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self, GraphonError> {
        let k = self.blocks();
        assert_eq!(perm.len(), k, "permutation length must equal block count");
        let weights = perm.iter().map(|&p| self.weights[p]).collect();
        let densities = Array2::from_shape_fn((k, k), |(i, j)| self.densities[[perm[i], perm[j]]]);
        Self::with_min_density(weights, densities, self.min_density)
    }
}

// ---------------------------------------------------------------------------
// SBM and the degree-preserving family

/// Two-block SBM `(k1; p1, p2, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct SbmParams<T: Scalar> {
    pub k1: T,
    pub p1: T,
    pub p2: T,
    pub q: T,
}

impl<T: Scalar> SbmParams<T> {
    pub fn new(k1: T, p1: T, p2: T, q: T) -> Result<Self, GraphonError> {
        let s = Self { k1, p1, p2, q };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), GraphonError> {
        if !(self.k1 > T::zero() && self.k1 < T::one()) {
            return Err(GraphonError::InvalidBlockFraction(self.k1.as_f64()));
        }
        for (name, v) in self.named() {
            if !(v > T::zero() && v <= T::one()) {
                return Err(GraphonError::InvalidSbmDensity { name, value: v.as_f64() });
            }
        }
        Ok(())
    }

    pub fn k2(&self) -> T {
        T::one() - self.k1
    }

    fn named(&self) -> [(&'static str, T); 3] {
        [("p1", self.p1), ("p2", self.p2), ("q", self.q)]
    }

    pub fn to_graphon(&self) -> Result<StepGraphon<T>, GraphonError> {
        self.validate()?;
        let densities = Array2::from_shape_vec((2, 2), vec![self.p1, self.q, self.q, self.p2])
            .expect("2x2 shape");
        StepGraphon::new(vec![self.k1, self.k2()], densities)
    }
}

/// Base point plus offset along the degree-preserving direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct FamilySpec<T: Scalar> {
    pub base: SbmParams<T>,
    pub tau: T,
}

/// Direction `(1/k1, k1/k2², −1/k2)` along which both block degrees stay fixed.
pub fn family_direction<T: Scalar>(k1: T) -> [T; 3] {
    let k2 = T::one() - k1;
    [k1.recip(), k1 / (k2 * k2), -k2.recip()]
}

pub fn family_generate<T: Scalar>(spec: &FamilySpec<T>) -> Result<SbmParams<T>, GraphonError> {
    spec.base.validate()?;
    let dir = family_direction(spec.base.k1);
    let base = spec.base.named();
    let mut out = [T::zero(); 3];
    for (idx, ((name, x), c)) in base.iter().zip(dir).enumerate() {
        let v = *x + spec.tau * c;
        if !(v > T::zero() && v <= T::one()) {
            return Err(GraphonError::OutOfRange { coordinate: name, value: v.as_f64() });
        }
        out[idx] = v;
    }
    Ok(SbmParams { k1: spec.base.k1, p1: out[0], p2: out[1], q: out[2] })
}

/// Admissible offsets for a family base point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct TauRange<T: Scalar> {
    pub min: T,
    pub max: T,
    pub min_inclusive: bool,
    pub max_inclusive: bool,
    /// Coordinate whose constraint sets `min`.
    pub min_binding: &'static str,
    /// Coordinate whose constraint sets `max`.
    pub max_binding: &'static str,
}

impl<T: Scalar> TauRange<T> {
    pub fn contains(&self, tau: T) -> bool {
        let above = if self.min_inclusive { tau >= self.min } else { tau > self.min };
        let below = if self.max_inclusive { tau <= self.max } else { tau < self.max };
        above && below
    }

    /// Binding coordinate for a rejected `tau`.
    pub fn violated_by(&self, tau: T) -> Option<&'static str> {
        if self.contains(tau) {
            None
        } else if tau > self.max || (tau == self.max && !self.max_inclusive) {
            Some(self.max_binding)
        } else {
            Some(self.min_binding)
        }
    }
}

/// Interval of `τ` keeping every coordinate of `base + τ·dir` in `(0, 1]`.
pub fn family_validity_range<T: Scalar>(base: &SbmParams<T>) -> Result<TauRange<T>, GraphonError> {
    base.validate()?;
    let dir = family_direction(base.k1);
    let mut r = TauRange {
        min: T::neg_infinity(),
        max: T::infinity(),
        min_inclusive: false,
        max_inclusive: false,
        min_binding: "",
        max_binding: "",
    };
    let lower = |bound: T, inclusive: bool, name: &'static str, r: &mut TauRange<T>| {
        if bound > r.min || (bound == r.min && !inclusive) {
            r.min = bound;
            r.min_inclusive = inclusive;
            r.min_binding = name;
        }
    };
    let upper = |bound: T, inclusive: bool, name: &'static str, r: &mut TauRange<T>| {
        if bound < r.max || (bound == r.max && !inclusive) {
            r.max = bound;
            r.max_inclusive = inclusive;
            r.max_binding = name;
        }
    };
    for ((name, x), c) in base.named().into_iter().zip(dir) {
        if c > T::zero() {
            // x + τc > 0  and  x + τc ≤ 1
            lower(-x / c, false, name, &mut r);
            upper((T::one() - x) / c, true, name, &mut r);
        } else {
            let m = -c;
            upper(x / m, false, name, &mut r);
            lower(-(T::one() - x) / m, true, name, &mut r);
        }
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// Degree functionals

/// Step function on `[0,1]` given as `(weight, value)` pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct DegreeProfile<T: Scalar> {
    pub weights: Vec<T>,
    pub values: Vec<T>,
    /// Whether `values` have been divided by the total degree.
    pub normalized: bool,
}

impl<T: Scalar> DegreeProfile<T> {
    /// Divides by `∫ values`, which equals the total degree `D(W)`.
    pub fn normalize(&self) -> Self {
        if self.normalized {
            return self.clone();
        }
        let total = self.integral();
        Self {
            weights: self.weights.clone(),
            values: self.values.iter().map(|&v| v / total).collect(),
            normalized: true,
        }
    }

    pub fn integral(&self) -> T {
        self.weights.iter().zip(&self.values).map(|(&w, &v)| w * v).sum()
    }

    /// Decreasing rearrangement: pieces sorted by value, largest first.
    pub fn decreasing(&self) -> Self {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[b].partial_cmp(&self.values[a]).expect("finite profile"));
        Self {
            weights: idx.iter().map(|&i| self.weights[i]).collect(),
            values: idx.iter().map(|&i| self.values[i]).collect(),
            normalized: self.normalized,
        }
    }

    /// Value of the step function at `u`, pieces laid out left to right.
    pub fn value_at(&self, u: T) -> T {
        let mut acc = T::zero();
        for (&w, &v) in self.weights.iter().zip(&self.values) {
            acc = acc + w;
            if u < acc {
                return v;
            }
        }
        *self.values.last().expect("non-empty profile")
    }
}

/// `d_W`: block `i` value `Σ_j w_j · W_ij`.
pub fn degree_function<T: Scalar>(w: &StepGraphon<T>) -> DegreeProfile<T> {
    let k = w.blocks();
    let values = (0..k)
        .map(|i| (0..k).map(|j| w.weights[j] * w.densities[[i, j]]).sum())
        .collect();
    DegreeProfile { weights: w.weights.clone(), values, normalized: false }
}

/// `D(W) = Σ_ij w_i w_j W_ij`.
pub fn total_degree<T: Scalar>(w: &StepGraphon<T>) -> T {
    degree_function(w).integral()
}

/// `d_deg(W0, W1)`: L1 distance between the decreasing rearrangements of the
/// two normalised degree functions.
pub fn delta_distance<T: Scalar>(w0: &StepGraphon<T>, w1: &StepGraphon<T>) -> T {
    let a = degree_function(w0).normalize().decreasing();
    let b = degree_function(w1).normalize().decreasing();
    rearranged_l1(&a, &b)
}

/// L1 distance between two step functions, pieces taken in the given order.
pub(crate) fn rearranged_l1<T: Scalar>(a: &DegreeProfile<T>, b: &DegreeProfile<T>) -> T {
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a.weights[0], b.weights[0]);
    let mut acc = T::zero();
    loop {
        let m = ra.min(rb);
        acc = acc + m * (a.values[i] - b.values[j]).abs();
        ra = ra - m;
        rb = rb - m;
        if ra <= T::zero() {
            i += 1;
            if i == a.values.len() {
                break;
            }
            ra = a.weights[i];
        }
        if rb <= T::zero() {
            j += 1;
            if j == b.values.len() {
                break;
            }
            rb = b.weights[j];
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Cut norm

/// Signed step kernel, typically a difference of two graphons on a common
/// refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct StepKernel<T: Scalar> {
    pub weights: Vec<T>,
    pub values: Array2<T>,
}

impl<T: Scalar> StepKernel<T> {
    pub fn new(weights: Vec<T>, values: Array2<T>) -> Self {
        assert_eq!(values.dim(), (weights.len(), weights.len()), "kernel shape");
        Self { weights, values }
    }

    /// `W0 − W1` on the overlay of the two block partitions.
    pub fn difference(w0: &StepGraphon<T>, w1: &StepGraphon<T>) -> Self {
        let cells = common_refinement(w0.weights(), w1.weights());
        let weights: Vec<T> = cells.iter().map(|c| c.0).collect();
        let k = cells.len();
        let values = Array2::from_shape_fn((k, k), |(a, b)| {
            let (_, a0, a1) = cells[a];
            let (_, b0, b1) = cells[b];
            w0.density(a0, b0) - w1.density(a1, b1)
        });
        Self { weights, values }
    }

    pub fn negate(&self) -> Self {
        Self { weights: self.weights.clone(), values: self.values.mapv(|v| -v) }
    }

    /// `∫∫ |K|`.
    pub fn l1_mass(&self) -> T {
        let k = self.weights.len();
        let mut acc = T::zero();
        for i in 0..k {
            for j in 0..k {
                acc = acc + self.weights[i] * self.weights[j] * self.values[[i, j]].abs();
            }
        }
        acc
    }
}

/// Overlay of two interval partitions of `[0,1]`: `(length, block in a, block in b)`.
fn common_refinement<T: Scalar>(a: &[T], b: &[T]) -> Vec<(T, usize, usize)> {
    let tol = T::unit_tolerance();
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (a[0], b[0]);
    while i < a.len() && j < b.len() {
        let m = ra.min(rb);
        if m > tol {
            out.push((m, i, j));
        }
        ra = ra - m;
        rb = rb - m;
        if ra <= tol {
            i += 1;
            if i < a.len() {
                ra = a[i];
            }
        }
        if rb <= tol {
            j += 1;
            if j < b.len() {
                rb = b[j];
            }
        }
    }
    out
}

/// Exact `sup_{S,T} |∫_{S×T} K|` for a step kernel.
///
/// The objective is bilinear in the block fractions of `S` and `T`, so the
/// optimum sits at unions of whole blocks. For each block subset `S` the best
/// `T` collects every column with positive (or every column with negative)
/// contribution.
pub fn cut_norm_step<T: Scalar>(kernel: &StepKernel<T>) -> Result<T, GraphonError> {
    let k = kernel.weights.len();
    if k > CUT_NORM_MAX_BLOCKS {
        return Err(GraphonError::TooManyBlocks { blocks: k, limit: CUT_NORM_MAX_BLOCKS });
    }
    let w = &kernel.weights;
    let mut best = T::zero();
    let mut column = vec![T::zero(); k];
    for mask in 1u32..(1u32 << k) {
        column.iter_mut().for_each(|c| *c = T::zero());
        for i in (0..k).filter(|i| mask & (1 << i) != 0) {
            for (j, c) in column.iter_mut().enumerate() {
                *c = *c + w[i] * w[j] * kernel.values[[i, j]];
            }
        }
        let (mut pos, mut neg) = (T::zero(), T::zero());
        for &c in &column {
            if c > T::zero() {
                pos = pos + c;
            } else {
                neg = neg - c;
            }
        }
        best = best.max(pos).max(neg);
    }
    Ok(best)
}

/// Cut distance restricted to weight-preserving block permutations of `w1`.
pub fn cut_distance_blocks<T: Scalar>(
    w0: &StepGraphon<T>,
    w1: &StepGraphon<T>,
) -> Result<T, GraphonError> {
    let k = w0.blocks();
    if w1.blocks() != k {
        return Err(GraphonError::UnmatchableWeights);
    }
    if k > CUT_DISTANCE_MAX_BLOCKS {
        return Err(GraphonError::TooManyBlocks { blocks: k, limit: CUT_DISTANCE_MAX_BLOCKS });
    }
    let mut best: Option<T> = None;
    let mut perm = Vec::with_capacity(k);
    let mut used = vec![false; k];
    search_permutations(w0, w1, &mut perm, &mut used, &mut best)?;
    best.ok_or(GraphonError::UnmatchableWeights)
}

fn search_permutations<T: Scalar>(
    w0: &StepGraphon<T>,
    w1: &StepGraphon<T>,
    perm: &mut Vec<usize>,
    used: &mut [bool],
    best: &mut Option<T>,
) -> Result<(), GraphonError> {
    let k = w0.blocks();
    if perm.len() == k {
        let values = Array2::from_shape_fn((k, k), |(i, j)| {
            w0.density(i, j) - w1.density(perm[i], perm[j])
        });
        let norm = cut_norm_step(&StepKernel::new(w0.weights().to_vec(), values))?;
        *best = Some(best.map_or(norm, |b| b.min(norm)));
        return Ok(());
    }
    let target = w0.weights()[perm.len()];
    for c in 0..k {
        if !used[c] && (w1.weights()[c] - target).abs() <= T::unit_tolerance() {
            used[c] = true;
            perm.push(c);
            search_permutations(w0, w1, perm, used, best)?;
            perm.pop();
            used[c] = false;
        }
    }
    Ok(())
}
