//! Distinguishing graphons from perturbed GCN embeddings: exact total
//! variation between uniformly perturbed vectors, error lower bounds, a
//! nearest-profile test and Monte Carlo drivers.

mod experiment;
pub mod stats;

pub use experiment::{
    embedding_distance_experiment, monte_carlo_error, DistanceConstants, DistanceReport, DistanceTrial,
    ExperimentReport, TrialOutcome,
};

use ndarray::{ArrayBase, ArrayView1, Data, Dimension};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gcn::GcnError;
use crate::graphon::{degree_function, GraphonError, StepGraphon};
use crate::sampling::SamplingError;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum TestingError {
    #[error("shapes {left:?} and {right:?} differ")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("perturbation scale must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("total variation {0} outside [0, 1]")]
    InvalidTv(f64),
    #[error("bound needs eps_res > delta / (2n) = {threshold}, got {eps}")]
    HypothesisViolated { eps: f64, threshold: f64 },
    #[error("need at least one trial")]
    NoTrials,
    #[error("invalid delta {0}")]
    InvalidDelta(f64),
    #[error(transparent)]
    Gcn(#[from] GcnError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Graphon(#[from] GraphonError),
}

/// Total variation between `m0 + U` and `m1 + U'`, with `U`, `U'` i.i.d.
/// uniform on `[-ε, ε]` per coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvResult {
    pub tv: f64,
    /// `Σ ln(1 - |Δ|/(2ε))`; `-∞` once any coordinate clips.
    pub log_overlap: f64,
    /// Coordinates with `|Δ| >= 2ε`, whose supports are disjoint.
    pub clipped_dims: usize,
}

/// `1 - ∏ (2ε - |Δ_ij|)₊ / (2ε)`, evaluated in log space.
pub fn tv_perturbed<T, S0, S1, D>(m0: &ArrayBase<S0, D>, m1: &ArrayBase<S1, D>, eps: f64) -> Result<TvResult, TestingError>
where
    T: Scalar,
    S0: Data<Elem = T>,
    S1: Data<Elem = T>,
    D: Dimension,
{
    if m0.shape() != m1.shape() {
        return Err(TestingError::ShapeMismatch { left: m0.shape().to_vec(), right: m1.shape().to_vec() });
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(TestingError::InvalidEpsilon(eps));
    }
    let width = 2.0 * eps;
    let mut log_overlap = 0.0f64;
    let mut clipped_dims = 0;
    for (&a, &b) in m0.iter().zip(m1.iter()) {
        let d = (a.as_f64() - b.as_f64()).abs();
        if d >= width {
            clipped_dims += 1;
        } else {
            log_overlap += (-d / width).ln_1p();
        }
    }
    if clipped_dims > 0 {
        return Ok(TvResult { tv: 1.0, log_overlap: f64::NEG_INFINITY, clipped_dims });
    }
    Ok(TvResult { tv: -log_overlap.exp_m1(), log_overlap, clipped_dims })
}

/// Le Cam: any test errs with probability at least `(1 - tv) / 2`.
pub fn lecam_error_lower(tv: f64) -> Result<f64, TestingError> {
    if !(0.0..=1.0).contains(&tv) {
        return Err(TestingError::InvalidTv(tv));
    }
    Ok((1.0 - tv) / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundRegime {
    DeltaPositive,
    DeltaZero,
}

/// Error lower bounds for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBounds {
    pub lecam_lower: f64,
    /// The closed-form bound as stated, without clamping to `[0, 1/2]`.
    pub thm2_formula: f64,
    pub regime: BoundRegime,
}

impl ErrorBounds {
    pub fn new(tv: f64, delta: f64, eps: f64, n: usize, const_c: f64) -> Result<Self, TestingError> {
        let regime = if delta > 0.0 { BoundRegime::DeltaPositive } else { BoundRegime::DeltaZero };
        Ok(Self { lecam_lower: lecam_error_lower(tv)?, thm2_formula: thm2_bound(delta, eps, n, const_c)?, regime })
    }
}

/// `(1 - δ/(2εn))^n` for `δ > 0` (requires `ε > δ/(2n)`) and
/// `exp(-c/(εn))` for `δ = 0`.
pub fn thm2_bound(delta: f64, eps: f64, n: usize, const_c: f64) -> Result<f64, TestingError> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(TestingError::InvalidEpsilon(eps));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(TestingError::InvalidDelta(delta));
    }
    let nf = n as f64;
    if delta == 0.0 {
        return Ok((-const_c / (eps * nf)).exp());
    }
    let threshold = delta / (2.0 * nf);
    if eps <= threshold {
        return Err(TestingError::HypothesisViolated { eps, threshold });
    }
    Ok((nf * (-delta / (2.0 * eps * nf)).ln_1p()).exp())
}

/// Expected sorted embedding under one graphon: rank `r` gets the decreasing
/// rearrangement of `d_W / D(W)` at `(r + 1/2)/n`, divided by `n`.
pub fn expected_profile<T: Scalar>(w: &StepGraphon<T>, n: usize) -> Vec<f64> {
    let profile = degree_function(w).normalize().decreasing();
    let nf = n as f64;
    (0..n).map(|r| profile.value_at(T::lit((r as f64 + 0.5) / nf)).as_f64() / nf).collect()
}

/// Decision of the nearest-profile test and the two L1 distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileDecision {
    pub decision: u8,
    pub distances: [f64; 2],
}

/// Sorted-L1 nearest-profile test with the two expected profiles cached.
#[derive(Debug, Clone)]
pub struct ProfileTest {
    profiles: [Vec<f64>; 2],
}

impl ProfileTest {
    pub fn new<T: Scalar>(w0: &StepGraphon<T>, w1: &StepGraphon<T>, n: usize) -> Self {
        Self { profiles: [expected_profile(w0, n), expected_profile(w1, n)] }
    }

    pub fn n(&self) -> usize {
        self.profiles[0].len()
    }

    pub fn profile(&self, b: usize) -> &[f64] {
        &self.profiles[b]
    }

    /// Sorts `h` decreasing and picks the nearer profile; ties go to 0.
    pub fn decide<T: Scalar>(&self, h: ArrayView1<T>) -> Result<ProfileDecision, TestingError> {
        if h.len() != self.n() {
            return Err(TestingError::ShapeMismatch { left: vec![h.len()], right: vec![self.n()] });
        }
        let mut sorted: Vec<f64> = h.iter().map(|x| x.as_f64()).collect();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let dist = |p: &[f64]| sorted.iter().zip(p).map(|(a, b)| (a - b).abs()).sum::<f64>();
        let distances = [dist(&self.profiles[0]), dist(&self.profiles[1])];
        let decision = u8::from(distances[1] < distances[0]);
        Ok(ProfileDecision { decision, distances })
    }
}

/// One-shot form of [`ProfileTest::decide`] with `n = h.len()`.
pub fn nearest_profile_test<T: Scalar>(
    h: ArrayView1<T>,
    w0: &StepGraphon<T>,
    w1: &StepGraphon<T>,
) -> Result<ProfileDecision, TestingError> {
    ProfileTest::new(w0, w1, h.len()).decide(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::SbmParams;
    use ndarray::{array, Array1};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn sbm(p1: f64, p2: f64, q: f64) -> StepGraphon<f64> {
        SbmParams::new(0.5, p1, p2, q).unwrap().to_graphon().unwrap()
    }

    #[test]
    fn tv_fixtures() {
        let a = array![[0.1, 0.2], [0.3, 0.4]];
        assert_eq!(tv_perturbed(&a, &a, 0.1).unwrap().tv, 0.0);
        let b = array![[0.1, 0.2], [0.3, 0.9]];
        let r = tv_perturbed(&a, &b, 0.1).unwrap();
        assert_eq!((r.tv, r.clipped_dims), (1.0, 1));
        assert_eq!(r.log_overlap, f64::NEG_INFINITY);
        assert_eq!(tv_perturbed(&array![0.0], &array![1.0], 1.0).unwrap().tv, 0.5);
        assert!(matches!(
            tv_perturbed(&array![0.0, 1.0], &array![1.0], 1.0),
            Err(TestingError::ShapeMismatch { .. })
        ));
        assert!(tv_perturbed(&array![0.0], &array![1.0], 0.0).is_err());
    }

    #[test]
    fn tv_underflow_is_safe() {
        let n = 100_000;
        let a = Array1::<f64>::zeros(n);
        let b = Array1::from_elem(n, 0.1);
        let r = tv_perturbed(&a, &b, 0.1).unwrap();
        assert_eq!(r.clipped_dims, 0);
        assert!((r.log_overlap - n as f64 * 0.5f64.ln()).abs() < 1e-6);
        assert_eq!(r.tv, 1.0);
    }

    #[test]
    fn tv_matches_monte_carlo() {
        // Overlap of two uniform boxes: draw from box 0 and count landings
        // in box 1. 2e5 samples give standard error below .0012.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let eps = rng.gen_range(0.2..1.0);
            let a: Array1<f64> = (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let b: Array1<f64> = (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let m = 200_000;
            let inside = (0..m)
                .filter(|_| a.iter().zip(&b).all(|(x, y)| (x + rng.gen_range(-eps..eps) - y).abs() <= eps))
                .count();
            let tv = tv_perturbed(&a, &b, eps).unwrap().tv;
            assert!((1.0 - inside as f64 / m as f64 - tv).abs() < 0.006);
        }
    }

    proptest! {
        #[test]
        fn tv_symmetric_and_monotone(
            a in prop::collection::vec(-1.0f64..1.0, 4),
            b in prop::collection::vec(-1.0f64..1.0, 4),
            eps in 0.01f64..2.0,
        ) {
            let (a, b) = (Array1::from(a), Array1::from(b));
            let ab = tv_perturbed(&a, &b, eps).unwrap();
            let ba = tv_perturbed(&b, &a, eps).unwrap();
            prop_assert_eq!(ab.tv, ba.tv);
            let wider = tv_perturbed(&a, &b, eps * 1.5).unwrap();
            prop_assert!(wider.tv <= ab.tv + 1e-15);
            prop_assert!((0.0..=1.0).contains(&ab.tv));
            if ab.clipped_dims == 0 {
                prop_assert!((ab.tv - (1.0 - ab.log_overlap.exp())).abs() < 1e-12);
            }
        }

        #[test]
        fn profile_test_ignores_coordinate_order(seed: u64) {
            let (w0, w1) = (sbm(0.6, 0.4, 0.2), sbm(0.55, 0.45, 0.2));
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let h: Array1<f64> = (0..40).map(|_| rng.gen_range(0.0..0.05)).collect();
            let mut perm: Vec<usize> = (0..40).collect();
            rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
            let shuffled: Array1<f64> = perm.iter().map(|&i| h[i]).collect();
            prop_assert_eq!(
                nearest_profile_test(h.view(), &w0, &w1).unwrap(),
                nearest_profile_test(shuffled.view(), &w0, &w1).unwrap()
            );
        }
    }

    #[test]
    fn lecam_values() {
        assert_eq!(lecam_error_lower(0.0).unwrap(), 0.5);
        assert_eq!(lecam_error_lower(1.0).unwrap(), 0.0);
        assert!((lecam_error_lower(0.8).unwrap() - 0.1).abs() < 1e-15);
        assert!(lecam_error_lower(1.5).is_err());
    }

    #[test]
    fn thm2_values() {
        let n = 400;
        let eps = 10.0 / n as f64;
        assert!((thm2_bound(0.0, eps, n, 1.0).unwrap() - (-0.1f64).exp()).abs() < 1e-15);
        let delta = 1.0 / 14.0;
        let half_power = thm2_bound(delta, delta / n as f64, n, 1.0).unwrap();
        assert!((half_power / 0.5f64.powi(n as i32) - 1.0).abs() < 1e-12);
        assert!(matches!(
            thm2_bound(delta, delta / (2.0 * n as f64), n, 1.0),
            Err(TestingError::HypothesisViolated { .. })
        ));
        let b = ErrorBounds::new(0.2, 0.0, eps, n, 1.0).unwrap();
        assert_eq!(b.regime, BoundRegime::DeltaZero);
        assert!((b.lecam_lower - 0.4).abs() < 1e-15);
    }

    #[test]
    fn profile_fixtures() {
        let (w0, w1) = (sbm(0.6, 0.4, 0.2), sbm(0.55, 0.45, 0.2));
        let n = 10;
        let p0 = expected_profile(&w0, n);
        // d/D is 8/7 on the first half and 6/7 on the second.
        assert!((p0[0] - 8.0 / 70.0).abs() < 1e-15 && (p0[9] - 6.0 / 70.0).abs() < 1e-15);
        let h0 = Array1::from(p0.clone());
        let d = nearest_profile_test(h0.view(), &w0, &w1).unwrap();
        assert_eq!(d.decision, 0);
        assert_eq!(d.distances[0], 0.0);
        let swapped = nearest_profile_test(h0.view(), &w1, &w0).unwrap();
        assert_eq!(swapped.decision, 1);
        let tie = nearest_profile_test(h0.view(), &w0, &w0).unwrap();
        assert_eq!(tie.decision, 0);
        assert!(ProfileTest::new(&w0, &w1, 11).decide(h0.view()).is_err());
    }
}
