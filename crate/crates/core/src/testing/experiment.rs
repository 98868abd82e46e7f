use ndarray::Array1;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{binomial_lower_tail, clopper_pearson, Summary};
use super::{lecam_error_lower, thm2_bound, tv_perturbed, BoundRegime, ProfileTest, TestingError};
use crate::gcn::{classify_activation, embed, perturb, Activation, GcnConfig, GcnError, NiceClass};
use crate::graphon::{delta_distance, StepGraphon};
use crate::rng::{derive_seed, rng_for, stream};
use crate::sampling::{sample_coupled, sample_graph, EdgeCoupling};
use crate::Scalar;

/// `δ` below this counts as the zero regime.
const ZERO_DELTA: f64 = 1e-12;

fn sorted_desc(h: &Array1<f64>) -> Array1<f64> {
    let mut v = h.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    Array1::from(v)
}

fn max_abs_diff(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn embed_f64<T: Scalar>(g: &crate::SampledGraph, cfg: &GcnConfig<T>) -> Result<Array1<f64>, GcnError> {
    embed(g, cfg).map(|h| h.mapv(|x| x.as_f64()))
}

/// Embeddings of a coupled pair, each sorted decreasing, plus the raw pair.
struct CoupledEmbeddings {
    raw: [Array1<f64>; 2],
    sorted: [Array1<f64>; 2],
}

fn coupled_embeddings<T: Scalar>(
    w0: &StepGraphon<T>,
    w1: &StepGraphon<T>,
    n: usize,
    cfg: &GcnConfig<T>,
    seed: u64,
    coupling: EdgeCoupling,
) -> Result<CoupledEmbeddings, TestingError> {
    let pair = sample_coupled(w0, w1, n, seed, coupling)?;
    let h0 = embed_f64(&pair.g0, cfg)?;
    let h1 = embed_f64(&pair.g1, cfg)?;
    Ok(CoupledEmbeddings { sorted: [sorted_desc(&h0), sorted_desc(&h1)], raw: [h0, h1] })
}

fn check_activation(a: Activation) -> Result<(), TestingError> {
    if classify_activation(a).class == NiceClass::NotNice && a != Activation::Relu {
        return Err(GcnError::UnsupportedActivation(a).into());
    }
    Ok(())
}

/// One run of the coin, sample, embed, perturb, decide protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub seed: u64,
    pub true_label: u8,
    pub decision: u8,
    /// `‖sort Ĥ0 - sort Ĥ1‖_∞` on a coupled pair drawn for this trial.
    pub embedding_distance: f64,
    /// L1 distances from the sorted perturbed embedding to each profile.
    pub profile_distances: [f64; 2],
    /// `(1 - tv)/2` for the coupled pair at the run's `eps_res`.
    pub lecam_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub n: usize,
    pub depth: usize,
    pub activation: Activation,
    pub eps_res: f64,
    pub seed: u64,
    pub trials: usize,
    pub delta: f64,
    pub errors: usize,
    pub error_rate: f64,
    /// Two-sided 95% Clopper–Pearson interval for the error rate.
    pub ci95: (f64, f64),
    /// Mean of the per-trial conditional Le Cam floors.
    pub lecam_floor: f64,
    /// `None` when the closed-form hypothesis fails.
    pub thm2_bound: Option<f64>,
    /// `P(X <= errors)` for `X ~ Bin(trials, lecam_floor)`.
    pub floor_p_value: f64,
    pub significantly_below_floor: bool,
    pub outcomes: Vec<TrialOutcome>,
}

/// Estimates the error of the nearest-profile test.
///
/// Trial `i` uses `derive_seed(seed, i)`: a fair coin picks the graphon, a
/// graph is drawn from it, embedded, perturbed and classified. Each trial
/// also draws a coupled pair on a separate seed and records the conditional
/// Le Cam floor between its sorted embeddings; the report averages these.
pub fn monte_carlo_error<T: Scalar>(
    w0: &StepGraphon<T>,
    w1: &StepGraphon<T>,
    n: usize,
    cfg: &GcnConfig<T>,
    eps_res: f64,
    trials: usize,
    seed: u64,
) -> Result<ExperimentReport, TestingError> {
    if trials == 0 {
        return Err(TestingError::NoTrials);
    }
    if !(eps_res.is_finite() && eps_res > 0.0) {
        return Err(TestingError::InvalidEpsilon(eps_res));
    }
    check_activation(cfg.activation())?;
    let test = ProfileTest::new(w0, w1, n);
    let delta = delta_distance(w0, w1).as_f64();
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, i);
            let label = u8::from(rng_for(s, stream::COIN).gen::<bool>());
            let g = sample_graph(if label == 0 { w0 } else { w1 }, n, s)?;
            let h = perturb(embed_f64(&g, cfg)?.view(), eps_res, s)?;
            let d = test.decide(h.view())?;
            let pair = coupled_embeddings(w0, w1, n, cfg, derive_seed(s, stream::COUPLED), EdgeCoupling::Independent)?;
            let tv = tv_perturbed(&pair.sorted[0], &pair.sorted[1], eps_res)?.tv;
            Ok(TrialOutcome {
                seed: s,
                true_label: label,
                decision: d.decision,
                embedding_distance: max_abs_diff(&pair.sorted[0], &pair.sorted[1]),
                profile_distances: d.distances,
                lecam_floor: lecam_error_lower(tv)?,
            })
        })
        .collect::<Result<Vec<_>, TestingError>>()?;

    let errors = outcomes.iter().filter(|o| o.decision != o.true_label).count();
    let lecam_floor = outcomes.iter().map(|o| o.lecam_floor).sum::<f64>() / trials as f64;
    let floor_p_value = binomial_lower_tail(errors as u64, trials as u64, lecam_floor);
    let thm2 = thm2_bound(if delta < ZERO_DELTA { 0.0 } else { delta }, eps_res, n, 1.0).ok();
    Ok(ExperimentReport {
        n,
        depth: cfg.depth(),
        activation: cfg.activation(),
        eps_res,
        seed,
        trials,
        delta,
        errors,
        error_rate: errors as f64 / trials as f64,
        ci95: clopper_pearson(errors as u64, trials as u64, 0.95),
        lecam_floor,
        thm2_bound: thm2,
        floor_p_value,
        significantly_below_floor: floor_p_value < 0.05,
        outcomes,
    })
}

/// Constants of the reference envelopes, which carry unknown `O(·)` factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceConstants {
    /// `c` in `δ/n · (1 + c/√n)`.
    pub separated: f64,
    /// `c'` in `c' n^{-3/2 + 0.1}`.
    pub exceptional: f64,
    /// `c''` in the per-coordinate threshold `c''/n²`.
    pub coordinate: f64,
}

impl Default for DistanceConstants {
    fn default() -> Self {
        Self { separated: 1.0, exceptional: 1.0, coordinate: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceTrial {
    pub seed: u64,
    /// `‖sort Ĥ0 - sort Ĥ1‖_∞`.
    pub sorted: f64,
    /// `‖Ĥ0 - Ĥ1‖_∞` by vertex index.
    pub raw: f64,
    /// Share of sorted coordinates within `c''/n²`.
    pub fraction_within: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub n: usize,
    pub depth: usize,
    pub delta: f64,
    pub regime: BoundRegime,
    pub trials: usize,
    pub sorted: Summary,
    pub raw: Summary,
    /// `δ/n (1 + c/√n)` or `c' n^{-1.4}` by regime.
    pub envelope: f64,
    pub mean_fraction_within: f64,
    pub per_trial: Vec<DistanceTrial>,
}

/// Distances between the embeddings of coupled samples.
///
/// Vertex `v` carries the same latent position in both graphs. The sorted
/// distance compares the embeddings after sorting each decreasingly, which
/// pairs vertices by rank rather than by index.
#[allow(clippy::too_many_arguments)]
pub fn embedding_distance_experiment<T: Scalar>(
    w0: &StepGraphon<T>,
    w1: &StepGraphon<T>,
    n: usize,
    cfg: &GcnConfig<T>,
    trials: usize,
    seed: u64,
    coupling: EdgeCoupling,
    constants: DistanceConstants,
) -> Result<DistanceReport, TestingError> {
    if trials == 0 {
        return Err(TestingError::NoTrials);
    }
    check_activation(cfg.activation())?;
    let delta = delta_distance(w0, w1).as_f64();
    let regime = if delta < ZERO_DELTA { BoundRegime::DeltaZero } else { BoundRegime::DeltaPositive };
    let nf = n as f64;
    let threshold = constants.coordinate / (nf * nf);
    let per_trial = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, i);
            let e = coupled_embeddings(w0, w1, n, cfg, s, coupling)?;
            let diffs: Vec<f64> = e.sorted[0].iter().zip(&e.sorted[1]).map(|(a, b)| (a - b).abs()).collect();
            Ok(DistanceTrial {
                seed: s,
                sorted: diffs.iter().copied().fold(0.0, f64::max),
                raw: max_abs_diff(&e.raw[0], &e.raw[1]),
                fraction_within: diffs.iter().filter(|&&d| d <= threshold).count() as f64 / nf,
            })
        })
        .collect::<Result<Vec<_>, TestingError>>()?;
    let sorted: Vec<f64> = per_trial.iter().map(|t| t.sorted).collect();
    let raw: Vec<f64> = per_trial.iter().map(|t| t.raw).collect();
    let envelope = match regime {
        BoundRegime::DeltaPositive => delta / nf * (1.0 + constants.separated / nf.sqrt()),
        BoundRegime::DeltaZero => constants.exceptional * nf.powf(-1.4),
    };
    Ok(DistanceReport {
        n,
        depth: cfg.depth(),
        delta,
        regime,
        trials,
        sorted: Summary::of(&sorted),
        raw: Summary::of(&raw),
        envelope,
        mean_fraction_within: per_trial.iter().map(|t| t.fraction_within).sum::<f64>() / trials as f64,
        per_trial,
    })
}
