//! Step graphons, random graph sampling, GCN embeddings, random-walk mixing
//! and the hypothesis tests built on top of them.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases at
//! the crate root fix the scalar: unsuffixed names use `f64`, names ending in
//! `32` use `f32`.

pub mod gcn;
pub mod graphon;
pub mod rng;
pub mod sampling;
mod scalar;
pub mod spectral;
pub mod testing;

pub use scalar::Scalar;
pub use sampling::{CoupledPair, RepairReport, SampledGraph};

pub type StepGraphon = graphon::StepGraphon<f64>;
pub type StepGraphon32 = graphon::StepGraphon<f32>;
pub type SbmParams = graphon::SbmParams<f64>;
pub type SbmParams32 = graphon::SbmParams<f32>;
pub type FamilySpec = graphon::FamilySpec<f64>;
pub type FamilySpec32 = graphon::FamilySpec<f32>;
pub type DegreeProfile = graphon::DegreeProfile<f64>;
pub type DegreeProfile32 = graphon::DegreeProfile<f32>;
