//! Recession–recovery dynamics as a sum of two exponentials.
//!
//! An economy hit by a transformation shock at time `t0` relaxes along
//!
//! ```text
//! W(t) = W(t0) [ f e^{lambda_plus (t - t0)} + (1 - f) e^{lambda_minus (t - t0)} ]
//! ```
//!
//! a J-shaped curve when the early decline outweighs the growing mode. This
//! crate fits that response function to GDP-like series ([`fit`]), generates
//! seeded synthetic series with injected shocks ([`synth`]), locates shocks
//! through prediction-horizon saturation and re-fits the pieces ([`shock`]),
//! solves the two-sector transfer model that generates such curves
//! ([`sector`]), and builds/evaluates transfer-rate policies on top of it
//! ([`policy`]).
//!
//! Everything numeric is generic over the scalar type via [`scalar::Scalar`]
//! (`f32` works, `f64` is the intended default); the crate root re-exports
//! `f64`-concrete aliases so typical callers never see a type parameter.
//! All stochastic paths take explicit seeds and every algorithm is
//! deterministic for a given input — identical runs produce identical bytes.

pub mod error;
pub mod fit;
pub mod policy;
pub mod response;
pub mod scalar;
pub mod sector;
pub mod series;
pub mod shock;
pub mod synth;

mod rng;

pub use error::{Error, Result};
pub use series::PeriodUnit;

/// `f64` response-curve parameters ([`response::ResponseParams`]).
pub type ResponseParams = response::ResponseParams<f64>;
/// `f64` series segment ([`series::SeriesSegment`]).
pub type SeriesSegment = series::SeriesSegment<f64>;
/// `f64` fit options ([`fit::FitOptions`]).
pub type FitOptions = fit::FitOptions<f64>;
/// `f64` fit result ([`fit::FitResult`]).
pub type FitResult = fit::FitResult<f64>;
/// `f64` residual statistics ([`fit::ResidualStats`]).
pub type ResidualStats = fit::ResidualStats<f64>;
/// `f64` noise specification ([`synth::NoiseSpec`]).
pub type NoiseSpec = synth::NoiseSpec<f64>;
/// `f64` horizon curve ([`shock::HorizonCurve`]).
pub type HorizonCurve = shock::HorizonCurve<f64>;
/// `f64` shock report ([`shock::ShockReport`]).
pub type ShockReport = shock::ShockReport<f64>;
/// `f64` per-episode fit ([`shock::EpisodeFit`]).
pub type EpisodeFit = shock::EpisodeFit<f64>;
/// `f64` sector rates ([`sector::SectorParams`]).
pub type SectorParams = sector::SectorParams<f64>;
/// `f64` sector state ([`sector::SectorState`]).
pub type SectorState = sector::SectorState<f64>;
/// `f64` eigensystem ([`sector::EigenSystem`]).
pub type EigenSystem = sector::EigenSystem<f64>;
/// `f64` policy schedule ([`policy::PolicySchedule`]).
pub type PolicySchedule = policy::PolicySchedule<f64>;
/// `f64` policy outcome ([`policy::PolicyOutcome`]).
pub type PolicyOutcome = policy::PolicyOutcome<f64>;
/// `f64` envelope result ([`policy::Envelope`]).
pub type Envelope = policy::Envelope<f64>;
