//! Desk-scale simulator for waveguide-OPA squeezed light.
//!
//! * [`noise_model`]: squeezing/anti-squeezing under loss and phase jitter.
//! * [`loss_budget`]: itemised loss decomposition.
//! * [`lock`]: phase-lock servo in the tapped and detection-OPA architectures.
//! * [`homodyne`]: balanced-homodyne time series and spectrum-analyzer emulation.
//! * [`fit`]: (α, L, θ̃) recovery from pump sweeps.
//!
//! The closed-form modules are generic over [`Real`]; the aliases below fix
//! the scalar for the common cases.

pub mod error;
pub mod fit;
pub mod homodyne;
pub mod lock;
pub mod loss_budget;
pub mod noise_model;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type OpaParams = noise_model::OpaParams<f64>;
pub type QuadratureNoise = noise_model::QuadratureNoise<f64>;
pub type PhaseFluctuation = noise_model::PhaseFluctuation<f64>;
pub type WaveguideSpec = loss_budget::WaveguideSpec<f64>;
pub type LossBudget = loss_budget::LossBudget<f64>;
pub type BudgetInputs = loss_budget::BudgetInputs<f64>;
pub type PidGains = lock::PidGains<f64>;

pub type OpaParamsF32 = noise_model::OpaParams<f32>;
pub type QuadratureNoiseF32 = noise_model::QuadratureNoise<f32>;
pub type PhaseFluctuationF32 = noise_model::PhaseFluctuation<f32>;
pub type WaveguideSpecF32 = loss_budget::WaveguideSpec<f32>;
pub type LossBudgetF32 = loss_budget::LossBudget<f32>;
pub type PidGainsF32 = lock::PidGains<f32>;
