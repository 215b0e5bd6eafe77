//! Balanced-homodyne time series and spectrum-analyzer emulation.
//!
//! Levels are in shot-noise units throughout. The source is white across the
//! analysis band; the only spectral structure comes from the photodiode
//! single-pole response, the circuit-noise floor and the probe tone.

mod chain;
mod correction;
mod sweep;
mod synth;
mod trace;
mod zero_span;

pub use chain::{DetectionChain, ProbeTone, REFERENCE_LO_POWER};
pub use correction::{normalize, subtract_circuit_noise};
pub use sweep::{measure_sweep, sweep_spectrum, Sweep};
pub use synth::{sample_count, stream_samples, synth_timeseries, LoPhase, Source, Synthesizer, MAX_IN_MEMORY_SAMPLES};
pub use trace::{envelope_extrema, AnalyzerMode, AnalyzerSettings, Axis, Reference, Trace};
pub use zero_span::{measure_zero_span, zero_span, ZeroSpan, VBW_SETTLE_TIME_CONSTANTS};
