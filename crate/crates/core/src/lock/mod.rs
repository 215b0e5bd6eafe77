//! Phase-locking servo for the squeezer's pump/probe relative phase.
//!
//! Two architectures are modelled: a tap on the squeezed output feeding the
//! lock detector, and a separate detection OPA seeded with probe and pump
//! split off before the squeezer. The simulator works on the demodulated
//! error signal; [`carrier`] reproduces the demodulation explicitly.

pub mod carrier;
pub mod config;
pub mod pid;
pub mod sim;
pub mod sweep;

pub use config::{AcousticLine, Disturbance, LockConfig, LockMethod};
pub use pid::{pid_step, PidGains, PidState};
pub use sim::{error_signal, simulate_lock, LockResult};
pub use sweep::{tap_tradeoff_sweep, TapPoint, TapSweep, TapSweepSpec};
