use serde::{Deserialize, Serialize};

use super::pid::PidGains;
use crate::error::{Error, Result};

/// Where the lock error signal comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LockMethod {
    /// A fraction of the squeezer output is tapped onto the lock detector.
    /// The tap is an optical loss for the squeezed light.
    Conventional { tap_ratio: f64 },
    /// Probe and pump are split off before the squeezer and drive a separate
    /// detection OPA. No squeezed light is tapped.
    PhaseDetectionOpa,
}

impl LockMethod {
    pub fn label(&self) -> &'static str {
        match self {
            LockMethod::Conventional { .. } => "conventional",
            LockMethod::PhaseDetectionOpa => "phase_detection_opa",
        }
    }
}

/// Narrow-band phase disturbance (acoustic pickup).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcousticLine {
    pub freq: f64,
    /// Peak phase excursion, rad.
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Relative pump/probe phase disturbance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Disturbance {
    /// Random-walk diffusion coefficient, rad²/s.
    pub diffusion: f64,
    pub lines: Vec<AcousticLine>,
    /// Random-walk diffusion between the detection-OPA path and the squeezer,
    /// rad²/s. Only the phase-detection architecture sees it.
    pub differential_diffusion: f64,
}

impl Default for Disturbance {
    fn default() -> Self {
        // Calibration constants. Together with the default servo they leave
        // ≈9 mrad of residual jitter with the detection OPA and ≈14 mrad with
        // a conventional tap at its best ratio.
        Self {
            diffusion: 3.7,
            lines: vec![AcousticLine {
                freq: 120.0,
                amplitude: 0.8,
                phase: 0.0,
            }],
            differential_diffusion: 0.0,
        }
    }
}

impl Disturbance {
    pub fn none() -> Self {
        Self {
            diffusion: 0.0,
            lines: Vec::new(),
            differential_diffusion: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LockConfig {
    pub method: LockMethod,
    /// Probe power delivered to the lock path before any tap, W.
    pub probe_power: f64,
    /// Demodulated error amplitude per √W of detected probe power.
    pub responsivity: f64,
    pub shift_freq: f64,
    pub sample_rate: f64,
    /// Gains act on the slope-normalised error, i.e. on an estimate of the
    /// phase in radians.
    pub pid: PidGains<f64>,
    pub disturbance: Disturbance,
    /// White noise std of the demodulated error signal per sample.
    pub detector_noise: f64,
    /// Leading fraction of samples discarded as acquisition transient.
    pub settle_fraction: f64,
    /// Residual std above which the loop is declared unlocked, rad.
    pub unlock_threshold: f64,
    pub max_samples: usize,
    /// Number of points kept in the returned phase/error traces.
    pub trace_points: usize,
    /// Harmonic of the shift frequency used by the carrier-level demodulator.
    pub demod_harmonic: u32,
    pub seed: u64,
}

pub const PHASE_DETECTION_PROBE_POWER: f64 = 1e-3;
pub const CONVENTIONAL_PROBE_POWER: f64 = 10e-6;

impl Default for LockConfig {
    fn default() -> Self {
        Self {
            method: LockMethod::PhaseDetectionOpa,
            probe_power: PHASE_DETECTION_PROBE_POWER,
            responsivity: 1.0,
            shift_freq: 1e6,
            sample_rate: 5e6,
            pid: PidGains::new(0.0, 6.0e4, 0.0).with_integral_limit(1e3),
            disturbance: Disturbance::default(),
            detector_noise: 1e-4,
            settle_fraction: 0.1,
            unlock_threshold: std::f64::consts::FRAC_PI_8,
            max_samples: 50_000_000,
            trace_points: 2000,
            demod_harmonic: 1,
            seed: 1,
        }
    }
}

impl LockConfig {
    /// Default loop with a conventional tap and a few-µW probe.
    pub fn conventional(tap_ratio: f64) -> Self {
        Self {
            method: LockMethod::Conventional { tap_ratio },
            probe_power: CONVENTIONAL_PROBE_POWER,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let LockMethod::Conventional { tap_ratio } = self.method {
            if !(0.0..=0.5).contains(&tap_ratio) {
                return Err(Error::invalid(
                    "tap_ratio",
                    format!("must lie in [0, 0.5], got {tap_ratio}"),
                ));
            }
        }
        if !(self.probe_power > 0.0) {
            return Err(Error::invalid("probe_power", "must be > 0"));
        }
        if !(self.shift_freq > 0.0) {
            return Err(Error::invalid("shift_freq", "must be > 0"));
        }
        if !(self.sample_rate > 4.0 * self.shift_freq) {
            return Err(Error::invalid(
                "sample_rate",
                format!(
                    "must exceed 4 x shift_freq ({} Hz), got {}",
                    4.0 * self.shift_freq,
                    self.sample_rate
                ),
            ));
        }
        if !(self.responsivity >= 0.0) || !(self.detector_noise >= 0.0) {
            return Err(Error::invalid(
                "detector",
                "responsivity and detector_noise must be >= 0",
            ));
        }
        let d = &self.disturbance;
        if !(d.diffusion >= 0.0) || !(d.differential_diffusion >= 0.0) {
            return Err(Error::invalid("disturbance", "diffusion coefficients must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.settle_fraction) {
            return Err(Error::invalid("settle_fraction", "must lie in [0, 1)"));
        }
        if !(self.unlock_threshold > 0.0) {
            return Err(Error::invalid("unlock_threshold", "must be > 0"));
        }
        if !matches!(self.demod_harmonic, 1 | 2) {
            return Err(Error::invalid("demod_harmonic", "must be 1 or 2"));
        }
        Ok(())
    }

    /// Probe power reaching the lock detector.
    pub fn detected_power(&self) -> f64 {
        match self.method {
            LockMethod::Conventional { tap_ratio } => tap_ratio * self.probe_power,
            LockMethod::PhaseDetectionOpa => self.probe_power,
        }
    }

    /// Error-signal amplitude `K`; the error is `K·sin(2θ)` plus noise.
    pub fn signal_amplitude(&self) -> f64 {
        self.responsivity * self.detected_power().sqrt()
    }

    /// Per-sample power SNR of the error signal, dB.
    pub fn error_snr_db(&self) -> f64 {
        let k = self.signal_amplitude();
        10.0 * (k * k / (self.detector_noise * self.detector_noise)).log10()
    }

    /// Optical loss the lock imposes on the squeezed light.
    pub fn extra_squeezing_loss(&self) -> f64 {
        match self.method {
            LockMethod::Conventional { tap_ratio } => tap_ratio,
            LockMethod::PhaseDetectionOpa => 0.0,
        }
    }
}
