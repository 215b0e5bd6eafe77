use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// LO power at which `circuit_clearance_db` is specified, W.
pub const REFERENCE_LO_POWER: f64 = 15.4e-3;

/// Deterministic tone at the probe shift frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeTone {
    pub freq: f64,
    /// Tone power over the shot-noise power in a 1 MHz band at `freq`, dB.
    pub relative_power_db: f64,
}

impl Default for ProbeTone {
    fn default() -> Self {
        Self {
            freq: 1e6,
            relative_power_db: 20.0,
        }
    }
}

/// Balanced detector plus electronics.
///
/// All powers are in shot-noise units: an unshaped vacuum input has unit
/// variance per sample, spread flat over `[0, sample_rate/2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionChain {
    pub lo_power: f64,
    /// Shot-noise to circuit-noise gap at `circuit_reference_freq` with the
    /// reference LO power, dB.
    pub circuit_clearance_db: f64,
    pub circuit_reference_freq: f64,
    /// Extra f² rise of the circuit floor between the reference frequency and
    /// `circuit_rise_freq`, dB. Zero gives a white floor.
    pub circuit_rise_db: f64,
    pub circuit_rise_freq: f64,
    /// Single-pole photodiode bandwidth, Hz.
    pub pd_bandwidth: f64,
    pub probe_tone: ProbeTone,
    pub sample_rate: f64,
    /// FFT block length used by the synthesizer; a power of two.
    pub block_len: usize,
    pub seed: u64,
}

impl Default for DetectionChain {
    fn default() -> Self {
        Self {
            lo_power: REFERENCE_LO_POWER,
            circuit_clearance_db: 28.0,
            circuit_reference_freq: 3e6,
            circuit_rise_db: 0.5,
            circuit_rise_freq: 100e6,
            pd_bandwidth: 35e6,
            probe_tone: ProbeTone::default(),
            sample_rate: 250e6,
            block_len: 1 << 16,
            seed: 1,
        }
    }
}

impl DetectionChain {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo_power > 0.0) {
            return Err(Error::invalid("lo_power", "must be > 0"));
        }
        if !(self.circuit_clearance_db > 0.0) || !self.circuit_clearance_db.is_finite() {
            return Err(Error::invalid("circuit_clearance_db", "must be finite and > 0"));
        }
        if !(self.pd_bandwidth > 0.0) {
            return Err(Error::invalid("pd_bandwidth", "must be > 0"));
        }
        if !(self.sample_rate > 0.0) || !self.sample_rate.is_finite() {
            return Err(Error::invalid("sample_rate", "must be finite and > 0"));
        }
        if !(self.circuit_reference_freq >= 0.0) || !(self.circuit_rise_db >= 0.0) {
            return Err(Error::invalid("circuit", "reference frequency and rise must be >= 0"));
        }
        if self.circuit_rise_db > 0.0 && !(self.circuit_rise_freq > self.circuit_reference_freq) {
            return Err(Error::invalid(
                "circuit_rise_freq",
                "must exceed circuit_reference_freq when a rise is configured",
            ));
        }
        if self.block_len < 16 || !self.block_len.is_power_of_two() {
            return Err(Error::invalid("block_len", "must be a power of two >= 16"));
        }
        let t = &self.probe_tone;
        if !(t.freq > 0.0) || !t.relative_power_db.is_finite() {
            return Err(Error::invalid("probe_tone", "frequency must be > 0 and power finite"));
        }
        if t.freq >= self.sample_rate / 2.0 {
            return Err(Error::Config(format!(
                "probe tone at {} Hz is above Nyquist for sample rate {}",
                t.freq, self.sample_rate
            )));
        }
        Ok(())
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate / 2.0
    }

    /// Clearance after scaling the shot noise with the actual LO power.
    pub fn effective_clearance_db(&self) -> f64 {
        self.circuit_clearance_db + 10.0 * (self.lo_power / REFERENCE_LO_POWER).log10()
    }

    /// Photodiode power response `|H(f)|²`.
    pub fn pd_gain2(&self, f: f64) -> f64 {
        let x = f / self.pd_bandwidth;
        1.0 / (1.0 + x * x)
    }

    /// Complex photodiode response `H(f)`, Hermitian in `f`.
    pub fn pd_response(&self, f: f64) -> (f64, f64) {
        let x = f / self.pd_bandwidth;
        let d = 1.0 + x * x;
        (1.0 / d, -x / d)
    }

    fn rise_coeff(&self) -> f64 {
        if self.circuit_rise_db == 0.0 {
            return 0.0;
        }
        let rho = 10f64.powf(self.circuit_rise_db / 10.0);
        let (f0, f1) = (self.circuit_reference_freq, self.circuit_rise_freq);
        (rho - 1.0) / (f1 * f1 - rho * f0 * f0)
    }

    /// Circuit-noise power response, in the same units as [`pd_gain2`](Self::pd_gain2).
    pub fn circuit_gain2(&self, f: f64) -> f64 {
        let k = self.rise_coeff();
        let f0 = self.circuit_reference_freq;
        let at_ref = 10f64.powf(-self.effective_clearance_db() / 10.0) * self.pd_gain2(f0);
        at_ref * (1.0 + k * f * f) / (1.0 + k * f0 * f0)
    }

    /// Shot-noise over circuit-noise at `f`, dB.
    pub fn clearance_at(&self, f: f64) -> f64 {
        10.0 * (self.pd_gain2(f) / self.circuit_gain2(f)).log10()
    }

    /// Peak amplitude of the probe tone in sample units.
    pub fn tone_amplitude(&self) -> f64 {
        let t = &self.probe_tone;
        let shot_in_1mhz = self.pd_gain2(t.freq) * 2.0 / self.sample_rate * 1e6;
        (2.0 * 10f64.powf(t.relative_power_db / 10.0) * shot_in_1mhz).sqrt()
    }

    /// Normalised level `(R·|H|² + G²) / (|H|² + G²)` a noise variance `r`
    /// shows at `f` once referred to the shot-noise trace, linear.
    pub fn expected_relative_level(&self, r: f64, f: f64) -> f64 {
        let h = self.pd_gain2(f);
        let g = self.circuit_gain2(f);
        (r * h + g) / (h + g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clearance_profile() {
        let c = DetectionChain::default();
        c.validate().unwrap();
        assert!((c.clearance_at(3e6) - 28.0).abs() < 1e-12);
        let drop = c.clearance_at(3e6) - c.clearance_at(100e6);
        // PD roll-off plus the configured rise.
        let rolloff = 10.0 * (c.pd_gain2(3e6) / c.pd_gain2(100e6)).log10();
        assert!((drop - rolloff - 0.5).abs() < 1e-9);
        assert!(drop > 9.5 && drop < 10.5, "{drop}");
        assert!((c.circuit_gain2(100e6) / c.circuit_gain2(3e6) - 10f64.powf(0.05)).abs() < 1e-12);
    }

    #[test]
    fn white_floor_without_rise() {
        let c = DetectionChain {
            circuit_rise_db: 0.0,
            ..DetectionChain::default()
        };
        assert_eq!(c.circuit_gain2(1e6), c.circuit_gain2(120e6));
    }

    #[test]
    fn lo_power_shifts_clearance() {
        let c = DetectionChain {
            lo_power: 2.0 * REFERENCE_LO_POWER,
            ..DetectionChain::default()
        };
        assert!((c.clearance_at(3e6) - 28.0 - 10.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn response_is_consistent() {
        let c = DetectionChain::default();
        for f in [0.0, 1e6, 35e6, 1e8] {
            let (re, im) = c.pd_response(f);
            assert!((re * re + im * im - c.pd_gain2(f)).abs() < 1e-15);
        }
        assert!((c.pd_gain2(35e6) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn expected_levels() {
        let c = DetectionChain::default();
        assert!((c.expected_relative_level(1.0, 5e7) - 1.0).abs() < 1e-15);
        let db = 10.0 * c.expected_relative_level(0.09665129178599304, 100e6).log10();
        assert!(db < -8.0 && db > -10.0, "{db}");
    }

    #[test]
    fn rejects_bad_chains() {
        let bad = [
            DetectionChain {
                circuit_clearance_db: 0.0,
                ..DetectionChain::default()
            },
            DetectionChain {
                pd_bandwidth: -1.0,
                ..DetectionChain::default()
            },
            DetectionChain {
                block_len: 1000,
                ..DetectionChain::default()
            },
            DetectionChain {
                sample_rate: 1.5e6,
                ..DetectionChain::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err());
        }
    }
}
