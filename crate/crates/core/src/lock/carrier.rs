//! Carrier-level error-signal path.
//!
//! The closed-loop simulator uses the demodulated error directly. This module
//! synthesises the photodetector beat at `h × shift_freq` and recovers the
//! error with an explicit mixer and boxcar low-pass, so the shortcut can be
//! checked against it.

use rand::Rng;
use rand_distr::StandardNormal;

use super::config::LockConfig;
use crate::error::{Error, Result};

/// Detector photocurrent (demod-referred) at time `t` for relative phase `theta`.
pub fn beat_sample(theta: f64, t: f64, cfg: &LockConfig) -> f64 {
    let w = std::f64::consts::TAU * cfg.demod_harmonic as f64 * cfg.shift_freq;
    cfg.signal_amplitude() * (w * t - 2.0 * theta).cos()
}

/// Mix the beat against `2·sin(ωt)` and average over `periods` beat periods.
///
/// Detector noise is added per sample when `rng` is given.
pub fn demodulate_carrier<R: Rng + ?Sized>(
    theta: f64,
    cfg: &LockConfig,
    periods: usize,
    mut rng: Option<&mut R>,
) -> Result<f64> {
    cfg.validate()?;
    let beat = cfg.demod_harmonic as f64 * cfg.shift_freq;
    if !(cfg.sample_rate > 2.0 * beat) {
        return Err(Error::Config(format!(
            "sample rate {} Hz cannot represent a {beat} Hz beat",
            cfg.sample_rate
        )));
    }
    let n = ((periods.max(1) as f64) * cfg.sample_rate / beat).round() as usize;
    let dt = 1.0 / cfg.sample_rate;
    let w = std::f64::consts::TAU * beat;
    let mut acc = 0.0;
    for k in 0..n {
        let t = k as f64 * dt;
        let mut s = beat_sample(theta, t, cfg);
        if let Some(r) = rng.as_deref_mut() {
            let z: f64 = r.sample(StandardNormal);
            s += cfg.detector_noise * z;
        }
        acc += s * 2.0 * (w * t).sin();
    }
    Ok(acc / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lock::sim::error_signal;
    use crate::rng::{self, SimRng};

    #[test]
    fn matches_baseband_error() {
        for harmonic in [1, 2] {
            let cfg = LockConfig {
                detector_noise: 0.0,
                demod_harmonic: harmonic,
                ..LockConfig::default()
            };
            let k = cfg.signal_amplitude();
            let mut r = rng::stream(0, "t");
            for i in -8..=8 {
                let theta = i as f64 * 0.1;
                let carrier = demodulate_carrier::<SimRng>(theta, &cfg, 200, None).unwrap();
                let baseband = error_signal(theta, &cfg, &mut r);
                assert!(
                    (carrier - baseband).abs() < 1e-3 * k,
                    "h={harmonic} θ={theta}: {carrier} vs {baseband}"
                );
            }
        }
    }

    #[test]
    fn noisy_carrier_averages_down() {
        let cfg = LockConfig::default();
        let mut r = rng::stream(9, "carrier");
        let v = demodulate_carrier(0.3, &cfg, 2000, Some(&mut r)).unwrap();
        let expected = cfg.signal_amplitude() * 0.6f64.sin();
        assert!((v - expected).abs() < 0.02 * cfg.signal_amplitude());
    }

    #[test]
    fn rejects_undersampled_beat() {
        let cfg = LockConfig {
            sample_rate: 4.1e6,
            demod_harmonic: 2,
            shift_freq: 1.5e6,
            ..LockConfig::default()
        };
        assert!(cfg.validate().is_err() || demodulate_carrier::<SimRng>(0.1, &cfg, 10, None).is_err());
    }
}
