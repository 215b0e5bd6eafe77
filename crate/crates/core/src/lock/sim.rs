use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::config::{LockConfig, LockMethod};
use super::pid::PidState;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockResult {
    pub method: LockMethod,
    /// Achieved θ̃: std of the squeezer-side relative phase over the locked segment.
    pub residual_theta_std: f64,
    pub residual_theta_mean: f64,
    pub error_signal_snr: f64,
    pub extra_squeezing_loss: f64,
    pub samples: usize,
    pub settled_samples: usize,
    /// Spacing of the decimated traces, s.
    pub trace_dt: f64,
    pub phase_trace: Vec<f64>,
    pub error_trace: Vec<f64>,
}

/// Demodulated lock error at relative phase `theta`: `K·sin(2θ) + n`.
///
/// The error is π-periodic because parametric gain is. `n` is white Gaussian
/// with the configured detector noise.
pub fn error_signal<R: Rng + ?Sized>(theta: f64, cfg: &LockConfig, rng: &mut R) -> f64 {
    let n: f64 = rng.sample(StandardNormal);
    cfg.signal_amplitude() * (2.0 * theta).sin() + cfg.detector_noise * n
}

/// Sample-by-sample closed-loop simulation.
///
/// Each sample: the disturbance advances, the detector sees
/// `θ = disturbance − actuator`, the servo divides the error by its lock-point
/// slope `2K` and runs the PID law, and the output drives the actuator on the
/// next sample. With `K = 0` there is no slope to calibrate against and the
/// loop stays open.
pub fn simulate_lock(cfg: &LockConfig, duration: f64) -> Result<LockResult> {
    cfg.validate()?;
    if !(duration > 0.0) {
        return Err(Error::invalid("duration", "must be > 0"));
    }
    let n = (duration * cfg.sample_rate).round() as usize;
    if n > cfg.max_samples {
        return Err(Error::Config(format!(
            "{n} samples requested, limit is {}",
            cfg.max_samples
        )));
    }
    if n < 10 {
        return Err(Error::Config("duration too short for a lock simulation".into()));
    }

    let dt = 1.0 / cfg.sample_rate;
    let k_sig = cfg.signal_amplitude();
    let slope_gain = if k_sig > 0.0 { 1.0 / (2.0 * k_sig) } else { 0.0 };
    let dist = &cfg.disturbance;
    let walk_step = (dist.diffusion * dt).sqrt();
    let differential = matches!(cfg.method, LockMethod::PhaseDetectionOpa);
    let diff_step = if differential {
        (dist.differential_diffusion * dt).sqrt()
    } else {
        0.0
    };

    let mut rng_dist = rng::stream(cfg.seed, "lock/disturbance");
    let mut rng_det = rng::stream(cfg.seed, "lock/detector");
    let mut rng_diff = rng::stream(cfg.seed, "lock/differential");

    let settle = ((n as f64) * cfg.settle_fraction).floor() as usize;
    let stride = (n / cfg.trace_points.max(1)).max(1);
    let mut phase_trace = Vec::with_capacity(n / stride + 1);
    let mut error_trace = Vec::with_capacity(n / stride + 1);

    let mut pid = PidState::default();
    let mut walk = 0.0;
    let mut diff_walk = 0.0;
    let mut actuator = 0.0;
    // Welford over the settled segment.
    let (mut count, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);

    for k in 0..n {
        let t = k as f64 * dt;
        let z: f64 = rng_dist.sample(StandardNormal);
        walk += walk_step * z;
        if diff_step > 0.0 {
            let z: f64 = rng_diff.sample(StandardNormal);
            diff_walk += diff_step * z;
        }
        let lines: f64 = dist
            .lines
            .iter()
            .map(|l| l.amplitude * (std::f64::consts::TAU * l.freq * t + l.phase).sin())
            .sum();
        let theta_det = walk + lines - actuator;
        let theta_sq = theta_det + diff_walk;
        let e = error_signal(theta_det, cfg, &mut rng_det);
        let control = if slope_gain > 0.0 {
            pid.update(e * slope_gain, &cfg.pid, dt)
        } else {
            0.0
        };
        actuator = control;

        if k >= settle {
            count += 1;
            let d = theta_sq - mean;
            mean += d / count as f64;
            m2 += d * (theta_sq - mean);
        }
        if k % stride == 0 {
            phase_trace.push(theta_sq);
            error_trace.push(e);
        }
    }

    let std = (m2 / count as f64).sqrt();
    if !(std <= cfg.unlock_threshold) {
        return Err(Error::Unlock {
            residual: std,
            threshold: cfg.unlock_threshold,
        });
    }
    Ok(LockResult {
        method: cfg.method,
        residual_theta_std: std,
        residual_theta_mean: mean,
        error_signal_snr: cfg.error_snr_db(),
        extra_squeezing_loss: cfg.extra_squeezing_loss(),
        samples: n,
        settled_samples: count,
        trace_dt: stride as f64 * dt,
        phase_trace,
        error_trace,
    })
}
