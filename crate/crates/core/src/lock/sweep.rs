//! Tap-ratio trade-off: locking precision against optical loss.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{LockConfig, LockMethod, CONVENTIONAL_PROBE_POWER};
use super::sim::simulate_lock;
use crate::error::Result;
use crate::loss_budget::compose_losses;
use crate::noise_model::{dephased_noise, ideal_noise, OpaParams, PhaseFluctuation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TapSweepSpec {
    pub tap_ratios: Vec<f64>,
    /// Probe power in front of the tap for the conventional points, W.
    pub conventional_probe_power: f64,
    pub duration: f64,
}

impl Default for TapSweepSpec {
    fn default() -> Self {
        Self {
            tap_ratios: vec![0.001, 0.002, 0.005, 0.01, 0.013, 0.02, 0.05, 0.1, 0.2],
            conventional_probe_power: CONVENTIONAL_PROBE_POWER,
            duration: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TapPoint {
    pub method: LockMethod,
    pub tap_ratio: f64,
    pub total_loss: f64,
    pub theta_std: Option<f64>,
    /// Net measured squeezing magnitude, dB.
    pub squeezing_db: Option<f64>,
    pub error: Option<String>,
}

impl TapPoint {
    pub fn locked(&self) -> bool {
        self.squeezing_db.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TapSweep {
    pub conventional: Vec<TapPoint>,
    pub phase_detection: TapPoint,
}

impl TapSweep {
    /// Best locked conventional point by net squeezing.
    pub fn best_conventional(&self) -> Option<&TapPoint> {
        self.conventional
            .iter()
            .filter(|p| p.locked())
            .max_by(|a, b| a.squeezing_db.partial_cmp(&b.squeezing_db).unwrap())
    }
}

fn evaluate(cfg: &LockConfig, duration: f64, opa: &OpaParams<f64>) -> Result<TapPoint> {
    let tap = cfg.extra_squeezing_loss();
    let total_loss = compose_losses(&[opa.loss, tap])?;
    let mut point = TapPoint {
        method: cfg.method,
        tap_ratio: tap,
        total_loss,
        theta_std: None,
        squeezing_db: None,
        error: None,
    };
    match simulate_lock(cfg, duration) {
        Ok(r) => {
            let noise = ideal_noise(&opa.with_loss(total_loss))?;
            let measured = dephased_noise(noise, PhaseFluctuation::new(r.residual_theta_std)?);
            point.theta_std = Some(r.residual_theta_std);
            point.squeezing_db = Some(-measured.sq_db());
        }
        Err(e) => point.error = Some(e.to_string()),
    }
    Ok(point)
}

/// Run every conventional tap ratio and the detection-OPA reference under the
/// same disturbance realisation (same seed). Unlocked points are kept with
/// their error message.
pub fn tap_tradeoff_sweep(base: &LockConfig, spec: &TapSweepSpec, opa: &OpaParams<f64>) -> Result<TapSweep> {
    opa.validate()?;
    let configs: Vec<LockConfig> = spec
        .tap_ratios
        .iter()
        .map(|&tap| LockConfig {
            method: LockMethod::Conventional { tap_ratio: tap },
            probe_power: spec.conventional_probe_power,
            ..base.clone()
        })
        .collect();
    for c in &configs {
        c.validate()?;
    }
    let conventional = configs
        .par_iter()
        .map(|c| evaluate(c, spec.duration, opa))
        .collect::<Result<Vec<_>>>()?;
    let pd_cfg = LockConfig {
        method: LockMethod::PhaseDetectionOpa,
        ..base.clone()
    };
    let phase_detection = evaluate(&pd_cfg, spec.duration, opa)?;
    Ok(TapSweep {
        conventional,
        phase_detection,
    })
}
