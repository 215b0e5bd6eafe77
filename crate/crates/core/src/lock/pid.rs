//! Discrete PID law with a clamped integrator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    bound(serialize = "T: Serialize", deserialize = "T: Real + Deserialize<'de>")
)]
pub struct PidGains<T = f64> {
    pub kp: T,
    pub ki: T,
    pub kd: T,
    /// Bound on `|∫e dt|`. Infinite disables anti-windup.
    #[serde(default = "no_limit")]
    pub integral_limit: T,
}

fn no_limit<T: Real>() -> T {
    T::infinity()
}

impl<T: Real> PidGains<T> {
    pub fn new(kp: T, ki: T, kd: T) -> Self {
        Self {
            kp,
            ki,
            kd,
            integral_limit: T::infinity(),
        }
    }

    pub fn with_integral_limit(self, integral_limit: T) -> Self {
        Self { integral_limit, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState<T = f64> {
    pub integral: T,
    pub prev_error: Option<T>,
}

impl<T: Real> PidState<T> {
    /// Advance one sample and return the control output. `dt` is trusted.
    #[inline]
    pub fn update(&mut self, error: T, gains: &PidGains<T>, dt: T) -> T {
        let lim = gains.integral_limit;
        self.integral = (self.integral + error * dt).max(-lim).min(lim);
        let derivative = match self.prev_error {
            Some(prev) => (error - prev) / dt,
            None => T::zero(),
        };
        self.prev_error = Some(error);
        gains.kp * error + gains.ki * self.integral + gains.kd * derivative
    }
}

/// Functional form of [`PidState::update`] with argument checking.
pub fn pid_step<T: Real>(mut state: PidState<T>, error: T, gains: &PidGains<T>, dt: T) -> Result<(PidState<T>, T)> {
    if !(dt > T::zero()) {
        return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
    }
    let u = state.update(error, gains, dt);
    Ok((state, u))
}
