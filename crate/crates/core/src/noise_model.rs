//! Closed-form quadrature noise of a single-pass OPA under loss and phase jitter.
//!
//! Noise levels are linear variances relative to shot noise. The squeezer
//! output after an effective loss `L` is
//!
//! ```text
//! R± = L + (1 − L)·exp(±2√(αP))
//! ```
//!
//! and a Gaussian relative-phase jitter of standard deviation θ̃ mixes the two
//! quadratures as
//!
//! ```text
//! R'± = R±·cos²θ̃ + R∓·sin²θ̃
//! ```
//!
//! The mixing uses `sin²` of the standard deviation itself. The exact
//! expectation over a zero-mean Gaussian phase is
//! `E[sin²φ] = (1 − exp(−2θ̃²))/2`; the two agree to `2θ̃⁴/3 + O(θ̃⁶)`, i.e.
//! below `1e-8` absolute for θ̃ ≤ 10 mrad. [`gaussian_mixing_weight`] exposes
//! the exact weight for comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Physical parameters of one squeezer operating point.
///
/// `alpha` is the SHG efficiency in 1/W (906 %/W is stored as 9.06).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpaParams<T = f64> {
    pub alpha: T,
    pub loss: T,
    pub pump_power: T,
}

impl<T: Real> OpaParams<T> {
    pub fn new(alpha: T, loss: T, pump_power: T) -> Result<Self> {
        let p = Self {
            alpha,
            loss,
            pump_power,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= T::zero()) || !self.alpha.is_finite() {
            return Err(Error::invalid(
                "alpha",
                format!("must be finite and >= 0, got {}", self.alpha),
            ));
        }
        if !(self.loss >= T::zero() && self.loss < T::one()) {
            return Err(Error::invalid("loss", format!("must lie in [0, 1), got {}", self.loss)));
        }
        if !(self.pump_power >= T::zero()) || !self.pump_power.is_finite() {
            return Err(Error::invalid(
                "pump_power",
                format!("must be finite and >= 0, got {}", self.pump_power),
            ));
        }
        Ok(())
    }

    /// Single-pass squeezing parameter `r = √(αP)`.
    pub fn squeeze_parameter(&self) -> T {
        (self.alpha * self.pump_power).sqrt()
    }

    pub fn with_loss(self, loss: T) -> Self {
        Self { loss, ..self }
    }

    pub fn with_pump_power(self, pump_power: T) -> Self {
        Self { pump_power, ..self }
    }
}

/// Anti-squeezed / squeezed variance pair, linear, shot noise = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureNoise<T = f64> {
    pub anti: T,
    pub sq: T,
}

impl<T: Real> QuadratureNoise<T> {
    /// Both variances must be strictly positive. Ordering is not enforced
    /// because a π/2 dephasing legitimately swaps the pair.
    pub fn new(anti: T, sq: T) -> Result<Self> {
        if !(anti > T::zero() && sq > T::zero()) || !anti.is_finite() || !sq.is_finite() {
            return Err(Error::invalid(
                "quadrature_noise",
                format!("variances must be finite and > 0, got anti={anti}, sq={sq}"),
            ));
        }
        Ok(Self { anti, sq })
    }

    /// Shot-noise (vacuum) state.
    pub fn vacuum() -> Self {
        Self {
            anti: T::one(),
            sq: T::one(),
        }
    }

    pub fn is_ordered(&self) -> bool {
        self.anti >= self.sq
    }

    pub fn anti_db(&self) -> T {
        db_unchecked(self.anti)
    }

    pub fn sq_db(&self) -> T {
        db_unchecked(self.sq)
    }

    /// Variance seen by a homodyne detector whose LO sits `theta` away from the
    /// squeezed quadrature.
    pub fn at_lo_phase(&self, theta: T) -> T {
        let (s, c) = theta.sin_cos();
        self.sq * c * c + self.anti * s * s
    }
}

/// Standard deviation of the relative LO phase, radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhaseFluctuation<T = f64>(T);

impl<T: Real> PhaseFluctuation<T> {
    pub fn new(theta_tilde: T) -> Result<Self> {
        if !(theta_tilde >= T::zero()) || !theta_tilde.is_finite() {
            return Err(Error::invalid(
                "theta_tilde",
                format!("must be finite and >= 0, got {theta_tilde}"),
            ));
        }
        Ok(Self(theta_tilde))
    }

    pub fn zero() -> Self {
        Self(T::zero())
    }

    pub fn radians(self) -> T {
        self.0
    }
}

/// Loss-degraded noise pair without phase jitter.
pub fn ideal_noise<T: Real>(params: &OpaParams<T>) -> Result<QuadratureNoise<T>> {
    params.validate()?;
    let two_r = T::lit(2.0) * params.squeeze_parameter();
    let l = params.loss;
    Ok(QuadratureNoise {
        anti: l + (T::one() - l) * two_r.exp(),
        sq: l + (T::one() - l) * (-two_r).exp(),
    })
}

/// Mix the quadratures by the phase jitter. Conserves `anti + sq` exactly.
pub fn dephased_noise<T: Real>(noise: QuadratureNoise<T>, phi: PhaseFluctuation<T>) -> QuadratureNoise<T> {
    let (s, c) = phi.radians().sin_cos();
    let (s2, c2) = (s * s, c * c);
    QuadratureNoise {
        anti: noise.anti * c2 + noise.sq * s2,
        sq: noise.sq * c2 + noise.anti * s2,
    }
}

/// `E[sin²φ]` for `φ ~ N(0, σ²)`.
pub fn gaussian_mixing_weight<T: Real>(sigma: T) -> T {
    -(T::lit(-2.0) * sigma * sigma).exp_m1() / T::lit(2.0)
}

/// Power ratio to decibels.
pub fn to_db<T: Real>(linear: T) -> Result<T> {
    if !(linear > T::zero()) {
        return Err(Error::Domain(format!("cannot take dB of nonpositive value {linear}")));
    }
    Ok(db_unchecked(linear))
}

pub fn from_db<T: Real>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

#[inline]
fn db_unchecked<T: Real>(linear: T) -> T {
    T::lit(10.0) * linear.log10()
}

/// Loss fraction that, applied to the jitter-free squeezed variance, gives the
/// same degradation as the phase jitter: `(R'₋ − R₋)/(1 − R₋)`.
pub fn phase_noise_equivalent_loss<T: Real>(noise: QuadratureNoise<T>, phi: PhaseFluctuation<T>) -> Result<T> {
    if noise.sq >= T::one() {
        return Err(Error::Degenerate(format!(
            "squeezed variance {} is not below shot noise",
            noise.sq
        )));
    }
    let degraded = dephased_noise(noise, phi).sq;
    Ok((degraded - noise.sq) / (T::one() - noise.sq))
}

/// Half-width of the Gaussian 99.7 % interval, i.e. `3σ`.
pub fn confidence_99_7<T: Real>(sigma_db: T) -> Result<T> {
    if !(sigma_db >= T::zero()) {
        return Err(Error::invalid("sigma_db", format!("must be >= 0, got {sigma_db}")));
    }
    Ok(T::lit(3.0) * sigma_db)
}

/// Squeezing and anti-squeezing magnitudes in dB for one operating point.
pub fn measured_levels_db<T: Real>(params: &OpaParams<T>, phi: PhaseFluctuation<T>) -> Result<(T, T)> {
    let n = dephased_noise(ideal_noise(params)?, phi);
    Ok((-n.sq_db(), n.anti_db()))
}
