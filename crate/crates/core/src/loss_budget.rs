//! Itemised optical loss budget.
//!
//! Losses compose as cascaded beam splitters, `1 − Π(1 − Lᵢ)`. The mode
//! mismatch is whatever is left once every measured contribution has been
//! removed from the fitted total. The naive additive subtraction is reported
//! next to it because that is how such budgets are usually quoted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveguideSpec<T = f64> {
    pub length_cm: T,
    pub prop_loss_db_per_cm: T,
    /// SHG efficiency, 1/W.
    pub alpha: T,
}

impl<T: Real> Default for WaveguideSpec<T> {
    fn default() -> Self {
        Self {
            length_cm: T::lit(4.5),
            prop_loss_db_per_cm: T::lit(0.1),
            alpha: T::lit(9.06),
        }
    }
}

impl<T: Real> WaveguideSpec<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length_cm", self.length_cm),
            ("prop_loss_db_per_cm", self.prop_loss_db_per_cm),
            ("alpha", self.alpha),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Intensity attenuation coefficient in 1/cm.
    pub fn attenuation_per_cm(&self) -> T {
        self.prop_loss_db_per_cm * T::LN_10() / T::lit(10.0)
    }
}

/// Effective lumped loss of a lossy waveguide squeezer.
///
/// The squeezed variance obeys `dV/dz = −2gV − a(V − 1)` with `V(0) = 1`,
/// `g = √(αP)/ℓ` and `a` the power attenuation per cm. Its solution at the
/// output is `V(ℓ) = a/(2g+a) + (1 − a/(2g+a))·exp(−(2g+a)ℓ)`; the returned
/// `L` is the lumped loss that gives the same `V(ℓ)` when placed after a
/// lossless squeezer, `V(ℓ) = L + (1 − L)·exp(−2√(αP))`.
pub fn waveguide_effective_loss<T: Real>(spec: &WaveguideSpec<T>, pump_power: T) -> Result<T> {
    spec.validate()?;
    if !(pump_power >= T::zero()) || !pump_power.is_finite() {
        return Err(Error::invalid(
            "pump_power",
            format!("must be finite and >= 0, got {pump_power}"),
        ));
    }
    let b = spec.attenuation_per_cm() * spec.length_cm;
    if b == T::zero() {
        return Ok(T::zero());
    }
    let x = T::lit(2.0) * (spec.alpha * pump_power).sqrt();
    if x < T::epsilon().sqrt() {
        return Ok(zero_gain_limit(b));
    }
    // V(ℓ) − e^{−x}, written with expm1 to keep the small-gain cancellation tame.
    let s = x + b;
    let excess = (b / s) * -(-s).exp_m1() + (-x).exp() * (-b).exp_m1();
    Ok(excess / -(-x).exp_m1())
}

/// `1 − (1 − e^{−b})/b` for total attenuation exponent `b = aℓ`.
fn zero_gain_limit<T: Real>(b: T) -> T {
    T::one() + (-b).exp_m1() / b
}

/// Vacuum admixture equivalent to a flat electronic floor `clearance_db` below shot noise.
pub fn circuit_equivalent_loss<T: Real>(clearance_db: T) -> Result<T> {
    if !(clearance_db > T::zero()) {
        return Err(Error::invalid(
            "clearance_db",
            format!("must be > 0, got {clearance_db}"),
        ));
    }
    Ok(T::lit(10.0).powf(-clearance_db / T::lit(10.0)))
}

fn check_fraction<T: Real>(name: &'static str, x: T) -> Result<()> {
    if !(x >= T::zero() && x < T::one()) {
        return Err(Error::invalid(
            name,
            format!("loss fraction must lie in [0, 1), got {x}"),
        ));
    }
    Ok(())
}

/// `1 − Π(1 − Lᵢ)`.
pub fn compose_losses<T: Real>(parts: &[T]) -> Result<T> {
    let mut transmission = T::one();
    for &p in parts {
        check_fraction("loss_part", p)?;
        transmission = transmission * (T::one() - p);
    }
    Ok(T::one() - transmission)
}

/// Mode-mismatch residual from a total and its known components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualLoss<T = f64> {
    /// Solves `compose(known ∪ {x}) = total`.
    pub multiplicative: T,
    /// `total − Σ known`.
    pub subtractive: T,
}

pub fn residual_mode_mismatch<T: Real>(total: T, known_parts: &[T]) -> Result<ResidualLoss<T>> {
    check_fraction("total", total)?;
    let known = compose_losses(known_parts)?;
    if known > total {
        return Err(Error::Infeasible(format!(
            "known losses compose to {known}, exceeding total {total}"
        )));
    }
    let multiplicative = T::one() - (T::one() - total) / (T::one() - known);
    let subtractive = known_parts.iter().fold(total, |acc, &p| acc - p);
    Ok(ResidualLoss {
        multiplicative: multiplicative.max(T::zero()),
        subtractive,
    })
}

/// Measured and assumed inputs of a budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetInputs<T = f64> {
    pub waveguide: WaveguideSpec<T>,
    pub pump_power: T,
    /// Mirrors, lenses, windows.
    pub optics: T,
    /// Photodiode quantum-efficiency shortfall.
    pub photodiode: T,
    pub circuit_clearance_db: T,
    /// Total effective loss, normally taken from the pump-sweep fit.
    pub total: T,
}

impl<T: Real> Default for BudgetInputs<T> {
    fn default() -> Self {
        Self {
            waveguide: WaveguideSpec::default(),
            pump_power: T::lit(0.64),
            optics: T::lit(0.01),
            photodiode: T::lit(0.01),
            circuit_clearance_db: T::lit(28.0),
            total: T::lit(0.08),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBudget<T = f64> {
    pub waveguide: T,
    pub optics: T,
    pub photodiode: T,
    pub circuit_equiv: T,
    pub mode_mismatch: T,
    /// `compose([waveguide, optics, photodiode, circuit_equiv, mode_mismatch])`.
    pub total: T,
    /// Mode mismatch under additive bookkeeping, for comparison.
    pub mode_mismatch_subtractive: T,
}

impl<T: Real> LossBudget<T> {
    pub fn build(inputs: &BudgetInputs<T>) -> Result<Self> {
        check_fraction("optics", inputs.optics)?;
        check_fraction("photodiode", inputs.photodiode)?;
        let waveguide = waveguide_effective_loss(&inputs.waveguide, inputs.pump_power)?;
        let circuit_equiv = circuit_equivalent_loss(inputs.circuit_clearance_db)?;
        let known = [waveguide, inputs.optics, inputs.photodiode, circuit_equiv];
        let residual = residual_mode_mismatch(inputs.total, &known)?;
        let mut budget = Self {
            waveguide,
            optics: inputs.optics,
            photodiode: inputs.photodiode,
            circuit_equiv,
            mode_mismatch: residual.multiplicative,
            total: T::zero(),
            mode_mismatch_subtractive: residual.subtractive,
        };
        budget.total = compose_losses(&budget.parts())?;
        Ok(budget)
    }

    pub fn parts(&self) -> [T; 5] {
        [
            self.waveguide,
            self.optics,
            self.photodiode,
            self.circuit_equiv,
            self.mode_mismatch,
        ]
    }

    /// `(label, fraction)` rows in presentation order, total last.
    pub fn rows(&self) -> [(&'static str, T); 6] {
        [
            ("waveguide", self.waveguide),
            ("optics", self.optics),
            ("photodiode", self.photodiode),
            ("circuit_equiv", self.circuit_equiv),
            ("mode_mismatch", self.mode_mismatch),
            ("total", self.total),
        ]
    }
}
