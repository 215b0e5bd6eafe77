//! Small dense Levenberg-Marquardt on an unconstrained parameter vector.
//!
//! Damping follows Nielsen's gain-ratio update with Marquardt diagonal
//! scaling; the Jacobian is a central difference. Box constraints are the
//! caller's business (see the transforms in the parent module).

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmSettings {
    pub max_iter: usize,
    /// Relative reduction of the cost below which an accepted step counts as converged.
    pub ftol: f64,
    /// Relative step size below which the solve counts as converged.
    pub xtol: f64,
    /// Infinity-norm of the gradient below which the solve counts as converged.
    pub gtol: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        Self {
            max_iter: 500,
            ftol: 1e-15,
            xtol: 1e-12,
            gtol: 1e-14,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmOutcome {
    pub x: DVector<f64>,
    /// `Σ r²` at `x`.
    pub cost: f64,
    pub iterations: usize,
    pub last_step_norm: f64,
    pub converged: bool,
    /// Cost after each accepted step, starting with the initial cost.
    pub history: Vec<f64>,
}

fn sum_sq(r: &DVector<f64>) -> f64 {
    r.iter().map(|v| v * v).sum()
}

pub fn jacobian<F>(f: &F, x: &DVector<f64>, m: usize) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let n = x.len();
    let mut j = DMatrix::zeros(m, n);
    for c in 0..n {
        let h = 1e-6 * x[c].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[c] += h;
        xm[c] -= h;
        let col = (f(&xp) - f(&xm)) / (2.0 * h);
        j.set_column(c, &col);
    }
    j
}

pub fn minimize<F>(f: F, x0: DVector<f64>, settings: &LmSettings) -> LmOutcome
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut x = x0;
    let mut r = f(&x);
    let m = r.len();
    let n = x.len();
    let mut cost = sum_sq(&r);
    let mut history = vec![cost];
    let mut mu = 1e-3;
    let mut nu = 2.0;
    let mut last_step = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    if m == 0 || cost == 0.0 {
        return LmOutcome {
            x,
            cost,
            iterations,
            last_step_norm: 0.0,
            converged: true,
            history,
        };
    }

    let mut j = jacobian(&f, &x, m);
    while iterations < settings.max_iter {
        iterations += 1;
        let a = j.transpose() * &j;
        let g = j.transpose() * &r;
        if g.amax() < settings.gtol {
            converged = true;
            break;
        }
        let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].max(1e-12)).collect();
        let mut damped = a.clone();
        for (i, d) in diag.iter().enumerate() {
            damped[(i, i)] += mu * d;
        }
        let step = match damped.cholesky() {
            Some(ch) => ch.solve(&(-&g)),
            None => {
                mu *= nu;
                nu *= 2.0;
                continue;
            }
        };
        last_step = step.norm();
        if last_step <= settings.xtol * (x.norm() + settings.xtol) {
            converged = true;
            break;
        }
        let x_new = &x + &step;
        let r_new = f(&x_new);
        let cost_new = sum_sq(&r_new);
        // Predicted reduction of Σr² under the damped linear model.
        let scaled: DVector<f64> = DVector::from_iterator(n, (0..n).map(|i| mu * diag[i] * step[i]));
        let predicted = step.dot(&(scaled - &g));
        let rho = if predicted > 0.0 {
            (cost - cost_new) / predicted
        } else {
            -1.0
        };
        if cost_new.is_finite() && rho > 0.0 {
            let rel = (cost - cost_new) / cost.max(f64::MIN_POSITIVE);
            x = x_new;
            r = r_new;
            cost = cost_new;
            history.push(cost);
            mu *= (1.0f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
            nu = 2.0;
            if cost == 0.0 || rel < settings.ftol {
                converged = true;
                break;
            }
            j = jacobian(&f, &x, m);
        } else {
            mu *= nu;
            nu *= 2.0;
            if !mu.is_finite() || mu > 1e30 {
                // No downhill step exists at machine precision.
                converged = true;
                break;
            }
        }
    }

    LmOutcome {
        x,
        cost,
        iterations,
        last_step_norm: last_step,
        converged,
        history,
    }
}
