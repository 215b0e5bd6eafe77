//! Exhaustive grid search over (α, L, θ̃), used to certify that the
//! optimiser lands in the global basin.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{model_residuals, FitParams, SweepPoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        Self { lo, hi, n }
    }

    pub fn step(&self) -> f64 {
        if self.n > 1 {
            (self.hi - self.lo) / (self.n - 1) as f64
        } else {
            0.0
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        self.lo + self.step() * i as f64
    }

    fn validate(&self, name: &'static str) -> Result<()> {
        if self.n == 0 || !(self.hi >= self.lo) {
            return Err(Error::invalid(name, "grid axis needs n >= 1 and hi >= lo"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleGrid {
    pub alpha: Axis,
    pub loss: Axis,
    pub theta_tilde: Axis,
}

impl OracleGrid {
    /// Uniform grid centred on `center` with `half_width` on each side and
    /// `n` nodes per axis, clipped to physical bounds.
    pub fn around(center: &FitParams, half_width: &FitParams, n: usize) -> Self {
        let ax = |c: f64, h: f64, lo: f64, hi: f64| Axis::new((c - h).max(lo), (c + h).min(hi), n);
        Self {
            alpha: ax(center.alpha, half_width.alpha, 1e-6, f64::INFINITY),
            loss: ax(center.loss, half_width.loss, 0.0, 0.999),
            theta_tilde: ax(
                center.theta_tilde,
                half_width.theta_tilde,
                0.0,
                std::f64::consts::FRAC_PI_4,
            ),
        }
    }

    pub fn cell(&self) -> FitParams {
        FitParams::new(self.alpha.step(), self.loss.step(), self.theta_tilde.step())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub params: FitParams,
    pub objective: f64,
    pub cell: FitParams,
}

/// Evaluate `Σ r²` on every grid node and return the minimiser.
pub fn grid_oracle(points: &[SweepPoint], grid: &OracleGrid) -> Result<OracleResult> {
    grid.alpha.validate("grid.alpha")?;
    grid.loss.validate("grid.loss")?;
    grid.theta_tilde.validate("grid.theta_tilde")?;
    let g = *grid;
    let best = (0..g.alpha.n)
        .into_par_iter()
        .map(|ia| {
            let mut best = (f64::INFINITY, FitParams::new(f64::NAN, f64::NAN, f64::NAN));
            for il in 0..g.loss.n {
                for it in 0..g.theta_tilde.n {
                    let p = FitParams::new(g.alpha.value(ia), g.loss.value(il), g.theta_tilde.value(it));
                    if let Ok(r) = model_residuals(&p, points) {
                        let obj: f64 = r.iter().map(|v| v * v).sum();
                        if obj < best.0 {
                            best = (obj, p);
                        }
                    }
                }
            }
            best
        })
        .reduce(
            || (f64::INFINITY, FitParams::new(f64::NAN, f64::NAN, f64::NAN)),
            |a, b| if b.0 < a.0 { b } else { a },
        );
    if !best.0.is_finite() {
        return Err(Error::Degenerate("no admissible grid node".into()));
    }
    Ok(OracleResult {
        params: best.1,
        objective: best.0,
        cell: grid.cell(),
    })
}

/// Largest objective increase over the 26 one-cell displacements of `center`.
/// Displacements that leave the admissible region are skipped.
pub fn one_cell_objective_rise(points: &[SweepPoint], center: &FitParams, cell: &FitParams) -> Result<f64> {
    let base = super::objective(center, points)?;
    let mut rise: f64 = 0.0;
    for da in -1i32..=1 {
        for dl in -1i32..=1 {
            for dt in -1i32..=1 {
                if da == 0 && dl == 0 && dt == 0 {
                    continue;
                }
                let p = FitParams::new(
                    center.alpha + da as f64 * cell.alpha,
                    center.loss + dl as f64 * cell.loss,
                    center.theta_tilde + dt as f64 * cell.theta_tilde,
                );
                if let Ok(v) = super::objective(&p, points) {
                    rise = rise.max(v - base);
                }
            }
        }
    }
    Ok(rise)
}

impl OracleResult {
    /// Whether a continuous optimum at `fit` matches this grid minimum to the
    /// grid's resolution: the fit is no worse than every node, and the best
    /// node is no worse than the fit by more than a one-cell step costs.
    pub fn agrees_with(&self, points: &[SweepPoint], fit: &FitParams) -> Result<bool> {
        let f = super::objective(fit, points)?;
        let rise = one_cell_objective_rise(points, fit, &self.cell)?;
        Ok(f <= self.objective + 1e-12 && self.objective - f <= rise)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::{fit_sweep, synthesize_sweep, FitOptions};
    use crate::rng;

    fn pts() -> Vec<SweepPoint> {
        let mut r = rng::stream(0, "t");
        synthesize_sweep(
            &FitParams::new(9.06, 0.08, 0.009),
            &[0.05, 0.24, 0.43, 0.62, 0.81, 1.0],
            0.0,
            &mut r,
        )
        .unwrap()
    }

    #[test]
    fn grid_containing_truth_returns_truth() {
        let grid = OracleGrid {
            alpha: Axis::new(8.06, 10.06, 3),
            loss: Axis::new(0.07, 0.09, 3),
            theta_tilde: Axis::new(0.008, 0.010, 3),
        };
        let o = grid_oracle(&pts(), &grid).unwrap();
        assert!((o.params.alpha - 9.06).abs() < 1e-12);
        assert!((o.params.loss - 0.08).abs() < 1e-12);
        assert!((o.params.theta_tilde - 0.009).abs() < 1e-12);
        assert!(o.objective < 1e-20);
    }

    #[test]
    fn single_cell_grid() {
        let grid = OracleGrid {
            alpha: Axis::new(9.06, 9.06, 1),
            loss: Axis::new(0.08, 0.08, 1),
            theta_tilde: Axis::new(0.009, 0.009, 1),
        };
        let o = grid_oracle(&pts(), &grid).unwrap();
        assert!(o.objective < 1e-20);
    }

    #[test]
    fn agrees_with_optimiser() {
        let mut r = rng::stream(11, "t");
        let data = synthesize_sweep(
            &FitParams::new(9.06, 0.08, 0.009),
            &[0.05, 0.24, 0.43, 0.62, 0.81, 1.0],
            0.1,
            &mut r,
        )
        .unwrap();
        let fit = fit_sweep(&data, &FitOptions::default()).unwrap();
        let grid = OracleGrid {
            alpha: Axis::new(7.0, 11.0, 41),
            loss: Axis::new(0.04, 0.12, 41),
            theta_tilde: Axis::new(0.004, 0.014, 41),
        };
        let o = grid_oracle(&data, &grid).unwrap();
        assert!(fit.objective <= o.objective + 1e-12);
        let c = o.cell;
        assert!((fit.alpha - o.params.alpha).abs() <= c.alpha);
        assert!((fit.loss - o.params.loss).abs() <= c.loss);
        assert!((fit.theta_tilde - o.params.theta_tilde).abs() <= c.theta_tilde);
        assert!(o.agrees_with(&data, &fit.params()).unwrap());
    }

    #[test]
    fn far_point_does_not_agree() {
        let data = pts();
        let grid = OracleGrid {
            alpha: Axis::new(7.0, 11.0, 21),
            loss: Axis::new(0.04, 0.12, 21),
            theta_tilde: Axis::new(0.004, 0.014, 21),
        };
        let o = grid_oracle(&data, &grid).unwrap();
        assert!(o.agrees_with(&data, &FitParams::new(9.06, 0.08, 0.009)).unwrap());
        assert!(!o.agrees_with(&data, &FitParams::new(10.0, 0.1, 0.012)).unwrap());
    }

    #[test]
    fn degenerate_single_point_still_returns_a_minimiser() {
        let one = &pts()[3..4];
        let grid = OracleGrid {
            alpha: Axis::new(5.0, 12.0, 15),
            loss: Axis::new(0.0, 0.2, 15),
            theta_tilde: Axis::new(0.0, 0.02, 15),
        };
        let o = grid_oracle(one, &grid).unwrap();
        assert!(o.objective.is_finite());
    }

    #[test]
    fn rejects_empty_axis() {
        let grid = OracleGrid {
            alpha: Axis::new(1.0, 2.0, 0),
            loss: Axis::new(0.0, 0.1, 2),
            theta_tilde: Axis::new(0.0, 0.1, 2),
        };
        assert!(grid_oracle(&pts(), &grid).is_err());
    }
}
