//! Recovery of (α, L, θ̃) from pump-power sweeps.
//!
//! Both branches are fitted jointly in dB: the squeezing branch alone cannot
//! tell loss from phase jitter. Parameters are optimised in a bounded
//! transform (logit on a log scale for α and θ̃, plain logit for L) from
//! several deterministic starts; the best converged start wins.

pub mod lm;
pub mod oracle;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise_model::{dephased_noise, ideal_noise, OpaParams, PhaseFluctuation};

pub use lm::LmSettings;
pub use oracle::{grid_oracle, Axis, OracleGrid, OracleResult};

/// One pump-power observation. dB levels are magnitudes relative to shot
/// noise, so 10 dB of squeezing is stored as `10.0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub pump_power: f64,
    pub squeezing_db: f64,
    pub anti_squeezing_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    pub alpha: f64,
    pub loss: f64,
    pub theta_tilde: f64,
}

impl FitParams {
    pub fn new(alpha: f64, loss: f64, theta_tilde: f64) -> Self {
        Self {
            alpha,
            loss,
            theta_tilde,
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha", format!("must be > 0, got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.loss) {
            return Err(Error::invalid("loss", format!("must lie in [0, 1), got {}", self.loss)));
        }
        if !(0.0..=std::f64::consts::FRAC_PI_4).contains(&self.theta_tilde) {
            return Err(Error::invalid(
                "theta_tilde",
                format!("must lie in [0, π/4], got {}", self.theta_tilde),
            ));
        }
        Ok(())
    }

    /// Model (squeezing, anti-squeezing) magnitudes in dB at `pump_power`.
    pub fn levels_db(&self, pump_power: f64) -> Result<(f64, f64)> {
        let n = dephased_noise(
            ideal_noise(&OpaParams::new(self.alpha, self.loss, pump_power)?)?,
            PhaseFluctuation::new(self.theta_tilde)?,
        );
        Ok((-n.sq_db(), n.anti_db()))
    }
}

/// Two residuals per point, model minus observation in signed dB:
/// `dB(R'₋) + S` and `dB(R'₊) − A`, each divided by the point's sigma if given.
pub fn model_residuals(params: &FitParams, points: &[SweepPoint]) -> Result<Vec<f64>> {
    params.check()?;
    let mut out = Vec::with_capacity(2 * points.len());
    for p in points {
        let (s, a) = params.levels_db(p.pump_power)?;
        let w = p.sigma_db.map_or(1.0, |s| 1.0 / s);
        out.push((p.squeezing_db - s) * w);
        out.push((a - p.anti_squeezing_db) * w);
    }
    Ok(out)
}

/// `Σ r²` over [`model_residuals`].
pub fn objective(params: &FitParams, points: &[SweepPoint]) -> Result<f64> {
    Ok(model_residuals(params, points)?.iter().map(|r| r * r).sum())
}

/// Sweep generated from `params`, with optional Gaussian dB noise on both branches.
pub fn synthesize_sweep<R: Rng + ?Sized>(
    params: &FitParams,
    pumps: &[f64],
    noise_db: f64,
    rng: &mut R,
) -> Result<Vec<SweepPoint>> {
    let normal = Normal::new(0.0, noise_db.max(0.0)).map_err(|e| Error::invalid("noise_db", e.to_string()))?;
    pumps
        .iter()
        .map(|&p| {
            let (s, a) = params.levels_db(p)?;
            let (ns, na) = if noise_db > 0.0 {
                (normal.sample(rng), normal.sample(rng))
            } else {
                (0.0, 0.0)
            };
            Ok(SweepPoint {
                pump_power: p,
                squeezing_db: s + ns,
                anti_squeezing_db: a + na,
                sigma_db: None,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub alpha: (f64, f64),
    pub loss: (f64, f64),
    pub theta_tilde: (f64, f64),
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            alpha: (1e-2, 1e2),
            loss: (0.0, 0.99),
            theta_tilde: (1e-6, std::f64::consts::FRAC_PI_4),
        }
    }
}

impl Bounds {
    fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo < hi && lo.is_finite() && hi.is_finite();
        if !(ok(self.alpha) && self.alpha.0 > 0.0) {
            return Err(Error::invalid("bounds.alpha", "need 0 < lo < hi"));
        }
        if !(ok(self.loss) && self.loss.0 >= 0.0 && self.loss.1 < 1.0) {
            return Err(Error::invalid("bounds.loss", "need 0 <= lo < hi < 1"));
        }
        if !(ok(self.theta_tilde) && self.theta_tilde.0 > 0.0 && self.theta_tilde.1 <= std::f64::consts::FRAC_PI_4) {
            return Err(Error::invalid("bounds.theta_tilde", "need 0 < lo < hi <= π/4"));
        }
        Ok(())
    }

    fn to_params(self, u: &DVector<f64>) -> FitParams {
        FitParams {
            alpha: log_squash(u[0], self.alpha),
            loss: squash(u[1], self.loss),
            theta_tilde: log_squash(u[2], self.theta_tilde),
        }
    }

    fn to_internal(self, p: &FitParams) -> DVector<f64> {
        DVector::from_vec(vec![
            log_unsquash(p.alpha, self.alpha),
            unsquash(p.loss, self.loss),
            log_unsquash(p.theta_tilde, self.theta_tilde),
        ])
    }

    /// `dp/du` for each parameter at `u`.
    fn derivative(&self, u: &DVector<f64>) -> [f64; 3] {
        let p = self.to_params(u);
        let s = |x: f64| sigmoid(x) * (1.0 - sigmoid(x));
        [
            p.alpha * (self.alpha.1 / self.alpha.0).ln() * s(u[0]),
            (self.loss.1 - self.loss.0) * s(u[1]),
            p.theta_tilde * (self.theta_tilde.1 / self.theta_tilde.0).ln() * s(u[2]),
        ]
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn squash(u: f64, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * sigmoid(u)
}

fn unsquash(p: f64, (lo, hi): (f64, f64)) -> f64 {
    let t = ((p - lo) / (hi - lo)).clamp(1e-12, 1.0 - 1e-12);
    (t / (1.0 - t)).ln()
}

fn log_squash(u: f64, (lo, hi): (f64, f64)) -> f64 {
    squash(u, (lo.ln(), hi.ln())).exp()
}

fn log_unsquash(p: f64, (lo, hi): (f64, f64)) -> f64 {
    unsquash(p.ln(), (lo.ln(), hi.ln()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    pub bounds: Bounds,
    /// Number of deterministic starts.
    pub starts: usize,
    /// Explicit starting points, used instead of the generated ones when non-empty.
    pub initial: Vec<FitParams>,
    pub max_iter: usize,
    pub ftol: f64,
    pub xtol: f64,
    pub gtol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        let lm = LmSettings::default();
        Self {
            bounds: Bounds::default(),
            starts: 8,
            initial: Vec::new(),
            max_iter: lm.max_iter,
            ftol: lm.ftol,
            xtol: lm.xtol,
            gtol: lm.gtol,
        }
    }
}

impl FitOptions {
    fn lm(&self) -> LmSettings {
        LmSettings {
            max_iter: self.max_iter,
            ftol: self.ftol,
            xtol: self.xtol,
            gtol: self.gtol,
        }
    }

    /// Starts log-spaced in α and θ̃ (opposite directions) with L cycling
    /// through a few typical values.
    pub fn start_points(&self) -> Vec<FitParams> {
        if !self.initial.is_empty() {
            return self.initial.clone();
        }
        let n = self.starts.max(1);
        let b = &self.bounds;
        let (a_lo, a_hi) = (b.alpha.0.max(0.5), b.alpha.1.min(50.0));
        let (t_lo, t_hi) = (b.theta_tilde.0.max(1e-3), b.theta_tilde.1.min(0.1));
        let losses: [f64; 4] = [0.05, 0.15, 0.02, 0.3];
        (0..n)
            .map(|i| {
                let f = (i as f64 + 0.5) / n as f64;
                FitParams {
                    alpha: a_lo * (a_hi / a_lo).powf(f),
                    loss: losses[i % losses.len()].clamp(b.loss.0, b.loss.1),
                    theta_tilde: t_hi * (t_lo / t_hi).powf(f),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uncertainty {
    pub alpha: f64,
    pub loss: f64,
    pub theta_tilde: f64,
    /// Correlation coefficient between L and θ̃.
    pub corr_loss_theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitWarning {
    /// Fewer than three points, or the pump powers span less than a factor two.
    WeakPumpSpan {
        points: usize,
        span: f64,
    },
    /// L and θ̃ are not separable from this data.
    LossPhaseDegenerate {
        correlation: f64,
    },
    /// A raw point reports more squeezing than anti-squeezing.
    UnorderedPoint {
        index: usize,
    },
    AtBound {
        parameter: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub final_step_norm: f64,
    pub converged: bool,
    pub start_index: usize,
    pub starts_run: usize,
    pub starts_converged: usize,
    /// `Σ r²` after each accepted step of the winning start.
    pub objective_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// 1/W.
    pub alpha: f64,
    pub loss: f64,
    /// rad.
    pub theta_tilde: f64,
    /// `Σ r²`.
    pub objective: f64,
    /// RMS residual, dB (sigma-weighted units when sigmas are given).
    pub residual_rms: f64,
    pub uncertainty: Option<Uncertainty>,
    pub diagnostics: FitDiagnostics,
    pub warnings: Vec<FitWarning>,
}

impl FitResult {
    pub fn params(&self) -> FitParams {
        FitParams::new(self.alpha, self.loss, self.theta_tilde)
    }
}

fn data_warnings(points: &[SweepPoint]) -> Vec<FitWarning> {
    let mut w = Vec::new();
    let (lo, hi) = points.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| {
        (lo.min(p.pump_power), hi.max(p.pump_power))
    });
    let span = hi / lo;
    if points.len() < 3 || !(span >= 2.0) {
        w.push(FitWarning::WeakPumpSpan {
            points: points.len(),
            span,
        });
    }
    for (i, p) in points.iter().enumerate() {
        if p.squeezing_db > p.anti_squeezing_db {
            w.push(FitWarning::UnorderedPoint { index: i });
        }
    }
    w
}

fn check_points(points: &[SweepPoint]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::Degenerate("no sweep points".into()));
    }
    for (i, p) in points.iter().enumerate() {
        if !(p.pump_power > 0.0 && p.pump_power.is_finite()) {
            return Err(Error::invalid("pump_power", format!("point {i}: must be > 0")));
        }
        if !p.squeezing_db.is_finite() || !p.anti_squeezing_db.is_finite() {
            return Err(Error::invalid("levels", format!("point {i}: non-finite dB value")));
        }
        if let Some(s) = p.sigma_db {
            if !(s > 0.0) {
                return Err(Error::invalid("sigma_db", format!("point {i}: must be > 0")));
            }
        }
    }
    Ok(())
}

fn residual_vector(bounds: &Bounds, points: &[SweepPoint], u: &DVector<f64>) -> DVector<f64> {
    let p = bounds.to_params(u);
    match model_residuals(&p, points) {
        Ok(r) => DVector::from_vec(r),
        Err(_) => DVector::from_element(2 * points.len(), f64::INFINITY),
    }
}

fn uncertainty(bounds: &Bounds, points: &[SweepPoint], u: &DVector<f64>, cost: f64) -> Option<Uncertainty> {
    let m = 2 * points.len();
    if m <= 3 {
        return None;
    }
    let f = |x: &DVector<f64>| residual_vector(bounds, points, x);
    let ju = lm::jacobian(&f, u, m);
    let d = bounds.derivative(u);
    let jp = &ju * DMatrix::from_diagonal(&DVector::from_iterator(3, d.iter().map(|v| 1.0 / v)));
    let cov = (jp.transpose() * &jp).try_inverse()?;
    let s2 = cost / (m - 3) as f64;
    let var = |i: usize| (cov[(i, i)] * s2).max(0.0);
    let corr = cov[(1, 2)] / (cov[(1, 1)] * cov[(2, 2)]).sqrt();
    Some(Uncertainty {
        alpha: var(0).sqrt(),
        loss: var(1).sqrt(),
        theta_tilde: var(2).sqrt(),
        corr_loss_theta: corr,
    })
}

struct StartOutcome {
    index: usize,
    outcome: lm::LmOutcome,
}

/// Bounded multi-start least-squares fit of a pump sweep.
///
/// Returns [`Error::NoConvergence`] with the best attempt attached when no
/// start meets the tolerances within `max_iter`.
pub fn fit_sweep(points: &[SweepPoint], options: &FitOptions) -> Result<FitResult> {
    check_points(points)?;
    options.bounds.validate()?;
    let bounds = options.bounds;
    let settings = options.lm();
    let starts = options.start_points();

    let mut outcomes: Vec<StartOutcome> = starts
        .par_iter()
        .enumerate()
        .map(|(index, s)| {
            let f = |x: &DVector<f64>| residual_vector(&bounds, points, x);
            StartOutcome {
                index,
                outcome: lm::minimize(f, bounds.to_internal(s), &settings),
            }
        })
        .collect();
    outcomes.sort_by_key(|o| o.index);

    let starts_converged = outcomes.iter().filter(|o| o.outcome.converged).count();
    let best = outcomes
        .iter()
        .filter(|o| o.outcome.converged || starts_converged == 0)
        .min_by(|a, b| a.outcome.cost.total_cmp(&b.outcome.cost))
        .expect("at least one start");

    let p = bounds.to_params(&best.outcome.x);
    let m = 2 * points.len();
    let mut warnings = data_warnings(points);
    let unc = uncertainty(&bounds, points, &best.outcome.x, best.outcome.cost);
    if let Some(u) = unc {
        if !(u.corr_loss_theta.abs() < 0.999) {
            warnings.push(FitWarning::LossPhaseDegenerate {
                correlation: u.corr_loss_theta,
            });
        }
    } else if points.len() < 2 {
        warnings.push(FitWarning::LossPhaseDegenerate { correlation: f64::NAN });
    }
    for (name, v, (lo, hi)) in [
        ("alpha", p.alpha, bounds.alpha),
        ("loss", p.loss, bounds.loss),
        ("theta_tilde", p.theta_tilde, bounds.theta_tilde),
    ] {
        let tol = 1e-6 * (hi - lo);
        if v - lo < tol || hi - v < tol {
            warnings.push(FitWarning::AtBound { parameter: name.into() });
        }
    }

    let result = FitResult {
        alpha: p.alpha,
        loss: p.loss,
        theta_tilde: p.theta_tilde,
        objective: best.outcome.cost,
        residual_rms: (best.outcome.cost / m as f64).sqrt(),
        uncertainty: unc,
        diagnostics: FitDiagnostics {
            iterations: best.outcome.iterations,
            final_step_norm: best.outcome.last_step_norm,
            converged: best.outcome.converged,
            start_index: best.index,
            starts_run: outcomes.len(),
            starts_converged,
            objective_history: best.outcome.history.clone(),
        },
        warnings,
    };
    if starts_converged == 0 {
        return Err(Error::NoConvergence {
            iterations: result.diagnostics.iterations,
            best: Box::new(result),
        });
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn truth() -> FitParams {
        FitParams::new(9.06, 0.08, 0.009)
    }

    fn pumps() -> Vec<f64> {
        vec![0.05, 0.24, 0.43, 0.62, 0.81, 1.0]
    }

    #[test]
    fn residuals_of_exact_data_vanish() {
        let mut r = rng::stream(0, "t");
        let pts = synthesize_sweep(&truth(), &pumps(), 0.0, &mut r).unwrap();
        let res = model_residuals(&truth(), &pts).unwrap();
        assert_eq!(res.len(), 12);
        assert!(res.iter().all(|v| v.abs() < 1e-12));
        assert!(model_residuals(&truth(), &[]).unwrap().is_empty());
    }

    #[test]
    fn residuals_at_headline_point() {
        let p = SweepPoint {
            pump_power: 0.64,
            squeezing_db: 10.1,
            anti_squeezing_db: 20.2,
            sigma_db: None,
        };
        let r = model_residuals(&truth(), &[p]).unwrap();
        assert!((r[0] - -0.047_923_370_645_078).abs() < 1e-9, "{}", r[0]);
        assert!((r[1] - 0.356_091_197_563_562).abs() < 1e-9, "{}", r[1]);
    }

    #[test]
    fn residuals_reject_out_of_bounds() {
        assert!(model_residuals(&FitParams::new(-1.0, 0.1, 0.01), &[]).is_err());
        assert!(model_residuals(&FitParams::new(1.0, 1.0, 0.01), &[]).is_err());
        assert!(model_residuals(&FitParams::new(1.0, 0.1, 1.0), &[]).is_err());
    }

    #[test]
    fn previous_work_anchor() {
        let (s, _) = FitParams::new(9.06, 0.12, 0.014).levels_db(0.64).unwrap();
        assert!((s - 8.285_069_770_033_82).abs() < 1e-9);
    }

    #[test]
    fn noiseless_round_trip() {
        let mut r = rng::stream(0, "t");
        let pts = synthesize_sweep(&truth(), &pumps(), 0.0, &mut r).unwrap();
        let fit = fit_sweep(&pts, &FitOptions::default()).unwrap();
        assert!(((fit.alpha - 9.06) / 9.06).abs() < 1e-6, "{fit:?}");
        assert!(((fit.loss - 0.08) / 0.08).abs() < 1e-6);
        assert!(((fit.theta_tilde - 0.009) / 0.009).abs() < 1e-6);
        assert!(fit.diagnostics.converged);
        assert!(fit.warnings.is_empty(), "{:?}", fit.warnings);
    }

    #[test]
    fn noiseless_round_trip_over_random_draws() {
        let mut r = rng::stream(77, "draws");
        let draws: Vec<FitParams> = (0..50)
            .map(|_| {
                FitParams::new(
                    10f64.powf(r.random_range(0.0..1.477)),
                    r.random_range(0.01..0.5),
                    r.random_range(1e-3..0.05),
                )
            })
            .collect();
        let bad: Vec<String> = draws
            .par_iter()
            .enumerate()
            .filter_map(|(i, p)| {
                let mut r = rng::stream(i as u64, "t");
                let pts = synthesize_sweep(p, &pumps(), 0.0, &mut r).unwrap();
                let f = fit_sweep(&pts, &FitOptions::default()).unwrap();
                let ok = ((f.alpha - p.alpha) / p.alpha).abs() < 1e-6
                    && (f.loss - p.loss).abs() < 1e-6 * p.loss.max(0.01)
                    && ((f.theta_tilde - p.theta_tilde) / p.theta_tilde).abs() < 1e-5;
                (!ok).then(|| format!("{p:?} -> {:?}", f.params()))
            })
            .collect();
        assert!(bad.is_empty(), "{bad:#?}");
    }

    #[test]
    fn objective_history_is_monotone() {
        let mut r = rng::stream(4, "t");
        let pts = synthesize_sweep(&truth(), &pumps(), 0.1, &mut r).unwrap();
        let fit = fit_sweep(&pts, &FitOptions::default()).unwrap();
        let h = &fit.diagnostics.objective_history;
        assert!(h.len() > 1);
        assert!(h.windows(2).all(|w| w[1] <= w[0]));
        assert!(fit.uncertainty.is_some());
    }

    #[test]
    fn invariant_under_reordering_and_duplication() {
        let mut r = rng::stream(5, "t");
        let pts = synthesize_sweep(&truth(), &pumps(), 0.1, &mut r).unwrap();
        let base = fit_sweep(&pts, &FitOptions::default()).unwrap();

        let mut rev = pts.clone();
        rev.reverse();
        let a = fit_sweep(&rev, &FitOptions::default()).unwrap();

        // Splitting point 2 into two copies with √2 × sigma leaves Σr² unchanged.
        let mut dup: Vec<SweepPoint> = pts
            .iter()
            .map(|p| SweepPoint {
                sigma_db: Some(1.0),
                ..*p
            })
            .collect();
        dup[2].sigma_db = Some(2f64.sqrt());
        dup.push(dup[2]);
        let b = fit_sweep(&dup, &FitOptions::default()).unwrap();

        for f in [&a, &b] {
            assert!((f.alpha - base.alpha).abs() < 1e-6 * base.alpha);
            assert!((f.loss - base.loss).abs() < 1e-6);
            assert!((f.theta_tilde - base.theta_tilde).abs() < 1e-7);
            assert!((f.objective - base.objective).abs() < 1e-9 * (1.0 + base.objective));
        }
    }

    #[test]
    fn single_point_is_flagged() {
        let pts = [SweepPoint {
            pump_power: 0.64,
            squeezing_db: 10.1,
            anti_squeezing_db: 20.2,
            sigma_db: None,
        }];
        let fit = match fit_sweep(&pts, &FitOptions::default()) {
            Ok(f) => f,
            Err(Error::NoConvergence { best, .. }) => *best,
            Err(e) => panic!("{e}"),
        };
        assert!(fit
            .warnings
            .iter()
            .any(|w| matches!(w, FitWarning::WeakPumpSpan { .. })));
        assert!(fit
            .warnings
            .iter()
            .any(|w| matches!(w, FitWarning::LossPhaseDegenerate { .. })));
    }

    #[test]
    fn unordered_point_is_flagged() {
        let mut r = rng::stream(0, "t");
        let mut pts = synthesize_sweep(&truth(), &pumps(), 0.0, &mut r).unwrap();
        pts[0].squeezing_db = pts[0].anti_squeezing_db + 0.05;
        let fit = fit_sweep(&pts, &FitOptions::default()).unwrap();
        assert!(fit.warnings.contains(&FitWarning::UnorderedPoint { index: 0 }));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            fit_sweep(&[], &FitOptions::default()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn iteration_cap_reports_best_so_far() {
        let mut r = rng::stream(1, "t");
        let pts = synthesize_sweep(&truth(), &pumps(), 0.1, &mut r).unwrap();
        let opts = FitOptions {
            max_iter: 1,
            ..FitOptions::default()
        };
        match fit_sweep(&pts, &opts) {
            Err(Error::NoConvergence { best, iterations }) => {
                assert_eq!(iterations, 1);
                assert!(best.objective.is_finite());
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn transform_round_trip() {
        let b = Bounds::default();
        let p = FitParams::new(9.06, 0.08, 0.009);
        let q = b.to_params(&b.to_internal(&p));
        assert!((q.alpha - p.alpha).abs() < 1e-12 * p.alpha);
        assert!((q.loss - p.loss).abs() < 1e-12);
        assert!((q.theta_tilde - p.theta_tilde).abs() < 1e-14);
    }
}
