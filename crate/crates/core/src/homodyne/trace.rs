use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalyzerMode {
    ZeroSpan { center: f64 },
    Sweep { start: f64, stop: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzerSettings {
    pub mode: AnalyzerMode,
    pub rbw: f64,
    /// Ignored in sweep mode, where the averaged periodogram already smooths.
    pub vbw: f64,
    pub points: usize,
}

impl Default for AnalyzerSettings {
    fn default() -> Self {
        Self {
            mode: AnalyzerMode::ZeroSpan { center: 3e6 },
            rbw: 1e6,
            vbw: 100.0,
            points: 1001,
        }
    }
}

impl AnalyzerSettings {
    pub fn zero_span(center: f64) -> Self {
        Self {
            mode: AnalyzerMode::ZeroSpan { center },
            ..Self::default()
        }
    }

    pub fn sweep(start: f64, stop: f64) -> Self {
        Self {
            mode: AnalyzerMode::Sweep { start, stop },
            ..Self::default()
        }
    }

    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        if !(self.rbw > 0.0) || !(self.vbw > 0.0) {
            return Err(Error::invalid("rbw/vbw", "must be > 0"));
        }
        if self.vbw > self.rbw {
            return Err(Error::invalid(
                "vbw",
                format!("must not exceed rbw ({} > {})", self.vbw, self.rbw),
            ));
        }
        if self.points == 0 {
            return Err(Error::invalid("points", "must be >= 1"));
        }
        let nyq = sample_rate / 2.0;
        match self.mode {
            AnalyzerMode::ZeroSpan { center } => {
                if center <= self.rbw / 2.0 {
                    return Err(Error::Config(format!(
                        "zero-span center {center} Hz must exceed rbw/2 = {} Hz",
                        self.rbw / 2.0
                    )));
                }
                if center + self.rbw / 2.0 >= nyq {
                    return Err(Error::Config(format!(
                        "zero-span band reaches {} Hz, above Nyquist {nyq} Hz",
                        center + self.rbw / 2.0
                    )));
                }
            }
            AnalyzerMode::Sweep { start, stop } => {
                if !(start >= 0.0) || !(stop > start) {
                    return Err(Error::Config(format!(
                        "sweep needs 0 <= start < stop, got {start}..{stop}"
                    )));
                }
                if stop >= nyq {
                    return Err(Error::Config(format!("sweep stop {stop} Hz is above Nyquist {nyq} Hz")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Time,
    Frequency,
}

/// What 0 dB means on a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// Raw detector output in sample units; only differences are meaningful.
    Absolute,
    ShotNoise,
    ShotNoiseCircuitSubtracted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub axis: Axis,
    /// Seconds or Hz.
    pub abscissa: Vec<f64>,
    pub level_db: Vec<f64>,
    pub reference: Reference,
    pub settings: AnalyzerSettings,
    pub sample_rate: f64,
    pub seed: Option<u64>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.level_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.level_db.is_empty()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn mean_db(&self) -> f64 {
        self.level_db.iter().sum::<f64>() / self.len() as f64
    }

    pub fn std_db(&self) -> f64 {
        let m = self.mean_db();
        (self.level_db.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.len() as f64).sqrt()
    }

    /// Level at the abscissa closest to `x`.
    pub fn level_near(&self, x: f64) -> Option<f64> {
        let i = self
            .abscissa
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))?
            .0;
        Some(self.level_db[i])
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if let Some(i) = self.level_db.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite level at point {i}")));
        }
        Ok(())
    }
}

/// Minimum and maximum of the `window`-point moving average of a trace.
pub fn envelope_extrema(trace: &Trace, window: usize) -> Result<(f64, f64)> {
    let n = trace.len();
    if window == 0 || window > n {
        return Err(Error::invalid("window", format!("must lie in 1..={n}")));
    }
    let mut sum: f64 = trace.level_db[..window].iter().sum();
    let (mut lo, mut hi) = (sum, sum);
    for i in window..n {
        sum += trace.level_db[i] - trace.level_db[i - window];
        lo = lo.min(sum);
        hi = hi.max(sum);
    }
    let w = window as f64;
    Ok((lo / w, hi / w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(levels: Vec<f64>) -> Trace {
        Trace {
            axis: Axis::Time,
            abscissa: (0..levels.len()).map(|i| i as f64).collect(),
            level_db: levels,
            reference: Reference::ShotNoise,
            settings: AnalyzerSettings::default(),
            sample_rate: 1.0,
            seed: None,
        }
    }

    #[test]
    fn extrema_of_moving_average() {
        let t = trace(vec![0.0, 4.0, 0.0, -2.0, -2.0, 6.0]);
        assert_eq!(envelope_extrema(&t, 1).unwrap(), (-2.0, 6.0));
        assert_eq!(envelope_extrema(&t, 2).unwrap(), (-2.0, 2.0));
        assert_eq!(envelope_extrema(&t, 6).unwrap(), (1.0, 1.0));
        assert!(envelope_extrema(&t, 0).is_err());
        assert!(envelope_extrema(&t, 7).is_err());
    }

    #[test]
    fn stats() {
        let t = trace(vec![1.0, 3.0]);
        assert_eq!(t.mean_db(), 2.0);
        assert_eq!(t.std_db(), 1.0);
        assert_eq!(t.level_near(0.9), Some(3.0));
    }

    #[test]
    fn settings_validation() {
        let fs = 10e6;
        assert!(AnalyzerSettings::default().validate(fs).is_ok());
        assert!(matches!(
            AnalyzerSettings::zero_span(0.4e6).validate(fs),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            AnalyzerSettings::zero_span(4.6e6).validate(fs),
            Err(Error::Config(_))
        ));
        let s = AnalyzerSettings {
            vbw: 2e6,
            ..AnalyzerSettings::default()
        };
        assert!(s.validate(fs).is_err());
        assert!(AnalyzerSettings::sweep(1e6, 6e6).validate(fs).is_err());
        assert!(AnalyzerSettings::sweep(2e6, 1e6).validate(fs).is_err());
        assert!(AnalyzerSettings::sweep(0.0, 4e6).validate(fs).is_ok());
    }
}
