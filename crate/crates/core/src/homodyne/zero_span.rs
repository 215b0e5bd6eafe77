use std::collections::VecDeque;

use rustfft::num_complex::Complex64;

use super::chain::DetectionChain;
use super::synth::{sample_count, stream_samples, Source};
use super::trace::{AnalyzerMode, AnalyzerSettings, Axis, Reference, Trace};
use crate::error::{Error, Result};

/// Number of VBW time constants dropped from the start of a trace.
pub const VBW_SETTLE_TIME_CONSTANTS: f64 = 5.0;

/// Streaming zero-span detector.
///
/// Mix to baseband at the center frequency, Gaussian RBW filter (unit DC gain,
/// taps to ±4σ), decimate, square-law detect, convert to dB, then a one-pole
/// VBW low-pass on the log signal. The total input length must be known up
/// front so that the output grid is fixed before the first sample arrives.
pub struct ZeroSpan {
    settings: AnalyzerSettings,
    sample_rate: f64,
    omega: f64,
    taps: Vec<f64>,
    history: VecDeque<Complex64>,
    decim: usize,
    vbw_a: f64,
    vbw_state: Option<f64>,
    consumed: usize,
    out_index: usize,
    first_kept: usize,
    keep_every: usize,
    points: usize,
    total_out: usize,
    abscissa: Vec<f64>,
    level: Vec<f64>,
}

impl ZeroSpan {
    pub fn new(settings: AnalyzerSettings, sample_rate: f64, total_samples: usize) -> Result<Self> {
        settings.validate(sample_rate)?;
        let AnalyzerMode::ZeroSpan { center } = settings.mode else {
            return Err(Error::Config("zero-span detector needs a zero-span mode".into()));
        };
        let sigma_t = std::f64::consts::LN_2.sqrt() / (std::f64::consts::PI * settings.rbw);
        let half = (4.0 * sigma_t * sample_rate).ceil().max(1.0) as isize;
        let mut taps: Vec<f64> = (-half..=half)
            .map(|k| {
                let t = k as f64 / sample_rate;
                (-t * t / (2.0 * sigma_t * sigma_t)).exp()
            })
            .collect();
        let s: f64 = taps.iter().sum();
        taps.iter_mut().for_each(|v| *v /= s);

        let decim = ((sample_rate / (4.0 * settings.rbw)).floor() as usize).max(1);
        let out_rate = sample_rate / decim as f64;
        let vbw_a = 1.0 - (-std::f64::consts::TAU * settings.vbw / out_rate).exp();
        let settle = (VBW_SETTLE_TIME_CONSTANTS * out_rate / (std::f64::consts::TAU * settings.vbw)).ceil() as usize;
        // Outputs exist once the filter history is full.
        let total_out = if total_samples >= taps.len() {
            (total_samples - taps.len()) / decim + 1
        } else {
            0
        };
        if total_out <= settle {
            return Err(Error::Config(format!(
                "{total_samples} samples do not cover the VBW settling time of {:.3e} s",
                settle as f64 / out_rate
            )));
        }
        let available = total_out - settle;
        let points = settings.points.min(available);
        let keep_every = available / points;

        Ok(Self {
            settings,
            sample_rate,
            omega: std::f64::consts::TAU * center / sample_rate,
            history: VecDeque::with_capacity(taps.len()),
            taps,
            decim,
            vbw_a,
            vbw_state: None,
            consumed: 0,
            out_index: 0,
            first_kept: settle,
            keep_every,
            points,
            total_out,
            abscissa: Vec::with_capacity(points),
            level: Vec::with_capacity(points),
        })
    }

    pub fn decimation(&self) -> usize {
        self.decim
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn push(&mut self, block: &[f64]) {
        if block.is_empty() {
            return;
        }
        let n_taps = self.taps.len();
        let half = (n_taps / 2) as f64;
        // Exact phasor at the block start, recursion within the block.
        let start = self.consumed;
        let mut ph = Complex64::from_polar(1.0, -(self.omega * start as f64).rem_euclid(std::f64::consts::TAU));
        let step = Complex64::from_polar(1.0, -self.omega);
        for &x in block {
            if self.history.len() == n_taps {
                self.history.pop_front();
            }
            self.history.push_back(ph * x);
            ph *= step;
            self.consumed += 1;
            if self.history.len() == n_taps && (self.consumed - n_taps).is_multiple_of(self.decim) {
                let y: Complex64 = self.history.iter().zip(&self.taps).map(|(h, &w)| h * w).sum();
                let p = y.norm_sqr().max(f64::MIN_POSITIVE);
                let db = 10.0 * p.log10();
                let v = match self.vbw_state {
                    None => db,
                    Some(s) => s + self.vbw_a * (db - s),
                };
                self.vbw_state = Some(v);
                let i = self.out_index;
                self.out_index += 1;
                if i >= self.first_kept
                    && (i - self.first_kept).is_multiple_of(self.keep_every)
                    && self.level.len() < self.points
                {
                    // Time stamp at the centre of the filter window.
                    let t = (self.consumed as f64 - 1.0 - half) / self.sample_rate;
                    self.abscissa.push(t);
                    self.level.push(v);
                }
            }
        }
    }

    pub fn finish(self) -> Result<Trace> {
        if self.out_index < self.total_out || self.level.is_empty() {
            return Err(Error::Config(format!(
                "zero-span input ended early: {} samples gave {} of {} detector outputs",
                self.consumed, self.out_index, self.total_out
            )));
        }
        let t = Trace {
            axis: Axis::Time,
            abscissa: self.abscissa,
            level_db: self.level,
            reference: Reference::Absolute,
            settings: self.settings,
            sample_rate: self.sample_rate,
            seed: None,
        };
        t.check_finite()?;
        Ok(t)
    }
}

/// Zero-span trace of a sample buffer, in absolute units.
pub fn zero_span(samples: &[f64], settings: &AnalyzerSettings, sample_rate: f64) -> Result<Trace> {
    let mut det = ZeroSpan::new(*settings, sample_rate, samples.len())?;
    det.push(samples);
    det.finish()
}

/// Synthesize `duration` seconds of `source` and run the zero-span detector on
/// the fly, without holding the time series.
pub fn measure_zero_span(
    source: Source,
    chain: &DetectionChain,
    settings: &AnalyzerSettings,
    duration: f64,
) -> Result<Trace> {
    chain.validate()?;
    let n = sample_count(chain, duration)?;
    let mut det = ZeroSpan::new(*settings, chain.sample_rate, n)?;
    stream_samples(source, chain, duration, |b| det.push(b))?;
    Ok(det.finish()?.with_seed(chain.seed))
}
