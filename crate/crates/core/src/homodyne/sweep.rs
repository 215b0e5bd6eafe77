use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::chain::DetectionChain;
use super::synth::{stream_samples, Source};
use super::trace::{AnalyzerMode, AnalyzerSettings, Axis, Reference, Trace};
use crate::error::{Error, Result};

/// Streaming swept-mode analyzer.
///
/// Welch periodogram (Hann window, 50% overlap, one-sided PSD) with the FFT
/// bin spacing at most RBW/4, then each output point integrates the PSD under
/// a Gaussian RBW shape (-3 dB full width = RBW). Output is power in the RBW,
/// dB, absolute units.
pub struct Sweep {
    settings: AnalyzerSettings,
    sample_rate: f64,
    nfft: usize,
    hop: usize,
    window: Vec<f64>,
    window_power: f64,
    fft: Arc<dyn Fft<f64>>,
    pending: Vec<f64>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
    psd_sum: Vec<f64>,
    segments: usize,
}

impl Sweep {
    pub fn new(settings: AnalyzerSettings, sample_rate: f64) -> Result<Self> {
        settings.validate(sample_rate)?;
        if !matches!(settings.mode, AnalyzerMode::Sweep { .. }) {
            return Err(Error::Config("swept analyzer needs a sweep mode".into()));
        }
        let nfft = ((4.0 * sample_rate / settings.rbw).ceil() as usize)
            .next_power_of_two()
            .max(16);
        let window: Vec<f64> = (0..nfft)
            .map(|i| {
                let s = (std::f64::consts::PI * i as f64 / nfft as f64).sin();
                s * s
            })
            .collect();
        let window_power = window.iter().map(|w| w * w).sum();
        let fft = FftPlanner::new().plan_fft_forward(nfft);
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        Ok(Self {
            settings,
            sample_rate,
            nfft,
            hop: nfft / 2,
            window,
            window_power,
            fft,
            pending: Vec::with_capacity(2 * nfft),
            buf: vec![Complex64::default(); nfft],
            scratch,
            psd_sum: vec![0.0; nfft / 2 + 1],
            segments: 0,
        })
    }

    pub fn nfft(&self) -> usize {
        self.nfft
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    pub fn push(&mut self, block: &[f64]) {
        self.pending.extend_from_slice(block);
        let mut start = 0;
        while self.pending.len() - start >= self.nfft {
            let seg = &self.pending[start..start + self.nfft];
            for ((b, &x), &w) in self.buf.iter_mut().zip(seg).zip(&self.window) {
                *b = Complex64::new(x * w, 0.0);
            }
            self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
            for (acc, b) in self.psd_sum.iter_mut().zip(&self.buf) {
                *acc += b.norm_sqr();
            }
            self.segments += 1;
            start += self.hop;
        }
        self.pending.drain(..start);
    }

    /// Averaged one-sided PSD on the FFT grid, per Hz.
    pub fn psd(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.segments == 0 {
            return Err(Error::Config(format!(
                "sweep needs at least {} samples for one periodogram segment",
                self.nfft
            )));
        }
        let df = self.sample_rate / self.nfft as f64;
        let norm = 1.0 / (self.segments as f64 * self.sample_rate * self.window_power);
        let last = self.nfft / 2;
        let freqs = (0..=last).map(|k| k as f64 * df).collect();
        let psd = self
            .psd_sum
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let one_sided = if k == 0 || k == last { 1.0 } else { 2.0 };
                one_sided * p * norm
            })
            .collect();
        Ok((freqs, psd))
    }

    pub fn finish(self) -> Result<Trace> {
        let (freqs, psd) = self.psd()?;
        let AnalyzerMode::Sweep { start, stop } = self.settings.mode else {
            unreachable!("checked in new")
        };
        let rbw = self.settings.rbw;
        let df = self.sample_rate / self.nfft as f64;
        let n = self.settings.points;
        let abscissa: Vec<f64> = if n == 1 {
            vec![start]
        } else {
            (0..n)
                .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                .collect()
        };
        let reach = 3.0 * rbw;
        let level_db = abscissa
            .iter()
            .map(|&fc| {
                let lo = (((fc - reach) / df).floor().max(0.0)) as usize;
                let hi = (((fc + reach) / df).ceil() as usize).min(freqs.len() - 1);
                let p: f64 = (lo..=hi)
                    .map(|k| {
                        let x = 2.0 * (freqs[k] - fc) / rbw;
                        (-(x * x) * std::f64::consts::LN_2).exp() * psd[k]
                    })
                    .sum::<f64>()
                    * df;
                10.0 * p.max(f64::MIN_POSITIVE).log10()
            })
            .collect();
        let t = Trace {
            axis: Axis::Frequency,
            abscissa,
            level_db,
            reference: Reference::Absolute,
            settings: self.settings,
            sample_rate: self.sample_rate,
            seed: None,
        };
        t.check_finite()?;
        Ok(t)
    }
}

/// Swept trace of a sample buffer, in absolute units.
pub fn sweep_spectrum(samples: &[f64], settings: &AnalyzerSettings, sample_rate: f64) -> Result<Trace> {
    let mut sa = Sweep::new(*settings, sample_rate)?;
    sa.push(samples);
    sa.finish()
}

/// Synthesize and sweep without holding the time series.
pub fn measure_sweep(
    source: Source,
    chain: &DetectionChain,
    settings: &AnalyzerSettings,
    duration: f64,
) -> Result<Trace> {
    chain.validate()?;
    let mut sa = Sweep::new(*settings, chain.sample_rate)?;
    stream_samples(source, chain, duration, |b| sa.push(b))?;
    Ok(sa.finish()?.with_seed(chain.seed))
}
