use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::chain::DetectionChain;
use crate::error::{Error, Result};
use crate::noise_model::QuadratureNoise;
use crate::rng::{self, SimRng};

/// Upper bound on in-memory time series; longer runs should stream.
pub const MAX_IN_MEMORY_SAMPLES: usize = 50_000_000;

/// LO phase measured from the squeezed quadrature, rad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoPhase {
    Constant { theta: f64 },
    Scan { start: f64, rate: f64 },
}

impl LoPhase {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            LoPhase::Constant { theta } => theta,
            LoPhase::Scan { start, rate } => start + rate * t,
        }
    }
}

/// What hits the detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    /// Signal beam mixed with the LO. `QuadratureNoise::vacuum()` gives the
    /// shot-noise reference.
    Homodyne {
        noise: QuadratureNoise<f64>,
        lo_phase: LoPhase,
        #[serde(default)]
        probe_tone: bool,
    },
    /// LO blocked: circuit noise only.
    Dark,
}

impl Source {
    pub fn shot() -> Self {
        Source::Homodyne {
            noise: QuadratureNoise::vacuum(),
            lo_phase: LoPhase::Constant { theta: 0.0 },
            probe_tone: false,
        }
    }

    pub fn locked(noise: QuadratureNoise<f64>, probe_tone: bool) -> Self {
        Source::Homodyne {
            noise,
            lo_phase: LoPhase::Constant { theta: 0.0 },
            probe_tone,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Source::Homodyne { noise, lo_phase, .. } = self {
            QuadratureNoise::new(noise.anti, noise.sq)?;
            let ok = match lo_phase {
                LoPhase::Constant { theta } => theta.is_finite(),
                LoPhase::Scan { start, rate } => start.is_finite() && rate.is_finite(),
            };
            if !ok {
                return Err(Error::invalid("lo_phase", "must be finite"));
            }
        }
        Ok(())
    }

    fn stream_label(&self) -> String {
        format!("homodyne/{self:?}")
    }
}

/// Block-wise generator of detector output samples.
///
/// Each block draws white quadrature and circuit noise, packs both into one
/// complex FFT, applies the photodiode response to the quadrature part and the
/// circuit profile to the other, and transforms back. Blocks are independent;
/// the seams are invisible at the analysis bandwidths of interest because the
/// responses are much shorter than a block.
pub struct Synthesizer {
    chain: DetectionChain,
    source: Source,
    rng: SimRng,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    h: Vec<Complex64>,
    g: Vec<f64>,
    buf: Vec<Complex64>,
    work: Vec<Complex64>,
    scratch: Vec<Complex64>,
    tone_amp: f64,
    produced: u64,
}

impl Synthesizer {
    pub fn new(source: Source, chain: &DetectionChain) -> Result<Self> {
        chain.validate()?;
        source.validate()?;
        let n = chain.block_len;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let df = chain.sample_rate / n as f64;
        let mut h = Vec::with_capacity(n);
        let mut g = Vec::with_capacity(n);
        for k in 0..n {
            let f = if k <= n / 2 {
                k as f64 * df
            } else {
                (k as f64 - n as f64) * df
            };
            let (re, im) = chain.pd_response(f);
            h.push(Complex64::new(re, im));
            g.push(chain.circuit_gain2(f).sqrt());
        }
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        let tone_amp = match source {
            Source::Homodyne { probe_tone: true, .. } => chain.tone_amplitude(),
            _ => 0.0,
        };
        Ok(Self {
            rng: rng::stream(chain.seed, &source.stream_label()),
            chain: chain.clone(),
            source,
            fwd,
            inv,
            h,
            g,
            buf: vec![Complex64::default(); n],
            work: vec![Complex64::default(); n],
            scratch: vec![Complex64::default(); scratch_len],
            tone_amp,
            produced: 0,
        })
    }

    pub fn chain(&self) -> &DetectionChain {
        &self.chain
    }

    pub fn samples_produced(&self) -> u64 {
        self.produced
    }

    /// Replace `out` with the next `block_len` samples.
    pub fn next_block(&mut self, out: &mut Vec<f64>) {
        let n = self.chain.block_len;
        let fs = self.chain.sample_rate;
        let t0 = self.produced as f64 / fs;

        match self.source {
            Source::Homodyne { noise, lo_phase, .. } => match lo_phase {
                LoPhase::Constant { theta } => {
                    let sd = noise.at_lo_phase(theta).sqrt();
                    for b in self.buf.iter_mut() {
                        let s: f64 = self.rng.sample(StandardNormal);
                        let c: f64 = self.rng.sample(StandardNormal);
                        *b = Complex64::new(sd * s, c);
                    }
                }
                LoPhase::Scan { .. } => {
                    let (a, b) = (noise.sq.sqrt(), noise.anti.sqrt());
                    for (i, v) in self.buf.iter_mut().enumerate() {
                        let (sin, cos) = lo_phase.at(t0 + i as f64 / fs).sin_cos();
                        let z1: f64 = self.rng.sample(StandardNormal);
                        let z2: f64 = self.rng.sample(StandardNormal);
                        let c: f64 = self.rng.sample(StandardNormal);
                        *v = Complex64::new(a * cos * z1 + b * sin * z2, c);
                    }
                }
            },
            Source::Dark => {
                for b in self.buf.iter_mut() {
                    let c: f64 = self.rng.sample(StandardNormal);
                    *b = Complex64::new(0.0, c);
                }
            }
        }

        self.fwd.process_with_scratch(&mut self.buf, &mut self.scratch);
        // Unpack the two real spectra, shape each, and recombine as one
        // Hermitian spectrum.
        let x = &self.buf;
        for k in 0..n {
            let xk = x[k];
            let xm = x[(n - k) % n].conj();
            let s = (xk + xm) * 0.5;
            let c = (xk - xm) * Complex64::new(0.0, -0.5);
            self.work[k] = self.h[k] * s + c * self.g[k];
        }
        std::mem::swap(&mut self.buf, &mut self.work);
        self.inv.process_with_scratch(&mut self.buf, &mut self.scratch);

        out.clear();
        out.reserve(n);
        let scale = 1.0 / n as f64;
        if self.tone_amp > 0.0 {
            let w = std::f64::consts::TAU * self.chain.probe_tone.freq;
            for (i, v) in self.buf.iter().enumerate() {
                let t = (self.produced + i as u64) as f64 / fs;
                out.push(v.re * scale + self.tone_amp * (w * t).cos());
            }
        } else {
            out.extend(self.buf.iter().map(|v| v.re * scale));
        }
        self.produced += n as u64;
    }
}

/// Number of samples covering `duration` at the chain's sample rate.
pub fn sample_count(chain: &DetectionChain, duration: f64) -> Result<usize> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::invalid("duration", "must be finite and > 0"));
    }
    let n = (duration * chain.sample_rate).round();
    if n < 1.0 || n > usize::MAX as f64 / 2.0 {
        return Err(Error::Config(format!("duration {duration} s gives {n} samples")));
    }
    Ok(n as usize)
}

/// Feed `duration` seconds of samples to `sink`, block by block.
pub fn stream_samples<F>(source: Source, chain: &DetectionChain, duration: f64, mut sink: F) -> Result<()>
where
    F: FnMut(&[f64]),
{
    let n = sample_count(chain, duration)?;
    let mut syn = Synthesizer::new(source, chain)?;
    let mut block = Vec::with_capacity(chain.block_len);
    let mut left = n;
    while left > 0 {
        syn.next_block(&mut block);
        let take = left.min(block.len());
        sink(&block[..take]);
        left -= take;
    }
    Ok(())
}

/// Whole time series in memory.
pub fn synth_timeseries(source: Source, chain: &DetectionChain, duration: f64) -> Result<Vec<f64>> {
    let n = sample_count(chain, duration)?;
    if n > MAX_IN_MEMORY_SAMPLES {
        return Err(Error::Config(format!(
            "{n} samples exceeds the in-memory limit of {MAX_IN_MEMORY_SAMPLES}; stream instead"
        )));
    }
    let mut out = Vec::with_capacity(n);
    stream_samples(source, chain, duration, |b| out.extend_from_slice(b))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(x: &[f64]) -> f64 {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
    }

    fn mean_gain2(chain: &DetectionChain, f: impl Fn(f64) -> f64) -> f64 {
        // Average of a power response over the FFT grid.
        let n = chain.block_len;
        let df = chain.sample_rate / n as f64;
        (0..n)
            .map(|k| {
                let fk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 } * df;
                f(fk)
            })
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn variance_matches_responses() {
        let chain = DetectionChain::default();
        let noise = QuadratureNoise::new(113.66, 0.0967).unwrap();
        for (src, r) in [
            (Source::shot(), 1.0),
            (Source::locked(noise, false), 0.0967),
            (Source::Dark, 0.0),
        ] {
            let x = synth_timeseries(src, &chain, 2e-3).unwrap();
            let expected =
                r * mean_gain2(&chain, |f| chain.pd_gain2(f)) + mean_gain2(&chain, |f| chain.circuit_gain2(f));
            let v = var(&x);
            let se = expected * (2.0 / x.len() as f64).sqrt();
            assert!((v - expected).abs() < 4.0 * se, "{src:?}: {v} vs {expected}");
        }
    }

    #[test]
    fn tone_adds_its_power() {
        let chain = DetectionChain {
            circuit_clearance_db: 80.0,
            ..DetectionChain::default()
        };
        let with = synth_timeseries(
            Source::Homodyne {
                noise: QuadratureNoise::vacuum(),
                lo_phase: LoPhase::Constant { theta: 0.0 },
                probe_tone: true,
            },
            &chain,
            1e-3,
        )
        .unwrap();
        let without = synth_timeseries(Source::shot(), &chain, 1e-3).unwrap();
        let a = chain.tone_amplitude();
        // Same seed stream differs by source, so compare variances.
        let diff = var(&with) - var(&without);
        assert!(
            (diff - a * a / 2.0).abs() < 0.05 * var(&without),
            "{diff} vs {}",
            a * a / 2.0
        );
    }

    #[test]
    fn deterministic_and_source_specific() {
        let chain = DetectionChain {
            block_len: 1024,
            ..DetectionChain::default()
        };
        let a = synth_timeseries(Source::shot(), &chain, 1e-5).unwrap();
        let b = synth_timeseries(Source::shot(), &chain, 1e-5).unwrap();
        assert_eq!(a, b);
        let c = synth_timeseries(Source::Dark, &chain, 1e-5).unwrap();
        assert_ne!(a, c);
        let d = synth_timeseries(Source::shot(), &DetectionChain { seed: 9, ..chain }, 1e-5).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn exact_length_and_streaming_agree() {
        let chain = DetectionChain {
            block_len: 256,
            ..DetectionChain::default()
        };
        let x = synth_timeseries(Source::shot(), &chain, 1000.0 / chain.sample_rate).unwrap();
        assert_eq!(x.len(), 1000);
        let mut y = Vec::new();
        stream_samples(Source::shot(), &chain, 1000.0 / chain.sample_rate, |b| {
            y.extend_from_slice(b)
        })
        .unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn scanned_variance_follows_lo_phase() {
        let chain = DetectionChain {
            circuit_clearance_db: 80.0,
            pd_bandwidth: 1e12,
            ..DetectionChain::default()
        };
        let noise = QuadratureNoise::new(4.0, 0.25).unwrap();
        let src = Source::Homodyne {
            noise,
            lo_phase: LoPhase::Scan {
                start: 0.0,
                rate: std::f64::consts::PI / 2.0 / 4e-3,
            },
            probe_tone: false,
        };
        let x = synth_timeseries(src, &chain, 4e-3).unwrap();
        let n = 20_000;
        assert!((var(&x[..n]) - 0.25).abs() < 0.02);
        assert!((var(&x[x.len() - n..]) - 4.0).abs() < 0.3);
    }

    #[test]
    fn rejects_bad_requests() {
        let chain = DetectionChain::default();
        assert!(synth_timeseries(Source::shot(), &chain, 0.0).is_err());
        assert!(matches!(
            synth_timeseries(Source::shot(), &chain, 1.0),
            Err(Error::Config(_))
        ));
        let bad = Source::Homodyne {
            noise: QuadratureNoise { anti: 1.0, sq: -1.0 },
            lo_phase: LoPhase::Constant { theta: 0.0 },
            probe_tone: false,
        };
        assert!(Synthesizer::new(bad, &chain).is_err());
    }
}
