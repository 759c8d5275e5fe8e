//! Anechoic delay-and-gain scenes.
//!
//! Noise and synthetic sources come from `ChaCha8Rng` seeded through
//! `SeedableRng::seed_from_u64`, with Gaussian samples drawn by
//! `rand_distr::StandardNormal`, so a seed reproduces the same samples on
//! every platform.

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Result, SimError};
use crate::audio_io::MultichannelWave;
use crate::stft::{ComplexSpectrogram, DEFAULT_FFT_SIZE};

/// Gains and integer delays from each source to each microphone, plus
/// spatially white sensor noise.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingScenario {
    /// `gains[k][n]`: source `k` to channel `n`.
    pub gains: Vec<Vec<f64>>,
    /// `delays[k][n]` in samples.
    pub delays: Vec<Vec<usize>>,
    /// Standard deviation of the additive noise on every channel.
    pub noise_level: f64,
    pub seed: u64,
    /// Largest accepted delay, keeping the narrowband instantaneous-mixture
    /// approximation valid for the analysis frame length.
    pub max_delay: usize,
}

impl MixingScenario {
    pub fn new(gains: Vec<Vec<f64>>, delays: Vec<Vec<usize>>, noise_level: f64, seed: u64) -> Result<Self> {
        let scenario = Self {
            gains,
            delays,
            noise_level,
            seed,
            max_delay: DEFAULT_FFT_SIZE / 4,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Random gains in `[0.5, 1]` and delays in `0..=max_random_delay`,
    /// drawn from `seed`.
    pub fn random(
        num_sources: usize,
        num_channels: usize,
        max_random_delay: usize,
        noise_level: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
        let gains = (0..num_sources)
            .map(|_| (0..num_channels).map(|_| rng.random_range(0.5..=1.0)).collect())
            .collect();
        let delays = (0..num_sources)
            .map(|_| (0..num_channels).map(|_| rng.random_range(0..=max_random_delay)).collect())
            .collect();
        Self::new(gains, delays, noise_level, seed)
    }

    pub fn num_sources(&self) -> usize {
        self.gains.len()
    }

    pub fn num_channels(&self) -> usize {
        self.gains.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.gains.len();
        if k == 0 {
            return Err(SimError::InvalidScenario("at least one source is required".into()));
        }
        let n = self.num_channels();
        if n == 0 {
            return Err(SimError::InvalidScenario("at least one channel is required".into()));
        }
        if self.delays.len() != k {
            return Err(SimError::InvalidScenario(format!(
                "{k} gain rows but {} delay rows",
                self.delays.len()
            )));
        }
        for (row, (g, d)) in self.gains.iter().zip(&self.delays).enumerate() {
            if g.len() != n || d.len() != n {
                return Err(SimError::InvalidScenario(format!(
                    "source {row} must list {n} gains and {n} delays"
                )));
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(SimError::InvalidScenario(format!("source {row} has a non-finite gain")));
            }
            if let Some(&delay) = d.iter().find(|&&d| d > self.max_delay) {
                return Err(SimError::DelayTooLarge {
                    delay,
                    max: self.max_delay,
                });
            }
        }
        if !(self.noise_level >= 0.0 && self.noise_level.is_finite()) {
            return Err(SimError::InvalidScenario(format!(
                "noise level must be finite and >= 0, got {}",
                self.noise_level
            )));
        }
        Ok(())
    }

    /// Noise-free image of source `k` at channel `n`, `len` samples long.
    pub fn source_image(&self, source: &[f64], k: usize, n: usize, len: usize) -> Vec<f64> {
        let gain = self.gains[k][n];
        let delay = self.delays[k][n];
        (0..len)
            .map(|i| {
                i.checked_sub(delay)
                    .and_then(|j| source.get(j))
                    .map_or(0.0, |&v| gain * v)
            })
            .collect()
    }
}

/// `x(f, t) = A(f) s(f, t)` with `mixing` shaped `freqs x channels x sources`.
pub fn mix_instantaneous(sources: &[Array2<Complex64>], mixing: &Array3<Complex64>) -> Result<ComplexSpectrogram> {
    let (freqs, channels, k) = mixing.dim();
    if sources.len() != k {
        return Err(SimError::DimensionMismatch(format!(
            "mixing matrices have {k} columns, {} sources given",
            sources.len()
        )));
    }
    if k == 0 {
        return Err(SimError::Empty("sources"));
    }
    if k > channels {
        return Err(SimError::DimensionMismatch(format!(
            "{k} sources exceed {channels} channels"
        )));
    }
    let frames = sources[0].ncols();
    if sources.iter().any(|s| s.dim() != (freqs, frames)) {
        return Err(SimError::DimensionMismatch("sources differ in shape from the mixing grid".into()));
    }
    let mut out = Array3::zeros((channels, freqs, frames));
    for f in 0..freqs {
        for n in 0..channels {
            for (j, s) in sources.iter().enumerate() {
                let a = mixing[[f, n, j]];
                for t in 0..frames {
                    out[[n, f, t]] += a * s[[f, t]];
                }
            }
        }
    }
    Ok(ComplexSpectrogram::new(out)?)
}

/// Renders the scenario in the time domain. Sources shorter than the longest
/// one are zero-padded; delayed samples past the end are dropped.
pub fn simulate_anechoic(sources: &[MultichannelWave], scenario: &MixingScenario) -> Result<MultichannelWave> {
    scenario.validate()?;
    if sources.len() != scenario.num_sources() {
        return Err(SimError::InvalidScenario(format!(
            "scenario describes {} sources, {} given",
            scenario.num_sources(),
            sources.len()
        )));
    }
    let sample_rate = sources[0].sample_rate();
    if sources.iter().any(|s| s.sample_rate() != sample_rate) {
        return Err(SimError::InvalidScenario("sources differ in sample rate".into()));
    }
    let len = sources.iter().map(MultichannelWave::len).max().unwrap_or(0);
    if len == 0 {
        return Err(SimError::Empty("source waves"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let channels = (0..scenario.num_channels())
        .map(|n| {
            let mut out = vec![0.0; len];
            for (k, src) in sources.iter().enumerate() {
                for (o, v) in out.iter_mut().zip(scenario.source_image(src.channel(0), k, n, len)) {
                    *o += v;
                }
            }
            for o in out.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *o += scenario.noise_level * z;
            }
            out
        })
        .collect();
    Ok(MultichannelWave::new(sample_rate, channels)?)
}

/// Seeded test signals, each scaled to `rms`. Source 0 is speech-like:
/// colored Gaussian noise gated by a piecewise-constant envelope with silent
/// gaps. The remaining sources are stationary colored noise, standing in for
/// background interference.
pub fn synthetic_sources(count: usize, len: usize, sample_rate: u32, rms: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_segment = (sample_rate as usize / 25).max(1);
    let max_segment = (sample_rate as usize / 4).max(min_segment + 1);
    let smooth = 1.0 - (-1.0 / (0.005 * sample_rate as f64).max(1.0)).exp();
    (0..count)
        .map(|k| {
            let pole: f64 = rng.random_range(-0.5..0.9);
            let envelope: Vec<f64> = if k == 0 {
                let mut steps = Vec::with_capacity(len);
                while steps.len() < len {
                    let seg = rng.random_range(min_segment..max_segment);
                    let level = if rng.random_bool(0.35) {
                        0.0
                    } else {
                        rng.random_range(0.2..1.0)
                    };
                    steps.extend(std::iter::repeat_n(level, seg));
                }
                steps.truncate(len);
                let mut env = 0.0;
                steps
                    .into_iter()
                    .map(|target| {
                        env += smooth * (target - env);
                        env
                    })
                    .collect()
            } else {
                vec![1.0; len]
            };
            let mut carrier = 0.0;
            let mut out: Vec<f64> = envelope
                .iter()
                .map(|&env| {
                    let z: f64 = rng.sample(StandardNormal);
                    carrier = pole * carrier + z;
                    env * carrier
                })
                .collect();
            let power = out.iter().map(|v| v * v).sum::<f64>() / len.max(1) as f64;
            if power > 0.0 {
                let scale = rms / power.sqrt();
                out.iter_mut().for_each(|v| *v *= scale);
            }
            out
        })
        .collect()
}
