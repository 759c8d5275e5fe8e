//! Short-time Fourier transform with exact weighted overlap-add inversion.
//!
//! Frames use a periodic Hann window. The signal is zero-padded by
//! `fft_size - hop` samples on both sides so that every input sample is
//! covered by `fft_size / hop` full frames. Only the one-sided spectrum
//! (`fft_size / 2 + 1` bins) is stored.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Array3, ArrayView2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::audio_io::MultichannelWave;

pub const DEFAULT_FFT_SIZE: usize = 1024;
pub const DEFAULT_HOP: usize = 256;

#[derive(Debug, Error, PartialEq)]
pub enum StftError {
    #[error("fft size {0} is not a power of two")]
    FftSizeNotPowerOfTwo(usize),
    #[error("hop {hop} must be positive, smaller than and divide the fft size {fft_size}")]
    InvalidHop { fft_size: usize, hop: usize },
    #[error("empty wave")]
    EmptyWave,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid spectrogram: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowKind {
    #[default]
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftParams {
    fft_size: usize,
    hop: usize,
    window: WindowKind,
}

impl Default for StftParams {
    fn default() -> Self {
        Self {
            fft_size: DEFAULT_FFT_SIZE,
            hop: DEFAULT_HOP,
            window: WindowKind::Hann,
        }
    }
}

impl StftParams {
    pub fn new(fft_size: usize, hop: usize) -> Result<Self, StftError> {
        if fft_size < 2 || !fft_size.is_power_of_two() {
            return Err(StftError::FftSizeNotPowerOfTwo(fft_size));
        }
        if hop == 0 || hop >= fft_size || fft_size % hop != 0 {
            return Err(StftError::InvalidHop { fft_size, hop });
        }
        Ok(Self {
            fft_size,
            hop,
            window: WindowKind::Hann,
        })
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn window_kind(&self) -> WindowKind {
        self.window
    }

    pub fn num_freqs(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Zero padding added to each side of the signal.
    pub fn pad(&self) -> usize {
        self.fft_size - self.hop
    }

    /// Number of frames produced for a signal of `len` samples.
    pub fn num_frames(&self, len: usize) -> usize {
        (len + self.pad()).div_ceil(self.hop)
    }

    pub fn window(&self) -> Vec<f64> {
        match self.window {
            WindowKind::Hann => hann_periodic(self.fft_size),
        }
    }
}

pub fn hann_periodic(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

/// Complex time-frequency data laid out as `channels x freqs x frames`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    data: Array3<Complex64>,
}

impl ComplexSpectrogram {
    pub fn new(data: Array3<Complex64>) -> Result<Self, StftError> {
        let (n, f, t) = data.dim();
        if n == 0 || f == 0 || t == 0 {
            return Err(StftError::Invalid(format!(
                "all dimensions must be positive, got {n}x{f}x{t}"
            )));
        }
        Ok(Self { data })
    }

    /// Builds a spectrogram from per-channel `freqs x frames` matrices.
    pub fn from_channels(channels: &[Array2<Complex64>]) -> Result<Self, StftError> {
        let first = channels
            .first()
            .ok_or_else(|| StftError::Invalid("no channels".into()))?;
        let (f, t) = first.dim();
        let mut data = Array3::zeros((channels.len(), f, t));
        for (i, ch) in channels.iter().enumerate() {
            if ch.dim() != (f, t) {
                return Err(StftError::DimensionMismatch(format!(
                    "channel {i} is {:?}, expected {:?}",
                    ch.dim(),
                    (f, t)
                )));
            }
            data.index_axis_mut(Axis(0), i).assign(ch);
        }
        Self::new(data)
    }

    pub fn num_channels(&self) -> usize {
        self.data.dim().0
    }

    pub fn num_freqs(&self) -> usize {
        self.data.dim().1
    }

    pub fn num_frames(&self) -> usize {
        self.data.dim().2
    }

    pub fn data(&self) -> &Array3<Complex64> {
        &self.data
    }

    pub fn channel(&self, index: usize) -> ArrayView2<'_, Complex64> {
        self.data.index_axis(Axis(0), index)
    }

    pub fn into_data(self) -> Array3<Complex64> {
        self.data
    }
}

fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_forward(n)
}

fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_inverse(n)
}

/// One-sided STFT of a single channel, shape `freqs x frames`.
pub fn stft_channel(samples: &[f64], params: &StftParams) -> Result<Array2<Complex64>, StftError> {
    if samples.is_empty() {
        return Err(StftError::EmptyWave);
    }
    let n = params.fft_size();
    let hop = params.hop();
    let pad = params.pad();
    let frames = params.num_frames(samples.len());
    let bins = params.num_freqs();
    let window = params.window();
    let fft = forward_plan(n);

    let mut out = Array2::zeros((bins, frames));
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for t in 0..frames {
        let start = t * hop;
        for (i, slot) in buf.iter_mut().enumerate() {
            // Padded index start + i maps to input index start + i - pad.
            let v = (start + i)
                .checked_sub(pad)
                .and_then(|k| samples.get(k))
                .copied()
                .unwrap_or(0.0);
            *slot = Complex64::new(v * window[i], 0.0);
        }
        fft.process(&mut buf);
        for k in 0..bins {
            out[[k, t]] = buf[k];
        }
    }
    Ok(out)
}

/// Inverse of [`stft_channel`]: weighted overlap-add with a Hann synthesis
/// window, normalized per sample by the summed squared window.
pub fn istft_channel(
    spec: ArrayView2<'_, Complex64>,
    params: &StftParams,
    out_len: usize,
) -> Result<Vec<f64>, StftError> {
    let n = params.fft_size();
    let hop = params.hop();
    let pad = params.pad();
    let (bins, frames) = spec.dim();
    if bins != params.num_freqs() {
        return Err(StftError::DimensionMismatch(format!(
            "spectrogram has {bins} bins, fft size {n} needs {}",
            params.num_freqs()
        )));
    }
    if frames == 0 {
        return Err(StftError::DimensionMismatch("spectrogram has no frames".into()));
    }
    let window = params.window();
    let ifft = inverse_plan(n);
    let total = (frames - 1) * hop + n;
    let mut acc = vec![0.0; total];
    let mut norm = vec![0.0; total];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let scale = 1.0 / n as f64;
    for t in 0..frames {
        buf[0] = Complex64::new(spec[[0, t]].re, 0.0);
        for k in 1..bins {
            buf[k] = spec[[k, t]];
        }
        buf[n / 2] = Complex64::new(spec[[n / 2, t]].re, 0.0);
        for k in 1..n / 2 {
            buf[n - k] = buf[k].conj();
        }
        ifft.process(&mut buf);
        let start = t * hop;
        for i in 0..n {
            acc[start + i] += buf[i].re * scale * window[i];
            norm[start + i] += window[i] * window[i];
        }
    }
    let out = (0..out_len)
        .map(|i| {
            let p = i + pad;
            match (acc.get(p), norm.get(p)) {
                (Some(&a), Some(&w)) if w > 1e-10 => a / w,
                _ => 0.0,
            }
        })
        .collect();
    Ok(out)
}

pub fn stft(wave: &MultichannelWave, params: &StftParams) -> Result<ComplexSpectrogram, StftError> {
    if wave.is_empty() {
        return Err(StftError::EmptyWave);
    }
    let channels = wave
        .channels()
        .par_iter()
        .map(|c| stft_channel(c, params))
        .collect::<Result<Vec<_>, _>>()?;
    ComplexSpectrogram::from_channels(&channels)
}

pub fn istft(
    spec: &ComplexSpectrogram,
    params: &StftParams,
    out_len: usize,
    sample_rate: u32,
) -> Result<MultichannelWave, StftError> {
    let channels = (0..spec.num_channels())
        .into_par_iter()
        .map(|ch| istft_channel(spec.channel(ch), params, out_len))
        .collect::<Result<Vec<_>, _>>()?;
    MultichannelWave::new(sample_rate, channels).map_err(|e| StftError::Invalid(e.to_string()))
}
