//! Shared generators and brute-force oracles for the integration suites.
#![allow(dead_code)]

use std::f64::consts::PI;

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sibf::extraction::{apply_whitening, compute_whitening};
use sibf::{ComplexSpectrogram, MagnitudeMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Circular complex Gaussian with unit variance.
pub fn cgauss(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(gauss(rng), gauss(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_signal(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| gauss(rng)).collect()
}

/// Mixture of `n` nonstationary sources through a random complex matrix per
/// bin, with a little sensor noise. Channels get deliberately unequal power
/// so that whitening has something to undo.
pub fn random_observation(rng: &mut ChaCha8Rng, n: usize, freqs: usize, frames: usize) -> ComplexSpectrogram {
    let mut data = Array3::zeros((n, freqs, frames));
    for f in 0..freqs {
        let mixing: Vec<Complex64> = (0..n * n).map(|_| cgauss(rng)).collect();
        let channel_gain: Vec<f64> = (0..n).map(|_| (0.7 * gauss(rng)).exp()).collect();
        for t in 0..frames {
            let sources: Vec<Complex64> = (0..n).map(|_| cgauss(rng) * (1.5 * gauss(rng)).exp()).collect();
            for i in 0..n {
                let mut v = cgauss(rng) * 1e-3;
                for (k, s) in sources.iter().enumerate() {
                    v += mixing[i * n + k] * s;
                }
                data[[i, f, t]] = v * channel_gain[i];
            }
        }
    }
    ComplexSpectrogram::new(data).unwrap()
}

pub fn whitened_observation(rng: &mut ChaCha8Rng, n: usize, freqs: usize, frames: usize) -> ComplexSpectrogram {
    let x = random_observation(rng, n, freqs, frames);
    let p = compute_whitening(&x).unwrap();
    apply_whitening(&p, &x).unwrap()
}

/// Log-normal magnitudes, strictly positive.
pub fn random_magnitudes(rng: &mut ChaCha8Rng, freqs: usize, frames: usize) -> MagnitudeMatrix {
    let values = Array2::from_shape_fn((freqs, frames), |_| (0.7 * gauss(rng)).exp());
    MagnitudeMatrix::new(values).unwrap()
}

/// `< u u^H / weight >_t` written out entry by entry.
pub fn direct_covariance(u: &ComplexSpectrogram, freq: usize, weights: &[f64]) -> Array2<Complex64> {
    let n = u.num_channels();
    let frames = u.num_frames();
    let d = u.data();
    Array2::from_shape_fn((n, n), |(a, b)| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, &w) in weights.iter().enumerate() {
            acc += d[[a, freq, t]] * d[[b, freq, t]].conj() / w;
        }
        acc / frames as f64
    })
}

/// `sum_k x[k] e^{-2 pi i j k / n}` for every `j`, in O(n^2).
pub fn direct_dft(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|j| {
            x.iter()
                .enumerate()
                .map(|(k, &v)| {
                    // Reduce the phase index first to keep the angle small.
                    let angle = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
                    Complex64::from_polar(v, angle)
                })
                .sum()
        })
        .collect()
}

/// Minimum of `w C w^H` over unit rows `w = (cos a, sin a e^{i phi})` on a
/// `steps x steps` grid. Every unit row in two dimensions equals one of these
/// up to a global phase, which does not change the quadratic form.
pub fn grid_minimum_2x2(c: &Array2<Complex64>, steps: usize) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..steps {
        let a = 0.5 * PI * i as f64 / (steps - 1) as f64;
        let (sa, ca) = a.sin_cos();
        for j in 0..steps {
            let phi = 2.0 * PI * j as f64 / steps as f64;
            let cross = c[[0, 1]] * Complex64::from_polar(ca * sa, -phi);
            let value = c[[0, 0]].re * ca * ca + c[[1, 1]].re * sa * sa + 2.0 * cross.re;
            best = best.min(value);
        }
    }
    best
}

pub fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}
