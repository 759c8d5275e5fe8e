use ndarray::{s, Array2, Array3};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{Result, SibfError};
use crate::linalg::{hermitian_eig, weighted_covariance};
use crate::stft::ComplexSpectrogram;

/// Eigenvalues below this fraction of the largest one are raised to it.
pub const EIGEN_FLOOR: f64 = 1e-9;

/// Per-frequency PCA whitening matrices `P(f) = D^{-1/2} E^H`.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningTransform {
    /// Shape `freqs x channels x channels`.
    matrices: Array3<Complex64>,
    eigen_floor: f64,
    floored: Vec<bool>,
}

impl WhiteningTransform {
    pub fn from_matrices(matrices: Array3<Complex64>) -> Result<Self> {
        let (f, r, c) = matrices.dim();
        if f == 0 || r == 0 || r != c {
            return Err(SibfError::DimensionMismatch(format!(
                "whitening matrices must be F x N x N, got {f}x{r}x{c}"
            )));
        }
        Ok(Self {
            matrices,
            eigen_floor: 0.0,
            floored: vec![false; f],
        })
    }

    pub fn num_freqs(&self) -> usize {
        self.matrices.dim().0
    }

    pub fn num_channels(&self) -> usize {
        self.matrices.dim().1
    }

    pub fn matrix(&self, freq: usize) -> ndarray::ArrayView2<'_, Complex64> {
        self.matrices.index_axis(ndarray::Axis(0), freq)
    }

    pub fn eigen_floor(&self) -> f64 {
        self.eigen_floor
    }

    /// Whether any eigenvalue was raised to the floor at `freq`.
    pub fn was_floored(&self, freq: usize) -> bool {
        self.floored[freq]
    }
}

pub fn compute_whitening(x: &ComplexSpectrogram) -> Result<WhiteningTransform> {
    let n = x.num_channels();
    let frames = x.num_frames();
    if frames < n {
        return Err(SibfError::TooFewFrames {
            frames,
            channels: n,
        });
    }
    let ones = vec![1.0; frames];
    let data = x.data();
    let per_freq = (0..x.num_freqs())
        .into_par_iter()
        .map(|f| {
            let cov = weighted_covariance((0..frames).map(|t| data.slice(s![.., f, t])), &ones)
                .map_err(|source| SibfError::Linalg { freq: f, source })?;
            let eig = hermitian_eig(&cov).map_err(|source| SibfError::Linalg { freq: f, source })?;
            let max = eig.eigenvalues[0];
            if !(max > 0.0) {
                return Err(SibfError::SilentFrequency { freq: f });
            }
            let floor = EIGEN_FLOOR * max;
            let mut floored = false;
            let mut p = Array2::zeros((n, n));
            for i in 0..n {
                let lambda = if eig.eigenvalues[i] < floor {
                    floored = true;
                    floor
                } else {
                    eig.eigenvalues[i]
                };
                let scale = 1.0 / lambda.sqrt();
                for j in 0..n {
                    p[[i, j]] = eig.eigenvectors[[j, i]].conj() * scale;
                }
            }
            Ok((p, floored))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut matrices = Array3::zeros((x.num_freqs(), n, n));
    let mut floored = Vec::with_capacity(per_freq.len());
    for (f, (p, fl)) in per_freq.into_iter().enumerate() {
        matrices.index_axis_mut(ndarray::Axis(0), f).assign(&p);
        floored.push(fl);
    }
    Ok(WhiteningTransform {
        matrices,
        eigen_floor: EIGEN_FLOOR,
        floored,
    })
}

/// `u(f, t) = P(f) x(f, t)`.
pub fn apply_whitening(p: &WhiteningTransform, x: &ComplexSpectrogram) -> Result<ComplexSpectrogram> {
    let (n, freqs, frames) = x.data().dim();
    if p.num_channels() != n || p.num_freqs() != freqs {
        return Err(SibfError::DimensionMismatch(format!(
            "whitening is {}x{}x{}, observation has {n} channels and {freqs} bins",
            p.num_freqs(),
            p.num_channels(),
            p.num_channels()
        )));
    }
    let data = x.data();
    let mut out = Array3::zeros((n, freqs, frames));
    for f in 0..freqs {
        let pf = p.matrix(f);
        let xf = data.slice(s![.., f, ..]);
        out.slice_mut(s![.., f, ..]).assign(&pf.dot(&xf));
    }
    Ok(ComplexSpectrogram::new(out)?)
}
