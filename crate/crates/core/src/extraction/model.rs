//! Source models linking the reference magnitude to the extracted target,
//! and the negative log-likelihood terms each one minimizes.
//!
//! Only the filter-dependent part of each negative log-likelihood is
//! evaluated; terms that are constant in the extraction filter are dropped.

use ndarray::Array2;
use num_complex::Complex64;

use super::reference::ReferenceMagnitude;
use super::{Result, SibfError};

pub const DEFAULT_BETA: f64 = 8.0;
pub const DEFAULT_ALPHA: f64 = 100.0;
pub const DEFAULT_BS_ITERATIONS: usize = 10;

/// Time-frequency-varying variance Gaussian model: variance `r^beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvParams {
    pub beta: f64,
}

impl Default for TvParams {
    fn default() -> Self {
        Self { beta: DEFAULT_BETA }
    }
}

/// Bivariate spherical Laplacian model over `sqrt(alpha r^2 + |y|^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsParams {
    pub alpha: f64,
    pub iterations: usize,
    /// Stop once the relative objective change drops below this. Zero
    /// disables early stopping.
    pub early_stop_tol: f64,
}

impl Default for BsParams {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            iterations: DEFAULT_BS_ITERATIONS,
            early_stop_tol: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceModelConfig {
    TvGaussian(TvParams),
    BsLaplacian(BsParams),
}

impl Default for SourceModelConfig {
    fn default() -> Self {
        Self::TvGaussian(TvParams::default())
    }
}

impl SourceModelConfig {
    pub fn tv(beta: f64) -> Result<Self> {
        let cfg = Self::TvGaussian(TvParams { beta });
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn bs(alpha: f64, iterations: usize) -> Result<Self> {
        let cfg = Self::BsLaplacian(BsParams {
            alpha,
            iterations,
            early_stop_tol: 0.0,
        });
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SibfError::InvalidParameter(msg));
        match *self {
            Self::TvGaussian(TvParams { beta }) => {
                if !(beta >= 0.0 && beta.is_finite()) {
                    return bad(format!("beta must be finite and >= 0, got {beta}"));
                }
            }
            Self::BsLaplacian(BsParams {
                alpha,
                iterations,
                early_stop_tol,
            }) => {
                if !(alpha >= 0.0 && alpha.is_finite()) {
                    return bad(format!("alpha must be finite and >= 0, got {alpha}"));
                }
                if iterations == 0 {
                    return bad("iterations must be at least 1".into());
                }
                if !(early_stop_tol >= 0.0 && early_stop_tol.is_finite()) {
                    return bad(format!("early stop tolerance must be >= 0, got {early_stop_tol}"));
                }
            }
        }
        Ok(())
    }

    /// Short model tag used in reports: `tv` or `bs`.
    pub fn name(&self) -> &'static str {
        match self {
            Self::TvGaussian(_) => "tv",
            Self::BsLaplacian(_) => "bs",
        }
    }
}

fn check_dims(y: &Array2<Complex64>, r: &ReferenceMagnitude) -> Result<()> {
    if y.dim() != r.values().dim() {
        return Err(SibfError::DimensionMismatch(format!(
            "signal is {:?}, reference is {:?}",
            y.dim(),
            r.values().dim()
        )));
    }
    if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SibfError::NonFinite("extracted signal".into()));
    }
    Ok(())
}

fn sum_of_frame_means(freqs: usize, frames: usize, term: impl Fn(usize, usize) -> f64) -> f64 {
    (0..freqs)
        .map(|f| (0..frames).map(|t| term(f, t)).sum::<f64>() / frames as f64)
        .sum()
}

/// `sum_f < |y(f,t)|^2 / r(f,t)^beta >_t`
pub fn tv_objective(y: &Array2<Complex64>, r: &ReferenceMagnitude, beta: f64) -> Result<f64> {
    check_dims(y, r)?;
    if !beta.is_finite() {
        return Err(SibfError::NonFinite("beta".into()));
    }
    let rv = r.values();
    let (freqs, frames) = y.dim();
    let value = sum_of_frame_means(freqs, frames, |f, t| {
        y[[f, t]].norm_sqr() / rv[[f, t]].powf(beta)
    });
    if value.is_finite() {
        Ok(value)
    } else {
        Err(SibfError::NonFinite("objective".into()))
    }
}

/// `sum_f < sqrt(alpha r(f,t)^2 + |y(f,t)|^2) >_t`
pub fn bs_objective(y: &Array2<Complex64>, r: &ReferenceMagnitude, alpha: f64) -> Result<f64> {
    check_dims(y, r)?;
    if !alpha.is_finite() {
        return Err(SibfError::NonFinite("alpha".into()));
    }
    let rv = r.values();
    let (freqs, frames) = y.dim();
    Ok(sum_of_frame_means(freqs, frames, |f, t| {
        (alpha * rv[[f, t]] * rv[[f, t]] + y[[f, t]].norm_sqr()).sqrt()
    }))
}

/// Gap between the quadratic upper bound with auxiliary value `b` and the
/// spherical Laplacian term it majorizes:
/// `(alpha r^2 + |y|^2) / (2b) + b/2 - sqrt(alpha r^2 + |y|^2)`.
///
/// Nonnegative for every `b > 0`, zero exactly at `b = sqrt(alpha r^2 + |y|^2)`.
pub fn majorizer_gap(y: Complex64, r: f64, alpha: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(SibfError::InvalidParameter(format!(
            "auxiliary variable must be positive, got {b}"
        )));
    }
    let q = alpha * r * r + y.norm_sqr();
    let root = q.sqrt();
    // (q/(2b) + b/2 - root) = (root - b)^2 / (2b), computed in the
    // cancellation-free form.
    let d = root - b;
    Ok(d * d / (2.0 * b))
}
