//! Reference-guided extraction of a single target from a multichannel
//! spectrogram.
//!
//! The pipeline whitens the observation per frequency bin, estimates one
//! unit-norm extraction row per bin under a source model that couples the
//! extracted magnitude with a reference magnitude, applies it, and finally
//! projects the result back onto a chosen microphone.

use std::fmt;

use ndarray::Array2;
use num_complex::Complex64;
use thiserror::Error;

use crate::audio_io::MagnitudeMatrix;
use crate::linalg::LinalgError;
use crate::stft::{ComplexSpectrogram, StftError};

pub mod filter;
pub mod model;
pub mod reference;
pub mod rescale;
pub mod whitening;

pub use filter::{apply_filter, bin_covariance, estimate_filter_bs, estimate_filter_tv, BsIterationTrace, ExtractionFilter};
pub use model::{bs_objective, majorizer_gap, tv_objective, BsParams, SourceModelConfig, TvParams};
pub use reference::{normalize_reference, ReferenceMagnitude, DEFAULT_REFERENCE_FLOOR};
pub use rescale::rescale;
pub use whitening::{apply_whitening, compute_whitening, WhiteningTransform};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Whitening,
    Reference,
    FilterEstimation,
    Filtering,
    Rescaling,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Whitening => "whitening",
            Stage::Reference => "reference normalization",
            Stage::FilterEstimation => "filter estimation",
            Stage::Filtering => "filtering",
            Stage::Rescaling => "rescaling",
        })
    }
}

#[derive(Debug, Error)]
pub enum SibfError {
    #[error("frequency bin {freq}: {source}")]
    Linalg {
        freq: usize,
        #[source]
        source: LinalgError,
    },
    #[error("frequency bin {freq} has zero energy on every channel")]
    SilentFrequency { freq: usize },
    #[error("{frames} frames is fewer than {channels} channels")]
    TooFewFrames { frames: usize, channels: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error(transparent)]
    Stft(#[from] StftError),
    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<SibfError>,
    },
}

impl SibfError {
    fn at(stage: Stage) -> impl FnOnce(SibfError) -> SibfError {
        move |e| SibfError::Stage {
            stage,
            source: Box::new(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, SibfError>;

/// Everything produced by one run of [`extract`].
#[derive(Debug, Clone)]
pub struct Extraction {
    /// Rescaled target spectrogram, `freqs x frames`.
    pub target: Array2<Complex64>,
    pub filter: ExtractionFilter,
    /// Only present for the spherical Laplacian model.
    pub trace: Option<BsIterationTrace>,
    /// The minimized objective evaluated at the final filter.
    pub objective: f64,
}

/// Runs the full pipeline against reference microphone `ref_mic`.
pub fn extract(
    x: &ComplexSpectrogram,
    r: &MagnitudeMatrix,
    model: &SourceModelConfig,
    ref_mic: usize,
) -> Result<Extraction> {
    model.validate()?;
    if ref_mic >= x.num_channels() {
        return Err(SibfError::InvalidParameter(format!(
            "reference microphone {ref_mic} out of range for {} channels",
            x.num_channels()
        )));
    }
    if (r.num_freqs(), r.num_frames()) != (x.num_freqs(), x.num_frames()) {
        return Err(SibfError::DimensionMismatch(format!(
            "reference is {}x{}, observation is {}x{}",
            r.num_freqs(),
            r.num_frames(),
            x.num_freqs(),
            x.num_frames()
        )));
    }

    let p = compute_whitening(x).map_err(SibfError::at(Stage::Whitening))?;
    let u = apply_whitening(&p, x).map_err(SibfError::at(Stage::Whitening))?;
    let reference = normalize_reference(r, DEFAULT_REFERENCE_FLOOR).map_err(SibfError::at(Stage::Reference))?;

    let (filter, trace) = match model {
        SourceModelConfig::TvGaussian(tv) => (
            estimate_filter_tv(&u, &reference, tv.beta).map_err(SibfError::at(Stage::FilterEstimation))?,
            None,
        ),
        SourceModelConfig::BsLaplacian(bs) => {
            let (w, trace) =
                estimate_filter_bs(&u, &reference, bs).map_err(SibfError::at(Stage::FilterEstimation))?;
            (w, Some(trace))
        }
    };

    let y = apply_filter(&filter, &u).map_err(SibfError::at(Stage::Filtering))?;
    let objective = match (model, &trace) {
        (_, Some(trace)) => *trace.objectives.last().expect("nonempty trace"),
        (SourceModelConfig::TvGaussian(tv), None) => {
            tv_objective(&y, &reference, tv.beta).map_err(SibfError::at(Stage::FilterEstimation))?
        }
        (SourceModelConfig::BsLaplacian(_), None) => unreachable!("bs always yields a trace"),
    };
    let target = rescale(y.view(), x.channel(ref_mic)).map_err(SibfError::at(Stage::Rescaling))?;

    Ok(Extraction {
        target,
        filter,
        trace,
        objective,
    })
}
