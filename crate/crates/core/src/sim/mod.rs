//! Synthetic scenes, reference construction and evaluation.

use thiserror::Error;

use crate::audio_io::AudioError;
use crate::extraction::SibfError;
use crate::stft::StftError;

pub mod metrics;
pub mod reference;
pub mod scene;
pub mod sweep;

pub use metrics::si_sdr;
pub use reference::{degrade_reference, oracle_reference};
pub use scene::{mix_instantaneous, simulate_anechoic, synthetic_sources, MixingScenario};
pub use sweep::{run_sweep, MetricsReport, MetricsRow, Scene, SweepSetup};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("delay {delay} exceeds the maximum of {max} samples")]
    DelayTooLarge { delay: usize, max: usize },
    #[error("length mismatch: {0} vs {1} samples")]
    LengthMismatch(usize, usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("target signal is zero")]
    ZeroTarget,
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Stft(#[from] StftError),
    #[error(transparent)]
    Extraction(#[from] SibfError),
    #[error("row {model} param={param} iterations={iterations} degradation={degradation}: {source}")]
    Row {
        model: &'static str,
        param: f64,
        iterations: usize,
        degradation: f64,
        #[source]
        source: Box<SimError>,
    },
}

pub type Result<T> = std::result::Result<T, SimError>;
