//! Reference-guided target source extraction for microphone arrays.
//!
//! A rough magnitude spectrogram of the wanted source steers a linear,
//! per-frequency extraction filter estimated by maximum likelihood after
//! whitening. The crate bundles the numerical core with WAV and matrix I/O,
//! an STFT, a synthetic scene simulator, SI-SDR scoring and a command-line
//! front end.

pub mod audio_io;
pub mod cli;
pub mod extraction;
pub mod linalg;
pub mod sim;
pub mod stft;

pub use audio_io::{MagnitudeMatrix, MultichannelWave};
pub use extraction::{extract, Extraction, SourceModelConfig};
pub use stft::{ComplexSpectrogram, StftParams};
