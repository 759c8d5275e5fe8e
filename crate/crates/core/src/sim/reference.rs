use super::{Result, SimError};
use crate::audio_io::MagnitudeMatrix;
use crate::stft::{stft_channel, StftParams};

/// Magnitude spectrogram of the clean target.
pub fn oracle_reference(target: &[f64], params: &StftParams) -> Result<MagnitudeMatrix> {
    if target.is_empty() {
        return Err(SimError::Empty("target wave"));
    }
    let spec = stft_channel(target, params)?;
    Ok(MagnitudeMatrix::new(spec.mapv(|z| z.norm()))?)
}

/// Magnitude spectrogram of `target + level * interference`: a reference
/// that still carries some of the interference, as an imperfect enhancer
/// would leave it.
pub fn degrade_reference(
    target: &[f64],
    interference: &[f64],
    level: f64,
    params: &StftParams,
) -> Result<MagnitudeMatrix> {
    if target.len() != interference.len() {
        return Err(SimError::LengthMismatch(target.len(), interference.len()));
    }
    if !(level >= 0.0 && level.is_finite()) {
        return Err(SimError::InvalidScenario(format!(
            "degradation level must be finite and >= 0, got {level}"
        )));
    }
    let contaminated: Vec<f64> = target
        .iter()
        .zip(interference)
        .map(|(s, n)| s + level * n)
        .collect();
    oracle_reference(&contaminated, params)
}
