use super::{Result, SimError};

/// Upper bound reported when the residual is negligible.
pub const SI_SDR_CAP_DB: f64 = 100.0;

/// Scale-invariant signal-to-distortion ratio in dB.
///
/// The estimate is projected onto the target; the projection counts as
/// signal and the remainder as distortion.
pub fn si_sdr(estimate: &[f64], target: &[f64]) -> Result<f64> {
    if estimate.len() != target.len() {
        return Err(SimError::LengthMismatch(estimate.len(), target.len()));
    }
    let target_energy: f64 = target.iter().map(|v| v * v).sum();
    if target_energy == 0.0 {
        return Err(SimError::ZeroTarget);
    }
    let dot: f64 = estimate.iter().zip(target).map(|(e, t)| e * t).sum();
    let a = dot / target_energy;
    let mut signal = 0.0;
    let mut error = 0.0;
    for (e, t) in estimate.iter().zip(target) {
        let s = a * t;
        signal += s * s;
        error += (e - s) * (e - s);
    }
    if error <= 1e-20 * signal {
        return Ok(SI_SDR_CAP_DB);
    }
    Ok((10.0 * (signal / error).log10()).min(SI_SDR_CAP_DB))
}
