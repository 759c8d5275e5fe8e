use ndarray::Array2;

use super::{Result, SibfError};
use crate::audio_io::MagnitudeMatrix;

/// Lower bound applied to every reference value before it is used as a
/// divisor.
pub const DEFAULT_REFERENCE_FLOOR: f64 = 1e-5;

/// Reference magnitudes `r(f, t)` ready for filter estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceMagnitude {
    values: Array2<f64>,
    normalized: bool,
    floor: f64,
}

impl ReferenceMagnitude {
    /// Uses the magnitudes as given, only clamping them to `floor`.
    pub fn unnormalized(r: &MagnitudeMatrix, floor: f64) -> Result<Self> {
        check_floor(floor)?;
        Ok(Self {
            values: r.values().mapv(|v| v.max(floor)),
            normalized: false,
            floor,
        })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn num_freqs(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_frames(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }
}

fn check_floor(floor: f64) -> Result<()> {
    if floor > 0.0 && floor.is_finite() {
        Ok(())
    } else {
        Err(SibfError::InvalidParameter(format!(
            "reference floor must be positive and finite, got {floor}"
        )))
    }
}

/// Scales each frequency row to unit mean square over frames, then clamps
/// every value to at least `floor`. Rows that are entirely zero are left as
/// they are before clamping.
pub fn normalize_reference(r: &MagnitudeMatrix, floor: f64) -> Result<ReferenceMagnitude> {
    check_floor(floor)?;
    let mut values = r.values().clone();
    let frames = values.ncols() as f64;
    for mut row in values.rows_mut() {
        let mean_sq = row.iter().map(|v| v * v).sum::<f64>() / frames;
        if mean_sq > 0.0 {
            let rms = mean_sq.sqrt();
            row.mapv_inplace(|v| v / rms);
        }
        row.mapv_inplace(|v| v.max(floor));
    }
    Ok(ReferenceMagnitude {
        values,
        normalized: true,
        floor,
    })
}
