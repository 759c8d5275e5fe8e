use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use super::{Result, SibfError};

/// Bins whose mean output power is at or below this are zeroed.
pub const SILENT_POWER: f64 = 1e-30;

/// Projection back onto an observation channel.
///
/// Per bin the least-squares gain `g(f) = <x_m conj(y)>_t / <|y|^2>_t` is
/// applied to `y`, restoring the scale and phase the target has at the
/// chosen microphone.
pub fn rescale(y: ArrayView2<'_, Complex64>, x_m: ArrayView2<'_, Complex64>) -> Result<Array2<Complex64>> {
    if y.dim() != x_m.dim() {
        return Err(SibfError::DimensionMismatch(format!(
            "extracted signal is {:?}, observation channel is {:?}",
            y.dim(),
            x_m.dim()
        )));
    }
    let frames = y.ncols() as f64;
    let mut out = Array2::zeros(y.dim());
    for ((yf, xf), mut of) in y.rows().into_iter().zip(x_m.rows()).zip(out.rows_mut()) {
        let power = yf.iter().map(|z| z.norm_sqr()).sum::<f64>() / frames;
        if power <= SILENT_POWER {
            continue;
        }
        let cross = yf
            .iter()
            .zip(xf.iter())
            .map(|(yv, xv)| xv * yv.conj())
            .sum::<Complex64>()
            / frames;
        let gain = cross / power;
        of.assign(&yf.mapv(|z| gain * z));
    }
    Ok(out)
}
