//! Extraction-filter estimation and application.
//!
//! Both source models reduce each update to the same step: build a
//! reference-weighted covariance of the whitened observation in one
//! frequency bin and take its minimum-eigenvalue eigenvector as the filter.

use ndarray::{s, Array1, Array2};
use num_complex::Complex64;
use rayon::prelude::*;

use super::model::{bs_objective, BsParams, SourceModelConfig, TvParams};
use super::reference::ReferenceMagnitude;
use super::{Result, SibfError};
use crate::linalg::{min_eigvec_row, weighted_covariance, HermitianMatrix};
use crate::stft::ComplexSpectrogram;

/// One unit-norm row `w(f)` per frequency bin, stored as `freqs x channels`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionFilter {
    rows: Array2<Complex64>,
}

impl ExtractionFilter {
    /// Wraps rows as given; each row is expected to have unit norm.
    pub fn from_rows(rows: Array2<Complex64>) -> Result<Self> {
        if rows.nrows() == 0 || rows.ncols() == 0 {
            return Err(SibfError::DimensionMismatch("empty filter".into()));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &Array2<Complex64> {
        &self.rows
    }

    pub fn row(&self, freq: usize) -> ndarray::ArrayView1<'_, Complex64> {
        self.rows.row(freq)
    }

    pub fn num_freqs(&self) -> usize {
        self.rows.nrows()
    }

    pub fn num_channels(&self) -> usize {
        self.rows.ncols()
    }
}

/// Objective values recorded by the auxiliary-function iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct BsIterationTrace {
    /// `bs_objective` of the filter produced by each iteration.
    pub objectives: Vec<f64>,
    /// Auxiliary variables `b(f, t)` used by the final iteration.
    pub final_auxiliary: Option<Array2<f64>>,
}

impl BsIterationTrace {
    pub fn iterations(&self) -> usize {
        self.objectives.len()
    }
}

fn check_dims(u: &ComplexSpectrogram, r: &ReferenceMagnitude) -> Result<()> {
    if (u.num_freqs(), u.num_frames()) != r.values().dim() {
        return Err(SibfError::DimensionMismatch(format!(
            "observation is {}x{} per channel, reference is {:?}",
            u.num_freqs(),
            u.num_frames(),
            r.values().dim()
        )));
    }
    Ok(())
}

/// `< u(f,t) u(f,t)^H / weight(t) >_t` for one bin.
pub fn bin_covariance(u: &ComplexSpectrogram, freq: usize, weights: &[f64]) -> Result<HermitianMatrix> {
    let data = u.data();
    weighted_covariance(
        (0..u.num_frames()).map(|t| data.slice(s![.., freq, t])),
        weights,
    )
    .map_err(|source| SibfError::Linalg { freq, source })
}

fn filter_from_weights(u: &ComplexSpectrogram, freq: usize, weights: &[f64]) -> Result<Array1<Complex64>> {
    let cov = bin_covariance(u, freq, weights)?;
    min_eigvec_row(&cov).map_err(|source| SibfError::Linalg { freq, source })
}

fn collect_rows(rows: Vec<Array1<Complex64>>, channels: usize) -> ExtractionFilter {
    let mut out = Array2::zeros((rows.len(), channels));
    for (f, row) in rows.into_iter().enumerate() {
        out.row_mut(f).assign(&row);
    }
    ExtractionFilter { rows: out }
}

/// Closed-form filter for the time-varying Gaussian model: the minimum
/// eigenvector of the covariance weighted by `1 / r^beta`.
pub fn estimate_filter_tv(u: &ComplexSpectrogram, r: &ReferenceMagnitude, beta: f64) -> Result<ExtractionFilter> {
    SourceModelConfig::TvGaussian(TvParams { beta }).validate()?;
    check_dims(u, r)?;
    let rv = r.values();
    let rows = (0..u.num_freqs())
        .into_par_iter()
        .map(|f| {
            let weights: Vec<f64> = rv.row(f).iter().map(|&v| v.powf(beta)).collect();
            filter_from_weights(u, f, &weights)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect_rows(rows, u.num_channels()))
}

/// Auxiliary-function iterations for the spherical Laplacian model.
///
/// The first iteration weights by `b = r`; later ones alternate
/// `b = sqrt(alpha r^2 + |w u|^2)` (floored at the reference floor) with the
/// minimum-eigenvector update. The objective after every iteration is
/// recorded in the returned trace.
pub fn estimate_filter_bs(
    u: &ComplexSpectrogram,
    r: &ReferenceMagnitude,
    params: &BsParams,
) -> Result<(ExtractionFilter, BsIterationTrace)> {
    SourceModelConfig::BsLaplacian(*params).validate()?;
    check_dims(u, r)?;
    let rv = r.values();
    let floor = r.floor();
    let alpha = params.alpha;
    let frames = u.num_frames();

    let mut filter: Option<ExtractionFilter> = None;
    let mut objectives = Vec::with_capacity(params.iterations);
    let mut final_aux = Array2::zeros(rv.dim());

    for _ in 0..params.iterations {
        let y = filter.as_ref().map(|w| apply_filter(w, u)).transpose()?;
        let results = (0..u.num_freqs())
            .into_par_iter()
            .map(|f| {
                let b: Vec<f64> = match &y {
                    None => rv.row(f).to_vec(),
                    Some(y) => (0..frames)
                        .map(|t| {
                            let q = alpha * rv[[f, t]] * rv[[f, t]] + y[[f, t]].norm_sqr();
                            q.sqrt().max(floor)
                        })
                        .collect(),
                };
                let row = filter_from_weights(u, f, &b)?;
                Ok((row, b))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut rows = Vec::with_capacity(results.len());
        for (f, (row, b)) in results.into_iter().enumerate() {
            final_aux.row_mut(f).assign(&Array1::from(b));
            rows.push(row);
        }
        let w = collect_rows(rows, u.num_channels());
        let objective = bs_objective(&apply_filter(&w, u)?, r, alpha)?;
        let previous = objectives.last().copied();
        objectives.push(objective);
        filter = Some(w);
        if let Some(prev) = previous {
            let change = (prev - objective).abs() / prev.abs().max(f64::MIN_POSITIVE);
            if change < params.early_stop_tol {
                break;
            }
        }
    }

    let filter = filter.expect("at least one iteration runs");
    Ok((
        filter,
        BsIterationTrace {
            objectives,
            final_auxiliary: Some(final_aux),
        },
    ))
}

/// `y(f, t) = w(f) u(f, t)`.
pub fn apply_filter(w: &ExtractionFilter, u: &ComplexSpectrogram) -> Result<Array2<Complex64>> {
    if w.num_freqs() != u.num_freqs() || w.num_channels() != u.num_channels() {
        return Err(SibfError::DimensionMismatch(format!(
            "filter is {}x{}, signal has {} bins and {} channels",
            w.num_freqs(),
            w.num_channels(),
            u.num_freqs(),
            u.num_channels()
        )));
    }
    let data = u.data();
    let mut y = Array2::zeros((u.num_freqs(), u.num_frames()));
    for f in 0..u.num_freqs() {
        let row = w.row(f);
        let uf = data.slice(s![.., f, ..]);
        y.row_mut(f).assign(&row.dot(&uf));
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio_io::MagnitudeMatrix;
    use crate::extraction::reference::{normalize_reference, DEFAULT_REFERENCE_FLOOR};
    use ndarray::Array3;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_channel_filter_is_one() {
        let u = ComplexSpectrogram::new(Array3::from_shape_fn((1, 3, 5), |(_, f, t)| {
            c(f as f64 + 1.0, t as f64 - 2.0)
        }))
        .unwrap();
        let r = normalize_reference(
            &MagnitudeMatrix::new(Array2::from_shape_fn((3, 5), |(f, t)| (f + t) as f64)).unwrap(),
            DEFAULT_REFERENCE_FLOOR,
        )
        .unwrap();
        let w = estimate_filter_tv(&u, &r, 2.0).unwrap();
        assert!(w.rows().iter().all(|&z| z == c(1.0, 0.0)));
        let (w, trace) = estimate_filter_bs(&u, &r, &BsParams::default()).unwrap();
        assert!(w.rows().iter().all(|&z| z == c(1.0, 0.0)));
        assert_eq!(trace.iterations(), 10);
    }

    #[test]
    fn selector_filter() {
        let u = ComplexSpectrogram::new(Array3::from_shape_fn((2, 2, 3), |(n, f, t)| {
            c(n as f64, (f + t) as f64)
        }))
        .unwrap();
        let w = ExtractionFilter::from_rows(Array2::from_shape_fn((2, 2), |(_, n)| {
            if n == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) }
        }))
        .unwrap();
        let y = apply_filter(&w, &u).unwrap();
        assert_eq!(y, u.channel(0).to_owned());
        let zero = ComplexSpectrogram::new(Array3::zeros((2, 2, 3))).unwrap();
        assert!(apply_filter(&w, &zero).unwrap().iter().all(|z| z.norm() == 0.0));
        let three = ComplexSpectrogram::new(Array3::zeros((3, 2, 3))).unwrap();
        assert!(apply_filter(&w, &three).is_err());
    }

    #[test]
    fn early_stop_truncates_trace() {
        let u = ComplexSpectrogram::new(Array3::from_shape_fn((2, 2, 8), |(n, f, t)| {
            let x = (n * 7 + f * 3 + t) as f64;
            c(x.sin(), (1.3 * x).cos())
        }))
        .unwrap();
        let r = normalize_reference(
            &MagnitudeMatrix::new(Array2::from_shape_fn((2, 8), |(f, t)| 1.0 + ((f + 2 * t) % 5) as f64))
                .unwrap(),
            DEFAULT_REFERENCE_FLOOR,
        )
        .unwrap();
        let params = BsParams {
            alpha: 1.0,
            iterations: 50,
            early_stop_tol: 1e-3,
        };
        let (_, trace) = estimate_filter_bs(&u, &r, &params).unwrap();
        assert!(trace.iterations() < 50);
        assert!(trace.final_auxiliary.is_some());
    }

    #[test]
    fn reference_shape_mismatch() {
        let u = ComplexSpectrogram::new(Array3::from_elem((2, 2, 3), c(1.0, 0.0))).unwrap();
        let r = normalize_reference(&MagnitudeMatrix::new(Array2::ones((3, 3))).unwrap(), 1e-5).unwrap();
        assert!(matches!(
            estimate_filter_tv(&u, &r, 1.0),
            Err(SibfError::DimensionMismatch(_))
        ));
    }
}
