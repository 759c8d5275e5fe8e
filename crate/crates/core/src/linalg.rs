//! Small dense complex Hermitian matrices: weighted covariance accumulation
//! and a cyclic Jacobi eigensolver.
//!
//! Eigenvalues are returned in descending order (stable with respect to the
//! diagonal index on ties). Each eigenvector is scaled so that its first
//! largest-magnitude entry is real and nonnegative, which makes the whole
//! decomposition deterministic.

use ndarray::{Array1, Array2, ArrayView1};
use num_complex::Complex64;
use thiserror::Error;

const OFF_DIAGONAL_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;
/// Entries within this relative distance of the largest magnitude count as
/// tied when choosing the phase anchor.
const PHASE_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("empty input")]
    Empty,
    #[error("{frames} frames but {weights} weights")]
    LengthMismatch { frames: usize, weights: usize },
    #[error("frame {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("weight {index} is {value}; weights must be positive and finite")]
    InvalidWeight { index: usize, value: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
}

/// A square complex matrix equal to its own conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    entries: Array2<Complex64>,
}

impl HermitianMatrix {
    /// Validates Hermitian symmetry to `1e-12` absolute and forces the
    /// diagonal to be exactly real.
    pub fn new(mut entries: Array2<Complex64>) -> Result<Self, LinalgError> {
        let (r, c) = entries.dim();
        if r != c {
            return Err(LinalgError::NotSquare);
        }
        if r == 0 {
            return Err(LinalgError::Empty);
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        let mut worst = 0.0f64;
        for i in 0..r {
            for j in i..r {
                worst = worst.max((entries[[i, j]] - entries[[j, i]].conj()).norm());
            }
        }
        if worst > 1e-12 {
            return Err(LinalgError::NotHermitian(worst));
        }
        for i in 0..r {
            entries[[i, i]].im = 0.0;
        }
        Ok(Self { entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: Array2::eye(dim).mapv(|v: f64| Complex64::new(v, 0.0)),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut entries = Array2::zeros((diag.len(), diag.len()));
        for (i, &d) in diag.iter().enumerate() {
            entries[[i, i]] = Complex64::new(d, 0.0);
        }
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `(1/T) * sum_t x_t x_t^H / weight_t`.
///
/// Only the upper triangle is accumulated; the lower triangle is mirrored so
/// the result is exactly Hermitian.
pub fn weighted_covariance<'a, I>(frames: I, weights: &[f64]) -> Result<HermitianMatrix, LinalgError>
where
    I: IntoIterator<Item = ArrayView1<'a, Complex64>>,
{
    let mut acc: Option<Array2<Complex64>> = None;
    let mut count = 0usize;
    for (index, frame) in frames.into_iter().enumerate() {
        let w = *weights.get(index).ok_or(LinalgError::LengthMismatch {
            frames: index + 1,
            weights: weights.len(),
        })?;
        if !(w > 0.0 && w.is_finite()) {
            return Err(LinalgError::InvalidWeight { index, value: w });
        }
        let n = frame.len();
        let m = acc.get_or_insert_with(|| Array2::zeros((n, n)));
        if n != m.nrows() {
            return Err(LinalgError::DimensionMismatch {
                index,
                expected: m.nrows(),
                found: n,
            });
        }
        let inv = 1.0 / w;
        for i in 0..n {
            let xi = frame[i] * inv;
            for j in i..n {
                m[[i, j]] += xi * frame[j].conj();
            }
        }
        count += 1;
    }
    if count != weights.len() {
        return Err(LinalgError::LengthMismatch {
            frames: count,
            weights: weights.len(),
        });
    }
    let mut m = acc.ok_or(LinalgError::Empty)?;
    let n = m.nrows();
    let scale = 1.0 / count as f64;
    for i in 0..n {
        m[[i, i]] = Complex64::new(m[[i, i]].re * scale, 0.0);
        for j in i + 1..n {
            m[[i, j]] *= scale;
            m[[j, i]] = m[[i, j]].conj();
        }
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    Ok(HermitianMatrix { entries: m })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    /// Sorted descending.
    pub eigenvalues: Array1<f64>,
    /// Column `i` is the unit eigenvector for `eigenvalues[i]`.
    pub eigenvectors: Array2<Complex64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, i: usize) -> ArrayView1<'_, Complex64> {
        self.eigenvectors.column(i)
    }
}

/// Full eigendecomposition by cyclic complex Jacobi rotations.
pub fn hermitian_eig(m: &HermitianMatrix) -> Result<EigenDecomposition, LinalgError> {
    let n = m.dim();
    let mut a = m.entries.clone();
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    let mut v: Array2<Complex64> = Array2::eye(n).mapv(|x: f64| Complex64::new(x, 0.0));
    let tol = OFF_DIAGONAL_TOL * m.norm();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[[p, q]];
                let mag = apq.norm();
                if mag <= tol || mag == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = apq / mag;
                let app = a[[p, p]].re;
                let aqq = a[[q, q]].re;
                // Real symmetric Jacobi step on [[app, mag], [mag, aqq]].
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Unitary U acting on (p, q):
                //   U[p][p] = c, U[p][q] = s * phase, U[q][p] = -s * conj(phase), U[q][q] = c
                let upq = phase * s;
                let uqp = -phase.conj() * s;
                // A <- A U (columns p, q)
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = akp * c + akq * uqp;
                    a[[k, q]] = akp * upq + akq * c;
                }
                // A <- U^H A (rows p, q)
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = apk * c + aqk * uqp.conj();
                    a[[q, k]] = apk * upq.conj() + aqk * c;
                }
                a[[p, q]] = Complex64::new(0.0, 0.0);
                a[[q, p]] = Complex64::new(0.0, 0.0);
                a[[p, p]].im = 0.0;
                a[[q, q]].im = 0.0;
                // V <- V U
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = vkp * c + vkq * uqp;
                    v[[k, q]] = vkp * upq + vkq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable: equal eigenvalues keep their diagonal order.
    order.sort_by(|&i, &j| a[[j, j]].re.total_cmp(&a[[i, i]].re));

    let eigenvalues = Array1::from_iter(order.iter().map(|&i| a[[i, i]].re));
    let mut eigenvectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src).to_owned();
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        col.mapv_inplace(|z| z / norm);
        fix_phase(&mut col);
        eigenvectors.column_mut(dst).assign(&col);
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Rotates `v` so that its first (near-)largest-magnitude entry is real and
/// nonnegative.
fn fix_phase(v: &mut Array1<Complex64>) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let anchor = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - PHASE_TIE_TOL))
        .expect("a maximal entry exists");
    let rot = v[anchor].conj() / v[anchor].norm();
    v.mapv_inplace(|z| z * rot);
    v[anchor] = Complex64::new(v[anchor].norm(), 0.0);
}

/// Conjugate transpose of the eigenvector belonging to the smallest
/// eigenvalue, returned as a unit-norm row.
///
/// With tied smallest eigenvalues the one sorted last wins.
pub fn min_eigvec_row(m: &HermitianMatrix) -> Result<Array1<Complex64>, LinalgError> {
    let eig = hermitian_eig(m)?;
    Ok(min_row_of(&eig))
}

pub(crate) fn min_row_of(eig: &EigenDecomposition) -> Array1<Complex64> {
    eig.eigenvector(eig.dim() - 1).mapv(|z| z.conj())
}
