//! Deterministic dense linear-algebra kernels.
//!
//! Everything here is a pure function of its inputs; randomness enters only
//! through explicitly passed RNG streams. The singular value decomposition
//! is delegated to nalgebra and re-sorted so callers can rely on a
//! descending spectrum.

use nalgebra::SVD;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Default relative cutoff separating "zero" from nonzero singular values.
///
/// A singular value counts as nonzero when it exceeds
/// `cutoff * sigma_max * max(rows, cols)`.
pub const DEFAULT_SV_CUTOFF: f64 = 1e-12;

/// Thin SVD `M = U diag(s) Vᵀ` with `r = min(rows, cols)` singular triplets.
#[derive(Debug, Clone)]
pub struct SvdFactorization {
    /// `rows × r` block with orthonormal columns.
    pub left_vectors: Matrix,
    /// Nonnegative singular values, sorted descending.
    pub singular_values: Vec<f64>,
    /// `cols × r` block with orthonormal columns.
    pub right_vectors: Matrix,
}

impl SvdFactorization {
    /// Multiplies the factors back together.
    pub fn reconstruct(&self) -> Matrix {
        let r = self.singular_values.len();
        let mut scaled = self.left_vectors.clone();
        for j in 0..r {
            scaled.column_mut(j).scale_mut(self.singular_values[j]);
        }
        &scaled * self.right_vectors.transpose()
    }

    /// Largest singular value, or 0 for an empty spectrum.
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }
}

pub(crate) fn ensure_finite(m: &Matrix, what: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} has non-finite entries")))
    }
}

pub(crate) fn ensure_finite_vec(v: &Vector, what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} has non-finite entries")))
    }
}

/// Thin SVD with singular values sorted descending.
pub fn svd(m: &Matrix) -> Result<SvdFactorization> {
    ensure_finite(m, "svd input")?;
    let fact = SVD::new(m.clone(), true, true);
    let u = fact.u.expect("u requested");
    let v_t = fact.v_t.expect("v_t requested");
    let sv = fact.singular_values;

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));

    let r = sv.len();
    let mut left = Matrix::zeros(m.nrows(), r);
    let mut right = Matrix::zeros(m.ncols(), r);
    let mut values = Vec::with_capacity(r);
    for (dst, &src) in order.iter().enumerate() {
        left.set_column(dst, &u.column(src));
        right.set_column(dst, &v_t.row(src).transpose());
        values.push(sv[src]);
    }
    Ok(SvdFactorization {
        left_vectors: left,
        singular_values: values,
        right_vectors: right,
    })
}

/// Moore-Penrose pseudoinverse via the SVD.
///
/// Singular values above `tol * sigma_max * max(rows, cols)` are inverted,
/// the rest are zeroed.
pub fn pseudoinverse(m: &Matrix, tol: f64) -> Result<Matrix> {
    if tol < 0.0 {
        return Err(Error::InvalidInput("pseudoinverse cutoff must be >= 0".into()));
    }
    let fact = svd(m)?;
    let cutoff = tol * fact.sigma_max() * m.nrows().max(m.ncols()) as f64;
    let r = fact.singular_values.len();
    // M⁺ = V diag(1/s) Uᵀ restricted to the singular values above the cutoff.
    let mut scaled = fact.right_vectors.clone();
    for j in 0..r {
        let s = fact.singular_values[j];
        let inv = if s > cutoff { 1.0 / s } else { 0.0 };
        scaled.column_mut(j).scale_mut(inv);
    }
    Ok(&scaled * fact.left_vectors.transpose())
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> Result<f64> {
    ensure_finite(m, "spectral norm input")?;
    Ok(m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max))
}

/// Smallest singular value above the relative cutoff.
pub fn min_nonzero_singular(m: &Matrix, tol: f64) -> Result<f64> {
    let fact = svd(m)?;
    let cutoff = tol * fact.sigma_max() * m.nrows().max(m.ncols()) as f64;
    fact.singular_values
        .iter()
        .copied()
        .filter(|&s| s > cutoff)
        .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.min(s))))
        .ok_or(Error::NoNonzeroSingularValue)
}

/// Draws a `p × p` orthogonal matrix from the Haar measure.
///
/// QR of a standard Gaussian matrix, with the sign of the triangular
/// factor's diagonal pushed into Q. Without the sign correction QR output
/// is orthogonal but not Haar distributed.
pub fn sample_haar_orthogonal(p: usize, rng: &mut impl Rng) -> Matrix {
    assert!(p >= 1, "dimension must be >= 1");
    let z = Matrix::from_fn(p, p, |_, _| rng.sample(StandardNormal));
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..p {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `n × p` matrix with i.i.d. standard normal entries.
pub fn sample_standard_gaussian(n: usize, p: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
}
