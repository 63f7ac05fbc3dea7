use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Plain double-precision limit on `cond(B)` for [`smallest_generalized_eigenpair`].
pub const F64_COND_LIMIT: f64 = 1e14;

/// Smallest eigenpair of `A v = λ B v` via Cholesky reduction, with `vᵀ B v = 1`.
///
/// Runs entirely in `f64`; the bound pipeline uses a double-double variant of the same
/// reduction, this routine serves callers holding floating-point matrices.
pub fn smallest_generalized_eigenpair(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let n = b.nrows();
    if b.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.ncols() });
    }
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.nrows() });
    }
    let spectrum = SymmetricEigen::new(b.clone()).eigenvalues;
    let (lo, hi) = (spectrum.min(), spectrum.max());
    let cond_b = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(cond_b <= F64_COND_LIMIT) {
        return Err(Error::Conditioning { cond_b });
    }
    let chol = b.clone().cholesky().ok_or(Error::Conditioning { cond_b })?;
    let l = chol.l();
    let w = l.clone().try_inverse().ok_or(Error::Conditioning { cond_b })?;
    let c = &w * a * w.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let k = eig.eigenvalues.imin();
    let y = eig.eigenvectors.column(k).into_owned();
    let mut v = w.transpose() * y;
    let big = v.amax();
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * big) {
        if *first < 0.0 {
            v.neg_mut();
        }
    }
    Ok((eig.eigenvalues[k], v))
}
