//! Small dense linear-algebra helpers shared by the Fock and Gaussian code.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues below this are treated as zero in entropy sums.
pub const EIGEN_FLOOR: f64 = 1e-14;
/// Negative eigenvalues down to this size are roundoff and clamped to zero.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-10;
/// Elementwise tolerance of the Hermiticity check.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

pub(crate) fn max_hermitian_deviation(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn hermitize(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)].conj());
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Entries below this are flushed to zero before eigensolves; the Householder
/// reduction otherwise underflows to `0/0` on density matrices whose far
/// tails are around `1e-150`.
const FLUSH_BELOW: f64 = 1e-40;

/// Flushes tiny entries and shifts the spectrum up by the Frobenius norm.
/// Without the shift a cluster of zero eigenvalues never meets the relative
/// deflation test and the QR sweep runs off-diagonals into underflow.
fn conditioned(m: &DMatrix<Complex64>) -> (DMatrix<Complex64>, f64) {
    let shift = m.norm().max(f64::MIN_POSITIVE);
    let mut out = m.map(|z| {
        if z.norm() < FLUSH_BELOW {
            Complex64::new(0.0, 0.0)
        } else {
            z
        }
    });
    for i in 0..out.nrows() {
        out[(i, i)].re += shift;
    }
    (out, shift)
}

/// Eigen-decomposition of a Hermitian matrix (lower triangle is trusted).
pub(crate) fn hermitian_eigen(m: &DMatrix<Complex64>) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
    let (shifted, shift) = conditioned(m);
    let mut eig = SymmetricEigen::new(shifted);
    eig.eigenvalues.iter_mut().for_each(|l| *l -= shift);
    eig
}

/// Eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)].re];
    }
    let (shifted, shift) = conditioned(m);
    shifted.symmetric_eigenvalues().iter().map(|l| l - shift).collect()
}

/// Von Neumann entropy in bits of a spectrum, with the roundoff conventions
/// of [`EIGEN_FLOOR`] and [`NEGATIVITY_TOLERANCE`].
pub fn entropy_of_spectrum(eigenvalues: impl IntoIterator<Item = f64>) -> Result<f64> {
    let mut s = 0.0;
    for lambda in eigenvalues {
        if lambda < -NEGATIVITY_TOLERANCE {
            return Err(Error::NotPositive(lambda));
        }
        if lambda > EIGEN_FLOOR {
            s -= lambda * lambda.log2();
        }
    }
    Ok(s.max(0.0))
}

/// Entropy in bits of a thermal state with mean photon number `nbar`:
/// `g(n) = (n+1) log2(n+1) - n log2 n`.
pub fn thermal_entropy(nbar: f64) -> f64 {
    if nbar <= 0.0 {
        return 0.0;
    }
    (nbar + 1.0) * (nbar + 1.0).log2() - nbar * nbar.log2()
}
