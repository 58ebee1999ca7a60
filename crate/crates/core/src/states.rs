//! Probe states in the truncated Fock picture and in the Gaussian
//! (mean + covariance) picture, with entropies in both.
//!
//! Quadratures follow the convention `x = a + a†`, `p = -i(a - a†)`, so the
//! vacuum covariance is the identity and a coherent state `|α⟩` has mean
//! `(2 Re α, 2 Im α)`. Multi-mode vectors are ordered `(x1, p1, x2, p2, ...)`.
//! Multi-mode Fock indices put mode 0 in the most significant position.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{
    entropy_of_spectrum, hermitian_eigenvalues, max_hermitian_deviation, thermal_entropy,
    HERMITIAN_TOLERANCE,
};

/// Largest Hilbert-space dimension we are willing to allocate densely.
const MAX_TOTAL_DIM: usize = 1 << 22;

/// Default truncation tolerance on the discarded probability weight.
pub const DEFAULT_EPS_TRUNC: f64 = 1e-8;

/// Per-mode Fock truncation together with the tolerated discarded weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub dim: usize,
    pub eps: f64,
}

impl Truncation {
    pub const fn new(dim: usize, eps: f64) -> Self {
        Self { dim, eps }
    }

    /// Default for single-mode states: 60 levels.
    pub const fn single_mode() -> Self {
        Self::new(60, DEFAULT_EPS_TRUNC)
    }

    /// Default per mode for two-mode states: 30 levels.
    pub const fn two_mode() -> Self {
        Self::new(30, DEFAULT_EPS_TRUNC)
    }

    fn check(&self, deficit: f64) -> Result<()> {
        if deficit > self.eps {
            Err(Error::Truncation {
                deficit,
                tolerance: self.eps,
                dim: self.dim,
            })
        } else {
            Ok(())
        }
    }
}

fn total_dim(modes: usize, dim: usize) -> Result<usize> {
    let mut total: usize = 1;
    for _ in 0..modes {
        total = total
            .checked_mul(dim)
            .filter(|&t| t <= MAX_TOTAL_DIM)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "{modes} modes at dimension {dim} exceed the dense size limit"
                ))
            })?;
    }
    Ok(total)
}

/// A pure multi-mode state in the truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockKet {
    modes: usize,
    dim: usize,
    amplitudes: DVector<Complex64>,
    norm_deficit: f64,
}

impl FockKet {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// Probability weight lost to truncation, `1 - <ψ|ψ>`, computed from the
    /// discarded tail rather than by subtraction.
    pub fn norm_deficit(&self) -> f64 {
        self.norm_deficit
    }

    /// Mean photon number of one mode.
    pub fn mean_photons(&self, mode: usize) -> f64 {
        let stride = self.dim.pow((self.modes - 1 - mode) as u32);
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(idx, a)| ((idx / stride) % self.dim) as f64 * a.norm_sqr())
            .sum()
    }

    pub fn density(&self) -> FockDensityMatrix {
        let data = &self.amplitudes * self.amplitudes.adjoint();
        FockDensityMatrix {
            modes: self.modes,
            dim: self.dim,
            data,
        }
    }
}

/// Density matrix of `mode_count` modes, each truncated to `dim` levels.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensityMatrix {
    modes: usize,
    dim: usize,
    data: DMatrix<Complex64>,
}

impl FockDensityMatrix {
    /// Wraps a matrix after checking shape, Hermiticity and trace.
    pub fn new(modes: usize, dim: usize, data: DMatrix<Complex64>) -> Result<Self> {
        if modes == 0 || dim == 0 {
            return invalid("density matrix needs at least one mode and one level");
        }
        let n = total_dim(modes, dim)?;
        if data.nrows() != n || data.ncols() != n {
            return invalid(format!(
                "expected a {n}x{n} matrix for {modes} modes of dimension {dim}, got {}x{}",
                data.nrows(),
                data.ncols()
            ));
        }
        let dev = max_hermitian_deviation(&data);
        if dev > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian(dev));
        }
        let rho = Self { modes, dim, data };
        let tr = rho.trace();
        if !(tr > 0.0 && tr <= 1.0 + 1e-9) {
            return invalid(format!("trace {tr} outside (0, 1]"));
        }
        Ok(rho)
    }

    pub(crate) fn from_parts_unchecked(modes: usize, dim: usize, data: DMatrix<Complex64>) -> Self {
        Self { modes, dim, data }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn trace(&self) -> f64 {
        self.data.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn trace_deficit(&self) -> f64 {
        (1.0 - self.trace()).max(0.0)
    }

    /// Checks the recorded truncation loss against `eps`.
    pub fn check_truncation(&self, eps: f64) -> Result<()> {
        Truncation::new(self.dim, eps).check(self.trace_deficit())
    }

    pub fn mean_photons(&self, mode: usize) -> f64 {
        let stride = self.dim.pow((self.modes - 1 - mode) as u32);
        (0..self.data.nrows())
            .map(|idx| ((idx / stride) % self.dim) as f64 * self.data[(idx, idx)].re)
            .sum()
    }

    /// Reorders the tensor factors: output mode `k` is input mode `order[k]`.
    pub fn permute_modes(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.modes];
        if order.len() != self.modes
            || order
                .iter()
                .any(|&m| m >= self.modes || std::mem::replace(&mut seen[m], true))
        {
            return invalid(format!("{order:?} is not a permutation of {} modes", self.modes));
        }
        let n = self.data.nrows();
        let map: Vec<usize> = (0..n)
            .map(|new_idx| {
                let digits = split_index(new_idx, self.modes, self.dim);
                let mut old = vec![0; self.modes];
                for (k, &src) in order.iter().enumerate() {
                    old[src] = digits[k];
                }
                join_index(&old, self.dim)
            })
            .collect();
        let data = DMatrix::from_fn(n, n, |i, j| self.data[(map[i], map[j])]);
        Ok(Self {
            modes: self.modes,
            dim: self.dim,
            data,
        })
    }
}

pub(crate) fn split_index(mut idx: usize, modes: usize, dim: usize) -> Vec<usize> {
    let mut digits = vec![0; modes];
    for k in (0..modes).rev() {
        digits[k] = idx % dim;
        idx /= dim;
    }
    digits
}

pub(crate) fn join_index(digits: &[usize], dim: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * dim + d)
}

/// Coherent-state Fock coefficients `e^{-|α|²/2} α^m / √(m!)` for `m < dim`.
pub(crate) fn coherent_amplitudes(alpha: Complex64, dim: usize) -> Vec<Complex64> {
    let mut amps = Vec::with_capacity(dim);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for m in 0..dim {
        amps.push(c);
        c = c * alpha / ((m + 1) as f64).sqrt();
    }
    amps
}

/// Poisson tail `Σ_{m≥dim} e^{-x} x^m / m!`.
fn poisson_tail(x: f64, dim: usize) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    // log of the first discarded term, then sum forward until negligible
    let ln_first = -x + dim as f64 * x.ln() - ln_factorial(dim);
    let mut term = ln_first.exp();
    let mut sum = 0.0;
    let mut m = dim;
    while term > 1e-300 && (term > sum * 1e-17 || (m as f64) < x) {
        sum += term;
        m += 1;
        term *= x / m as f64;
    }
    sum
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Single-mode coherent state `|α⟩` truncated to `trunc.dim` levels.
pub fn coherent_state(alpha: Complex64, trunc: Truncation) -> Result<FockKet> {
    if trunc.dim < 2 {
        return invalid("coherent state needs dim >= 2");
    }
    if alpha.norm_sqr() > trunc.dim as f64 / 4.0 {
        return invalid(format!(
            "|alpha|^2 = {} too large for dim {} (limit dim/4)",
            alpha.norm_sqr(),
            trunc.dim
        ));
    }
    let amplitudes = DVector::from_vec(coherent_amplitudes(alpha, trunc.dim));
    let norm_deficit = poisson_tail(alpha.norm_sqr(), trunc.dim);
    trunc.check(norm_deficit)?;
    Ok(FockKet {
        modes: 1,
        dim: trunc.dim,
        amplitudes,
        norm_deficit,
    })
}

/// Schmidt coefficients `(tanh ξ)^m / cosh ξ` of one EPR copy carrying
/// `photons` mean signal photons (`sinh² ξ = photons`).
pub(crate) fn epr_schmidt_coefficients(photons: f64, dim: usize) -> (Vec<f64>, f64) {
    let xi = photons.sqrt().asinh();
    let t = xi.tanh();
    let mut c = 1.0 / xi.cosh();
    let mut coeffs = Vec::with_capacity(dim);
    for _ in 0..dim {
        coeffs.push(c);
        c *= t;
    }
    // Σ_{m≥dim} c_m² = tanh^{2 dim}
    let tail = (t * t).powi(dim as i32);
    (coeffs, tail)
}

/// `s` copies of the two-mode squeezed vacuum with total mean signal photon
/// number `n`, modes interleaved as `(S1, R1, S2, R2, ...)`.
pub fn epr_state(n: f64, copies: usize, trunc: Truncation) -> Result<FockKet> {
    if !(n >= 0.0 && n.is_finite()) {
        return invalid(format!("photon number {n} must be finite and non-negative"));
    }
    if copies == 0 {
        return invalid("EPR transmitter needs at least one copy");
    }
    let modes = 2 * copies;
    let total = total_dim(modes, trunc.dim)?;
    let (coeffs, tail) = epr_schmidt_coefficients(n / copies as f64, trunc.dim);
    let norm_deficit = 1.0 - (1.0 - tail).powi(copies as i32);
    trunc.check(norm_deficit)?;
    let mut amplitudes = DVector::<Complex64>::zeros(total);
    let per_copy = trunc.dim;
    for combo in 0..per_copy.pow(copies as u32) {
        let ms = split_index(combo, copies, per_copy);
        let digits: Vec<usize> = ms.iter().flat_map(|&m| [m, m]).collect();
        let amp: f64 = ms.iter().map(|&m| coeffs[m]).product();
        amplitudes[join_index(&digits, trunc.dim)] = Complex64::new(amp, 0.0);
    }
    Ok(FockKet {
        modes,
        dim: trunc.dim,
        amplitudes,
        norm_deficit,
    })
}

/// Single-mode thermal state with weights `n^m / (n+1)^{m+1}`.
pub fn thermal_state(nbar: f64, trunc: Truncation) -> Result<FockDensityMatrix> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return invalid(format!("mean photon number {nbar} must be finite and non-negative"));
    }
    if trunc.dim == 0 {
        return invalid("dim must be positive");
    }
    let ratio = nbar / (nbar + 1.0);
    let deficit = ratio.powi(trunc.dim as i32);
    trunc.check(deficit)?;
    let mut data = DMatrix::<Complex64>::zeros(trunc.dim, trunc.dim);
    let mut p = 1.0 / (nbar + 1.0);
    for m in 0..trunc.dim {
        data[(m, m)] = Complex64::new(p, 0.0);
        p *= ratio;
    }
    Ok(FockDensityMatrix::from_parts_unchecked(1, trunc.dim, data))
}

/// Von Neumann entropy `-Tr ρ log2 ρ` in bits.
pub fn von_neumann_entropy(rho: &FockDensityMatrix) -> Result<f64> {
    let dev = max_hermitian_deviation(&rho.data);
    if dev > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian(dev));
    }
    entropy_of_spectrum(hermitian_eigenvalues(&rho.data))
}

/// Reduced state on the modes in `keep` (output ordered ascending).
pub fn partial_trace(rho: &FockDensityMatrix, keep: &[usize]) -> Result<FockDensityMatrix> {
    if keep.is_empty() {
        return invalid("partial trace must keep at least one mode");
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&m| m >= rho.modes) {
        return invalid(format!(
            "modes {keep:?} are not distinct indices below {}",
            rho.modes
        ));
    }
    if kept.len() == rho.modes {
        return Ok(rho.clone());
    }
    let traced: Vec<usize> = (0..rho.modes).filter(|m| !kept.contains(m)).collect();
    let d = rho.dim;
    let out_dim = d.pow(kept.len() as u32);
    let env_dim = d.pow(traced.len() as u32);
    let full_index = |k: usize, e: usize| {
        let kd = split_index(k, kept.len(), d);
        let ed = split_index(e, traced.len(), d);
        let mut digits = vec![0; rho.modes];
        for (pos, &m) in kept.iter().enumerate() {
            digits[m] = kd[pos];
        }
        for (pos, &m) in traced.iter().enumerate() {
            digits[m] = ed[pos];
        }
        join_index(&digits, d)
    };
    let index: Vec<Vec<usize>> = (0..out_dim)
        .map(|k| (0..env_dim).map(|e| full_index(k, e)).collect())
        .collect();
    let data = DMatrix::from_fn(out_dim, out_dim, |r, c| {
        (0..env_dim)
            .map(|e| rho.data[(index[r][e], index[c][e])])
            .sum()
    });
    Ok(FockDensityMatrix::from_parts_unchecked(kept.len(), d, data))
}

/// Tolerance below 1 accepted for symplectic eigenvalues.
pub const SYMPLECTIC_TOLERANCE: f64 = 1e-9;

/// A Gaussian state: quadrature means and covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Validates symmetry and the uncertainty principle `cov + iΩ ≥ 0`.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if n == 0 || n % 2 != 0 || cov.nrows() != n || cov.ncols() != n {
            return invalid(format!(
                "mean of length {n} and covariance {}x{} do not describe whole modes",
                cov.nrows(),
                cov.ncols()
            ));
        }
        let asym = (&cov - cov.transpose()).amax();
        if asym > 1e-12 {
            return invalid(format!("covariance not symmetric (deviation {asym:.3e})"));
        }
        let state = Self { mean, cov };
        let nu = state.symplectic_eigenvalues()?;
        if let Some(&low) = nu.first() {
            if low < 1.0 - SYMPLECTIC_TOLERANCE {
                return Err(Error::Unphysical(low));
            }
        }
        Ok(state)
    }

    pub(crate) fn from_parts_unchecked(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        Self { mean, cov }
    }

    pub fn vacuum(modes: usize) -> Self {
        Self {
            mean: DVector::zeros(2 * modes),
            cov: DMatrix::identity(2 * modes, 2 * modes),
        }
    }

    pub fn coherent(alpha: Complex64) -> Self {
        Self {
            mean: DVector::from_vec(vec![2.0 * alpha.re, 2.0 * alpha.im]),
            cov: DMatrix::identity(2, 2),
        }
    }

    pub fn thermal(nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0) {
            return invalid(format!("mean photon number {nbar} must be non-negative"));
        }
        Ok(Self {
            mean: DVector::zeros(2),
            cov: DMatrix::identity(2, 2) * (2.0 * nbar + 1.0),
        })
    }

    /// `copies` two-mode squeezed vacua sharing `n` mean signal photons,
    /// modes interleaved `(S1, R1, ...)` as in [`epr_state`].
    pub fn epr(n: f64, copies: usize) -> Result<Self> {
        if !(n >= 0.0) || copies == 0 {
            return invalid("EPR needs n >= 0 and at least one copy");
        }
        let per = n / copies as f64;
        let c = 1.0 + 2.0 * per;
        let s = 2.0 * (per * (per + 1.0)).sqrt();
        let dim = 4 * copies;
        let mut cov = DMatrix::<f64>::zeros(dim, dim);
        for k in 0..copies {
            let o = 4 * k;
            for q in 0..4 {
                cov[(o + q, o + q)] = c;
            }
            cov[(o, o + 2)] = s;
            cov[(o + 2, o)] = s;
            cov[(o + 1, o + 3)] = -s;
            cov[(o + 3, o + 1)] = -s;
        }
        Ok(Self {
            mean: DVector::zeros(dim),
            cov,
        })
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Mean photon number of one mode, `(Tr V_k + |d_k|²)/4 - 1/2`.
    pub fn mean_photons(&self, mode: usize) -> f64 {
        let i = 2 * mode;
        let v = self.cov[(i, i)] + self.cov[(i + 1, i + 1)];
        let d = self.mean[i].powi(2) + self.mean[i + 1].powi(2);
        (v + d) / 4.0 - 0.5
    }

    /// Symplectic eigenvalues in ascending order.
    ///
    /// Computed as the singular values of `V^{1/2} Ω V^{1/2}`, each of which
    /// appears twice.
    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.cov.nrows();
        let eig = SymmetricEigen::new(self.cov.clone());
        if let Some(&low) = eig.eigenvalues.iter().min_by(|a, b| a.total_cmp(b)) {
            if low <= 0.0 {
                return Err(Error::Unphysical(low));
            }
        }
        let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
        let root = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
        let mut omega = DMatrix::<f64>::zeros(n, n);
        for k in 0..n / 2 {
            omega[(2 * k, 2 * k + 1)] = 1.0;
            omega[(2 * k + 1, 2 * k)] = -1.0;
        }
        let m = &root * omega * &root;
        let gram = m.transpose() * &m;
        let gram = (&gram + gram.transpose()) * 0.5;
        let mut squares: Vec<f64> = SymmetricEigen::new(gram).eigenvalues.iter().copied().collect();
        squares.sort_by(|a, b| a.total_cmp(b));
        Ok(squares
            .chunks(2)
            .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
            .collect())
    }
}

/// Entropy in bits of a Gaussian state, `Σ_k g((ν_k - 1)/2)`.
pub fn symplectic_entropy(state: &GaussianState) -> Result<f64> {
    let nu = state.symplectic_eigenvalues()?;
    let mut s = 0.0;
    for v in nu {
        if v < 1.0 - SYMPLECTIC_TOLERANCE {
            return Err(Error::Unphysical(v));
        }
        s += thermal_entropy(((v - 1.0) / 2.0).max(0.0));
    }
    Ok(s)
}

/// The kind of probe light sent onto each cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransmitterKind {
    Coherent,
    Epr,
}

/// Probe description: kind, photon budget `n` per cell, signal modes `s`
/// and ancilla modes `r`.
///
/// A coherent transmitter puts the whole amplitude `√n` on its first signal
/// mode; an EPR transmitter is `s` two-mode squeezed vacua with `n/s` signal
/// photons each and `r = s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmitterSpec {
    kind: TransmitterKind,
    n: f64,
    signal_modes: usize,
    ancilla_modes: usize,
}

impl TransmitterSpec {
    pub fn coherent(n: f64) -> Result<Self> {
        Self::new(TransmitterKind::Coherent, n, 1, 0)
    }

    pub fn epr(n: f64, copies: usize) -> Result<Self> {
        Self::new(TransmitterKind::Epr, n, copies, copies)
    }

    pub fn new(kind: TransmitterKind, n: f64, signal_modes: usize, ancilla_modes: usize) -> Result<Self> {
        if !(n >= 0.0 && n.is_finite()) {
            return invalid(format!("photon budget {n} must be finite and non-negative"));
        }
        if signal_modes == 0 {
            return invalid("transmitter needs at least one signal mode");
        }
        if kind == TransmitterKind::Epr && ancilla_modes != signal_modes {
            return invalid("EPR transmitter requires r = s");
        }
        Ok(Self {
            kind,
            n,
            signal_modes,
            ancilla_modes,
        })
    }

    pub fn kind(&self) -> TransmitterKind {
        self.kind
    }

    pub fn photons(&self) -> f64 {
        self.n
    }

    pub fn signal_modes(&self) -> usize {
        self.signal_modes
    }

    pub fn ancilla_modes(&self) -> usize {
        self.ancilla_modes
    }

    /// EPR squeezing parameter `ξ = asinh √(n/s)` (zero for coherent probes).
    pub fn squeezing(&self) -> f64 {
        match self.kind {
            TransmitterKind::Coherent => 0.0,
            TransmitterKind::Epr => (self.n / self.signal_modes as f64).sqrt().asinh(),
        }
    }

    pub fn with_photons(&self, n: f64) -> Result<Self> {
        Self::new(self.kind, n, self.signal_modes, self.ancilla_modes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn vacuum_from_zero_amplitude() {
        let ket = coherent_state(Complex64::new(0.0, 0.0), Truncation::new(8, 1e-8)).unwrap();
        assert_eq!(ket.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(ket.amplitudes().iter().skip(1).all(|a| a.norm() == 0.0));
        assert_eq!(ket.norm_deficit(), 0.0);
    }

    #[test]
    fn coherent_unit_amplitude() {
        let ket = coherent_state(Complex64::new(1.0, 0.0), Truncation::new(30, 1e-8)).unwrap();
        assert!(close(ket.amplitudes()[0].re, (-0.5f64).exp(), 1e-15));
        assert!(close(ket.amplitudes().norm_squared(), 1.0, 1e-12));
        assert!(ket.norm_deficit() < 1e-25);
    }

    #[test]
    fn coherent_mean_photons() {
        let ket = coherent_state(Complex64::new(0.1f64.sqrt(), 0.0), Truncation::single_mode()).unwrap();
        assert!(close(ket.mean_photons(0), 0.1, 1e-10));
    }

    #[test]
    fn coherent_rejects_small_dim() {
        let err = coherent_state(Complex64::new(2.0, 0.0), Truncation::new(12, 1e-8)).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
        let err = coherent_state(Complex64::new(1.7, 0.0), Truncation::new(12, 1e-8)).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }), "{err:?}");
    }

    #[test]
    fn epr_vacuum_and_unit_photon() {
        let ket = epr_state(0.0, 1, Truncation::new(6, 1e-8)).unwrap();
        assert_eq!(ket.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert_eq!(ket.amplitudes().iter().filter(|a| a.norm() > 0.0).count(), 1);

        let ket = epr_state(1.0, 1, Truncation::new(40, 1e-8)).unwrap();
        for m in 0..10 {
            let w = ket.amplitudes()[m * 40 + m].norm_sqr();
            assert!(close(w, 0.5 * 0.5f64.powi(m as i32), 1e-14), "m={m}: {w}");
        }
    }

    #[test]
    fn epr_energy_split_over_copies() {
        let ket = epr_state(1.0, 2, Truncation::new(12, 1e-3)).unwrap();
        for mode in 0..4 {
            assert!(close(ket.mean_photons(mode), 0.5, 1e-3));
        }
    }

    #[test]
    fn thermal_weights_and_entropy() {
        let rho = thermal_state(1.0, Truncation::new(40, 1e-8)).unwrap();
        assert!(close(rho.trace_deficit(), 2f64.powi(-40), 1e-15));
        assert!(close(rho.matrix()[(3, 3)].re, 0.0625, 1e-15));
        assert!(close(von_neumann_entropy(&rho).unwrap(), 2.0, 1e-9));
        let vac = thermal_state(0.0, Truncation::new(5, 1e-8)).unwrap();
        assert_eq!(vac.matrix()[(0, 0)].re, 1.0);
        let half = thermal_state(0.5, Truncation::single_mode()).unwrap();
        let g = 1.5 * 1.5f64.log2() + 0.5;
        assert!(close(von_neumann_entropy(&half).unwrap(), g, 1e-9));
    }

    #[test]
    fn entropy_of_pure_and_maximally_mixed() {
        let ket = coherent_state(Complex64::new(0.7, -0.2), Truncation::new(40, 1e-8)).unwrap();
        assert!(von_neumann_entropy(&ket.density()).unwrap().abs() < 1e-9);
        let mixed = DMatrix::<Complex64>::identity(8, 8) / Complex64::new(8.0, 0.0);
        let rho = FockDensityMatrix::new(1, 8, mixed).unwrap();
        assert!(close(von_neumann_entropy(&rho).unwrap(), 3.0, 1e-12));
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = DMatrix::<Complex64>::identity(2, 2) * Complex64::new(0.5, 0.0);
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(matches!(
            FockDensityMatrix::new(1, 2, m),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn partial_trace_of_epr_is_thermal() {
        let trunc = Truncation::new(30, 1e-8);
        let rho = epr_state(1.0, 1, trunc).unwrap().density();
        let thermal = thermal_state(1.0, trunc).unwrap();
        for keep in [[0usize], [1usize]] {
            let red = partial_trace(&rho, &keep).unwrap();
            assert!((red.matrix() - thermal.matrix()).camax() < 1e-10);
        }
    }

    #[test]
    fn partial_trace_of_product_and_identity() {
        let t = Truncation::new(5, 1e-3);
        let a = coherent_state(Complex64::new(0.3, 0.1), t).unwrap();
        let b = thermal_state(0.2, t).unwrap();
        let prod = a.density().matrix().kronecker(b.matrix());
        let rho = FockDensityMatrix::from_parts_unchecked(2, 5, prod);
        let ra = partial_trace(&rho, &[0]).unwrap();
        let rb = partial_trace(&rho, &[1]).unwrap();
        assert!((ra.matrix() * Complex64::new(1.0 / b.trace(), 0.0) - a.density().matrix()).camax() < 1e-14);
        assert!((rb.matrix() * Complex64::new(1.0 / a.density().trace(), 0.0) - b.matrix()).camax() < 1e-14);
        assert_eq!(partial_trace(&rho, &[0, 1]).unwrap(), rho);
        assert!(partial_trace(&rho, &[]).is_err());
        assert!(partial_trace(&rho, &[2]).is_err());
        assert!(partial_trace(&rho, &[0, 0]).is_err());
    }

    #[test]
    fn permutation_preserves_entropy() {
        let t = Truncation::new(6, 1e-2);
        let a = coherent_state(Complex64::new(0.4, 0.0), t).unwrap().density();
        let b = thermal_state(0.3, t).unwrap();
        let rho = FockDensityMatrix::from_parts_unchecked(2, 6, a.matrix().kronecker(b.matrix()));
        let swapped = rho.permute_modes(&[1, 0]).unwrap();
        let s1 = von_neumann_entropy(&rho).unwrap();
        let s2 = von_neumann_entropy(&swapped).unwrap();
        assert!(close(s1, s2, 1e-10));
        let rb = partial_trace(&swapped, &[0]).unwrap();
        assert!((rb.matrix() * Complex64::new(1.0 / a.trace(), 0.0) - b.matrix()).camax() < 1e-14);
    }

    #[test]
    fn symplectic_entropy_basics() {
        assert!(symplectic_entropy(&GaussianState::vacuum(2)).unwrap().abs() < 1e-12);
        let th = GaussianState::thermal(0.7).unwrap();
        assert!(close(symplectic_entropy(&th).unwrap(), thermal_entropy(0.7), 1e-12));
        let epr = GaussianState::epr(1.3, 1).unwrap();
        assert!(symplectic_entropy(&epr).unwrap().abs() < 1e-7);
        let nu = epr.symplectic_eigenvalues().unwrap();
        assert!(nu.iter().all(|&v| close(v, 1.0, 1e-7)));
    }

    #[test]
    fn unphysical_covariance_rejected() {
        let cov = DMatrix::identity(2, 2) * 0.5;
        assert!(matches!(
            GaussianState::new(DVector::zeros(2), cov),
            Err(Error::Unphysical(_))
        ));
    }

    #[test]
    fn gaussian_and_fock_entropy_agree_for_thermal() {
        for nbar in [0.05, 0.4, 1.2] {
            let fock = thermal_state(nbar, Truncation::single_mode()).unwrap();
            let gauss = GaussianState::thermal(nbar).unwrap();
            let a = von_neumann_entropy(&fock).unwrap();
            let b = symplectic_entropy(&gauss).unwrap();
            assert!(close(a, b, 1e-6), "{nbar}: {a} vs {b}");
        }
    }

    #[test]
    fn transmitter_invariants() {
        let t = TransmitterSpec::epr(1.0, 4).unwrap();
        assert_eq!(t.ancilla_modes(), 4);
        assert!(close(t.squeezing().sinh().powi(2), 0.25, 1e-14));
        assert!(TransmitterSpec::new(TransmitterKind::Epr, 1.0, 2, 1).is_err());
        assert!(TransmitterSpec::coherent(-1.0).is_err());
        assert_eq!(TransmitterSpec::coherent(2.0).unwrap().squeezing(), 0.0);
    }
}
