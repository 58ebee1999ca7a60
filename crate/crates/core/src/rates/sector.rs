//! EPR outputs split by photon-number difference.
//!
//! Loss and the isotropic displacement noise commute with `e^{iφ(N_s - N_i)}`,
//! so a signal-idler output is block diagonal in `Δ = a - b` (signal minus
//! idler photon number). Averaging `D(r e^{iθ})` over `θ` is exactly the
//! projection onto those blocks, which leaves a one-dimensional radial
//! integral over `t = |ν|²` handled by Gauss–Laguerre.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::channels::{displacement_matrix, loss_amplitudes, ChannelParams};
use crate::error::{invalid, Result};
use crate::linalg::{entropy_of_spectrum, hermitian_eigenvalues, hermitize};
use crate::quadrature::gauss_laguerre;
use crate::states::epr_schmidt_coefficients;

const NODE_WEIGHT_FLOOR: f64 = 1e-20;

/// Block-diagonal two-mode state, one block per `Δ ∈ (-dim, dim)`.
#[derive(Debug, Clone)]
pub(crate) struct SectorState {
    dim: usize,
    blocks: Vec<DMatrix<Complex64>>,
}

impl SectorState {
    fn block_range(dim: usize, delta: isize) -> (usize, usize) {
        let lo = (-delta).max(0) as usize;
        let hi = dim - 1 - delta.max(0) as usize;
        (lo, hi - lo + 1)
    }

    pub(crate) fn trace(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.diagonal().iter().map(|z| z.re).sum::<f64>())
            .sum()
    }

    pub(crate) fn entropy(&self) -> Result<f64> {
        let spectrum: Vec<f64> = self
            .blocks
            .iter()
            .flat_map(|b| hermitian_eigenvalues(b))
            .collect();
        entropy_of_spectrum(spectrum)
    }

    pub(crate) fn mixture(parts: &[(f64, &SectorState)]) -> SectorState {
        let first = parts[0].1;
        let blocks = (0..first.blocks.len())
            .map(|i| {
                let mut acc = DMatrix::zeros(first.blocks[i].nrows(), first.blocks[i].ncols());
                for (p, s) in parts {
                    acc += &s.blocks[i] * Complex64::new(*p, 0.0);
                }
                acc
            })
            .collect();
        SectorState {
            dim: first.dim,
            blocks,
        }
    }

    pub(crate) fn max_abs_diff(&self, other: &SectorState) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a - b).camax())
            .fold(0.0, f64::max)
    }

    /// Dense matrix in the `signal ⊗ idler` basis (signal index most significant).
    #[cfg(test)]
    pub(crate) fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim;
        let mut out = DMatrix::zeros(n * n, n * n);
        for (i, block) in self.blocks.iter().enumerate() {
            let delta = i as isize - (n as isize - 1);
            let (lo, size) = Self::block_range(n, delta);
            for r in 0..size {
                for c in 0..size {
                    let (br, bc) = (lo + r, lo + c);
                    let (ar, ac) = ((br as isize + delta) as usize, (bc as isize + delta) as usize);
                    out[(ar * n + br, ac * n + bc)] = block[(r, c)];
                }
            }
        }
        out
    }
}

/// Radial nodes `(t, weight)` for `∫ d²ν G(ν) F(|ν|²)` with `E|ν|² = n_th`.
///
/// The Laguerre nodes are scaled to the narrower rate `n_th / (1 + n_th)`
/// and reweighted by `e^t / (1 + n_th)`, making the integrand polynomial.
fn radial_rule(n_th: f64, order: usize) -> Result<Vec<(f64, f64)>> {
    if n_th == 0.0 {
        return Ok(vec![(0.0, 1.0)]);
    }
    let rule = gauss_laguerre(order)?;
    let scale = n_th / (1.0 + n_th);
    Ok(rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&u, &w)| {
            let t = scale * u;
            (t, w * t.exp() / (1.0 + n_th))
        })
        .filter(|&(_, w)| w > NODE_WEIGHT_FLOOR)
        .collect())
}

/// One EPR copy with `photons` signal photons, signal through the cell
/// channel and idler through a pure loss of transmissivity `idler_eta`.
fn output_once(
    photons: f64,
    params: ChannelParams,
    idler_eta: f64,
    dim: usize,
    order: usize,
) -> Result<SectorState> {
    let (coeffs, _) = epr_schmidt_coefficients(photons, dim);
    let signal = loss_amplitudes(params.transmissivity(), dim);
    let idler = loss_amplitudes(idler_eta, dim);
    let phase = if params.z().norm() > 0.0 { params.z().arg() } else { 0.0 };
    let rotation: Vec<Complex64> = (0..dim)
        .map(|j| Complex64::from_polar(1.0, phase * j as f64))
        .collect();
    let nodes: Vec<(f64, DMatrix<f64>)> = radial_rule(params.n_th(), order)?
        .into_iter()
        .map(|(t, w)| {
            let d = displacement_matrix(Complex64::new(t.sqrt(), 0.0), dim).map(|z| z.re);
            (w.sqrt(), d)
        })
        .collect();
    let idler_losses = if idler_eta >= 1.0 { 1 } else { dim };
    let signal_losses = if params.transmissivity() >= 1.0 { 1 } else { dim };

    let blocks = (0..2 * dim - 1)
        .into_par_iter()
        .map(|i| {
            let delta = i as isize - (dim as isize - 1);
            let (lo, size) = SectorState::block_range(dim, delta);
            let mut cols: Vec<Complex64> = Vec::new();
            let mut column = vec![Complex64::new(0.0, 0.0); size];
            for (sw, d) in &nodes {
                for l in 0..idler_losses {
                    for k in 0..signal_losses {
                        let mut nonzero = false;
                        for (r, slot) in column.iter_mut().enumerate() {
                            let b = lo + r;
                            let m = b + l;
                            *slot = Complex64::new(0.0, 0.0);
                            if m >= dim || k > m {
                                continue;
                            }
                            let j = m - k;
                            let a = (b as isize + delta) as usize;
                            let amp = coeffs[m] * idler[m][l] * signal[m][k] * sw * d[(a, j)];
                            if amp != 0.0 {
                                *slot = rotation[j] * amp;
                                nonzero = true;
                            }
                        }
                        if nonzero {
                            cols.extend_from_slice(&column);
                        }
                    }
                }
            }
            let ncols = cols.len() / size.max(1);
            let v = DMatrix::from_vec(size, ncols, cols);
            let mut block = &v * v.adjoint();
            hermitize(&mut block);
            block
        })
        .collect();
    Ok(SectorState { dim, blocks })
}

/// Output sectors with the radial-quadrature doubling check.
pub(crate) fn epr_output(
    photons: f64,
    params: ChannelParams,
    idler_eta: f64,
    dim: usize,
    quad_order: usize,
) -> Result<SectorState> {
    if dim < 2 {
        return invalid("pair dimension must be at least 2");
    }
    if quad_order == 0 {
        return invalid("quadrature order must be at least 1");
    }
    if params.n_th() == 0.0 {
        return output_once(photons, params, idler_eta, dim, 1);
    }
    crate::channels::refine_order(
        quad_order,
        "radial noise integral",
        |q| output_once(photons, params, idler_eta, dim, q),
        |a, b| a.max_abs_diff(b),
    )
}
