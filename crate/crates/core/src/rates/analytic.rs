//! Closed-form rates for binary cells.

use crate::channels::MarginalCell;
use crate::error::{invalid, Error, Result};

fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// `h_d[q_1, …, q_{d-1}]`: Shannon entropy in bits of the distribution
/// `(q_1, …, q_{d-1}, 1 - Σ q_i)`.
pub fn shannon_entropy_d(q: &[f64]) -> Result<f64> {
    if let Some(x) = q.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
        return invalid(format!("probability {x} is negative or not finite"));
    }
    let total: f64 = q.iter().sum();
    if total > 1.0 + 1e-12 {
        return invalid(format!("probabilities sum to {total} > 1"));
    }
    let rest = (1.0 - total).max(0.0);
    Ok(-(q.iter().map(|&x| xlog2x(x)).sum::<f64>() + xlog2x(rest)))
}

/// Same as [`shannon_entropy_d`] but reports an argument sum above one as
/// leaving the faint-signal regime.
fn h_regime(q: &[f64]) -> Result<f64> {
    let total: f64 = q.iter().sum();
    if total > 1.0 {
        return Err(Error::OutOfRegime(format!(
            "entropy arguments {q:?} sum to {total} > 1"
        )));
    }
    shannon_entropy_d(q)
}

struct Binary {
    p0: f64,
    p1: f64,
    dz2: f64,
    abs2: [f64; 2],
}

fn binary(cell: &MarginalCell) -> Result<Binary> {
    if cell.len() != 2 {
        return invalid(format!("closed forms need a binary cell, got {} symbols", cell.len()));
    }
    let (p, z) = (cell.probs(), cell.reflectances());
    Ok(Binary {
        p0: p[0],
        p1: p[1],
        dz2: (z[1] - z[0]).norm_sqr(),
        abs2: [z[0].norm_sqr(), z[1].norm_sqr()],
    })
}

fn check_photons(n: f64) -> Result<()> {
    if !(n >= 0.0 && n.is_finite()) {
        return invalid(format!("photon number {n} must be finite and non-negative"));
    }
    Ok(())
}

/// `h₂[½ - ½√(1 - 4 p₀p₁ (1 - q))]`, the binary rate of two pure outputs
/// with squared overlap `q`.
fn pure_pair_rate(p0: f64, p1: f64, q: f64) -> f64 {
    let inner = (1.0 - 4.0 * p0 * p1 * (1.0 - q)).max(0.0);
    let x = (0.5 - 0.5 * inner.sqrt()).clamp(0.0, 1.0);
    -(xlog2x(x) + xlog2x(1.0 - x))
}

/// Noiseless coherent rate `h₂[½ - ½√(1 - 4p₀p₁(1 - e^{-n|Δz|²}))]`.
pub fn coherent_capacity_noiseless(cell: &MarginalCell, n: f64) -> Result<f64> {
    check_photons(n)?;
    let b = binary(cell)?;
    Ok(pure_pair_rate(b.p0, b.p1, (-n * b.dz2).exp()))
}

/// Faint-signal coherent rate `h₂[p₀p₁n|Δz|² + n_th] - h₂[n_th]`, or with
/// `leading_only` its `x log x` leading terms.
pub fn coherent_capacity_faint(
    cell: &MarginalCell,
    n: f64,
    n_th: f64,
    leading_only: bool,
) -> Result<f64> {
    check_photons(n)?;
    check_photons(n_th)?;
    let b = binary(cell)?;
    let x = b.p0 * b.p1 * n * b.dz2;
    if leading_only {
        return Ok(xlog2x(n_th) - xlog2x(x + n_th));
    }
    Ok(h_regime(&[x + n_th])? - h_regime(&[n_th])?)
}

/// Noiseless EPR rate for pure phase encoding `z₁/z₀ = e^{iθ}` with `s`
/// copies sharing `n` photons.
pub fn epr_rate_noiseless_phase(p0: f64, p1: f64, theta: f64, n: f64, s: usize) -> Result<f64> {
    check_photons(n)?;
    if s == 0 {
        return invalid("EPR transmitter needs at least one copy");
    }
    if !(p0 >= 0.0 && p1 >= 0.0 && (p0 + p1 - 1.0).abs() <= 1e-12) {
        return invalid(format!("p0 = {p0}, p1 = {p1} is not a distribution"));
    }
    let per = n / s as f64;
    let base = num_complex::Complex64::new(1.0 + per * (1.0 - theta.cos()), -per * theta.sin());
    let q = base.norm_sqr().powf(-(s as f64));
    Ok(pure_pair_rate(p0, p1, q))
}

/// Faint-signal EPR rate
/// `h₄[p₀p₁n|Δz|², (1-⟨|z|²⟩)n, n_th] - Σ p_u h₃[(1-|z_u|²)n, n_th]`, or
/// with `leading_only` the noise-free leading term `-x log₂ x`.
pub fn epr_rate_faint(cell: &MarginalCell, n: f64, n_th: f64, leading_only: bool) -> Result<f64> {
    check_photons(n)?;
    check_photons(n_th)?;
    let b = binary(cell)?;
    let x = b.p0 * b.p1 * n * b.dz2;
    if leading_only {
        return Ok(-xlog2x(x));
    }
    let mean = b.p0 * b.abs2[0] + b.p1 * b.abs2[1];
    let joint = h_regime(&[x, (1.0 - mean) * n, n_th])?;
    let cond = b.p0 * h_regime(&[(1.0 - b.abs2[0]) * n, n_th])?
        + b.p1 * h_regime(&[(1.0 - b.abs2[1]) * n, n_th])?;
    Ok(joint - cond)
}
