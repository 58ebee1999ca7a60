//! Holevo reading rates.
//!
//! [`holevo_rate`] is the exact numeric route: each symbol's output state is
//! built in a truncated number basis and the rate is
//! `S(Σ p_u ρ_u) - Σ p_u S(ρ_u)` in bits. The closed forms in
//! [`analytic`] cover the noiseless and faint-signal limits.

pub mod analytic;
mod sector;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channels::{
    apply_cell_channel, gaussian_channel_action, ChannelParams, MarginalCell, DEFAULT_QUAD_ORDER,
};
use crate::error::{invalid, Error, Result};
use crate::states::{
    coherent_state, symplectic_entropy, von_neumann_entropy, GaussianState, TransmitterKind,
    TransmitterSpec, Truncation, DEFAULT_EPS_TRUNC,
};

pub use analytic::{
    coherent_capacity_faint, coherent_capacity_noiseless, epr_rate_faint,
    epr_rate_noiseless_phase, shannon_entropy_d,
};

/// Largest rate change tolerated when the truncation grows by [`REFINE_STEP`].
pub const CONVERGENCE_TOLERANCE: f64 = 1e-5;
/// Extra levels used for the truncation convergence check.
pub const REFINE_STEP: usize = 10;
/// `G_r` is left undefined below this coherent rate.
pub const RELATIVE_GAIN_FLOOR: f64 = 1e-12;

/// How a rate value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateMethod {
    FockNumeric,
    AnalyticNoiseless,
    FaintApprox,
}

impl RateMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            RateMethod::FockNumeric => "fock_numeric",
            RateMethod::AnalyticNoiseless => "analytic_noiseless",
            RateMethod::FaintApprox => "faint_approx",
        }
    }
}

impl std::fmt::Display for RateMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Numerical knobs of [`holevo_rate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateOptions {
    /// Fock levels for the single-mode coherent computation.
    pub dim: usize,
    /// Fock levels per mode for the signal-idler computation.
    pub pair_dim: usize,
    /// Gauss–Hermite (coherent) or Gauss–Laguerre (EPR) order of the noise integral.
    pub quad_order: usize,
    /// Largest tolerated probability lost to truncation.
    pub eps_trunc: f64,
    /// Recompute at `dim + 10` and fail if the rate moves by more than [`CONVERGENCE_TOLERANCE`].
    pub check_convergence: bool,
    /// Amplitude attenuation applied to the idler (EPR only); 1 leaves it untouched.
    pub idler_attenuation: f64,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self {
            dim: Truncation::single_mode().dim,
            pair_dim: Truncation::two_mode().dim,
            quad_order: DEFAULT_QUAD_ORDER,
            eps_trunc: DEFAULT_EPS_TRUNC,
            check_convergence: true,
            idler_attenuation: 1.0,
        }
    }
}

/// A rate in bits with the numerical context it was computed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub rate_bits: f64,
    pub truncation_dim: usize,
    pub trace_deficit: f64,
    pub method: RateMethod,
    /// Largest gap between Fock and symplectic conditional entropies.
    pub entropy_crosscheck: Option<f64>,
}

impl RateResult {
    /// Wraps a closed-form value.
    pub fn analytic(rate_bits: f64, method: RateMethod) -> Self {
        Self {
            rate_bits,
            truncation_dim: 0,
            trace_deficit: 0.0,
            method,
            entropy_crosscheck: None,
        }
    }
}

struct Evaluation {
    rate: f64,
    deficit: f64,
    crosscheck: f64,
}

fn holevo_from_entropies(cell: &MarginalCell, mixture: f64, conditional: &[f64]) -> f64 {
    let avg: f64 = cell
        .probs()
        .iter()
        .zip(conditional)
        .map(|(p, s)| p * s)
        .sum();
    let raw = mixture - avg;
    if raw < -1e-9 {
        log::warn!("Holevo quantity came out negative ({raw:.3e}); clamping to zero");
    }
    raw.max(0.0)
}

fn check_deficit(deficit: f64, eps: f64, dim: usize) -> Result<()> {
    if deficit > eps {
        return Err(Error::Truncation {
            deficit,
            tolerance: eps,
            dim,
        });
    }
    Ok(())
}

fn coherent_evaluation(
    cell: &MarginalCell,
    n: f64,
    n_th: f64,
    dim: usize,
    opts: &RateOptions,
) -> Result<Evaluation> {
    let probe = coherent_state(Complex64::new(n.sqrt(), 0.0), Truncation::new(dim, opts.eps_trunc))?;
    let rho = probe.density();
    let gauss_entropy = {
        let g = GaussianState::coherent(Complex64::new(n.sqrt(), 0.0));
        // the conditional entropy does not depend on the reflectance phase
        let out = gaussian_channel_action(&g, ChannelParams::new(Complex64::new(1.0, 0.0), n_th)?, 0)?;
        symplectic_entropy(&out)?
    };
    let mut outputs = Vec::with_capacity(cell.len());
    let mut conditional = Vec::with_capacity(cell.len());
    let mut deficit = 0.0f64;
    let mut crosscheck = 0.0f64;
    for u in 0..cell.len() {
        let params = cell.channel(u, n_th)?;
        let out = apply_cell_channel(&rho, params, 0, opts.quad_order)?;
        deficit = deficit.max(out.trace_deficit());
        let s = if cell.probs()[u] > 0.0 {
            let s = von_neumann_entropy(&out)?;
            crosscheck = crosscheck.max((s - gauss_entropy).abs());
            s
        } else {
            0.0
        };
        conditional.push(s);
        outputs.push(out);
    }
    check_deficit(deficit, opts.eps_trunc, dim)?;
    let mut mix = outputs[0].matrix() * Complex64::new(cell.probs()[0], 0.0);
    for (out, p) in outputs.iter().zip(cell.probs()).skip(1) {
        mix += out.matrix() * Complex64::new(*p, 0.0);
    }
    let mixture = crate::linalg::entropy_of_spectrum(crate::linalg::hermitian_eigenvalues(&mix))?;
    Ok(Evaluation {
        rate: holevo_from_entropies(cell, mixture, &conditional),
        deficit,
        crosscheck,
    })
}

fn epr_evaluation(
    cell: &MarginalCell,
    n: f64,
    n_th: f64,
    dim: usize,
    opts: &RateOptions,
) -> Result<Evaluation> {
    let idler_eta = opts.idler_attenuation * opts.idler_attenuation;
    // input truncation loss, tanh^{2 dim}
    let input_deficit = (n / (n + 1.0)).powi(dim as i32);
    check_deficit(input_deficit, opts.eps_trunc, dim)?;
    let mut outputs = Vec::with_capacity(cell.len());
    let mut conditional = Vec::with_capacity(cell.len());
    let mut deficit = 0.0f64;
    let mut crosscheck = 0.0f64;
    let idler_params = ChannelParams::new(Complex64::new(opts.idler_attenuation, 0.0), 0.0)?;
    for u in 0..cell.len() {
        let params = cell.channel(u, n_th)?;
        let out = sector::epr_output(n, params, idler_eta, dim, opts.quad_order)?;
        deficit = deficit.max((1.0 - out.trace()).max(0.0));
        let s = if cell.probs()[u] > 0.0 {
            let s = out.entropy()?;
            let g = gaussian_channel_action(&GaussianState::epr(n, 1)?, params, 0)?;
            let g = gaussian_channel_action(&g, idler_params, 1)?;
            crosscheck = crosscheck.max((s - symplectic_entropy(&g)?).abs());
            s
        } else {
            0.0
        };
        conditional.push(s);
        outputs.push(out);
    }
    check_deficit(deficit, opts.eps_trunc, dim)?;
    let parts: Vec<(f64, &sector::SectorState)> =
        cell.probs().iter().copied().zip(outputs.iter()).collect();
    let mixture = sector::SectorState::mixture(&parts).entropy()?;
    Ok(Evaluation {
        rate: holevo_from_entropies(cell, mixture, &conditional),
        deficit,
        crosscheck,
    })
}

/// Holevo rate `χ = S(Σ p_u ρ_u) - Σ p_u S(ρ_u)` of a transmitter reading
/// `cell` under classical noise `n_th`.
///
/// A coherent transmitter is evaluated as the single-mode state `|√n⟩` on a
/// `opts.dim`-level truncation; extra signal modes carry no light and do not
/// change the rate. An EPR transmitter is evaluated for one copy (`s = 1`)
/// on `opts.pair_dim` levels per mode.
pub fn holevo_rate(
    cell: &MarginalCell,
    tx: &TransmitterSpec,
    n_th: f64,
    opts: &RateOptions,
) -> Result<RateResult> {
    if !(n_th >= 0.0 && n_th.is_finite()) {
        return invalid(format!("noise variance {n_th} must be finite and non-negative"));
    }
    if !(0.0..=1.0).contains(&opts.idler_attenuation) {
        return invalid(format!(
            "idler attenuation {} outside [0, 1]",
            opts.idler_attenuation
        ));
    }
    let n = tx.photons();
    let (dim, eval): (usize, fn(&MarginalCell, f64, f64, usize, &RateOptions) -> Result<Evaluation>) =
        match tx.kind() {
            TransmitterKind::Coherent => (opts.dim, coherent_evaluation),
            TransmitterKind::Epr => {
                if tx.signal_modes() != 1 {
                    return invalid(format!(
                        "numeric EPR rates are computed for a single copy, got s = {}",
                        tx.signal_modes()
                    ));
                }
                (opts.pair_dim, epr_evaluation)
            }
        };
    let base = eval(cell, n, n_th, dim, opts)?;
    if opts.check_convergence {
        let refined_dim = dim + REFINE_STEP;
        let refined = eval(cell, n, n_th, refined_dim, opts)?;
        if (refined.rate - base.rate).abs() > CONVERGENCE_TOLERANCE {
            return Err(Error::NonConvergence {
                rate: base.rate,
                dim,
                refined: refined.rate,
                refined_dim,
            });
        }
    }
    if base.crosscheck > 1e-6 {
        log::warn!(
            "conditional entropies differ from the Gaussian value by {:.3e} bits",
            base.crosscheck
        );
    }
    Ok(RateResult {
        rate_bits: base.rate,
        truncation_dim: dim,
        trace_deficit: base.deficit,
        method: RateMethod::FockNumeric,
        entropy_crosscheck: Some(base.crosscheck),
    })
}

/// Rate gain of one EPR copy over the coherent transmitter at equal energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    /// `G_a = χ_EPR - χ_coh` in bits.
    pub absolute: f64,
    /// `G_a / χ_coh`; `None` when `χ_coh` is below [`RELATIVE_GAIN_FLOOR`].
    pub relative: Option<f64>,
    pub coherent: RateResult,
    pub epr: RateResult,
}

pub fn gains(cell: &MarginalCell, n: f64, n_th: f64, opts: &RateOptions) -> Result<Gains> {
    let coherent = holevo_rate(cell, &TransmitterSpec::coherent(n)?, n_th, opts)?;
    let epr = holevo_rate(cell, &TransmitterSpec::epr(n, 1)?, n_th, opts)?;
    let absolute = epr.rate_bits - coherent.rate_bits;
    let relative = (coherent.rate_bits >= RELATIVE_GAIN_FLOOR).then(|| absolute / coherent.rate_bits);
    Ok(Gains {
        absolute,
        relative,
        coherent,
        epr,
    })
}

/// Second differences of `n ↦ χ_coh(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcavityReport {
    /// `(n, χ_coh)` for every grid point.
    pub rates: Vec<(f64, f64)>,
    /// `(n, d2)` at every interior grid point.
    pub second_differences: Vec<(f64, f64)>,
    pub max_second_difference: f64,
    pub argmax_n: f64,
}

/// Second difference on a possibly uneven grid, scaled so that a uniform
/// grid gives `f₊ - 2f + f₋`.
pub fn second_difference(x: [f64; 3], f: [f64; 3]) -> f64 {
    let (h1, h2) = (x[1] - x[0], x[2] - x[1]);
    2.0 * ((f[2] - f[1]) / h2 - (f[1] - f[0]) / h1) * h1 * h2 / (h1 + h2)
}

pub fn concavity_scan(
    cell: &MarginalCell,
    n_grid: &[f64],
    n_th: f64,
    opts: &RateOptions,
) -> Result<ConcavityReport> {
    if n_grid.len() < 3 {
        return invalid("concavity scan needs at least three grid points");
    }
    if n_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("photon-number grid must be strictly increasing");
    }
    let values: Vec<f64> = n_grid
        .par_iter()
        .map(|&n| holevo_rate(cell, &TransmitterSpec::coherent(n)?, n_th, opts).map(|r| r.rate_bits))
        .collect::<Result<_>>()?;
    let second_differences: Vec<(f64, f64)> = (1..n_grid.len() - 1)
        .map(|i| {
            let d2 = second_difference(
                [n_grid[i - 1], n_grid[i], n_grid[i + 1]],
                [values[i - 1], values[i], values[i + 1]],
            );
            (n_grid[i], d2)
        })
        .collect();
    let (argmax_n, max_second_difference) = second_differences
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((n_grid[0], 0.0));
    log::info!("concavity scan at n_th = {n_th}: max second difference {max_second_difference:.3e} at n = {argmax_n}");
    Ok(ConcavityReport {
        rates: n_grid.iter().copied().zip(values).collect(),
        second_differences,
        max_second_difference,
        argmax_n,
    })
}
