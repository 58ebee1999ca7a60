//! Diffraction-induced interbit interference for a line of cells imaged by a
//! thin lens with a slit pupil.
//!
//! The normal modes of the imaging system attenuate independently; their
//! squared amplitude factors are the eigenvalues of the cell-space Gram
//! matrix, a Toeplitz matrix whose symbol is the windowed aliased sinc²
//!
//! ```text
//! f(z) = Σ_m a sinc²(π a (z/2π - m)),   |z/2π - m| ≤ ℓ/x_R,   a = d/ℓ
//! ```
//!
//! Eigenvalues of the Gram matrix are read as `τ²`; `τ` is the amplitude
//! attenuation that multiplies the reflectance and the noise amplitude.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::channels::MarginalCell;
use crate::error::{invalid, Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::rates::{holevo_rate, RateOptions, RateResult};
use crate::special::{sinc, sine_integral, trigamma};
use crate::states::TransmitterSpec;

/// Default number of symbol samples over `[0, 2π]`.
pub const DEFAULT_SYMBOL_GRID: usize = 4096;
/// Absolute tolerance of the adaptive Gram-coefficient integrals.
pub const GRAM_TOLERANCE: f64 = 1e-10;
/// Window half-widths above this use the closed-form tail when `d = ℓ`.
const COMPLEMENT_THRESHOLD: f64 = 64.0;
/// Relative slack for deciding that a term sits exactly on the window edge.
const EDGE_SLACK: f64 = 1e-12;

/// Optical layout: wavelength, object and image distances, focal length,
/// pupil half-width `R`, cell pitch `ℓ`, cell width `d` and array length
/// `L`, all in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffractionGeometry {
    pub lambda: f64,
    pub d_o: f64,
    pub d_i: f64,
    pub focal: f64,
    pub pupil_radius: f64,
    pub ell: f64,
    pub d: f64,
    pub length: f64,
}

impl DiffractionGeometry {
    /// Validates the lens law and `0 < d ≤ ℓ ≤ L`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        lambda: f64,
        d_o: f64,
        d_i: f64,
        focal: f64,
        pupil_radius: f64,
        ell: f64,
        d: f64,
        length: f64,
    ) -> Result<Self> {
        let named = [
            ("lambda", lambda),
            ("D_o", d_o),
            ("D_i", d_i),
            ("focal", focal),
            ("R", pupil_radius),
            ("ell", ell),
            ("d", d),
            ("L", length),
        ];
        if let Some((name, v)) = named.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return invalid(format!("{name} = {v} must be positive and finite"));
        }
        let mismatch = (1.0 / d_o + 1.0 / d_i - 1.0 / focal).abs();
        if mismatch > 1e-9 / focal {
            return invalid(format!(
                "lens law violated: 1/D_o + 1/D_i - 1/f = {mismatch:.3e}"
            ));
        }
        if !(d <= ell * (1.0 + EDGE_SLACK) && ell <= length) {
            return invalid(format!("need 0 < d <= ell <= L, got d = {d}, ell = {ell}, L = {length}"));
        }
        let geom = Self {
            lambda,
            d_o,
            d_i,
            focal,
            pupil_radius,
            ell,
            d,
            length,
        };
        if !geom.is_paraxial() {
            log::warn!("d^2 = {:.3e} is not small against lambda D_o = {:.3e}", d * d, lambda * d_o);
        }
        Ok(geom)
    }

    /// A 1:1 layout (650 nm, `D_o = D_i = 1 mm`, `ℓ = 1 µm`, `L = 1 mm`) whose
    /// pupil is chosen so that `ℓ/x_R = ratio`.
    pub fn for_ratio(ratio: f64, d_over_ell: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio.is_finite()) {
            return invalid(format!("ell/x_R = {ratio} must be positive"));
        }
        if !(d_over_ell > 0.0 && d_over_ell <= 1.0) {
            return invalid(format!("d/ell = {d_over_ell} outside (0, 1]"));
        }
        let (lambda, d_o, ell) = (650e-9, 1e-3, 1e-6);
        Self::new(
            lambda,
            d_o,
            d_o,
            d_o / 2.0,
            ratio * lambda * d_o / ell,
            ell,
            ell * d_over_ell,
            1e-3,
        )
    }

    /// `x_R = λ D_o / R`.
    pub fn rayleigh_length(&self) -> f64 {
        self.lambda * self.d_o / self.pupil_radius
    }

    pub fn magnification(&self) -> f64 {
        self.d_i / self.d_o
    }

    /// `d² < 0.01 λ D_o`: the object-side phase is flat across one cell.
    pub fn is_paraxial(&self) -> bool {
        self.d * self.d < 0.01 * self.lambda * self.d_o
    }

    /// `d/ℓ`.
    pub fn fill_factor(&self) -> f64 {
        self.d / self.ell
    }

    /// `ℓ/x_R`, the symbol's window half-width.
    pub fn resolution_ratio(&self) -> f64 {
        self.ell / self.rayleigh_length()
    }

    /// `L/x_R`, the number of transmitted Fourier modes on each side.
    pub fn transmitted_band(&self) -> f64 {
        self.length / self.rayleigh_length()
    }

    /// Object-side phase `θ_o(x) = π x²/(λ D_o) + 2π D_o/λ`.
    pub fn object_phase(&self, x: f64) -> f64 {
        PI * x * x / (self.lambda * self.d_o) + 2.0 * PI * (self.d_o / self.lambda).fract()
    }
}

/// `x_R = λ D_o / R`.
pub fn rayleigh_length(geom: &DiffractionGeometry) -> f64 {
    geom.rayleigh_length()
}

fn band_limit(x: f64) -> i64 {
    (x * (1.0 + EDGE_SLACK)).floor() as i64
}

fn check_band(range: &RangeInclusive<i64>, limit: i64, what: &str) -> Result<()> {
    if range.is_empty() || range.start().abs() > limit || range.end().abs() > limit {
        return invalid(format!(
            "{what} range {}..={} outside the band |{what}| <= {limit}",
            range.start(),
            range.end()
        ));
    }
    Ok(())
}

/// Overlap matrix `M_ij` (rows: transmitted Fourier modes `i`, columns:
/// cells `j`), the complex conjugate of
/// `√(d/L) e^{iθ_o(jℓ)} sinc(π i d/L) e^{i2π j i ℓ/L}`.
pub fn overlap_matrix(
    geom: &DiffractionGeometry,
    i_range: RangeInclusive<i64>,
    j_range: RangeInclusive<i64>,
) -> Result<DMatrix<Complex64>> {
    check_band(&i_range, band_limit(geom.transmitted_band()), "i")?;
    check_band(&j_range, band_limit(geom.length / (2.0 * geom.ell)), "j")?;
    let (d, l, ell) = (geom.d, geom.length, geom.ell);
    let scale = (d / l).sqrt();
    let rows = (i_range.end() - i_range.start() + 1) as usize;
    let cols = (j_range.end() - j_range.start() + 1) as usize;
    let (i0, j0) = (*i_range.start(), *j_range.start());
    Ok(DMatrix::from_fn(rows, cols, |r, c| {
        let (i, j) = ((i0 + r as i64) as f64, (j0 + c as i64) as f64);
        let phase = geom.object_phase(j * ell) + 2.0 * PI * ((j * i * ell / l).fract());
        Complex64::from_polar(scale * sinc(PI * i * d / l), phase).conj()
    }))
}

/// Finite-array Toeplitz coefficients
/// `(d/L) Σ_{|i| ≤ L/x_R} sinc²(π i d/L) e^{i2π q i ℓ/L}` for `q = j - k`,
/// assembled into a `size × size` matrix. It has the same spectrum as
/// `M†M` restricted to `size` consecutive cells.
pub fn discrete_gram_matrix(geom: &DiffractionGeometry, size: usize) -> Result<DMatrix<Complex64>> {
    if size == 0 {
        return invalid("Gram matrix size must be at least 1");
    }
    let band = band_limit(geom.transmitted_band());
    let (d, l, ell) = (geom.d, geom.length, geom.ell);
    let coeff = |q: i64| -> Complex64 {
        (-band..=band)
            .map(|i| {
                let i = i as f64;
                let w = d / l * sinc(PI * i * d / l).powi(2);
                Complex64::from_polar(w, 2.0 * PI * ((q as f64 * i * ell / l).fract()))
            })
            .sum()
    };
    let coeffs: Vec<Complex64> = (0..size as i64).map(coeff).collect();
    Ok(DMatrix::from_fn(size, size, |k, j| {
        if j >= k {
            coeffs[j - k]
        } else {
            coeffs[k - j].conj()
        }
    }))
}

/// How a Gram coefficient is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramMethod {
    /// Adaptive Gauss–Kronrod on the sinc² integral.
    Adaptive,
    /// Closed form through the sine integral.
    SineIntegral,
}

/// `t_q = (d/ℓ) ∫_{-ℓ/x_R}^{ℓ/x_R} sinc²(π x d/ℓ) e^{i2π q x} dx` (real).
pub fn gram_coefficient(geom: &DiffractionGeometry, q: i64, method: GramMethod) -> Result<f64> {
    gram_coefficient_raw(geom.fill_factor(), geom.resolution_ratio(), q, method)
}

fn gram_coefficient_raw(a: f64, r: f64, q: i64, method: GramMethod) -> Result<f64> {
    let qf = q as f64;
    match method {
        GramMethod::Adaptive => {
            let scale = r * (2.0 * qf.abs()).max(2.0 * a).max(1.0);
            let segments = 2 * scale.ceil() as usize;
            let half = integrate_adaptive(
                |x| sinc(PI * a * x).powi(2) * (2.0 * PI * qf * x).cos(),
                0.0,
                r,
                GRAM_TOLERANCE / (2.0 * a),
                segments,
            )?;
            Ok(2.0 * a * half)
        }
        GramMethod::SineIntegral => {
            // ∫_0^r (1 - cos kx)/x² dx
            let f = |k: f64| {
                let k = k.abs();
                if k == 0.0 {
                    0.0
                } else {
                    -(1.0 - (k * r).cos()) / r + k * sine_integral(k * r)
                }
            };
            let plus = f(2.0 * PI * (a + qf));
            let minus = f(2.0 * PI * (a - qf));
            Ok((0.5 * plus + 0.5 * minus - f(2.0 * PI * qf)) / (PI * PI * a))
        }
    }
}

/// The `size × size` Toeplitz Gram matrix `(t_{j-k})`, real symmetric.
pub fn gram_matrix(geom: &DiffractionGeometry, size: usize) -> Result<DMatrix<f64>> {
    gram_matrix_with(geom, size, GramMethod::Adaptive)
}

pub fn gram_matrix_with(
    geom: &DiffractionGeometry,
    size: usize,
    method: GramMethod,
) -> Result<DMatrix<f64>> {
    if size == 0 {
        return invalid("Gram matrix size must be at least 1");
    }
    let coeffs: Vec<f64> = (0..size as i64)
        .into_par_iter()
        .map(|q| gram_coefficient(geom, q, method))
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(size, size, |k, j| coeffs[k.abs_diff(j)]))
}

/// How the symbol's window sum is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolRoute {
    /// Direct sum over the window.
    Direct,
    /// `1 - (tail outside the window)` with the tails summed by trigamma;
    /// only valid for `d = ℓ`.
    Complement,
}

fn default_route(a: f64, r: f64) -> SymbolRoute {
    if a == 1.0 && r > COMPLEMENT_THRESHOLD {
        SymbolRoute::Complement
    } else {
        SymbolRoute::Direct
    }
}

/// Weight of a term at offset `x = y - m` in a window of half-width `r`:
/// one inside, zero outside, and one half on the edge.
fn window_weight(x: f64, r: f64) -> f64 {
    let gap = x.abs() - r;
    let slack = EDGE_SLACK * r.max(1.0);
    if gap < -slack {
        1.0
    } else if gap <= slack {
        0.5
    } else {
        0.0
    }
}

fn symbol_direct(a: f64, r: f64, y: f64) -> f64 {
    let lo = (y - r).floor() as i64 - 1;
    let hi = (y + r).ceil() as i64 + 1;
    (lo..=hi)
        .map(|m| {
            let x = y - m as f64;
            let w = window_weight(x, r);
            if w == 0.0 {
                0.0
            } else {
                w * a * sinc(PI * a * x).powi(2)
            }
        })
        .sum()
}

fn symbol_complement(r: f64, y: f64) -> f64 {
    // first m above the open window and last m below it
    let slack = EDGE_SLACK * r.max(1.0);
    let above = (y + r - slack).ceil();
    let below = (y - r + slack).floor();
    let s2 = (PI * y).sin().powi(2) / (PI * PI);
    let mut tail = s2 * (trigamma(above - y) + trigamma(y - below));
    for m in [above, below] {
        let x = y - m;
        if window_weight(x, r) == 0.5 {
            tail -= 0.5 * sinc(PI * x).powi(2);
        }
    }
    1.0 - tail
}

fn symbol_value(a: f64, r: f64, z: f64, route: SymbolRoute) -> f64 {
    let y = (z / (2.0 * PI)).rem_euclid(1.0);
    match route {
        SymbolRoute::Direct => symbol_direct(a, r, y),
        SymbolRoute::Complement => symbol_complement(r, y),
    }
}

/// The Toeplitz symbol `f(z)` at angle `z`.
pub fn toeplitz_symbol(geom: &DiffractionGeometry, z: f64) -> f64 {
    let (a, r) = (geom.fill_factor(), geom.resolution_ratio());
    symbol_value(a, r, z, default_route(a, r))
}

/// The symbol through an explicit evaluation route.
pub fn toeplitz_symbol_with(geom: &DiffractionGeometry, z: f64, route: SymbolRoute) -> Result<f64> {
    let (a, r) = (geom.fill_factor(), geom.resolution_ratio());
    if route == SymbolRoute::Complement && (a - 1.0).abs() > EDGE_SLACK {
        return invalid("the complement route needs d = ell");
    }
    Ok(symbol_value(a, r, z, route))
}

/// Sampled symbol and its extrema as amplitude factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSpectrum {
    /// `(z_i, f(z_i))` on `z_i = 2π i / grid_size`, `i = 0..=grid_size`.
    pub symbol_samples: Vec<(f64, f64)>,
    pub tau_min: f64,
    pub tau_max: f64,
    /// Angles where the extrema were located.
    pub z_min: f64,
    pub z_max: f64,
}

impl ToeplitzSpectrum {
    pub fn symbol_min(&self) -> f64 {
        self.tau_min * self.tau_min
    }

    pub fn symbol_max(&self) -> f64 {
        self.tau_max * self.tau_max
    }
}

/// Golden-section search for the minimum of `f` on `[lo, hi]`.
fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= 1e-14 * (1.0 + lo.abs()) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Extrema of the symbol over `[0, 2π]`: a uniform grid of `grid_size`
/// cells, then a golden-section polish in the cells around the best samples.
pub fn tau_extrema(geom: &DiffractionGeometry, grid_size: usize) -> Result<ToeplitzSpectrum> {
    if grid_size < 1024 {
        return invalid(format!("symbol grid of {grid_size} points is too coarse (minimum 1024)"));
    }
    let (a, r) = (geom.fill_factor(), geom.resolution_ratio());
    let route = default_route(a, r);
    let f = |z: f64| symbol_value(a, r, z, route);
    let step = 2.0 * PI / grid_size as f64;
    let samples: Vec<(f64, f64)> = (0..=grid_size)
        .into_par_iter()
        .map(|i| {
            let z = step * i as f64;
            (z, f(z))
        })
        .collect();
    if let Some(&(z, v)) = samples.iter().find(|(_, v)| !(*v >= -1e-12 && *v <= 1.0 + 1e-9)) {
        return Err(Error::Quadrature(format!("symbol value {v} at z = {z} outside [0, 1]")));
    }
    let arg = |better: fn(f64, f64) -> bool| {
        samples
            .iter()
            .enumerate()
            .fold(0usize, |best, (i, s)| if better(s.1, samples[best].1) { i } else { best })
    };
    let polish = |i: usize, sign: f64| {
        let lo = step * (i.max(1) - 1) as f64;
        let hi = step * (i + 1).min(grid_size) as f64;
        let (z, v) = golden_min(|z| sign * f(z), lo, hi);
        let (zs, vs) = samples[i];
        if sign * vs <= v {
            (zs, vs)
        } else {
            (z, sign * v)
        }
    };
    let (z_min, f_min) = polish(arg(|x, y| x < y), 1.0);
    let (z_max, f_max) = polish(arg(|x, y| x > y), -1.0);
    let tau = |v: f64| v.clamp(0.0, 1.0).sqrt();
    Ok(ToeplitzSpectrum {
        symbol_samples: samples,
        tau_min: tau(f_min),
        tau_max: tau(f_max),
        z_min,
        z_max,
    })
}

/// Transfer matrix `T_kh` between object-side and image-side Fourier modes
/// for a slit pupil.
///
/// The position integrals reduce to sincs and leave
/// `T_kh = ∫_{-L/x_R}^{L/x_R} sinc(π(h+ξ)) sinc(π(k+ξ)) dξ`, integrated
/// adaptively to `quad_tol`. The entries are real.
pub fn transfer_matrix(
    geom: &DiffractionGeometry,
    k_range: RangeInclusive<i64>,
    h_range: RangeInclusive<i64>,
    quad_tol: f64,
) -> Result<DMatrix<Complex64>> {
    if k_range.is_empty() || h_range.is_empty() {
        return invalid("transfer matrix needs nonempty index ranges");
    }
    if !(quad_tol > 0.0) {
        return invalid(format!("quadrature tolerance {quad_tol} must be positive"));
    }
    let w = geom.transmitted_band();
    let ks: Vec<i64> = k_range.collect();
    let hs: Vec<i64> = h_range.collect();
    let segments = (4.0 * w).ceil() as usize + 1;
    let entries: Vec<f64> = ks
        .par_iter()
        .flat_map_iter(|&k| hs.iter().map(move |&h| (k, h)))
        .map(|(k, h)| {
            let (k, h) = (k as f64, h as f64);
            integrate_adaptive(
                |x| sinc(PI * (h + x)) * sinc(PI * (k + x)),
                -w,
                w,
                quad_tol,
                segments,
            )
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(ks.len(), hs.len(), |r, c| {
        Complex64::new(entries[r * hs.len() + c], 0.0)
    }))
}

/// Near-field transmission profile `t_h`: one inside the band
/// `|h| < L/x_R`, zero outside.
pub fn step_profile(geom: &DiffractionGeometry, h: i64) -> f64 {
    if (h as f64).abs() < geom.transmitted_band() {
        1.0
    } else {
        0.0
    }
}

/// Which modes pass through the diffraction attenuators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffractionScope {
    /// Only the signal modes reach the memory and the collection optics.
    #[default]
    SignalOnly,
    /// Idler modes are attenuated by the same factor as the signal.
    SignalAndIdler,
}

/// Reading-rate bounds from the fictitious channels that attenuate every
/// mode by `τ_min` (lower) or `τ_max` (upper).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBounds {
    pub lower: RateResult,
    pub upper: RateResult,
    pub tau_min: f64,
    pub tau_max: f64,
}

/// Rate of the cell followed by an attenuator of amplitude `tau`.
pub fn attenuated_rate(
    cell: &MarginalCell,
    tx: &TransmitterSpec,
    tau: f64,
    n_th: f64,
    opts: &RateOptions,
    scope: DiffractionScope,
) -> Result<RateResult> {
    let cell = cell.attenuated(tau)?;
    let mut opts = *opts;
    if scope == DiffractionScope::SignalAndIdler {
        opts.idler_attenuation *= tau;
    }
    holevo_rate(&cell, tx, n_th * tau * tau, &opts)
}

/// Bounds for given attenuation extrema.
pub fn rate_bounds_for_taus(
    cell: &MarginalCell,
    tx: &TransmitterSpec,
    tau_min: f64,
    tau_max: f64,
    n_th: f64,
    opts: &RateOptions,
    scope: DiffractionScope,
) -> Result<RateBounds> {
    if !(0.0..=1.0).contains(&tau_min) || !(tau_min..=1.0).contains(&tau_max) {
        return invalid(format!("need 0 <= tau_min <= tau_max <= 1, got {tau_min}, {tau_max}"));
    }
    let lower = attenuated_rate(cell, tx, tau_min, n_th, opts, scope)?;
    let upper = if tau_max == tau_min {
        lower
    } else {
        attenuated_rate(cell, tx, tau_max, n_th, opts, scope)?
    };
    if lower.rate_bits > upper.rate_bits + 1e-7 {
        return Err(Error::BoundOrder {
            lower: lower.rate_bits,
            upper: upper.rate_bits,
        });
    }
    Ok(RateBounds {
        lower,
        upper,
        tau_min,
        tau_max,
    })
}

/// Lower and upper reading-rate bounds under diffraction for `geom`.
pub fn rate_bounds(
    cell: &MarginalCell,
    tx: &TransmitterSpec,
    geom: &DiffractionGeometry,
    n_th: f64,
    opts: &RateOptions,
    scope: DiffractionScope,
) -> Result<RateBounds> {
    let spectrum = tau_extrema(geom, DEFAULT_SYMBOL_GRID)?;
    rate_bounds_for_taus(cell, tx, spectrum.tau_min, spectrum.tau_max, n_th, opts, scope)
}
