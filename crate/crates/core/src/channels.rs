//! The memory-cell channel: attenuation by a complex reflectance `z` followed
//! by a random Gaussian displacement with `E|ν|² = n_th`.
//!
//! Fock-basis actions work on the pure components of the input: the density
//! matrix is eigendecomposed once, each single-mode operator is applied to the
//! components, and the output is reassembled as `K K†`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eigen, hermitize};
use crate::quadrature::gauss_hermite;
use crate::states::{ln_factorial, FockDensityMatrix, GaussianState};

/// Slack on `|z| ≤ 1` and on probability normalization.
const REFLECTANCE_SLACK: f64 = 1e-12;
/// Pure components with weight at or below this are dropped, as are those
/// below the eigensolver's resolution relative to the largest weight.
const COMPONENT_FLOOR: f64 = 1e-17;
const COMPONENT_RELATIVE_FLOOR: f64 = 64.0 * f64::EPSILON;
/// Quadrature nodes whose weight is below this cannot move any entry noticeably.
const NODE_WEIGHT_FLOOR: f64 = 1e-20;
/// Elementwise change allowed when the noise quadrature order is doubled.
pub const QUADRATURE_CHANGE_TOLERANCE: f64 = 1e-7;
/// Default Gauss–Hermite order per quadrature axis.
pub const DEFAULT_QUAD_ORDER: usize = 20;

/// Parameters of one cell channel `a → z a + √(1-|z|²) v + ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    z: Complex64,
    n_th: f64,
}

impl ChannelParams {
    pub fn new(z: Complex64, n_th: f64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm() > 1.0 + REFLECTANCE_SLACK {
            return invalid(format!("reflectance {z} must satisfy |z| <= 1"));
        }
        if !(n_th >= 0.0 && n_th.is_finite()) {
            return invalid(format!("noise variance {n_th} must be finite and non-negative"));
        }
        Ok(Self { z, n_th })
    }

    pub fn identity() -> Self {
        Self {
            z: Complex64::new(1.0, 0.0),
            n_th: 0.0,
        }
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn n_th(&self) -> f64 {
        self.n_th
    }

    /// Transmissivity `|z|²`, clipped into `[0, 1]`.
    pub fn transmissivity(&self) -> f64 {
        self.z.norm_sqr().min(1.0)
    }
}

/// The marginal cell: symbol probabilities `p_u` with reflectances `z_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalCell {
    probs: Vec<f64>,
    reflectances: Vec<Complex64>,
}

impl MarginalCell {
    pub fn new(probs: Vec<f64>, reflectances: Vec<Complex64>) -> Result<Self> {
        if probs.len() < 2 || probs.len() != reflectances.len() {
            return invalid(format!(
                "a cell needs at least two symbols with one reflectance each (got {} probabilities, {} reflectances)",
                probs.len(),
                reflectances.len()
            ));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return invalid(format!("probability {p} is negative or not finite"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > REFLECTANCE_SLACK {
            return invalid(format!("probabilities sum to {total}, not 1"));
        }
        for z in &reflectances {
            ChannelParams::new(*z, 0.0)?;
        }
        Ok(Self {
            probs,
            reflectances,
        })
    }

    /// Binary cell `{p0, 1 - p0; z0, z1}`.
    pub fn binary(p0: f64, z0: Complex64, z1: Complex64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p0) {
            return invalid(format!("p0 = {p0} outside [0, 1]"));
        }
        Self::new(vec![p0, 1.0 - p0], vec![z0, z1])
    }

    /// Binary cell with real reflectances.
    pub fn binary_real(p0: f64, z0: f64, z1: f64) -> Result<Self> {
        Self::binary(p0, Complex64::new(z0, 0.0), Complex64::new(z1, 0.0))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn reflectances(&self) -> &[Complex64] {
        &self.reflectances
    }

    /// Channel parameters of symbol `u` under noise `n_th`.
    pub fn channel(&self, u: usize, n_th: f64) -> Result<ChannelParams> {
        ChannelParams::new(self.reflectances[u], n_th)
    }

    /// The cell seen through an extra amplitude attenuation `tau`.
    pub fn attenuated(&self, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(Self {
            probs: self.probs.clone(),
            reflectances: self.reflectances.iter().map(|z| z * tau).collect(),
        })
    }

    /// Multiplies every reflectance by `e^{iφ}`.
    pub fn with_global_phase(&self, phi: f64) -> Self {
        let phase = Complex64::from_polar(1.0, phi);
        Self {
            probs: self.probs.clone(),
            reflectances: self.reflectances.iter().map(|z| z * phase).collect(),
        }
    }

    /// `⟨|z|²⟩ = Σ p_u |z_u|²`.
    pub fn mean_transmissivity(&self) -> f64 {
        self.probs
            .iter()
            .zip(&self.reflectances)
            .map(|(p, z)| p * z.norm_sqr())
            .sum()
    }

    /// True when all reflectances coincide (the channel carries no information).
    pub fn is_degenerate(&self) -> bool {
        self.reflectances
            .iter()
            .all(|z| (z - self.reflectances[0]).norm() == 0.0)
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return invalid(format!("attenuation {tau} outside [0, 1]"));
    }
    Ok(())
}

/// Follows the cell channel by a pure-loss attenuator of amplitude `tau`.
///
/// The displacement noise passes the attenuator too, so the result is
/// `(τ z, τ² n_th)`.
pub fn compose_with_attenuator(params: ChannelParams, tau: f64) -> Result<ChannelParams> {
    check_tau(tau)?;
    ChannelParams::new(params.z * tau, params.n_th * tau * tau)
}

/// Kraus operators of the attenuator with transmissivity `|z|²`, each
/// followed by the phase rotation `e^{i arg(z) a†a}`.
pub fn loss_kraus(z: Complex64, dim: usize) -> Result<Vec<DMatrix<Complex64>>> {
    let params = ChannelParams::new(z, 0.0)?;
    let eta = params.transmissivity();
    let phase = if z.norm() > 0.0 { z.arg() } else { 0.0 };
    let alpha = loss_amplitudes(eta, dim);
    let kraus_count = if eta >= 1.0 { 1 } else { dim };
    Ok((0..kraus_count)
        .map(|k| {
            let mut a = DMatrix::<Complex64>::zeros(dim, dim);
            for m in k..dim {
                a[(m - k, m)] = Complex64::from_polar(alpha[m][k], phase * (m - k) as f64);
            }
            a
        })
        .collect())
}

/// `α[m][k] = √C(m,k) (1-η)^{k/2} η^{(m-k)/2}`, the amplitude for losing `k`
/// of `m` photons.
pub(crate) fn loss_amplitudes(eta: f64, dim: usize) -> Vec<Vec<f64>> {
    let eta = eta.clamp(0.0, 1.0);
    let lost = 1.0 - eta;
    let mut ln_fact = vec![0.0; dim + 1];
    for m in 1..=dim {
        ln_fact[m] = ln_fact[m - 1] + (m as f64).ln();
    }
    (0..dim)
        .map(|m| {
            (0..=m)
                .map(|k| {
                    let kept = m - k;
                    if (k > 0 && lost == 0.0) || (kept > 0 && eta == 0.0) {
                        return 0.0;
                    }
                    let mut ln = 0.5 * (ln_fact[m] - ln_fact[k] - ln_fact[kept]);
                    if k > 0 {
                        ln += 0.5 * k as f64 * lost.ln();
                    }
                    if kept > 0 {
                        ln += 0.5 * kept as f64 * eta.ln();
                    }
                    ln.exp()
                })
                .collect()
        })
        .collect()
}

/// Displacement operator `D(α)` restricted to the first `dim` number states.
///
/// Entries come from `⟨m|D|n⟩ = √(n!/m!) α^{m-n} e^{-|α|²/2} L_n^{(m-n)}(|α|²)`
/// (and the mirrored form above the diagonal), so every entry equals the
/// corresponding entry of the untruncated operator. Prefactors are built in
/// logs and the Laguerre polynomials by their upward recurrence, which stays
/// accurate for `|α|²` well beyond `dim`.
pub fn displacement_matrix(alpha: Complex64, dim: usize) -> DMatrix<Complex64> {
    let mut d = DMatrix::<Complex64>::zeros(dim, dim);
    let x = alpha.norm_sqr();
    if x == 0.0 {
        d.fill_with_identity();
        return d;
    }
    let ln_r = 0.5 * x.ln();
    let unit = alpha / alpha.norm();
    let mut phases = vec![Complex64::new(1.0, 0.0); dim];
    for k in 1..dim {
        phases[k] = phases[k - 1] * unit;
    }
    let ln_fact: Vec<f64> = (0..dim).map(ln_factorial).collect();
    let mut lag = vec![0.0; dim];
    for k in 0..dim {
        // L_j^{(k)}(x), j = 0..dim-k
        let len = dim - k;
        lag[0] = 1.0;
        if len > 1 {
            lag[1] = 1.0 + k as f64 - x;
        }
        for j in 1..len.saturating_sub(1) {
            let jf = j as f64;
            lag[j + 1] = ((2.0 * jf + 1.0 + k as f64 - x) * lag[j] - (jf + k as f64) * lag[j - 1]) / (jf + 1.0);
        }
        for (j, &l) in lag.iter().enumerate().take(len) {
            let m = j + k;
            let ln_mag = 0.5 * (ln_fact[j] - ln_fact[m]) + k as f64 * ln_r - 0.5 * x;
            let mag = ln_mag.exp() * l;
            // ⟨m|D|j⟩ and ⟨j|D|m⟩ = (-1)^k conj(...)
            let below = phases[k] * mag;
            d[(m, j)] = below;
            if k > 0 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                d[(j, m)] = below.conj() * sign;
            }
        }
    }
    d
}

/// Two-dimensional rule for `∫ d²ν G(ν) F(ν)` with `G` the circular Gaussian
/// of variance `n_th`.
///
/// Gauss–Hermite nodes are placed for the narrower weight of variance
/// `n_th / (1 + n_th)` and reweighted by `e^{|ν|²} / (1 + n_th)`. Matrix
/// elements of `D(ν) ρ D(ν)†` carry a factor `e^{-|ν|²}` times a polynomial,
/// so the reweighted integrand is polynomial and low number states are
/// integrated exactly.
pub(crate) fn noise_rule(n_th: f64, order: usize) -> Result<Vec<(Complex64, f64)>> {
    let rule = gauss_hermite(order)?;
    let spread = (n_th / (1.0 + n_th)).sqrt();
    let norm = std::f64::consts::PI * (1.0 + n_th);
    let mut nodes = Vec::with_capacity(order * order);
    for (&x, &wx) in rule.nodes.iter().zip(&rule.weights) {
        for (&y, &wy) in rule.nodes.iter().zip(&rule.weights) {
            let nu = Complex64::new(spread * x, spread * y);
            let w = wx * wy * nu.norm_sqr().exp() / norm;
            if w > NODE_WEIGHT_FLOOR {
                nodes.push((nu, w));
            }
        }
    }
    Ok(nodes)
}

fn check_mode(rho: &FockDensityMatrix, mode: usize) -> Result<()> {
    if mode >= rho.modes() {
        return invalid(format!("mode {mode} out of range for {} modes", rho.modes()));
    }
    Ok(())
}

/// Pure components `√λ_i |e_i⟩` of `rho` in the ordering that puts `mode`
/// first, reshaped to `dim × rest` matrices.
struct Components {
    order: Vec<usize>,
    dim: usize,
    rest: usize,
    parts: Vec<DMatrix<Complex64>>,
}

impl Components {
    fn new(rho: &FockDensityMatrix, mode: usize) -> Result<Self> {
        let modes = rho.modes();
        let mut order = vec![mode];
        order.extend((0..modes).filter(|&m| m != mode));
        let permuted = if mode == 0 {
            rho.clone()
        } else {
            rho.permute_modes(&order)?
        };
        let dim = rho.dim();
        let rest = permuted.matrix().nrows() / dim;
        let eig = hermitian_eigen(permuted.matrix());
        let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let floor = COMPONENT_FLOOR.max(COMPONENT_RELATIVE_FLOOR * top);
        let mut parts = Vec::new();
        for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda < -crate::linalg::NEGATIVITY_TOLERANCE {
                return Err(Error::NotPositive(lambda));
            }
            if lambda > floor {
                let v = eig.eigenvectors.column(i) * Complex64::new(lambda.sqrt(), 0.0);
                parts.push(DMatrix::from_row_slice(dim, rest, v.as_slice()));
            }
        }
        Ok(Self {
            order,
            dim,
            rest,
            parts,
        })
    }

    /// `Σ_j w_j Σ_i (O_j ⊗ I) |c_i⟩⟨c_i| (O_j ⊗ I)†` for operators produced by
    /// `op(j)`, `j < count`.
    fn transform(
        &self,
        modes: usize,
        count: usize,
        op: impl Fn(usize) -> (f64, DMatrix<Complex64>) + Sync,
    ) -> Result<FockDensityMatrix> {
        let total = self.dim * self.rest;
        let blocks: Vec<Vec<Complex64>> = (0..count)
            .into_par_iter()
            .map(|j| {
                let (w, o) = op(j);
                let scale = Complex64::new(w.sqrt(), 0.0);
                let mut cols = Vec::with_capacity(total * self.parts.len());
                for part in &self.parts {
                    let out = &o * part * scale;
                    // row-major flatten restores the tensor index order
                    cols.extend(out.transpose().iter().copied());
                }
                cols
            })
            .collect();
        let flat: Vec<Complex64> = blocks.into_iter().flatten().collect();
        let ncols = flat.len() / total;
        let k = DMatrix::from_vec(total, ncols, flat);
        let mut data = &k * k.adjoint();
        hermitize(&mut data);
        let out = FockDensityMatrix::from_parts_unchecked(modes, self.dim, data);
        if self.order.iter().enumerate().all(|(i, &m)| i == m) {
            return Ok(out);
        }
        let mut inverse = vec![0; self.order.len()];
        for (k, &m) in self.order.iter().enumerate() {
            inverse[m] = k;
        }
        out.permute_modes(&inverse)
    }
}

/// Attenuation with transmissivity `|z|²` and phase `arg z` on one mode.
pub fn apply_loss(rho: &FockDensityMatrix, z: Complex64, mode: usize) -> Result<FockDensityMatrix> {
    check_mode(rho, mode)?;
    let kraus = loss_kraus(z, rho.dim())?;
    let comps = Components::new(rho, mode)?;
    comps.transform(rho.modes(), kraus.len(), |k| (1.0, kraus[k].clone()))
}

fn noise_once(
    comps: &Components,
    modes: usize,
    n_th: f64,
    order: usize,
) -> Result<FockDensityMatrix> {
    let nodes = noise_rule(n_th, order)?;
    comps.transform(modes, nodes.len(), |j| {
        let (nu, w) = nodes[j];
        (w, displacement_matrix(nu, comps.dim))
    })
}

/// Highest quadrature order tried before a noise integral is declared
/// unconverged.
pub const MAX_QUAD_ORDER: usize = 160;

/// Evaluates `eval` at `order`, `2 order`, `4 order`, ... until two
/// successive results differ by at most [`QUADRATURE_CHANGE_TOLERANCE`] and
/// returns the finer one.
pub(crate) fn refine_order<T>(
    order: usize,
    what: &str,
    eval: impl Fn(usize) -> Result<T>,
    diff: impl Fn(&T, &T) -> f64,
) -> Result<T> {
    if order == 0 {
        return invalid("quadrature order must be at least 1");
    }
    let mut q = order;
    let mut coarse = eval(q)?;
    loop {
        let fine = eval(2 * q)?;
        let change = diff(&coarse, &fine);
        if change <= QUADRATURE_CHANGE_TOLERANCE {
            log::debug!("{what}: order {} agrees with {q} to {change:.2e}", 2 * q);
            return Ok(fine);
        }
        if 2 * q >= MAX_QUAD_ORDER.max(2 * order) {
            return Err(Error::Quadrature(format!(
                "{what} changed by {change:.3e} between orders {q} and {}",
                2 * q
            )));
        }
        log::debug!("{what}: order {q} off by {change:.2e}, doubling");
        q *= 2;
        coarse = fine;
    }
}

/// Random displacement with circular Gaussian `ν`, `E|ν|² = n_th`, on one
/// mode.
///
/// The integral starts at `quad_order` nodes per axis and doubles the order
/// until two successive results agree entrywise to
/// [`QUADRATURE_CHANGE_TOLERANCE`] (up to [`MAX_QUAD_ORDER`]).
pub fn apply_classical_noise(
    rho: &FockDensityMatrix,
    n_th: f64,
    mode: usize,
    quad_order: usize,
) -> Result<FockDensityMatrix> {
    check_mode(rho, mode)?;
    ChannelParams::new(Complex64::new(1.0, 0.0), n_th)?;
    if quad_order == 0 {
        return invalid("quadrature order must be at least 1");
    }
    if n_th == 0.0 {
        return Ok(rho.clone());
    }
    let comps = Components::new(rho, mode)?;
    refine_order(
        quad_order,
        "noise integral",
        |q| noise_once(&comps, rho.modes(), n_th, q),
        |a, b| (a.matrix() - b.matrix()).camax(),
    )
}

/// The full cell channel on `mode`: loss, then classical noise.
pub fn apply_cell_channel(
    rho: &FockDensityMatrix,
    params: ChannelParams,
    mode: usize,
    quad_order: usize,
) -> Result<FockDensityMatrix> {
    let lossy = if params.z == Complex64::new(1.0, 0.0) {
        rho.clone()
    } else {
        apply_loss(rho, params.z, mode)?
    };
    apply_classical_noise(&lossy, params.n_th, mode, quad_order)
}

/// The cell channel in the Gaussian picture.
pub fn gaussian_channel_action(
    g: &GaussianState,
    params: ChannelParams,
    mode: usize,
) -> Result<GaussianState> {
    if mode >= g.modes() {
        return invalid(format!("mode {mode} out of range for {} modes", g.modes()));
    }
    let n = 2 * g.modes();
    let i = 2 * mode;
    let (r, phi) = (params.z.norm().min(1.0), params.z.arg());
    let mut x = DMatrix::<f64>::identity(n, n);
    x[(i, i)] = r * phi.cos();
    x[(i, i + 1)] = -r * phi.sin();
    x[(i + 1, i)] = r * phi.sin();
    x[(i + 1, i + 1)] = r * phi.cos();
    let added = 1.0 - r * r + 2.0 * params.n_th;
    let mut cov = &x * g.cov() * x.transpose();
    cov[(i, i)] += added;
    cov[(i + 1, i + 1)] += added;
    let cov = (&cov + cov.transpose()) * 0.5;
    let mean: DVector<f64> = &x * g.mean();
    Ok(GaussianState::from_parts_unchecked(mean, cov))
}
