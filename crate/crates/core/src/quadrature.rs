//! Gaussian quadrature rules and an adaptive Gauss–Kronrod integrator.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, Error, Result};

/// Nodes and weights of a one-dimensional Gaussian rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Eigenvalues of the symmetric tridiagonal Jacobi matrix, ascending.
fn jacobi_nodes(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = diag[i];
        if i + 1 < n {
            j[(i, i + 1)] = off[i];
            j[(i + 1, i)] = off[i];
        }
    }
    let mut nodes: Vec<f64> = SymmetricEigen::new(j).eigenvalues.iter().copied().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    nodes
}

/// Gauss–Hermite rule for the weight `exp(-x^2)` on the real line.
///
/// Nodes are seeded from the Golub–Welsch eigenproblem and polished by Newton
/// iteration on the orthonormal Hermite recurrence, which keeps the tiny outer
/// weights accurate to full relative precision.
pub fn gauss_hermite(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return invalid("Gauss-Hermite order must be at least 1");
    }
    let off: Vec<f64> = (1..order).map(|i| (i as f64 / 2.0).sqrt()).collect();
    let mut nodes = jacobi_nodes(&vec![0.0; order], &off);
    let mut weights = Vec::with_capacity(order);
    let pim4 = std::f64::consts::PI.powf(-0.25);
    for x in nodes.iter_mut() {
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (pim4, 0.0);
            for j in 1..=order {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = *x * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            deriv = (2.0 * order as f64).sqrt() * p2;
            let step = p1 / deriv;
            *x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        weights.push(2.0 / (deriv * deriv));
    }
    // Enforce exact symmetry of the rule.
    for i in 0..order / 2 {
        let k = order - 1 - i;
        let x = 0.5 * (nodes[k] - nodes[i]);
        let w = 0.5 * (weights[k] + weights[i]);
        nodes[i] = -x;
        nodes[k] = x;
        weights[i] = w;
        weights[k] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// Gauss–Laguerre rule for the weight `exp(-x)` on `[0, inf)`.
pub fn gauss_laguerre(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return invalid("Gauss-Laguerre order must be at least 1");
    }
    let diag: Vec<f64> = (0..order).map(|i| 2.0 * i as f64 + 1.0).collect();
    let off: Vec<f64> = (1..order).map(|i| i as f64).collect();
    let mut nodes = jacobi_nodes(&diag, &off);
    let mut weights = Vec::with_capacity(order);
    let nf = order as f64;
    for x in nodes.iter_mut() {
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=order {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0 - *x) * p2 - (jf - 1.0) * p3) / jf;
            }
            deriv = nf * (p1 - p2) / *x;
            let step = p1 / deriv;
            *x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        weights.push(1.0 / (*x * deriv * deriv));
    }
    Ok(QuadratureRule { nodes, weights })
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Kronrod-15 estimate on `[a, b]` with its embedded Gauss-7 error proxy.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * GK_WEIGHTS[7];
    let mut gauss = fc * G7_WEIGHTS[3];
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += GK_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// The interval is first cut into `initial_segments` equal pieces, which
/// should resolve the integrand's oscillation scale; the piece with the largest
/// error estimate is then bisected until the summed estimate drops below
/// `abs_tol`.
pub fn integrate_adaptive(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    initial_segments: usize,
) -> Result<f64> {
    const MAX_SEGMENTS: usize = 200_000;
    if !(a.is_finite() && b.is_finite()) {
        return invalid("integration limits must be finite");
    }
    if a == b {
        return Ok(0.0);
    }
    let pieces = initial_segments.max(1);
    let width = (b - a) / pieces as f64;
    let mut heap = BinaryHeap::with_capacity(pieces * 2);
    let mut total_err = 0.0;
    for i in 0..pieces {
        let lo = a + width * i as f64;
        let hi = if i + 1 == pieces { b } else { lo + width };
        let (value, error) = gk15(&f, lo, hi);
        total_err += error;
        heap.push(Segment {
            a: lo,
            b: hi,
            value,
            error,
        });
    }
    while total_err > abs_tol {
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::Quadrature(format!(
                "adaptive integration on [{a}, {b}] stalled at error {total_err:.3e} (tolerance {abs_tol:.3e})"
            )));
        }
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval exhausted at machine precision; keep its estimate.
            return Err(Error::Quadrature(format!(
                "interval [{}, {}] cannot be bisected further",
                seg.a, seg.b
            )));
        }
        let (v1, e1) = gk15(&f, seg.a, mid);
        let (v2, e2) = gk15(&f, mid, seg.b);
        total_err += e1 + e2 - seg.error;
        heap.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            error: e2,
        });
    }
    Ok(heap.iter().map(|s| s.value).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_moments_are_exact() {
        let rule = gauss_hermite(20).unwrap();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((rule.integrate(|_| 1.0) - sqrt_pi).abs() < 1e-14);
        assert!((rule.integrate(|x| x * x) - sqrt_pi / 2.0).abs() < 1e-14);
        // E[x^38] for weight exp(-x^2) is Gamma(19.5)
        let m38: f64 = (0..19).map(|k| k as f64 + 0.5).product::<f64>() * sqrt_pi;
        assert!((rule.integrate(|x| x.powi(38)) / m38 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermite_rule_is_symmetric() {
        let rule = gauss_hermite(7).unwrap();
        assert_eq!(rule.nodes[3], 0.0);
        for i in 0..3 {
            assert_eq!(rule.nodes[i], -rule.nodes[6 - i]);
            assert_eq!(rule.weights[i], rule.weights[6 - i]);
        }
    }

    #[test]
    fn laguerre_moments_are_exact() {
        let rule = gauss_laguerre(15).unwrap();
        let mut fact = 1.0;
        for k in 0..29 {
            if k > 0 {
                fact *= k as f64;
            }
            let got = rule.integrate(|x| x.powi(k));
            assert!((got / fact - 1.0).abs() < 1e-11, "moment {k}: {got} vs {fact}");
        }
    }

    #[test]
    fn zero_order_rejected() {
        assert!(gauss_hermite(0).is_err());
        assert!(gauss_laguerre(0).is_err());
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let v = integrate_adaptive(|x| (40.0 * x).cos(), 0.0, 3.0, 1e-12, 20).unwrap();
        assert!((v - (120.0f64).sin() / 40.0).abs() < 1e-12);
        let g = integrate_adaptive(|x| (-x * x).exp(), -8.0, 8.0, 1e-13, 1).unwrap();
        assert!((g - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn adaptive_empty_interval() {
        assert_eq!(integrate_adaptive(|x| x, 1.0, 1.0, 1e-10, 4).unwrap(), 0.0);
    }
}
