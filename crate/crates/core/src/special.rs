//! Special functions used by the diffraction symbol and Gram matrix.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

/// `sin(y) / y` with `sinc(0) = 1`.
pub fn sinc(y: f64) -> f64 {
    if y.abs() < 1e-8 {
        1.0 - y * y / 6.0
    } else {
        y.sin() / y
    }
}

/// Sine integral `Si(x) = ∫_0^x sin(t)/t dt`.
///
/// Power series below 2, Lentz continued fraction for `E1(ix)` above.
pub fn sine_integral(x: f64) -> f64 {
    const EPS: f64 = 1e-17;
    const MAX_ITER: usize = 500;
    let t = x.abs();
    let si = if t == 0.0 {
        0.0
    } else if t <= 2.0 {
        let mut sum = 0.0;
        let mut term = t; // t^(2k+1)/(2k+1)!
        for k in 0..MAX_ITER {
            let contrib = term / (2 * k + 1) as f64;
            sum += contrib;
            if contrib.abs() < EPS * sum.abs() {
                break;
            }
            let kk = (2 * k + 2) as f64;
            term *= -t * t / (kk * (kk + 1.0));
        }
        sum
    } else {
        let tiny = 1e-300;
        let mut b = Complex64::new(1.0, t);
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = Complex64::new(1.0, 0.0) / b;
        let mut h = d;
        for i in 2..MAX_ITER {
            let a = -(((i - 1) * (i - 1)) as f64);
            b += Complex64::new(2.0, 0.0);
            d = Complex64::new(1.0, 0.0) / (d * a + b);
            c = b + Complex64::new(a, 0.0) / c;
            let del = c * d;
            h *= del;
            if (del.re - 1.0).abs() + del.im.abs() < EPS {
                break;
            }
        }
        h *= Complex64::new(t.cos(), -t.sin());
        FRAC_PI_2 + h.im
    };
    if x < 0.0 {
        -si
    } else {
        si
    }
}

/// Trigamma function `ψ'(x) = Σ_{k≥0} 1/(x+k)^2` for `x > 0`.
pub fn trigamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "trigamma needs a positive argument");
    let mut x = x;
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Asymptotic expansion with Bernoulli-number coefficients.
    let series = inv
        + 0.5 * inv2
        + inv * inv2
            * (1.0 / 6.0
                + inv2 * (-1.0 / 30.0 + inv2 * (1.0 / 42.0 + inv2 * (-1.0 / 30.0 + inv2 * 5.0 / 66.0))));
    acc + series
}
