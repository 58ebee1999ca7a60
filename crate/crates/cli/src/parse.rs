//! Text forms of grids and reflectances.

use anyhow::{bail, Context, Result};
use num_complex::Complex64;

/// A reflectance as entered: modulus and phase in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polar {
    pub modulus: f64,
    pub degrees: f64,
}

impl Polar {
    pub fn real(x: f64) -> Self {
        if x < 0.0 {
            Self { modulus: -x, degrees: 180.0 }
        } else {
            Self { modulus: x, degrees: 0.0 }
        }
    }

    /// Quarter turns are mapped exactly so that real inputs stay real.
    pub fn to_complex(self) -> Complex64 {
        let deg = self.degrees.rem_euclid(360.0);
        let m = self.modulus;
        match deg {
            d if d == 0.0 => Complex64::new(m, 0.0),
            d if d == 90.0 => Complex64::new(0.0, m),
            d if d == 180.0 => Complex64::new(-m, 0.0),
            d if d == 270.0 => Complex64::new(0.0, -m),
            d => Complex64::from_polar(m, d.to_radians()),
        }
    }
}

fn number(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().with_context(|| format!("`{}` is not a number", s.trim()))?;
    if !v.is_finite() {
        bail!("`{}` is not finite", s.trim());
    }
    Ok(v)
}

/// `"mod,deg"`, or a bare real number.
pub fn parse_polar(s: &str) -> Result<Polar> {
    match s.split_once(',') {
        Some((m, d)) => {
            let modulus = number(m)?;
            if !(0.0..=1.0).contains(&modulus) {
                bail!("modulus {modulus} outside [0, 1]");
            }
            Ok(Polar { modulus, degrees: number(d)? })
        }
        None => {
            let x = number(s)?;
            if x.abs() > 1.0 {
                bail!("reflectance {x} outside [-1, 1]");
            }
            Ok(Polar::real(x))
        }
    }
}

/// `"start:stop:count"` (inclusive, evenly spaced) or a comma list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let values = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts[..] else {
            bail!("range `{s}` must look like start:stop:count");
        };
        let (start, stop) = (number(start)?, number(stop)?);
        let count: usize = count
            .trim()
            .parse()
            .with_context(|| format!("`{}` is not a point count", count.trim()))?;
        match count {
            0 => bail!("range `{s}` has no points"),
            1 => vec![start],
            _ => (0..count)
                .map(|i| {
                    if i == count - 1 {
                        stop
                    } else {
                        start + (stop - start) * i as f64 / (count - 1) as f64
                    }
                })
                .collect(),
        }
    } else {
        s.split(',').map(number).collect::<Result<Vec<_>>>()?
    };
    check_grid(&values)?;
    Ok(values)
}

pub fn check_grid(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        bail!("grid is empty");
    }
    if let Some(w) = values.windows(2).find(|w| w[1] <= w[0]) {
        bail!("grid is not strictly increasing ({} then {})", w[0], w[1]);
    }
    Ok(())
}
