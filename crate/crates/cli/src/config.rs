//! TOML configuration file. Shared knobs sit at the top level, physics
//! parameters in one table per subcommand; keys match the flag names.
//!
//! ```toml
//! dim = 60
//! format = "json"
//!
//! [rate]
//! z0 = "0,0"
//! z1 = 1
//! n = 1
//!
//! [gain-map]
//! axes = "n"
//! n-grid = "0.01:1:20"
//! n-th-grid = [0.0, 0.5, 1.0]
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use crate::output::Format;
use crate::parse::{check_grid, parse_grid, parse_polar, Polar};

/// A number, a text form, or a list of numbers.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Num(f64),
    Text(String),
    List(Vec<f64>),
}

impl Value {
    pub fn polar(&self) -> Result<Polar> {
        match self {
            Value::Num(x) => parse_polar(&x.to_string()),
            Value::Text(s) => parse_polar(s),
            Value::List(v) => match v[..] {
                [m, d] => parse_polar(&format!("{m},{d}")),
                _ => bail!("a reflectance list must be [modulus, degrees]"),
            },
        }
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        match self {
            Value::Num(x) => Ok(vec![*x]),
            Value::Text(s) => parse_grid(s),
            Value::List(v) => {
                check_grid(v)?;
                Ok(v.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RateSection {
    pub p0: Option<f64>,
    pub z0: Option<Value>,
    pub z1: Option<Value>,
    pub n: Option<f64>,
    pub n_th: Option<f64>,
    pub transmitter: Option<String>,
    pub faint: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct GainMapSection {
    pub axes: Option<String>,
    pub p0: Option<f64>,
    pub z0: Option<Value>,
    pub z1: Option<Value>,
    pub n: Option<f64>,
    pub n_th: Option<f64>,
    pub z0_grid: Option<Value>,
    pub z1_grid: Option<Value>,
    pub n_grid: Option<Value>,
    pub n_th_grid: Option<Value>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DiffractionSection {
    pub panel: Option<String>,
    pub p0: Option<f64>,
    pub z0: Option<Value>,
    pub z1: Option<Value>,
    pub n: Option<f64>,
    pub n_th: Option<f64>,
    pub ratio_grid: Option<Value>,
    pub d_over_ell: Option<f64>,
    pub both_sides: Option<bool>,
    pub symbol_grid: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub dim: Option<usize>,
    pub pair_dim: Option<usize>,
    pub quad_order: Option<usize>,
    pub threads: Option<usize>,
    pub eps_trunc: Option<f64>,
    #[serde(default)]
    pub rate: RateSection,
    #[serde(default, rename = "gain-map")]
    pub gain_map: GainMapSection,
    #[serde(default)]
    pub diffraction: DiffractionSection,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }
}
