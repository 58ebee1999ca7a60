//! The three sweeps. Each returns the full table; nothing is written until
//! every point has been computed.

use std::f64::consts::PI;

use anyhow::{Context, Result};
use rayon::prelude::*;

use qreading_core::diffraction::{rate_bounds_for_taus, tau_extrema};
use qreading_core::rates::{
    coherent_capacity_faint, coherent_capacity_noiseless, epr_rate_faint,
    epr_rate_noiseless_phase, gains, holevo_rate,
};
use qreading_core::{
    DiffractionGeometry, DiffractionScope, MarginalCell, RateMethod, RateOptions, RateResult,
    TransmitterKind, TransmitterSpec,
};

use crate::output::{Cell, Table};
use crate::parse::Polar;

/// Symbol probabilities and reflectances of a binary cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSpec {
    pub p0: f64,
    pub z0: Polar,
    pub z1: Polar,
}

impl CellSpec {
    fn build(&self) -> Result<MarginalCell> {
        Ok(MarginalCell::binary(self.p0, self.z0.to_complex(), self.z1.to_complex())?)
    }

    fn echo(&self) -> Vec<Cell> {
        vec![
            self.p0.into(),
            self.z0.modulus.into(),
            self.z0.degrees.into(),
            self.z1.modulus.into(),
            self.z1.degrees.into(),
        ]
    }
}

const CELL_HEADERS: [&str; 5] = ["p0", "z0_mod", "z0_deg", "z1_mod", "z1_deg"];

fn headers(extra: &[&'static str]) -> Vec<&'static str> {
    CELL_HEADERS.iter().chain(extra).copied().collect()
}

fn kind_name(kind: TransmitterKind) -> &'static str {
    match kind {
        TransmitterKind::Coherent => "coherent",
        TransmitterKind::Epr => "epr",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateParams {
    pub cell: CellSpec,
    pub n: f64,
    pub n_th: f64,
    pub transmitters: Vec<TransmitterKind>,
    pub faint: bool,
}

fn analytic_rows(p: &RateParams, kind: TransmitterKind, cell: &MarginalCell) -> Result<Vec<RateResult>> {
    let mut rows = Vec::new();
    let on_circle = p.cell.z0.modulus == 1.0 && p.cell.z1.modulus == 1.0;
    if p.n_th == 0.0 {
        match kind {
            TransmitterKind::Coherent => rows.push(RateResult::analytic(
                coherent_capacity_noiseless(cell, p.n)?,
                RateMethod::AnalyticNoiseless,
            )),
            TransmitterKind::Epr if on_circle => {
                let theta = (p.cell.z1.degrees - p.cell.z0.degrees) * PI / 180.0;
                rows.push(RateResult::analytic(
                    epr_rate_noiseless_phase(p.cell.p0, 1.0 - p.cell.p0, theta, p.n, 1)?,
                    RateMethod::AnalyticNoiseless,
                ));
            }
            TransmitterKind::Epr => {}
        }
    }
    if p.faint {
        let value = match kind {
            TransmitterKind::Coherent => coherent_capacity_faint(cell, p.n, p.n_th, false),
            TransmitterKind::Epr => epr_rate_faint(cell, p.n, p.n_th, false),
        }
        .context("faint-signal approximation")?;
        rows.push(RateResult::analytic(value, RateMethod::FaintApprox));
    }
    Ok(rows)
}

/// One row per transmitter and method.
pub fn rate(p: &RateParams, opts: &RateOptions) -> Result<Table> {
    let cell = p.cell.build()?;
    let mut table = Table::new(headers(&[
        "n",
        "n_th",
        "transmitter",
        "method",
        "rate_bits",
        "trace_deficit",
        "truncation_dim",
    ]));
    for &kind in &p.transmitters {
        let tx = TransmitterSpec::new(kind, p.n, 1, usize::from(kind == TransmitterKind::Epr))?;
        let numeric = holevo_rate(&cell, &tx, p.n_th, opts)
            .with_context(|| format!("{} rate", kind_name(kind)))?;
        for r in std::iter::once(numeric).chain(analytic_rows(p, kind, &cell)?) {
            let mut row = p.cell.echo();
            row.extend([
                p.n.into(),
                p.n_th.into(),
                kind_name(kind).into(),
                r.method.as_str().into(),
                r.rate_bits.into(),
                r.trace_deficit.into(),
                r.truncation_dim.into(),
            ]);
            table.push(row);
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub enum GainAxes {
    /// Real reflectances `z0 × z1` at fixed `n`, `n_th`.
    Reflectances { z0: Vec<f64>, z1: Vec<f64>, n: f64, n_th: f64 },
    /// `n × n_th` for a fixed cell.
    Photons { z0: Polar, z1: Polar, n: Vec<f64>, n_th: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainMapParams {
    pub p0: f64,
    pub axes: GainAxes,
}

/// `(G_a, G_r)` over a two-dimensional grid, outer axis first.
pub fn gain_map(p: &GainMapParams, opts: &RateOptions) -> Result<Table> {
    let points: Vec<(CellSpec, f64, f64)> = match &p.axes {
        GainAxes::Reflectances { z0, z1, n, n_th } => z0
            .iter()
            .flat_map(|&a| {
                z1.iter().map(move |&b| {
                    let cell = CellSpec { p0: p.p0, z0: Polar::real(a), z1: Polar::real(b) };
                    (cell, *n, *n_th)
                })
            })
            .collect(),
        GainAxes::Photons { z0, z1, n, n_th } => n
            .iter()
            .flat_map(|&a| {
                n_th.iter().map(move |&b| (CellSpec { p0: p.p0, z0: *z0, z1: *z1 }, a, b))
            })
            .collect(),
    };
    let rows: Vec<Vec<Cell>> = points
        .par_iter()
        .map(|(spec, n, n_th)| {
            let g = gains(&spec.build()?, *n, *n_th, opts)
                .with_context(|| format!("grid point n = {n}, n_th = {n_th}, cell {spec:?}"))?;
            let mut row = spec.echo();
            row.extend([
                (*n).into(),
                (*n_th).into(),
                g.coherent.rate_bits.into(),
                g.epr.rate_bits.into(),
                g.absolute.into(),
                g.relative.into(),
            ]);
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(headers(&["n", "n_th", "rate_coherent", "rate_epr", "g_a", "g_r"]));
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffractionParams {
    pub cell: CellSpec,
    pub n: f64,
    pub n_th: f64,
    pub ratios: Vec<f64>,
    pub d_over_ell: f64,
    pub scope: DiffractionScope,
    pub symbol_grid: usize,
}

/// Attenuation extrema and the four bound curves over `ℓ/x_R`.
pub fn diffraction(p: &DiffractionParams, opts: &RateOptions) -> Result<Table> {
    let cell = p.cell.build()?;
    let epr = TransmitterSpec::epr(p.n, 1)?;
    let coh = TransmitterSpec::coherent(p.n)?;
    let scope_name = match p.scope {
        DiffractionScope::SignalOnly => "signal",
        DiffractionScope::SignalAndIdler => "signal_and_idler",
    };
    let rows: Vec<Vec<Cell>> = p
        .ratios
        .par_iter()
        .map(|&ratio| {
            let geom = DiffractionGeometry::for_ratio(ratio, p.d_over_ell)?;
            let s = tau_extrema(&geom, p.symbol_grid)?;
            let bounds = |tx: &TransmitterSpec| {
                rate_bounds_for_taus(&cell, tx, s.tau_min, s.tau_max, p.n_th, opts, p.scope)
                    .with_context(|| format!("ell/x_R = {ratio}"))
            };
            let (e, c) = (bounds(&epr)?, bounds(&coh)?);
            let mut row: Vec<Cell> = vec![ratio.into(), p.d_over_ell.into()];
            row.extend(p.cell.echo());
            row.extend([
                p.n.into(),
                p.n_th.into(),
                scope_name.into(),
                s.tau_min.into(),
                s.tau_max.into(),
                e.lower.rate_bits.into(),
                e.upper.rate_bits.into(),
                c.lower.rate_bits.into(),
                c.upper.rate_bits.into(),
            ]);
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut names = vec!["ell_over_xr", "d_over_ell"];
    names.extend(headers(&[
        "n",
        "n_th",
        "scope",
        "tau_min",
        "tau_max",
        "epr_lower",
        "epr_upper",
        "coherent_lower",
        "coherent_upper",
    ]));
    let mut table = Table::new(names);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}
