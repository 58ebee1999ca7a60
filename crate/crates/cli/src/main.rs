//! `qreading`: reading-rate sweeps written as CSV or JSON tables.

mod commands;
mod config;
mod output;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qreading_core::{DiffractionScope, RateOptions, TransmitterKind};

use crate::commands::{CellSpec, DiffractionParams, GainAxes, GainMapParams, RateParams};
use crate::config::{FileConfig, Value};
use crate::output::Format;
use crate::parse::{parse_grid, parse_polar, Polar};

#[derive(Parser, Debug)]
#[command(name = "qreading", version, about = "Holevo reading rates of optical memories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rates of the coherent and EPR transmitters for one cell.
    Rate(RateArgs),
    /// EPR-over-coherent gains on a grid of reflectances or photon numbers.
    GainMap(GainMapArgs),
    /// Attenuation extrema and rate bounds versus ell/x_R.
    Diffraction(DiffractionArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML file with defaults; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (standard output if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Fock levels of the coherent computation.
    #[arg(long)]
    dim: Option<usize>,
    /// Fock levels per mode of the EPR computation.
    #[arg(long)]
    pair_dim: Option<usize>,
    /// Gauss-Hermite order per axis of the noise average.
    #[arg(long)]
    quad_order: Option<usize>,
    /// Tolerated discarded probability.
    #[arg(long)]
    eps_trunc: Option<f64>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct CellArgs {
    /// Probability of bit 0.
    #[arg(long)]
    p0: Option<f64>,
    /// Reflectance of bit 0 as "modulus,degrees" or a real number.
    #[arg(long, allow_hyphen_values = true)]
    z0: Option<String>,
    /// Reflectance of bit 1.
    #[arg(long, allow_hyphen_values = true)]
    z1: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Both,
    Coherent,
    Epr,
}

#[derive(Args, Debug)]
struct RateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    cell: CellArgs,
    /// Mean signal photons.
    #[arg(long)]
    n: Option<f64>,
    /// Classical noise variance.
    #[arg(long)]
    n_th: Option<f64>,
    #[arg(long, value_enum)]
    transmitter: Option<Which>,
    /// Add faint-signal approximation rows.
    #[arg(long)]
    faint: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Axes {
    /// Real z0 by z1.
    Z,
    /// n by n_th.
    N,
}

#[derive(Args, Debug)]
struct GainMapArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    cell: CellArgs,
    #[arg(long, value_enum)]
    axes: Option<Axes>,
    /// Mean signal photons (axes z).
    #[arg(long)]
    n: Option<f64>,
    /// Noise variance (axes z).
    #[arg(long)]
    n_th: Option<f64>,
    /// Real z0 values, "start:stop:count" or a comma list.
    #[arg(long, allow_hyphen_values = true)]
    z0_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    z1_grid: Option<String>,
    #[arg(long)]
    n_grid: Option<String>,
    #[arg(long)]
    n_th_grid: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Panel {
    B,
    C,
    D,
}

#[derive(Args, Debug)]
struct DiffractionArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    cell: CellArgs,
    /// Preset cell and photon numbers; explicit flags override it.
    #[arg(long, value_enum)]
    panel: Option<Panel>,
    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    n_th: Option<f64>,
    /// ell/x_R values.
    #[arg(long)]
    ratio_grid: Option<String>,
    /// Cell width over pitch.
    #[arg(long)]
    d_over_ell: Option<f64>,
    /// Attenuate the idler modes as well.
    #[arg(long)]
    both_sides: bool,
    /// Symbol samples over [0, 2pi].
    #[arg(long)]
    symbol_grid: Option<usize>,
}

struct Settings {
    opts: RateOptions,
    out: Option<PathBuf>,
    format: Format,
}

fn settings(common: &Common, file: &FileConfig) -> Result<Settings> {
    let mut opts = RateOptions::default();
    opts.dim = common.dim.or(file.dim).unwrap_or(opts.dim);
    opts.pair_dim = common.pair_dim.or(file.pair_dim).unwrap_or(opts.pair_dim);
    opts.quad_order = common.quad_order.or(file.quad_order).unwrap_or(opts.quad_order);
    opts.eps_trunc = common.eps_trunc.or(file.eps_trunc).unwrap_or(opts.eps_trunc);
    if let Some(t) = common.threads.or(file.threads) {
        if t == 0 {
            bail!("threads: must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("threads: cannot size the worker pool")?;
    }
    Ok(Settings {
        opts,
        out: common.out.clone().or_else(|| file.out.clone()),
        format: common.format.or(file.format).unwrap_or_default(),
    })
}

fn required<T>(v: Option<T>, field: &str, section: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("missing required field `{field}` (flag --{field} or key `{field}` in [{section}])"))
}

fn field<T>(v: Result<T>, field: &str) -> Result<T> {
    v.with_context(|| format!("{field}: invalid value"))
}

fn polar(flag: &Option<String>, file: &Option<Value>, name: &str) -> Result<Option<Polar>> {
    match (flag, file) {
        (Some(s), _) => field(parse_polar(s), name).map(Some),
        (None, Some(v)) => field(v.polar(), name).map(Some),
        (None, None) => Ok(None),
    }
}

fn grid(flag: &Option<String>, file: &Option<Value>, name: &str) -> Result<Option<Vec<f64>>> {
    match (flag, file) {
        (Some(s), _) => field(parse_grid(s), name).map(Some),
        (None, Some(v)) => field(v.grid(), name).map(Some),
        (None, None) => Ok(None),
    }
}

fn non_negative(v: f64, name: &str) -> Result<f64> {
    if !(v >= 0.0 && v.is_finite()) {
        bail!("{name}: must be finite and non-negative, got {v}");
    }
    Ok(v)
}

fn probability(v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        bail!("p0: must lie in [0, 1], got {v}");
    }
    Ok(v)
}

fn run_rate(args: &RateArgs, file: &FileConfig) -> Result<(Settings, output::Table)> {
    let s = settings(&args.common, file)?;
    let sec = &file.rate;
    let cell = CellSpec {
        p0: probability(args.cell.p0.or(sec.p0).unwrap_or(0.5))?,
        z0: required(polar(&args.cell.z0, &sec.z0, "z0")?, "z0", "rate")?,
        z1: required(polar(&args.cell.z1, &sec.z1, "z1")?, "z1", "rate")?,
    };
    let which = match (&args.transmitter, &sec.transmitter) {
        (Some(w), _) => *w,
        (None, Some(t)) => Which::from_str(t, true).map_err(|e| anyhow!("transmitter: {e}"))?,
        (None, None) => Which::Both,
    };
    let transmitters = match which {
        Which::Both => vec![TransmitterKind::Coherent, TransmitterKind::Epr],
        Which::Coherent => vec![TransmitterKind::Coherent],
        Which::Epr => vec![TransmitterKind::Epr],
    };
    let params = RateParams {
        cell,
        n: non_negative(required(args.n.or(sec.n), "n", "rate")?, "n")?,
        n_th: non_negative(args.n_th.or(sec.n_th).unwrap_or(0.0), "n-th")?,
        transmitters,
        faint: args.faint || sec.faint.unwrap_or(false),
    };
    let table = commands::rate(&params, &s.opts)?;
    Ok((s, table))
}

fn run_gain_map(args: &GainMapArgs, file: &FileConfig) -> Result<(Settings, output::Table)> {
    let s = settings(&args.common, file)?;
    let sec = &file.gain_map;
    let axes = match (&args.axes, &sec.axes) {
        (Some(a), _) => *a,
        (None, Some(t)) => Axes::from_str(t, true).map_err(|e| anyhow!("axes: {e}"))?,
        (None, None) => Axes::N,
    };
    let axes = match axes {
        Axes::Z => {
            let z0 = required(grid(&args.z0_grid, &sec.z0_grid, "z0-grid")?, "z0-grid", "gain-map")?;
            let z1 = required(grid(&args.z1_grid, &sec.z1_grid, "z1-grid")?, "z1-grid", "gain-map")?;
            if let Some(z) = z0.iter().chain(&z1).find(|z| z.abs() > 1.0) {
                bail!("z grids: reflectance {z} outside [-1, 1]");
            }
            GainAxes::Reflectances {
                z0,
                z1,
                n: non_negative(required(args.n.or(sec.n), "n", "gain-map")?, "n")?,
                n_th: non_negative(args.n_th.or(sec.n_th).unwrap_or(0.0), "n-th")?,
            }
        }
        Axes::N => {
            let n = required(grid(&args.n_grid, &sec.n_grid, "n-grid")?, "n-grid", "gain-map")?;
            let n_th =
                required(grid(&args.n_th_grid, &sec.n_th_grid, "n-th-grid")?, "n-th-grid", "gain-map")?;
            if let Some(x) = n.iter().chain(&n_th).find(|x| **x < 0.0) {
                bail!("n grids: negative value {x}");
            }
            GainAxes::Photons {
                z0: required(polar(&args.cell.z0, &sec.z0, "z0")?, "z0", "gain-map")?,
                z1: required(polar(&args.cell.z1, &sec.z1, "z1")?, "z1", "gain-map")?,
                n,
                n_th,
            }
        }
    };
    let params = GainMapParams {
        p0: probability(args.cell.p0.or(sec.p0).unwrap_or(0.5))?,
        axes,
    };
    let table = commands::gain_map(&params, &s.opts)?;
    Ok((s, table))
}

fn run_diffraction(args: &DiffractionArgs, file: &FileConfig) -> Result<(Settings, output::Table)> {
    let s = settings(&args.common, file)?;
    let sec = &file.diffraction;
    let panel = match (&args.panel, &sec.panel) {
        (Some(p), _) => Some(*p),
        (None, Some(t)) => Some(Panel::from_str(t, true).map_err(|e| anyhow!("panel: {e}"))?),
        (None, None) => None,
    };
    // (z0, z1, n, n_th) of the three bound panels
    let preset = panel.map(|p| match p {
        Panel::B => (0.0, 1.0, 1.0, 1.0),
        Panel::C => (0.0, 1.0, 0.1, 1.0),
        Panel::D => (1.0, -1.0, 0.1, 1.0),
    });
    let cell = CellSpec {
        p0: probability(args.cell.p0.or(sec.p0).unwrap_or(0.5))?,
        z0: required(
            polar(&args.cell.z0, &sec.z0, "z0")?.or(preset.map(|p| Polar::real(p.0))),
            "z0",
            "diffraction",
        )?,
        z1: required(
            polar(&args.cell.z1, &sec.z1, "z1")?.or(preset.map(|p| Polar::real(p.1))),
            "z1",
            "diffraction",
        )?,
    };
    let n = required(args.n.or(sec.n).or(preset.map(|p| p.2)), "n", "diffraction")?;
    let n_th = required(args.n_th.or(sec.n_th).or(preset.map(|p| p.3)), "n-th", "diffraction")?;
    let ratios = required(grid(&args.ratio_grid, &sec.ratio_grid, "ratio-grid")?, "ratio-grid", "diffraction")?;
    if let Some(r) = ratios.iter().find(|r| **r <= 0.0) {
        bail!("ratio-grid: ell/x_R must be positive, got {r}");
    }
    let d_over_ell = args.d_over_ell.or(sec.d_over_ell).unwrap_or(1.0);
    if !(d_over_ell > 0.0 && d_over_ell <= 1.0) {
        bail!("d-over-ell: must lie in (0, 1], got {d_over_ell}");
    }
    let both = args.both_sides || sec.both_sides.unwrap_or(false);
    let params = DiffractionParams {
        cell,
        n: non_negative(n, "n")?,
        n_th: non_negative(n_th, "n-th")?,
        ratios,
        d_over_ell,
        scope: if both {
            DiffractionScope::SignalAndIdler
        } else {
            DiffractionScope::SignalOnly
        },
        symbol_grid: args
            .symbol_grid
            .or(sec.symbol_grid)
            .unwrap_or(qreading_core::diffraction::DEFAULT_SYMBOL_GRID),
    };
    let table = commands::diffraction(&params, &s.opts)?;
    Ok((s, table))
}

fn run(cli: &Cli) -> Result<()> {
    let common = match &cli.command {
        Command::Rate(a) => &a.common,
        Command::GainMap(a) => &a.common,
        Command::Diffraction(a) => &a.common,
    };
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let (settings, table) = match &cli.command {
        Command::Rate(a) => run_rate(a, &file)?,
        Command::GainMap(a) => run_gain_map(a, &file)?,
        Command::Diffraction(a) => run_diffraction(a, &file)?,
    };
    let text = table.render(settings.format);
    match &settings.out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    log::info!("wrote {} rows", table.rows.len());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QREADING_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let truncated = e
                .chain()
                .any(|c| matches!(c.downcast_ref(), Some(qreading_core::Error::Truncation { .. })));
            if truncated {
                eprintln!("hint: raise --dim (coherent) or --pair-dim (epr)");
            }
            ExitCode::FAILURE
        }
    }
}
