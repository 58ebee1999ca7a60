//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qreading_core::diffraction::{
    gram_matrix, rate_bounds_for_taus, tau_extrema, DEFAULT_SYMBOL_GRID,
};
use qreading_core::rates::{
    coherent_capacity_faint, coherent_capacity_noiseless, concavity_scan, epr_rate_faint,
    epr_rate_noiseless_phase, gains, holevo_rate,
};
use qreading_core::{
    DiffractionGeometry, DiffractionScope, MarginalCell, RateOptions, TransmitterSpec,
};

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rate(cell: &MarginalCell, tx: &TransmitterSpec, n_th: f64, opts: &RateOptions) -> Result<f64, String> {
    holevo_rate(cell, tx, n_th, opts)
        .map(|r| r.rate_bits)
        .map_err(|e| e.to_string())
}

fn within(budget: Duration, start: Instant, detail: String) -> Outcome {
    let took = start.elapsed();
    if took > budget {
        Err(format!("{detail}; took {took:.1?}, budget {budget:.0?}"))
    } else {
        Ok(format!("{detail}; {took:.1?}"))
    }
}

fn noiseless_coherent() -> Outcome {
    let start = Instant::now();
    let opts = RateOptions::default();
    let levels = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut worst = 0.0f64;
    for n in [0.1, 1.0] {
        let tx = TransmitterSpec::coherent(n).map_err(|e| e.to_string())?;
        for &z0 in &levels {
            for &z1 in &levels {
                let cell = MarginalCell::binary_real(0.5, z0, z1).map_err(|e| e.to_string())?;
                let numeric = rate(&cell, &tx, 0.0, &opts)?;
                let exact = coherent_capacity_noiseless(&cell, n).map_err(|e| e.to_string())?;
                worst = worst.max((numeric - exact).abs());
            }
        }
    }
    if worst > 1e-6 {
        return Err(format!("max deviation {worst:.3e} bits"));
    }
    within(Duration::from_secs(30), start, format!("max deviation {worst:.3e} bits"))
}

fn noiseless_epr_phase() -> Outcome {
    let start = Instant::now();
    let opts = RateOptions::default();
    let mut worst = 0.0f64;
    for theta in [PI / 4.0, PI / 2.0, PI] {
        for n in [0.1, 1.0] {
            let cell = MarginalCell::binary(0.5, c(1.0, 0.0), Complex64::from_polar(1.0, theta))
                .map_err(|e| e.to_string())?;
            let tx = TransmitterSpec::epr(n, 1).map_err(|e| e.to_string())?;
            let numeric = rate(&cell, &tx, 0.0, &opts)?;
            let exact = epr_rate_noiseless_phase(0.5, 0.5, theta, n, 1).map_err(|e| e.to_string())?;
            worst = worst.max((numeric - exact).abs());
        }
    }
    // n = 1, θ = π: h₂(1/3)
    let h = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
    let anchor = epr_rate_noiseless_phase(0.5, 0.5, PI, 1.0, 1).map_err(|e| e.to_string())?;
    if (anchor - h(1.0 / 3.0)).abs() > 1e-12 {
        return Err(format!("closed form at n = 1, theta = pi gives {anchor}"));
    }
    if worst > 1e-6 {
        return Err(format!("max deviation {worst:.3e} bits"));
    }
    within(
        Duration::from_secs(60),
        start,
        format!("max deviation {worst:.3e} bits, anchor {anchor:.4}"),
    )
}

fn faint_signal() -> Outcome {
    let opts = RateOptions::default();
    let rel = |approx: f64, exact: f64| (approx - exact).abs() / exact;
    let mut notes = Vec::new();
    for (z0, z1) in [(0.0, 1.0), (1.0, -1.0)] {
        let cell = MarginalCell::binary_real(0.5, z0, z1).map_err(|e| e.to_string())?;
        let mut coherent_errors = Vec::new();
        for n in [1e-3, 1e-4] {
            let tx = TransmitterSpec::coherent(n).map_err(|e| e.to_string())?;
            let numeric = rate(&cell, &tx, n, &opts)?;
            let approx = coherent_capacity_faint(&cell, n, n, false).map_err(|e| e.to_string())?;
            coherent_errors.push(rel(approx, numeric));
        }
        let tx = TransmitterSpec::epr(1e-3, 1).map_err(|e| e.to_string())?;
        let numeric = rate(&cell, &tx, 1e-3, &opts)?;
        let approx = epr_rate_faint(&cell, 1e-3, 1e-3, false).map_err(|e| e.to_string())?;
        let epr_error = rel(approx, numeric);
        let tag = format!("({z0},{z1})");
        if coherent_errors[0] > 0.05 || epr_error > 0.05 {
            return Err(format!(
                "{tag}: coherent {:.2e}, EPR {epr_error:.2e} relative error",
                coherent_errors[0]
            ));
        }
        if coherent_errors[1] >= coherent_errors[0] {
            return Err(format!(
                "{tag}: coherent error does not shrink ({:.2e} -> {:.2e})",
                coherent_errors[0], coherent_errors[1]
            ));
        }
        notes.push(format!(
            "{tag} coh {:.1e}->{:.1e}, EPR {epr_error:.1e}",
            coherent_errors[0], coherent_errors[1]
        ));
    }
    Ok(notes.join("; "))
}

fn thermal_sign_structure() -> Outcome {
    let opts = RateOptions::default();
    let amp = MarginalCell::binary_real(0.5, 0.0, 1.0).map_err(|e| e.to_string())?;
    let g = gains(&amp, 0.01, 0.1, &opts).map_err(|e| e.to_string())?;
    let gr = g.relative.ok_or("relative gain undefined")?;
    if !(g.absolute > 0.0 && gr > 1.0) {
        return Err(format!("amplitude encoding: G_a = {:.4e}, G_r = {gr:.4}", g.absolute));
    }
    let phase = MarginalCell::binary_real(0.5, 1.0, -1.0).map_err(|e| e.to_string())?;
    let h = gains(&phase, 1.0, 0.0, &opts).map_err(|e| e.to_string())?;
    if h.absolute >= 0.0 {
        return Err(format!("phase encoding at n_th = 0: G_a = {:.4e}", h.absolute));
    }
    Ok(format!(
        "G_a = {:.4e}, G_r = {gr:.4}; phase G_a = {:.4e}",
        g.absolute, h.absolute
    ))
}

fn cross_picture_entropy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let mut z = || Complex64::from_polar(rng.random_range(0.0..=1.0), rng.random_range(0.0..2.0 * PI));
        let zs = vec![z(), z()];
        let n_th = rng.random_range(0.0..=0.5);
        let n = rng.random_range(0.01..=1.0);
        let tx = if rng.random_bool(0.5) {
            TransmitterSpec::coherent(n)
        } else {
            TransmitterSpec::epr(n, 1)
        }
        .map_err(|e| e.to_string())?;
        let opts = RateOptions {
            pair_dim: 40,
            check_convergence: false,
            ..RateOptions::default()
        };
        // every symbol's conditional entropy is cross-checked
        let cell = MarginalCell::new(vec![0.5, 0.5], zs).map_err(|e| e.to_string())?;
        let r = holevo_rate(&cell, &tx, n_th, &opts).map_err(|e| e.to_string())?;
        let gap = r.entropy_crosscheck.ok_or("no cross-check reported")?;
        worst = worst.max(gap);
    }
    if worst > 1e-6 {
        return Err(format!("max entropy gap {worst:.3e} bits"));
    }
    Ok(format!("max entropy gap {worst:.3e} bits over 20 random cells (40 channels)"))
}

fn spectral_containment() -> Outcome {
    let mut notes = Vec::new();
    for ratio in [0.3, 0.5, 1.0, 3.0] {
        let geom = DiffractionGeometry::for_ratio(ratio, 1.0).map_err(|e| e.to_string())?;
        let spectrum = tau_extrema(&geom, DEFAULT_SYMBOL_GRID).map_err(|e| e.to_string())?;
        let (fmin, fmax) = (spectrum.symbol_min(), spectrum.symbol_max());
        let mut last: Option<(f64, f64, f64)> = None;
        for size in [16, 64, 256] {
            let m = gram_matrix(&geom, size).map_err(|e| e.to_string())?;
            let eig = SymmetricEigen::new(m).eigenvalues;
            let lo = eig.min();
            let hi = eig.max();
            let eps = (fmin - lo).max(hi - fmax).max(0.0);
            if let Some((plo, phi, peps)) = last {
                if lo > plo + 1e-10 || hi < phi - 1e-10 || eps > peps + 1e-10 {
                    return Err(format!(
                        "ratio {ratio}, size {size}: extremes [{lo:.6}, {hi:.6}] after [{plo:.6}, {phi:.6}], excess {eps:.2e}"
                    ));
                }
            }
            if size == 256 && eps > 1e-3 {
                return Err(format!("ratio {ratio}: eigenvalues exceed the symbol range by {eps:.2e}"));
            }
            last = Some((lo, hi, eps));
        }
        let (lo, hi, _) = last.unwrap();
        notes.push(format!("{ratio}: [{lo:.4}, {hi:.4}] in [{fmin:.4}, {fmax:.4}]"));
    }
    Ok(notes.join("; "))
}

fn tau_curve() -> Outcome {
    let taus = |ratio: f64| -> Result<(f64, f64), String> {
        let geom = DiffractionGeometry::for_ratio(ratio, 1.0).map_err(|e| e.to_string())?;
        let s = tau_extrema(&geom, DEFAULT_SYMBOL_GRID).map_err(|e| e.to_string())?;
        Ok((s.tau_min, s.tau_max))
    };
    for ratio in [0.5, 0.6, 1.0, 1.7, 3.0, 10.0] {
        let (_, hi) = taus(ratio)?;
        if (hi - 1.0).abs() > 1e-9 {
            return Err(format!("tau_max = {hi} at ell/x_R = {ratio}"));
        }
    }
    for ratio in [0.1, 0.25, 0.4, 0.49] {
        let (lo, _) = taus(ratio)?;
        if lo.abs() > 1e-9 {
            return Err(format!("tau_min = {lo} at ell/x_R = {ratio}"));
        }
    }
    let (lo, _) = taus(0.5)?;
    if (lo - 2.0 / PI).abs() > 1e-6 {
        return Err(format!("tau_min = {lo} at ell/x_R = 1/2, expected 2/pi"));
    }
    Ok(format!("tau_min(1/2) = {lo:.9}"))
}

fn bound_ordering() -> Outcome {
    let start = Instant::now();
    let cell = MarginalCell::binary_real(0.5, 0.0, 1.0).map_err(|e| e.to_string())?;
    let (n, n_th) = (0.1, 1.0);
    let opts = RateOptions::default();
    let epr = TransmitterSpec::epr(n, 1).map_err(|e| e.to_string())?;
    let coh = TransmitterSpec::coherent(n).map_err(|e| e.to_string())?;
    let grid: Vec<f64> = (0..20).map(|i| 0.5 + 2.5 * i as f64 / 19.0).collect();
    let mut rows = Vec::new();
    for &ratio in &grid {
        let geom = DiffractionGeometry::for_ratio(ratio, 1.0).map_err(|e| e.to_string())?;
        let s = tau_extrema(&geom, DEFAULT_SYMBOL_GRID).map_err(|e| e.to_string())?;
        let scope = DiffractionScope::SignalOnly;
        let e = rate_bounds_for_taus(&cell, &epr, s.tau_min, s.tau_max, n_th, &opts, scope)
            .map_err(|e| e.to_string())?;
        let c = rate_bounds_for_taus(&cell, &coh, s.tau_min, s.tau_max, n_th, &opts, scope)
            .map_err(|e| e.to_string())?;
        rows.push([
            e.lower.rate_bits,
            e.upper.rate_bits,
            c.lower.rate_bits,
            c.upper.rate_bits,
        ]);
    }
    for w in rows.windows(2) {
        for k in 0..4 {
            if w[1][k] < w[0][k] - 1e-7 {
                return Err(format!("bound curve {k} decreases: {} -> {}", w[0][k], w[1][k]));
            }
        }
    }
    let winning: Vec<f64> = grid
        .iter()
        .zip(&rows)
        .filter(|(_, r)| r[0] > r[3])
        .map(|(x, _)| *x)
        .collect();
    let Some(first) = winning.first() else {
        return Err("EPR lower bound never exceeds the coherent upper bound".into());
    };
    within(
        Duration::from_secs(300),
        start,
        format!(
            "EPR lower > coherent upper on {} of 20 points from ell/x_R = {first:.3}",
            winning.len()
        ),
    )
}

fn random_cell(rng: &mut ChaCha8Rng) -> MarginalCell {
    let k = rng.random_range(2..=4);
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let zs = (0..k)
        .map(|_| Complex64::from_polar(rng.random_range(0.0..=1.0), rng.random_range(0.0..2.0 * PI)))
        .collect();
    MarginalCell::new(raw.iter().map(|p| p / total).collect(), zs).unwrap()
}

fn data_processing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let opts = RateOptions::default();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10 {
        let cell = random_cell(&mut rng);
        let n = rng.random_range(0.05..=1.0);
        let n_th = rng.random_range(0.0..=0.5);
        let tx = if rng.random_bool(0.5) {
            TransmitterSpec::coherent(n)
        } else {
            TransmitterSpec::epr(n, 1)
        }
        .map_err(|e| e.to_string())?;
        let before = rate(&cell, &tx, n_th, &opts)?;
        for tau in [0.3, 0.7, 1.0] {
            let after = rate(
                &cell.attenuated(tau).map_err(|e| e.to_string())?,
                &tx,
                n_th * tau * tau,
                &opts,
            )?;
            worst = worst.max(after - before);
        }
    }
    if worst > 1e-7 {
        return Err(format!("attenuation raised a rate by {worst:.3e} bits"));
    }
    Ok(format!("largest increase {worst:.3e} bits"))
}

fn concavity() -> Outcome {
    let cell = MarginalCell::binary_real(0.5, 0.0, 1.0).map_err(|e| e.to_string())?;
    let grid: Vec<f64> = (0..30).map(|i| 0.05 + 2.95 * i as f64 / 29.0).collect();
    let opts = RateOptions::default();
    let mut notes = Vec::new();
    for n_th in [0.0, 0.5, 1.0] {
        let report = concavity_scan(&cell, &grid, n_th, &opts).map_err(|e| e.to_string())?;
        if report.max_second_difference > 1e-5 {
            return Err(format!(
                "n_th = {n_th}: second difference {:.3e} at n = {}",
                report.max_second_difference, report.argmax_n
            ));
        }
        notes.push(format!("n_th {n_th}: max {:.2e}", report.max_second_difference));
    }
    Ok(notes.join(", "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("noiseless coherent rate matches closed form", noiseless_coherent),
        ("noiseless EPR phase rate matches closed form", noiseless_epr_phase),
        ("faint-signal approximations", faint_signal),
        ("thermal gain sign structure", thermal_sign_structure),
        ("Fock and Gaussian entropies agree", cross_picture_entropy),
        ("Gram spectrum inside symbol range", spectral_containment),
        ("attenuation extrema versus ell/x_R", tau_curve),
        ("EPR lower bound beats coherent upper bound", bound_ordering),
        ("attenuation never raises the rate", data_processing),
        ("coherent rate is concave in n", concavity),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
