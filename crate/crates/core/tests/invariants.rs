use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use qreading_core::channels::{apply_cell_channel, apply_loss, ChannelParams, DEFAULT_QUAD_ORDER};
use qreading_core::diffraction::{toeplitz_symbol, DiffractionGeometry};
use qreading_core::linalg::hermitian_eigenvalues;
use qreading_core::rates::{holevo_rate, shannon_entropy_d};
use qreading_core::states::{coherent_state, epr_state, partial_trace, von_neumann_entropy};
use qreading_core::{MarginalCell, RateOptions, TransmitterSpec, Truncation};

fn quick() -> RateOptions {
    RateOptions {
        dim: 40,
        pair_dim: 40,
        check_convergence: false,
        ..RateOptions::default()
    }
}

fn reflectance() -> impl Strategy<Value = Complex64> {
    (0.0..=1.0f64, 0.0..(2.0 * PI)).prop_map(|(r, phi)| Complex64::from_polar(r, phi))
}

fn cell() -> impl Strategy<Value = MarginalCell> {
    prop::collection::vec((0.05..1.0f64, reflectance()), 2..=3).prop_map(|syms| {
        let total: f64 = syms.iter().map(|s| s.0).sum();
        MarginalCell::new(
            syms.iter().map(|s| s.0 / total).collect(),
            syms.iter().map(|s| s.1).collect(),
        )
        .unwrap()
    })
}

fn transmitter() -> impl Strategy<Value = TransmitterSpec> {
    (0.01..=0.8f64, any::<bool>()).prop_map(|(n, epr)| {
        if epr {
            TransmitterSpec::epr(n, 1).unwrap()
        } else {
            TransmitterSpec::coherent(n).unwrap()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cell_channel_keeps_trace_and_positivity(
        alpha in (0.0..1.0f64, 0.0..(2.0 * PI)),
        z in reflectance(),
        n_th in 0.0..0.4f64,
    ) {
        let alpha = Complex64::from_polar(alpha.0, alpha.1);
        let rho = coherent_state(alpha, Truncation::new(40, 1e-8)).unwrap().density();
        let out = apply_cell_channel(&rho, ChannelParams::new(z, n_th).unwrap(), 0, DEFAULT_QUAD_ORDER).unwrap();
        prop_assert!((out.trace() - rho.trace()).abs() < 1e-6);
        let spectrum = hermitian_eigenvalues(out.matrix());
        prop_assert!(spectrum.iter().all(|&l| l > -1e-10));
    }

    #[test]
    fn rate_ignores_global_phase(cell in cell(), tx in transmitter(), phi in 0.0..(2.0 * PI), n_th in 0.0..0.3f64) {
        let opts = quick();
        let a = holevo_rate(&cell, &tx, n_th, &opts).unwrap().rate_bits;
        let b = holevo_rate(&cell.with_global_phase(phi), &tx, n_th, &opts).unwrap().rate_bits;
        prop_assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn rate_within_holevo_bound(cell in cell(), tx in transmitter(), n_th in 0.0..0.3f64) {
        let r = holevo_rate(&cell, &tx, n_th, &quick()).unwrap().rate_bits;
        let h = shannon_entropy_d(&cell.probs()[1..]).unwrap();
        prop_assert!(r >= 0.0);
        prop_assert!(r <= h + 1e-9, "{r} > H = {h}");
    }

    #[test]
    fn symbol_is_bounded_and_symmetric(ratio in 0.05..6.0f64, fill in 0.05..=1.0f64, z in 0.0..(2.0 * PI)) {
        let g = DiffractionGeometry::for_ratio(ratio, fill).unwrap();
        let f = toeplitz_symbol(&g, z);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f), "f = {f}");
        prop_assert!((f - toeplitz_symbol(&g, 2.0 * PI - z)).abs() < 1e-12);
    }

    #[test]
    fn truncation_deficit_shrinks_with_dim(alpha in 0.0..1.5f64, dim in 12usize..40) {
        let a = Complex64::new(alpha, 0.0);
        let small = coherent_state(a, Truncation::new(dim, 1.0)).unwrap();
        let large = coherent_state(a, Truncation::new(dim + 1, 1.0)).unwrap();
        prop_assert!(large.norm_deficit() <= small.norm_deficit());
    }

    #[test]
    fn entropies_ignore_mode_order(n in 0.01..0.6f64, z in reflectance()) {
        let rho = epr_state(n, 1, Truncation::new(10, 1e-2)).unwrap().density();
        let lossy = apply_loss(&rho, z, 0).unwrap();
        let swapped = lossy.permute_modes(&[1, 0]).unwrap();
        let s = von_neumann_entropy(&lossy).unwrap();
        prop_assert!((s - von_neumann_entropy(&swapped).unwrap()).abs() < 1e-10);
        let a = von_neumann_entropy(&partial_trace(&lossy, &[0]).unwrap()).unwrap();
        let b = von_neumann_entropy(&partial_trace(&swapped, &[1]).unwrap()).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }
}
