//! Fixtures shared by the benchmarks.

use qreading_core::{DiffractionGeometry, MarginalCell, RateOptions};

/// Equiprobable cell with reflectances 0 and 1.
pub fn amplitude_cell() -> MarginalCell {
    MarginalCell::binary_real(0.5, 0.0, 1.0).expect("valid cell")
}

/// Equiprobable cell with reflectances 1 and -1.
pub fn phase_cell() -> MarginalCell {
    MarginalCell::binary_real(0.5, 1.0, -1.0).expect("valid cell")
}

/// Default truncations without the extra convergence pass.
pub fn fast_options() -> RateOptions {
    RateOptions { check_convergence: false, ..RateOptions::default() }
}

pub fn geometry(ratio: f64, d_over_ell: f64) -> DiffractionGeometry {
    DiffractionGeometry::for_ratio(ratio, d_over_ell).expect("valid geometry")
}
