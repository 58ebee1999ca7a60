//! Quantum reading of optical memories: transmitter states, cell channels,
//! Holevo reading rates and diffraction bounds.

pub mod channels;
pub mod diffraction;
pub mod error;
pub mod linalg;
pub mod quadrature;
pub mod rates;
pub mod special;
pub mod states;

pub use channels::{ChannelParams, MarginalCell};
pub use diffraction::{DiffractionGeometry, DiffractionScope, RateBounds, ToeplitzSpectrum};
pub use error::{Error, Result};
pub use rates::{ConcavityReport, Gains, RateMethod, RateOptions, RateResult};
pub use states::{
    FockDensityMatrix, FockKet, GaussianState, TransmitterKind, TransmitterSpec, Truncation,
};
