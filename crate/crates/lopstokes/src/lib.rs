//! Fourier-space solution theory for the compressible/incompressible
//! two-phase Stokes interface problem in a half-space pair, with numerical
//! certification of its algebraic and analytic properties.
//!
//! The pipeline runs from the characteristic roots (`symbol`) through the
//! 3x3 boundary matrix (`lopatinski`) to closed-form amplitudes
//! (`coefficients`), exact exponential-sum profiles (`resolvent`) and the
//! physical-space layer (`transform`).

pub mod coefficients;
pub mod error;
pub mod grid;
pub mod lopatinski;
pub mod profile;
pub mod quadrature;
pub mod resolvent;
pub mod symbol;
pub mod tolerances;
pub mod transform;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use symbol::{FluidParams, RawParams, Sector, SpectralPoint};
pub use tolerances::Tolerances;
