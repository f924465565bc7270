pub mod ellipsoid;
pub mod error;
pub mod evolution;
pub mod geometry;
pub mod harmonics;
pub mod oracle;
pub mod quadrature;
pub mod stokes;
pub mod vapor;
pub mod verify;

pub use error::{Error, Result};
pub use harmonics::{AngularGrid, Channel, HarmonicIndex, SpectralCoefficients, VectorSpectralCoefficients};
pub use num_complex::Complex64;
