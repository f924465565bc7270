//! Fixed inputs shared by the criterion benches.

use evap_core::ellipsoid::EllipsoidGeometry;
use evap_core::SpectralCoefficients;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn spectrum(lmax: usize) -> SpectralCoefficients {
    SpectralCoefficients::random_real(&mut ChaCha8Rng::seed_from_u64(lmax as u64), lmax, 0.3)
}

pub fn reference_ellipsoid() -> EllipsoidGeometry {
    EllipsoidGeometry::from_axes([0.8, 0.9, 1.2], 0.1).expect("positive axes")
}
