//! Scalar and vector spherical harmonics, grids, and radial calculus.

mod basis;
mod grid;
mod legendre;
pub mod radial;
mod spectrum;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use basis::{eval_scalar_harmonic, eval_vector_harmonic, Channel, PointBasis};
pub use grid::AngularGrid;
pub use legendre::LegendreTable;
pub use radial::{divergence_mode, gradient_mode, radial_operator, Jet, Power, RadialProfile, Sampled};
pub use spectrum::{parity, HarmonicIndex, SpectralCoefficients};

use crate::error::{Error, Result};
use spectrum::flat;

/// Coefficients on the V, X and W families. X and W are zero at l = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorSpectralCoefficients {
    lmax: usize,
    v: Vec<Complex64>,
    x: Vec<Complex64>,
    w: Vec<Complex64>,
}

impl VectorSpectralCoefficients {
    pub fn zeros(lmax: usize) -> Self {
        let n = (lmax + 1) * (lmax + 1);
        let z = vec![Complex64::new(0.0, 0.0); n];
        Self {
            lmax,
            v: z.clone(),
            x: z.clone(),
            w: z,
        }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    fn channel(&self, ch: Channel) -> &Vec<Complex64> {
        match ch {
            Channel::V => &self.v,
            Channel::X => &self.x,
            Channel::W => &self.w,
        }
    }

    pub fn get(&self, ch: Channel, l: usize, m: i64) -> Complex64 {
        if l > self.lmax || m.unsigned_abs() as usize > l {
            return Complex64::new(0.0, 0.0);
        }
        self.channel(ch)[flat(l, m)]
    }

    /// Setting X or W at l = 0 is ignored, keeping the invariant.
    pub fn set(&mut self, ch: Channel, l: usize, m: i64, value: Complex64) {
        assert!(l <= self.lmax && m.unsigned_abs() as usize <= l);
        if l == 0 && ch != Channel::V {
            return;
        }
        let k = flat(l, m);
        match ch {
            Channel::V => self.v[k] = value,
            Channel::X => self.x[k] = value,
            Channel::W => self.w[k] = value,
        }
    }
}

/// Boundary Sobolev-type norm of order `order` (a nonnegative half-integer):
/// (Σ_l (1 + l^{2·order}) Σ_m |f_lm|²)^{1/2}, with the l = 0 weight taken as 1.
pub fn sobolev_norm(f: &SpectralCoefficients, order: f64) -> Result<f64> {
    if order.is_nan() || order < 0.0 || (2.0 * order).fract() != 0.0 {
        return Err(Error::Domain(format!(
            "order {order} is not a nonnegative half-integer"
        )));
    }
    let mut acc = 0.0;
    for (idx, v) in f.iter() {
        let weight = if idx.l == 0 {
            1.0
        } else {
            1.0 + (idx.l as f64).powf(2.0 * order)
        };
        acc += weight * v.norm_sqr();
    }
    Ok(acc.sqrt())
}
