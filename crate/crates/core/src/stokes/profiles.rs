//! Particular solutions of the radial Stokes system inside the unit ball.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::quadrature::integrate;

pub type RadialFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

const TOL: f64 = 1e-15;

fn zero_fn() -> RadialFn {
    Arc::new(|_| Complex64::new(0.0, 0.0))
}

/// Forcing profiles F¹, F^{2;V}, F^{2;X}, F^{2;W} of one (l, m) mode.
#[derive(Clone)]
pub struct NonhomogProfiles {
    pub l: usize,
    pub f1: RadialFn,
    pub f2v: RadialFn,
    pub f2x: RadialFn,
    pub f2w: RadialFn,
}

impl std::fmt::Debug for NonhomogProfiles {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NonhomogProfiles")
            .field("l", &self.l)
            .finish_non_exhaustive()
    }
}

/// ∫_lo^hi s^p F(s) ds.
fn moment(f: &RadialFn, p: f64, lo: f64, hi: f64) -> Result<Complex64> {
    integrate(|s| f(s) * s.powf(p), lo, hi, TOL, TOL)
}

/// ∫_lo^hi s^p·(s² − r²)/2·F(s) ds.
fn moment_shift(f: &RadialFn, p: f64, r: f64, lo: f64, hi: f64) -> Result<Complex64> {
    integrate(|s| f(s) * (s.powf(p) * 0.5 * (s * s - r * r)), lo, hi, TOL, TOL)
}

impl NonhomogProfiles {
    pub fn zero(l: usize) -> Self {
        Self {
            l,
            f1: zero_fn(),
            f2v: zero_fn(),
            f2x: zero_fn(),
            f2w: zero_fn(),
        }
    }

    /// Green's-function solution of L_k H = F on (0,1) regular at 0 and vanishing at 1,
    /// for the scalar equation with index `k`.
    fn green(f: &RadialFn, k: f64, r: f64) -> Result<Complex64> {
        let d = 2.0 * k + 1.0;
        let inner = moment(f, 1.0 - k, r, 1.0)?;
        let outer = moment(f, k + 2.0, 0.0, r)?;
        Ok(-(r.powf(k) * inner + r.powf(-k - 1.0) * outer) / d)
    }

    /// H^P(r).
    pub fn hp(&self, r: f64) -> Result<Complex64> {
        Self::green(&self.f1, self.l as f64, r)
    }

    /// H^X(r); zero at l = 0.
    pub fn hx(&self, r: f64) -> Result<Complex64> {
        if self.l == 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Self::green(&self.f2x, self.l as f64, r)
    }

    /// H^V(r), including the pressure coupling through F¹.
    pub fn hv(&self, r: f64) -> Result<Complex64> {
        let l = self.l as f64;
        let base = Self::green(&self.f2v, l + 1.0, r)?;
        let c = ((l + 1.0) / (2.0 * l + 1.0)).sqrt() / (2.0 * l + 3.0);
        let inner0 = moment(&self.f1, l + 2.0, 0.0, r)?;
        let outer = integrate(|s| (self.f1)(s) * (s.powf(1.0 - l) - s.powf(l + 2.0)), r, 1.0, TOL, TOL)?;
        let shifted = -moment_shift(&self.f1, l + 2.0, r, 0.0, r)?;
        let bracket = (r.powf(-l) - r.powf(l + 1.0)) * inner0 / (2.0 * l + 1.0)
            + r.powf(l + 1.0) * outer / (2.0 * l + 1.0)
            + r.powf(-l - 2.0) * shifted;
        Ok(base + c * bracket)
    }

    /// H^W(r), including the pressure coupling; zero at l = 0.
    pub fn hw(&self, r: f64) -> Result<Complex64> {
        if self.l == 0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let l = self.l as f64;
        let base = Self::green(&self.f2w, l - 1.0, r)?;
        let c = (l / (2.0 * l + 1.0)).sqrt() / (2.0 * l - 1.0);
        let near = moment_shift(&self.f1, 1.0 - l, r, r, 1.0)?;
        let inner = moment(&self.f1, l + 2.0, 0.0, r)?;
        let outer = moment(&self.f1, 1.0 - l, r, 1.0)?;
        let bracket = r.powf(l - 1.0) * near + r.powf(-l) / (2.0 * l + 1.0) * (inner + r.powf(2.0 * l + 1.0) * outer);
        Ok(base + c * bracket)
    }
}
