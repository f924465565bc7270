//! Exterior Laplace modes: L_l Φ = F⁷ for r > 1, Φ − g = F⁸ at r = 1, Φ → 0.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonics::HarmonicIndex;
use crate::quadrature::integrate;
use crate::stokes::RadialFn;

const TOL: f64 = 1e-14;

/// Solution of one exterior mode.
#[derive(Clone)]
pub struct VaporMode {
    pub l: usize,
    pub m: i64,
    /// Coefficient of r^{−(l+1)}: g + F⁸.
    pub decaying: Complex64,
    f7: Option<RadialFn>,
}

impl std::fmt::Debug for VaporMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VaporMode")
            .field("l", &self.l)
            .field("m", &self.m)
            .field("decaying", &self.decaying)
            .field("forced", &self.f7.is_some())
            .finish()
    }
}

/// ∫_ρ^∞ s^{1−l} F⁷(s) ds, mapped onto (0, 1/ρ] by s = 1/u.
fn tail(l: usize, f7: &RadialFn, rho: f64) -> Result<Complex64> {
    let p = l as f64 - 3.0;
    integrate(|u| f7(1.0 / u) * u.powf(p), 0.0, 1.0 / rho, TOL, TOL).map_err(|e| match e {
        Error::Numerical { residual, .. } => Error::Numerical {
            msg: format!("tail integral of F7 for l={l} does not converge"),
            residual,
        },
        other => other,
    })
}

impl VaporMode {
    /// Φ(r) for r ≥ 1.
    pub fn value(&self, r: f64) -> Result<Complex64> {
        if r < 1.0 {
            return Err(Error::Domain(format!("exterior mode evaluated at r = {r} < 1")));
        }
        let lf = self.l as f64;
        let mut v = self.decaying * r.powf(-lf - 1.0);
        if let Some(f7) = &self.f7 {
            let l = self.l;
            let h = integrate(
                |rho| tail(l, f7, rho).unwrap_or(Complex64::new(f64::NAN, f64::NAN)) * rho.powf(2.0 * lf),
                1.0,
                r,
                TOL,
                TOL,
            )?;
            if !h.re.is_finite() || !h.im.is_finite() {
                return Err(Error::Numerical {
                    msg: format!("tail integral of F7 for l={l} does not converge"),
                    residual: f64::INFINITY,
                });
            }
            v -= h * r.powf(-lf - 1.0);
        }
        Ok(v)
    }

    /// ∂Φ/∂r at r = 1 in closed form.
    pub fn flux(&self) -> Result<Complex64> {
        let mut f = -(self.l as f64 + 1.0) * self.decaying;
        if let Some(f7) = &self.f7 {
            f -= tail(self.l, f7, 1.0)?;
        }
        Ok(f)
    }
}

/// Φ_lm(r) = (g + F⁸)/r^{l+1} + H^Φ.
pub fn solve_vapor_mode(l: usize, m: i64, g: Complex64, f8: Complex64, f7: Option<RadialFn>) -> Result<VaporMode> {
    HarmonicIndex::new(l, m)?;
    let mode = VaporMode {
        l,
        m,
        decaying: g + f8,
        f7,
    };
    mode.flux()?;
    Ok(mode)
}

/// (∂Φ/∂r)_lm at r = 1: −(l+1)(g + F⁸) − ∫₁^∞ s^{1−l} F⁷ ds.
pub fn flux_trace(l: usize, m: i64, g: Complex64, f8: Complex64, f7: Option<RadialFn>) -> Result<Complex64> {
    solve_vapor_mode(l, m, g, f8, f7)?.flux()
}

/// Convenience wrapper for closures.
pub fn radial_fn(f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> RadialFn {
    Arc::new(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::{radial_operator, Sampled};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn homogeneous_mode() {
        let v = solve_vapor_mode(3, 1, c(2.0), c(0.5), None).unwrap();
        assert!((v.value(2.0).unwrap() - c(2.5 / 16.0)).norm() < 1e-15);
        assert_eq!(v.value(1.0).unwrap(), c(2.5));
        assert_eq!(flux_trace(3, 1, c(2.0), c(0.0), None).unwrap(), c(-8.0));
    }

    #[test]
    fn direct_tail_integral() {
        let f = flux_trace(0, 0, c(0.0), c(0.0), Some(radial_fn(|s| c(s.powi(-4))))).unwrap();
        assert!((f - c(-0.5)).norm() < 1e-14);
    }

    #[test]
    fn forced_profile_solves_ode() {
        let v = solve_vapor_mode(2, 0, c(0.3), c(0.0), Some(radial_fn(|r| c(r.powi(-6))))).unwrap();
        let p = Sampled {
            f: |r: f64| v.value(r).unwrap().re,
            h: 3e-3,
        };
        for r in [1.5, 3.0, 6.0, 10.0] {
            let res = radial_operator(2, &p, r).unwrap() - r.powi(-6);
            assert!(res.abs() < 1e-8, "r={r} residual {res}");
        }
        assert!((v.value(1.0).unwrap() - c(0.3)).norm() < 1e-15);
    }

    #[test]
    fn flux_matches_richardson_derivative() {
        let v = solve_vapor_mode(
            1,
            0,
            c(0.7),
            c(-0.2),
            Some(radial_fn(|r| Complex64::new(r.powi(-5), r.powi(-7)))),
        )
        .unwrap();
        let d = |h: f64| (v.value(1.0 + h).unwrap() - v.value(1.0).unwrap()) / h;
        let h = 1e-3;
        // Three-level Richardson on the one-sided difference.
        let (d1, d2, d4) = (d(h), d(h / 2.0), d(h / 4.0));
        let r1 = 2.0 * d2 - d1;
        let r2 = 2.0 * d4 - d2;
        let est = (4.0 * r2 - r1) / 3.0;
        assert!(
            (est - v.flux().unwrap()).norm() < 1e-8,
            "{}",
            (est - v.flux().unwrap()).norm()
        );
    }

    #[test]
    fn maxwell_background() {
        // φ = 1/r on the unit sphere: trace 1, flux −1.
        let v = solve_vapor_mode(0, 0, c(1.0), c(0.0), None).unwrap();
        assert_eq!(v.value(1.0).unwrap(), c(1.0));
        assert_eq!(v.flux().unwrap(), c(-1.0));
    }

    #[test]
    fn divergent_tail_is_reported() {
        let e = flux_trace(0, 0, c(0.0), c(0.0), Some(radial_fn(|_| c(1.0)))).unwrap_err();
        assert!(matches!(e, Error::Numerical { .. }));
    }
}
