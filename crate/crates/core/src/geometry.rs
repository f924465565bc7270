//! Linear-order free-surface geometry on r = 1 + εg.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonics::{AngularGrid, PointBasis, SpectralCoefficients};

/// Smooth cutoff Ψ: 1 for |z| < δ₀/4, 0 for |z| ≥ 3δ₀/4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    delta0: f64,
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

fn bump_d(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp() / (t * t)
    }
}

impl Default for CutoffProfile {
    fn default() -> Self {
        Self { delta0: 0.5 }
    }
}

impl CutoffProfile {
    pub fn new(delta0: f64) -> Result<Self> {
        if !(delta0 > 0.0 && delta0.is_finite()) {
            return Err(Error::Domain(format!("cutoff width must be positive, got {delta0}")));
        }
        Ok(Self { delta0 })
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    fn ramp(&self, z: f64) -> f64 {
        (z.abs() - 0.25 * self.delta0) / (0.5 * self.delta0)
    }

    pub fn value(&self, z: f64) -> f64 {
        let t = self.ramp(z);
        let (a, b) = (bump(t), bump(1.0 - t));
        if a + b == 0.0 {
            return if t < 0.5 { 1.0 } else { 0.0 };
        }
        1.0 - a / (a + b)
    }

    /// dΨ/dz.
    pub fn derivative(&self, z: f64) -> f64 {
        let t = self.ramp(z);
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        let (a, b) = (bump(t), bump(1.0 - t));
        let ds = (bump_d(t) * b + a * bump_d(1.0 - t)) / ((a + b) * (a + b));
        -z.signum() * ds / (0.5 * self.delta0)
    }

    /// sup |Ψ'|, found by dense sampling of the ramp.
    pub fn max_slope(&self) -> f64 {
        (0..=4000)
            .map(|k| self.derivative(self.delta0 * (0.25 + 0.5 * k as f64 / 4000.0)).abs())
            .fold(0.0, f64::max)
    }
}

/// Star-shaped surface r = 1 + εg(θ, φ) with a real spectrum g.
#[derive(Debug, Clone)]
pub struct Surface {
    epsilon: f64,
    g: SpectralCoefficients,
    sup_g: f64,
}

impl Surface {
    pub fn new(epsilon: f64, g: SpectralCoefficients) -> Result<Self> {
        if !epsilon.is_finite() {
            return Err(Error::Domain("non-finite amplitude".into()));
        }
        g.check_reality(1e-12)?;
        let grid = AngularGrid::for_lmax(2 * g.lmax() + 4);
        let values = grid.synthesize(&g)?;
        let sup_g = values.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
        if let Some(min) = values.iter().map(|v| 1.0 + epsilon * v.re).reduce(f64::min) {
            if min <= 0.0 {
                return Err(Error::Domain(format!("surface not star-shaped: min radius {min:.3e}")));
            }
        }
        Ok(Self { epsilon, g, sup_g })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn g(&self) -> &SpectralCoefficients {
        &self.g
    }

    /// Sampled sup |g| used for admissibility bounds.
    pub fn sup_g(&self) -> f64 {
        self.sup_g
    }

    /// g, g_θ and g_φ / sin θ at a point.
    pub fn derivatives(&self, theta: f64, phi: f64) -> (f64, f64, f64) {
        let b = PointBasis::new(self.g.lmax(), theta, phi);
        let i = Complex64::new(0.0, 1.0);
        let (mut g, mut gt, mut gp) = (Complex64::default(), Complex64::default(), Complex64::default());
        for (idx, c) in self.g.iter() {
            g += c * b.y(idx.l, idx.m);
            gt += c * b.dtheta(idx.l, idx.m);
            gp += c * i * b.m_over_sin(idx.l, idx.m);
        }
        (g.re, gt.re, gp.re)
    }

    pub fn radius(&self, theta: f64, phi: f64) -> f64 {
        1.0 + self.epsilon * self.derivatives(theta, phi).0
    }

    /// Reject amplitudes for which the Hanzawa map with `cutoff` folds over.
    pub fn check_admissible(&self, cutoff: &CutoffProfile) -> Result<()> {
        let k = self.epsilon.abs() * self.sup_g * cutoff.max_slope();
        if k >= 1.0 {
            return Err(Error::Domain(format!(
                "ε·sup|g|·sup|Ψ'| = {k:.3} ≥ 1: Hanzawa map is not injective"
            )));
        }
        Ok(())
    }
}

/// Unit outward normal in the (e_r, e_θ, e_φ) frame.
pub fn normal_vector(surface: &Surface, theta: f64, phi: f64) -> [f64; 3] {
    let (g, gt, gp) = surface.derivatives(theta, phi);
    let e = surface.epsilon;
    let a = 1.0 + e * g;
    let rho = (a * a + (e * gt).powi(2) + (e * gp).powi(2)).sqrt();
    [a / rho, -e * gt / rho, -e * gp / rho]
}

/// Coefficients of κ = 1 − ε(g + ½Δ_ω g).
pub fn mean_curvature_linear(surface: &Surface) -> SpectralCoefficients {
    let g = &surface.g;
    let mut out = SpectralCoefficients::zeros(g.lmax());
    for (idx, c) in g.iter() {
        let l = idx.l as f64;
        out.set(idx.l, idx.m, -surface.epsilon * (1.0 - 0.5 * l * (l + 1.0)) * c);
    }
    let unit = Complex64::new(2.0 * std::f64::consts::PI.sqrt(), 0.0);
    out.set(0, 0, out.get(0, 0) + unit);
    out
}

/// r^ξ = r + Ψ(1 − r)·εg(θ, φ).
pub fn hanzawa_map(surface: &Surface, cutoff: &CutoffProfile, r: f64, theta: f64, phi: f64) -> Result<f64> {
    if r < 0.0 {
        return Err(Error::Domain(format!("negative radius {r}")));
    }
    surface.check_admissible(cutoff)?;
    let g = surface.derivatives(theta, phi).0;
    Ok(r + cutoff.value(1.0 - r) * surface.epsilon * g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn cutoff_shape() {
        let p = CutoffProfile::default();
        assert_eq!(p.value(0.0), 1.0);
        assert_eq!(p.value(0.12), 1.0);
        assert_eq!(p.value(-0.38), 0.0);
        assert_eq!(p.value(1.0), 0.0);
        assert!((p.value(0.25) - 0.5).abs() < 1e-15);
        let h = 1e-6;
        for z in [0.15, 0.2, 0.3, -0.2] {
            let fd = (p.value(z + h) - p.value(z - h)) / (2.0 * h);
            assert!((p.derivative(z) - fd).abs() < 1e-6);
        }
        assert!(CutoffProfile::new(0.0).is_err());
    }

    #[test]
    fn unperturbed_normal_is_radial() {
        let s = Surface::new(0.0, SpectralCoefficients::delta(2, 2, 0, c(1.0))).unwrap();
        assert_eq!(normal_vector(&s, 0.4, 1.0), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn normal_is_unit_including_poles() {
        let mut g = SpectralCoefficients::zeros(3);
        g.set(3, 1, Complex64::new(0.3, -0.2));
        g.set(3, -1, Complex64::new(-0.3, -0.2));
        g.set(2, 0, c(0.5));
        let s = Surface::new(0.1, g).unwrap();
        for th in [0.0, 0.3, 1.7, std::f64::consts::PI] {
            let n = normal_vector(&s, th, 0.9);
            let len = n.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((len - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn curvature_factors() {
        let s = Surface::new(0.1, SpectralCoefficients::delta(2, 1, 0, c(1.0))).unwrap();
        let k = mean_curvature_linear(&s);
        assert!((k.get(0, 0).re - 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert_eq!(k.get(1, 0), c(0.0));
        let s = Surface::new(0.1, SpectralCoefficients::delta(2, 2, 0, c(1.0))).unwrap();
        assert!((mean_curvature_linear(&s).get(2, 0).re - 0.2).abs() < 1e-15);
    }

    #[test]
    fn hanzawa_endpoints() {
        let s = Surface::new(0.05, SpectralCoefficients::delta(2, 2, 0, c(1.0))).unwrap();
        let p = CutoffProfile::default();
        let at1 = hanzawa_map(&s, &p, 1.0, 0.3, 0.2).unwrap();
        assert!((at1 - s.radius(0.3, 0.2)).abs() < 1e-15);
        assert_eq!(hanzawa_map(&s, &p, 0.0, 0.3, 0.2).unwrap(), 0.0);
        assert!(hanzawa_map(&s, &p, -0.1, 0.3, 0.2).is_err());
        let big = Surface::new(0.9, SpectralCoefficients::delta(2, 2, 0, c(1.0))).unwrap();
        assert!(hanzawa_map(&big, &p, 0.9, 0.3, 0.2).is_err());
    }

    #[test]
    fn rejects_non_star_shaped() {
        assert!(Surface::new(5.0, SpectralCoefficients::delta(2, 2, 0, c(1.0))).is_err());
    }
}
