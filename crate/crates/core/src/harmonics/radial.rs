//! Degree-by-degree calculus for fields of the form F(r)·Y_lm and F(r)·V_lm etc.

use super::basis::Channel;
use crate::error::{Error, Result};

/// Value and first two derivatives of a radial profile at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

pub trait RadialProfile {
    fn jet(&self, r: f64) -> Jet;
}

/// c·r^p.
#[derive(Debug, Clone, Copy)]
pub struct Power {
    pub coeff: f64,
    pub exponent: f64,
}

impl Power {
    pub fn new(coeff: f64, exponent: f64) -> Self {
        Self { coeff, exponent }
    }
}

impl RadialProfile for Power {
    fn jet(&self, r: f64) -> Jet {
        let (c, p) = (self.coeff, self.exponent);
        Jet {
            value: c * r.powf(p),
            d1: if p == 0.0 { 0.0 } else { c * p * r.powf(p - 1.0) },
            d2: if p == 0.0 || p == 1.0 {
                0.0
            } else {
                c * p * (p - 1.0) * r.powf(p - 2.0)
            },
        }
    }
}

/// Arbitrary closure, differentiated by fourth-order central differences.
pub struct Sampled<F: Fn(f64) -> f64> {
    pub f: F,
    pub h: f64,
}

impl<F: Fn(f64) -> f64> Sampled<F> {
    pub fn new(f: F) -> Self {
        Self { f, h: 1e-3 }
    }
}

impl<F: Fn(f64) -> f64> RadialProfile for Sampled<F> {
    fn jet(&self, r: f64) -> Jet {
        let h = self.h * r.abs().max(1e-2);
        let f = &self.f;
        let (m2, m1, z, p1, p2) = (f(r - 2.0 * h), f(r - h), f(r), f(r + h), f(r + 2.0 * h));
        Jet {
            value: z,
            d1: (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h),
            d2: (-m2 + 16.0 * m1 - 30.0 * z + 16.0 * p1 - p2) / (12.0 * h * h),
        }
    }
}

fn check_r(r: f64) -> Result<()> {
    if r <= 0.0 || !r.is_finite() {
        return Err(Error::Domain(format!("radial operators need r > 0, got {r}")));
    }
    Ok(())
}

/// L_l[F](r) = F'' + (2/r)F' − l(l+1)F/r².
pub fn radial_operator(l: usize, f: &impl RadialProfile, r: f64) -> Result<f64> {
    check_r(r)?;
    let j = f.jet(r);
    let lf = l as f64;
    Ok(j.d2 + 2.0 * j.d1 / r - lf * (lf + 1.0) * j.value / (r * r))
}

/// Shifted degree of the vector Laplacian on each channel: l+1, l, l−1.
pub fn laplacian_degree(channel: Channel, l: usize) -> usize {
    match channel {
        Channel::V => l + 1,
        Channel::X => l,
        Channel::W => l.saturating_sub(1),
    }
}

/// (V, W) profiles of ∇[F·Y_lm] at r.
pub fn gradient_mode(l: usize, f: &impl RadialProfile, r: f64) -> Result<(f64, f64)> {
    check_r(r)?;
    let j = f.jet(r);
    let lf = l as f64;
    let a = ((lf + 1.0) / (2.0 * lf + 1.0)).sqrt();
    let b = (lf / (2.0 * lf + 1.0)).sqrt();
    Ok((a * (-j.d1 + lf * j.value / r), b * (j.d1 + (lf + 1.0) * j.value / r)))
}

/// Y_lm profile of div[F·C_lm] at r for channel C.
pub fn divergence_mode(channel: Channel, l: usize, f: &impl RadialProfile, r: f64) -> Result<f64> {
    check_r(r)?;
    let j = f.jet(r);
    let lf = l as f64;
    Ok(match channel {
        Channel::V => -((lf + 1.0) / (2.0 * lf + 1.0)).sqrt() * (j.d1 + (lf + 2.0) * j.value / r),
        Channel::X => 0.0,
        Channel::W => (lf / (2.0 * lf + 1.0)).sqrt() * (j.d1 - (lf - 1.0) * j.value / r),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneous_solutions() {
        for l in 0..6usize {
            for r in [0.3, 1.0, 2.5] {
                let up = radial_operator(l, &Power::new(1.0, l as f64), r).unwrap();
                let down = radial_operator(l, &Power::new(1.0, -(l as f64) - 1.0), r).unwrap();
                assert!(up.abs() < 1e-12 && down.abs() < 1e-10, "l={l} r={r}");
            }
        }
        assert_eq!(radial_operator(2, &Power::new(1.0, 4.0), 1.0).unwrap(), 14.0);
        assert!(radial_operator(2, &Power::new(1.0, 4.0), 0.0).is_err());
    }

    #[test]
    fn gradient_and_divergence_examples() {
        let (v, w) = gradient_mode(0, &Power::new(3.0, 0.0), 0.7).unwrap();
        assert_eq!((v, w), (0.0, 0.0));
        let (v, w) = gradient_mode(1, &Power::new(1.0, 1.0), 0.7).unwrap();
        assert!(v.abs() < 1e-15 && (w - 3.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(divergence_mode(Channel::X, 4, &Power::new(1.0, 2.0), 0.5).unwrap(), 0.0);
        assert_eq!(divergence_mode(Channel::W, 1, &Power::new(1.0, 0.0), 0.5).unwrap(), 0.0);
        let d = divergence_mode(Channel::V, 2, &Power::new(1.0, 3.0), 1.0).unwrap();
        assert!((d + 7.0 * (0.6f64).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn sampled_profile_agrees_with_power() {
        let s = Sampled::new(|r: f64| r.powi(5));
        let p = Power::new(1.0, 5.0);
        let (a, b) = (s.jet(0.8), p.jet(0.8));
        assert!((a.d1 - b.d1).abs() < 1e-9 && (a.d2 - b.d2).abs() < 1e-6);
    }
}
