use num_complex::Complex64;

use super::legendre::LegendreTable;
use super::spectrum::{flat, parity, HarmonicIndex};
use crate::error::{Error, Result};

/// Vector harmonic family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    V,
    X,
    W,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::V, Channel::X, Channel::W];
}

/// All Y_lm, ∂θY_lm and mY_lm/sinθ at one point, for l ≤ lmax.
///
/// The last quantity is evaluated without dividing by sin θ, so poles are safe.
#[derive(Debug, Clone)]
pub struct PointBasis {
    lmax: usize,
    y: Vec<Complex64>,
    dy: Vec<Complex64>,
    my: Vec<Complex64>,
}

impl PointBasis {
    pub fn new(lmax: usize, theta: f64, phi: f64) -> Self {
        let table = LegendreTable::new(lmax, theta.cos(), theta.sin().abs());
        let n = (lmax + 1) * (lmax + 1);
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        let mut my = vec![Complex64::new(0.0, 0.0); n];
        for l in 0..=lmax {
            for m in 0..=l {
                let e = Complex64::from_polar(1.0, m as f64 * phi);
                let v = e * table.p(l, m);
                let w = e * (m as f64 * table.q(l, m));
                let mi = m as i64;
                y[flat(l, mi)] = v;
                my[flat(l, mi)] = w;
                if m > 0 {
                    let s = parity(mi);
                    y[flat(l, -mi)] = v.conj() * s;
                    // (−m)·Y_{l,−m}/sinθ = −(−1)^m conj(m Y_lm / sinθ)
                    my[flat(l, -mi)] = -w.conj() * s;
                }
            }
        }
        let eip = Complex64::from_polar(1.0, phi);
        let mut dy = vec![Complex64::new(0.0, 0.0); n];
        for l in 0..=lmax {
            let li = l as i64;
            for m in -li..=li {
                let up = if m < li {
                    (((li - m) * (li + m + 1)) as f64).sqrt() * eip.conj() * y[flat(l, m + 1)]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let down = if m > -li {
                    (((li + m) * (li - m + 1)) as f64).sqrt() * eip * y[flat(l, m - 1)]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                dy[flat(l, m)] = 0.5 * (up - down);
            }
        }
        Self { lmax, y, dy, my }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    #[inline]
    pub fn y(&self, l: usize, m: i64) -> Complex64 {
        self.y[flat(l, m)]
    }

    #[inline]
    pub fn dtheta(&self, l: usize, m: i64) -> Complex64 {
        self.dy[flat(l, m)]
    }

    /// m·Y_lm / sin θ.
    #[inline]
    pub fn m_over_sin(&self, l: usize, m: i64) -> Complex64 {
        self.my[flat(l, m)]
    }

    /// Components (e_r, e_θ, e_φ) of the vector harmonic.
    pub fn vector(&self, channel: Channel, l: usize, m: i64) -> [Complex64; 3] {
        let zero = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let lf = l as f64;
        let (y, dy, my) = (self.y(l, m), self.dtheta(l, m), self.m_over_sin(l, m));
        match channel {
            Channel::V => {
                let n = ((lf + 1.0) * (2.0 * lf + 1.0)).sqrt();
                [-((lf + 1.0) / (2.0 * lf + 1.0)).sqrt() * y, dy / n, i * my / n]
            }
            Channel::X if l == 0 => [zero; 3],
            Channel::X => {
                let n = (lf * (lf + 1.0)).sqrt();
                [zero, -my / n, -i * dy / n]
            }
            Channel::W if l == 0 => [zero; 3],
            Channel::W => {
                let n = (lf * (2.0 * lf + 1.0)).sqrt();
                [(lf / (2.0 * lf + 1.0)).sqrt() * y, dy / n, i * my / n]
            }
        }
    }
}

/// Y_lm(θ, φ) with Condon–Shortley phase, orthonormal on the unit sphere.
pub fn eval_scalar_harmonic(idx: HarmonicIndex, theta: f64, phi: f64) -> Result<Complex64> {
    let idx = HarmonicIndex::new(idx.l, idx.m)?;
    check_theta(theta)?;
    let m = idx.m.unsigned_abs() as usize;
    let t = LegendreTable::new(idx.l, theta.cos(), theta.sin().abs());
    let v = Complex64::from_polar(t.p(idx.l, m), m as f64 * phi);
    Ok(if idx.m < 0 { v.conj() * parity(idx.m) } else { v })
}

/// Vector harmonic in the (e_r, e_θ, e_φ) frame. X and W vanish at l = 0.
pub fn eval_vector_harmonic(channel: Channel, idx: HarmonicIndex, theta: f64, phi: f64) -> Result<[Complex64; 3]> {
    let idx = HarmonicIndex::new(idx.l, idx.m)?;
    check_theta(theta)?;
    Ok(PointBasis::new(idx.l, theta, phi).vector(channel, idx.l, idx.m))
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::Domain(format!("colatitude {theta} outside [0, π]")));
    }
    Ok(())
}
