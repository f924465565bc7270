use num_complex::Complex64;

use super::basis::{Channel, PointBasis};
use super::legendre::LegendreTable;
use super::spectrum::{parity, SpectralCoefficients};
use super::VectorSpectralCoefficients;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Gauss–Legendre nodes in cos θ times uniform φ.
///
/// Field values are stored row-major: index `i * n_phi + j` for (θ_i, φ_j).
#[derive(Debug, Clone)]
pub struct AngularGrid {
    theta: Vec<f64>,
    cos_theta: Vec<f64>,
    w_theta: Vec<f64>,
    phi: Vec<f64>,
}

impl AngularGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::Domain("grid needs at least one node per direction".into()));
        }
        let (x, w) = gauss_legendre(n_theta);
        // Order nodes from the north pole southward.
        let cos_theta: Vec<f64> = x.iter().rev().copied().collect();
        let w_theta: Vec<f64> = w.iter().rev().copied().collect();
        let theta = cos_theta.iter().map(|c| c.clamp(-1.0, 1.0).acos()).collect();
        let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
        let phi = (0..n_phi).map(|j| j as f64 * dphi).collect();
        Ok(Self {
            theta,
            cos_theta,
            w_theta,
            phi,
        })
    }

    /// Smallest grid that is exact for degree `lmax`.
    pub fn for_lmax(lmax: usize) -> Self {
        Self::new(lmax + 1, 2 * lmax + 1).expect("positive sizes")
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi.len()
    }

    pub fn len(&self) -> usize {
        self.n_theta() * self.n_phi()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Highest degree projected exactly.
    pub fn max_degree(&self) -> usize {
        (self.n_theta() - 1).min((self.n_phi() - 1) / 2)
    }

    /// Quadrature weight of node (i, j); the weights sum to 4π.
    pub fn weight(&self, i: usize, _j: usize) -> f64 {
        self.w_theta[i] * 2.0 * std::f64::consts::PI / self.n_phi() as f64
    }

    /// Iterate (θ, φ, weight) in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.n_theta())
            .flat_map(move |i| (0..self.n_phi()).map(move |j| (self.theta[i], self.phi[j], self.weight(i, j))))
    }

    /// Quadrature of a field over the sphere.
    pub fn integrate(&self, values: &[Complex64]) -> Complex64 {
        self.nodes().zip(values).map(|((_, _, w), v)| v * w).sum()
    }

    fn check(&self, lmax: usize) -> Result<()> {
        if lmax > self.max_degree() {
            return Err(Error::Resolution(format!(
                "grid {}x{} resolves l ≤ {}, requested {}",
                self.n_theta(),
                self.n_phi(),
                self.max_degree(),
                lmax
            )));
        }
        Ok(())
    }

    /// Evaluate the expansion at every node.
    pub fn synthesize(&self, coeffs: &SpectralCoefficients) -> Result<Vec<Complex64>> {
        let lmax = coeffs.lmax();
        self.check(lmax)?;
        let np = self.n_phi();
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        let li = lmax as i64;
        let width = 2 * lmax + 1;
        let phases: Vec<Complex64> = self
            .phi
            .iter()
            .flat_map(|&phi| (-li..=li).map(move |m| Complex64::from_polar(1.0, m as f64 * phi)))
            .collect();
        for i in 0..self.n_theta() {
            let x = self.cos_theta[i];
            let t = LegendreTable::new(lmax, x, (1.0 - x * x).max(0.0).sqrt());
            // Collapse the l-sum per order first.
            let mut row = vec![Complex64::new(0.0, 0.0); 2 * lmax + 1];
            for m in -li..=li {
                let am = m.unsigned_abs() as usize;
                let sign = if m < 0 { parity(m) } else { 1.0 };
                row[(m + li) as usize] = (am..=lmax).map(|l| coeffs.get(l, m) * (t.p(l, am) * sign)).sum();
            }
            for j in 0..np {
                let ph = &phases[j * width..(j + 1) * width];
                out[i * np + j] = row.iter().zip(ph).map(|(r, e)| r * e).sum();
            }
        }
        Ok(out)
    }

    /// Project node values onto Y_lm for l ≤ lmax.
    pub fn project(&self, values: &[Complex64], lmax: usize) -> Result<SpectralCoefficients> {
        self.check(lmax)?;
        if values.len() != self.len() {
            return Err(Error::Domain(format!(
                "expected {} values, got {}",
                self.len(),
                values.len()
            )));
        }
        let np = self.n_phi();
        let dphi = 2.0 * std::f64::consts::PI / np as f64;
        let li = lmax as i64;
        let phases: Vec<Complex64> = (-li..=li)
            .flat_map(|m| {
                self.phi
                    .iter()
                    .map(move |&phi| Complex64::from_polar(1.0, -(m as f64) * phi))
            })
            .collect();
        let mut out = SpectralCoefficients::zeros(lmax);
        for i in 0..self.n_theta() {
            let x = self.cos_theta[i];
            let t = LegendreTable::new(lmax, x, (1.0 - x * x).max(0.0).sqrt());
            let row = &values[i * np..(i + 1) * np];
            for m in -li..=li {
                let k = (m + li) as usize;
                let s: Complex64 = row
                    .iter()
                    .zip(&phases[k * np..(k + 1) * np])
                    .map(|(v, e)| v * e)
                    .sum::<Complex64>()
                    * (dphi * self.w_theta[i]);
                let am = m.unsigned_abs() as usize;
                let sign = if m < 0 { parity(m) } else { 1.0 };
                for l in am..=lmax {
                    let cur = out.get(l, m);
                    out.set(l, m, cur + s * (t.p(l, am) * sign));
                }
            }
        }
        Ok(out)
    }

    /// Evaluate a vector expansion at every node, components (e_r, e_θ, e_φ).
    pub fn synthesize_vector(&self, coeffs: &VectorSpectralCoefficients) -> Result<Vec<[Complex64; 3]>> {
        let lmax = coeffs.lmax();
        self.check(lmax)?;
        let mut out = Vec::with_capacity(self.len());
        for (th, ph, _) in self.nodes() {
            let b = PointBasis::new(lmax, th, ph);
            let mut acc = [Complex64::new(0.0, 0.0); 3];
            for l in 0..=lmax {
                let li = l as i64;
                for m in -li..=li {
                    for ch in Channel::ALL {
                        let c = coeffs.get(ch, l, m);
                        if c == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let v = b.vector(ch, l, m);
                        for k in 0..3 {
                            acc[k] += c * v[k];
                        }
                    }
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Project a vector field onto V, X, W for l ≤ lmax.
    pub fn project_vector(&self, values: &[[Complex64; 3]], lmax: usize) -> Result<VectorSpectralCoefficients> {
        // Tangential parts carry one extra sinθ factor in degree, so one more
        // degree of exactness is needed than for scalars.
        self.check(lmax + 1)?;
        let mut out = VectorSpectralCoefficients::zeros(lmax);
        for ((th, ph, w), f) in self.nodes().zip(values) {
            let b = PointBasis::new(lmax, th, ph);
            for l in 0..=lmax {
                let li = l as i64;
                for m in -li..=li {
                    for ch in Channel::ALL {
                        let v = b.vector(ch, l, m);
                        let dot: Complex64 = (0..3).map(|k| f[k] * v[k].conj()).sum();
                        let cur = out.get(ch, l, m);
                        out.set(ch, l, m, cur + dot * w);
                    }
                }
            }
        }
        Ok(out)
    }
}
