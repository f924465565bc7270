//! Fully normalized associated Legendre functions.
//!
//! `p(l, m)` is the θ-part of Y_lm including the Condon–Shortley sign and the
//! 1/√(2π) azimuthal factor, so that Y_lm(θ,φ) = p(l,m)·e^{imφ} for m ≥ 0.
//! Factorials never appear; the m-diagonal is seeded and then raised in l,
//! which keeps values O(1) up to l in the hundreds.

/// Table of P̄_lm(cos θ) and P̄_lm/sin θ for 0 ≤ m ≤ l ≤ lmax.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    lmax: usize,
    p: Vec<f64>,
    q: Vec<f64>,
}

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

impl LegendreTable {
    /// Evaluate at colatitude with `x = cos θ`, `s = sin θ ≥ 0`.
    pub fn new(lmax: usize, x: f64, s: f64) -> Self {
        let n = tri(lmax, lmax) + 1;
        let mut p = vec![0.0; n];
        let mut q = vec![0.0; n];

        p[0] = 0.5 / std::f64::consts::PI.sqrt();
        for m in 1..=lmax {
            let c = -((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
            let prev = p[tri(m - 1, m - 1)];
            p[tri(m, m)] = c * s * prev;
            // P̄_mm ∝ sin^m θ, so dividing by sin θ just drops one factor.
            q[tri(m, m)] = c * prev;
        }

        for m in 0..=lmax {
            if m < lmax {
                let c = ((2 * m + 3) as f64).sqrt() * x;
                p[tri(m + 1, m)] = c * p[tri(m, m)];
                q[tri(m + 1, m)] = c * q[tri(m, m)];
            }
            for l in (m + 2)..=lmax {
                let (lf, mf) = (l as f64, m as f64);
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let lm1 = lf - 1.0;
                let b = ((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
                p[tri(l, m)] = a * (x * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
                q[tri(l, m)] = a * (x * q[tri(l - 1, m)] - b * q[tri(l - 2, m)]);
            }
        }
        // Q is only meaningful for m ≥ 1; the m = 0 column stays zero.
        for l in 0..=lmax {
            q[tri(l, 0)] = 0.0;
        }
        Self { lmax, p, q }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// P̄_lm for 0 ≤ m ≤ l.
    #[inline]
    pub fn p(&self, l: usize, m: usize) -> f64 {
        self.p[tri(l, m)]
    }

    /// P̄_lm / sin θ for 1 ≤ m ≤ l, finite at the poles. Zero for m = 0.
    #[inline]
    pub fn q(&self, l: usize, m: usize) -> f64 {
        self.q[tri(l, m)]
    }
}
