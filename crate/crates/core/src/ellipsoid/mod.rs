//! Near-sphere ellipsoids: the quadric ↔ harmonic coefficient bijection,
//! semi-axes, capacity, t₀ and Kellogg's flux law.

mod carlson;

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix6, SymmetricEigen, Vector3, Vector6};
use num_complex::Complex64;
use serde::Serialize;

pub use carlson::rf;

use crate::error::{Error, Result};
use crate::harmonics::{parity, AngularGrid, SpectralCoefficients};

/// Y₀₀ = 1/(2√π).
pub const Y00: f64 = 0.282_094_791_773_878_14;

/// Degree used for the projected O(ε²) remainder.
pub const REMAINDER_LMAX: usize = 8;

/// Quadric x^T (I + εα) x = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadric {
    pub alpha: Matrix3<f64>,
    pub epsilon: f64,
}

impl Quadric {
    pub fn new(alpha: Matrix3<f64>, epsilon: f64) -> Result<Self> {
        if (alpha - alpha.transpose()).abs().max() > 1e-14 * alpha.abs().max().max(1.0) {
            return Err(Error::Domain("quadric matrix is not symmetric".into()));
        }
        let q = Self { alpha, epsilon };
        let min = SymmetricEigen::new(q.matrix()).eigenvalues.min();
        if min <= 0.0 {
            return Err(Error::Domain(format!(
                "I + εα is not positive definite (min eigenvalue {min:.3e})"
            )));
        }
        Ok(q)
    }

    /// From (α11, α22, α33, α12, α13, α23).
    pub fn from_vector(v: &Vector6<f64>, epsilon: f64) -> Result<Self> {
        Self::new(
            Matrix3::new(v[0], v[3], v[4], v[3], v[1], v[5], v[4], v[5], v[2]),
            epsilon,
        )
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        let a = &self.alpha;
        Vector6::new(a[(0, 0)], a[(1, 1)], a[(2, 2)], a[(0, 1)], a[(0, 2)], a[(1, 2)])
    }

    /// I + εα.
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::identity() + self.alpha * self.epsilon
    }

    /// F = x̂^T α x̂ on the unit direction.
    fn form(&self, theta: f64, phi: f64) -> f64 {
        let x = Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
        x.dot(&(self.alpha * x))
    }

    /// Radius of the surface in direction (θ, φ).
    pub fn radius(&self, theta: f64, phi: f64) -> f64 {
        (1.0 + self.epsilon * self.form(theta, phi)).powf(-0.5)
    }
}

/// The 6×6 matrix taking (α11, α22, α33, α12, α13, α23) to the real target
/// vector of linear-order coefficients.
pub fn linear_map() -> Matrix6<f64> {
    let (s30, s5) = (30f64.sqrt(), 5f64.sqrt());
    #[rustfmt::skip]
    let a = Matrix6::new(
        -10.0, -10.0, -10.0, 0.0, 0.0, 0.0,
        -2.0 * s30, 2.0 * s30, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, -4.0 * s30, 0.0,
        2.0 * s5, 2.0 * s5, -4.0 * s5, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0, 0.0, 4.0 * s30,
        0.0, 0.0, 0.0, 4.0 * s30, 0.0, 0.0,
    );
    a * (PI.sqrt() / 30.0)
}

/// Pack (g₀₀, g₂ₘ) into the real 6-vector
/// (g₀₀, g₂,₋₂+g₂₂, g₂,₋₁−g₂₁, g₂₀, i(g₂,₋₁+g₂₁), i(g₂,₋₂−g₂₂)).
fn target_vector(g00: Complex64, g2: &[Complex64; 5]) -> [Complex64; 6] {
    let i = Complex64::new(0.0, 1.0);
    let [gm2, gm1, g0, g1, g2p] = *g2;
    [g00, gm2 + g2p, gm1 - g1, g0, i * (gm1 + g1), i * (gm2 - g2p)]
}

fn target_from_spectrum(s: &SpectralCoefficients) -> [Complex64; 6] {
    target_vector(s.get(0, 0), &[-2, -1, 0, 1, 2].map(|m| s.get(2, m)))
}

/// Exact linear-order coefficients (√π/30)[…] of the displayed bracket.
fn linear_coefficients(q: &Quadric, lmax: usize) -> SpectralCoefficients {
    let v = q.to_vector();
    let (a11, a22, a33, a12, a13, a23) = (v[0], v[1], v[2], v[3], v[4], v[5]);
    let (s30, s5) = (30f64.sqrt(), 5f64.sqrt());
    let k = PI.sqrt() / 30.0;
    let c = |re: f64, im: f64| Complex64::new(k * re, k * im);
    let mut out = SpectralCoefficients::zeros(lmax.max(2));
    out.set(0, 0, c(-10.0 * (a11 + a22 + a33), 0.0));
    out.set(2, -2, c(s30 * (a22 - a11), -2.0 * s30 * a12));
    out.set(2, -1, c(-2.0 * s30 * a13, -2.0 * s30 * a23));
    out.set(2, 0, c(2.0 * s5 * (a11 + a22 - 2.0 * a33), 0.0));
    out.set(2, 1, c(2.0 * s30 * a13, -2.0 * s30 * a23));
    out.set(2, 2, c(s30 * (a22 - a11), 2.0 * s30 * a12));
    out
}

/// Projection grid for the remainder; fine enough that aliasing is below round-off.
fn remainder_grid() -> AngularGrid {
    AngularGrid::new(40, 81).expect("positive sizes")
}

/// G/ε with G = (1+εF)^{−1/2} − 1 + εF/2, written without cancellation.
fn remainder_over_eps(q: &Quadric, lmax: usize) -> Result<SpectralCoefficients> {
    let e = q.epsilon;
    if e == 0.0 {
        return Ok(SpectralCoefficients::zeros(lmax));
    }
    let grid = remainder_grid();
    let vals: Vec<Complex64> = grid
        .nodes()
        .map(|(th, ph, _)| {
            let f = q.form(th, ph);
            let u = e * f;
            let s = (1.0 + u).sqrt();
            // (s−1)(s+2)/(2s(1+s)) with s−1 = u/(1+s); the leading u cancels ε.
            Complex64::new(e * f * f * (s + 2.0) / (2.0 * s * (1.0 + s) * (1.0 + s)), 0.0)
        })
        .collect();
    grid.project(&vals, lmax)
}

/// Coefficients g of r = 1 + εg for the quadric, up to degree `lmax`.
pub fn quadric_to_harmonics(q: &Quadric, lmax: usize) -> Result<SpectralCoefficients> {
    Ok(linear_coefficients(q, lmax).add(&remainder_over_eps(q, lmax)?))
}

/// Unique quadric near the unit sphere with the given (g₀₀, g₂ₘ), ordered m = −2..2.
///
/// Chord Newton on A·α + G(α)/ε = target, with the ε = 0 Jacobian A.
pub fn harmonics_to_quadric(g00: f64, g2: &[Complex64; 5], epsilon: f64) -> Result<Quadric> {
    for (k, m) in (-2i64..=2).enumerate() {
        let partner = g2[(2 - m) as usize];
        let d = (partner - g2[k].conj() * parity(m)).norm();
        if d > 1e-12 * (1.0 + g2[k].norm()) {
            return Err(Error::Reality { l: 2, m, mismatch: d });
        }
    }
    let t = target_vector(Complex64::new(g00, 0.0), g2);
    let target = Vector6::from_iterator(t.iter().map(|z| z.re));
    let a = linear_map();
    let lu = a.lu();
    let mut alpha = lu.solve(&target).expect("A is invertible");
    if epsilon == 0.0 {
        return Quadric::from_vector(&alpha, 0.0);
    }
    let mut residual = f64::INFINITY;
    for _ in 0..200 {
        let q = Quadric::from_vector(&alpha, epsilon).map_err(|_| Error::Convergence {
            iterations: 0,
            residual,
        })?;
        let rem = remainder_over_eps(&q, 2)?;
        let r = target_from_spectrum(&rem);
        let f = a * alpha + Vector6::from_iterator(r.iter().map(|z| z.re)) - target;
        residual = f.amax();
        if !residual.is_finite() {
            break;
        }
        if residual < 1e-13 * (1.0 + target.amax()) {
            return Ok(q);
        }
        alpha -= lu.solve(&f).expect("A is invertible");
    }
    Err(Error::Convergence {
        iterations: 200,
        residual,
    })
}

/// Axes, orientation, capacity and (for ε > 0) t₀ of an ellipsoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipsoidGeometry {
    /// Semi-axes, descending.
    pub semi_axes: [f64; 3],
    /// Columns are the principal directions matching `semi_axes`.
    pub orientation: Matrix3<f64>,
    pub capacity: f64,
    pub t0: Option<f64>,
}

impl EllipsoidGeometry {
    /// Axis-aligned ellipsoid with the given semi-axes (any order).
    pub fn from_axes(axes: [f64; 3], epsilon: f64) -> Result<Self> {
        if axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::Domain(format!("semi-axes must be positive, got {axes:?}")));
        }
        let mut order = [0usize, 1, 2];
        order.sort_by(|i, j| axes[*j].total_cmp(&axes[*i]));
        let mut orientation = Matrix3::zeros();
        for (col, &k) in order.iter().enumerate() {
            orientation[(k, col)] = 1.0;
        }
        if orientation.determinant() < 0.0 {
            orientation.column_mut(2).neg_mut();
        }
        let sorted = order.map(|k| axes[k]);
        Self::build(sorted, orientation, epsilon)
    }

    fn build(semi_axes: [f64; 3], orientation: Matrix3<f64>, epsilon: f64) -> Result<Self> {
        let capacity = capacity(semi_axes)?;
        let t0 = if epsilon > 0.0 {
            Some(t0_of(semi_axes, epsilon)?)
        } else {
            None
        };
        Ok(Self {
            semi_axes,
            orientation,
            capacity,
            t0,
        })
    }

    /// Point in the principal frame from world coordinates.
    pub fn to_principal(&self, x: Vector3<f64>) -> Vector3<f64> {
        self.orientation.transpose() * x
    }
}

/// Eigen-decomposition of I + εα; semi-axis = eigenvalue^{−1/2}.
pub fn semi_axes(q: &Quadric) -> Result<EllipsoidGeometry> {
    let eig = SymmetricEigen::new(q.matrix());
    if eig.eigenvalues.min() <= 0.0 {
        return Err(Error::Domain("I + εα is not positive definite".into()));
    }
    let mut order = [0usize, 1, 2];
    // Smallest eigenvalue gives the longest axis.
    order.sort_by(|i, j| eig.eigenvalues[*i].total_cmp(&eig.eigenvalues[*j]));
    let axes = order.map(|k| eig.eigenvalues[k].powf(-0.5));
    let mut orientation = Matrix3::from_columns(&order.map(|k| eig.eigenvectors.column(k).into_owned()));
    if orientation.determinant() < 0.0 {
        orientation.column_mut(2).neg_mut();
    }
    EllipsoidGeometry::build(axes, orientation, q.epsilon)
}

/// Capacity E = 1/R_F(a², b², c²).
pub fn capacity(axes: [f64; 3]) -> Result<f64> {
    if axes.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(Error::Domain(format!("semi-axes must be positive, got {axes:?}")));
    }
    Ok(1.0 / rf(axes[0] * axes[0], axes[1] * axes[1], axes[2] * axes[2])?)
}

/// t₀ = (abc/E − 1)/(ε Y₀₀).
pub fn t0_of(axes: [f64; 3], epsilon: f64) -> Result<f64> {
    if epsilon == 0.0 || !epsilon.is_finite() {
        return Err(Error::Domain("t0 is defined only for ε ≠ 0".into()));
    }
    let e = capacity(axes)?;
    Ok((axes[0] * axes[1] * axes[2] / e - 1.0) / (epsilon * Y00))
}

/// Normal derivative −(E/abc)·d₀ of the conductor potential at a surface point
/// given in the principal frame.
pub fn kellogg_flux(geom: &EllipsoidGeometry, point: [f64; 3]) -> Result<f64> {
    let [a, b, c] = geom.semi_axes;
    let [x, y, z] = point;
    let lhs = x * x / (a * a) + y * y / (b * b) + z * z / (c * c);
    if (lhs - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("point is off the ellipsoid (level {lhs})")));
    }
    let d0 = (x * x / a.powi(4) + y * y / b.powi(4) + z * z / c.powi(4)).powf(-0.5);
    Ok(-geom.capacity / (a * b * c) * d0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_real;

    fn prolate(a: f64, c: f64) -> f64 {
        let e = (c * c - a * a).sqrt();
        e / ((c + e) / a).ln()
    }

    /// (abc/2)∫₀^∞ ds/√∏(axis²+s), with s = (u/(1−u))².
    fn volume_integral(axes: [f64; 3]) -> f64 {
        let [a, b, c] = axes;
        let f = |u: f64| {
            let s = (u / (1.0 - u)).powi(2);
            let ds = 2.0 * u / (1.0 - u).powi(3);
            ds / ((a * a + s) * (b * b + s) * (c * c + s)).sqrt()
        };
        0.5 * a * b * c * integrate_real(f, 0.0, 1.0, 1e-15, 1e-15).unwrap()
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(capacity([1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert!((capacity([2.5; 3]).unwrap() - 2.5).abs() < 1e-15);
        let e = capacity([0.8, 0.8, 1.25]).unwrap();
        assert!((e - prolate(0.8, 1.25)).abs() < 1e-14);
        assert!((2.0 / e - volume_integral([0.8, 0.8, 1.25]) * 2.0 / (0.8 * 0.8 * 1.25)).abs() < 1e-12);
        assert!(capacity([1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn capacity_bounds_and_monotone() {
        let axes = [0.8, 0.9, 1.2];
        let e = capacity(axes).unwrap();
        assert!(0.8 < e && e < 1.2);
        for k in 0..3 {
            let mut b = axes;
            b[k] += 1e-3;
            assert!(capacity(b).unwrap() > e);
        }
    }

    #[test]
    fn single_alpha33_coefficients() {
        let a = 0.7;
        let q = Quadric::new(Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, a), 0.0).unwrap();
        let g = quadric_to_harmonics(&q, 4).unwrap();
        assert!((g.get(0, 0).re + PI.sqrt() / 3.0 * a).abs() < 1e-15);
        assert!((g.get(2, 0).re + 2.0 * 5f64.sqrt() * PI.sqrt() / 15.0 * a).abs() < 1e-15);
    }

    #[test]
    fn isotropic_quadric_is_a_sphere() {
        let (c, e) = (0.8, 0.1);
        let q = Quadric::new(Matrix3::identity() * c, e).unwrap();
        let g = quadric_to_harmonics(&q, 8).unwrap();
        for (idx, v) in g.iter() {
            if idx.l > 0 {
                assert!(v.norm() < 1e-14, "{idx:?} {v}");
            }
        }
        let r = (1.0 + e * c).powf(-0.5);
        assert!((1.0 + e * g.get(0, 0).re * Y00 - r).abs() < 1e-14);
    }

    #[test]
    fn linear_bracket_matches_projection() {
        let q = Quadric::new(Matrix3::new(0.3, -0.2, 0.5, -0.2, -0.4, 0.1, 0.5, 0.1, 0.9), 1e-9).unwrap();
        let grid = remainder_grid();
        let vals: Vec<Complex64> = grid
            .nodes()
            .map(|(th, ph, _)| Complex64::new(-0.5 * q.form(th, ph), 0.0))
            .collect();
        let direct = grid.project(&vals, 4).unwrap();
        let lin = linear_coefficients(&q, 4);
        assert!(direct.sub(&lin).max_abs() < 1e-14);
    }

    #[test]
    fn epsilon_zero_inverse() {
        let g2 = [
            Complex64::new(0.1, 0.2),
            Complex64::new(-0.3, 0.05),
            Complex64::new(0.4, 0.0),
            Complex64::new(0.3, 0.05),
            Complex64::new(0.1, -0.2),
        ];
        let q = harmonics_to_quadric(0.5, &g2, 0.0).unwrap();
        let back = quadric_to_harmonics(&q, 2).unwrap();
        assert!((back.get(0, 0).re - 0.5).abs() < 1e-14);
        for (k, m) in (-2..=2).enumerate() {
            assert!((back.get(2, m) - g2[k]).norm() < 1e-14);
        }
        let zero = harmonics_to_quadric(0.0, &[Complex64::new(0.0, 0.0); 5], 0.05).unwrap();
        assert!(zero.alpha.abs().max() < 1e-15);
    }

    #[test]
    fn reality_is_enforced() {
        let mut g2 = [Complex64::new(0.0, 0.0); 5];
        g2[3] = Complex64::new(0.3, 0.0);
        assert!(matches!(
            harmonics_to_quadric(0.0, &g2, 0.01),
            Err(Error::Reality { .. })
        ));
    }

    #[test]
    fn diagonal_axes() {
        let q = Quadric::new(Matrix3::from_diagonal(&Vector3::new(0.5, -1.0, 2.0)), 0.1).unwrap();
        let g = semi_axes(&q).unwrap();
        let want = [1.05f64.powf(-0.5), 0.9f64.powf(-0.5), 1.2f64.powf(-0.5)];
        let mut w = want;
        w.sort_by(|a, b| b.total_cmp(a));
        for (got, want) in g.semi_axes.iter().zip(w) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!((g.orientation.determinant() - 1.0).abs() < 1e-12);
        let s = semi_axes(&Quadric::new(Matrix3::zeros(), 0.3).unwrap()).unwrap();
        assert_eq!(s.semi_axes, [1.0; 3]);
        assert_eq!(s.t0, Some(0.0));
    }

    #[test]
    fn t0_examples() {
        assert_eq!(t0_of([1.0; 3], 0.1).unwrap(), 0.0);
        let (e, a) = (0.05f64, 0.8f64);
        let r = (1.0 + e * a).powf(-0.5);
        let want = ((1.0 + e * a).recip() - 1.0) / (e * Y00);
        assert!((t0_of([r; 3], e).unwrap() - want).abs() < 1e-12);
        assert!(t0_of([1.0; 3], 0.0).is_err());
    }

    #[test]
    fn kellogg_examples() {
        let r = 1.7;
        let g = EllipsoidGeometry::from_axes([r; 3], 0.1).unwrap();
        let f = kellogg_flux(&g, [0.0, r, 0.0]).unwrap();
        assert!((f + 1.0 / r).abs() < 1e-15);
        let g = EllipsoidGeometry::from_axes([0.8, 0.9, 1.2], 0.1).unwrap();
        // semi_axes are sorted descending: (1.2, 0.9, 0.8).
        let [a, b, c] = g.semi_axes;
        let f = kellogg_flux(&g, [0.0, 0.0, c]).unwrap();
        assert!((f + g.capacity / (a * b)).abs() < 1e-15);
        assert!(kellogg_flux(&g, [0.0, 0.0, 2.0]).is_err());
    }

    #[test]
    fn total_flux_is_minus_four_pi_e() {
        let g = EllipsoidGeometry::from_axes([0.8, 0.9, 1.2], 0.1).unwrap();
        let [a, b, c] = g.semi_axes;
        let grid = AngularGrid::new(48, 96).unwrap();
        let mut total = 0.0;
        for (th, ph, w) in grid.nodes() {
            let (st, ct, sp, cp) = (th.sin(), th.cos(), ph.sin(), ph.cos());
            let p = [a * st * cp, b * st * sp, c * ct];
            let xt = Vector3::new(a * ct * cp, b * ct * sp, -c * st);
            let xp = Vector3::new(-a * st * sp, b * st * cp, 0.0);
            // grid weights carry sinθ dθ dφ; divide it back out.
            let ds = xt.cross(&xp).norm() / st;
            total += w * ds * kellogg_flux(&g, p).unwrap();
        }
        assert!(
            (total + 4.0 * PI * g.capacity).abs() < 1e-10,
            "{}",
            total + 4.0 * PI * g.capacity
        );
    }

    #[test]
    fn t0_identity_from_bijection() {
        let g2 = [
            Complex64::new(0.2, -0.1),
            Complex64::new(0.1, 0.3),
            Complex64::new(-0.5, 0.0),
            Complex64::new(-0.1, 0.3),
            Complex64::new(0.2, 0.1),
        ];
        let e = 0.05;
        let q = harmonics_to_quadric(0.3, &g2, e).unwrap();
        let geo = semi_axes(&q).unwrap();
        let lhs = 1.0 + e * geo.t0.unwrap() * Y00;
        assert!((lhs - volume_integral(geo.semi_axes)).abs() < 1e-12);
    }
}
