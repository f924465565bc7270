//! Interior Stokes flow in the unit ball, one harmonic mode at a time.
//!
//! Each mode has the general solution
//!   P = P¹ r^l + H^P,  U^V = V¹ r^{l+1} + H^V,  U^X = X¹ r^l + H^X,
//!   U^W = W¹ r^{l−1} + ½ b P¹ r^{l+1} + H^W,
//! with b = √(l/(2l+1)). The boundary conditions reduce to small linear
//! systems whose right-hand sides J are taken as given data.

pub mod coeffs;
mod profiles;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonics::{Channel, HarmonicIndex, PointBasis, VectorSpectralCoefficients};
pub use profiles::{NonhomogProfiles, RadialFn};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Right-hand sides of one mode's boundary system.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ModeForcing {
    pub div: Complex64,
    pub nsb_v: Complex64,
    pub nsb_x: Complex64,
    pub nsb_w: Complex64,
    /// Contribution of the particular solutions to the r = 1 radial velocity.
    pub u_er: Complex64,
}

/// All boundary right-hand sides. Missing modes are zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ForcingJ {
    pub modes: HashMap<(usize, i64), ModeForcing>,
    pub mmt: [Complex64; 3],
    pub ang_mmt: [Complex64; 3],
}

impl ForcingJ {
    pub fn mode(&self, l: usize, m: i64) -> ModeForcing {
        self.modes.get(&(l, m)).copied().unwrap_or_default()
    }

    pub fn set_mode(&mut self, l: usize, m: i64, f: ModeForcing) {
        self.modes.insert((l, m), f);
    }
}

/// Physical constants of the linearized problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub sigma: f64,
    pub epsilon: f64,
    pub t0: f64,
}

impl PhysicalParams {
    pub fn new(sigma: f64, epsilon: f64, t0: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("surface tension must be positive, got {sigma}")));
        }
        Ok(Self { sigma, epsilon, t0 })
    }
}

/// Constants of the general solution for one (l, m).
#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub l: usize,
    pub m: i64,
    pub p1: Complex64,
    pub v1: Complex64,
    pub x1: Complex64,
    pub w1: Complex64,
    pub profiles: Option<Arc<NonhomogProfiles>>,
}

fn ab(l: usize) -> (f64, f64) {
    let lf = l as f64;
    (((lf + 1.0) / (2.0 * lf + 1.0)).sqrt(), (lf / (2.0 * lf + 1.0)).sqrt())
}

fn dot<const N: usize>(c: [coeffs::Coef; N], x: [Complex64; N]) -> Complex64 {
    c.iter().zip(x).map(|(c, x)| x * c.to_f64()).sum()
}

/// X¹ and W¹ at l = 1 from the momentum and angular-momentum constraints.
fn l1_xw(m: i64, jf: &ModeForcing, j: &ForcingJ) -> (Complex64, Complex64) {
    let [a1, a2, a3] = j.ang_mmt;
    let [m1, m2, m3] = j.mmt;
    let k = 1.25 * (3.0 / PI).sqrt();
    let base = -jf.div * (7.0 / (30.0 * 3f64.sqrt())) - jf.nsb_v / (3.0 * 2f64.sqrt());
    let c = 1.5 / (2.0 * PI).sqrt();
    match m {
        -1 => (I * k * a1 - k * a2, base + c * m1 + I * c * m2),
        0 => (I * 2.5 * (3.0 / (2.0 * PI)).sqrt() * a3, base + 1.5 / PI.sqrt() * m3),
        _ => (-I * k * a1 - k * a2, base - c * m1 + I * c * m2),
    }
}

/// Closed-form constants (P¹, V¹, X¹, W¹) of mode (l, m).
pub fn solve_mode(l: usize, m: i64, g: Complex64, j: &ForcingJ, sigma: f64) -> Result<ModeSolution> {
    HarmonicIndex::new(l, m)?;
    let jf = j.mode(l, m);
    let sg = g * sigma;
    let p1 = dot(coeffs::p1(l), [sg, jf.div, jf.nsb_v]);
    let v1 = dot(coeffs::v1(l), [sg, jf.div, jf.nsb_v]);
    let (x1, w1) = match l {
        0 => (ZERO, ZERO),
        1 => l1_xw(m, &jf, j),
        _ => (
            jf.nsb_x * coeffs::x1(l).to_f64(),
            dot(coeffs::w1(l), [sg, jf.div, jf.nsb_v, jf.nsb_w]),
        ),
    };
    Ok(ModeSolution {
        l,
        m,
        p1,
        v1,
        x1,
        w1,
        profiles: None,
    })
}

/// (U·e_r) at r = 1 in closed form.
pub fn radial_velocity_trace(l: usize, m: i64, g: Complex64, j: &ForcingJ, sigma: f64) -> Result<Complex64> {
    HarmonicIndex::new(l, m)?;
    let jf = j.mode(l, m);
    let body = match l {
        0 => jf.div / 3.0,
        1 => {
            let [m1, m2, m3] = j.mmt;
            let c = 0.5 * (3.0 / (2.0 * PI)).sqrt();
            jf.div / 5.0
                + match m {
                    -1 => c * m1 + I * c * m2,
                    0 => 0.5 * (3.0 / PI).sqrt() * m3,
                    _ => -c * m1 + I * c * m2,
                }
        }
        _ => dot(coeffs::trace_closed_form(l), [g * sigma, jf.div, jf.nsb_v, jf.nsb_w]),
    };
    Ok(body + jf.u_er)
}

/// (U·e_r) at r = 1 assembled from a mode solution: −a V¹ + b (W¹ + ½ b P¹) + J^{U·e_r}.
pub fn assembled_trace(sol: &ModeSolution, j: &ForcingJ) -> Complex64 {
    let (a, b) = ab(sol.l);
    -a * sol.v1 + b * (sol.w1 + 0.5 * b * sol.p1) + j.mode(sol.l, sol.m).u_er
}

/// Residuals of the four boundary equations (div, nsb;V, nsb;X, nsb;W), l ≥ 2.
/// At l ≤ 1 only the first two are meaningful; the others are returned as zero.
pub fn boundary_residuals(sol: &ModeSolution, g: Complex64, j: &ForcingJ, sigma: f64) -> [Complex64; 4] {
    let l = sol.l;
    let lf = l as f64;
    let (a, b) = ab(l);
    let jf = j.mode(l, sol.m);
    let d = 2.0 * lf + 1.0;
    let curv = 1.0 - 0.5 * (lf * lf + lf);
    let div = -a * (2.0 * lf + 3.0) * sol.v1 + (lf / d) * sol.p1 - jf.div;
    let nsbv =
        (2.0 * lf * lf + 3.0 * lf + 2.0) / d * sol.v1 + (lf + 1.0) / d * a * sol.p1 + sigma * a * curv * g - jf.nsb_v;
    if l < 2 {
        return [div, nsbv, ZERO, ZERO];
    }
    let nsbx = (lf - 1.0) * sol.x1 - jf.nsb_x;
    let nsbw = -(lf * (lf + 1.0)).sqrt() / d * (2.0 * lf + 3.0) * sol.v1
        + 2.0 * (lf - 1.0) * sol.w1
        + (2.0 * lf * lf - 1.0) / d * b * sol.p1
        - sigma * b * curv * g
        - jf.nsb_w;
    [div, nsbv, nsbx, nsbw]
}

/// Residuals of the l = 1 momentum (j = 1..3) and angular-momentum (j = 1..3) systems.
pub fn momentum_residuals(l1: &[ModeSolution; 3], j: &ForcingJ) -> [Complex64; 6] {
    let [sm, s0, sp] = l1;
    let (wm, w0, wp) = (sm.w1, s0.w1, sp.w1);
    let (pm, p0, pp) = (sm.p1, s0.p1, sp.p1);
    let r3 = 3f64.sqrt();
    let k = (2.0 * PI / 3.0).sqrt();
    let c = 0.4 * (PI / 3.0).sqrt();
    [
        k * ((wm - wp) / r3 + (pm - pp) / 10.0) - j.mmt[0],
        -I * k * ((wm + wp) / r3 + (pm + pp) / 10.0) - j.mmt[1],
        2.0 * (PI / 3.0).sqrt() * (w0 / r3 + p0 / 10.0) - j.mmt[2],
        -I * c * (sm.x1 - sp.x1) - j.ang_mmt[0],
        -c * (sm.x1 + sp.x1) - j.ang_mmt[1],
        -I * c * 2f64.sqrt() * s0.x1 - j.ang_mmt[2],
    ]
}

/// Rotate (e_r, e_θ, e_φ) components into (x, y, z).
pub fn spherical_to_cartesian<T>(v: [T; 3], theta: f64, phi: f64) -> [T; 3]
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let (st, ct, sp, cp) = (theta.sin(), theta.cos(), phi.sin(), phi.cos());
    [
        v[0] * (st * cp) + v[1] * (ct * cp) + v[2] * (-sp),
        v[0] * (st * sp) + v[1] * (ct * sp) + v[2] * cp,
        v[0] * ct + v[1] * (-st) + v[2] * 0.0,
    ]
}

/// Velocity and pressure built from a set of mode solutions.
#[derive(Debug, Clone)]
pub struct VelocityField {
    lmax: usize,
    modes: Vec<ModeSolution>,
}

/// Collect mode solutions into a field. Duplicate (l, m) entries are rejected.
pub fn assemble_velocity(solutions: Vec<ModeSolution>) -> Result<VelocityField> {
    let mut seen = std::collections::HashSet::new();
    for s in &solutions {
        if !seen.insert((s.l, s.m)) {
            return Err(Error::Domain(format!("duplicate mode ({}, {})", s.l, s.m)));
        }
    }
    let lmax = solutions.iter().map(|s| s.l).max().unwrap_or(0);
    Ok(VelocityField { lmax, modes: solutions })
}

impl VelocityField {
    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn modes(&self) -> &[ModeSolution] {
        &self.modes
    }

    /// Channel profiles (U^V, U^X, U^W) of every mode at radius r.
    pub fn at(&self, r: f64) -> Result<VectorSpectralCoefficients> {
        let mut out = VectorSpectralCoefficients::zeros(self.lmax);
        for s in &self.modes {
            let (uv, ux, uw) = Self::channels(s, r)?;
            out.set(Channel::V, s.l, s.m, uv);
            out.set(Channel::X, s.l, s.m, ux);
            out.set(Channel::W, s.l, s.m, uw);
        }
        Ok(out)
    }

    fn channels(s: &ModeSolution, r: f64) -> Result<(Complex64, Complex64, Complex64)> {
        let ([uv, ux, uw], _) = Self::channel_jet(s, r)?;
        Ok((uv, ux, uw))
    }

    /// Channel values and r-derivatives. Homogeneous parts are exact; the
    /// particular solutions are differentiated with a five-point stencil.
    fn channel_jet(s: &ModeSolution, r: f64) -> Result<([Complex64; 3], [Complex64; 3])> {
        let lf = s.l as f64;
        let (_, b) = ab(s.l);
        let pw = |k: f64| (r.powf(k), if k == 0.0 { 0.0 } else { k * r.powf(k - 1.0) });
        let (v, dv) = pw(lf + 1.0);
        let (x, dx) = pw(lf);
        let mut val = [s.v1 * v, s.x1 * x, ZERO];
        let mut der = [s.v1 * dv, s.x1 * dx, ZERO];
        // r^{l−1} at l = 0 multiplies W¹ = 0; skip it to avoid 0^{−1}.
        if s.l > 0 {
            let (w, dw) = pw(lf - 1.0);
            val[2] = s.w1 * w + 0.5 * b * s.p1 * v;
            der[2] = s.w1 * dw + 0.5 * b * s.p1 * dv;
        }
        if let Some(p) = &s.profiles {
            let h = 1e-3 * r.max(1e-2);
            let eval = |t: f64| -> Result<[Complex64; 3]> {
                if s.l == 0 {
                    Ok([p.hv(t)?, ZERO, ZERO])
                } else {
                    Ok([p.hv(t)?, p.hx(t)?, p.hw(t)?])
                }
            };
            let (m2, m1, z, p1, p2) = (
                eval(r - 2.0 * h)?,
                eval(r - h)?,
                eval(r)?,
                eval(r + h)?,
                eval(r + 2.0 * h)?,
            );
            for k in 0..3 {
                val[k] += z[k];
                der[k] += (m2[k] - 8.0 * m1[k] + 8.0 * p1[k] - p2[k]) / (12.0 * h);
            }
        }
        Ok((val, der))
    }

    /// Velocity at a point in Cartesian components.
    pub fn cartesian(&self, r: f64, theta: f64, phi: f64) -> Result<[Complex64; 3]> {
        let basis = PointBasis::new(self.lmax, theta, phi);
        let mut sph = [ZERO; 3];
        for s in &self.modes {
            let (uv, ux, uw) = Self::channels(s, r)?;
            for (ch, u) in [(Channel::V, uv), (Channel::X, ux), (Channel::W, uw)] {
                let e = basis.vector(ch, s.l, s.m);
                for k in 0..3 {
                    sph[k] += u * e[k];
                }
            }
        }
        Ok(spherical_to_cartesian(sph, theta, phi))
    }

    /// Pressure coefficient of mode (l, m) at radius r.
    pub fn pressure(&self, l: usize, m: i64, r: f64) -> Result<Complex64> {
        let Some(s) = self.modes.iter().find(|s| s.l == l && s.m == m) else {
            return Ok(ZERO);
        };
        let mut p = s.p1 * r.powi(l as i32);
        if let Some(prof) = &s.profiles {
            p += prof.hp(r)?;
        }
        Ok(p)
    }

    /// Y_lm coefficients of div U at radius r, from the channel identities.
    pub fn divergence(&self, r: f64) -> Result<Vec<(HarmonicIndex, Complex64)>> {
        let mut out = Vec::with_capacity(self.modes.len());
        for s in &self.modes {
            let lf = s.l as f64;
            let (a, b) = ab(s.l);
            let ([v, _, w], [dv, _, dw]) = Self::channel_jet(s, r)?;
            let d = -a * (dv + (lf + 2.0) * v / r) + b * (dw - (lf - 1.0) * w / r);
            out.push((HarmonicIndex { l: s.l, m: s.m }, d));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_j(rng: &mut ChaCha8Rng, lmax: usize) -> ForcingJ {
        let mut j = ForcingJ::default();
        let mut z = || c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        for l in 0..=lmax {
            for m in -(l as i64)..=l as i64 {
                j.set_mode(
                    l,
                    m,
                    ModeForcing {
                        div: z(),
                        nsb_v: z(),
                        nsb_x: z(),
                        nsb_w: z(),
                        u_er: z(),
                    },
                );
            }
        }
        j.mmt = [z(), z(), z()];
        j.ang_mmt = [z(), z(), z()];
        j
    }

    #[test]
    fn l0_homogeneous() {
        let s = solve_mode(0, 0, c(2.0, 0.0), &ForcingJ::default(), 1.5).unwrap();
        assert_eq!((s.p1, s.v1, s.x1, s.w1), (c(-3.0, 0.0), ZERO, ZERO, ZERO));
    }

    #[test]
    fn l2_homogeneous_constants() {
        let s = solve_mode(2, 1, c(1.0, 0.0), &ForcingJ::default(), 1.0).unwrap();
        assert!((s.p1.re - 42.0 / 19.0).abs() < 1e-15);
        assert!((s.v1.re - 0.6f64.sqrt() * 4.0 / 19.0).abs() < 1e-15);
        assert!((s.w1.re + 0.4f64.sqrt() * 40.0 / 19.0).abs() < 1e-14);
        let t = radial_velocity_trace(2, 1, c(1.0, 0.0), &ForcingJ::default(), 1.0).unwrap();
        assert!((t.re + 10.0 / 19.0).abs() < 1e-15);
    }

    #[test]
    fn l1_angular_momentum_example() {
        let mut j = ForcingJ::default();
        j.ang_mmt[2] = c(0.7, 0.0);
        let s = solve_mode(1, 0, ZERO, &j, 1.0).unwrap();
        let want = I * 2.5 * (3.0 / (2.0 * PI)).sqrt() * 0.7;
        assert!((s.x1 - want).norm() < 1e-15);
    }

    #[test]
    fn l0_trace_and_l5_coefficient() {
        let mut j = ForcingJ::default();
        j.set_mode(
            0,
            0,
            ModeForcing {
                div: c(0.9, 0.0),
                ..Default::default()
            },
        );
        assert!((radial_velocity_trace(0, 0, c(5.0, 0.0), &j, 1.0).unwrap() - c(0.3, 0.0)).norm() < 1e-16);
        let t = radial_velocity_trace(5, 2, c(1.0, 0.0), &ForcingJ::default(), 1.0).unwrap();
        assert!((t.re + 385.0 / 292.0).abs() < 1e-15);
    }

    #[test]
    fn trace_consistency_and_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let j = random_j(&mut rng, 8);
            let sigma = rng.random_range(0.2..3.0);
            for l in 0..=8usize {
                for m in -(l as i64)..=l as i64 {
                    let g = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    let s = solve_mode(l, m, g, &j, sigma).unwrap();
                    let closed = radial_velocity_trace(l, m, g, &j, sigma).unwrap();
                    assert!((closed - assembled_trace(&s, &j)).norm() < 1e-12, "({l},{m})");
                    for r in boundary_residuals(&s, g, &j, sigma) {
                        assert!(r.norm() < 1e-12, "({l},{m}) residual {r}");
                    }
                }
            }
            let l1 = [-1, 0, 1].map(|m| solve_mode(1, m, ZERO, &j, sigma).unwrap());
            for r in momentum_residuals(&l1, &j) {
                assert!(r.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn l1_constraints_match_volume_integrals() {
        // With no particular solutions the constraint data are exactly the
        // momentum ∫U dV and the moment ∫U×x dV of the assembled field.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut j = random_j(&mut rng, 1);
        for f in j.modes.values_mut() {
            f.u_er = ZERO;
        }
        let sols: Vec<_> = [-1, 0, 1]
            .iter()
            .map(|&m| solve_mode(1, m, ZERO, &j, 1.0).unwrap())
            .collect();
        let u = assemble_velocity(sols).unwrap();
        let grid = crate::harmonics::AngularGrid::for_lmax(6);
        let (rs, rw) = crate::quadrature::gauss_legendre_on(6, 0.0, 1.0);
        let (mut mom, mut ang) = ([ZERO; 3], [ZERO; 3]);
        for (r, wr) in rs.iter().zip(&rw) {
            for (th, ph, w) in grid.nodes() {
                let v = u.cartesian(*r, th, ph).unwrap();
                let x = [r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()];
                let dv = w * wr * r * r;
                let cross = [
                    v[1] * x[2] - v[2] * x[1],
                    v[2] * x[0] - v[0] * x[2],
                    v[0] * x[1] - v[1] * x[0],
                ];
                for k in 0..3 {
                    mom[k] += v[k] * dv;
                    ang[k] += cross[k] * dv;
                }
            }
        }
        for k in 0..3 {
            assert!((mom[k] - j.mmt[k]).norm() < 1e-12, "momentum {k}");
            assert!((ang[k] - j.ang_mmt[k]).norm() < 1e-12, "angular momentum {k}");
        }
    }

    #[test]
    fn rigid_modes_carry_no_normal_velocity() {
        for m in -1..=1 {
            let t = radial_velocity_trace(1, m, c(3.0, -1.0), &ForcingJ::default(), 2.0).unwrap();
            assert_eq!(t, ZERO);
        }
    }

    #[test]
    fn assembled_field_is_divergence_free() {
        let s = solve_mode(2, 0, c(1.0, 0.0), &ForcingJ::default(), 1.0).unwrap();
        let u = assemble_velocity(vec![s.clone()]).unwrap();
        for (_, d) in u.divergence(1.0).unwrap() {
            assert!(d.norm() < 1e-10, "{d}");
        }
        let s0 = solve_mode(
            0,
            0,
            ZERO,
            &{
                let mut j = ForcingJ::default();
                j.set_mode(
                    0,
                    0,
                    ModeForcing {
                        div: c(3.0, 0.0),
                        ..Default::default()
                    },
                );
                j
            },
            1.0,
        )
        .unwrap();
        let u0 = assemble_velocity(vec![s0]).unwrap().at(0.5).unwrap();
        assert!((u0.get(Channel::V, 0, 0) - c(-0.5, 0.0)).norm() < 1e-15);
        assert!(assemble_velocity(vec![s.clone(), s]).is_err());
    }
}
