//! Invariant suites behind `evap verify`. Each check prints as
//! `CHECK <name> PASS|FAIL measured=<v> tol=<t>`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{Matrix3, Rotation3, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ellipsoid::{
    capacity, harmonics_to_quadric, kellogg_flux, quadric_to_harmonics, semi_axes, EllipsoidGeometry, Quadric, Y00,
};
use crate::error::{Error, Result};
use crate::evolution::{
    evolve_mode_closed_form, shoot_parameters, simulate, weighted_bound_ratio, ForcingFn, Integrator, ModeProblem,
    SimulationOptions,
};
use crate::geometry::Surface;
use crate::harmonics::{
    eval_scalar_harmonic, AngularGrid, Channel, HarmonicIndex, Power, Sampled, SpectralCoefficients,
    VectorSpectralCoefficients,
};
use crate::oracle::{
    convergence_ratio, fd_operator_check, fd_operator_check_extrapolated, fibonacci_sphere, laplace_beltrami_check,
    mfs_conductor, null_quadrature_integral, FdOperator,
};
use crate::quadrature::integrate_real;
use crate::stokes::{
    assemble_velocity, assembled_trace, boundary_residuals, coeffs, momentum_residuals, radial_velocity_trace,
    solve_mode, ForcingJ, ModeForcing,
};
use crate::vapor::{flux_trace, radial_fn, solve_vapor_mode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Harmonics,
    Stokes,
    Vapor,
    Ellipsoid,
    Evolution,
    Oracle,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] = [
        Suite::Harmonics,
        Suite::Stokes,
        Suite::Vapor,
        Suite::Ellipsoid,
        Suite::Evolution,
        Suite::Oracle,
    ];
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "harmonics" => Self::Harmonics,
            "stokes" => Self::Stokes,
            "vapor" => Self::Vapor,
            "ellipsoid" => Self::Ellipsoid,
            "evolution" => Self::Evolution,
            "oracle" => Self::Oracle,
            "all" => Self::All,
            _ => return Err(Error::Domain(format!("unknown suite `{s}`"))),
        })
    }
}

/// Whether `measured` must stay below or reach `tol`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tol: f64,
    pub bound: Bound,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tol,
            bound: Bound::AtMost,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            tol,
            bound: Bound::AtLeast,
        }
    }

    fn from_result(name: &str, tol: f64, r: Result<f64>) -> Self {
        Self::at_most(name, r.unwrap_or(f64::NAN), tol)
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.measured <= self.tol,
            Bound::AtLeast => self.measured >= self.tol,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CHECK {} {} measured={:.3e} tol={:.1e}",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.measured,
            self.tol
        )
    }
}

pub fn run(suite: Suite, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match suite {
        Suite::Harmonics => harmonics(&mut rng),
        Suite::Stokes => stokes(&mut rng),
        Suite::Vapor => vapor(),
        Suite::Ellipsoid => ellipsoid(&mut rng),
        Suite::Evolution => evolution(&mut rng),
        Suite::Oracle => oracle(&mut rng),
        Suite::All => Suite::EACH.iter().flat_map(|s| run(*s, seed)).collect(),
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn harmonics(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();

    let grid = AngularGrid::for_lmax(8);
    let fields: Vec<Vec<Complex64>> = (0..=8usize)
        .flat_map(|l| (-(l as i64)..=l as i64).map(move |m| (l, m)))
        .map(|(l, m)| grid.synthesize(&SpectralCoefficients::delta(8, l, m, c(1.0))).unwrap())
        .collect();
    let mut worst = 0.0f64;
    for (i, a) in fields.iter().enumerate() {
        for (j, b) in fields.iter().enumerate() {
            let prod: Vec<_> = a.iter().zip(b).map(|(x, y)| x * y.conj()).collect();
            let d = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((grid.integrate(&prod) - d).norm());
        }
    }
    out.push(Check::at_most("harmonics.orthonormality", worst, 1e-12));

    let grid = AngularGrid::new(16, 33).unwrap();
    let mut vfields = Vec::new();
    for ch in Channel::ALL {
        for l in 0..=6usize {
            if l == 0 && ch != Channel::V {
                continue;
            }
            for m in -(l as i64)..=l as i64 {
                let mut v = VectorSpectralCoefficients::zeros(6);
                v.set(ch, l, m, c(1.0));
                vfields.push(grid.synthesize_vector(&v).unwrap());
            }
        }
    }
    let mut worst = 0.0f64;
    for (i, a) in vfields.iter().enumerate() {
        for (j, b) in vfields.iter().enumerate().skip(i) {
            let prod: Vec<_> = a
                .iter()
                .zip(b)
                .map(|(x, y)| (0..3).map(|k| x[k] * y[k].conj()).sum())
                .collect();
            let d = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((grid.integrate(&prod) - d).norm());
        }
    }
    out.push(Check::at_most("harmonics.vsh_orthonormality", worst, 1e-10));

    for (l, m) in [(4usize, 3i64), (6, -2)] {
        match convergence_ratio(|h| laplace_beltrami_check(l, m, h), 0.01) {
            Ok((_, _, ratio)) => out.push(Check::at_most(
                format!("harmonics.eigenrelation_order.l{l}m{m}"),
                (ratio - 4.0).abs(),
                0.4,
            )),
            Err(_) => out.push(Check::at_most(
                format!("harmonics.eigenrelation_order.l{l}m{m}"),
                f64::NAN,
                0.4,
            )),
        }
    }

    let f = SpectralCoefficients::random_real(rng, 16, 1.0);
    let grid = AngularGrid::for_lmax(16);
    let vals = grid.synthesize(&f).unwrap();
    let back = grid.project(&vals, 16).unwrap();
    out.push(Check::at_most(
        "harmonics.roundtrip",
        back.sub(&f).max_abs() / f.max_abs(),
        1e-12,
    ));
    let imag = vals.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    out.push(Check::at_most("harmonics.reality", imag, 1e-12));

    let y = |l, m, th, ph| eval_scalar_harmonic(HarmonicIndex::new(l, m).unwrap(), th, ph).unwrap();
    let gap = (y(0, 0, 0.3, 1.0).re - Y00)
        .abs()
        .max((y(1, 1, PI / 2.0, 0.0).re + (3.0 / (8.0 * PI)).sqrt()).abs())
        .max((y(1, 0, 0.7, 0.2).re - (3.0 / (4.0 * PI)).sqrt() * 0.7f64.cos()).abs());
    out.push(Check::at_most("harmonics.closed_forms", gap, 1e-15));
    out
}

fn random_forcing(rng: &mut ChaCha8Rng, lmax: usize) -> ForcingJ {
    let mut j = ForcingJ::default();
    let mut z = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
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

/// max |closed-form trace − assembled trace| and max boundary residual over
/// `draws` random (g, J) and all l ≤ 8.
pub fn trace_identity_random(rng: &mut ChaCha8Rng, draws: usize) -> Result<(f64, f64, f64)> {
    let (mut trace, mut resid, mut mmt) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..draws {
        let j = random_forcing(rng, 8);
        let sigma = rng.random_range(0.2..3.0);
        for l in 0..=8usize {
            for m in -(l as i64)..=l as i64 {
                let g = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let g = if l == 1 { Complex64::new(0.0, 0.0) } else { g };
                let s = solve_mode(l, m, g, &j, sigma)?;
                trace = trace.max((radial_velocity_trace(l, m, g, &j, sigma)? - assembled_trace(&s, &j)).norm());
                for r in boundary_residuals(&s, g, &j, sigma) {
                    resid = resid.max(r.norm());
                }
            }
        }
        let l1 = [-1, 0, 1].map(|m| solve_mode(1, m, Complex64::new(0.0, 0.0), &j, sigma));
        let l1 = [l1[0].clone()?, l1[1].clone()?, l1[2].clone()?];
        for r in momentum_residuals(&l1, &j) {
            mmt = mmt.max(r.norm());
        }
    }
    Ok((trace, resid, mmt))
}

fn stokes(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();
    match trace_identity_random(rng, 100) {
        Ok((t, r, m)) => {
            out.push(Check::at_most("stokes.trace_identity_random", t, 1e-11));
            out.push(Check::at_most("stokes.boundary_residuals", r, 1e-11));
            out.push(Check::at_most("stokes.momentum_constraints", m, 1e-11));
        }
        Err(_) => out.push(Check::at_most("stokes.trace_identity_random", f64::NAN, 1e-11)),
    }
    let want = coeffs::Q::new(-10, 19);
    let l2 = coeffs::trace_assembled(2).map(|t| t[0]);
    let exact =
        l2.is_some_and(|t| t.q == want && t.surd == coeffs::Surd::One) && coeffs::trace_closed_form(2)[0].q == want;
    out.push(Check::at_most(
        "stokes.l2_coefficient_exact",
        if exact { 0.0 } else { 1.0 },
        0.0,
    ));
    let mismatches = (2..=40usize)
        .filter(|&l| {
            coeffs::trace_assembled(l)
                .map(|a| a != coeffs::trace_closed_form(l))
                .unwrap_or(true)
        })
        .count();
    out.push(Check::at_most(
        "stokes.trace_identity_exact_l2_to_40",
        mismatches as f64,
        0.0,
    ));

    let div = (|| -> Result<f64> {
        let mut sols = Vec::new();
        for l in 0..=4usize {
            for m in -(l as i64)..=l as i64 {
                let g = if l == 1 { 0.0 } else { rng.random_range(-1.0..1.0) };
                sols.push(solve_mode(l, m, c(g), &ForcingJ::default(), 1.0)?);
            }
        }
        let u = assemble_velocity(sols)?;
        let mut worst = 0.0f64;
        for r in [0.5, 1.0] {
            for (_, v) in u.divergence(r)? {
                worst = worst.max(v.norm());
            }
        }
        Ok(worst)
    })();
    out.push(Check::from_result("stokes.divergence_free", 1e-10, div));
    out
}

fn vapor() -> Vec<Check> {
    let mut out = Vec::new();
    let res = (|| -> Result<f64> {
        let v = solve_vapor_mode(2, 0, c(0.3), c(0.0), Some(radial_fn(|r| c(r.powi(-6)))))?;
        let p = Sampled {
            f: |r: f64| v.value(r).map(|z| z.re).unwrap_or(f64::NAN),
            h: 3e-3,
        };
        let mut worst = 0.0f64;
        for k in 0..=17 {
            let r = 1.5 + 0.5 * k as f64;
            worst = worst.max((crate::harmonics::radial_operator(2, &p, r)? - r.powi(-6)).abs());
        }
        Ok(worst)
    })();
    out.push(Check::from_result("vapor.ode_residual", 1e-8, res));

    let flux = (|| -> Result<f64> {
        let f7 = radial_fn(|r| Complex64::new(r.powi(-5), r.powi(-7)));
        let v = solve_vapor_mode(1, 0, c(0.7), c(-0.2), Some(f7.clone()))?;
        let d = |h: f64| -> Result<Complex64> { Ok((v.value(1.0 + h)? - v.value(1.0)?) / h) };
        let h = 1e-3;
        let (d1, d2, d4) = (d(h)?, d(h / 2.0)?, d(h / 4.0)?);
        let est = (4.0 * (2.0 * d4 - d2) - (2.0 * d2 - d1)) / 3.0;
        Ok((est - flux_trace(1, 0, c(0.7), c(-0.2), Some(f7))?).norm())
    })();
    out.push(Check::from_result("vapor.flux_richardson", 1e-8, flux));

    let maxwell = solve_vapor_mode(0, 0, c(1.0), c(0.0), None).and_then(|v| Ok((v.flux()? + 1.0).norm()));
    out.push(Check::from_result("vapor.maxwell_background", 0.0, maxwell));
    out
}

fn prolate(a: f64, c: f64) -> f64 {
    let e = (c * c - a * a).sqrt();
    e / ((c + e) / a).ln()
}

/// (𝔞𝔟𝔠/2)∫₀^∞ ds/√∏(axis²+s) with s = (u/(1−u))².
pub fn volume_ratio_quadrature(axes: [f64; 3]) -> Result<f64> {
    let [a, b, cc] = axes;
    let f = |u: f64| {
        if u >= 1.0 {
            return 2.0;
        }
        let s = (u / (1.0 - u)).powi(2);
        let ds = 2.0 * u / (1.0 - u).powi(3);
        ds / ((a * a + s) * (b * b + s) * (cc * cc + s)).sqrt()
    };
    Ok(0.5 * a * b * cc * integrate_real(f, 0.0, 1.0, 1e-15, 1e-15)?)
}

/// Random g₂ₘ with the reality relation.
pub fn random_g2(rng: &mut impl Rng, amp: f64) -> [Complex64; 5] {
    let g20 = c(rng.random_range(-amp..amp));
    let g21 = Complex64::new(rng.random_range(-amp..amp), rng.random_range(-amp..amp));
    let g22 = Complex64::new(rng.random_range(-amp..amp), rng.random_range(-amp..amp));
    [g22.conj(), -g21.conj(), g20, g21, g22]
}

/// Worst coefficient error of quadric_to_harmonics ∘ harmonics_to_quadric.
pub fn bijection_error(g00: f64, g2: &[Complex64; 5], eps: f64) -> Result<f64> {
    let q = harmonics_to_quadric(g00, g2, eps)?;
    let back = quadric_to_harmonics(&q, 2)?;
    let mut worst = (back.get(0, 0) - c(g00)).norm();
    for (k, m) in (-2..=2).enumerate() {
        worst = worst.max((back.get(2, m) - g2[k]).norm());
    }
    Ok(worst)
}

/// |∮ kellogg dS + 4πE| on a (θ, φ) product grid.
pub fn total_flux_gap(g: &EllipsoidGeometry) -> Result<f64> {
    let [a, b, cc] = g.semi_axes;
    let grid = AngularGrid::new(48, 96)?;
    let mut total = 0.0;
    for (th, ph, w) in grid.nodes() {
        let (st, ct, sp, cp) = (th.sin(), th.cos(), ph.sin(), ph.cos());
        let xt = Vector3::new(a * ct * cp, b * ct * sp, -cc * st);
        let xp = Vector3::new(-a * st * sp, b * st * cp, 0.0);
        total += w * xt.cross(&xp).norm() / st * kellogg_flux(g, [a * st * cp, b * st * sp, cc * ct])?;
    }
    Ok((total + 4.0 * PI * g.capacity).abs())
}

fn ellipsoid(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();
    let sphere = [0.5, 1.0, 2.5]
        .iter()
        .map(|r| capacity([*r; 3]).map(|e| (e - r).abs()))
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().fold(0.0, f64::max));
    out.push(Check::from_result("ellipsoid.capacity_sphere", 1e-14, sphere));

    let prol = (1..=20)
        .map(|k| {
            let (a, cc) = (0.8, 0.8 * (1.0 + k as f64 / 20.0));
            capacity([a, a, cc]).map(|e| (e - prolate(a, cc)).abs())
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().fold(0.0, f64::max));
    out.push(Check::from_result("ellipsoid.capacity_prolate", 1e-12, prol));

    let quad = capacity([0.8, 0.9, 1.2]).and_then(|e| {
        let ratio = volume_ratio_quadrature([0.8, 0.9, 1.2])?;
        Ok((0.8 * 0.9 * 1.2 / e - ratio).abs())
    });
    out.push(Check::from_result("ellipsoid.capacity_quadrature", 1e-12, quad));

    let rt = (0..50)
        .map(|_| {
            let g00 = rng.random_range(-1.0..1.0);
            bijection_error(g00, &random_g2(rng, 1.0), 0.05)
        })
        .collect::<Result<Vec<_>>>()
        .map(|v| v.into_iter().fold(0.0, f64::max));
    out.push(Check::from_result("ellipsoid.bijection_roundtrip", 1e-10, rt));

    let t0 = (|| -> Result<f64> {
        let q = harmonics_to_quadric(0.3, &random_g2(rng, 1.0), 0.05)?;
        let g = semi_axes(&q)?;
        let t0 = g.t0.ok_or_else(|| Error::Domain("t0 missing".into()))?;
        Ok((1.0 + 0.05 * t0 * Y00 - volume_ratio_quadrature(g.semi_axes)?).abs())
    })();
    out.push(Check::from_result("ellipsoid.t0_identity", 1e-12, t0));

    let flux = EllipsoidGeometry::from_axes([0.8, 0.9, 1.2], 0.1).and_then(|g| total_flux_gap(&g));
    out.push(Check::from_result("ellipsoid.total_flux", 1e-8, flux));

    let rot = (|| -> Result<f64> {
        let alpha = Matrix3::new(0.3, -0.2, 0.5, -0.2, -0.4, 0.1, 0.5, 0.1, 0.9);
        let base = semi_axes(&Quadric::new(alpha, 0.05)?)?;
        let axis = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.7);
        let r = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), rng.random_range(0.0..PI));
        let m = r.matrix();
        let turned = semi_axes(&Quadric::new(m * alpha * m.transpose(), 0.05)?)?;
        let mut d = (base.capacity - turned.capacity).abs();
        d = d.max((base.t0.unwrap_or(0.0) - turned.t0.unwrap_or(0.0)).abs());
        for k in 0..3 {
            d = d.max((base.semi_axes[k] - turned.semi_axes[k]).abs());
        }
        Ok(d)
    })();
    out.push(Check::from_result("ellipsoid.rotation_invariance", 1e-12, rot));

    let lim = (|| -> Result<f64> {
        let alpha = Matrix3::new(0.3, -0.2, 0.5, -0.2, -0.4, 0.1, 0.5, 0.1, 0.9);
        let lin = quadric_to_harmonics(&Quadric::new(alpha, 0.0)?, 4)?;
        let a = quadric_to_harmonics(&Quadric::new(alpha, 1e-6)?, 4)?;
        let b = quadric_to_harmonics(&Quadric::new(alpha, 1e-8)?, 4)?;
        // g(ε) = lin + εc₁ + O(ε²); eliminate c₁.
        let extrap = b.scaled(c(100.0 / 99.0)).sub(&a.scaled(c(1.0 / 99.0)));
        Ok(extrap.sub(&lin).max_abs())
    })();
    out.push(Check::from_result("ellipsoid.linear_limit", 1e-12, lim));
    out
}

/// Single real mode (l, m) with its order partner.
pub fn single_mode(lmax: usize, l: usize, m: i64, v: f64) -> SpectralCoefficients {
    let mut s = SpectralCoefficients::zeros(lmax);
    s.set(l, m, c(v));
    if m != 0 {
        s.set(l, -m, c(v * crate::harmonics::parity(m)));
    }
    s
}

/// Relative error of the fitted rate over τ ∈ [2, 6] for a single (l, m) mode.
pub fn decay_rate_error(l: usize, m: i64) -> Result<f64> {
    let opts = SimulationOptions {
        tau_max: 6.0,
        dtau: 0.01,
        integrator: Integrator::ClosedForm,
        fit_window: Some((2.0, 6.0)),
    };
    let sim = simulate(&single_mode(l.max(2), l, m, 1.0), 0.01, 1.0, &opts)?;
    let want = if l == 2 { 1.0 } else { l as f64 - 2.0 };
    let fit = sim.rate.ok_or_else(|| Error::Domain("no decay to fit".into()))?;
    Ok((fit.lambda_hat - want).abs() / want)
}

/// Sum of sinusoids with random amplitudes, frequencies and phases.
pub fn random_bounded_forcing(rng: &mut impl Rng) -> ForcingFn {
    let terms: Vec<(f64, f64, f64)> = (0..5)
        .map(|_| {
            (
                rng.random_range(-1.0..1.0),
                rng.random_range(0.5..10.0),
                rng.random_range(0.0..2.0 * PI),
            )
        })
        .collect();
    Arc::new(move |s: f64| c(terms.iter().map(|(a, w, p)| a * (w * s + p).sin()).sum()))
}

fn evolution(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();

    let d2 = (|| -> Result<f64> {
        let g0 = SpectralCoefficients::random_real(rng, 6, 0.3);
        let sim = simulate(&g0, 0.0, 1.0, &SimulationOptions::default())?;
        Ok(sim
            .trajectory
            .samples
            .iter()
            .map(|s| (s.r * s.r - (1.0 - s.t)).abs())
            .fold(0.0, f64::max))
    })();
    out.push(Check::from_result("evolution.d2_law", 1e-14, d2));

    let target = (-20.0f64 / 19.0).exp();
    let ratio = (|| -> Result<f64> {
        let opts = SimulationOptions {
            tau_max: 12.0,
            ..Default::default()
        };
        let sim = simulate(&single_mode(2, 2, 0, 1.0), 0.01, 1.0, &opts)?;
        let lim = sim
            .trajectory
            .limit_estimate(2, 0)
            .ok_or_else(|| Error::Domain("empty run".into()))?;
        Ok((lim.re - target).abs().max(lim.im.abs()))
    })();
    out.push(Check::from_result("evolution.universal_ratio", 1e-9, ratio));
    let shot = shoot_parameters(&single_mode(2, 2, 0, 1.0), 0.01, 1.0).map(|s| (s.g_e2m[2].re - target).abs());
    out.push(Check::from_result("evolution.shot_ratio", 1e-15, shot));

    for (l, m) in [(3usize, 1i64), (4, 0), (5, -2), (2, 1)] {
        out.push(Check::from_result(
            &format!("evolution.decay_rate.l{l}"),
            0.02,
            decay_rate_error(l, m),
        ));
    }

    let rk = (|| -> Result<f64> {
        let mut worst = 0.0f64;
        for sigma in [0.5, 1.0, 2.0] {
            for l in 2..=8usize {
                let g0 = Complex64::new(0.3, -0.4);
                let shift = if l == 2 {
                    g0 * (-2.0 * sigma * crate::evolution::mode_rate(2).b).exp()
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let p = ModeProblem::new(l, sigma, g0 - shift, shift, None);
                for (k, y) in p.rk4(1e-3, 8000)?.iter().enumerate() {
                    worst = worst.max((evolve_mode_closed_form(l, 0, g0, sigma, k as f64 * 1e-3) - y).norm());
                }
            }
        }
        Ok(worst)
    })();
    out.push(Check::from_result("evolution.closed_vs_rk4", 1e-9, rk));

    let shot_modes = (|| -> Result<f64> {
        let g0 = SpectralCoefficients::random_real(rng, 4, 0.5);
        let opts = SimulationOptions {
            integrator: Integrator::Rk4,
            ..Default::default()
        };
        let sim = simulate(&g0, 0.01, 1.0, &opts)?;
        let mut worst = 0.0f64;
        for s in &sim.trajectory.samples {
            for (l, m) in [(0, 0), (1, -1), (1, 0), (1, 1)] {
                worst = worst.max(s.g_t.get(l, m).norm());
            }
        }
        Ok(worst)
    })();
    out.push(Check::from_result("evolution.shot_modes_stay_zero", 1e-12, shot_modes));

    let growth = ModeProblem::new(1, 1.0, c(-1e-6), c(0.0), None)
        .rk4(1e-2, 500)
        .map(|v| v[500].norm())
        .unwrap_or(f64::NAN);
    out.push(Check::at_least("evolution.unshot_growth", growth, 1e-4));

    let bound = (|| -> Result<f64> {
        let mut worst = 0.0f64;
        for l in [3usize, 5, 8] {
            for _ in 0..50 {
                let f = random_bounded_forcing(rng);
                let y0 = rng.random_range(-1.0..1.0);
                let sigma = rng.random_range(0.5..2.0);
                worst = worst.max(weighted_bound_ratio(
                    l,
                    sigma,
                    (l as f64 - 2.0) / 2.0,
                    y0,
                    f,
                    10.0,
                    1e-3,
                )?);
            }
        }
        Ok(worst)
    })();
    out.push(Check::from_result("evolution.weighted_l2_bound", 1.0, bound));

    let trunc = (|| -> Result<f64> {
        let g0 = SpectralCoefficients::random_real(rng, 8, 0.3);
        let full = shoot_parameters(&g0, 0.02, 1.0)?;
        let low = shoot_parameters(&g0.resized(2), 0.02, 1.0)?;
        let mut d = (full.t0 - low.t0).abs();
        for k in 0..3 {
            d = d.max((full.x0[k] - low.x0[k]).abs());
        }
        Ok(d)
    })();
    out.push(Check::from_result("evolution.truncation_independence", 0.0, trunc));
    out
}

/// Random axes in [0.6, 1.2], so axis ratios stay ≤ 2.
pub fn random_axes(rng: &mut impl Rng) -> [f64; 3] {
    [0; 3].map(|_| rng.random_range(0.6..1.2))
}

/// Worst relative gap between the MFS normal derivative and Kellogg's law at
/// 200 surface points.
pub fn kellogg_gap(g: &EllipsoidGeometry) -> Result<f64> {
    let s = mfs_conductor(g, 300, 700)?;
    let [a, b, cc] = g.semi_axes;
    let mut worst = 0.0f64;
    for p in fibonacci_sphere(200) {
        let x = [a * p.x, b * p.y, cc * p.z];
        let k = kellogg_flux(g, x)?;
        worst = worst.max(((s.normal_derivative(x) - k) / k).abs());
    }
    Ok(worst)
}

fn oracle(rng: &mut ChaCha8Rng) -> Vec<Check> {
    let mut out = Vec::new();
    let sphere = EllipsoidGeometry::from_axes([1.3; 3], 0.1)
        .and_then(|g| mfs_conductor(&g, 60, 150))
        .map(|s| (s.capacity() - 1.3).abs());
    out.push(Check::from_result("oracle.mfs_sphere", 1e-10, sphere));

    let reference = EllipsoidGeometry::from_axes([0.8, 0.9, 1.2], 0.1);
    let far = reference
        .clone()
        .and_then(|g| Ok((mfs_conductor(&g, 300, 700)?.far_field_coefficient(50.0) - g.capacity).abs()));
    out.push(Check::from_result("oracle.mfs_far_field", 1e-6, far));

    let random = (0..10)
        .map(|_| {
            let g = EllipsoidGeometry::from_axes(random_axes(rng), 0.1)?;
            Ok((mfs_conductor(&g, 300, 700)?.capacity() - g.capacity).abs())
        })
        .collect::<Result<Vec<f64>>>()
        .map(|v| v.into_iter().fold(0.0, f64::max));
    out.push(Check::from_result("oracle.mfs_random_capacity", 1e-6, random));

    out.push(Check::from_result(
        "oracle.kellogg_normal_derivative",
        1e-4,
        reference.clone().and_then(|g| kellogg_gap(&g)),
    ));

    if let Ok(g) = reference {
        for (name, l, m, centre) in [
            ("oracle.null_quadrature_centered", 3usize, 1i64, [0.0; 3]),
            ("oracle.null_quadrature_offcenter", 4, 2, [0.1, -0.2, 0.3]),
        ] {
            match null_quadrature_integral(&g, HarmonicIndex { l, m }, centre) {
                Ok(q) => out.push(Check::at_most(name, q.value.norm(), 5.0 * q.error_estimate)),
                Err(_) => out.push(Check::at_most(name, f64::NAN, 0.0)),
            }
        }
    }
    let control = Surface::new(0.2, SpectralCoefficients::delta(3, 3, 0, c(1.0)))
        .and_then(|s| null_quadrature_integral(&s, HarmonicIndex { l: 3, m: 0 }, [0.0; 3]));
    match control {
        Ok(q) => out.push(Check::at_least(
            "oracle.null_quadrature_negative_control",
            q.value.norm(),
            10.0 * q.error_estimate,
        )),
        Err(_) => out.push(Check::at_least(
            "oracle.null_quadrature_negative_control",
            f64::NAN,
            0.0,
        )),
    }

    for op in FdOperator::ALL {
        let f = Power::new(1.0, 3.0);
        let order = convergence_ratio(|h| fd_operator_check(op, 3, 1, &f, h), 0.01).map(|(a, _, r)| {
            // Fields that the stencil differentiates exactly have no order to measure.
            if a < 1e-9 {
                0.0
            } else {
                (r - 4.0).abs()
            }
        });
        out.push(Check::from_result(
            &format!("oracle.fd.{}.order", op.name()),
            0.4,
            order,
        ));
        let tol = if op == FdOperator::DivergenceX { 1e-6 } else { 1e-4 };
        out.push(Check::from_result(
            &format!("oracle.fd.{}.extrapolated", op.name()),
            tol,
            fd_operator_check_extrapolated(op, 3, 1, &f, 0.01),
        ));
    }
    out
}
