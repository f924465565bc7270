//! Linearized interface dynamics in rescaled time τ = −ln R.
//!
//! Each mode of g^𝔗 obeys y' + (l−2)y + 2σB(l)e^{−τ}y = h, with the extra
//! e^{−τ}(20σ/19)g^𝔈 coupling at l = 2. The l ≤ 2 unknowns (g^𝔈₀₀, b₁ₘ, g^𝔈₂ₘ)
//! are fixed by shooting so that g^𝔗 decays.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_rational::Ratio;
use serde::Serialize;

use crate::ellipsoid::{harmonics_to_quadric, semi_axes, Y00};
use crate::error::{Error, Result};
use crate::harmonics::{AngularGrid, SpectralCoefficients};
use crate::quadrature::integrate;
use crate::stokes::PhysicalParams;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest |μ·dτ| accepted for RK4 on y' = −μy (the real stability bound is ≈2.785).
pub const RK4_STABILITY_LIMIT: f64 = 2.5;

/// Decay rate and transient coefficient of one degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRate {
    pub l: usize,
    pub lambda: f64,
    pub b: f64,
}

static FLIP_B2: AtomicBool = AtomicBool::new(false);

/// Deliberately break B(2) for the whole process. Negative control for `verify`.
#[doc(hidden)]
pub fn set_b2_sign_flip(on: bool) {
    FLIP_B2.store(on, Ordering::SeqCst);
}

/// B(l) as an exact rational.
pub fn b_exact(l: usize) -> Ratio<i64> {
    if l < 2 {
        return Ratio::from_integer(0);
    }
    let n = l as i64;
    let b = Ratio::new(2 * n * n * n + 5 * n * n + 2 * n, 8 * n * n + 16 * n + 12);
    if l == 2 && FLIP_B2.load(Ordering::SeqCst) {
        -b
    } else {
        b
    }
}

pub fn mode_rate(l: usize) -> ModeRate {
    let b = b_exact(l);
    ModeRate {
        l,
        lambda: l as f64 - 2.0,
        b: *b.numer() as f64 / *b.denom() as f64,
    }
}

/// 2σB(2) = 20σ/19.
fn c2(sigma: f64) -> f64 {
    2.0 * sigma * mode_rate(2).b
}

/// Homogeneous solution with shooting applied: l ≥ 3 plain decay, l = 2 the
/// g^𝔗 residual, l ≤ 1 identically zero.
pub fn evolve_mode_closed_form(l: usize, _m: i64, g0: Complex64, sigma: f64, tau: f64) -> Complex64 {
    match l {
        0 | 1 => ZERO,
        2 => {
            let c = c2(sigma);
            g0 * (c * (-tau).exp_m1()).exp() - g0 * (-c).exp()
        }
        _ => {
            let r = mode_rate(l);
            g0 * (-r.lambda * tau + 2.0 * sigma * r.b * (-tau).exp_m1()).exp()
        }
    }
}

/// Right-hand side h(τ) = 2e^{−τ}J + K + F^{9,10} of one mode.
pub type ForcingFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Forcing slots of one mode: h(τ) and the initial shift F^{11}.
#[derive(Clone, Default)]
pub struct ModeForcing {
    pub rhs: Option<ForcingFn>,
    pub initial: Complex64,
}

/// Per-mode forcing; absent modes are unforced.
#[derive(Clone, Default)]
pub struct EvolutionForcing {
    modes: BTreeMap<(usize, i64), ModeForcing>,
}

impl EvolutionForcing {
    pub fn set(&mut self, l: usize, m: i64, f: ModeForcing) {
        self.modes.insert((l, m), f);
    }

    pub fn get(&self, l: usize, m: i64) -> ModeForcing {
        self.modes.get(&(l, m)).cloned().unwrap_or_default()
    }
}

/// ∫_a^∞ w(s)h(s) ds through s = a + u/(1−u).
fn tail_integral(a: f64, f: impl Fn(f64) -> Complex64) -> Result<Complex64> {
    integrate(
        |u| {
            if u >= 1.0 {
                return ZERO;
            }
            let s = a + u / (1.0 - u);
            let v = f(s) / ((1.0 - u) * (1.0 - u));
            if v.is_finite() {
                v
            } else {
                ZERO
            }
        },
        0.0,
        1.0,
        1e-14,
        1e-12,
    )
}

/// One mode of g^𝔗 as an initial value problem.
#[derive(Clone)]
pub struct ModeProblem {
    pub l: usize,
    pub lambda: f64,
    pub gamma: f64,
    /// g^𝔈 coupling, nonzero only at l = 2.
    pub shift: Complex64,
    pub y0: Complex64,
    pub rhs: Option<ForcingFn>,
}

impl ModeProblem {
    /// Unshot problem starting from y0.
    pub fn new(l: usize, sigma: f64, y0: Complex64, shift: Complex64, rhs: Option<ForcingFn>) -> Self {
        let r = mode_rate(l);
        Self {
            l,
            lambda: r.lambda,
            gamma: 2.0 * sigma * r.b,
            shift: if l == 2 { shift } else { ZERO },
            y0,
            rhs,
        }
    }

    fn derivative(&self, tau: f64, y: Complex64) -> Complex64 {
        let h = self.rhs.as_ref().map_or(ZERO, |f| f(tau));
        -self.lambda * y - self.gamma * (-tau).exp() * (y + self.shift) + h
    }

    /// Stiffest |μ| over τ ≥ 0.
    pub fn stiffness(&self) -> f64 {
        self.lambda.abs() + self.gamma
    }

    /// Variation of constants; forced modes use adaptive quadrature.
    pub fn closed_form(&self, tau: f64) -> Result<Complex64> {
        let (lam, gam) = (self.lambda, self.gamma);
        let prop = |t: f64, s: f64| (-lam * (t - s) + gam * ((-t).exp() - (-s).exp())).exp();
        let z0 = self.y0 + self.shift;
        let z = match &self.rhs {
            None => z0 * prop(tau, 0.0),
            Some(h) if lam < 0.0 => {
                // Growing modes: split at τ so the shot bracket is formed before amplification.
                let full = tail_integral(0.0, |s| h(s) * prop(0.0, s))?;
                let tail = tail_integral(tau, |s| h(s) * prop(tau, s))?;
                (z0 + full) * prop(tau, 0.0) - tail
            }
            Some(h) => z0 * prop(tau, 0.0) + integrate(|s| h(s) * prop(tau, s), 0.0, tau, 1e-15, 1e-13)?,
        };
        Ok(z - self.shift)
    }

    /// Classical RK4 on a uniform grid 0, dτ, …, n·dτ.
    pub fn rk4(&self, dtau: f64, n: usize) -> Result<Vec<Complex64>> {
        let product = self.stiffness() * dtau;
        if product > RK4_STABILITY_LIMIT {
            return Err(Error::StepSize {
                dtau,
                rate: self.stiffness(),
                product,
                limit: RK4_STABILITY_LIMIT,
            });
        }
        let mut out = Vec::with_capacity(n + 1);
        let mut y = self.y0;
        out.push(y);
        for k in 0..n {
            let t = k as f64 * dtau;
            let k1 = self.derivative(t, y);
            let k2 = self.derivative(t + 0.5 * dtau, y + k1 * (0.5 * dtau));
            let k3 = self.derivative(t + 0.5 * dtau, y + k2 * (0.5 * dtau));
            let k4 = self.derivative(t + dtau, y + k3 * dtau);
            y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dtau / 6.0);
            out.push(y);
        }
        Ok(out)
    }
}

/// Output of the shooting step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularityData {
    pub x0: [f64; 3],
    pub t0: f64,
    pub g_e00: f64,
    /// m = −2..2.
    pub g_e2m: [Complex64; 5],
    /// m = −1..1.
    pub b1m: [Complex64; 3],
    pub epsilon: f64,
}

impl SingularityData {
    /// t* = 1 + εt₀/(2√π).
    pub fn extinction_time(&self) -> f64 {
        1.0 + self.epsilon * self.t0 * Y00
    }

    /// g^𝔈 as a spectrum of degree `lmax`.
    pub fn g_e(&self, lmax: usize) -> SpectralCoefficients {
        let mut s = SpectralCoefficients::zeros(lmax.max(2));
        s.set(0, 0, Complex64::new(self.g_e00, 0.0));
        for (k, m) in (-2..=2).enumerate() {
            s.set(2, m, self.g_e2m[k]);
        }
        s.resized(lmax)
    }

    /// key=value block.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "extinction_time={:.16e}", self.extinction_time());
        let _ = writeln!(s, "t0={:.16e}", self.t0);
        let _ = writeln!(s, "x0={:.16e},{:.16e},{:.16e}", self.x0[0], self.x0[1], self.x0[2]);
        let _ = writeln!(s, "gE00={:.16e}", self.g_e00);
        for (k, m) in (-2..=2).enumerate() {
            let v = self.g_e2m[k];
            let _ = writeln!(s, "gE2m[{m}]={:.16e},{:.16e}", v.re, v.im);
        }
        for (k, m) in (-1..=1).enumerate() {
            let v = self.b1m[k];
            let _ = writeln!(s, "b1m[{m}]={:.16e},{:.16e}", v.re, v.im);
        }
        s
    }
}

/// x₀ = √(3/8π)·[[1,0,−1],[−i,0,−i],[0,√2,0]]·(b₁,₋₁, b₁₀, b₁₁).
pub fn x0_from_b(b: &[Complex64; 3]) -> Result<[f64; 3]> {
    let k = (3.0 / (8.0 * PI)).sqrt();
    let i = Complex64::new(0.0, 1.0);
    let x = [(b[0] - b[2]) * k, (-i * b[0] - i * b[2]) * k, b[1] * (k * 2f64.sqrt())];
    let scale = b.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for (axis, v) in x.iter().enumerate() {
        if v.im.abs() > 1e-12 * scale {
            return Err(Error::Reality {
                l: 1,
                m: axis as i64 - 1,
                mismatch: v.im.abs(),
            });
        }
    }
    Ok(x.map(|v| v.re))
}

/// Choose (g^𝔈₀₀, b₁ₘ, g^𝔈₂ₘ) so that the l ≤ 2 modes of g^𝔗 decay, then x₀ and t₀.
pub fn shoot_parameters(g0: &SpectralCoefficients, epsilon: f64, sigma: f64) -> Result<SingularityData> {
    shoot_parameters_forced(g0, epsilon, sigma, &EvolutionForcing::default())
}

pub fn shoot_parameters_forced(
    g0: &SpectralCoefficients,
    epsilon: f64,
    sigma: f64,
    forcing: &EvolutionForcing,
) -> Result<SingularityData> {
    PhysicalParams::new(sigma, epsilon, 0.0)?;
    g0.check_reality(1e-12)?;
    let c = c2(sigma);
    let shot = |l: usize, m: i64, weight: &dyn Fn(f64) -> f64, damp: f64| -> Result<Complex64> {
        let f = forcing.get(l, m);
        let base = (g0.get(l, m) + f.initial) * damp;
        match f.rhs {
            None => Ok(base),
            Some(h) => Ok(base + tail_integral(0.0, |s| h(s) * weight(s))?),
        }
    };
    let g_e00 = shot(0, 0, &|s| (-2.0 * s).exp(), 1.0)?.re;
    let mut b1m = [ZERO; 3];
    for (k, m) in (-1..=1).enumerate() {
        b1m[k] = shot(1, m, &|s| (-s).exp(), 1.0)?;
    }
    let mut g_e2m = [ZERO; 5];
    for (k, m) in (-2..=2).enumerate() {
        g_e2m[k] = shot(2, m, &|s| (-c * (-s).exp()).exp(), (-c).exp())?;
    }
    let x0 = x0_from_b(&b1m)?;
    let t0 = if epsilon == 0.0 {
        // ε → 0 limit of (abc/E − 1)/(εY₀₀).
        2.0 * g_e00
    } else {
        let q = harmonics_to_quadric(g_e00, &g_e2m, epsilon)?;
        semi_axes(&q)?.t0.expect("ε > 0")
    };
    Ok(SingularityData {
        x0,
        t0,
        g_e00,
        g_e2m,
        b1m,
        epsilon,
    })
}

/// (t, R) at rescaled time τ.
pub fn time_map(tau: f64, epsilon: f64, t0: f64) -> Result<(f64, f64)> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::Domain(format!("τ must be nonnegative, got {tau}")));
    }
    let t_star = 1.0 + epsilon * t0 * Y00;
    Ok((-t_star * (-2.0 * tau).exp_m1(), (-tau).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[default]
    ClosedForm,
    Rk4,
}

impl FromStr for Integrator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed_form" | "closed-form" => Ok(Self::ClosedForm),
            "rk4" => Ok(Self::Rk4),
            _ => Err(Error::Domain(format!("unknown integrator `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOptions {
    pub tau_max: f64,
    pub dtau: f64,
    pub integrator: Integrator,
    /// Fit window for λ̂; default is the final half of the run.
    pub fit_window: Option<(f64, f64)>,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            tau_max: 8.0,
            dtau: 0.01,
            integrator: Integrator::ClosedForm,
            fit_window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub tau: f64,
    pub t: f64,
    pub r: f64,
    pub g_t: SpectralCoefficients,
    pub g_xi: SpectralCoefficients,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub params: PhysicalParams,
}

impl Trajectory {
    pub const CSV_HEADER: &'static str = "tau,t,R,l,m,re_gT,im_gT,re_gxi,im_gxi";

    /// Long-format CSV, one row per sample per (l, m).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for s in &self.samples {
            for ((idx, gt), (_, gx)) in s.g_t.iter().zip(s.g_xi.iter()) {
                writeln!(
                    w,
                    "{:.16e},{:.16e},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                    s.tau, s.t, s.r, idx.l, idx.m, gt.re, gt.im, gx.re, gx.im
                )?;
            }
        }
        Ok(())
    }

    /// lim g^ξ_lm estimated from the trajectory tail: with samples at τ₁ < τ₂
    /// about one unit apart, (g(τ₂) − e^{−(τ₂−τ₁)}g(τ₁))/(1 − e^{−(τ₂−τ₁)})
    /// cancels the leading e^{−τ} transient.
    pub fn limit_estimate(&self, l: usize, m: i64) -> Option<Complex64> {
        let n = self.samples.len();
        if n < 2 {
            return None;
        }
        let last = &self.samples[n - 1];
        let back = self
            .samples
            .iter()
            .rev()
            .find(|s| last.tau - s.tau >= 1.0 - 1e-9)
            .unwrap_or(&self.samples[0]);
        let q = (back.tau - last.tau).exp();
        Some((last.g_xi.get(l, m) - back.g_xi.get(l, m) * q) / (1.0 - q))
    }

    /// sup over the sphere of |g^ξ − g^𝔈| = |g^𝔗| at each sample.
    pub fn sup_residuals(&self) -> Result<Vec<f64>> {
        let lmax = self.samples.first().map_or(0, |s| s.g_t.lmax());
        let grid = AngularGrid::new(2 * lmax + 2, 4 * lmax + 2)?;
        self.samples
            .iter()
            .map(|s| Ok(grid.synthesize(&s.g_t)?.iter().map(|v| v.norm()).fold(0.0, f64::max)))
            .collect()
    }
}

/// Least-squares decay rate of log y over samples with τ in [a, b].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    /// Fit of log y against (1, τ, e^{−τ}); the e^{−τ} column absorbs the transient.
    pub lambda_hat: f64,
    /// Plain log-linear slope.
    pub lambda_plain: f64,
    pub window: (f64, f64),
}

pub fn fit_rate(taus: &[f64], values: &[f64], window: (f64, f64)) -> Option<RateFit> {
    let pts: Vec<(f64, f64)> = taus
        .iter()
        .zip(values)
        .filter(|(t, v)| **t >= window.0 - 1e-12 && **t <= window.1 + 1e-12 && **v > 0.0 && v.is_finite())
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 4 {
        return None;
    }
    let solve = |cols: usize| -> Option<DVector<f64>> {
        let x = DMatrix::from_fn(pts.len(), cols, |i, j| match j {
            0 => 1.0,
            1 => pts[i].0,
            _ => (-pts[i].0).exp(),
        });
        let y = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
        x.svd(true, true).solve(&y, 1e-14).ok()
    };
    Some(RateFit {
        lambda_hat: -solve(3)?[1],
        lambda_plain: -solve(2)?[1],
        window,
    })
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub trajectory: Trajectory,
    pub singularity: SingularityData,
    /// None when g^𝔗 vanishes identically.
    pub rate: Option<RateFit>,
}

pub fn simulate(g0: &SpectralCoefficients, epsilon: f64, sigma: f64, opts: &SimulationOptions) -> Result<Simulation> {
    simulate_forced(g0, epsilon, sigma, opts, &EvolutionForcing::default())
}

pub fn simulate_forced(
    g0: &SpectralCoefficients,
    epsilon: f64,
    sigma: f64,
    opts: &SimulationOptions,
    forcing: &EvolutionForcing,
) -> Result<Simulation> {
    if !(opts.dtau > 0.0 && opts.tau_max > 0.0 && opts.tau_max.is_finite()) {
        return Err(Error::Domain("τmax and dτ must be positive".into()));
    }
    let sing = shoot_parameters_forced(g0, epsilon, sigma, forcing)?;
    let params = PhysicalParams::new(sigma, epsilon, sing.t0)?;
    let n = (opts.tau_max / opts.dtau).round() as usize;
    let taus: Vec<f64> = (0..=n).map(|k| k as f64 * opts.dtau).collect();
    let lmax = g0.lmax();

    let mut columns: Vec<Vec<Complex64>> = Vec::new();
    for (idx, g) in g0.iter() {
        let f = forcing.get(idx.l, idx.m);
        let shift = if idx.l == 2 {
            sing.g_e2m[(idx.m + 2) as usize]
        } else {
            ZERO
        };
        // Initial values from the shot unknowns.
        let y0 = match idx.l {
            0 => g + f.initial - sing.g_e00,
            1 => g + f.initial - sing.b1m[(idx.m + 1) as usize],
            2 => g + f.initial - shift,
            _ => g + f.initial,
        };
        let problem = ModeProblem::new(idx.l, sigma, y0, shift, f.rhs.clone());
        let col = match opts.integrator {
            _ if problem.rhs.is_none() && y0 == ZERO && shift == ZERO => vec![ZERO; n + 1],
            Integrator::ClosedForm if problem.rhs.is_none() && idx.l >= 2 => taus
                .iter()
                .map(|&t| evolve_mode_closed_form(idx.l, idx.m, g, sigma, t))
                .collect(),
            Integrator::ClosedForm => taus.iter().map(|&t| problem.closed_form(t)).collect::<Result<_>>()?,
            Integrator::Rk4 => problem.rk4(opts.dtau, n)?,
        };
        columns.push(col);
    }

    let g_e = sing.g_e(lmax);
    let mut samples = Vec::with_capacity(n + 1);
    for (k, &tau) in taus.iter().enumerate() {
        let (t, r) = time_map(tau, epsilon, sing.t0)?;
        let mut g_t = SpectralCoefficients::zeros(lmax);
        for ((idx, _), col) in g0.iter().zip(&columns) {
            g_t.set(idx.l, idx.m, col[k]);
        }
        let g_xi = g_t.add(&g_e);
        samples.push(Sample { tau, t, r, g_t, g_xi });
    }
    let trajectory = Trajectory { samples, params };
    let window = opts.fit_window.unwrap_or((0.5 * opts.tau_max, opts.tau_max));
    let sups = trajectory.sup_residuals()?;
    let rate = fit_rate(&taus, &sups, window);
    Ok(Simulation {
        trajectory,
        singularity: sing,
        rate,
    })
}

/// Worst ratio of the two sides of the weighted L² bound
/// ∫e^{2λ₀s}y² ≤ 2/(λ−λ₀)²∫e^{2λ₀s}f² + y₀²/(λ−λ₀), trapezoid in s.
pub fn weighted_bound_ratio(
    l: usize,
    sigma: f64,
    lambda0: f64,
    y0: f64,
    f: ForcingFn,
    tau_max: f64,
    dtau: f64,
) -> Result<f64> {
    let rate = mode_rate(l);
    if !(0.0 < lambda0 && lambda0 < rate.lambda) {
        return Err(Error::Domain(format!("need 0 < λ₀ < λ = {}", rate.lambda)));
    }
    let n = (tau_max / dtau).round() as usize;
    let problem = ModeProblem::new(l, sigma, Complex64::new(y0, 0.0), ZERO, Some(f.clone()));
    let ys = problem.rk4(dtau, n)?;
    let gap = rate.lambda - lambda0;
    let (mut lhs, mut rhs_f) = (0.0, 0.0);
    let mut worst = 0.0f64;
    let mut prev: Option<(f64, f64)> = None;
    for (k, y) in ys.iter().enumerate() {
        let s = k as f64 * dtau;
        let w = (2.0 * lambda0 * s).exp();
        let cur = (w * y.norm_sqr(), w * f(s).norm_sqr());
        if let Some(p) = prev {
            lhs += 0.5 * dtau * (p.0 + cur.0);
            rhs_f += 0.5 * dtau * (p.1 + cur.1);
            let rhs = 2.0 / (gap * gap) * rhs_f + y0 * y0 / gap;
            worst = worst.max(lhs / rhs);
        }
        prev = Some(cur);
    }
    Ok(worst)
}
