//! Acceptance criteria 1–11, one PASS/FAIL line each.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use evap_core::ellipsoid::{capacity, harmonics_to_quadric, semi_axes, EllipsoidGeometry, Quadric};
use evap_core::evolution::weighted_bound_ratio;
use evap_core::evolution::{mode_rate, shoot_parameters, simulate, Integrator, ModeProblem, SimulationOptions};
use evap_core::geometry::Surface;
use evap_core::harmonics::{Channel, Power};
use evap_core::oracle::{
    convergence_ratio, fd_operator_check, fd_operator_check_extrapolated, mfs_conductor, null_quadrature_integral,
    FdOperator,
};
use evap_core::stokes::coeffs;
use evap_core::verify::{
    bijection_error, decay_rate_error, kellogg_gap, random_bounded_forcing, random_g2, single_mode, total_flux_gap,
    trace_identity_random, volume_ratio_quadrature,
};
use evap_core::{AngularGrid, Complex64, HarmonicIndex, Result, SpectralCoefficients, VectorSpectralCoefficients};
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn within(limit: Duration, t: Instant) -> (bool, String) {
    let e = t.elapsed();
    (
        e < limit,
        format!("runtime={:.3}s limit={}s", e.as_secs_f64(), limit.as_secs()),
    )
}

fn d2_law() -> Result<Outcome> {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g0 = SpectralCoefficients::random_real(&mut rng, 16, 0.3);
    let sim = simulate(&g0, 0.0, 1.0, &SimulationOptions::default())?;
    let dev = sim
        .trajectory
        .samples
        .iter()
        .map(|s| (s.r * s.r - (1.0 - s.t)).abs())
        .fold(0.0, f64::max);
    let (fast, rt) = within(Duration::from_secs(1), t);
    ok(dev < 1e-14 && fast, format!("max|R²-(1-t)|={dev:.3e} tol=1e-14 {rt}"))
}

fn universal_coefficient() -> Result<Outcome> {
    let target = (-20.0f64 / 19.0).exp();
    let g0 = single_mode(2, 2, 0, 1.0);
    let opts = SimulationOptions {
        tau_max: 12.0,
        ..Default::default()
    };
    let sim = simulate(&g0, 0.01, 1.0, &opts)?;
    let lim = sim.trajectory.limit_estimate(2, 0).expect("nonempty trajectory");
    let gap = (lim - c(target)).norm();
    let raw = sim.trajectory.samples.last().expect("nonempty").g_xi.get(2, 0);
    let shot = shoot_parameters(&g0, 0.01, 1.0)?.g_e2m[2];
    let exact = shot == c(target);
    ok(
        gap < 1e-9 && exact,
        format!(
            "|limit-e^(-20/19)|={gap:.3e} tol=1e-9 raw_at_tau12={:.3e} shot_exact={exact}",
            (raw - c(target)).norm()
        ),
    )
}

fn decay_rates() -> Result<Outcome> {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (l, m) in [(3usize, 1i64), (4, 0), (5, -2), (2, 1)] {
        let e = decay_rate_error(l, m)?;
        parts.push(format!("l{l}={e:.2e}"));
        worst = worst.max(e);
    }
    let (fast, rt) = within(Duration::from_secs(5), t);
    ok(
        worst < 0.02 && fast,
        format!("rel_err {} tol=0.02 {rt}", parts.join(" ")),
    )
}

fn trace_identity() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (trace, resid, _) = trace_identity_random(&mut rng, 100)?;
    let want = coeffs::Q::new(-10, 19);
    let l2 = coeffs::trace_assembled(2).map(|t| t[0]);
    let exact = l2.is_some_and(|t| t.q == want && t.surd == coeffs::Surd::One);
    ok(
        trace < 1e-11 && exact,
        format!("max trace gap={trace:.3e} tol=1e-11 boundary_resid={resid:.3e} l2=-10/19:{exact}"),
    )
}

fn prolate(a: f64, cc: f64) -> f64 {
    let e = (cc * cc - a * a).sqrt();
    e / ((cc + e) / a).ln()
}

fn capacity_checks() -> Result<Outcome> {
    let mut sphere = 0.0f64;
    for r in [0.3, 1.0, 2.7] {
        sphere = sphere.max((capacity([r; 3])? - r).abs());
    }
    let mut prol = 0.0f64;
    for k in 1..=20 {
        let (a, cc) = (0.9, 0.9 * (1.0 + k as f64 / 20.0));
        prol = prol.max((capacity([a, a, cc])? - prolate(a, cc)).abs());
    }
    let g = EllipsoidGeometry::from_axes([0.8, 0.9, 1.2], 0.1)?;
    let far = (mfs_conductor(&g, 300, 700)?.far_field_coefficient(50.0) - g.capacity).abs();
    ok(
        sphere < 1e-14 && prol < 1e-12 && far < 1e-6,
        format!("sphere={sphere:.3e}/1e-14 prolate={prol:.3e}/1e-12 mfs_far_field={far:.3e}/1e-6"),
    )
}

fn kellogg() -> Result<Outcome> {
    let g = EllipsoidGeometry::from_axes([0.8, 0.9, 1.2], 0.1)?;
    let rel = kellogg_gap(&g)?;
    let flux = total_flux_gap(&g)?;
    ok(
        rel < 1e-4 && flux < 1e-8,
        format!("max rel err={rel:.3e}/1e-4 |flux+4πE|={flux:.3e}/1e-8"),
    )
}

fn null_quadrature() -> Result<Outcome> {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let mut a = Matrix3::zeros();
        for i in 0..3 {
            for j in i..3 {
                a[(i, j)] = rng.random_range(-1.0..1.0);
                a[(j, i)] = a[(i, j)];
            }
        }
        let body = semi_axes(&Quadric::new(a, 0.1)?)?;
        let off = [0; 3].map(|_| rng.random_range(-0.2..0.2));
        for centre in [[0.0; 3], off] {
            for l in 3..=4usize {
                for m in -(l as i64)..=l as i64 {
                    let q = null_quadrature_integral(&body, HarmonicIndex::new(l, m)?, centre)?;
                    worst = worst.max(q.value.norm() / q.error_estimate);
                }
            }
        }
    }
    let bump = Surface::new(0.2, SpectralCoefficients::delta(3, 3, 0, c(1.0)))?;
    let q = null_quadrature_integral(&bump, HarmonicIndex::new(3, 0)?, [0.0; 3])?;
    let control = q.value.norm() / q.error_estimate;
    let (fast, rt) = within(Duration::from_secs(60), t);
    ok(
        worst < 5.0 && control > 10.0 && fast,
        format!("worst |I|/est={worst:.3e} tol=5 control |I|/est={control:.3e} need>10 {rt}"),
    )
}

fn bijection() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let mut t0_gap = 0.0f64;
    for _ in 0..50 {
        let g00 = rng.random_range(-1.0..1.0);
        let g2 = random_g2(&mut rng, 1.0);
        worst = worst.max(bijection_error(g00, &g2, 0.05)?);
        let g = semi_axes(&harmonics_to_quadric(g00, &g2, 0.05)?)?;
        let t0 = g.t0.expect("ε > 0");
        let lhs = 1.0 + 0.05 * t0 * evap_core::ellipsoid::Y00;
        t0_gap = t0_gap.max((lhs - volume_ratio_quadrature(g.semi_axes)?).abs());
    }
    ok(
        worst < 1e-10 && t0_gap < 1e-12,
        format!("roundtrip={worst:.3e}/1e-10 t0_identity={t0_gap:.3e}/1e-12"),
    )
}

fn shooting_dichotomy() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let g0 = SpectralCoefficients::random_real(&mut rng, 6, 0.5);
    let opts = SimulationOptions {
        integrator: Integrator::Rk4,
        ..Default::default()
    };
    let sim = simulate(&g0, 0.01, 1.0, &opts)?;
    let mut shot = 0.0f64;
    for s in &sim.trajectory.samples {
        for (l, m) in [(0, 0), (1, -1), (1, 0), (1, 1)] {
            shot = shot.max(s.g_t.get(l, m).norm());
        }
    }
    // b₁₀ + δ leaves −δ in the l = 1 mode.
    let b10 = sim.singularity.b1m[1] + 1e-6;
    let p = ModeProblem::new(1, 1.0, g0.get(1, 0) - b10, c(0.0), None);
    let grown = p.rk4(0.01, 500)?[500].norm();
    ok(
        shot < 1e-12 && grown >= 1e-4,
        format!("shot l<=1 max={shot:.3e}/1e-12 perturbed |g10(5)|={grown:.3e} need>=1e-4"),
    )
}

fn operator_suite() -> Result<Outcome> {
    let f = Power::new(1.0, 3.0);
    let mut order = 0.0f64;
    let mut extrap = 0.0f64;
    for op in FdOperator::ALL {
        for l in 2..=4usize {
            let (a, _, r) = convergence_ratio(|h| fd_operator_check(op, l, 1, &f, h), 0.01)?;
            if a > 1e-9 {
                order = order.max((r - 4.0).abs());
            }
            extrap = extrap.max(fd_operator_check_extrapolated(op, l, 1, &f, 0.01)?);
        }
    }
    for l in [2usize, 5, 8] {
        let (_, _, r) = convergence_ratio(|h| evap_core::oracle::laplace_beltrami_check(l, 1, h), 0.01)?;
        order = order.max((r - 4.0).abs());
    }

    let grid = AngularGrid::for_lmax(8);
    let mut y = Vec::new();
    for l in 0..=8usize {
        for m in -(l as i64)..=l as i64 {
            y.push(grid.synthesize(&SpectralCoefficients::delta(8, l, m, c(1.0)))?);
        }
    }
    let mut ortho_y = 0.0f64;
    for (i, a) in y.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            let p: Vec<_> = a.iter().zip(b).map(|(u, v)| u * v.conj()).collect();
            ortho_y = ortho_y.max((grid.integrate(&p) - c(if i == j { 1.0 } else { 0.0 })).norm());
        }
    }
    let grid = AngularGrid::new(20, 41)?;
    let mut v = Vec::new();
    for ch in Channel::ALL {
        for l in 0..=8usize {
            if l == 0 && ch != Channel::V {
                continue;
            }
            for m in -(l as i64)..=l as i64 {
                let mut s = VectorSpectralCoefficients::zeros(8);
                s.set(ch, l, m, c(1.0));
                v.push(grid.synthesize_vector(&s)?);
            }
        }
    }
    let mut ortho_v = 0.0f64;
    for (i, a) in v.iter().enumerate() {
        for (j, b) in v.iter().enumerate().skip(i) {
            let p: Vec<Complex64> = a
                .iter()
                .zip(b)
                .map(|(x, z)| (0..3).map(|k| x[k] * z[k].conj()).sum())
                .collect();
            ortho_v = ortho_v.max((grid.integrate(&p) - c(if i == j { 1.0 } else { 0.0 })).norm());
        }
    }
    ok(
        order < 0.4 && extrap < 1e-6 && ortho_y < 1e-12 && ortho_v < 1e-10,
        format!(
            "|ratio-4|={order:.3e}/0.4 richardson={extrap:.3e} ortho Y={ortho_y:.3e}/1e-12 VXW={ortho_v:.3e}/1e-10"
        ),
    )
}

fn weighted_bound() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for l in [3usize, 5, 8] {
        let lambda0 = (l as f64 - 2.0) / 2.0;
        assert!(lambda0 < mode_rate(l).lambda);
        for _ in 0..50 {
            let f = random_bounded_forcing(&mut rng);
            let y0 = rng.random_range(-1.0..1.0);
            let sigma = rng.random_range(0.5..2.0);
            worst = worst.max(weighted_bound_ratio(l, sigma, lambda0, y0, f, 10.0, 1e-3)?);
        }
    }
    ok(worst <= 1.0, format!("max lhs/rhs={worst:.4} need<=1"))
}

type Criterion = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 11] = [
        ("d2_law", d2_law),
        ("universal_coefficient", universal_coefficient),
        ("decay_rates", decay_rates),
        ("trace_identity", trace_identity),
        ("capacity", capacity_checks),
        ("kellogg_flux", kellogg),
        ("null_quadrature", null_quadrature),
        ("bijection_roundtrip", bijection),
        ("shooting_dichotomy", shooting_dichotomy),
        ("operator_suite", operator_suite),
        ("weighted_bound", weighted_bound),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("{:>2} {name} {} {detail}", k + 1, if pass { "PASS" } else { "FAIL" });
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
