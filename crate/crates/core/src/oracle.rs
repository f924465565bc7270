//! Independent numerical verifiers: a method-of-fundamental-solutions
//! conductor, null-quadrature integrals, and finite-difference operator checks.
//! None of these reuse the spectral solvers they test.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;

use crate::ellipsoid::EllipsoidGeometry;
use crate::error::{Error, Result};
use crate::geometry::Surface;
use crate::harmonics::{
    divergence_mode, gradient_mode, radial::laplacian_degree, radial_operator, AngularGrid, Channel, HarmonicIndex,
    PointBasis, RadialProfile,
};
use crate::stokes::spherical_to_cartesian;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Shortest semi-axis of the confocal source ellipsoid, relative to the body's.
///
/// The exterior potential continues analytically down to the focal ellipse,
/// so confocal sources converge far faster than a scaled copy.
pub const SOURCE_RETREAT: f64 = 0.3;

/// Relative singular-value cutoff of the least-squares fit.
pub const SVD_CUTOFF: f64 = 1e-12;

/// Quasi-uniform points on the unit sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<Vector3<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let s = (1.0 - z * z).sqrt();
            let p = golden * i as f64;
            Vector3::new(s * p.cos(), s * p.sin(), z)
        })
        .collect()
}

/// Sources, fitted strengths and collocation points, all in the principal frame.
#[derive(Debug, Clone)]
pub struct SourceCloud {
    pub sources: Vec<Vector3<f64>>,
    pub strengths: Vec<f64>,
    pub collocation: Vec<Vector3<f64>>,
}

/// Exterior conductor potential φ ≈ Σ w_k/|x − s_k| with φ = 1 on the surface.
#[derive(Debug, Clone)]
pub struct MfsSolution {
    pub geometry: EllipsoidGeometry,
    pub cloud: SourceCloud,
    /// max |φ − 1| on points not used in the fit.
    pub boundary_residual: f64,
    /// Singular values discarded by the cutoff.
    pub truncated: usize,
    pub warning: Option<String>,
}

/// Confocal ellipsoid whose shortest semi-axis is `retreat` times the body's.
pub fn source_axes(axes: [f64; 3], retreat: f64) -> [f64; 3] {
    let c = axes.iter().copied().fold(f64::INFINITY, f64::min);
    let s = c * c * (1.0 - retreat * retreat);
    axes.map(|a| (a * a - s).sqrt())
}

fn scale_to(axes: [f64; 3], k: f64, p: &Vector3<f64>) -> Vector3<f64> {
    Vector3::new(k * axes[0] * p.x, k * axes[1] * p.y, k * axes[2] * p.z)
}

pub fn mfs_conductor(geometry: &EllipsoidGeometry, n_sources: usize, n_collocation: usize) -> Result<MfsSolution> {
    mfs_conductor_with_retreat(geometry, n_sources, n_collocation, SOURCE_RETREAT)
}

/// As [`mfs_conductor`] with a chosen confocal source surface.
pub fn mfs_conductor_with_retreat(
    geometry: &EllipsoidGeometry,
    n_sources: usize,
    n_collocation: usize,
    retreat: f64,
) -> Result<MfsSolution> {
    if !(0.0 < retreat && retreat < 1.0) {
        return Err(Error::Domain(format!(
            "source retreat must lie in (0, 1), got {retreat}"
        )));
    }
    if n_sources < 2 || n_collocation < 2 * n_sources {
        return Err(Error::Domain(format!(
            "need at least twice as many collocation points as sources ({n_collocation} < 2·{n_sources})"
        )));
    }
    let axes = geometry.semi_axes;
    // The center plus a retreated copy of the surface.
    let mut sources = vec![Vector3::zeros()];
    sources.extend(
        fibonacci_sphere(n_sources - 1)
            .iter()
            .map(|p| scale_to(source_axes(axes, retreat), 1.0, p)),
    );
    let collocation: Vec<_> = fibonacci_sphere(n_collocation)
        .iter()
        .map(|p| scale_to(axes, 1.0, p))
        .collect();
    let a = DMatrix::from_fn(n_collocation, n_sources, |i, j| {
        1.0 / (collocation[i] - sources[j]).norm()
    });
    let svd = a.svd(true, true);
    let cutoff = SVD_CUTOFF * svd.singular_values.max();
    let truncated = svd.singular_values.iter().filter(|s| **s <= cutoff).count();
    let w = svd
        .solve(&DVector::from_element(n_collocation, 1.0), cutoff)
        .map_err(|e| Error::Numerical {
            msg: format!("MFS least squares failed: {e}"),
            residual: f64::NAN,
        })?;
    let mut sol = MfsSolution {
        geometry: *geometry,
        cloud: SourceCloud {
            sources,
            strengths: w.iter().copied().collect(),
            collocation,
        },
        boundary_residual: 0.0,
        truncated,
        warning: None,
    };
    // Offset Fibonacci set so the check points differ from the fit points.
    let check = fibonacci_sphere(n_collocation + 7);
    sol.boundary_residual = check
        .iter()
        .map(|p| (sol.potential_principal(&scale_to(axes, 1.0, p)) - 1.0).abs())
        .fold(0.0, f64::max);
    if sol.boundary_residual > 1e-6 {
        sol.warning = Some(format!(
            "ill-conditioned fit: boundary residual {:.3e} with {truncated} singular values truncated",
            sol.boundary_residual
        ));
    }
    Ok(sol)
}

impl MfsSolution {
    fn potential_principal(&self, x: &Vector3<f64>) -> f64 {
        self.cloud
            .sources
            .iter()
            .zip(&self.cloud.strengths)
            .map(|(s, w)| w / (x - s).norm())
            .sum()
    }

    fn gradient_principal(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.cloud
            .sources
            .iter()
            .zip(&self.cloud.strengths)
            .map(|(s, w)| {
                let d = x - s;
                -d * (w / d.norm().powi(3))
            })
            .sum()
    }

    /// φ at a world-frame point.
    pub fn potential(&self, x: [f64; 3]) -> f64 {
        self.potential_principal(&self.geometry.to_principal(Vector3::from(x)))
    }

    pub fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        let g = self.gradient_principal(&self.geometry.to_principal(Vector3::from(x)));
        (self.geometry.orientation * g).into()
    }

    /// ∂φ/∂n along the outward normal at a principal-frame surface point.
    pub fn normal_derivative(&self, p: [f64; 3]) -> f64 {
        let [a, b, c] = self.geometry.semi_axes;
        let x = Vector3::from(p);
        let n = Vector3::new(x.x / (a * a), x.y / (b * b), x.z / (c * c)).normalize();
        self.gradient_principal(&x).dot(&n)
    }

    /// Σ w_k, the exact 1/r coefficient of the source representation.
    pub fn capacity(&self) -> f64 {
        self.cloud.strengths.iter().sum()
    }

    /// Spherical mean of r·φ on the sphere of radius r.
    pub fn far_field_coefficient(&self, r: f64) -> f64 {
        let grid = AngularGrid::new(24, 48).expect("positive sizes");
        grid.nodes()
            .map(|(th, ph, w)| {
                let x = Vector3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()) * r;
                w * r * self.potential_principal(&x)
            })
            .sum::<f64>()
            / (4.0 * PI)
    }
}

/// A body whose exterior is swept by rays from an interior center.
pub trait RayBody {
    /// Distance from `center` to the boundary along unit `dir` (world frame).
    fn exit_distance(&self, center: &Vector3<f64>, dir: &Vector3<f64>) -> Result<f64>;
    fn max_extent(&self) -> f64;
}

impl RayBody for EllipsoidGeometry {
    fn exit_distance(&self, center: &Vector3<f64>, dir: &Vector3<f64>) -> Result<f64> {
        let (c, d) = (self.to_principal(*center), self.to_principal(*dir));
        let inv = Vector3::from(self.semi_axes.map(|a| 1.0 / (a * a)));
        let qa = d.component_mul(&inv).dot(&d);
        let qb = d.component_mul(&inv).dot(&c);
        let qc = c.component_mul(&inv).dot(&c) - 1.0;
        if qc >= 0.0 {
            return Err(Error::Domain("center is not inside the ellipsoid".into()));
        }
        // Positive root of qa ρ² + 2qb ρ + qc, in the cancellation-free form.
        Ok(-qc / (qb + (qb * qb - qa * qc).sqrt()))
    }

    fn max_extent(&self) -> f64 {
        self.semi_axes[0]
    }
}

impl RayBody for Surface {
    fn exit_distance(&self, center: &Vector3<f64>, dir: &Vector3<f64>) -> Result<f64> {
        let outside = |rho: f64| {
            let p = center + dir * rho;
            let r = p.norm();
            r > self.radius((p.z / r).clamp(-1.0, 1.0).acos(), p.y.atan2(p.x))
        };
        if outside(0.0) {
            return Err(Error::Domain("center is not inside the surface".into()));
        }
        let (mut lo, mut hi) = (0.0, 2.0 * self.max_extent() + center.norm());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if outside(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-16 * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    fn max_extent(&self) -> f64 {
        1.0 + self.epsilon().abs() * self.sup_g()
    }
}

/// Value of the exterior integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullQuadrature {
    pub value: Complex64,
    pub error_estimate: f64,
    /// Angular resolution (θ nodes) at which the estimate was met.
    pub n_theta: usize,
    pub r_cut: f64,
}

/// ∫ |x−c|^{−(l+1)} Y_lm(x̂−c) dV over the exterior of `body` inside the ball |x − c| < R_cut.
///
/// Rays from c are integrated exactly in ρ; the angular integral uses
/// Gauss–Legendre × uniform φ, doubled until two levels agree. The region
/// beyond R_cut integrates to zero by angular orthogonality, so its only
/// contribution to the estimate is the round-off of that zero.
pub fn null_quadrature_integral(body: &impl RayBody, idx: HarmonicIndex, center: [f64; 3]) -> Result<NullQuadrature> {
    if idx.l < 3 {
        return Err(Error::Domain(format!(
            "multipole of degree {} is not integrable over an exterior domain (need l ≥ 3)",
            idx.l
        )));
    }
    let c = Vector3::from(center);
    let r_cut = 20.0 * body.max_extent();
    let p = 2.0 - idx.l as f64;
    let level = |n: usize| -> Result<(Complex64, Complex64, f64)> {
        let grid = AngularGrid::new(n, 2 * n)?;
        let (mut sum, mut tail, mut abs) = (ZERO, ZERO, 0.0);
        for (th, ph, w) in grid.nodes() {
            let dir = Vector3::new(th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos());
            let rho = body.exit_distance(&c, &dir)?;
            let y = PointBasis::new(idx.l, th, ph).y(idx.l, idx.m);
            let radial = (rho.powf(p) - r_cut.powf(p)) / (idx.l as f64 - 2.0);
            sum += y * (w * radial);
            tail += y * (w * r_cut.powf(p) / (idx.l as f64 - 2.0));
            abs += w * y.norm() * rho.powf(p) / (idx.l as f64 - 2.0);
        }
        Ok((sum, tail, abs))
    };
    let mut n = 16;
    let (mut prev, _, _) = level(n)?;
    loop {
        let (cur, tail, abs) = level(2 * n)?;
        let roundoff = 64.0 * f64::EPSILON * abs;
        let est = (cur - prev).norm() + tail.norm() + roundoff;
        if (cur - prev).norm() <= roundoff.max(1e-14 * abs) || 2 * n >= 512 {
            return Ok(NullQuadrature {
                value: cur,
                error_estimate: est,
                n_theta: 2 * n,
                r_cut,
            });
        }
        prev = cur;
        n *= 2;
    }
}

/// Operator identities of the vector calculus on F(r)·(Y | V | X | W).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdOperator {
    LaplacianV,
    LaplacianX,
    LaplacianW,
    Gradient,
    DivergenceV,
    DivergenceX,
    DivergenceW,
}

impl FdOperator {
    pub const ALL: [FdOperator; 7] = [
        Self::LaplacianV,
        Self::LaplacianX,
        Self::LaplacianW,
        Self::Gradient,
        Self::DivergenceV,
        Self::DivergenceX,
        Self::DivergenceW,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::LaplacianV => "laplacian_V",
            Self::LaplacianX => "laplacian_X",
            Self::LaplacianW => "laplacian_W",
            Self::Gradient => "gradient",
            Self::DivergenceV => "divergence_V",
            Self::DivergenceX => "divergence_X",
            Self::DivergenceW => "divergence_W",
        }
    }

    fn channel(self) -> Option<Channel> {
        match self {
            Self::LaplacianV | Self::DivergenceV => Some(Channel::V),
            Self::LaplacianX | Self::DivergenceX => Some(Channel::X),
            Self::LaplacianW | Self::DivergenceW => Some(Channel::W),
            Self::Gradient => None,
        }
    }
}

fn polar(x: &Vector3<f64>) -> (f64, f64, f64) {
    let r = x.norm();
    (r, (x.z / r).clamp(-1.0, 1.0).acos(), x.y.atan2(x.x))
}

/// Test points in the shell 0.3 ≤ r ≤ 0.9.
fn shell_points() -> Vec<Vector3<f64>> {
    let dirs = fibonacci_sphere(26);
    [0.3, 0.5, 0.7, 0.9]
        .iter()
        .flat_map(|r| dirs.iter().map(move |d| d * *r))
        .collect()
}

/// Finite-difference and exact values of the operator, flattened over test
/// points and Cartesian components.
fn fd_pairs(op: FdOperator, l: usize, m: i64, f: &impl RadialProfile, h: f64) -> Result<Vec<(Complex64, Complex64)>> {
    HarmonicIndex::new(l, m)?;
    let fval = |r: f64| f.jet(r).value;
    let scalar = |x: &Vector3<f64>| {
        let (r, th, ph) = polar(x);
        PointBasis::new(l, th, ph).y(l, m) * fval(r)
    };
    let vector = |ch: Channel, x: &Vector3<f64>| -> [Complex64; 3] {
        let (r, th, ph) = polar(x);
        let v = PointBasis::new(l, th, ph).vector(ch, l, m).map(|c| c * fval(r));
        spherical_to_cartesian(v, th, ph)
    };
    let e = [Vector3::x(), Vector3::y(), Vector3::z()];
    let mut out = Vec::new();
    for x in shell_points() {
        let (r, th, ph) = polar(&x);
        let basis = PointBasis::new(l, th, ph);
        match (op, op.channel()) {
            (FdOperator::Gradient, _) => {
                let (gv, gw) = gradient_mode(l, f, r)?;
                let (v, w) = (basis.vector(Channel::V, l, m), basis.vector(Channel::W, l, m));
                let exact = spherical_to_cartesian(std::array::from_fn(|k| v[k] * gv + w[k] * gw), th, ph);
                for k in 0..3 {
                    let fd = (scalar(&(x + e[k] * h)) - scalar(&(x - e[k] * h))) / (2.0 * h);
                    out.push((fd, exact[k]));
                }
            }
            (FdOperator::LaplacianV | FdOperator::LaplacianX | FdOperator::LaplacianW, Some(ch)) => {
                let centre = vector(ch, &x);
                let mut fd = [ZERO; 3];
                for dir in &e {
                    let (p, q) = (vector(ch, &(x + dir * h)), vector(ch, &(x - dir * h)));
                    for k in 0..3 {
                        fd[k] += (p[k] - centre[k] * 2.0 + q[k]) / (h * h);
                    }
                }
                let lv = radial_operator(laplacian_degree(ch, l), f, r)?;
                let exact = spherical_to_cartesian(basis.vector(ch, l, m).map(|c| c * lv), th, ph);
                out.extend(fd.into_iter().zip(exact));
            }
            (_, Some(ch)) => {
                let fd: Complex64 = (0..3)
                    .map(|k| (vector(ch, &(x + e[k] * h))[k] - vector(ch, &(x - e[k] * h))[k]) / (2.0 * h))
                    .sum();
                out.push((fd, basis.y(l, m) * divergence_mode(ch, l, f, r)?));
            }
            _ => unreachable!(),
        }
    }
    Ok(out)
}

/// Max pointwise gap between second-order central differences of the
/// Cartesian field and the degree-by-degree formula.
pub fn fd_operator_check(op: FdOperator, l: usize, m: i64, f: &impl RadialProfile, h: f64) -> Result<f64> {
    Ok(fd_pairs(op, l, m, f, h)?
        .iter()
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

/// Same gap after pointwise Richardson extrapolation (4·D(h/2) − D(h))/3.
pub fn fd_operator_check_extrapolated(op: FdOperator, l: usize, m: i64, f: &impl RadialProfile, h: f64) -> Result<f64> {
    let (coarse, fine) = (fd_pairs(op, l, m, f, h)?, fd_pairs(op, l, m, f, h / 2.0)?);
    Ok(coarse
        .iter()
        .zip(&fine)
        .map(|((c, exact), (fn_, _))| ((fn_ * 4.0 - c) / 3.0 - exact).norm())
        .fold(0.0, f64::max))
}

/// Max gap between the finite-difference surface Laplacian of Y_lm and
/// −l(l+1)Y_lm, on a band of latitudes away from the poles.
pub fn laplace_beltrami_check(l: usize, m: i64, h: f64) -> Result<f64> {
    HarmonicIndex::new(l, m)?;
    let y = |th: f64, ph: f64| PointBasis::new(l, th, ph).y(l, m);
    let lam = -((l * (l + 1)) as f64);
    let mut worst = 0.0f64;
    for i in 1..12 {
        let th = 0.2 + (PI - 0.4) * i as f64 / 12.0;
        for j in 0..8 {
            let ph = 2.0 * PI * j as f64 / 8.0 + 0.1;
            let s = th.sin();
            let (sp, sm) = ((th + 0.5 * h).sin(), (th - 0.5 * h).sin());
            let c = y(th, ph);
            let d_theta = (sp * (y(th + h, ph) - c) - sm * (c - y(th - h, ph))) / (s * h * h);
            let d_phi = (y(th, ph + h) - c * 2.0 + y(th, ph - h)) / (s * s * h * h);
            worst = worst.max((d_theta + d_phi - c * lam).norm());
        }
    }
    Ok(worst)
}

/// Residuals at h and h/2 and their ratio (≈ 4 for a second-order scheme).
pub fn convergence_ratio(check: impl Fn(f64) -> Result<f64>, h: f64) -> Result<(f64, f64, f64)> {
    let (a, b) = (check(h)?, check(h / 2.0)?);
    Ok((a, b, a / b))
}
