//! Carlson's symmetric elliptic integral of the first kind.

use crate::error::{Error, Result};

/// R_F(x, y, z) = ½ ∫₀^∞ dt / √((t+x)(t+y)(t+z)) by duplication.
///
/// At most one argument may be zero; the rest must be positive.
pub fn rf(x: f64, y: f64, z: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 || z < 0.0 || [x, y, z].iter().filter(|v| **v == 0.0).count() > 1 {
        return Err(Error::Domain(format!("R_F({x}, {y}, {z}) undefined")));
    }
    let (mut x, mut y, mut z) = (x, y, z);
    let a0 = (x + y + z) / 3.0;
    // Stop once the Taylor remainder O(Q^6) is below round-off.
    let mut q = (3.0 * f64::EPSILON).powf(-1.0 / 6.0) * (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs());
    let mut a = a0;
    for _ in 0..100 {
        if q < a.abs() {
            break;
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sx * sz + sy * sz;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        a = 0.25 * (a + lam);
        q *= 0.25;
    }
    let (dx, dy) = ((a - x) / a, (a - y) / a);
    let dz = -dx - dy;
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    Ok((1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / a.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Values from Carlson (1995), Table 1.
        assert!((rf(1.0, 2.0, 0.0).unwrap() - 1.311_028_777_146_059_9).abs() < 1e-15);
        assert!((rf(2.0, 3.0, 4.0).unwrap() - 0.584_082_841_677_151_7).abs() < 1e-15);
        assert!((rf(0.5, 0.5, 0.5).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(rf(0.0, 0.0, 1.0).is_err());
        assert!(rf(-1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn homogeneity() {
        let (x, y, z) = (0.3, 1.7, 2.2);
        let k = 9.0;
        assert!((rf(k * x, k * y, k * z).unwrap() - rf(x, y, z).unwrap() / 3.0).abs() < 1e-15);
    }
}
