use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Degree/order pair with |m| ≤ l.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HarmonicIndex {
    pub l: usize,
    pub m: i64,
}

impl HarmonicIndex {
    pub fn new(l: usize, m: i64) -> Result<Self> {
        if m.unsigned_abs() as usize > l {
            return Err(Error::Domain(format!("|m| > l in (l={l}, m={m})")));
        }
        Ok(Self { l, m })
    }

    /// Flat position in an (l, m) array ordered by l then m.
    #[inline]
    pub fn flat(self) -> usize {
        flat(self.l, self.m)
    }
}

#[inline]
pub(crate) fn flat(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Sign (−1)^m.
#[inline]
pub fn parity(m: i64) -> f64 {
    if m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Complex Y_lm coefficients for 0 ≤ l ≤ lmax, |m| ≤ l.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCoefficients {
    lmax: usize,
    entries: Vec<Complex64>,
}

impl SpectralCoefficients {
    pub fn zeros(lmax: usize) -> Self {
        Self {
            lmax,
            entries: vec![Complex64::new(0.0, 0.0); (lmax + 1) * (lmax + 1)],
        }
    }

    /// A single mode with the given value; panics if the index exceeds `lmax`.
    pub fn delta(lmax: usize, l: usize, m: i64, value: Complex64) -> Self {
        let mut s = Self::zeros(lmax);
        s.set(l, m, value);
        s
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Coefficient at (l, m); zero outside the truncation.
    #[inline]
    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        if l > self.lmax || m.unsigned_abs() as usize > l {
            return Complex64::new(0.0, 0.0);
        }
        self.entries[flat(l, m)]
    }

    #[inline]
    pub fn set(&mut self, l: usize, m: i64, value: Complex64) {
        assert!(
            l <= self.lmax && m.unsigned_abs() as usize <= l,
            "({l},{m}) outside lmax={}",
            self.lmax
        );
        self.entries[flat(l, m)] = value;
    }

    /// Iterate over (index, value) in (l, m) order.
    pub fn iter(&self) -> impl Iterator<Item = (HarmonicIndex, Complex64)> + '_ {
        (0..=self.lmax).flat_map(move |l| {
            let li = l as i64;
            (-li..=li).map(move |m| (HarmonicIndex { l, m }, self.entries[flat(l, m)]))
        })
    }

    /// Copy into a different truncation, dropping or zero-padding degrees.
    pub fn resized(&self, lmax: usize) -> Self {
        let mut out = Self::zeros(lmax);
        for (idx, v) in self.iter() {
            if idx.l <= lmax {
                out.set(idx.l, idx.m, v);
            }
        }
        out
    }

    pub fn scaled(&self, k: Complex64) -> Self {
        Self {
            lmax: self.lmax,
            entries: self.entries.iter().map(|v| v * k).collect(),
        }
    }

    /// Sum of two spectra at the larger truncation.
    pub fn add(&self, other: &Self) -> Self {
        let lmax = self.lmax.max(other.lmax);
        let mut out = self.resized(lmax);
        for (idx, v) in other.iter() {
            let cur = out.get(idx.l, idx.m);
            out.set(idx.l, idx.m, cur + v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest violation of c_{l,−m} = (−1)^m conj(c_{l,m}).
    pub fn reality_defect(&self) -> (f64, HarmonicIndex) {
        let mut worst = (0.0, HarmonicIndex { l: 0, m: 0 });
        for l in 0..=self.lmax {
            for m in 0..=l as i64 {
                let d = (self.get(l, -m) - self.get(l, m).conj() * parity(m)).norm();
                if d > worst.0 {
                    worst = (d, HarmonicIndex { l, m });
                }
            }
        }
        worst
    }

    /// Fail unless the spectrum describes a real field to within `tol`.
    pub fn check_reality(&self, tol: f64) -> Result<()> {
        let (d, idx) = self.reality_defect();
        let scale = self.max_abs().max(1.0);
        if d > tol * scale {
            return Err(Error::Reality {
                l: idx.l,
                m: idx.m,
                mismatch: d,
            });
        }
        Ok(())
    }

    /// Parse the whitespace-separated `l m re im` format.
    ///
    /// Modes missing a partner of opposite order are not filled in here; see
    /// [`complete_reality`](Self::complete_reality).
    pub fn parse(text: &str, lmax: usize) -> Result<Self> {
        let mut out = Self::zeros(lmax);
        let mut seen = std::collections::HashSet::new();
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Parse { line: line_no, msg };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(bad(format!("expected 4 fields `l m re im`, found {}", fields.len())));
            }
            let l: usize = fields[0]
                .parse()
                .map_err(|_| bad(format!("degree `{}` is not a nonnegative integer", fields[0])))?;
            let m: i64 = fields[1]
                .parse()
                .map_err(|_| bad(format!("order `{}` is not an integer", fields[1])))?;
            let re: f64 = fields[2]
                .parse()
                .map_err(|_| bad(format!("real part `{}` is not a number", fields[2])))?;
            let im: f64 = fields[3]
                .parse()
                .map_err(|_| bad(format!("imaginary part `{}` is not a number", fields[3])))?;
            if !re.is_finite() || !im.is_finite() {
                return Err(bad("non-finite coefficient".into()));
            }
            if m.unsigned_abs() as usize > l {
                return Err(bad(format!("|m| > l in ({l}, {m})")));
            }
            if !seen.insert((l, m)) {
                return Err(bad(format!("duplicate mode ({l}, {m})")));
            }
            if l > lmax {
                continue;
            }
            out.set(l, m, Complex64::new(re, im));
        }
        Ok(out)
    }

    /// Real field with entries uniform in [−amp, amp] (real and imaginary parts).
    pub fn random_real<R: Rng + ?Sized>(rng: &mut R, lmax: usize, amp: f64) -> Self {
        let mut out = Self::zeros(lmax);
        for l in 0..=lmax {
            out.set(l, 0, Complex64::new(rng.random_range(-amp..=amp), 0.0));
            for m in 1..=l as i64 {
                let v = Complex64::new(rng.random_range(-amp..=amp), rng.random_range(-amp..=amp));
                out.set(l, m, v);
                out.set(l, -m, v.conj() * parity(m));
            }
        }
        out
    }

    /// Fill any absent order-partner so that the reality relation holds for
    /// modes given on one side only. Modes given on both sides are left as is.
    pub fn complete_reality(&mut self, given: impl Fn(usize, i64) -> bool) {
        for l in 0..=self.lmax {
            for m in 1..=l as i64 {
                match (given(l, m), given(l, -m)) {
                    (true, false) => {
                        let v = self.get(l, m).conj() * parity(m);
                        self.set(l, -m, v);
                    }
                    (false, true) => {
                        let v = self.get(l, -m).conj() * parity(m);
                        self.set(l, m, v);
                    }
                    _ => {}
                }
            }
        }
    }

    /// Parse, complete missing partners, and validate reality.
    pub fn parse_real(text: &str, lmax: usize) -> Result<Self> {
        let mut s = Self::parse(text, lmax)?;
        let mut given = std::collections::HashSet::new();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("");
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() == 4 {
                if let (Ok(l), Ok(m)) = (f[0].parse::<usize>(), f[1].parse::<i64>()) {
                    given.insert((l, m));
                }
            }
        }
        s.complete_reality(|l, m| given.contains(&(l, m)));
        s.check_reality(1e-12)?;
        Ok(s)
    }

    /// Nonzero modes sorted by (l, m), one per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (idx, v) in self.iter() {
            if v.re != 0.0 || v.im != 0.0 {
                let _ = writeln!(out, "{} {} {:.17e} {:.17e}", idx.l, idx.m, v.re, v.im);
            }
        }
        out
    }
}

impl std::str::FromStr for SpectralCoefficients {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lmax = s
            .lines()
            .filter_map(|raw| raw.split('#').next()?.split_whitespace().next()?.parse::<usize>().ok())
            .max()
            .unwrap_or(0);
        Self::parse(s, lmax)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_index_is_dense() {
        let mut k = 0;
        for l in 0..6usize {
            for m in -(l as i64)..=l as i64 {
                assert_eq!(flat(l, m), k);
                k += 1;
            }
        }
    }

    #[test]
    fn rejects_bad_index() {
        assert!(HarmonicIndex::new(1, 2).is_err());
        assert!(HarmonicIndex::new(2, -2).is_ok());
    }

    #[test]
    fn parse_errors_cite_line() {
        let e = SpectralCoefficients::parse("# header\n0 0 1 0\n2 x 1 0\n", 4).unwrap_err();
        assert_eq!(
            e,
            Error::Parse {
                line: 3,
                msg: "order `x` is not an integer".into()
            }
        );
        let e = SpectralCoefficients::parse("1 0 1 0\n1 0 2 0", 4).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = SpectralCoefficients::parse("1 3 1 0", 4).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn text_round_trip_sorted() {
        let s = SpectralCoefficients::parse("2 1 0.5 -0.25\n0 0 1 0\n2 -1 -0.5 -0.25\n", 3).unwrap();
        let t = s.to_text();
        let first = t.lines().next().unwrap();
        assert!(first.starts_with("0 0 "));
        assert_eq!(SpectralCoefficients::parse(&t, 3).unwrap(), s);
        s.check_reality(1e-15).unwrap();
    }

    #[test]
    fn completion_fills_partner() {
        let s = SpectralCoefficients::parse_real("2 1 0.5 0.25\n", 2).unwrap();
        assert_eq!(s.get(2, -1), Complex64::new(-0.5, 0.25));
        let e = SpectralCoefficients::parse_real("2 1 0.5 0.25\n2 -1 0.5 0.25\n", 2).unwrap_err();
        assert!(matches!(e, Error::Reality { l: 2, m: 1, .. }));
    }
}
