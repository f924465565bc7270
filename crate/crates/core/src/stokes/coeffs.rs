//! Exact coefficients of the closed-form boundary solutions.
//!
//! Every coefficient in the l ≥ 2 formulas is a rational function of l times
//! one of the surds 1, a = √((l+1)/(2l+1)), b = √(l/(2l+1)) or ab. Products
//! of surds reduce back to rationals, so the closed-form trace can be assembled and
//! compared without floating point.

use num_rational::Ratio;

pub type Q = Ratio<i128>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Surd {
    One,
    A,
    B,
    AB,
}

/// rational × surd at a fixed degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coef {
    pub l: i128,
    pub q: Q,
    pub surd: Surd,
}

fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

impl Coef {
    pub fn new(l: usize, q: Q, surd: Surd) -> Self {
        Self { l: l as i128, q, surd }
    }

    pub fn zero(l: usize) -> Self {
        Self::new(l, Q::from_integer(0), Surd::One)
    }

    fn a2(&self) -> Q {
        q(self.l + 1, 2 * self.l + 1)
    }

    fn b2(&self) -> Q {
        q(self.l, 2 * self.l + 1)
    }

    pub fn to_f64(&self) -> f64 {
        let r = *self.q.numer() as f64 / *self.q.denom() as f64;
        let (a, b) = (
            (*self.a2().numer() as f64 / *self.a2().denom() as f64).sqrt(),
            (*self.b2().numer() as f64 / *self.b2().denom() as f64).sqrt(),
        );
        r * match self.surd {
            Surd::One => 1.0,
            Surd::A => a,
            Surd::B => b,
            Surd::AB => a * b,
        }
    }

    pub fn scale(self, k: Q) -> Coef {
        Coef { q: self.q * k, ..self }
    }

    /// Sum, defined when the surds agree or one side is zero.
    pub fn checked_add(self, other: Coef) -> Option<Coef> {
        if other.q == Q::from_integer(0) {
            return Some(self);
        }
        if self.q == Q::from_integer(0) {
            return Some(other);
        }
        (self.surd == other.surd).then(|| Coef {
            q: self.q + other.q,
            ..self
        })
    }
}

impl std::ops::Mul for Coef {
    type Output = Coef;

    /// Product with another surd-rational at the same degree.
    fn mul(self, other: Coef) -> Coef {
        use Surd::*;
        let (a2, b2) = (self.a2(), self.b2());
        let (factor, surd) = match (self.surd, other.surd) {
            (One, s) | (s, One) => (Q::from_integer(1), s),
            (A, A) => (a2, One),
            (B, B) => (b2, One),
            (A, B) | (B, A) => (Q::from_integer(1), AB),
            (AB, A) | (A, AB) => (a2, B),
            (AB, B) | (B, AB) => (b2, A),
            (AB, AB) => (a2 * b2, One),
        };
        Coef {
            l: self.l,
            q: self.q * other.q * factor,
            surd,
        }
    }
}

fn li(l: usize) -> i128 {
    l as i128
}

/// Coefficients of (g, J^div, J^{nsb;V}) in P¹. Valid for every l ≥ 0.
pub fn p1(l: usize) -> [Coef; 3] {
    let n = li(l);
    let d = 2 * n * n + 4 * n + 3;
    [
        Coef::new(
            l,
            q(
                2 * n.pow(4) + 7 * n.pow(3) + 4 * n * n - 7 * n - 6,
                4 * n * n + 8 * n + 6,
            ),
            Surd::One,
        ),
        Coef::new(l, q(2 * n * n + 3 * n + 2, d), Surd::One),
        Coef::new(l, q(4 * n * n + 8 * n + 3, d), Surd::A),
    ]
}

/// Coefficients of (g, J^div, J^{nsb;V}) in V¹. Valid for every l ≥ 0.
pub fn v1(l: usize) -> [Coef; 3] {
    let n = li(l);
    let d = 2 * n * n + 4 * n + 3;
    [
        Coef::new(l, q(n.pow(3) + n * n - 2 * n, 4 * n * n + 8 * n + 6), Surd::A),
        Coef::new(l, q(-(n + 1), d), Surd::A),
        Coef::new(l, q(n, d), Surd::One),
    ]
}

/// Coefficient of J^{nsb;X} in X¹, l ≥ 2.
pub fn x1(l: usize) -> Coef {
    Coef::new(l, q(1, li(l) - 1), Surd::One)
}

/// Coefficients of (g, J^div, J^{nsb;V}, J^{nsb;W}) in W¹, l ≥ 2.
pub fn w1(l: usize) -> [Coef; 4] {
    let n = li(l);
    [
        Coef::new(
            l,
            q(
                -(2 * n.pow(4) + 9 * n.pow(3) + 12 * n * n + 4 * n),
                8 * n * n + 16 * n + 12,
            ),
            Surd::B,
        ),
        Coef::new(
            l,
            q(
                -(4 * n.pow(3) + 6 * n * n + 6 * n + 2),
                8 * n.pow(3) + 8 * n * n - 4 * n - 12,
            ),
            Surd::B,
        ),
        // √(l(l+1)) = (2l+1)·ab
        Coef::new(l, q(-(2 * n + 3) * (2 * n + 1), 4 * n * n + 8 * n + 6), Surd::AB),
        Coef::new(l, q(1, 2 * n - 2), Surd::One),
    ]
}

/// Coefficients of (g, J^div, J^{nsb;V}, J^{nsb;W}) in the r = 1 radial
/// velocity as stated in closed form, l ≥ 2.
pub fn trace_closed_form(l: usize) -> [Coef; 4] {
    let n = li(l);
    [
        Coef::new(l, q(-n * (2 * n * n + 5 * n + 2), 8 * n * n + 16 * n + 12), Surd::One),
        Coef::new(l, q(-(n + 2), 4 * n.pow(3) + 4 * n * n - 2 * n - 6), Surd::One),
        Coef::new(l, q(-n, 2 * n * n + 4 * n + 3), Surd::A),
        Coef::new(l, q(1, 2 * n - 2), Surd::B),
    ]
}

/// Same four coefficients obtained by substituting P¹, V¹, W¹ into
/// −a·V¹ + b·(W¹ + ½b·P¹). `None` only if surds fail to combine.
pub fn trace_assembled(l: usize) -> Option<[Coef; 4]> {
    let a = Coef::new(l, Q::from_integer(1), Surd::A);
    let b = Coef::new(l, Q::from_integer(1), Surd::B);
    let half_b2 = (b * b).scale(q(1, 2));
    let (p, v, w) = (p1(l), v1(l), w1(l));
    let p = [p[0], p[1], p[2], Coef::zero(l)];
    let v = [v[0], v[1], v[2], Coef::zero(l)];
    let mut out = [Coef::zero(l); 4];
    for k in 0..4 {
        let t = (a * v[k]).scale(Q::from_integer(-1));
        let t = t.checked_add(b * w[k])?;
        out[k] = t.checked_add(half_b2 * p[k])?;
    }
    Some(out)
}
