//! Truncated univariate Taylor series.
//!
//! A [`Jet`] of degree `K` at basepoint `t₀` stores the Taylor-normalized
//! coefficients `c_j = f⁽ʲ⁾(t₀)/j!` for `j = 0..=K`. Every operation is exact
//! up to floating-point rounding in the retained coefficients; nothing above
//! degree `K` is ever estimated.
//!
//! The checked entry points [`jet_arith`], [`jet_elementary`] and
//! [`jet_compose`] validate degrees, basepoints and domains. The operator
//! impls (`&a + &b`, `&a * &b`, ...) are the unchecked fast path used inside
//! the crate once those preconditions are already established; they panic on
//! a degree mismatch, like shape mismatches in array libraries.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

/// Degree used throughout the geometry modules unless overridden.
pub const DEFAULT_DEGREE: usize = 12;

/// Largest degree accepted by evaluation entry points.
pub const MAX_DEGREE: usize = 40;

/// Relative threshold on the constant term of a divisor.
pub const DIV_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("jet basepoint mismatch: {left} vs {right}")]
    BasepointMismatch { left: f64, right: f64 },
    #[error("division by a series with vanishing constant term (|c0| = {c0:e}, threshold {threshold:e})")]
    DivisionByZeroSeries { c0: f64, threshold: f64 },
    #[error("{function} is not defined for constant term {c0}")]
    Domain { function: &'static str, c0: f64 },
    #[error("inner series of a composition must have zero constant term, got {c0}")]
    CompositionBasepoint { c0: f64 },
    #[error("non-finite coefficient at degree {index}")]
    NonFinite { index: usize },
}

#[derive(Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<f64>,
    base: f64,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet@{}{:?}", self.base, self.coeffs)
    }
}

impl Jet {
    /// Builds a jet from Taylor-normalized coefficients. The degree is
    /// `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<f64>, base: f64) -> Result<Self, JetError> {
        assert!(!coeffs.is_empty(), "a jet needs at least the constant term");
        if let Some(index) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(JetError::NonFinite { index });
        }
        Ok(Self { coeffs, base })
    }

    pub(crate) fn from_raw(coeffs: Vec<f64>, base: f64) -> Self {
        debug_assert!(!coeffs.is_empty());
        Self { coeffs, base }
    }

    pub fn constant(value: f64, degree: usize, base: f64) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[0] = value;
        Self { coeffs, base }
    }

    /// The identity function `t ↦ t` expanded at `base`.
    pub fn variable(degree: usize, base: f64) -> Self {
        let mut j = Self::constant(base, degree, base);
        if degree >= 1 {
            j.coeffs[1] = 1.0;
        }
        j
    }

    /// The displacement `t ↦ t − base`, i.e. the variable with its constant removed.
    pub fn displacement(degree: usize, base: f64) -> Self {
        let mut j = Self::variable(degree, base);
        j.coeffs[0] = 0.0;
        j
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Taylor coefficient `c_j`; zero above the degree.
    pub fn coeff(&self, j: usize) -> f64 {
        self.coeffs.get(j).copied().unwrap_or(0.0)
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// `f⁽ʲ⁾(t₀) = j!·c_j`.
    pub fn derivative_value(&self, j: usize) -> f64 {
        self.coeff(j) * factorial(j)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Largest absolute coefficient.
    pub fn magnitude(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn truncate(&self, degree: usize) -> Self {
        assert!(degree <= self.degree(), "cannot raise the degree of a jet");
        Self {
            coeffs: self.coeffs[..=degree].to_vec(),
            base: self.base,
        }
    }

    /// Jet of `f′`. The result has degree `K − 1` (degree 0 stays 0 with a
    /// zero coefficient).
    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::constant(0.0, 0, self.base);
        }
        let coeffs = (1..self.coeffs.len())
            .map(|j| j as f64 * self.coeffs[j])
            .collect();
        Self {
            coeffs,
            base: self.base,
        }
    }

    /// Horner evaluation of the truncated polynomial at `t₀ + h`.
    pub fn eval_offset(&self, h: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * h + c)
    }

    /// Coefficients of `f(t₀ + λu)` as a series in `u`.
    pub fn rescale(&self, lambda: f64) -> Self {
        let mut p = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let r = c * p;
                p *= lambda;
                r
            })
            .collect();
        Self {
            coeffs,
            base: self.base,
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map(|c| c * k)
    }

    pub fn add_constant(&self, k: f64) -> Self {
        let mut r = self.clone();
        r.coeffs[0] += k;
        r
    }

    /// Same degree and basepoint as `self`, constant value `v`.
    pub fn constant_like(&self, v: f64) -> Self {
        Self::constant(v, self.degree(), self.base)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&c| f(c)).collect(),
            base: self.base,
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<(), JetError> {
        if self.degree() != other.degree() {
            return Err(JetError::DegreeMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        if self.base != other.base {
            return Err(JetError::BasepointMismatch {
                left: self.base,
                right: other.base,
            });
        }
        Ok(())
    }

    fn assert_same_degree(&self, other: &Self) {
        assert_eq!(
            self.degree(),
            other.degree(),
            "jet degree mismatch in unchecked arithmetic"
        );
    }

    fn mul_raw(&self, other: &Self) -> Self {
        self.assert_same_degree(other);
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.coeffs[..n - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self {
            coeffs: out,
            base: self.base,
        }
    }

    /// Series quotient without the constant-term guard.
    fn div_raw(&self, other: &Self) -> Self {
        self.assert_same_degree(other);
        let n = self.coeffs.len();
        let b0 = other.coeffs[0];
        let mut q = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= other.coeffs[j] * q[k - j];
            }
            q[k] = acc / b0;
        }
        Self {
            coeffs: q,
            base: self.base,
        }
    }

    /// Checked quotient: refuses divisors whose constant term is negligible
    /// relative to their own coefficient scale.
    pub fn try_div(&self, other: &Self) -> Result<Self, JetError> {
        self.check_compatible(other)?;
        let threshold = DIV_EPS * other.magnitude();
        let c0 = other.coeffs[0];
        if c0.abs() <= threshold || c0 == 0.0 {
            return Err(JetError::DivisionByZeroSeries { c0, threshold });
        }
        finite(self.div_raw(other))
    }

    pub fn recip(&self) -> Result<Self, JetError> {
        self.constant_like(1.0).try_div(self)
    }

    pub fn exp(&self) -> Self {
        let n = self.coeffs.len();
        let mut e = vec![0.0; n];
        e[0] = self.coeffs[0].exp();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.coeffs[j] * e[k - j];
            }
            e[k] = acc / k as f64;
        }
        Self {
            coeffs: e,
            base: self.base,
        }
    }

    /// `(sin f, cos f)` via the coupled recurrence.
    pub fn sin_cos(&self) -> (Self, Self) {
        let n = self.coeffs.len();
        let mut s = vec![0.0; n];
        let mut c = vec![0.0; n];
        s[0] = self.coeffs[0].sin();
        c[0] = self.coeffs[0].cos();
        for k in 1..n {
            let mut sa = 0.0;
            let mut ca = 0.0;
            for j in 1..=k {
                let ja = j as f64 * self.coeffs[j];
                sa += ja * c[k - j];
                ca -= ja * s[k - j];
            }
            s[k] = sa / k as f64;
            c[k] = ca / k as f64;
        }
        (
            Self {
                coeffs: s,
                base: self.base,
            },
            Self {
                coeffs: c,
                base: self.base,
            },
        )
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    pub fn try_sqrt(&self) -> Result<Self, JetError> {
        let a0 = self.coeffs[0];
        if !(a0 > 0.0) {
            return Err(JetError::Domain {
                function: "sqrt",
                c0: a0,
            });
        }
        Ok(self.sqrt_raw())
    }

    fn sqrt_raw(&self) -> Self {
        let n = self.coeffs.len();
        let mut r = vec![0.0; n];
        r[0] = self.coeffs[0].sqrt();
        for k in 1..n {
            let mut acc = self.coeffs[k];
            for j in 1..k {
                acc -= r[j] * r[k - j];
            }
            r[k] = acc / (2.0 * r[0]);
        }
        Self {
            coeffs: r,
            base: self.base,
        }
    }

    /// Integer power by repeated squaring; negative exponents go through
    /// the checked reciprocal.
    pub fn try_powi(&self, n: i32) -> Result<Self, JetError> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.constant_like(1.0);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_raw(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul_raw(&sq);
            }
        }
        finite(acc)
    }

    /// `outer ∘ inner`, where `inner` is a displacement series (zero constant
    /// term) expanded at the result's basepoint.
    pub fn try_compose(&self, inner: &Self) -> Result<Self, JetError> {
        if self.degree() != inner.degree() {
            return Err(JetError::DegreeMismatch {
                left: self.degree(),
                right: inner.degree(),
            });
        }
        let c0 = inner.coeffs[0];
        if c0.abs() > 1e-14 * inner.magnitude().max(1.0) {
            return Err(JetError::CompositionBasepoint { c0 });
        }
        let mut inner = inner.clone();
        inner.coeffs[0] = 0.0;
        let mut acc = inner.constant_like(0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_raw(&inner).add_constant(*c);
        }
        finite(acc)
    }

    /// Series reversion: the displacement jet `u ↦ t − t₀` inverting
    /// `self − self.c₀`, which must have a nonzero linear term.
    pub fn try_revert(&self) -> Result<Self, JetError> {
        let a1 = self.coeff(1);
        if a1.abs() <= DIV_EPS * self.magnitude() || a1 == 0.0 {
            return Err(JetError::DivisionByZeroSeries {
                c0: a1,
                threshold: DIV_EPS * self.magnitude(),
            });
        }
        let k = self.degree();
        let mut f = self.clone();
        f.coeffs[0] = 0.0;
        // Fixed point g = (u − (f∘g − a1·g)) / a1 gains one correct order per pass.
        let u = Jet::displacement(k, 0.0);
        let mut higher = f.clone();
        higher.coeffs[1] = 0.0;
        let mut g = u.scale(1.0 / a1);
        for _ in 0..k {
            let fg = higher.try_compose(&g)?;
            g = (&u - &fg).scale(1.0 / a1);
        }
        Ok(g)
    }

    /// Coefficient-wise distance relative to the larger magnitude.
    pub fn rel_distance(&self, other: &Self) -> f64 {
        let scale = self.magnitude().max(other.magnitude()).max(f64::MIN_POSITIVE);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
            / scale
    }
}

fn finite(j: Jet) -> Result<Jet, JetError> {
    match j.coeffs.iter().position(|c| !c.is_finite()) {
        Some(index) => Err(JetError::NonFinite { index }),
        None => Ok(j),
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Sin,
    Cos,
    Exp,
    Sqrt,
    PowInt(i32),
    Neg,
}

/// Checked binary arithmetic on jets of equal degree and basepoint.
pub fn jet_arith(op: ArithOp, a: &Jet, b: &Jet) -> Result<Jet, JetError> {
    a.check_compatible(b)?;
    match op {
        ArithOp::Add => finite(a + b),
        ArithOp::Sub => finite(a - b),
        ArithOp::Mul => finite(a * b),
        ArithOp::Div => a.try_div(b),
    }
}

/// Checked composition of an elementary function with a series.
pub fn jet_elementary(f: Elementary, a: &Jet) -> Result<Jet, JetError> {
    match f {
        Elementary::Sin => finite(a.sin()),
        Elementary::Cos => finite(a.cos()),
        Elementary::Exp => finite(a.exp()),
        Elementary::Sqrt => a.try_sqrt().and_then(finite),
        Elementary::PowInt(n) => a.try_powi(n),
        Elementary::Neg => Ok(-a),
    }
}

pub fn jet_compose(outer: &Jet, inner: &Jet) -> Result<Jet, JetError> {
    outer.try_compose(inner)
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.assert_same_degree(rhs);
        Jet {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
            base: self.base,
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.assert_same_degree(rhs);
        Jet {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
            base: self.base,
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_raw(rhs)
    }
}

/// Unchecked quotient; callers guarantee a nonvanishing constant term.
impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self.div_raw(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.map(|c| -c)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

/// Unchecked square root for internal callers that already validated the
/// constant term.
pub(crate) fn sqrt_unchecked(a: &Jet) -> Jet {
    a.sqrt_raw()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[f64]) -> Jet {
        Jet::new(c.to_vec(), 0.0).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn product_of_binomials() {
        let p = jet_arith(ArithOp::Mul, &poly(&[1., 1., 0., 0.]), &poly(&[1., -1., 0., 0.])).unwrap();
        assert_eq!(p.coeffs(), &[1.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn geometric_series() {
        let q = jet_arith(ArithOp::Div, &poly(&[1., 0., 0., 0.]), &poly(&[1., -1., 0., 0.])).unwrap();
        assert_eq!(q.coeffs(), &[1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn division_by_vanishing_constant_is_an_error() {
        let err = jet_arith(ArithOp::Div, &poly(&[1., 0., 0.]), &poly(&[0., 1., 0.])).unwrap_err();
        assert!(matches!(err, JetError::DivisionByZeroSeries { .. }));
        let err = jet_arith(ArithOp::Div, &poly(&[1., 0., 0.]), &poly(&[1e-13, 1., 0.])).unwrap_err();
        assert!(matches!(err, JetError::DivisionByZeroSeries { .. }));
    }

    #[test]
    fn degree_and_basepoint_mismatch() {
        let e = jet_arith(ArithOp::Add, &poly(&[1., 0.]), &poly(&[1., 0., 0.])).unwrap_err();
        assert_eq!(e, JetError::DegreeMismatch { left: 1, right: 2 });
        let a = Jet::new(vec![1.0, 0.0], 0.0).unwrap();
        let b = Jet::new(vec![1.0, 0.0], 0.5).unwrap();
        assert!(matches!(
            jet_arith(ArithOp::Mul, &a, &b),
            Err(JetError::BasepointMismatch { .. })
        ));
    }

    #[test]
    fn exponential_series() {
        let e = jet_elementary(Elementary::Exp, &Jet::displacement(4, 0.0)).unwrap();
        assert!(close(e.coeffs(), &[1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0], 1e-15));
    }

    #[test]
    fn sqrt_of_constant_and_domain() {
        let r = jet_elementary(Elementary::Sqrt, &poly(&[1., 0., 0., 0.])).unwrap();
        assert_eq!(r.coeffs(), &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            jet_elementary(Elementary::Sqrt, &poly(&[0., 1.])),
            Err(JetError::Domain { .. })
        ));
        assert!(matches!(
            jet_elementary(Elementary::Sqrt, &poly(&[-1., 1.])),
            Err(JetError::Domain { .. })
        ));
    }

    #[test]
    fn integer_powers() {
        let x = poly(&[1., 1., 0., 0.]);
        let c = jet_elementary(Elementary::PowInt(3), &x).unwrap();
        assert_eq!(c.coeffs(), &[1.0, 3.0, 3.0, 1.0]);
        let inv = jet_elementary(Elementary::PowInt(-1), &x).unwrap();
        assert!(close(inv.coeffs(), &[1.0, -1.0, 1.0, -1.0], 1e-15));
        let z = jet_elementary(Elementary::PowInt(0), &x).unwrap();
        assert_eq!(z.coeffs(), &[1.0, 0.0, 0.0, 0.0]);
        assert!(jet_elementary(Elementary::PowInt(-2), &poly(&[0., 1.])).is_err());
    }

    #[test]
    fn composition_expands_polynomials() {
        let outer = poly(&[0., 0., 1., 0.]);
        let inner = poly(&[0., 1., 1., 0.]);
        let c = jet_compose(&outer, &inner).unwrap();
        assert_eq!(c.coeffs(), &[0.0, 0.0, 1.0, 2.0]);
        let id = Jet::displacement(3, 0.0);
        assert_eq!(jet_compose(&outer, &id).unwrap(), outer);
        assert!(matches!(
            jet_compose(&outer, &poly(&[0.1, 1., 0., 0.])),
            Err(JetError::CompositionBasepoint { .. })
        ));
    }

    #[test]
    fn exp_of_sin_by_two_paths() {
        let k = 5;
        let t = Jet::displacement(k, 0.0);
        let direct = t.sin().exp();
        let outer = Jet::displacement(k, 0.0).exp();
        let composed = jet_compose(&outer, &t.sin()).unwrap();
        assert!(direct.rel_distance(&composed) < 1e-12);
    }

    #[test]
    fn reversion_inverts() {
        let f = poly(&[0.0, 2.0, 0.3, -0.1, 0.05, 0.0, 0.0]);
        let g = f.try_revert().unwrap();
        let id = f.try_compose(&g).unwrap();
        assert!(id.rel_distance(&Jet::displacement(6, 0.0)) < 1e-13);
    }

    #[test]
    fn derivative_and_rescale() {
        let f = poly(&[1., 2., 3., 4.]);
        assert_eq!(f.derivative().coeffs(), &[2.0, 6.0, 12.0]);
        assert_eq!(f.rescale(2.0).coeffs(), &[1.0, 4.0, 12.0, 32.0]);
        assert_eq!(f.derivative_value(3), 24.0);
        assert_eq!(f.eval_offset(1.0), 10.0);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(Jet::new(vec![f64::NAN], 0.0).is_err());
        let big = poly(&[800.0, 1.0]);
        assert!(matches!(
            jet_elementary(Elementary::Exp, &big),
            Err(JetError::NonFinite { .. })
        ));
    }
}
