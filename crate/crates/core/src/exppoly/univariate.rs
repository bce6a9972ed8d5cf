use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::poly;
use crate::error::{Error, Result};
use crate::numeric::{LinearCombination, C64, ONE, ZERO};

/// Exponents closer than this are treated as one exponent.
pub const MERGE_TOL: f64 = 1e-9;

/// One summand `p(x) e^{exponent x}`; `poly` is ascending by degree.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpTerm {
    pub exponent: C64,
    pub poly: Vec<C64>,
}

/// A finite sum of polynomial-times-exponential terms in one real variable,
/// kept in canonical form: merged exponents, no zero polynomials, terms
/// ordered by `(re, im)` of the exponent.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExpPoly {
    terms: Vec<ExpTerm>,
}

pub(crate) fn snap(z: C64) -> C64 {
    let re = if z.re.abs() < MERGE_TOL { 0.0 } else { z.re };
    let im = if z.im.abs() < MERGE_TOL { 0.0 } else { z.im };
    C64::new(re, im)
}

pub(crate) fn cmp_c64(a: C64, b: C64) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds and canonicalizes; rejects non-finite input.
    pub fn try_from_terms(terms: Vec<ExpTerm>) -> Result<Self> {
        let finite = terms.iter().all(|t| {
            t.exponent.is_finite() && t.poly.iter().all(|c| c.is_finite())
        });
        if !finite {
            return Err(Error::InvalidInput(
                "non-finite value in exponential polynomial".into(),
            ));
        }
        Ok(Self::from_terms(terms))
    }

    pub fn from_terms(terms: Vec<ExpTerm>) -> Self {
        let mut merged: Vec<ExpTerm> = Vec::with_capacity(terms.len());
        for mut t in terms {
            t.exponent = snap(t.exponent);
            match merged
                .iter_mut()
                .find(|m| (m.exponent - t.exponent).norm() < MERGE_TOL)
            {
                Some(m) => poly::add_scaled(&mut m.poly, &t.poly, ONE),
                None => merged.push(t),
            }
        }
        for m in &mut merged {
            poly::trim(&mut m.poly);
        }
        merged.retain(|m| !m.poly.is_empty());
        merged.sort_by(|a, b| cmp_c64(a.exponent, b.exponent));
        Self { terms: merged }
    }

    pub fn term(exponent: C64, poly: Vec<C64>) -> Self {
        Self::from_terms(vec![ExpTerm { exponent, poly }])
    }

    pub fn constant(c: C64) -> Self {
        Self::term(ZERO, vec![c])
    }

    /// `c x^k`
    pub fn monomial(k: usize, c: C64) -> Self {
        let mut p = vec![ZERO; k + 1];
        p[k] = c;
        Self::term(ZERO, p)
    }

    /// `e^{mu x}`
    pub fn exp(mu: C64) -> Self {
        Self::term(mu, vec![ONE])
    }

    /// `sin(omega x)`, lowered to `(-i/2) e^{i omega x} + (i/2) e^{-i omega x}`.
    pub fn sin(omega: f64) -> Self {
        let half_i = C64::new(0.0, 0.5);
        Self::from_terms(vec![
            ExpTerm { exponent: C64::new(0.0, omega), poly: vec![-half_i] },
            ExpTerm { exponent: C64::new(0.0, -omega), poly: vec![half_i] },
        ])
    }

    /// `cos(omega x)`
    pub fn cos(omega: f64) -> Self {
        let half = C64::new(0.5, 0.0);
        Self::from_terms(vec![
            ExpTerm { exponent: C64::new(0.0, omega), poly: vec![half] },
            ExpTerm { exponent: C64::new(0.0, -omega), poly: vec![half] },
        ])
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(|t| t.poly.len() - 1).max().unwrap_or(0)
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.eval_complex(C64::new(x, 0.0))
    }

    pub fn eval_complex(&self, x: C64) -> C64 {
        self.terms
            .iter()
            .map(|t| poly::eval(&t.poly, x) * (t.exponent * x).exp())
            .sum()
    }

    pub fn scale(&self, c: C64) -> Self {
        if c == ZERO {
            return Self::zero();
        }
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| ExpTerm {
                    exponent: t.exponent,
                    poly: t.poly.iter().map(|x| x * c).collect(),
                })
                .collect(),
        )
    }

    /// Exact derivative: `(p e^{mu x})' = (p' + mu p) e^{mu x}`.
    pub fn diff(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| {
                    let mut p = poly::diff(&t.poly);
                    poly::add_scaled(&mut p, &t.poly, t.exponent);
                    ExpTerm { exponent: t.exponent, poly: p }
                })
                .collect(),
        )
    }

    pub fn diff_n(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |acc, _| acc.diff())
    }

    /// `x -> -x`
    pub fn reflect(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| ExpTerm { exponent: -t.exponent, poly: poly::reflect(&t.poly) })
                .collect(),
        )
    }

    /// `f(a x + b)`
    pub fn compose_affine(&self, a: f64, b: f64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| ExpTerm {
                    exponent: t.exponent * a,
                    poly: poly::compose_affine(&t.poly, a, b)
                        .into_iter()
                        .map(|c| c * (t.exponent * b).exp())
                        .collect(),
                })
                .collect(),
        )
    }

    /// An antiderivative, term by term.
    pub fn antiderivative(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| ExpTerm {
                    exponent: t.exponent,
                    poly: poly::antiderivative(&t.poly, t.exponent),
                })
                .collect(),
        )
    }

    /// `∫_lo^hi f(x) dx` for concrete limits.
    pub fn integrate(&self, lo: f64, hi: f64) -> C64 {
        let f = self.antiderivative();
        f.eval(hi) - f.eval(lo)
    }

    /// Largest imaginary part relative to the real part over the given points.
    pub fn max_imag_ratio(&self, xs: &[f64]) -> f64 {
        xs.iter()
            .map(|&x| {
                let v = self.eval(x);
                v.im.abs() / (1.0 + v.re.abs())
            })
            .fold(0.0, f64::max)
    }
}

impl LinearCombination for ExpPoly {
    fn axpy(&mut self, a: C64, x: &Self) {
        if a == ZERO || x.is_zero() {
            return;
        }
        let mut terms = std::mem::take(&mut self.terms);
        terms.extend(x.terms.iter().map(|t| ExpTerm {
            exponent: t.exponent,
            poly: t.poly.iter().map(|c| c * a).collect(),
        }));
        *self = ExpPoly::from_terms(terms);
    }

    fn scale(&mut self, a: C64) {
        *self = ExpPoly::scale(self, a);
    }
}

impl Add for &ExpPoly {
    type Output = ExpPoly;
    fn add(self, rhs: &ExpPoly) -> ExpPoly {
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        ExpPoly::from_terms(terms)
    }
}

impl Add for ExpPoly {
    type Output = ExpPoly;
    fn add(self, rhs: ExpPoly) -> ExpPoly {
        &self + &rhs
    }
}

impl Neg for &ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        self.scale(-ONE)
    }
}

impl Neg for ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        -&self
    }
}

impl Sub for &ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: &ExpPoly) -> ExpPoly {
        self + &(-rhs)
    }
}

impl Sub for ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: ExpPoly) -> ExpPoly {
        &self - &rhs
    }
}

impl Mul for &ExpPoly {
    type Output = ExpPoly;
    /// Exponents add, polynomials convolve.
    fn mul(self, rhs: &ExpPoly) -> ExpPoly {
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                terms.push(ExpTerm {
                    exponent: a.exponent + b.exponent,
                    poly: poly::mul(&a.poly, &b.poly),
                });
            }
        }
        ExpPoly::from_terms(terms)
    }
}

impl Mul for ExpPoly {
    type Output = ExpPoly;
    fn mul(self, rhs: ExpPoly) -> ExpPoly {
        &self * &rhs
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, t) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "(")?;
            for (k, c) in t.poly.iter().enumerate() {
                if k > 0 {
                    write!(f, " + ")?;
                }
                write!(f, "({:.6}{:+.6}i)t^{}", c.re, c.im, k)?;
            }
            write!(f, ")")?;
            if t.exponent != ZERO {
                write!(f, "·exp(({:.6}{:+.6}i)t)", t.exponent.re, t.exponent.im)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn additive_inverse_cancels() {
        let e = ExpPoly::exp(ONE);
        assert!((&e + &(-&e)).is_zero());
    }

    #[test]
    fn disjoint_exponents_stay_separate() {
        let sum = ExpPoly::monomial(1, ONE) + ExpPoly::exp(r(2.0));
        assert_eq!(sum.terms().len(), 2);
        assert_eq!(sum.terms()[0], ExpTerm { exponent: ZERO, poly: vec![ZERO, ONE] });
        assert_eq!(sum.terms()[1], ExpTerm { exponent: r(2.0), poly: vec![ONE] });
    }

    #[test]
    fn doubled_sine_structure() {
        let s = ExpPoly::sin(1.0);
        let two = &s + &s;
        assert_eq!(two.terms().len(), 2);
        let i = C64::new(0.0, 1.0);
        assert_eq!(two.terms()[0], ExpTerm { exponent: -i, poly: vec![i] });
        assert_eq!(two.terms()[1], ExpTerm { exponent: i, poly: vec![-i] });
        for x in [-0.9, -0.3, 0.0, 0.4, 1.7] {
            assert!((two.eval(x) - r(2.0 * f64::sin(x))).norm() < 1e-12);
        }
    }

    #[test]
    fn products() {
        let e = ExpPoly::exp(ONE) * ExpPoly::exp(-ONE);
        assert_eq!(e, ExpPoly::constant(ONE));
        let t = ExpPoly::monomial(1, ONE);
        assert_eq!(&t * &t, ExpPoly::monomial(2, ONE));
        let i = C64::new(0.0, 1.0);
        assert_eq!(ExpPoly::exp(i) * ExpPoly::exp(i), ExpPoly::exp(i * 2.0));
    }

    #[test]
    fn derivatives() {
        assert_eq!(ExpPoly::exp(r(2.0)).diff(), ExpPoly::term(r(2.0), vec![r(2.0)]));
        let te = ExpPoly::term(ONE, vec![ZERO, ONE]);
        assert_eq!(te.diff(), ExpPoly::term(ONE, vec![ONE, ONE]));
        let cos = ExpPoly::sin(1.0).diff();
        for x in [-1.0, 0.2, 0.8] {
            assert!((cos.eval(x) - r(f64::cos(x))).norm() < 1e-14);
        }
    }

    #[test]
    fn reflection() {
        assert_eq!(ExpPoly::exp(ONE).reflect(), ExpPoly::exp(-ONE));
        let p = ExpPoly::term(ZERO, vec![ZERO, ONE, ONE]);
        assert_eq!(p.reflect(), ExpPoly::term(ZERO, vec![ZERO, -ONE, ONE]));
    }

    #[test]
    fn definite_integrals() {
        assert_eq!(ExpPoly::constant(ONE).integrate(0.0, 1.0), ONE);
        let e = std::f64::consts::E;
        let v = ExpPoly::exp(ONE).integrate(-1.0, 1.0);
        assert!((v - r(e - 1.0 / e)).norm() < 1e-15);
    }

    #[test]
    fn nearby_exponents_merge() {
        let a = ExpPoly::exp(r(1.0));
        let b = ExpPoly::exp(r(1.0 + 1e-12));
        assert_eq!((a + b).terms().len(), 1);
        let z = ExpPoly::exp(r(1e-12));
        assert_eq!(z.terms()[0].exponent, ZERO);
    }

    #[test]
    fn rejects_non_finite() {
        let bad = ExpTerm { exponent: ZERO, poly: vec![r(f64::NAN)] };
        assert!(ExpPoly::try_from_terms(vec![bad]).is_err());
    }
}
