use std::ops::{Add, Mul, Neg, Sub};

use super::poly;
use super::univariate::{cmp_c64, snap, ExpPoly, ExpTerm, MERGE_TOL};
use crate::numeric::{binomial, C64, ONE, ZERO};

/// `sum_{i,j} coeffs[i][j] t^i s^j · e^{exp_t t + exp_s s}`.
/// `coeffs` is rectangular; trailing zero rows and columns are trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct BiTerm {
    pub exp_t: C64,
    pub exp_s: C64,
    pub coeffs: Vec<Vec<C64>>,
}

/// Exponential polynomial in `(t, s)`, canonical in the same sense as [`ExpPoly`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BivariateExpPoly {
    terms: Vec<BiTerm>,
}

/// A symbolic or concrete integration limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Endpoint {
    Const(f64),
    /// `slope · t + offset`
    InT { slope: f64, offset: f64 },
    /// `slope · s + offset`
    InS { slope: f64, offset: f64 },
}

impl Endpoint {
    pub fn t() -> Self {
        Endpoint::InT { slope: 1.0, offset: 0.0 }
    }

    pub fn s() -> Self {
        Endpoint::InS { slope: 1.0, offset: 0.0 }
    }
}

fn add_matrix(a: &mut Vec<Vec<C64>>, b: &[Vec<C64>], scale: C64, row_shift: usize, col_shift: usize) {
    let rows = b.len() + row_shift;
    let cols = b.first().map_or(0, |r| r.len()) + col_shift;
    let cur_cols = a.first().map_or(0, |r| r.len());
    let new_cols = cols.max(cur_cols);
    if a.len() < rows {
        a.resize(rows, vec![ZERO; new_cols]);
    }
    for row in a.iter_mut() {
        if row.len() < new_cols {
            row.resize(new_cols, ZERO);
        }
    }
    for (i, brow) in b.iter().enumerate() {
        for (j, v) in brow.iter().enumerate() {
            a[i + row_shift][j + col_shift] += scale * v;
        }
    }
}

fn trim_matrix(m: &mut Vec<Vec<C64>>) {
    while m.last().is_some_and(|r| r.iter().all(|c| *c == ZERO)) {
        m.pop();
    }
    let cols = m
        .iter()
        .map(|r| r.iter().rposition(|c| *c != ZERO).map_or(0, |p| p + 1))
        .max()
        .unwrap_or(0);
    if cols == 0 {
        m.clear();
        return;
    }
    for r in m.iter_mut() {
        r.truncate(cols);
    }
}

impl BivariateExpPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: Vec<BiTerm>) -> Self {
        let mut merged: Vec<BiTerm> = Vec::with_capacity(terms.len());
        for mut t in terms {
            t.exp_t = snap(t.exp_t);
            t.exp_s = snap(t.exp_s);
            match merged.iter_mut().find(|m| {
                (m.exp_t - t.exp_t).norm() < MERGE_TOL && (m.exp_s - t.exp_s).norm() < MERGE_TOL
            }) {
                Some(m) => add_matrix(&mut m.coeffs, &t.coeffs, ONE, 0, 0),
                None => merged.push(t),
            }
        }
        for m in &mut merged {
            trim_matrix(&mut m.coeffs);
        }
        merged.retain(|m| !m.coeffs.is_empty());
        merged.sort_by(|a, b| cmp_c64(a.exp_t, b.exp_t).then(cmp_c64(a.exp_s, b.exp_s)));
        Self { terms: merged }
    }

    pub fn constant(c: C64) -> Self {
        Self::from_terms(vec![BiTerm { exp_t: ZERO, exp_s: ZERO, coeffs: vec![vec![c]] }])
    }

    /// `f(t)`
    pub fn from_t(f: &ExpPoly) -> Self {
        Self::from_terms(
            f.terms()
                .iter()
                .map(|t| BiTerm {
                    exp_t: t.exponent,
                    exp_s: ZERO,
                    coeffs: t.poly.iter().map(|c| vec![*c]).collect(),
                })
                .collect(),
        )
    }

    /// `g(s)`
    pub fn from_s(g: &ExpPoly) -> Self {
        Self::from_terms(
            g.terms()
                .iter()
                .map(|t| BiTerm { exp_t: ZERO, exp_s: t.exponent, coeffs: vec![t.poly.clone()] })
                .collect(),
        )
    }

    /// `f(t) g(s)`
    pub fn outer(f: &ExpPoly, g: &ExpPoly) -> Self {
        let mut terms = Vec::new();
        for a in f.terms() {
            for b in g.terms() {
                terms.push(BiTerm {
                    exp_t: a.exponent,
                    exp_s: b.exponent,
                    coeffs: a.poly.iter().map(|x| b.poly.iter().map(|y| x * y).collect()).collect(),
                });
            }
        }
        Self::from_terms(terms)
    }

    /// `f(t - s)`
    pub fn from_difference(f: &ExpPoly) -> Self {
        let terms = f
            .terms()
            .iter()
            .map(|t| {
                let n = t.poly.len();
                let mut m = vec![vec![ZERO; n]; n];
                for (k, c) in t.poly.iter().enumerate() {
                    for i in 0..=k {
                        let sign = if (k - i) % 2 == 1 { -1.0 } else { 1.0 };
                        m[i][k - i] += c * (binomial(k, i) * sign);
                    }
                }
                BiTerm { exp_t: t.exponent, exp_s: -t.exponent, coeffs: m }
            })
            .collect();
        Self::from_terms(terms)
    }

    pub fn terms(&self) -> &[BiTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, t: f64, s: f64) -> C64 {
        let tc = C64::new(t, 0.0);
        let sc = C64::new(s, 0.0);
        self.terms
            .iter()
            .map(|term| {
                let poly_val = term
                    .coeffs
                    .iter()
                    .rev()
                    .fold(ZERO, |acc, row| acc * tc + poly::eval(row, sc));
                poly_val * (term.exp_t * tc + term.exp_s * sc).exp()
            })
            .sum()
    }

    pub fn scale(&self, c: C64) -> Self {
        if c == ZERO {
            return Self::zero();
        }
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| BiTerm {
                    exp_t: t.exp_t,
                    exp_s: t.exp_s,
                    coeffs: t.coeffs.iter().map(|r| r.iter().map(|x| x * c).collect()).collect(),
                })
                .collect(),
        )
    }

    /// `∂/∂t`
    pub fn diff_t(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| {
                    let mut m: Vec<Vec<C64>> = t
                        .coeffs
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(i, row)| row.iter().map(|c| c * i as f64).collect())
                        .collect();
                    add_matrix(&mut m, &t.coeffs, t.exp_t, 0, 0);
                    BiTerm { exp_t: t.exp_t, exp_s: t.exp_s, coeffs: m }
                })
                .collect(),
        )
    }

    pub fn diff_t_n(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |acc, _| acc.diff_t())
    }

    /// `t -> -t`
    pub fn reflect_t(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| BiTerm {
                    exp_t: -t.exp_t,
                    exp_s: t.exp_s,
                    coeffs: t
                        .coeffs
                        .iter()
                        .enumerate()
                        .map(|(i, r)| {
                            if i % 2 == 1 {
                                r.iter().map(|c| -c).collect()
                            } else {
                                r.clone()
                            }
                        })
                        .collect(),
                })
                .collect(),
        )
    }

    /// `(t, s) -> (s, t)`
    pub fn transpose(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| {
                    let rows = t.coeffs.len();
                    let cols = t.coeffs.first().map_or(0, |r| r.len());
                    let coeffs = (0..cols).map(|j| (0..rows).map(|i| t.coeffs[i][j]).collect()).collect();
                    BiTerm { exp_t: t.exp_s, exp_s: t.exp_t, coeffs }
                })
                .collect(),
        )
    }

    /// `f(t0, s)` as a function of `s`.
    pub fn at_t(&self, t0: f64) -> ExpPoly {
        let tc = C64::new(t0, 0.0);
        ExpPoly::from_terms(
            self.terms
                .iter()
                .map(|t| {
                    let mut p: Vec<C64> = Vec::new();
                    for (i, row) in t.coeffs.iter().enumerate() {
                        poly::add_scaled(&mut p, row, tc.powu(i as u32));
                    }
                    let w = (t.exp_t * tc).exp();
                    ExpTerm { exponent: t.exp_s, poly: p.into_iter().map(|c| c * w).collect() }
                })
                .collect(),
        )
    }

    /// `∫_{lo}^{hi} f(t, s) ds` with limits that are constants or affine in `t`.
    /// Returns a function of `t`.
    pub fn integrate_s(&self, lo: Endpoint, hi: Endpoint) -> ExpPoly {
        assert!(
            !matches!(lo, Endpoint::InS { .. }) && !matches!(hi, Endpoint::InS { .. }),
            "limits of an s-integral cannot depend on s"
        );
        let mut out = Vec::new();
        for term in &self.terms {
            for (i, row) in term.coeffs.iter().enumerate() {
                let q = poly::antiderivative(row, term.exp_s);
                let prim = ExpPoly::term(term.exp_s, q);
                let at = |e: Endpoint| -> ExpPoly {
                    match e {
                        Endpoint::Const(x) => ExpPoly::constant(prim.eval(x)),
                        Endpoint::InT { slope, offset } => prim.compose_affine(slope, offset),
                        Endpoint::InS { .. } => unreachable!(),
                    }
                };
                let diff = &at(hi) - &at(lo);
                let mut shift = vec![ZERO; i + 1];
                shift[i] = ONE;
                let factor = ExpPoly::term(term.exp_t, shift);
                out.extend((&diff * &factor).terms().iter().cloned());
            }
        }
        ExpPoly::from_terms(out)
    }

    /// Multiplies by `g(s)`.
    pub fn mul_s(&self, g: &ExpPoly) -> Self {
        self * &Self::from_s(g)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .iter()
            .flat_map(|t| t.coeffs.iter().flatten())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

impl Add for &BivariateExpPoly {
    type Output = BivariateExpPoly;
    fn add(self, rhs: &BivariateExpPoly) -> BivariateExpPoly {
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        BivariateExpPoly::from_terms(terms)
    }
}

impl Add for BivariateExpPoly {
    type Output = BivariateExpPoly;
    fn add(self, rhs: BivariateExpPoly) -> BivariateExpPoly {
        &self + &rhs
    }
}

impl Neg for &BivariateExpPoly {
    type Output = BivariateExpPoly;
    fn neg(self) -> BivariateExpPoly {
        self.scale(-ONE)
    }
}

impl Sub for &BivariateExpPoly {
    type Output = BivariateExpPoly;
    fn sub(self, rhs: &BivariateExpPoly) -> BivariateExpPoly {
        self + &(-rhs)
    }
}

impl Mul for &BivariateExpPoly {
    type Output = BivariateExpPoly;
    fn mul(self, rhs: &BivariateExpPoly) -> BivariateExpPoly {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &rhs.terms {
                let mut m: Vec<Vec<C64>> = Vec::new();
                for (i, arow) in a.coeffs.iter().enumerate() {
                    for (j, av) in arow.iter().enumerate() {
                        if *av == ZERO {
                            continue;
                        }
                        add_matrix(&mut m, &b.coeffs, *av, i, j);
                    }
                }
                terms.push(BiTerm { exp_t: a.exp_t + b.exp_t, exp_s: a.exp_s + b.exp_s, coeffs: m });
            }
        }
        BivariateExpPoly::from_terms(terms)
    }
}

/// `∫_lo^hi a(t, r) b(r, s) dr` where `a` is read as a function of `(t, r)`
/// and `b` of `(r, s)`. Limits may be constants, `t`, or `s` (affine allowed).
pub fn integrate_middle(
    a: &BivariateExpPoly,
    b: &BivariateExpPoly,
    lo: Endpoint,
    hi: Endpoint,
) -> BivariateExpPoly {
    let mut out: Vec<BiTerm> = Vec::new();
    for ta in a.terms() {
        for tb in b.terms() {
            let kappa = snap(ta.exp_s + tb.exp_t);
            let rows_b = tb.coeffs.len();
            let cols_b = tb.coeffs.first().map_or(0, |r| r.len());
            for (i, arow) in ta.coeffs.iter().enumerate() {
                for l in 0..cols_b {
                    // r-polynomial: sum_j sum_k a[i][j] b[k][l] r^{j+k}
                    let bcol: Vec<C64> = (0..rows_b).map(|k| tb.coeffs[k][l]).collect();
                    let mut rp = poly::mul(arow, &bcol);
                    poly::trim(&mut rp);
                    if rp.is_empty() {
                        continue;
                    }
                    let q = poly::antiderivative(&rp, kappa);
                    for (e, sign) in [(hi, ONE), (lo, -ONE)] {
                        push_endpoint(&mut out, &q, kappa, e, sign, ta.exp_t, tb.exp_s, i, l);
                    }
                }
            }
        }
    }
    BivariateExpPoly::from_terms(out)
}

#[allow(clippy::too_many_arguments)]
fn push_endpoint(
    out: &mut Vec<BiTerm>,
    q: &[C64],
    kappa: C64,
    e: Endpoint,
    sign: C64,
    exp_t: C64,
    exp_s: C64,
    i: usize,
    l: usize,
) {
    // Q(r) e^{kappa r} at r = e, times t^i s^l e^{exp_t t + exp_s s}
    match e {
        Endpoint::Const(x) => {
            let xc = C64::new(x, 0.0);
            let v = poly::eval(q, xc) * (kappa * xc).exp() * sign;
            let mut m = vec![vec![ZERO; l + 1]; i + 1];
            m[i][l] = v;
            out.push(BiTerm { exp_t, exp_s, coeffs: m });
        }
        Endpoint::InT { slope, offset } => {
            let p = poly::compose_affine(q, slope, offset);
            let w = (kappa * offset).exp() * sign;
            let mut m = vec![vec![ZERO; l + 1]; i + p.len()];
            for (d, c) in p.iter().enumerate() {
                m[i + d][l] = c * w;
            }
            out.push(BiTerm { exp_t: exp_t + kappa * slope, exp_s, coeffs: m });
        }
        Endpoint::InS { slope, offset } => {
            let p = poly::compose_affine(q, slope, offset);
            let w = (kappa * offset).exp() * sign;
            let mut m = vec![vec![ZERO; l + p.len()]; i + 1];
            for (d, c) in p.iter().enumerate() {
                m[i][l + d] = c * w;
            }
            out.push(BiTerm { exp_t, exp_s: exp_s + kappa * slope, coeffs: m });
        }
    }
}

/// Definite integral of a univariate exponential polynomial between limits
/// that may be concrete or symbolic in `t` / `s`. A symbolic limit makes the
/// result a function of that variable; with concrete limits it is constant.
pub fn antideriv_definite(a: &ExpPoly, lower: Endpoint, upper: Endpoint) -> BivariateExpPoly {
    let prim = a.antiderivative();
    let at = |e: Endpoint| match e {
        Endpoint::Const(x) => BivariateExpPoly::constant(prim.eval(x)),
        Endpoint::InT { slope, offset } => BivariateExpPoly::from_t(&prim.compose_affine(slope, offset)),
        Endpoint::InS { slope, offset } => BivariateExpPoly::from_s(&prim.compose_affine(slope, offset)),
    };
    &at(upper) - &at(lower)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn sample_bi() -> BivariateExpPoly {
        BivariateExpPoly::from_terms(vec![
            BiTerm {
                exp_t: r(0.5),
                exp_s: r(-1.0),
                coeffs: vec![vec![r(1.0), r(2.0)], vec![r(-0.5), r(0.0)]],
            },
            BiTerm { exp_t: C64::new(0.0, 1.0), exp_s: ZERO, coeffs: vec![vec![r(0.0), r(1.0)]] },
        ])
    }

    #[test]
    fn difference_matches_pointwise() {
        let f = ExpPoly::term(r(0.7), vec![r(1.0), r(-2.0), r(0.25)]);
        let g = BivariateExpPoly::from_difference(&f);
        for (t, s) in [(0.3, -0.2), (-0.9, 0.4), (1.0, 1.0)] {
            assert!((g.eval(t, s) - f.eval(t - s)).norm() < 1e-13);
        }
    }

    #[test]
    fn transpose_and_reflect_pointwise() {
        let g = sample_bi();
        for (t, s) in [(0.3, -0.2), (-0.9, 0.4)] {
            assert!((g.transpose().eval(t, s) - g.eval(s, t)).norm() < 1e-14);
            assert!((g.reflect_t().eval(t, s) - g.eval(-t, s)).norm() < 1e-14);
        }
        assert_eq!(g.transpose().transpose(), g);
    }

    #[test]
    fn diff_t_matches_finite_difference() {
        let g = sample_bi();
        let d = g.diff_t();
        let h = 1e-6;
        for (t, s) in [(0.3, -0.2), (-0.9, 0.4)] {
            let fd = (g.eval(t + h, s) - g.eval(t - h, s)) / (2.0 * h);
            assert!((d.eval(t, s) - fd).norm() < 1e-7);
        }
    }

    #[test]
    fn symbolic_upper_limit() {
        // ∫_{-1}^t e^r dr = e^t - e^{-1}
        let g = antideriv_definite(&ExpPoly::exp(ONE), Endpoint::Const(-1.0), Endpoint::t());
        for t in [-0.5, 0.0, 0.9] {
            let expect = f64::exp(t) - f64::exp(-1.0);
            assert!((g.eval(t, 123.0) - r(expect)).norm() < 1e-14);
        }
        let same = antideriv_definite(&ExpPoly::exp(ONE), Endpoint::s(), Endpoint::s());
        assert!(same.is_zero());
    }

    #[test]
    fn s_integral_with_affine_limits() {
        let g = sample_bi();
        let f = g.integrate_s(Endpoint::InT { slope: -1.0, offset: 0.0 }, Endpoint::Const(1.0));
        // trapezoid oracle on a fine grid
        for t in [0.2, -0.6] {
            let (a, b) = (-t, 1.0);
            let n = 20000;
            let h = (b - a) / n as f64;
            let mut acc = (g.eval(t, a) + g.eval(t, b)) * 0.5;
            for k in 1..n {
                acc += g.eval(t, a + k as f64 * h);
            }
            acc *= h;
            assert!((f.eval(t) - acc).norm() < 1e-7);
        }
    }

    #[test]
    fn middle_integral_against_quadrature() {
        let a = sample_bi();
        let b = sample_bi().transpose();
        let k = integrate_middle(&a, &b, Endpoint::s(), Endpoint::t());
        let (t, s) = (0.7, -0.4);
        let n = 20000;
        let h = (t - s) / n as f64;
        let f = |x: f64| a.eval(t, x) * b.eval(x, s);
        let mut acc = (f(s) + f(t)) * 0.5;
        for j in 1..n {
            acc += f(s + j as f64 * h);
        }
        acc *= h;
        assert!((k.eval(t, s) - acc).norm() < 1e-7);
    }
}
