//! The algebra ℝ[D, φ*] of constant-coefficient differential operators with
//! reflection, where `φ* u(t) = u(-t)`, `D^k φ* = (-1)^k φ* D^k` and `φ*φ* = Id`.

use std::fmt;

use crate::error::{Error, Result};
use crate::exppoly::{ExpPoly, PiecewiseKernel};
use crate::numeric::{fsum, C64};

/// Trailing coefficient pairs below this are dropped when computing the order.
pub const ORDER_TRIM_TOL: f64 = 1e-12;

/// `L = sum_k (a_k φ* + b_k) D^k`, i.e. `Lu(t) = sum a_k u^(k)(-t) + sum b_k u^(k)(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionOperator {
    a: Vec<f64>,
    b: Vec<f64>,
}

/// `S = sum_k c_k D^k` with `c_m ≠ 0`; the zero operator has no coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffPoly {
    c: Vec<f64>,
}

fn pad(v: &[f64], n: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    out.resize(n, 0.0);
    out
}

impl ReflectionOperator {
    /// Pads the shorter list with zeros and trims trailing all-zero pairs.
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.iter().chain(&b).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("operator coefficients must be finite".into()));
        }
        let n = a.len().max(b.len());
        let (mut a, mut b) = (pad(&a, n), pad(&b, n));
        while a.last().zip(b.last()).is_some_and(|(x, y)| x.abs() <= ORDER_TRIM_TOL && y.abs() <= ORDER_TRIM_TOL) {
            a.pop();
            b.pop();
        }
        Ok(Self { a, b })
    }

    pub fn identity() -> Self {
        Self { a: vec![0.0], b: vec![1.0] }
    }

    /// `D^k`
    pub fn derivative(k: usize) -> Self {
        let mut b = vec![0.0; k + 1];
        b[k] = 1.0;
        Self { a: vec![0.0; k + 1], b }
    }

    pub fn reflection() -> Self {
        Self { a: vec![1.0], b: vec![0.0] }
    }

    pub fn from_diff_poly(s: &DiffPoly) -> Self {
        Self::new(vec![0.0; s.c.len()], s.c.clone()).expect("finite by construction")
    }

    /// Coefficients of `φ* D^k`.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Coefficients of `D^k`.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Highest `k` with a nonzero pair; the zero operator has order 0.
    pub fn order(&self) -> usize {
        self.a.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_empty()
    }

    pub fn has_reflection(&self) -> bool {
        self.a.iter().any(|x| *x != 0.0)
    }

    /// The pure ℝ[D] part when the reflected part vanishes exactly.
    pub fn as_diff_poly(&self) -> Option<DiffPoly> {
        if self.has_reflection() {
            return None;
        }
        Some(DiffPoly::new(self.b.clone()))
    }

    /// Applies the operator to a function.
    pub fn apply(&self, u: &ExpPoly) -> ExpPoly {
        let mut acc = ExpPoly::zero();
        let mut d = u.clone();
        for k in 0..self.a.len() {
            if k > 0 {
                d = d.diff();
            }
            if self.b[k] != 0.0 {
                acc = &acc + &d.scale(C64::new(self.b[k], 0.0));
            }
            if self.a[k] != 0.0 {
                acc = &acc + &d.reflect().scale(C64::new(self.a[k], 0.0));
            }
        }
        acc
    }

    /// Applies the operator to the first variable of a kernel, piecewise.
    /// The reflected part acts on both the expressions and the regions, and
    /// the two contributions are summed over the common refinement.
    pub fn apply_kernel(&self, k: &PiecewiseKernel) -> Result<PiecewiseKernel> {
        let mut direct = PiecewiseKernel::zero(k.half_width());
        let mut reflected = PiecewiseKernel::zero(k.half_width());
        let mut d = k.clone();
        let mut has_direct = false;
        let mut has_reflected = false;
        for j in 0..self.a.len() {
            if j > 0 {
                d = d.map_exprs(|e| e.diff_t());
            }
            if self.b[j] != 0.0 {
                let scaled = d.map_exprs(|e| e.scale(C64::new(self.b[j], 0.0)));
                direct = if has_direct { sum_same_regions(&direct, &scaled) } else { scaled };
                has_direct = true;
            }
            if self.a[j] != 0.0 {
                let scaled = d.map_exprs(|e| e.scale(C64::new(self.a[j], 0.0)));
                reflected = if has_reflected { sum_same_regions(&reflected, &scaled) } else { scaled };
                has_reflected = true;
            }
        }
        match (has_direct, has_reflected) {
            (false, false) => Ok(PiecewiseKernel::zero(k.half_width())),
            (true, false) => Ok(direct),
            (false, true) => Ok(reflected.reflect_t()),
            (true, true) => direct.add(&reflected.reflect_t()),
        }
    }
}

fn sum_same_regions(x: &PiecewiseKernel, y: &PiecewiseKernel) -> PiecewiseKernel {
    let mut others = y.pieces().iter();
    x.map_exprs(|e| e + &others.next().expect("same piece count").expr)
}

/// Product `PQ` in ℝ[D, φ*].
///
/// `(a φ* + b) D^k (a' φ* + b') D^l = [b b' + (-1)^k a a'] D^{k+l}
///                                    + [a b' + (-1)^k b a'] φ* D^{k+l}`.
/// Each coefficient is an exactly rounded sum of the products, so results do
/// not depend on summation order.
pub fn compose(p: &ReflectionOperator, q: &ReflectionOperator) -> ReflectionOperator {
    if p.is_zero() || q.is_zero() {
        return ReflectionOperator { a: vec![], b: vec![] };
    }
    let n = p.a.len() + q.a.len() - 1;
    let mut pure: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut refl: Vec<Vec<f64>> = vec![Vec::new(); n];
    for k in 0..p.a.len() {
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        for l in 0..q.a.len() {
            pure[k + l].push(p.b[k] * q.b[l]);
            pure[k + l].push(sign * (p.a[k] * q.a[l]));
            refl[k + l].push(p.a[k] * q.b[l]);
            refl[k + l].push(sign * (p.b[k] * q.a[l]));
        }
    }
    ReflectionOperator::new(
        refl.into_iter().map(fsum).collect(),
        pure.into_iter().map(fsum).collect(),
    )
    .expect("finite products of finite coefficients")
}

/// The companion `R = sum a_k φ* D^k + sum (-1)^{k+1} b_k D^k`, for which `RL = LR ∈ ℝ[D]`.
pub fn companion(l: &ReflectionOperator) -> ReflectionOperator {
    let b = l
        .b
        .iter()
        .enumerate()
        .map(|(k, x)| if k % 2 == 0 { -x } else { *x })
        .collect();
    ReflectionOperator { a: l.a.clone(), b }
}

/// Coefficients of `RL` from the closed form
/// `c_k = 2 sum_{l<k/2} (-1)^l (a_l a_{k-l} - b_l b_{k-l}) + (-1)^{k/2} (a_{k/2}² - b_{k/2}²)`
/// for even `k` and `0` for odd `k`.
pub fn reduced_coefficients_closed_form(l: &ReflectionOperator) -> Vec<f64> {
    let n = l.order();
    if l.is_zero() {
        return Vec::new();
    }
    let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    (0..=2 * n)
        .map(|k| {
            if k % 2 == 1 {
                return 0.0;
            }
            let half = k / 2;
            let mut terms = Vec::new();
            for i in 0..half {
                let sign = if i % 2 == 1 { -1.0 } else { 1.0 };
                let aa = get(&l.a, i) * get(&l.a, k - i);
                let bb = get(&l.b, i) * get(&l.b, k - i);
                terms.extend([sign * aa, sign * aa, -sign * bb, -sign * bb]);
            }
            let sign = if half % 2 == 1 { -1.0 } else { 1.0 };
            let ah = get(&l.a, half);
            let bh = get(&l.b, half);
            terms.extend([sign * (ah * ah), -sign * (bh * bh)]);
            fsum(terms)
        })
        .collect()
}

/// `S = RL`, computed by composition and cross-checked against the closed form.
pub fn reduce(l: &ReflectionOperator) -> Result<DiffPoly> {
    let r = companion(l);
    let composed = compose(&r, l);
    let s = composed.as_diff_poly().ok_or_else(|| {
        Error::DegenerateReduction("RL kept a reflected part; commutation identity failed".into())
    })?;
    if s.c.iter().skip(1).step_by(2).any(|c| *c != 0.0) {
        return Err(Error::DegenerateReduction("RL has nonzero odd coefficients".into()));
    }
    let closed = DiffPoly::new(reduced_coefficients_closed_form(l));
    if closed != s {
        return Err(Error::DegenerateReduction(format!(
            "composition {:?} disagrees with closed form {:?}",
            s.c, closed.c
        )));
    }
    if s.is_zero() {
        return Err(Error::DegenerateReduction("RL is the zero operator".into()));
    }
    Ok(s)
}

impl DiffPoly {
    /// Trims trailing coefficients with `|c| ≤ ORDER_TRIM_TOL`.
    pub fn new(mut c: Vec<f64>) -> Self {
        while c.last().is_some_and(|x| x.abs() <= ORDER_TRIM_TOL) {
            c.pop();
        }
        Self { c }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn order(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn leading(&self) -> f64 {
        self.c.last().copied().unwrap_or(0.0)
    }

    pub fn complex_coeffs(&self) -> Vec<C64> {
        self.c.iter().map(|x| C64::new(*x, 0.0)).collect()
    }

    pub fn apply(&self, u: &ExpPoly) -> ExpPoly {
        ReflectionOperator::from_diff_poly(self).apply(u)
    }
}

fn fmt_terms(f: &mut fmt::Formatter<'_>, terms: &[(f64, String)]) -> fmt::Result {
    let mut first = true;
    for (c, name) in terms {
        if *c == 0.0 {
            continue;
        }
        if first {
            write!(f, "{c}{name}")?;
        } else if *c < 0.0 {
            write!(f, " - {}{name}", -c)?;
        } else {
            write!(f, " + {c}{name}")?;
        }
        first = false;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

fn d_power(k: usize) -> String {
    match k {
        0 => String::new(),
        1 => "·D".into(),
        _ => format!("·D^{k}"),
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<_> = self.c.iter().enumerate().rev().map(|(k, c)| (*c, d_power(k))).collect();
        fmt_terms(f, &terms)
    }
}

impl fmt::Display for ReflectionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for k in (0..self.a.len()).rev() {
            terms.push((self.a[k], format!("·φ*{}", d_power(k))));
            terms.push((self.b[k], d_power(k)));
        }
        fmt_terms(f, &terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn op(a: &[f64], b: &[f64]) -> ReflectionOperator {
        ReflectionOperator::new(a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn commutative_subring() {
        let p = op(&[0.0, 0.0], &[1.0, 1.0]);
        let q = op(&[0.0, 0.0], &[-1.0, 1.0]);
        assert_eq!(compose(&p, &q), op(&[0.0, 0.0, 0.0], &[-1.0, 0.0, 1.0]));
    }

    #[test]
    fn non_unique_factorization_example() {
        // (φ*D + φ*)² = 1 - D²
        let p = op(&[1.0, 1.0], &[0.0, 0.0]);
        assert_eq!(compose(&p, &p), op(&[0.0, 0.0, 0.0], &[1.0, 0.0, -1.0]));
    }

    #[test]
    fn sign_rule() {
        let got = compose(&ReflectionOperator::derivative(1), &ReflectionOperator::reflection());
        assert_eq!(got, op(&[0.0, -1.0], &[0.0, 0.0]));
    }

    #[test]
    fn companions() {
        let l = op(&[1.0, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(companion(&l), op(&[1.0, 0.0, 0.0, 0.0], &[-1.0, 0.0, 0.0, 1.0]));
        let r2 = 2f64.sqrt();
        let l = op(&[r2, 1.0], &[1.0, 0.0]);
        assert_eq!(companion(&l), op(&[r2, 1.0], &[-1.0, 0.0]));
        let d = ReflectionOperator::derivative(1);
        assert_eq!(companion(&d), d);
    }

    #[test]
    fn reductions() {
        let l = op(&[1.0, 0.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(reduce(&l).unwrap().coeffs(), &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let r2 = 2f64.sqrt();
        let s = reduce(&op(&[r2, 1.0], &[1.0, 0.0])).unwrap();
        assert_eq!(s.order(), 2);
        assert!((s.coeffs()[0] - 1.0).abs() < 1e-12);
        assert_eq!(s.coeffs()[1], 0.0);
        assert!((s.coeffs()[2] + 1.0).abs() < 1e-12);
        let degenerate = op(&[0.0, 0.0, 0.0, 1.0], &[0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(reduce(&degenerate), Err(Error::DegenerateReduction(_))));
    }

    #[test]
    fn apply_examples() {
        let d2m1 = op(&[0.0, 0.0, 0.0], &[-1.0, 0.0, 1.0]);
        assert!(d2m1.apply(&ExpPoly::exp(C64::new(1.0, 0.0))).is_zero());
        let sin = ExpPoly::sin(1.0);
        assert_eq!(ReflectionOperator::reflection().apply(&sin), -&sin);
        let r = op(&[1.0, 0.0, 0.0, 0.0], &[-1.0, 0.0, 0.0, 1.0]);
        let f = r.apply(&sin);
        for t in [-0.8, 0.1, 0.6] {
            // h''' + h(-t) - h for h = sin
            assert!((f.eval(t) - C64::new(-t.cos() - 2.0 * t.sin(), 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn trims_trailing_zero_pairs() {
        let l = op(&[1.0, 0.0, 0.0], &[0.0, 2.0, 1e-13]);
        assert_eq!(l.order(), 1);
    }

    fn random_operator() -> impl Strategy<Value = ReflectionOperator> {
        (1usize..=4).prop_flat_map(|n| {
            (prop::collection::vec(-3.0f64..3.0, n + 1), prop::collection::vec(-3.0f64..3.0, n + 1))
                .prop_map(|(a, b)| ReflectionOperator::new(a, b).unwrap())
        })
    }

    fn random_exppoly() -> impl Strategy<Value = ExpPoly> {
        prop::collection::vec((-1.5f64..1.5, -2.0f64..2.0, -1.0f64..1.0, 0usize..3), 1..4).prop_map(|terms| {
            terms.into_iter().fold(ExpPoly::zero(), |acc, (re, im, c, k)| {
                let e = ExpPoly::exp(C64::new(re, im));
                &acc + &(&e * &ExpPoly::monomial(k, C64::new(c, 0.0)))
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn companion_commutes(l in random_operator()) {
            let r = companion(&l);
            prop_assert_eq!(compose(&r, &l), compose(&l, &r));
        }

        #[test]
        fn reduction_is_pure(l in random_operator()) {
            let rl = compose(&companion(&l), &l);
            prop_assert!(!rl.has_reflection());
            prop_assert!(rl.b().iter().skip(1).step_by(2).all(|c| *c == 0.0));
            prop_assert_eq!(rl.b().to_vec().tap_trim(), reduced_coefficients_closed_form(&l).tap_trim());
        }

        #[test]
        fn extreme_coefficients(l in random_operator()) {
            let c = reduced_coefficients_closed_form(&l);
            let n = l.order();
            let (a, b) = (l.a(), l.b());
            prop_assert_eq!(c[0], fsum([a[0] * a[0], -(b[0] * b[0])]));
            let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
            prop_assert_eq!(c[2 * n], sign * fsum([a[n] * a[n], -(b[n] * b[n])]));
        }

        #[test]
        fn application_is_a_homomorphism(p in random_operator(), q in random_operator(), u in random_exppoly()) {
            let lhs = compose(&p, &q).apply(&u);
            let rhs = p.apply(&q.apply(&u));
            for i in 0..20 {
                let t = -1.0 + 0.1 * i as f64 + 0.03;
                let (x, y) = (lhs.eval(t), rhs.eval(t));
                prop_assert!((x - y).norm() <= 1e-10 * (1.0 + x.norm().max(y.norm())));
            }
        }
    }

    trait TapTrim {
        fn tap_trim(self) -> Vec<f64>;
    }

    impl TapTrim for Vec<f64> {
        fn tap_trim(self) -> Vec<f64> {
            DiffPoly::new(self).coeffs().to_vec()
        }
    }
}
