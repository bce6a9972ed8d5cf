//! Splitting an even polynomial `p(x) = α_{2n} q(x) q₋(x)` with `q₋(x) = (-1)^n q(-x)`.

use crate::error::{Error, Result};
use crate::exppoly::poly;
use crate::numeric::{C64, ONE, ZERO};
use crate::operator::{DiffPoly, ReflectionOperator};
use crate::roots::roots;

/// Coefficients below this fraction of the largest one count as zero when
/// detecting the root of `p̃` at the origin.
const ZERO_ROOT_TOL: f64 = 1e-12;
const REAL_TOL: f64 = 1e-9;

/// `p(x) = sum_k alpha[k] x^{2k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvenPoly {
    alpha: Vec<f64>,
}

impl EvenPoly {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.last().is_none_or(|a| *a == 0.0) {
            return Err(Error::InvalidInput("even polynomial needs a nonzero leading coefficient".into()));
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidInput("coefficients must be finite".into()));
        }
        Ok(Self { alpha })
    }

    /// Requires all odd coefficients to be exactly zero.
    pub fn from_diff_poly(s: &DiffPoly) -> Result<Self> {
        let c = s.coeffs();
        if c.iter().skip(1).step_by(2).any(|x| *x != 0.0) {
            return Err(Error::InvalidInput("operator has odd-order terms".into()));
        }
        if c.len() % 2 == 0 {
            return Err(Error::InvalidInput("operator has odd order".into()));
        }
        Self::new(c.iter().step_by(2).copied().collect())
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Half the degree.
    pub fn n(&self) -> usize {
        self.alpha.len() - 1
    }

    /// Coefficients in `x`, ascending.
    pub fn full_coeffs(&self) -> Vec<f64> {
        let mut out = vec![0.0; 2 * self.n() + 1];
        for (k, a) in self.alpha.iter().enumerate() {
            out[2 * k] = *a;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    pub leading: f64,
    /// Monic, ascending.
    pub q: Vec<C64>,
    pub q_minus: Vec<C64>,
    pub all_real: bool,
}

impl Factorization {
    fn new(leading: f64, q: Vec<C64>, q_minus: Vec<C64>) -> Self {
        let all_real = q.iter().all(|c| c.im.abs() <= REAL_TOL);
        Self { leading, q, q_minus, all_real }
    }

    /// `leading · q · q₋`
    pub fn expand(&self) -> Vec<C64> {
        poly::mul(&self.q, &self.q_minus).into_iter().map(|c| c * self.leading).collect()
    }

    /// Largest coefficient error of the expansion against `p`.
    pub fn reconstruction_error(&self, p: &EvenPoly) -> f64 {
        let full = p.full_coeffs();
        let e = self.expand();
        (0..full.len().max(e.len()))
            .map(|k| (e.get(k).copied().unwrap_or(ZERO) - full.get(k).copied().unwrap_or(0.0)).norm())
            .fold(0.0, f64::max)
    }

    /// The same split with `q` and `q₋` exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.leading, self.q_minus.clone(), self.q.clone())
    }

    /// `q` as a real operator when its imaginary parts are negligible.
    pub fn real_q(&self) -> Option<DiffPoly> {
        self.all_real.then(|| DiffPoly::new(self.q.iter().map(|c| c.re).collect()))
    }
}

/// `q₋(x) = sum_k (-1)^{k+n} q_k x^k` for `q` of degree `n`.
pub fn opposite_poly(q: &[C64]) -> Vec<C64> {
    let n = q.len().saturating_sub(1);
    q.iter()
        .enumerate()
        .map(|(k, c)| if (k + n) % 2 == 1 { -c } else { *c })
        .collect()
}

/// Splits `p` through the roots of `p̃(y) = sum alpha_k y^k`. Each root of `p̃`
/// contributes to `q` the square roots of `y` lying in the closed right
/// half-plane (upper half on the imaginary axis), and `q₋` gets their negatives.
/// Both factors are built by mirrored product sequences, so `q₋` equals
/// `opposite_poly(q)` exactly.
pub fn factor_even(p: &EvenPoly) -> Result<Factorization> {
    let alpha = &p.alpha;
    let n = p.n();
    let biggest = alpha.iter().map(|a| a.abs()).fold(0.0, f64::max);
    let sigma = alpha.iter().take_while(|a| a.abs() <= ZERO_ROOT_TOL * biggest).count();

    let mut q = vec![ONE];
    let mut q_minus = vec![ONE];
    let mut push = |f: Vec<C64>| {
        q_minus = poly::mul(&q_minus, &opposite_poly(&f));
        q = poly::mul(&q, &f);
    };
    for _ in 0..sigma {
        push(vec![ZERO, ONE]);
    }
    if sigma < n {
        let reduced: Vec<C64> = alpha[sigma..].iter().map(|a| C64::new(*a, 0.0)).collect();
        let ys = roots(&reduced)?;
        for (y, m) in ys {
            let factor = if y.im == 0.0 {
                if y.re > 0.0 {
                    vec![C64::new(-y.re.sqrt(), 0.0), ONE]
                } else {
                    vec![C64::new(0.0, -(-y.re).sqrt()), ONE]
                }
            } else if y.im > 0.0 {
                // y and its conjugate together: x² - x·sqrt(2ν - μ) + ν, ν = |y|, μ = -2 Re y
                let nu = y.norm();
                let mu = -2.0 * y.re;
                vec![C64::new(nu, 0.0), C64::new(-(2.0 * nu - mu).max(0.0).sqrt(), 0.0), ONE]
            } else {
                continue;
            };
            for _ in 0..m {
                push(factor.clone());
            }
        }
    }
    if q.len() != n + 1 {
        return Err(Error::ConvergenceFailure(format!(
            "root pairing produced degree {} instead of {n}",
            q.len() - 1
        )));
    }
    Ok(Factorization::new(alpha[n], q, q_minus))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DescartesVerdict {
    Guaranteed,
    Inconclusive,
}

/// Sufficient test that `p̃` has no negative real roots: every coefficient of
/// `p̃(-y)`, normalized so the leading one is positive, is nonnegative.
pub fn descartes_no_negative_roots(ptilde: &[f64]) -> DescartesVerdict {
    let Some(last) = ptilde.iter().rposition(|c| *c != 0.0) else {
        return DescartesVerdict::Inconclusive;
    };
    let sign = if last % 2 == 1 { -ptilde[last].signum() } else { ptilde[last].signum() };
    let ok = ptilde[..=last]
        .iter()
        .enumerate()
        .all(|(k, c)| sign * if k % 2 == 1 { -c } else { *c } >= 0.0);
    if ok {
        DescartesVerdict::Guaranteed
    } else {
        DescartesVerdict::Inconclusive
    }
}

/// Candidate real factors `q = D² + α₁D + α₀` of the reduced operator of a
/// second-order `L`, from the explicit solution of `α₀² = c₀/A`,
/// `2α₀ - α₁² = c₂/A` with `A = a₂² - b₂²`.
pub fn factor_n2_closed_form(l: &ReflectionOperator) -> Result<Vec<Factorization>> {
    if l.order() != 2 {
        return Err(Error::InvalidInput(format!("closed form needs order 2, got {}", l.order())));
    }
    let (a, b) = (l.a(), l.b());
    let big_a = a[2] * a[2] - b[2] * b[2];
    if big_a == 0.0 {
        return Err(Error::DegenerateReduction("a₂² = b₂², the reduced operator loses order".into()));
    }
    let c0 = a[0] * a[0] - b[0] * b[0];
    let c2 = -a[1] * a[1] + 2.0 * a[0] * a[2] + b[1] * b[1] - 2.0 * b[0] * b[2];
    let (qa, qb, qc) = (big_a, c2, c0);
    let root_ac = (qa * qc).max(0.0).sqrt();
    let xis: &[f64] = if qa * qc > 0.0 && qb.abs() < 2.0 * root_ac {
        &[1.0]
    } else if (qa >= 0.0 && qc >= 0.0 && -qb >= 2.0 * root_ac) || (qa <= 0.0 && qc <= 0.0 && qb >= 2.0 * root_ac) {
        &[1.0, -1.0]
    } else {
        return Err(Error::NoRealFactorization(format!(
            "A = {qa}, c₂ = {qb}, c₀ = {qc} fit neither real case"
        )));
    };
    let p = EvenPoly::new(vec![c0, c2, big_a])?;
    let scale = p.alpha.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut out: Vec<Factorization> = Vec::new();
    for &xi in xis {
        let alpha0 = xi * (c0 / big_a).max(0.0).sqrt();
        let radicand = (2.0 * xi * big_a.signum() * (c0 * big_a).max(0.0).sqrt() - c2) / big_a;
        let alpha1 = radicand.max(0.0).sqrt();
        for s in [1.0, -1.0] {
            let q = vec![C64::new(alpha0, 0.0), C64::new(s * alpha1, 0.0), ONE];
            let f = Factorization::new(big_a, q.clone(), opposite_poly(&q));
            if f.reconstruction_error(&p) > 1e-8 * scale {
                continue;
            }
            if !out.iter().any(|g| g.q == f.q) {
                out.push(f);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::NoRealFactorization("no candidate reproduces the reduced operator".into()));
    }
    Ok(out)
}
