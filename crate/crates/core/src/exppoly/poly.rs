//! Dense complex polynomials stored ascending by degree.

use crate::numeric::{binomial, C64, ZERO};

pub fn trim(p: &mut Vec<C64>) {
    while p.last().is_some_and(|c| *c == ZERO) {
        p.pop();
    }
}

/// `a += scale * b`
pub fn add_scaled(a: &mut Vec<C64>, b: &[C64], scale: C64) {
    if a.len() < b.len() {
        a.resize(b.len(), ZERO);
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x += scale * y;
    }
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn eval(p: &[C64], x: C64) -> C64 {
    p.iter().rev().fold(ZERO, |acc, c| acc * x + c)
}

pub fn diff(p: &[C64]) -> Vec<C64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect()
}

/// `p(a x + b)` as a polynomial in `x`.
pub fn compose_affine(p: &[C64], a: f64, b: f64) -> Vec<C64> {
    let mut out = vec![ZERO; p.len()];
    // (a x + b)^k = sum_i C(k,i) a^i b^(k-i) x^i
    for (k, c) in p.iter().enumerate() {
        if *c == ZERO {
            continue;
        }
        for (i, slot) in out.iter_mut().enumerate().take(k + 1) {
            let w = binomial(k, i) * a.powi(i as i32) * b.powi((k - i) as i32);
            *slot += c * w;
        }
    }
    trim(&mut out);
    out
}

/// `Q` with `(Q(x) e^{kx})' = p(x) e^{kx}`; for `k == 0` the plain monomial rule.
pub fn antiderivative(p: &[C64], kappa: C64) -> Vec<C64> {
    if p.is_empty() {
        return Vec::new();
    }
    if kappa == ZERO {
        let mut q = vec![ZERO; p.len() + 1];
        for (k, c) in p.iter().enumerate() {
            q[k + 1] = c / (k + 1) as f64;
        }
        return q;
    }
    let n = p.len() - 1;
    let mut q = vec![ZERO; n + 1];
    q[n] = p[n] / kappa;
    for k in (0..n).rev() {
        q[k] = (p[k] - q[k + 1] * (k + 1) as f64) / kappa;
    }
    q
}

/// `p(-x)`
pub fn reflect(p: &[C64]) -> Vec<C64> {
    p.iter()
        .enumerate()
        .map(|(k, c)| if k % 2 == 1 { -c } else { *c })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn affine_composition() {
        // (2x + 1)^2 = 4x^2 + 4x + 1
        let p = vec![ZERO, ZERO, c(1.0)];
        assert_eq!(compose_affine(&p, 2.0, 1.0), vec![c(1.0), c(4.0), c(4.0)]);
    }

    #[test]
    fn antiderivative_satisfies_defining_ode() {
        let p = vec![c(1.0), c(-2.0), c(0.5)];
        let k = C64::new(0.3, -1.1);
        let q = antiderivative(&p, k);
        let mut lhs = diff(&q);
        add_scaled(&mut lhs, &q, k);
        for (a, b) in lhs.iter().zip(&p) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
