//! Small numeric kernels shared across modules: exactly rounded summation and a
//! pivoted dense solve whose right-hand side may live in any linear space.

use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Correctly rounded sum of `values` (Shewchuk partials with a final
/// half-even correction). The result does not depend on the input order.
pub fn fsum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }

    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        let yr = x - hi;
        if y == yr {
            hi = x;
        }
    }
    hi
}

/// Values that can appear on the right-hand side of [`solve_dense`].
pub trait LinearCombination: Clone {
    /// `self += a * x`
    fn axpy(&mut self, a: C64, x: &Self);
    fn scale(&mut self, a: C64);
}

impl LinearCombination for C64 {
    fn axpy(&mut self, a: C64, x: &Self) {
        *self += a * x;
    }
    fn scale(&mut self, a: C64) {
        *self *= a;
    }
}

/// Solves `m x = rhs` by Gaussian elimination with partial pivoting after row
/// and column equilibration. Returns `None` when the smallest equilibrated
/// pivot falls below `pivot_tol`.
pub fn solve_dense<R: LinearCombination>(
    m: &[Vec<C64>],
    mut rhs: Vec<R>,
    pivot_tol: f64,
) -> Option<Vec<R>> {
    let n = m.len();
    assert_eq!(rhs.len(), n, "rhs length must match matrix size");
    if n == 0 {
        return Some(rhs);
    }
    let mut a: Vec<Vec<C64>> = m.to_vec();

    for (row, b) in a.iter_mut().zip(rhs.iter_mut()) {
        let big = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if big == 0.0 {
            return None;
        }
        let r = 1.0 / big;
        row.iter_mut().for_each(|z| *z *= r);
        b.scale(C64::new(r, 0.0));
    }
    let mut col_scale = vec![1.0; n];
    for (j, cs) in col_scale.iter_mut().enumerate() {
        let big = a.iter().map(|row| row[j].norm()).fold(0.0, f64::max);
        if big == 0.0 {
            return None;
        }
        *cs = 1.0 / big;
        a.iter_mut().for_each(|row| row[j] *= *cs);
    }

    for k in 0..n {
        let (p, pivot_abs) = (k..n)
            .map(|i| (i, a[i][k].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs < pivot_tol {
            return None;
        }
        a.swap(k, p);
        rhs.swap(k, p);
        let pivot = a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / pivot;
            if f == ZERO {
                continue;
            }
            for j in k..n {
                let akj = a[k][j];
                a[i][j] -= f * akj;
            }
            let (head, tail) = rhs.split_at_mut(i);
            tail[0].axpy(-f, &head[k]);
        }
    }

    for k in (0..n).rev() {
        for j in k + 1..n {
            let (head, tail) = rhs.split_at_mut(j);
            head[k].axpy(-a[k][j], &tail[0]);
        }
        rhs[k].scale(1.0 / a[k][k]);
    }
    for (x, cs) in rhs.iter_mut().zip(col_scale) {
        x.scale(C64::new(cs, 0.0));
    }
    Some(rhs)
}

/// Binomial coefficient as a float; fine for the small degrees used here.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fsum_is_exact_on_cancelling_terms() {
        let xs = [1e16, 1.0, -1e16, 3.3, -3.3, -1.0];
        assert_eq!(fsum(xs), 0.0);
        assert_eq!(fsum([0.1; 10]), 1.0);
        let mut ys = vec![0.1, 0.2, 0.3, 1e-17, -0.6];
        let a = fsum(ys.clone());
        ys.reverse();
        assert_eq!(a, fsum(ys));
    }

    #[test]
    fn dense_solve_recovers_known_solution() {
        let m = vec![
            vec![C64::new(2.0, 0.0), C64::new(1.0, 1.0)],
            vec![C64::new(0.0, -1.0), C64::new(3.0, 0.0)],
        ];
        let x = [C64::new(1.0, -2.0), C64::new(0.5, 0.25)];
        let b: Vec<C64> = m
            .iter()
            .map(|row| row[0] * x[0] + row[1] * x[1])
            .collect();
        let got = solve_dense(&m, b, 1e-12).unwrap();
        for (g, e) in got.iter().zip(x) {
            assert!((g - e).norm() < 1e-14);
        }
    }

    #[test]
    fn dense_solve_flags_singular() {
        let m = vec![vec![ONE, ONE], vec![ONE, ONE]];
        assert!(solve_dense(&m, vec![ONE, ZERO], 1e-10).is_none());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(6, 0), 1.0);
        assert_eq!(factorial(5), 120.0);
    }
}
