//! Green's functions of constant-coefficient two-point problems as piecewise
//! exponential-polynomial kernels.

use crate::boundary::BoundarySpec;
use crate::error::{Error, Result};
use crate::exppoly::{integrate_middle, BivariateExpPoly, Endpoint, ExpPoly, PiecewiseKernel};
use crate::numeric::{solve_dense, C64, ONE, ZERO};
use crate::operator::DiffPoly;
use crate::roots::roots;

/// Equilibrated pivots below this make the boundary matrix singular.
pub const PIVOT_TOL: f64 = 1e-10;
const VERIFY_TOL: f64 = 1e-7;

/// `S u = h` on `[-T, T]` with `m` conditions, `S = sum c_k D^k` of order `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct BVProblem {
    coeffs: Vec<C64>,
    conditions: BoundarySpec,
}

impl BVProblem {
    pub fn new(coeffs: Vec<C64>, conditions: BoundarySpec) -> Result<Self> {
        let mut coeffs = coeffs;
        while coeffs.last().is_some_and(|c| *c == ZERO) {
            coeffs.pop();
        }
        if coeffs.len() < 2 {
            return Err(Error::InvalidInput("operator must have order ≥ 1".into()));
        }
        if coeffs.len() - 1 != conditions.order() {
            return Err(Error::InvalidInput(format!(
                "operator of order {} with {} conditions",
                coeffs.len() - 1,
                conditions.order()
            )));
        }
        Ok(Self { coeffs, conditions })
    }

    pub fn from_diff_poly(s: &DiffPoly, conditions: BoundarySpec) -> Result<Self> {
        Self::new(s.complex_coeffs(), conditions)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn conditions(&self) -> &BoundarySpec {
        &self.conditions
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn half_width(&self) -> f64 {
        self.conditions.half_width()
    }

    pub fn leading(&self) -> C64 {
        self.coeffs[self.order()]
    }

    /// `S u` for a function `u`.
    pub fn apply(&self, u: &ExpPoly) -> ExpPoly {
        apply_coeffs(&self.coeffs, u)
    }
}

fn apply_coeffs(c: &[C64], u: &ExpPoly) -> ExpPoly {
    let mut acc = ExpPoly::zero();
    let mut d = u.clone();
    for (k, ck) in c.iter().enumerate() {
        if k > 0 {
            d = d.diff();
        }
        if *ck != ZERO {
            acc = &acc + &d.scale(*ck);
        }
    }
    acc
}

/// `t^j e^{λt}` for every characteristic root `λ` of multiplicity above `j`.
pub fn fundamental_set(coeffs: &[C64]) -> Result<Vec<ExpPoly>> {
    let mut basis = Vec::new();
    for (lambda, mult) in roots(coeffs)? {
        for j in 0..mult {
            basis.push(ExpPoly::term(lambda, monomial(j)));
        }
    }
    Ok(basis)
}

fn monomial(j: usize) -> Vec<C64> {
    let mut p = vec![ZERO; j + 1];
    p[j] = ONE;
    p
}

/// The homogeneous solution with `K^(k)(0) = 0` for `k < m - 1` and
/// `K^(m-1)(0) = 1/c_m`.
pub fn impulse_response(coeffs: &[C64], basis: &[ExpPoly]) -> Result<ExpPoly> {
    let m = basis.len();
    let wronskian: Vec<Vec<C64>> = (0..m)
        .map(|k| basis.iter().map(|y| y.diff_n(k).eval(0.0)).collect())
        .collect();
    let mut rhs = vec![ZERO; m];
    rhs[m - 1] = ONE / coeffs[m];
    let weights = solve_dense(&wronskian, rhs, 1e-14)
        .ok_or_else(|| Error::ConvergenceFailure("Wronskian at 0 is numerically singular".into()))?;
    Ok(basis
        .iter()
        .zip(&weights)
        .fold(ExpPoly::zero(), |acc, (y, w)| &acc + &y.scale(*w)))
}

/// `G(t, s) = H(t - s) K(t - s) + sum_i g_i(s) y_i(t)`, with the `g_i` fixed by
/// the boundary conditions. Two pieces: `s ≤ t` and `t < s`.
pub fn green_build(p: &BVProblem) -> Result<PiecewiseKernel> {
    let m = p.order();
    let t = p.half_width();
    let b = p.conditions();
    let basis = fundamental_set(&p.coeffs)?;
    let k = impulse_response(&p.coeffs, &basis)?;

    let derivs: Vec<Vec<ExpPoly>> = basis
        .iter()
        .map(|y| {
            let mut out = vec![y.clone()];
            for _ in 1..m {
                let next = out.last().expect("nonempty").diff();
                out.push(next);
            }
            out
        })
        .collect();
    let matrix: Vec<Vec<C64>> = (0..m)
        .map(|row| {
            (0..m)
                .map(|i| {
                    let minus: Vec<C64> = derivs[i].iter().map(|d| d.eval(-t)).collect();
                    let plus: Vec<C64> = derivs[i].iter().map(|d| d.eval(t)).collect();
                    b.functional(row, &minus, &plus)
                })
                .collect()
        })
        .collect();

    // only the s ≤ t piece reaches t = T, so K enters through beta alone
    let mut k_shifted = Vec::with_capacity(m);
    let mut kd = k.clone();
    for j in 0..m {
        if j > 0 {
            kd = kd.diff();
        }
        k_shifted.push(kd.compose_affine(-1.0, t));
    }
    let rhs: Vec<ExpPoly> = (0..m)
        .map(|row| {
            (0..m).fold(ExpPoly::zero(), |acc, j| {
                let beta = b.beta()[(row, j)];
                if beta == ZERO {
                    acc
                } else {
                    &acc - &k_shifted[j].scale(beta)
                }
            })
        })
        .collect();
    let g = solve_dense(&matrix, rhs, PIVOT_TOL).ok_or_else(|| {
        Error::NonUniqueBVP("boundary conditions are singular on the fundamental set".into())
    })?;

    let upper = basis
        .iter()
        .zip(&g)
        .fold(BivariateExpPoly::zero(), |acc, (y, gi)| &acc + &BivariateExpPoly::outer(y, gi));
    let lower = &upper + &BivariateExpPoly::from_difference(&k);
    Ok(PiecewiseKernel::diagonal(t, lower, upper))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub worst: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreenReport {
    pub checks: Vec<Check>,
}

impl GreenReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Checks a kernel against the defining properties of the Green's function of
/// `p`: defined on the whole square, continuity of `∂_t^k G` for `k ≤ m - 2` on
/// the diagonal, a jump of `1/c_m` in `∂_t^{m-1} G` (piece below minus piece
/// above), `S_t G = 0` off the diagonal, and the boundary conditions in `t`.
pub fn green_verify(p: &BVProblem, g: &PiecewiseKernel) -> GreenReport {
    green_verify_with(p, g, 21, 50)
}

pub fn green_verify_with(p: &BVProblem, g: &PiecewiseKernel, grid: usize, diagonal: usize) -> GreenReport {
    let m = p.order();
    let h = p.half_width();
    let step = 2.0 * h / grid as f64;
    let nudge = 1e-7 * h;
    let mut checks = Vec::new();

    let pts = crate::exppoly::off_diagonal_grid(h, grid);
    let covered = pts.iter().all(|(t, s)| g.eval(*t, *s).is_ok());
    checks.push(Check { name: "coverage", passed: covered, worst: if covered { 0.0 } else { 1.0 }, tolerance: 0.0 });

    let derivs: Vec<Vec<BivariateExpPoly>> = g
        .pieces()
        .iter()
        .map(|piece| {
            let mut out = vec![piece.expr.clone()];
            for _ in 0..m {
                let next = out.last().expect("nonempty").diff_t();
                out.push(next);
            }
            out
        })
        .collect();
    let piece_at = |t: f64, s: f64| g.locate(t, s).ok();

    // diagonal behaviour
    let mut cont_gap: f64 = 0.0;
    let mut cont_scale: f64 = 1.0;
    let mut jump_err: f64 = 0.0;
    let expected = ONE / p.leading();
    let mut diag_ok = true;
    for i in 0..diagonal {
        let s = -h + (i as f64 + 0.5) * 2.0 * h / diagonal as f64;
        let (Some(below), Some(above)) = (piece_at(s + nudge, s), piece_at(s - nudge, s)) else {
            diag_ok = false;
            continue;
        };
        for k in 0..m {
            let lo = derivs[below][k].eval(s, s);
            let up = derivs[above][k].eval(s, s);
            if k + 1 < m {
                cont_gap = cont_gap.max((lo - up).norm());
                cont_scale = cont_scale.max(lo.norm().max(up.norm()));
            } else {
                jump_err = jump_err.max(((lo - up) - expected).norm() / expected.norm());
            }
        }
    }
    let tol = VERIFY_TOL * cont_scale;
    checks.push(Check { name: "continuity", passed: diag_ok && cont_gap <= tol, worst: cont_gap, tolerance: tol });
    checks.push(Check { name: "jump", passed: diag_ok && jump_err <= VERIFY_TOL, worst: jump_err, tolerance: VERIFY_TOL });

    // S_t G = 0 away from the diagonal
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1.0;
    let mut annihilation_ok = true;
    for (t, s) in &pts {
        let Some(i) = piece_at(*t, *s) else {
            annihilation_ok = false;
            continue;
        };
        let mut total = ZERO;
        let mut mag = 0.0;
        for (k, c) in p.coeffs().iter().enumerate() {
            let v = c * derivs[i][k].eval(*t, *s);
            total += v;
            mag += v.norm();
        }
        worst = worst.max(total.norm());
        scale = scale.max(mag);
    }
    let tol = VERIFY_TOL * scale;
    checks.push(Check { name: "annihilation", passed: annihilation_ok && worst <= tol, worst, tolerance: tol });

    // boundary conditions in t for each fixed s
    let b = p.conditions();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1.0;
    let mut boundary_ok = true;
    for j in 0..grid {
        let s = -h + (j as f64 + 0.71) * step;
        let (Some(left), Some(right)) = (piece_at(-h + nudge, s), piece_at(h - nudge, s)) else {
            boundary_ok = false;
            continue;
        };
        let minus: Vec<C64> = (0..m).map(|k| derivs[left][k].eval(-h, s)).collect();
        let plus: Vec<C64> = (0..m).map(|k| derivs[right][k].eval(h, s)).collect();
        for row in 0..m {
            worst = worst.max(b.functional(row, &minus, &plus).norm());
            let mag: f64 = (0..m)
                .map(|k| (b.alpha()[(row, k)] * minus[k]).norm() + (b.beta()[(row, k)] * plus[k]).norm())
                .sum();
            scale = scale.max(mag);
        }
    }
    let tol = VERIFY_TOL * scale;
    checks.push(Check { name: "boundary", passed: boundary_ok && worst <= tol, worst, tolerance: tol });

    GreenReport { checks }
}

/// `∫ G1(t, r) G2(r, s) dr` over `[-T, T]`, for two kernels split by the diagonal.
pub fn compose_kernels(g1: &PiecewiseKernel, g2: &PiecewiseKernel) -> Result<PiecewiseKernel> {
    let t = g1.half_width();
    if g2.half_width() != t {
        return Err(Error::KernelStructure("kernels live on different squares".into()));
    }
    if g1.is_zero() || g2.is_zero() {
        return Ok(PiecewiseKernel::zero(t));
    }
    let (a1, b1) = g1.diagonal_pieces()?;
    let (a2, b2) = g2.diagonal_pieces()?;
    let (lo, hi) = (Endpoint::Const(-t), Endpoint::Const(t));
    let (ts, ss) = (Endpoint::t(), Endpoint::s());
    // s ≤ t: r < s < t, then s < r < t, then r > t
    let lower = &(&integrate_middle(a1, b2, lo, ss) + &integrate_middle(a1, a2, ss, ts)) + &integrate_middle(b1, a2, ts, hi);
    // t < s: r < t < s, then t < r < s, then r > s
    let upper = &(&integrate_middle(a1, b2, lo, ts) + &integrate_middle(b1, b2, ts, ss)) + &integrate_middle(b1, a2, ss, hi);
    Ok(PiecewiseKernel::diagonal(t, lower, upper))
}

/// `G(s, t)`.
pub fn transpose_kernel(g: &PiecewiseKernel) -> PiecewiseKernel {
    g.transpose()
}

/// `u(t) = ∫ G(t, s) h(s) ds`. The `s`-axis is cut at every region boundary;
/// the cut order is fixed on the longest `t`-interval without crossings, where
/// the integral is taken symbolically in `t`.
pub fn solve_with_kernel(g: &PiecewiseKernel, h: &ExpPoly) -> Result<ExpPoly> {
    let half = g.half_width();
    if h.is_zero() || g.is_zero() {
        return Ok(ExpPoly::zero());
    }
    // s = slope·t + offset
    let mut lines: Vec<(f64, f64)> = vec![(0.0, -half), (0.0, half)];
    for piece in g.pieces() {
        for c in &piece.region.constraints {
            if c.beta != 0.0 {
                let line = (-c.alpha / c.beta, -c.gamma / c.beta);
                if !lines.iter().any(|l| (l.0 - line.0).abs() < 1e-14 && (l.1 - line.1).abs() < 1e-14) {
                    lines.push(line);
                }
            }
        }
    }
    let mut cuts = vec![-half, half];
    for (i, a) in lines.iter().enumerate() {
        for b in &lines[i + 1..] {
            if a.0 != b.0 {
                let x = (b.1 - a.1) / (a.0 - b.0);
                if x > -half && x < half {
                    cuts.push(x);
                }
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    let (ta, tb) = cuts
        .windows(2)
        .map(|w| (w[0], w[1]))
        .fold((0.0, 0.0), |best, cur| if cur.1 - cur.0 > best.1 - best.0 { cur } else { best });
    let tm = 0.5 * (ta + tb);

    let mut at_mid: Vec<(f64, Endpoint)> = lines
        .iter()
        .map(|&(slope, offset)| {
            let v = slope * tm + offset;
            let e = if slope == 0.0 { Endpoint::Const(offset) } else { Endpoint::InT { slope, offset } };
            (v, e)
        })
        .filter(|(v, _)| *v >= -half && *v <= half)
        .collect();
    at_mid.sort_by(|x, y| x.0.total_cmp(&y.0));
    at_mid.dedup_by(|x, y| (x.0 - y.0).abs() <= 1e-12 * half);

    let mut u = ExpPoly::zero();
    for w in at_mid.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi.0 - lo.0 <= 1e-12 * half {
            continue;
        }
        let piece = g.locate(tm, 0.5 * (lo.0 + hi.0))?;
        let integrand = g.pieces()[piece].expr.mul_s(h);
        u = &u + &integrand.integrate_s(lo.1, hi.1);
    }
    Ok(u)
}
