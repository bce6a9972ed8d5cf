//! End-to-end solution of `Lu = h` with two-point conditions: reduce with the
//! companion `R`, build the Green's function of `RL` directly or through a
//! factorization `RL = L₂L₁`, and map it back with `R` acting on `t`.

use std::time::{Duration, Instant};

use crate::boundary::{conditions_residual, decompose_conditions, extend_conditions, BoundarySpec, DecomposedConditions, ExtendedBoundary};
use crate::error::{Error, Result};
use crate::exppoly::{poly, ExpPoly, PiecewiseKernel};
use crate::factor::{factor_even, EvenPoly, Factorization};
use crate::greens::{compose_kernels, green_build, green_verify, transpose_kernel, solve_with_kernel, BVProblem, GreenReport};
use crate::numeric::C64;
use crate::operator::{companion, reduce, DiffPoly, ReflectionOperator};

/// Grid size used when comparing kernels built by different routes.
pub const AGREEMENT_GRID: usize = 21;
pub const AGREEMENT_TOL: f64 = 1e-7;
pub const RESIDUAL_TOL: f64 = 1e-6;
pub const BOUNDARY_TOL: f64 = 1e-7;
const SHORTCUT_GRID: usize = 15;
const SHORTCUT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct DERProblem {
    l: ReflectionOperator,
    conditions: BoundarySpec,
    h: ExpPoly,
}

impl DERProblem {
    pub fn new(l: ReflectionOperator, conditions: BoundarySpec, h: ExpPoly) -> Result<Self> {
        if l.is_zero() || l.order() == 0 {
            return Err(Error::InvalidInput("operator must have order ≥ 1".into()));
        }
        if conditions.order() != l.order() {
            return Err(Error::InvalidInput(format!(
                "operator of order {} needs {} conditions, got {}",
                l.order(),
                l.order(),
                conditions.order()
            )));
        }
        Ok(Self { l, conditions, h })
    }

    pub fn operator(&self) -> &ReflectionOperator {
        &self.l
    }

    pub fn conditions(&self) -> &BoundarySpec {
        &self.conditions
    }

    pub fn rhs(&self) -> &ExpPoly {
        &self.h
    }

    pub fn half_width(&self) -> f64 {
        self.conditions.half_width()
    }

    pub fn order(&self) -> usize {
        self.l.order()
    }
}

/// `R`, `S = RL` and the `2n` conditions of the reduced problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub r: ReflectionOperator,
    pub s: DiffPoly,
    pub extended: ExtendedBoundary,
}

pub fn reduce_problem(p: &DERProblem) -> Result<Reduction> {
    let n = p.order();
    let r = companion(&p.l);
    let s = reduce(&p.l)?;
    if s.order() != 2 * n {
        return Err(Error::DegenerateReduction(format!(
            "RL has order {} instead of {}; the leading pair satisfies a_n = ±b_n",
            s.order(),
            2 * n
        )));
    }
    let extended = extend_conditions(&p.conditions, &r, 2 * n)?.eliminate();
    Ok(Reduction { r, s, extended })
}

/// `S = L₂L₁` with `L₁u = v`, `V u = 0` and `L₂v = Rh`, `Ṽ v = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredSystem {
    /// Monic.
    pub l1: Vec<C64>,
    pub l2: Vec<C64>,
    pub conds: DecomposedConditions,
    /// Leading coefficient of `S`, carried by `L₂`.
    pub scale: f64,
    pub factorization: Factorization,
    /// Whether `L₁ = q₋` rather than the canonical `q`.
    pub swapped: bool,
}

impl FactoredSystem {
    pub fn l1_real(&self) -> Option<DiffPoly> {
        real_poly(&self.l1)
    }

    pub fn l2_real(&self) -> Option<DiffPoly> {
        real_poly(&self.l2)
    }
}

fn real_poly(c: &[C64]) -> Option<DiffPoly> {
    c.iter().all(|z| z.im == 0.0).then(|| DiffPoly::new(c.iter().map(|z| z.re).collect()))
}

/// Tries `(L₁, L₂) = (q, c·q₋)` and then `(q₋, c·q)`.
pub fn factored_system(red: &Reduction, allow_complex: bool) -> Result<FactoredSystem> {
    let even = EvenPoly::from_diff_poly(&red.s)?;
    let f = factor_even(&even)?;
    if !f.all_real && !allow_complex {
        return Err(Error::ComplexFactorizationSkipped);
    }
    let scale = f.leading;
    let mut reasons = Vec::new();
    for (swapped, l1, other) in [(false, &f.q, &f.q_minus), (true, &f.q_minus, &f.q)] {
        let l1: Vec<C64> = if f.all_real { l1.iter().map(|z| C64::new(z.re, 0.0)).collect() } else { l1.clone() };
        let l2: Vec<C64> = other.iter().map(|z| if f.all_real { C64::new(z.re * scale, 0.0) } else { z * scale }).collect();
        match decompose_conditions(&red.extended, &l1) {
            Ok(conds) => {
                let product = poly::mul(&l2, &l1);
                let c = red.s.coeffs();
                let big = c.iter().map(|x| x.abs()).fold(0.0, f64::max);
                let err = (0..c.len().max(product.len()))
                    .map(|k| (product.get(k).copied().unwrap_or_default() - c.get(k).copied().unwrap_or(0.0)).norm())
                    .fold(0.0, f64::max);
                if err > 1e-8 * big {
                    return Err(Error::VerificationFailed(format!("L₂L₁ differs from S by {err:e}")));
                }
                return Ok(FactoredSystem { l1, l2, conds, scale, factorization: f.clone(), swapped });
            }
            Err(Error::NotDecomposable(why)) => reasons.push(why),
            Err(e) => return Err(e),
        }
    }
    Err(Error::NotDecomposable(reasons.join(" | ")))
}

/// `L₂` is the formal adjoint `sum (-1)^k c_k D^k` of `L₁` and the second
/// factor's kernel, built on its own, is the transpose of the first one.
pub fn adjoint_shortcut(g1: &PiecewiseKernel, sys: &FactoredSystem) -> Option<PiecewiseKernel> {
    if sys.l1.len() != sys.l2.len() {
        return None;
    }
    let scale = sys.l2.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let adjoint_matches = sys.l1.iter().enumerate().zip(&sys.l2).all(|((k, a), b)| {
        let adj = if k % 2 == 1 { -a } else { *a };
        (adj - b).norm() <= 1e-12 * scale
    });
    if !adjoint_matches {
        return None;
    }
    let second = BVProblem::new(sys.l2.clone(), sys.conds.v_tilde.clone()).ok()?;
    let g2 = green_build(&second).ok()?;
    let gt = transpose_kernel(g1);
    let size = 1.0 + g2.grid_max_abs(SHORTCUT_GRID).ok()?;
    let diff = gt.grid_max_diff(&g2, SHORTCUT_GRID).ok()?;
    (diff <= SHORTCUT_TOL * size).then_some(gt)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Direct,
    Factored,
    /// Factored, with the second kernel taken as the transpose of the first.
    FactoredAdjoint,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RoutePreference {
    Direct,
    Factored,
    /// Factored when the conditions split, direct otherwise.
    #[default]
    Auto,
    /// Both routes, cross-checked.
    Both,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveOptions {
    pub route: RoutePreference,
    pub allow_complex: bool,
}

/// Kernel of the reduced problem through one route.
#[derive(Clone, Debug)]
pub struct RouteKernel {
    pub kernel: PiecewiseKernel,
    pub route: Route,
    pub system: Option<FactoredSystem>,
}

pub fn direct_kernel(red: &Reduction) -> Result<RouteKernel> {
    let problem = BVProblem::from_diff_poly(&red.s, red.extended.as_boundary_spec())?;
    Ok(RouteKernel { kernel: green_build(&problem)?, route: Route::Direct, system: None })
}

pub fn factored_kernel(red: &Reduction, allow_complex: bool) -> Result<RouteKernel> {
    let sys = factored_system(red, allow_complex)?;
    let first = BVProblem::new(sys.l1.clone(), sys.conds.v.clone())?;
    let g1 = green_build(&first)?;
    let (g2, route) = match adjoint_shortcut(&g1, &sys) {
        Some(g2) => (g2, Route::FactoredAdjoint),
        None => {
            let second = BVProblem::new(sys.l2.clone(), sys.conds.v_tilde.clone())?;
            (green_build(&second)?, Route::Factored)
        }
    };
    Ok(RouteKernel { kernel: compose_kernels(&g1, &g2)?, route, system: Some(sys) })
}

#[derive(Clone, Debug)]
pub struct Diagnostics {
    /// Defining properties of the reduced kernel against the reduced problem.
    pub green: GreenReport,
    /// `max |Lu - h| / (1 + max |h|)` on the grid.
    pub residual: f64,
    /// Largest boundary residual relative to the size of the values involved.
    pub boundary_residual: f64,
    /// Grid gap between the two routes' DER kernels when both ran.
    pub route_agreement: Option<f64>,
    /// Why the preferred route was not taken.
    pub fallback: Option<String>,
}

#[derive(Clone, Debug)]
pub struct SolutionBundle {
    pub reduction: Reduction,
    pub g_reduced: PiecewiseKernel,
    pub g_der: PiecewiseKernel,
    /// `Rh`, the right-hand side of the reduced equation.
    pub f: ExpPoly,
    pub u: ExpPoly,
    pub route: Route,
    pub system: Option<FactoredSystem>,
    pub diagnostics: Diagnostics,
}

fn route_fallback_allowed(e: &Error) -> bool {
    matches!(
        e,
        Error::NotDecomposable(_) | Error::ComplexFactorizationSkipped | Error::NonUniqueBVP(_) | Error::NoRealFactorization(_)
    )
}

/// Grid gap between two kernels relative to their size.
pub fn relative_gap(a: &PiecewiseKernel, b: &PiecewiseKernel, n: usize) -> Result<f64> {
    let size = 1.0 + a.grid_max_abs(n)?.max(b.grid_max_abs(n)?);
    Ok(a.grid_max_diff(b, n)? / size)
}

pub fn solve_der(p: &DERProblem, opts: SolveOptions) -> Result<SolutionBundle> {
    let red = reduce_problem(p)?;
    let mut fallback = None;
    let mut agreement = None;
    let chosen = match opts.route {
        RoutePreference::Direct => direct_kernel(&red)?,
        RoutePreference::Factored => factored_kernel(&red, opts.allow_complex)?,
        RoutePreference::Auto => match factored_kernel(&red, opts.allow_complex) {
            Ok(k) => k,
            Err(e) if route_fallback_allowed(&e) => {
                fallback = Some(e.to_string());
                direct_kernel(&red)?
            }
            Err(e) => return Err(e),
        },
        RoutePreference::Both => {
            let (direct, factored) = std::thread::scope(|scope| {
                let d = scope.spawn(|| direct_kernel(&red));
                let f = factored_kernel(&red, opts.allow_complex);
                (d.join().expect("direct route panicked"), f)
            });
            let direct = direct?;
            match factored {
                Ok(f) => {
                    let gd = red.r.apply_kernel(&direct.kernel)?;
                    let gf = red.r.apply_kernel(&f.kernel)?;
                    let gap = relative_gap(&gd, &gf, AGREEMENT_GRID)?;
                    agreement = Some(gap);
                    if gap > AGREEMENT_TOL {
                        return Err(Error::VerificationFailed(format!(
                            "direct and factored kernels differ by {gap:e} (relative)"
                        )));
                    }
                }
                Err(e) if route_fallback_allowed(&e) => fallback = Some(e.to_string()),
                Err(e) => return Err(e),
            }
            direct
        }
    };
    finish(p, red, chosen, fallback, agreement)
}

fn finish(
    p: &DERProblem,
    red: Reduction,
    chosen: RouteKernel,
    fallback: Option<String>,
    route_agreement: Option<f64>,
) -> Result<SolutionBundle> {
    let reduced_problem = BVProblem::from_diff_poly(&red.s, red.extended.as_boundary_spec())?;
    let green = green_verify(&reduced_problem, &chosen.kernel);
    let g_der = red.r.apply_kernel(&chosen.kernel)?;
    let u = solve_with_kernel(&g_der, &p.h)?;

    let half = p.half_width();
    let grid: Vec<f64> = (0..AGREEMENT_GRID)
        .map(|i| -half + 2.0 * half * i as f64 / (AGREEMENT_GRID - 1) as f64)
        .collect();
    let lu = p.l.apply(&u);
    let h_size = 1.0 + grid.iter().map(|t| p.h.eval(*t).norm()).fold(0.0, f64::max);
    let residual = grid.iter().map(|t| (lu.eval(*t) - p.h.eval(*t)).norm()).fold(0.0, f64::max) / h_size;

    let n = p.order();
    let b = &p.conditions;
    let derivs: Vec<ExpPoly> = (0..n).map(|k| u.diff_n(k)).collect();
    let mut boundary_scale: f64 = 1.0;
    for k in 0..n {
        let mag: f64 = (0..n)
            .map(|j| (b.alpha()[(k, j)] * derivs[j].eval(-half)).norm() + (b.beta()[(k, j)] * derivs[j].eval(half)).norm())
            .sum();
        boundary_scale = boundary_scale.max(mag);
    }
    let boundary_residual = conditions_residual(b, &u).iter().map(|z| z.norm()).fold(0.0, f64::max) / boundary_scale;

    let f = red.r.apply(&p.h);

    if !(residual <= RESIDUAL_TOL) || !(boundary_residual <= BOUNDARY_TOL) {
        return Err(Error::VerificationFailed(format!(
            "solution residual {residual:e}, boundary residual {boundary_residual:e}"
        )));
    }
    Ok(SolutionBundle {
        reduction: red,
        g_reduced: chosen.kernel,
        g_der,
        f,
        u,
        route: chosen.route,
        system: chosen.system,
        diagnostics: Diagnostics { green, residual, boundary_residual, route_agreement, fallback },
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub repetitions: usize,
    pub direct_median: Option<Duration>,
    /// `None` when the factored route is unavailable.
    pub factored_median: Option<Duration>,
    pub factored_unavailable: Option<String>,
    pub max_discrepancy: Option<f64>,
}

fn median(mut v: Vec<Duration>) -> Option<Duration> {
    if v.is_empty() {
        return None;
    }
    v.sort();
    Some(v[v.len() / 2])
}

/// Median wall-clock time of building the DER kernel by each route.
pub fn bench(p: &DERProblem, repetitions: usize, allow_complex: bool) -> Result<BenchReport> {
    if repetitions == 0 {
        return Ok(BenchReport::default());
    }
    let red = reduce_problem(p)?;
    let mut direct_times = Vec::with_capacity(repetitions);
    let mut factored_times = Vec::with_capacity(repetitions);
    let mut direct = None;
    let mut factored = None;
    let mut unavailable = None;
    for _ in 0..repetitions {
        let start = Instant::now();
        let k = red.r.apply_kernel(&direct_kernel(&red)?.kernel)?;
        direct_times.push(start.elapsed());
        direct = Some(k);
        if unavailable.is_none() {
            let start = Instant::now();
            match factored_kernel(&red, allow_complex) {
                Ok(k) => {
                    let k = red.r.apply_kernel(&k.kernel)?;
                    factored_times.push(start.elapsed());
                    factored = Some(k);
                }
                Err(e) if route_fallback_allowed(&e) => unavailable = Some(e.to_string()),
                Err(e) => return Err(e),
            }
        }
    }
    let max_discrepancy = match (&direct, &factored) {
        (Some(d), Some(f)) => Some(relative_gap(d, f, AGREEMENT_GRID)?),
        _ => None,
    };
    Ok(BenchReport {
        repetitions,
        direct_median: median(direct_times),
        factored_median: median(factored_times),
        factored_unavailable: unavailable,
        max_discrepancy,
    })
}
