//! Two-point boundary conditions, their extension through the companion
//! operator, and the split into conditions for a factored pair of problems.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exppoly::ExpPoly;
use crate::numeric::{C64, ZERO};
use crate::operator::ReflectionOperator;

/// Blocks with a larger condition number are treated as singular.
pub const KAPPA_MAX: f64 = 1e8;
/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-10;
/// Relative tolerance on the compatibility equation of the split.
pub const DECOMPOSE_TOL: f64 = 1e-8;

pub type CMatrix = DMatrix<C64>;

/// `B_k u = sum_j alpha[k][j] u^(j)(-T) + beta[k][j] u^(j)(T)`, `k, j < n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySpec {
    half_width: f64,
    alpha: CMatrix,
    beta: CMatrix,
}

impl BoundarySpec {
    pub fn new(half_width: f64, alpha: CMatrix, beta: CMatrix) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidInput(format!("T must be positive, got {half_width}")));
        }
        if !alpha.is_square() || alpha.shape() != beta.shape() {
            return Err(Error::InvalidInput(format!(
                "alpha is {:?} and beta is {:?}; both must be the same square size",
                alpha.shape(),
                beta.shape()
            )));
        }
        if alpha.iter().chain(beta.iter()).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("boundary coefficients must be finite".into()));
        }
        Ok(Self { half_width, alpha, beta })
    }

    /// Real coefficient rows.
    pub fn from_rows(half_width: f64, alpha: &[Vec<f64>], beta: &[Vec<f64>]) -> Result<Self> {
        let to_matrix = |rows: &[Vec<f64>], name: &str| -> Result<CMatrix> {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidInput(format!("{name} must be square")));
            }
            Ok(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0)))
        };
        Self::new(half_width, to_matrix(alpha, "alpha")?, to_matrix(beta, "beta")?)
    }

    /// `u^(j)(-T) = u^(j)(T)` for `j < n`.
    pub fn periodic(half_width: f64, n: usize) -> Self {
        Self { half_width, alpha: CMatrix::identity(n, n), beta: -CMatrix::identity(n, n) }
    }

    /// `u^(j)(-T) = -u^(j)(T)` for `j < n`.
    pub fn antiperiodic(half_width: f64, n: usize) -> Self {
        Self { half_width, alpha: CMatrix::identity(n, n), beta: CMatrix::identity(n, n) }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn order(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn alpha(&self) -> &CMatrix {
        &self.alpha
    }

    pub fn beta(&self) -> &CMatrix {
        &self.beta
    }

    pub fn is_real(&self) -> bool {
        self.alpha.iter().chain(self.beta.iter()).all(|z| z.im == 0.0)
    }

    /// Mixes the conditions by an invertible matrix; the condition set is unchanged.
    pub fn premultiply(&self, m: &CMatrix) -> Self {
        Self { half_width: self.half_width, alpha: m * &self.alpha, beta: m * &self.beta }
    }

    /// `(alpha | beta)` does not have full row rank.
    pub fn is_rank_deficient(&self) -> bool {
        let n = self.order();
        if n == 0 {
            return false;
        }
        let mut stacked = CMatrix::zeros(n, 2 * n);
        stacked.view_mut((0, 0), (n, n)).copy_from(&self.alpha);
        stacked.view_mut((0, n), (n, n)).copy_from(&self.beta);
        rank(&stacked) < n
    }

    /// Value of condition `k` given `u^(j)(-T)` and `u^(j)(T)`.
    pub fn functional(&self, k: usize, minus: &[C64], plus: &[C64]) -> C64 {
        (0..self.order())
            .map(|j| self.alpha[(k, j)] * minus[j] + self.beta[(k, j)] * plus[j])
            .sum()
    }
}

/// Every condition evaluated on `u`.
pub fn conditions_residual(b: &BoundarySpec, u: &ExpPoly) -> Vec<C64> {
    let n = b.order();
    let t = b.half_width;
    let mut minus = Vec::with_capacity(n);
    let mut plus = Vec::with_capacity(n);
    let mut d = u.clone();
    for j in 0..n {
        if j > 0 {
            d = d.diff();
        }
        minus.push(d.eval(-t));
        plus.push(d.eval(t));
    }
    (0..n).map(|k| b.functional(k, &minus, &plus)).collect()
}

/// The `2n` conditions `B_k u = 0`, `B_k R u = 0` on derivatives up to `2n - 1`:
/// `gamma` acts on `u^(j)(-T)` and `theta` on `u^(j)(T)`. The first `n` rows are
/// the original conditions, so the upper-right blocks vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedBoundary {
    half_width: f64,
    gamma: CMatrix,
    theta: CMatrix,
}

impl ExtendedBoundary {
    pub fn new(half_width: f64, gamma: CMatrix, theta: CMatrix) -> Result<Self> {
        let size = gamma.nrows();
        if size % 2 != 0 || !gamma.is_square() || gamma.shape() != theta.shape() {
            return Err(Error::InvalidInput("extended conditions need two equal 2n×2n matrices".into()));
        }
        let n = size / 2;
        let upper_right_zero = |m: &CMatrix| m.view((0, n), (n, n)).iter().all(|z| *z == ZERO);
        if !(upper_right_zero(&gamma) && upper_right_zero(&theta)) {
            return Err(Error::InvalidInput("upper-right blocks must vanish".into()));
        }
        Ok(Self { half_width, gamma, theta })
    }

    pub fn n(&self) -> usize {
        self.gamma.nrows() / 2
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn gamma(&self) -> &CMatrix {
        &self.gamma
    }

    pub fn theta(&self) -> &CMatrix {
        &self.theta
    }

    /// Blocks `(Γ₁, Γ₂, Γ₃)`.
    pub fn gamma_blocks(&self) -> (CMatrix, CMatrix, CMatrix) {
        blocks(&self.gamma)
    }

    /// Blocks `(Θ₁, Θ₂, Θ₃)`.
    pub fn theta_blocks(&self) -> (CMatrix, CMatrix, CMatrix) {
        blocks(&self.theta)
    }

    /// Row-reduces the lower block against the upper one: with `Γ₁` invertible,
    /// subtracting `Γ₂Γ₁⁻¹` times the upper rows clears `Γ₂`; otherwise `Θ₁`
    /// is used to clear `Θ₂`. The condition set is unchanged.
    pub fn eliminate(&self) -> Self {
        let n = self.n();
        let (g1, g2, _) = self.gamma_blocks();
        let (t1, t2, _) = self.theta_blocks();
        let factor = if condition_number(&g1) <= KAPPA_MAX {
            g1.clone().try_inverse().map(|inv| g2 * inv)
        } else if condition_number(&t1) <= KAPPA_MAX {
            t1.clone().try_inverse().map(|inv| t2 * inv)
        } else {
            None
        };
        let Some(f) = factor else { return self.clone() };
        let mut gamma = self.gamma.clone();
        let mut theta = self.theta.clone();
        let upper_g = self.gamma.rows(0, n).clone_owned();
        let upper_t = self.theta.rows(0, n).clone_owned();
        let new_lower_g = self.gamma.rows(n, n) - &f * upper_g;
        let new_lower_t = self.theta.rows(n, n) - &f * upper_t;
        gamma.rows_mut(n, n).copy_from(&new_lower_g);
        theta.rows_mut(n, n).copy_from(&new_lower_t);
        snap_tiny(&mut gamma);
        snap_tiny(&mut theta);
        Self { half_width: self.half_width, gamma, theta }
    }

    /// The `2n` conditions as an ordinary boundary specification.
    pub fn as_boundary_spec(&self) -> BoundarySpec {
        BoundarySpec { half_width: self.half_width, alpha: self.gamma.clone(), beta: self.theta.clone() }
    }
}

fn snap_tiny(m: &mut CMatrix) {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for z in m.iter_mut() {
        if z.re.abs() <= 1e-14 * scale {
            z.re = 0.0;
        }
        if z.im.abs() <= 1e-14 * scale {
            z.im = 0.0;
        }
    }
}

fn blocks(m: &CMatrix) -> (CMatrix, CMatrix, CMatrix) {
    let n = m.nrows() / 2;
    (
        m.view((0, 0), (n, n)).clone_owned(),
        m.view((n, 0), (n, n)).clone_owned(),
        m.view((n, n), (n, n)).clone_owned(),
    )
}

/// Expands `B_k(Ru)` using `D^j R = sum_l (-1)^j a_l φ* D^{j+l} + b_l D^{j+l}` and
/// `(φ* D^m u)(∓T) = u^(m)(±T)`.
pub fn extend_conditions(b: &BoundarySpec, r: &ReflectionOperator, s_order: usize) -> Result<ExtendedBoundary> {
    let n = b.order();
    if s_order != 2 * n {
        return Err(Error::InvalidInput(format!(
            "{n} conditions cannot serve an operator of order {s_order}"
        )));
    }
    if r.order() > n {
        return Err(Error::InvalidInput(format!(
            "companion of order {} exceeds the {n} conditions",
            r.order()
        )));
    }
    let size = 2 * n;
    let mut gamma = CMatrix::zeros(size, size);
    let mut theta = CMatrix::zeros(size, size);
    gamma.view_mut((0, 0), (n, n)).copy_from(&b.alpha);
    theta.view_mut((0, 0), (n, n)).copy_from(&b.beta);
    let (ra, rb) = (r.a(), r.b());
    for k in 0..n {
        for j in 0..n {
            let sign = if j % 2 == 1 { -1.0 } else { 1.0 };
            let (alpha, beta) = (b.alpha[(k, j)], b.beta[(k, j)]);
            for l in 0..ra.len() {
                let m = j + l;
                // at -T: D-terms read u(-T), reflected terms read u(T); mirrored at +T
                gamma[(n + k, m)] += alpha * rb[l] + beta * (sign * ra[l]);
                theta[(n + k, m)] += alpha * (sign * ra[l]) + beta * rb[l];
            }
        }
    }
    ExtendedBoundary::new(b.half_width, gamma, theta)
}

/// `(Ξ₁, Ξ₂)`: row `j` of `Ξ` holds `c_0..c_n` starting at column `j`.
pub fn build_xi(c: &[C64]) -> Result<(CMatrix, CMatrix)> {
    if c.len() < 2 || c.last() == Some(&ZERO) {
        return Err(Error::InvalidInput("factor must have order ≥ 1 and nonzero leading coefficient".into()));
    }
    let n = c.len() - 1;
    let xi = CMatrix::from_fn(n, 2 * n, |j, k| if k >= j && k - j <= n { c[k - j] } else { ZERO });
    Ok((xi.columns(0, n).clone_owned(), xi.columns(n, n).clone_owned()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitLemma {
    /// `Γ₁, Γ₃` invertible: `Φ = Id`, `Ψ = Ξ₂Γ₃⁻¹Θ₃Ξ₂⁻¹`.
    GammaInvertible,
    /// `Θ₁, Θ₃` invertible: `Ψ = Id`, `Φ = Ξ₂Θ₃⁻¹Γ₃Ξ₂⁻¹`.
    ThetaInvertible,
}

/// Conditions `V` on `u` and `Ṽ` on `v = L₁u` equivalent to an extended set.
#[derive(Clone, Debug, PartialEq)]
pub struct DecomposedConditions {
    pub v: BoundarySpec,
    pub v_tilde: BoundarySpec,
    pub phi: CMatrix,
    pub psi: CMatrix,
    pub lemma: SplitLemma,
    /// `A` with `A · (Γ | Θ) = ` the reassembled system.
    pub change_of_basis: CMatrix,
}

impl DecomposedConditions {
    /// `(Φ̃ 0; ΦΞ₁ ΦΞ₂)` and `(Ψ̃ 0; ΨΞ₁ ΨΞ₂)` for the factor `L₁` with coefficients `c`.
    pub fn reassembled(&self, c: &[C64]) -> Result<(CMatrix, CMatrix)> {
        let (xi1, xi2) = build_xi(c)?;
        Ok((
            stack(&self.v.alpha, &(&self.phi * &xi1), &(&self.phi * &xi2)),
            stack(&self.v.beta, &(&self.psi * &xi1), &(&self.psi * &xi2)),
        ))
    }
}

fn stack(upper_left: &CMatrix, lower_left: &CMatrix, lower_right: &CMatrix) -> CMatrix {
    let n = upper_left.nrows();
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(upper_left);
    m.view_mut((n, 0), (n, n)).copy_from(lower_left);
    m.view_mut((n, n), (n, n)).copy_from(lower_right);
    m
}

fn singular_values(m: &CMatrix) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

pub fn condition_number(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = singular_values(m);
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn rank(m: &CMatrix) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = singular_values(m);
    let max = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|s| **s > RANK_TOL * max && **s > 0.0).count()
}

fn invertible(m: &CMatrix) -> Option<CMatrix> {
    if condition_number(m) > KAPPA_MAX {
        return None;
    }
    m.clone().try_inverse()
}

fn side_by_side(left: &CMatrix, right: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(left.nrows(), left.ncols() + right.ncols());
    out.view_mut((0, 0), left.shape()).copy_from(left);
    out.view_mut((0, left.ncols()), right.shape()).copy_from(right);
    out
}

/// Splits the extended conditions for `S = L₂L₁` when one of the two block
/// criteria holds, preferring the `Γ` one. The result is accepted only if the
/// reassembled system spans the same row space as the extended one.
pub fn decompose_conditions(e: &ExtendedBoundary, c: &[C64]) -> Result<DecomposedConditions> {
    let n = e.n();
    if c.len() != n + 1 {
        return Err(Error::InvalidInput(format!("factor of order {} for {n} conditions", c.len() - 1)));
    }
    let (xi1, xi2) = build_xi(c)?;
    let xi2_inv = xi2
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NotDecomposable("Ξ₂ is singular".into()))?;
    let (g1, g2, g3) = e.gamma_blocks();
    let (t1, t2, t3) = e.theta_blocks();
    let id = CMatrix::identity(n, n);
    let mut reasons = Vec::new();

    let attempt = |lemma: SplitLemma| -> std::result::Result<DecomposedConditions, String> {
        // The two criteria are mirror images with the roles of Γ and Θ exchanged.
        let (p1, p2, p3, o1, o2, o3) = match lemma {
            SplitLemma::GammaInvertible => (&g1, &g2, &g3, &t1, &t2, &t3),
            SplitLemma::ThetaInvertible => (&t1, &t2, &t3, &g1, &g2, &g3),
        };
        let p1_inv = invertible(p1).ok_or("first block is singular")?;
        let p3_inv = invertible(p3).ok_or("third block is singular")?;
        let shift = &xi2_inv * &xi1;
        let predicted = p2 * &p1_inv * o1 + o3 * &shift - p3 * &shift * &p1_inv * o1;
        let gap = (o2 - &predicted).norm();
        let tol = DECOMPOSE_TOL * (1.0 + o2.norm());
        if gap > tol {
            return Err(format!("compatibility gap {gap:e} exceeds {tol:e}"));
        }
        let mixed = &xi2 * &p3_inv * o3 * &xi2_inv;
        let (phi, psi) = match lemma {
            SplitLemma::GammaInvertible => (id.clone(), mixed),
            SplitLemma::ThetaInvertible => (mixed, id.clone()),
        };
        let mut a = CMatrix::zeros(2 * n, 2 * n);
        a.view_mut((0, 0), (n, n)).copy_from(&id);
        a.view_mut((n, 0), (n, n)).copy_from(&((&xi1 - &xi2 * &p3_inv * p2) * &p1_inv));
        a.view_mut((n, n), (n, n)).copy_from(&(&xi2 * &p3_inv));
        Ok(DecomposedConditions {
            v: BoundarySpec { half_width: e.half_width, alpha: g1.clone(), beta: t1.clone() },
            v_tilde: BoundarySpec { half_width: e.half_width, alpha: phi.clone(), beta: psi.clone() },
            phi,
            psi,
            lemma,
            change_of_basis: a,
        })
    };

    for lemma in [SplitLemma::GammaInvertible, SplitLemma::ThetaInvertible] {
        match attempt(lemma) {
            Ok(d) => {
                let (rg, rt) = d.reassembled(c)?;
                let c1 = side_by_side(&e.gamma, &e.theta);
                let c2 = side_by_side(&rg, &rt);
                let mut both = CMatrix::zeros(4 * n, 4 * n);
                both.view_mut((0, 0), (2 * n, 4 * n)).copy_from(&c1);
                both.view_mut((2 * n, 0), (2 * n, 4 * n)).copy_from(&c2);
                let (r1, r2, r12) = (rank(&c1), rank(&c2), rank(&both));
                if r1 == r2 && r2 == r12 {
                    return Ok(d);
                }
                reasons.push(format!("{lemma:?}: row spaces differ (ranks {r1}, {r2}, {r12})"));
            }
            Err(why) => reasons.push(format!("{lemma:?}: {why}")),
        }
    }
    Err(Error::NotDecomposable(reasons.join("; ")))
}

pub fn real_matrix(rows: &[Vec<f64>]) -> CMatrix {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    CMatrix::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ONE;
    use crate::operator::companion;
    use proptest::prelude::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn third_order() -> (BoundarySpec, ReflectionOperator) {
        let b = BoundarySpec::from_rows(
            1.0,
            &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            &[vec![0.0, 0.0, -1.0], vec![0.0, -1.0, 0.0], vec![-1.0, 0.0, 0.0]],
        )
        .unwrap();
        let l = ReflectionOperator::new(vec![1.0, 0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        (b, companion(&l))
    }

    fn anti_blocks() -> CMatrix {
        let mut m = CMatrix::zeros(6, 6);
        for i in 0..3 {
            m[(i, 2 - i)] = r(-1.0);
            m[(3 + i, 5 - i)] = r(-1.0);
        }
        m
    }

    #[test]
    fn third_order_extension_matches_block_form() {
        let (b, rr) = third_order();
        let e = extend_conditions(&b, &rr, 6).unwrap().eliminate();
        assert_eq!(e.gamma(), &CMatrix::identity(6, 6));
        assert_eq!(e.theta(), &anti_blocks());
    }

    #[test]
    fn first_order_extension_row() {
        let s2 = 2f64.sqrt();
        let b = BoundarySpec::from_rows(1.0, &[vec![1.0]], &[vec![-1.0]]).unwrap();
        let l = ReflectionOperator::new(vec![s2, 1.0], vec![1.0, 0.0]).unwrap();
        let e = extend_conditions(&b, &companion(&l), 2).unwrap();
        assert_eq!(e.gamma()[(1, 0)], r(-s2 - 1.0));
        assert_eq!(e.gamma()[(1, 1)], r(-1.0));
        assert_eq!(e.theta()[(1, 0)], r(s2 + 1.0));
        assert_eq!(e.theta()[(1, 1)], r(1.0));
    }

    #[test]
    fn extension_by_identity_duplicates_rows() {
        let b = BoundarySpec::periodic(1.0, 2);
        let e = extend_conditions(&b, &ReflectionOperator::identity(), 4).unwrap();
        let (g1, g2, g3) = e.gamma_blocks();
        assert_eq!(g1, g2);
        assert!(g3.iter().all(|z| *z == ZERO));
        assert!(e.as_boundary_spec().is_rank_deficient());
    }

    #[test]
    fn extension_matches_direct_evaluation() {
        // B_k(Ru) computed by applying R to a polynomial and evaluating directly
        let b = BoundarySpec::from_rows(1.5, &[vec![1.0, 2.0], vec![-0.5, 0.0]], &[vec![0.0, 3.0], vec![1.0, 1.0]]).unwrap();
        let rr = ReflectionOperator::new(vec![0.7, -1.2, 0.4], vec![2.0, 0.5, -1.0]).unwrap();
        let e = extend_conditions(&b, &rr, 4).unwrap();
        let u = crate::exppoly::ExpPoly::term(r(0.3), vec![r(1.0), r(-2.0), r(0.5), r(1.5)]);
        let direct = conditions_residual(&b, &rr.apply(&u));
        let via = conditions_residual(&e.as_boundary_spec(), &u);
        for k in 0..2 {
            assert!((direct[k] - via[2 + k]).norm() < 1e-12);
        }
    }

    #[test]
    fn xi_examples() {
        let (x1, x2) = build_xi(&[ZERO, ZERO, ZERO, ONE]).unwrap();
        assert!(x1.iter().all(|z| *z == ZERO));
        assert_eq!(x2, CMatrix::identity(3, 3));
        let (x1, x2) = build_xi(&[ONE, ONE]).unwrap();
        assert_eq!((x1[(0, 0)], x2[(0, 0)]), (ONE, ONE));
        let (x1, x2) = build_xi(&[r(3.0), r(2.0), ONE]).unwrap();
        assert_eq!(x1, real_matrix(&[vec![3.0, 2.0], vec![0.0, 3.0]]));
        assert_eq!(x2, real_matrix(&[vec![1.0, 0.0], vec![2.0, 1.0]]));
    }

    #[test]
    fn third_order_split() {
        let (b, rr) = third_order();
        let e = extend_conditions(&b, &rr, 6).unwrap();
        let d = decompose_conditions(&e, &[ZERO, ZERO, ZERO, ONE]).unwrap();
        assert_eq!(d.lemma, SplitLemma::GammaInvertible);
        assert_eq!(d.phi, CMatrix::identity(3, 3));
        let (_, _, t3) = e.eliminate().theta_blocks();
        assert!((&d.psi - &t3).norm() < 1e-14);
        assert!((&d.v_tilde.beta - b.beta()).norm() < 1e-14);
        assert_eq!(d.v, b);
    }

    #[test]
    fn first_order_split_is_periodic() {
        let s2 = 2f64.sqrt();
        let b = BoundarySpec::from_rows(1.0, &[vec![1.0]], &[vec![-1.0]]).unwrap();
        let l = ReflectionOperator::new(vec![s2, 1.0], vec![1.0, 0.0]).unwrap();
        let e = extend_conditions(&b, &companion(&l), 2).unwrap();
        for c in [[ONE, ONE], [-ONE, ONE]] {
            let d = decompose_conditions(&e, &c).unwrap();
            // v(-1) = v(1)
            assert!((d.v_tilde.alpha()[(0, 0)] + d.v_tilde.beta()[(0, 0)]).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_blocks_do_not_split() {
        let mut gamma = CMatrix::zeros(2, 2);
        gamma[(1, 1)] = ONE;
        let mut theta = CMatrix::zeros(2, 2);
        theta[(1, 0)] = ONE;
        let e = ExtendedBoundary::new(1.0, gamma, theta).unwrap();
        assert!(matches!(decompose_conditions(&e, &[ONE, ONE]), Err(Error::NotDecomposable(_))));
    }

    #[test]
    fn residuals() {
        let b = BoundarySpec::periodic(1.0, 1);
        let t2 = ExpPoly::monomial(2, ONE);
        assert_eq!(conditions_residual(&b, &t2), vec![ZERO]);
        assert_eq!(conditions_residual(&b, &ExpPoly::zero()), vec![ZERO]);
    }

    fn matrix(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n), n)
    }

    fn operator(n: usize) -> impl Strategy<Value = ReflectionOperator> {
        (prop::collection::vec(-2.0f64..2.0, n + 1), prop::collection::vec(-2.0f64..2.0, n + 1))
            .prop_map(|(a, b)| ReflectionOperator::new(a, b).unwrap())
    }

    proptest! {
        #[test]
        fn extension_is_linear(
            (a1, b1, a2, b2, rr) in (1usize..4).prop_flat_map(|n| (matrix(n), matrix(n), matrix(n), matrix(n), operator(n)))
        ) {
            let n = a1.len();
            prop_assume!(rr.order() == n);
            let x = BoundarySpec::from_rows(1.0, &a1, &b1).unwrap();
            let y = BoundarySpec::from_rows(1.0, &a2, &b2).unwrap();
            let sum = BoundarySpec::new(1.0, x.alpha() + y.alpha(), x.beta() + y.beta()).unwrap();
            let ex = extend_conditions(&x, &rr, 2 * n).unwrap();
            let ey = extend_conditions(&y, &rr, 2 * n).unwrap();
            let es = extend_conditions(&sum, &rr, 2 * n).unwrap();
            prop_assert!((es.gamma() - (ex.gamma() + ey.gamma())).norm() < 1e-12);
            prop_assert!((es.theta() - (ex.theta() + ey.theta())).norm() < 1e-12);
        }

        #[test]
        fn change_of_basis_holds(
            (m, rr, c) in (1usize..4).prop_flat_map(|n| (matrix(n), operator(n), prop::collection::vec(-2.0f64..2.0, n)))
        ) {
            let n = m.len();
            prop_assume!(rr.order() == n);
            let mix = real_matrix(&m);
            prop_assume!(condition_number(&mix) < 1e4);
            let mut coeffs: Vec<C64> = c.iter().map(|x| r(*x)).collect();
            coeffs.push(ONE);
            for base in [BoundarySpec::periodic(1.0, n), BoundarySpec::antiperiodic(1.0, n)] {
                let b = base.premultiply(&mix);
                let e = extend_conditions(&b, &rr, 2 * n).unwrap();
                if let Ok(d) = decompose_conditions(&e, &coeffs) {
                    let (rg, rt) = d.reassembled(&coeffs).unwrap();
                    let ag = &d.change_of_basis * e.gamma();
                    let at = &d.change_of_basis * e.theta();
                    let scale = 1.0 + ag.norm() + at.norm();
                    prop_assert!((ag - rg).norm() <= 1e-8 * scale);
                    prop_assert!((at - rt).norm() <= 1e-8 * scale);
                }
            }
        }
    }
}
