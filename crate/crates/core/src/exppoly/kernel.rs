use super::bivariate::BivariateExpPoly;
use super::region::{HalfPlane, Region};
use crate::error::{Error, Result};
use crate::numeric::C64;

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub region: Region,
    pub expr: BivariateExpPoly,
}

/// A function on `[-T, T]²` given by one exponential polynomial per region.
/// Piece order is the canonical order used to break ties on region boundaries.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseKernel {
    half_width: f64,
    pieces: Vec<Piece>,
}

const BOUNDARY_TOL: f64 = 1e-12;

impl PiecewiseKernel {
    /// Checks that `T > 0` and that the piece areas add up to the square.
    pub fn new(half_width: f64, pieces: Vec<Piece>) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidInput(format!("half-width must be positive, got {half_width}")));
        }
        if pieces.is_empty() {
            return Err(Error::KernelStructure("kernel has no pieces".into()));
        }
        let total: f64 = pieces.iter().map(|p| p.region.area(half_width)).sum();
        let square = 4.0 * half_width * half_width;
        if (total - square).abs() > 1e-9 * square {
            return Err(Error::KernelStructure(format!(
                "piece areas sum to {total}, square has area {square}"
            )));
        }
        Ok(Self { half_width, pieces })
    }

    pub fn uniform(half_width: f64, expr: BivariateExpPoly) -> Self {
        Self { half_width, pieces: vec![Piece { region: Region::whole(), expr }] }
    }

    pub fn zero(half_width: f64) -> Self {
        Self::uniform(half_width, BivariateExpPoly::zero())
    }

    /// Two pieces split by the diagonal: `lower` on `s ≤ t`, `upper` on `t < s`.
    pub fn diagonal(half_width: f64, lower: BivariateExpPoly, upper: BivariateExpPoly) -> Self {
        Self {
            half_width,
            pieces: vec![
                Piece { region: Region::new(vec![HalfPlane::new(1.0, -1.0, 0.0, false)]), expr: lower },
                Piece { region: Region::new(vec![HalfPlane::new(-1.0, 1.0, 0.0, true)]), expr: upper },
            ],
        }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| p.expr.is_zero())
    }

    /// Index of the piece used to evaluate at `(t, s)`: the first piece whose
    /// closed region contains the point.
    pub fn locate(&self, t: f64, s: f64) -> Result<usize> {
        let h = self.half_width;
        let slack = BOUNDARY_TOL * h;
        if !(t.abs() <= h + slack && s.abs() <= h + slack) {
            return Err(Error::OutOfDomain { t, s });
        }
        self.pieces
            .iter()
            .position(|p| p.region.closure_contains(t, s, slack))
            .ok_or_else(|| Error::KernelStructure(format!("no piece covers ({t}, {s})")))
    }

    pub fn eval(&self, t: f64, s: f64) -> Result<C64> {
        let i = self.locate(t, s)?;
        Ok(self.pieces[i].expr.eval(t, s))
    }

    /// Same regions, transformed expressions.
    pub fn map_exprs(&self, mut f: impl FnMut(&BivariateExpPoly) -> BivariateExpPoly) -> Self {
        Self {
            half_width: self.half_width,
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece { region: p.region.clone(), expr: f(&p.expr) })
                .collect(),
        }
    }

    /// `K(-t, s)`
    pub fn reflect_t(&self) -> Self {
        Self {
            half_width: self.half_width,
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece { region: p.region.reflect_t(), expr: p.expr.reflect_t() })
                .collect(),
        }
    }

    /// `K(s, t)`
    pub fn transpose(&self) -> Self {
        Self {
            half_width: self.half_width,
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece { region: p.region.transpose(), expr: p.expr.transpose() })
                .collect(),
        }
    }

    /// Pointwise sum over the common refinement of both region lists.
    pub fn add(&self, other: &PiecewiseKernel) -> Result<Self> {
        if (self.half_width - other.half_width).abs() > 0.0 {
            return Err(Error::KernelStructure("kernels live on different squares".into()));
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        let h = self.half_width;
        let mut pieces = Vec::new();
        for a in &self.pieces {
            for b in &other.pieces {
                let region = a.region.intersect(&b.region);
                if region.is_empty(h) {
                    continue;
                }
                pieces.push(Piece { region: region.simplified(h), expr: &a.expr + &b.expr });
            }
        }
        Self::new(h, pieces)
    }

    /// For kernels split only by the diagonal, the `(s ≤ t, t < s)` expressions.
    pub fn diagonal_pieces(&self) -> Result<(&BivariateExpPoly, &BivariateExpPoly)> {
        if self.pieces.len() == 1 {
            let e = &self.pieces[0].expr;
            return Ok((e, e));
        }
        let bad = || Error::KernelStructure("kernel is not split by the diagonal alone".into());
        if self.pieces.len() != 2 {
            return Err(bad());
        }
        let h = self.half_width;
        let below = [(0.5, -0.5), (0.9, 0.8), (-0.8, -0.9), (0.1, -0.95), (0.95, -0.1)];
        let which = |t: f64, s: f64| self.pieces.iter().position(|p| p.region.contains(t * h, s * h));
        let lower = which(0.5, -0.5).ok_or_else(bad)?;
        let upper = which(-0.5, 0.5).ok_or_else(bad)?;
        if lower == upper {
            return Err(bad());
        }
        for (t, s) in below {
            if which(t, s) != Some(lower) || which(s, t) != Some(upper) {
                return Err(bad());
            }
        }
        Ok((&self.pieces[lower].expr, &self.pieces[upper].expr))
    }

    /// Largest `|self - other|` on an `n × n` grid that avoids the lines `s = ±t`.
    pub fn grid_max_diff(&self, other: &PiecewiseKernel, n: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (t, s) in off_diagonal_grid(self.half_width, n) {
            worst = worst.max((self.eval(t, s)? - other.eval(t, s)?).norm());
        }
        Ok(worst)
    }

    pub fn grid_max_abs(&self, n: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (t, s) in off_diagonal_grid(self.half_width, n) {
            worst = worst.max(self.eval(t, s)?.norm());
        }
        Ok(worst)
    }
}

/// `n × n` sample points with different offsets in `t` and `s`, so that no
/// point lands on `s = t` or `s = -t`.
pub fn off_diagonal_grid(half_width: f64, n: usize) -> Vec<(f64, f64)> {
    let step = 2.0 * half_width / n as f64;
    let mut pts = Vec::with_capacity(n * n);
    for i in 0..n {
        let t = -half_width + (i as f64 + 0.37) * step;
        for j in 0..n {
            let s = -half_width + (j as f64 + 0.71) * step;
            pts.push((t, s));
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exppoly::ExpPoly;
    use crate::numeric::{ONE, ZERO};

    #[test]
    fn constant_kernel_evaluates_everywhere() {
        let k = PiecewiseKernel::uniform(1.0, BivariateExpPoly::constant(ONE));
        assert_eq!(k.eval(0.3, -0.9).unwrap(), ONE);
        assert_eq!(k.eval(1.0, 1.0).unwrap(), ONE);
        assert!(matches!(k.eval(1.5, 0.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn diagonal_tie_goes_to_lower_piece() {
        let k = PiecewiseKernel::diagonal(
            1.0,
            BivariateExpPoly::constant(ONE),
            BivariateExpPoly::constant(-ONE),
        );
        assert_eq!(k.eval(0.2, 0.2).unwrap(), ONE);
        assert_eq!(k.eval(0.2, 0.3).unwrap(), -ONE);
        let (lo, up) = k.diagonal_pieces().unwrap();
        assert_eq!(lo.eval(0.0, 0.0), ONE);
        assert_eq!(up.eval(0.0, 0.0), -ONE);
    }

    #[test]
    fn overlay_with_reflection_gives_four_pieces() {
        let t = BivariateExpPoly::from_t(&ExpPoly::monomial(1, ONE));
        let k = PiecewiseKernel::diagonal(1.0, t.clone(), BivariateExpPoly::constant(ZERO));
        let sum = k.add(&k.reflect_t()).unwrap();
        assert_eq!(sum.pieces().len(), 4);
        // on |s| < t: lower piece plus reflected upper piece
        assert!((sum.eval(0.8, 0.1).unwrap() - C64::new(0.8, 0.0)).norm() < 1e-15);
        // on s ≤ -|t|: both lower
        assert!((sum.eval(0.3, -0.9).unwrap()).norm() < 1e-15);
    }

    #[test]
    fn validates_cover() {
        let half = Piece {
            region: Region::new(vec![HalfPlane::new(1.0, -1.0, 0.0, false)]),
            expr: BivariateExpPoly::zero(),
        };
        assert!(PiecewiseKernel::new(1.0, vec![half]).is_err());
    }
}
