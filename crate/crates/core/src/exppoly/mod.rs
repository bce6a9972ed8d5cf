//! Closed-form exponential-polynomial functions of one and two variables and
//! piecewise kernels built from them.

mod bivariate;
mod kernel;
pub(crate) mod poly;
mod region;
mod univariate;

pub use bivariate::{antideriv_definite, integrate_middle, BiTerm, BivariateExpPoly, Endpoint};
pub use kernel::{off_diagonal_grid, Piece, PiecewiseKernel};
pub use region::{HalfPlane, Region};
pub use univariate::{ExpPoly, ExpTerm, MERGE_TOL};
