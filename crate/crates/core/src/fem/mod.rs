//! Finite element substrate: dyadic grids, piecewise-affine functions in the
//! hat basis, composite Gauss quadrature and tridiagonal solves.

mod dense;
mod function;
mod grid;
mod quadrature;
mod tridiag;

pub(crate) use dense::solve_dense;
pub use function::{deriv_on_cell, eval, prolongate, FeFunction};
pub use grid::{UniformGrid, MAX_LEVEL};
pub use quadrature::{integrate, QuadratureRule, DEFAULT_POINTS_PER_CELL};
pub use tridiag::{solve_tridiagonal, TridiagonalMatrix, PIVOT_TOLERANCE};

/// Builds the grid with `2^level + 1` nodes.
pub fn build_grid(level: u32) -> crate::Result<UniformGrid> {
    UniformGrid::new(level)
}
