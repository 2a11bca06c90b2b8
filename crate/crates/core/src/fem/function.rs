use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::UniformGrid;

/// Continuous piecewise-affine function in the hat basis of a [`UniformGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeFunction {
    grid: UniformGrid,
    coeffs: Vec<f64>,
}

impl FeFunction {
    pub fn new(grid: UniformGrid, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != grid.num_nodes() {
            return Err(Error::GridMismatch {
                expected: grid.num_nodes(),
                found: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: UniformGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: UniformGrid, value: f64) -> Self {
        Self {
            grid,
            coeffs: vec![value; grid.num_nodes()],
        }
    }

    /// Nodal interpolant of `f`.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: UniformGrid, f: F) -> Self {
        Self {
            grid,
            coeffs: (0..grid.num_nodes()).map(|n| f(grid.node(n))).collect(),
        }
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Value at `t` by linear interpolation between the adjacent nodes.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let cell = self.grid.locate(t)?;
        let s = t / self.grid.h() - cell as f64;
        Ok(self.eval_in_cell(cell, s))
    }

    /// Value at local coordinate `s` in (0, 1) of `cell`.
    #[inline]
    pub fn eval_in_cell(&self, cell: usize, s: f64) -> f64 {
        let (l, r) = (self.coeffs[cell], self.coeffs[cell + 1]);
        if s == 0.0 {
            l
        } else if s == 1.0 {
            r
        } else {
            l + s * (r - l)
        }
    }

    /// Constant derivative on `cell`.
    #[inline]
    pub fn deriv_on_cell(&self, cell: usize) -> f64 {
        (self.coeffs[cell + 1] - self.coeffs[cell]) / self.grid.h()
    }

    /// All per-cell derivatives.
    pub fn cell_derivatives(&self) -> Vec<f64> {
        (0..self.grid.num_cells()).map(|c| self.deriv_on_cell(c)).collect()
    }

    /// Interpolation onto the next finer grid: even nodes copy, odd nodes average.
    pub fn prolongate(&self) -> Result<Self> {
        let fine = self.grid.refined()?;
        let mut coeffs = Vec::with_capacity(fine.num_nodes());
        for w in self.coeffs.windows(2) {
            coeffs.push(w[0]);
            coeffs.push(0.5 * (w[0] + w[1]));
        }
        coeffs.push(*self.coeffs.last().expect("grid has nodes"));
        Ok(Self { grid: fine, coeffs })
    }

    pub fn sup_distance(&self, other: &Self) -> Result<f64> {
        if self.coeffs.len() != other.coeffs.len() {
            return Err(Error::GridMismatch {
                expected: self.coeffs.len(),
                found: other.coeffs.len(),
            });
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn sup_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Free-standing form of [`FeFunction::eval`].
pub fn eval(u: &FeFunction, t: f64) -> Result<f64> {
    u.eval(t)
}

/// Free-standing form of [`FeFunction::deriv_on_cell`].
pub fn deriv_on_cell(u: &FeFunction, cell: usize) -> f64 {
    u.deriv_on_cell(cell)
}

/// Free-standing form of [`FeFunction::prolongate`].
pub fn prolongate(u: &FeFunction) -> Result<FeFunction> {
    u.prolongate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eval_constant_and_affine() {
        let g = UniformGrid::new(3).unwrap();
        assert_eq!(FeFunction::constant(g, 2.0).eval(0.37).unwrap(), 2.0);
        let lin = FeFunction::from_fn(g, |t| t);
        assert!((lin.eval(0.3).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn eval_at_nodes_is_exact() {
        let g = UniformGrid::new(4).unwrap();
        let u = FeFunction::from_fn(g, |t| (7.0 * t).sin());
        for n in 0..g.num_nodes() {
            assert_eq!(u.eval(g.node(n)).unwrap(), u.coeffs()[n]);
        }
    }

    #[test]
    fn difference_quotient_of_square() {
        let g = UniformGrid::new(3).unwrap();
        let u = FeFunction::from_fn(g, |t| t * t);
        assert!((u.deriv_on_cell(1) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn eval_outside_domain_fails() {
        let u = FeFunction::zeros(UniformGrid::new(2).unwrap());
        assert!(u.eval(-0.1).is_err());
        assert!(u.eval(1.0001).is_err());
    }

    #[test]
    fn prolongation_examples() {
        let g3 = UniformGrid::new(3).unwrap();
        let one = FeFunction::constant(g3, 1.0).prolongate().unwrap();
        assert_eq!(one.grid().level(), 4);
        assert!(one.coeffs().iter().all(|&c| c == 1.0));

        let lin = FeFunction::from_fn(g3, |t| t).prolongate().unwrap();
        assert_eq!(lin, FeFunction::from_fn(*lin.grid(), |t| t));

        let hat = FeFunction::new(UniformGrid::new(1).unwrap(), vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(hat.prolongate().unwrap().coeffs(), &[0.0, 0.5, 1.0, 0.5, 0.0]);
    }

    #[test]
    fn wrong_length_rejected() {
        let g = UniformGrid::new(2).unwrap();
        assert!(FeFunction::new(g, vec![0.0; 4]).is_err());
    }

    proptest! {
        #[test]
        fn prolongation_preserves_values(
            coeffs in proptest::collection::vec(-10.0f64..10.0, 9),
            t in 0.0f64..=1.0,
        ) {
            let u = FeFunction::new(UniformGrid::new(3).unwrap(), coeffs).unwrap();
            let fine = u.prolongate().unwrap();
            prop_assert!((fine.eval(t).unwrap() - u.eval(t).unwrap()).abs() <= 1e-14);
        }
    }
}
