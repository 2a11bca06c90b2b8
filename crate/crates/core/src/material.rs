//! Stiffness fields `A(t)` used by the state equation.

use serde::{Deserialize, Serialize};

use crate::design::a_of_v;
use crate::error::{Error, Result};
use crate::fem::{FeFunction, QuadratureRule, UniformGrid};
use crate::homogenization::{a_of_theta, LaminateDesign};

/// Bending stiffness as a function of arc length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Material {
    /// Constant stiffness.
    Homogeneous(f64),
    /// Phase field `v`, `A = b chi(v) + a (1 - chi(v))`.
    PhaseField { v: FeFunction, soft: f64, hard: f64 },
    /// Hard-phase volume fraction `theta`, harmonic-mean stiffness.
    Relaxed { theta: FeFunction, soft: f64, hard: f64 },
    /// Hard-phase volume fraction `theta`, arithmetic-mean stiffness.
    Arithmetic { theta: FeFunction, soft: f64, hard: f64 },
    /// Periodic two-phase laminate.
    Laminate {
        design: LaminateDesign,
        soft: f64,
        hard: f64,
    },
}

impl Material {
    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(match self {
            Material::Homogeneous(a) => *a,
            Material::PhaseField { v, soft, hard } => a_of_v(v.eval(t)?, *soft, *hard),
            Material::Relaxed { theta, soft, hard } => a_of_theta(theta.eval(t)?.clamp(0.0, 1.0), *soft, *hard)?,
            Material::Arithmetic { theta, soft, hard } => {
                let th = theta.eval(t)?.clamp(0.0, 1.0);
                (1.0 - th) * soft + th * hard
            }
            Material::Laminate { design, soft, hard } => {
                if design.is_hard(t) {
                    *hard
                } else {
                    *soft
                }
            }
        })
    }

    /// Values at every quadrature point, cell by cell.
    pub fn sample(&self, grid: &UniformGrid, rule: &QuadratureRule) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(grid.num_cells() * rule.len());
        match self {
            Material::PhaseField { v, soft, hard } if v.grid() == grid => {
                for cell in 0..grid.num_cells() {
                    for &s in rule.points() {
                        out.push(a_of_v(v.eval_in_cell(cell, s), *soft, *hard));
                    }
                }
            }
            _ => {
                for cell in 0..grid.num_cells() {
                    for (x, _) in rule.cell_points(grid, cell) {
                        out.push(self.eval(x)?);
                    }
                }
            }
        }
        if out.iter().any(|a| !a.is_finite() || *a <= 0.0) {
            return Err(Error::param("material", "stiffness must be positive and finite"));
        }
        Ok(out)
    }
}
