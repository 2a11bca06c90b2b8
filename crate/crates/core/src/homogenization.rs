//! Relaxed designs: harmonic-mean effective stiffness, periodic laminates,
//! and the numerical check that laminate states converge to the relaxed one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::FeFunction;
use crate::material::Material;
use crate::state::{multilevel_solve, BeamProblem, NewtonOptions, StateInit, StateSolution};

/// Harmonic interpolation `((1 - theta)/a + theta/b)^{-1}`.
pub fn a_of_theta(theta: f64, soft: f64, hard: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::param("theta", format!("{theta} outside [0, 1]")));
    }
    Ok(1.0 / ((1.0 - theta) / soft + theta / hard))
}

/// `dA/dtheta = (1/a - 1/b) A(theta)^2`.
pub fn a_dot_of_theta(theta: f64, soft: f64, hard: f64) -> Result<f64> {
    let a = a_of_theta(theta, soft, hard)?;
    Ok((1.0 / soft - 1.0 / hard) * a * a)
}

/// Hard-phase volume fraction with nodal values in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxedDesign {
    theta: FeFunction,
}

impl RelaxedDesign {
    pub fn new(theta: FeFunction) -> Result<Self> {
        if theta.coeffs().iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::param("theta", "nodal values must lie in [0, 1]"));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> &FeFunction {
        &self.theta
    }

    /// Exact integral of the piecewise-affine fraction over `(lo, hi)`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        let g = self.theta.grid();
        let mut breaks = vec![lo];
        let first = (lo / g.h()).floor() as usize + 1;
        let mut n = first;
        while n < g.num_nodes() && g.node(n) < hi {
            breaks.push(g.node(n));
            n += 1;
        }
        breaks.push(hi);
        breaks
            .windows(2)
            .map(|w| {
                let a = self.theta.eval(w[0]).expect("inside [0, 1]");
                let b = self.theta.eval(w[1]).expect("inside [0, 1]");
                0.5 * (a + b) * (w[1] - w[0])
            })
            .sum()
    }
}

/// Two-phase laminate with `periods` equal periods; in each period a hard
/// layer of the period's mean fraction sits centered between two soft ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaminateDesign {
    pub periods: usize,
    pub fractions: Vec<f64>,
}

impl LaminateDesign {
    /// Hard layer `[start, end)` of period `i`.
    pub fn hard_piece(&self, i: usize) -> (f64, f64) {
        let n = self.periods as f64;
        let gap = 0.5 * (1.0 - self.fractions[i]) / n;
        let start = i as f64 / n + gap;
        (start, start + self.fractions[i] / n)
    }

    pub fn is_hard(&self, t: f64) -> bool {
        let idx = ((t * self.periods as f64).floor() as usize).min(self.periods - 1);
        let (start, end) = self.hard_piece(idx);
        start <= t && t < end
    }

    /// Characteristic function of the hard phase.
    pub fn indicator(&self, t: f64) -> f64 {
        f64::from(u8::from(self.is_hard(t)))
    }

    /// Exact `int_lo^hi chi_n`.
    pub fn hard_measure(&self, lo: f64, hi: f64) -> f64 {
        (0..self.periods)
            .map(|i| {
                let (start, end) = self.hard_piece(i);
                (end.min(hi) - start.max(lo)).max(0.0)
            })
            .sum()
    }
}

/// Builds the laminate realizing `theta` period by period.
pub fn laminate(theta: &RelaxedDesign, periods: usize) -> Result<LaminateDesign> {
    if periods == 0 {
        return Err(Error::param("periods", "must be at least 1"));
    }
    let n = periods as f64;
    let fractions = (0..periods)
        .map(|i| {
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            (theta.integral(lo, hi) * n).clamp(0.0, 1.0)
        })
        .collect();
    Ok(LaminateDesign { periods, fractions })
}

/// Effective-coefficient rule used for the reference solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Averaging {
    Harmonic,
    Arithmetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogenizationRow {
    pub periods: usize,
    /// `|K_n - K_theta|_inf` against the harmonic-mean state.
    pub error: f64,
    /// `|K_n - K_arith|_inf` against the arithmetic-mean control.
    pub arithmetic_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogenizationTable {
    pub rows: Vec<HomogenizationRow>,
    /// Errors strictly decrease along the period list.
    pub monotone: bool,
    pub harmonic: StateSolution,
    pub arithmetic: StateSolution,
}

/// Grid levels for the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Levels {
    pub coarse: u32,
    pub fine: u32,
}

fn relaxed_material(theta: &RelaxedDesign, soft: f64, hard: f64, avg: Averaging) -> Material {
    match avg {
        Averaging::Harmonic => Material::Relaxed {
            theta: theta.theta().clone(),
            soft,
            hard,
        },
        Averaging::Arithmetic => Material::Arithmetic {
            theta: theta.theta().clone(),
            soft,
            hard,
        },
    }
}

/// Solves the state for each laminate and for the relaxed coefficients.
///
/// `base` supplies the load, clamp angle and material bounds; its material
/// is replaced. Rows run in parallel.
pub fn homogenization_experiment(
    theta: &RelaxedDesign,
    periods: &[usize],
    base: &BeamProblem,
    levels: Levels,
) -> Result<HomogenizationTable> {
    let (soft, hard) = (base.soft, base.hard);
    let options = NewtonOptions::default();
    let solve = |material: Material| -> Result<StateSolution> {
        let problem = base.clone().with_material(material, soft, hard);
        let grid = crate::fem::UniformGrid::new(levels.coarse)?;
        multilevel_solve(
            &problem,
            levels.coarse,
            levels.fine,
            &StateInit::Simple.on_grid(grid),
            &options,
        )
    };
    let (harmonic, arithmetic) = rayon::join(
        || solve(relaxed_material(theta, soft, hard, Averaging::Harmonic)),
        || solve(relaxed_material(theta, soft, hard, Averaging::Arithmetic)),
    );
    let (harmonic, arithmetic) = (harmonic?, arithmetic?);
    let rows = periods
        .par_iter()
        .map(|&n| {
            let design = laminate(theta, n)?;
            let sol = solve(Material::Laminate { design, soft, hard })?;
            Ok(HomogenizationRow {
                periods: n,
                error: sol.phase.sup_distance(&harmonic.phase)?,
                arithmetic_error: sol.phase.sup_distance(&arithmetic.phase)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = rows.windows(2).all(|w| w[1].error < w[0].error);
    Ok(HomogenizationTable {
        rows,
        monotone,
        harmonic,
        arithmetic,
    })
}
