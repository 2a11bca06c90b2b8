use serde::{Deserialize, Serialize};

use crate::design::chi;
use crate::fem::FeFunction;

/// Cell classification by hard-phase fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Soft,
    Intermediate,
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub t: f64,
    pub theta: f64,
    pub kp: f64,
    pub phase: Phase,
    /// Inside an excluded interface band.
    pub in_band: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: f64,
    pub phase: Phase,
    /// Amount by which the inequality fails.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    pub lambda: f64,
    pub tolerance: f64,
    pub cells: Vec<CellReport>,
    pub violations: Vec<Violation>,
    /// `max (lambda - kp)` over hard cells outside the bands.
    pub worst_hard: f64,
    /// `max (kp - lambda)` over soft cells outside the bands.
    pub worst_soft: f64,
}

impl OptimalityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Relative tolerance of the optimality check, in units of `lambda`.
pub const OPTIMALITY_TOLERANCE: f64 = 0.05;

/// Checks `kp >= lambda` on hard cells, `kp <= lambda` on soft cells and
/// `kp = lambda` on intermediate ones, with `theta = min(1, chi(v))`.
///
/// `shear` and `flux` are per-cell; cells whose midpoint lies within
/// `band` of an entry of `interfaces` are reported but not judged.
pub fn check_optimality_condition(
    v: &FeFunction,
    shear: &[f64],
    flux: &[f64],
    lambda: f64,
    interfaces: &[f64],
    band: f64,
) -> OptimalityReport {
    let grid = v.grid();
    let tolerance = OPTIMALITY_TOLERANCE * lambda;
    let mut cells = Vec::with_capacity(grid.num_cells());
    let mut violations = Vec::new();
    let (mut worst_hard, mut worst_soft) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for cell in 0..grid.num_cells() {
        let t = grid.cell_midpoint(cell);
        let theta = chi(v.eval_in_cell(cell, 0.5)).min(1.0);
        let kp = shear[cell] * flux[cell];
        let phase = if theta < 0.05 {
            Phase::Soft
        } else if theta > 0.95 {
            Phase::Hard
        } else {
            Phase::Intermediate
        };
        let in_band = interfaces.iter().any(|s| (t - s).abs() <= band);
        cells.push(CellReport {
            t,
            theta,
            kp,
            phase,
            in_band,
        });
        if in_band {
            continue;
        }
        let excess = match phase {
            Phase::Hard => {
                worst_hard = worst_hard.max(lambda - kp);
                lambda - kp
            }
            Phase::Soft => {
                worst_soft = worst_soft.max(kp - lambda);
                kp - lambda
            }
            Phase::Intermediate => (kp - lambda).abs(),
        };
        if excess > tolerance {
            violations.push(Violation { t, phase, excess });
        }
    }
    OptimalityReport {
        lambda,
        tolerance,
        cells,
        violations,
        worst_hard,
        worst_soft,
    }
}
