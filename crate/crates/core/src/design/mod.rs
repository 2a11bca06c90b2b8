//! Phase-field material design: smoothed indicator and stiffness, diffuse
//! perimeter and hard length, BFGS on the reduced cost, and post-hoc
//! checks of the optimized design.

mod bfgs;
mod interfaces;
mod optimality;
mod phase;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use bfgs::{bfgs_optimize, BfgsOptions, DesignResult, StopReason};
pub use interfaces::{check_ordered, extract_interfaces, hard_intervals, OrderCheck, BAND_WIDTH};
pub use optimality::{
    check_optimality_condition, CellReport, OptimalityReport, Phase, Violation, OPTIMALITY_TOLERANCE,
};
pub use phase::{a_of_v, chi, chi_prime, lambda_threshold, length_hard, perimeter, DOUBLE_WELL};

use crate::error::{Error, Result};
use crate::fem::{FeFunction, UniformGrid};

/// Starting phase fields for the optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PhaseInit {
    /// `v = 0`, undecided material.
    Undecided,
    AllSoft,
    AllHard,
    /// Independent uniform nodal values in `[-0.5, 0.5]`.
    Random {
        seed: u64,
    },
}

impl PhaseInit {
    pub fn on_grid(self, grid: UniformGrid) -> FeFunction {
        match self {
            PhaseInit::Undecided => FeFunction::zeros(grid),
            PhaseInit::AllSoft => FeFunction::constant(grid, -1.0),
            PhaseInit::AllHard => FeFunction::constant(grid, 1.0),
            PhaseInit::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let c = (0..grid.num_nodes()).map(|_| rng.gen_range(-0.5..=0.5)).collect();
                FeFunction::new(grid, c).expect("length matches grid")
            }
        }
    }

    /// Parses `zero`, `all-soft`, `all-hard`, `random` (seeded by `seed`) or
    /// `random:N`.
    pub fn parse(name: &str, seed: u64) -> Result<Self> {
        match name {
            "zero" | "undecided" => Ok(PhaseInit::Undecided),
            "all-soft" => Ok(PhaseInit::AllSoft),
            "all-hard" => Ok(PhaseInit::AllHard),
            "random" => Ok(PhaseInit::Random { seed }),
            other => match other.strip_prefix("random:").map(str::parse) {
                Some(Ok(seed)) => Ok(PhaseInit::Random { seed }),
                _ => Err(Error::param(
                    "design_init",
                    format!("unknown phase-field initialization `{other}`"),
                )),
            },
        }
    }

    /// Name accepted by [`PhaseInit::parse`]; random seeds are spelled out.
    pub fn name(self) -> String {
        match self {
            PhaseInit::Undecided => "zero".into(),
            PhaseInit::AllSoft => "all-soft".into(),
            PhaseInit::AllHard => "all-hard".into(),
            PhaseInit::Random { seed } => format!("random:{seed}"),
        }
    }
}
