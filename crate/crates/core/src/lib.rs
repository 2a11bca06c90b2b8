//! Clamped, nonlinearly elastic planar beams under gravity.
//!
//! The beam is described by its turning angle `K` (relative to the clamp
//! angle `K0`), so the curve `gamma(t) = int_0^t exp(i (K + K0))` is unit
//! speed by construction. The crate provides
//!
//! - [`fem`]: dyadic grids, P1 functions, Gauss quadrature, banded solves;
//! - [`state`]: Newton's method with multilevel continuation for the
//!   equilibrium of the stored energy, optionally with point constraints;
//! - [`adjoint`]: augmented compliance, adjoint state and reduced gradient;
//! - [`design`]: phase-field optimization of the two-material distribution;
//! - [`homogenization`]: harmonic-mean relaxation and laminate experiments;
//! - [`verification`]: sign and monotonicity checkers for converged pairs;
//! - [`io`]: configuration, experiment runner, CSV/JSON/SVG output.

pub mod adjoint;
pub mod design;
mod error;
pub mod fem;
pub mod homogenization;
pub mod io;
pub mod material;
pub mod state;
pub mod verification;

pub use adjoint::{AdjointSolution, ComplianceParts, DesignObjective, DesignParams};
pub use design::{bfgs_optimize, BfgsOptions, DesignResult, PhaseInit};
pub use error::{Error, Result};
pub use fem::{FeFunction, QuadratureRule, TridiagonalMatrix, UniformGrid};
pub use material::Material;
pub use state::{BeamProblem, Curve, Globalization, NewtonOptions, PointConstraint, StateInit, StateSolution};
