//! The clamped beam state: discrete stored energy, Newton's method with
//! multilevel continuation, and reconstruction of the deformed curve.

mod assembly;
mod curve;
mod newton;
mod problem;

pub(crate) use assembly::{dot, norm_inf};
pub use assembly::{energy, hessian, residual, shear, StateSystem, SystemMatrix};
pub use curve::{reconstruct_curve, Curve};
pub(crate) use newton::newton_with_system;
pub use newton::{multilevel_solve, newton_solve, Globalization, NewtonOptions, StateInit, StateSolution};
pub use problem::{BeamProblem, PointConstraint, DEFAULT_PENALTY};
