use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::Material;

/// Default penalty weight for prescribed beam positions.
pub const DEFAULT_PENALTY: f64 = 1e4;

/// Penalty `mu |gamma(time) - target|^2` pulling the curve through a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointConstraint {
    pub time: f64,
    pub target: [f64; 2],
    pub weight: f64,
}

impl PointConstraint {
    pub fn new(time: f64, target: [f64; 2]) -> Self {
        Self {
            time,
            target,
            weight: DEFAULT_PENALTY,
        }
    }
}

/// Clamped beam under the vertical load `f = -delta e2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamProblem {
    pub delta: f64,
    pub clamp_angle: f64,
    pub material: Material,
    pub soft: f64,
    pub hard: f64,
    pub constraints: Vec<PointConstraint>,
}

impl BeamProblem {
    /// Homogeneous beam with stiffness `stiffness`.
    pub fn homogeneous(delta: f64, clamp_angle: f64, stiffness: f64) -> Self {
        Self {
            delta,
            clamp_angle,
            material: Material::Homogeneous(stiffness),
            soft: stiffness,
            hard: stiffness,
            constraints: Vec::new(),
        }
    }

    pub fn with_material(mut self, material: Material, soft: f64, hard: f64) -> Self {
        self.material = material;
        self.soft = soft;
        self.hard = hard;
        self
    }

    pub fn with_constraints(mut self, constraints: Vec<PointConstraint>) -> Self {
        self.constraints = constraints;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::param("delta", "must be finite and non-negative"));
        }
        if !self.clamp_angle.is_finite() {
            return Err(Error::param("K0", "must be finite"));
        }
        if !(self.soft > 0.0 && self.soft <= self.hard && self.hard.is_finite()) {
            return Err(Error::param("a", "material bounds must satisfy 0 < a <= b"));
        }
        for c in &self.constraints {
            if !(c.time > 0.0 && c.time <= 1.0) {
                return Err(Error::param("constraints", "times must lie in (0, 1]"));
            }
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return Err(Error::param("constraints", "penalty weight must be positive"));
            }
        }
        Ok(())
    }
}
