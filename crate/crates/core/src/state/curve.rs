use serde::{Deserialize, Serialize};

use crate::fem::{FeFunction, QuadratureRule};

/// Beam centerline sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub points: Vec<[f64; 2]>,
}

impl Curve {
    pub fn end(&self) -> [f64; 2] {
        *self.points.last().expect("curve has at least two points")
    }

    /// Largest distance between consecutive nodes.
    pub fn max_chord(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
            .fold(0.0, f64::max)
    }
}

/// `gamma(t) = int_0^t (cos, sin)(K + K0)`, integrated cell by cell.
pub fn reconstruct_curve(k: &FeFunction, clamp_angle: f64) -> Curve {
    let rule = QuadratureRule::default();
    let grid = k.grid();
    let h = grid.h();
    let mut points = Vec::with_capacity(grid.num_nodes());
    let mut pos = [0.0, 0.0];
    points.push(pos);
    for cell in 0..grid.num_cells() {
        for (&s, &w) in rule.points().iter().zip(rule.weights()) {
            let (sin, cos) = (k.eval_in_cell(cell, s) + clamp_angle).sin_cos();
            pos[0] += h * w * cos;
            pos[1] += h * w * sin;
        }
        points.push(pos);
    }
    Curve { points }
}
