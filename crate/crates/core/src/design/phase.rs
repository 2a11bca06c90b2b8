use crate::error::{Error, Result};
use crate::fem::{FeFunction, QuadratureRule};

/// Double-well coefficient `9/16` of the perimeter functional.
pub const DOUBLE_WELL: f64 = 9.0 / 16.0;

/// Smoothed indicator of the hard phase, `(v + 1)^2 / 4`.
#[inline]
pub fn chi(v: f64) -> f64 {
    0.25 * (v + 1.0) * (v + 1.0)
}

/// `d chi / dv`.
#[inline]
pub fn chi_prime(v: f64) -> f64 {
    0.5 * (v + 1.0)
}

/// Stiffness `b chi(v) + a (1 - chi(v))`.
#[inline]
pub fn a_of_v(v: f64, soft: f64, hard: f64) -> f64 {
    let c = chi(v);
    hard * c + soft * (1.0 - c)
}

/// Modica-Mortola perimeter `1/2 int eps v'^2 + (9/16)(v^2 - 1)^2 / eps`.
pub fn perimeter(v: &FeFunction, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", "interface width must be positive"));
    }
    let rule = QuadratureRule::default();
    let grid = v.grid();
    let h = grid.h();
    let mut total = 0.0;
    for cell in 0..grid.num_cells() {
        let dv = v.deriv_on_cell(cell);
        for (&s, &w) in rule.points().iter().zip(rule.weights()) {
            let x = v.eval_in_cell(cell, s);
            let well = x * x - 1.0;
            total += h * w * 0.5 * (eps * dv * dv + DOUBLE_WELL * well * well / eps);
        }
    }
    Ok(total)
}

/// Length covered by hard material, `int chi(v)`.
pub fn length_hard(v: &FeFunction) -> f64 {
    let rule = QuadratureRule::default();
    let grid = v.grid();
    let h = grid.h();
    (0..grid.num_cells())
        .map(|cell| {
            rule.points()
                .iter()
                .zip(rule.weights())
                .map(|(&s, &w)| h * w * chi(v.eval_in_cell(cell, s)))
                .sum::<f64>()
        })
        .sum()
}

/// Threshold `lambda = c_l / (1/a - 1/b)` of the optimality condition.
pub fn lambda_threshold(soft: f64, hard: f64, length_cost: f64) -> Result<f64> {
    if !(soft > 0.0 && soft < hard) {
        return Err(Error::param("a", "requires 0 < a < b"));
    }
    Ok(length_cost / (1.0 / soft - 1.0 / hard))
}
