use serde::{Deserialize, Serialize};

use crate::adjoint::{AdjointSolution, DesignObjective, Evaluation};
use crate::design::{
    check_optimality_condition, check_ordered, extract_interfaces, OptimalityReport, OrderCheck, BAND_WIDTH,
};
use crate::error::{Error, Result};
use crate::fem::FeFunction;
use crate::state::{dot, norm_inf, StateSolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BfgsOptions {
    /// Absolute gradient tolerance; `None` means `1e-6 (1 + |J|)`.
    pub tol_grad: Option<f64>,
    pub max_iter: usize,
    /// Cap on the sup norm of a trial step.
    pub max_step: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub max_halvings: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            tol_grad: None,
            max_iter: 3000,
            max_step: 0.5,
            armijo: 1e-4,
            max_halvings: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    GradientTolerance,
    MaxIterations,
    /// No decrease along the quasi-Newton or the steepest-descent direction.
    LineSearchStalled,
}

/// Optimized design with the state, adjoint and post-hoc checks at the optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub v_final: FeFunction,
    pub state: StateSolution,
    pub adjoint: AdjointSolution,
    pub cost_history: Vec<f64>,
    pub gradient_norm_history: Vec<f64>,
    pub interfaces: Vec<f64>,
    pub order: OrderCheck,
    pub optimality: OptimalityReport,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub lambda: f64,
}

impl DesignResult {
    pub fn final_cost(&self) -> f64 {
        *self.cost_history.last().expect("history holds the initial cost")
    }
}

/// Dense inverse-Hessian BFGS with backtracking Armijo line search.
pub fn bfgs_optimize(objective: &DesignObjective, v_init: &FeFunction, options: &BfgsOptions) -> Result<DesignResult> {
    let n = v_init.coeffs().len();
    let mut current = objective.evaluate(v_init, None)?;
    let mut grad = objective.gradient(&current)?;
    let mut cost_history = vec![current.cost.total];
    let mut gradient_norm_history = vec![norm_inf(&grad)];
    // row-major inverse Hessian approximation, None until the first update
    let mut inv_hess: Option<Vec<f64>> = None;
    let mut iterations = 0;
    let stop_reason = loop {
        let gnorm = norm_inf(&grad);
        let tol = options.tol_grad.unwrap_or(1e-6 * (1.0 + current.cost.total.abs()));
        if gnorm <= tol {
            break StopReason::GradientTolerance;
        }
        if iterations >= options.max_iter {
            break StopReason::MaxIterations;
        }
        let mut accepted = None;
        for attempt in 0..2 {
            let quasi_newton = attempt == 0 && inv_hess.is_some();
            let mut dir = match (&inv_hess, quasi_newton) {
                (Some(h), true) => mat_vec(h, &grad, n).into_iter().map(|x| -x).collect(),
                _ => grad.iter().map(|g| -g).collect::<Vec<_>>(),
            };
            let mut slope = dot(&grad, &dir);
            if quasi_newton && slope >= 0.0 {
                continue;
            }
            let dmax = norm_inf(&dir);
            if dmax > options.max_step {
                let s = options.max_step / dmax;
                dir.iter_mut().for_each(|d| *d *= s);
                slope *= s;
            }
            if let Some(found) = line_search(objective, &current, &dir, slope, options)? {
                accepted = Some((found, dir));
                break;
            }
            if !quasi_newton {
                break;
            }
        }
        let Some(((next, alpha), dir)) = accepted else {
            break StopReason::LineSearchStalled;
        };
        let next_grad = objective.gradient(&next)?;
        let s: Vec<f64> = dir.iter().map(|d| alpha * d).collect();
        let y: Vec<f64> = next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            let h = inv_hess.get_or_insert_with(|| {
                let scale = sy / dot(&y, &y);
                let mut m = vec![0.0; n * n];
                for i in 0..n {
                    m[i * n + i] = scale;
                }
                m
            });
            bfgs_update(h, &s, &y, sy, n);
        }
        current = next;
        grad = next_grad;
        iterations += 1;
        cost_history.push(current.cost.total);
        gradient_norm_history.push(norm_inf(&grad));
    };
    finish(
        objective,
        current,
        cost_history,
        gradient_norm_history,
        iterations,
        stop_reason,
    )
}

fn finish(
    objective: &DesignObjective,
    current: Evaluation,
    cost_history: Vec<f64>,
    gradient_norm_history: Vec<f64>,
    iterations: usize,
    stop_reason: StopReason,
) -> Result<DesignResult> {
    let eps = objective.params().epsilon;
    let base = objective.base_problem();
    let adjoint = objective.adjoint(&current)?;
    let lambda = objective.params().lambda(base.soft, base.hard)?;
    let interfaces = extract_interfaces(&current.v, eps);
    let optimality = check_optimality_condition(
        &current.v,
        &current.state.shear,
        &adjoint.flux,
        lambda,
        &interfaces,
        BAND_WIDTH * eps,
    );
    Ok(DesignResult {
        order: check_ordered(&current.v, eps),
        interfaces,
        optimality,
        v_final: current.v,
        state: current.state,
        adjoint,
        cost_history,
        gradient_norm_history,
        iterations,
        converged: stop_reason == StopReason::GradientTolerance,
        stop_reason,
        lambda,
    })
}

/// Backtracking until `J(v + a d) <= J(v) + c a g.d`; failed state solves count as rejections.
fn line_search(
    objective: &DesignObjective,
    current: &Evaluation,
    dir: &[f64],
    slope: f64,
    options: &BfgsOptions,
) -> Result<Option<(Evaluation, f64)>> {
    let f0 = current.cost.total;
    let mut alpha = 1.0;
    for _ in 0..=options.max_halvings {
        let coeffs: Vec<f64> = current.v.coeffs().iter().zip(dir).map(|(v, d)| v + alpha * d).collect();
        let trial_v = FeFunction::new(*current.v.grid(), coeffs)?;
        match objective.evaluate(&trial_v, Some(&current.state.phase)) {
            Ok(trial) if trial.cost.total < f0 && trial.cost.total <= f0 + options.armijo * alpha * slope => {
                return Ok(Some((trial, alpha)));
            }
            Ok(_) => {}
            Err(Error::NewtonDiverged { .. }) | Err(Error::AtLevel { .. }) | Err(Error::Singular { .. }) => {}
            Err(e) => return Err(e),
        }
        alpha *= 0.5;
    }
    Ok(None)
}

fn mat_vec(m: &[f64], x: &[f64], n: usize) -> Vec<f64> {
    m.chunks_exact(n).map(|row| dot(row, x)).collect()
}

/// `H <- (I - r s y^T) H (I - r y s^T) + r s s^T` with `r = 1 / (s.y)`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64, n: usize) {
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y, n);
    let yhy = dot(y, &hy);
    let coef = rho * rho * yhy + rho;
    for i in 0..n {
        let row = &mut h[i * n..(i + 1) * n];
        for j in 0..n {
            row[j] += coef * s[i] * s[j] - rho * (s[i] * hy[j] + hy[i] * s[j]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn update_satisfies_secant_equation() {
        let n = 3;
        let mut h = vec![1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.5];
        let s = [0.3, -0.2, 0.5];
        let y = [1.0, 0.1, 0.4];
        let sy = dot(&s, &y);
        bfgs_update(&mut h, &s, &y, sy, n);
        let hy = mat_vec(&h, &y, n);
        for i in 0..n {
            assert!((hy[i] - s[i]).abs() < 1e-14);
        }
    }
}
