//! Augmented compliance of a phase-field design, its adjoint state and the
//! reduced gradient with respect to the nodal phase field.
//!
//! Sign convention: the adjoint `P` solves `M[K] P = D_K J`, with `M[K]` the
//! (Dirichlet-treated) state Hessian and `D_K J` the gradient of the load
//! term. With this choice `p = A P'` satisfies `p' = delta (1 - t)(cos - P sin)`
//! with `p(1) = 0`, and the reduced gradient reads
//! `D_v J - int A'(v) w K' P'`.

mod objective;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::design::{chi_prime, length_hard, perimeter, DOUBLE_WELL};
use crate::error::{Error, Result};
use crate::fem::{FeFunction, QuadratureRule};
use crate::state::{dot, BeamProblem, StateSolution, StateSystem};

pub use objective::{DesignObjective, Evaluation};

/// Cost weights of the augmented compliance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignParams {
    /// `c_l`, price per unit length of hard material.
    pub length_cost: f64,
    /// `c_p`, weight of the diffuse perimeter.
    pub perimeter_cost: f64,
    /// Interface width.
    pub epsilon: f64,
}

impl DesignParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_cost > 0.0) {
            return Err(Error::param("cl", "must be positive"));
        }
        if !(self.perimeter_cost >= 0.0) {
            return Err(Error::param("cp", "must be non-negative"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::param("eps", "must be positive"));
        }
        Ok(())
    }

    /// `lambda = c_l / (1/a - 1/b)`.
    pub fn lambda(&self, soft: f64, hard: f64) -> Result<f64> {
        crate::design::lambda_threshold(soft, hard, self.length_cost)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplianceParts {
    pub load: f64,
    pub length: f64,
    pub perimeter: f64,
    pub total: f64,
}

/// `J(K, v) = int -delta (1 - t) sin(K + K0) + c_l Len(v) + c_p Per(v)`.
pub fn compliance(
    k: &FeFunction,
    v: &FeFunction,
    params: &DesignParams,
    problem: &BeamProblem,
) -> Result<ComplianceParts> {
    if k.grid() != v.grid() {
        return Err(Error::GridMismatch {
            expected: k.coeffs().len(),
            found: v.coeffs().len(),
        });
    }
    let plain = BeamProblem {
        constraints: Vec::new(),
        ..BeamProblem::homogeneous(problem.delta, problem.clamp_angle, 1.0)
    };
    let load = StateSystem::new(&plain, *k.grid())?.load_compliance(k)?;
    let length = params.length_cost * length_hard(v);
    let perimeter = if params.perimeter_cost == 0.0 {
        0.0
    } else {
        params.perimeter_cost * perimeter(v, params.epsilon)?
    };
    Ok(ComplianceParts {
        load,
        length,
        perimeter,
        total: load + length + perimeter,
    })
}

/// Adjoint state and its per-cell flux `p = A P'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjointSolution {
    pub adjoint: FeFunction,
    pub flux: Vec<f64>,
}

/// Solves `M[K] P = D_K J` with the state Hessian of `problem` at `state`.
pub fn adjoint_solve(state: &StateSolution, problem: &BeamProblem) -> Result<AdjointSolution> {
    let system = StateSystem::new(problem, *state.phase.grid())?;
    adjoint_with_system(&system, &state.phase)
}

pub(crate) fn adjoint_with_system(system: &StateSystem<'_>, k: &FeFunction) -> Result<AdjointSolution> {
    let m = system.hessian(k)?;
    let rhs = system.load_gradient(k)?;
    let p = m.solve(&rhs)?;
    let adjoint = FeFunction::new(*k.grid(), p)?;
    let flux = system
        .cell_stiffness()
        .iter()
        .enumerate()
        .map(|(c, a)| a * adjoint.deriv_on_cell(c))
        .collect();
    Ok(AdjointSolution { adjoint, flux })
}

/// Gradient of `v -> J(K(v), v)` tested with every hat function.
pub fn reduced_gradient(
    v: &FeFunction,
    k: &FeFunction,
    adjoint: &FeFunction,
    params: &DesignParams,
    problem: &BeamProblem,
) -> Result<Vec<f64>> {
    let grid = v.grid();
    if k.grid() != grid || adjoint.grid() != grid {
        return Err(Error::GridMismatch {
            expected: grid.num_nodes(),
            found: k.coeffs().len(),
        });
    }
    let rule = QuadratureRule::default();
    let h = grid.h();
    let inv_h = 1.0 / h;
    let (cl, cp, eps) = (params.length_cost, params.perimeter_cost, params.epsilon);
    let jump = problem.hard - problem.soft;
    let mut g = vec![0.0; grid.num_nodes()];
    for cell in 0..grid.num_cells() {
        let dv = v.deriv_on_cell(cell);
        let coupling = k.deriv_on_cell(cell) * adjoint.deriv_on_cell(cell);
        for (&s, &w) in rule.points().iter().zip(rule.weights()) {
            let w = h * w;
            let vq = v.eval_in_cell(cell, s);
            let pointwise = cl * chi_prime(vq) + cp * 2.0 * DOUBLE_WELL / eps * (vq * vq - 1.0) * vq
                - jump * chi_prime(vq) * coupling;
            let grad_part = cp * eps * dv * inv_h;
            g[cell] += w * (pointwise * (1.0 - s) - grad_part);
            g[cell + 1] += w * (pointwise * s + grad_part);
        }
    }
    Ok(g)
}

/// Worst relative error between central differences of the reduced cost and
/// the assembled gradient over `directions` random directions.
pub fn fd_gradient_check(
    v: &FeFunction,
    params: &DesignParams,
    problem: &BeamProblem,
    step: f64,
    directions: usize,
    seed: u64,
) -> Result<f64> {
    let objective = DesignObjective::new(problem.clone(), *params, *v.grid())?;
    let base = objective.evaluate(v, None)?;
    let grad = objective.gradient(&base)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..directions {
        let w: Vec<f64> = (0..v.coeffs().len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let shifted = |sign: f64| {
            let c: Vec<f64> = v.coeffs().iter().zip(&w).map(|(x, d)| x + sign * step * d).collect();
            FeFunction::new(*v.grid(), c)
        };
        let plus = objective.evaluate(&shifted(1.0)?, Some(&base.state.phase))?;
        let minus = objective.evaluate(&shifted(-1.0)?, Some(&base.state.phase))?;
        let fd = (plus.cost.total - minus.cost.total) / (2.0 * step);
        let exact = dot(&grad, &w);
        let err = (fd - exact).abs() / exact.abs().max(1e-12);
        worst = worst.max(err);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests;
