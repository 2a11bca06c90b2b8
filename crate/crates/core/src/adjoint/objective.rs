use crate::adjoint::{
    adjoint_with_system, compliance, reduced_gradient, AdjointSolution, ComplianceParts, DesignParams,
};
use crate::error::Result;
use crate::fem::{FeFunction, UniformGrid};
use crate::material::Material;
use crate::state::{newton_with_system, BeamProblem, NewtonOptions, StateInit, StateSolution, StateSystem};

/// Reduced cost `v -> J(K(v), v)` on a fixed grid.
#[derive(Debug, Clone)]
pub struct DesignObjective {
    base: BeamProblem,
    params: DesignParams,
    grid: UniformGrid,
    /// Branch used when no warm start is available.
    pub init: StateInit,
    pub coarse_level: u32,
    pub newton: NewtonOptions,
}

/// Cost and state at one phase field.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub v: FeFunction,
    pub state: StateSolution,
    pub cost: ComplianceParts,
}

impl DesignObjective {
    pub fn new(base: BeamProblem, params: DesignParams, grid: UniformGrid) -> Result<Self> {
        params.validate()?;
        base.validate()?;
        Ok(Self {
            base,
            params,
            grid,
            init: StateInit::Simple,
            coarse_level: 3.min(grid.level()),
            newton: NewtonOptions {
                polish_steps: 3,
                ..NewtonOptions::default()
            },
        })
    }

    pub fn with_init(mut self, init: StateInit) -> Self {
        self.init = init;
        self
    }

    pub fn params(&self) -> &DesignParams {
        &self.params
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn base_problem(&self) -> &BeamProblem {
        &self.base
    }

    /// The beam problem with stiffness `A(v)`.
    pub fn problem_for(&self, v: &FeFunction) -> BeamProblem {
        let (soft, hard) = (self.base.soft, self.base.hard);
        self.base.clone().with_material(
            Material::PhaseField {
                v: v.clone(),
                soft,
                hard,
            },
            soft,
            hard,
        )
    }

    /// Solves the state for `v`, warm-started from `warm` when given.
    ///
    /// A failed warm start falls back to the multilevel solve from the
    /// initialization of the tracked branch.
    pub fn solve_state(&self, v: &FeFunction, warm: Option<&FeFunction>) -> Result<StateSolution> {
        let problem = self.problem_for(v);
        let options = self.init.options(&self.newton);
        if let Some(warm) = warm {
            let system = StateSystem::new(&problem, self.grid)?;
            if let Ok(sol) = newton_with_system(&system, warm, &options) {
                if sol.converged {
                    return Ok(sol);
                }
            }
        }
        self.init
            .solve(&problem, self.coarse_level, self.grid.level(), &self.newton)
    }

    pub fn evaluate(&self, v: &FeFunction, warm: Option<&FeFunction>) -> Result<Evaluation> {
        let state = self.solve_state(v, warm)?;
        let cost = compliance(&state.phase, v, &self.params, &self.base)?;
        Ok(Evaluation {
            v: v.clone(),
            state,
            cost,
        })
    }

    pub fn adjoint(&self, eval: &Evaluation) -> Result<AdjointSolution> {
        let problem = self.problem_for(&eval.v);
        let system = StateSystem::new(&problem, self.grid)?;
        adjoint_with_system(&system, &eval.state.phase)
    }

    pub fn gradient(&self, eval: &Evaluation) -> Result<Vec<f64>> {
        let adjoint = self.adjoint(eval)?;
        reduced_gradient(&eval.v, &eval.state.phase, &adjoint.adjoint, &self.params, &self.base)
    }
}
