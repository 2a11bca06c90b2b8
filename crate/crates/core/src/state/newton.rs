use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{FeFunction, UniformGrid};
use crate::state::assembly::{dot, norm_inf, StateSystem, SystemMatrix};
use crate::state::BeamProblem;

/// How Newton steps are safeguarded far from a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Globalization {
    /// Shift the Hessian until positive definite and backtrack on the energy
    /// (Armijo). Iterates descend, so only local minimizers are reached.
    Energy,
    /// Plain Newton direction, backtracking on the residual norm. Can settle
    /// on unstable stationary points.
    Residual,
}

/// Stopping rule for Newton's method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Target for the sup norm of the residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Extra steps taken after reaching `tol`, to push the residual to round-off.
    pub polish_steps: usize,
    /// Cap on the sup norm of a single update, in radians.
    pub max_step: f64,
    /// Halvings allowed in the backtracking line search.
    pub max_halvings: usize,
    pub globalization: Globalization,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            polish_steps: 0,
            max_step: 0.5,
            max_halvings: 30,
            globalization: Globalization::Energy,
        }
    }
}

/// Converged (or last) iterate of the state solver with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSolution {
    /// Phase relative to the clamp angle; `K(0) = 0`.
    pub phase: FeFunction,
    /// Per-cell shear `A K'`.
    pub shear: Vec<f64>,
    pub energy: f64,
    pub newton_iterations: usize,
    pub final_residual_norm: f64,
    pub converged: bool,
    /// Energy of every iterate, starting with the initial guess.
    pub energy_history: Vec<f64>,
    /// Newton iterations per level when produced by [`multilevel_solve`].
    pub level_iterations: Vec<(u32, usize)>,
}

impl StateSolution {
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NewtonDiverged {
                iterations: self.newton_iterations,
                residual: self.final_residual_norm,
            })
        }
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

const ARMIJO: f64 = 1e-4;
// below this step size energy differences are round-off; fall back to the residual
const TINY_STEP: f64 = 1e-7;

/// Newton iteration `K <- K - M[K]^{-1} R[K]` until `|R|_inf <= tol`.
///
/// Updates are capped at `max_step` and damped according to
/// `options.globalization`; near a nondegenerate solution full steps are taken.
pub fn newton_solve(init: &FeFunction, problem: &BeamProblem, options: &NewtonOptions) -> Result<StateSolution> {
    let system = StateSystem::new(problem, *init.grid())?;
    newton_with_system(&system, init, options)
}

pub(crate) fn newton_with_system(
    system: &StateSystem<'_>,
    init: &FeFunction,
    options: &NewtonOptions,
) -> Result<StateSolution> {
    let mut k = init.clone();
    k.coeffs_mut()[0] = 0.0;
    let mut r = system.residual(&k)?;
    let mut res = norm_inf(&r);
    let mut energy = system.energy(&k)?;
    let mut energy_history = vec![energy];
    let mut iterations = 0;
    let mut polish_left = options.polish_steps;
    loop {
        if res <= options.tol {
            if polish_left == 0 || res == 0.0 {
                break;
            }
            polish_left -= 1;
        } else if iterations >= options.max_iter {
            break;
        }
        let mut m = system.hessian(&k)?;
        if options.globalization == Globalization::Energy {
            make_positive_definite(&mut m);
        }
        let mut step = m.solve(&r)?;
        let size = norm_inf(&step);
        if size > options.max_step {
            let scale = options.max_step / size;
            step.iter_mut().for_each(|s| *s *= scale);
        }
        let slope = dot(&r, &step);
        let merit = l2(&r);
        let mut alpha = 1.0;
        let mut trial = k.clone();
        let mut trial_r = Vec::new();
        let mut trial_energy = energy;
        for halving in 0..=options.max_halvings {
            for ((t, k0), s) in trial.coeffs_mut().iter_mut().zip(k.coeffs()).zip(&step) {
                *t = k0 - alpha * s;
            }
            trial_r = system.residual(&trial)?;
            trial_energy = system.energy(&trial)?;
            let accept = match options.globalization {
                Globalization::Residual => l2(&trial_r) < merit,
                Globalization::Energy => {
                    trial_energy <= energy - ARMIJO * alpha * slope
                        || (alpha * size <= TINY_STEP && l2(&trial_r) < merit)
                }
            };
            if accept || halving == options.max_halvings {
                break;
            }
            alpha *= 0.5;
        }
        let new_res = norm_inf(&trial_r);
        if res <= options.tol && new_res >= res {
            // polishing reached round-off
            break;
        }
        k = trial;
        r = trial_r;
        energy = trial_energy;
        iterations += 1;
        energy_history.push(energy);
        res = new_res;
        if !res.is_finite() {
            return Err(Error::NewtonDiverged {
                iterations,
                residual: res,
            });
        }
    }
    let converged = res <= options.tol;
    Ok(StateSolution {
        shear: system.shear(&k)?,
        energy: *energy_history.last().expect("history starts with the initial energy"),
        phase: k,
        newton_iterations: iterations,
        final_residual_norm: res,
        converged,
        energy_history,
        level_iterations: Vec::new(),
    })
}

/// Adds the smallest power-of-ten multiple of `|T|_inf * 1e-6` to the
/// tridiagonal diagonal (clamped row excluded) that makes `m` positive definite.
fn make_positive_definite(m: &mut SystemMatrix) {
    if m.is_positive_definite() {
        return;
    }
    let base = m.tri.norm_inf() * 1e-6;
    let original = m.tri.diag.clone();
    let mut shift = base;
    loop {
        for (d, o) in m.tri.diag.iter_mut().zip(&original).skip(1) {
            *d = o + shift;
        }
        if m.is_positive_definite() || !shift.is_finite() {
            return;
        }
        shift *= 10.0;
    }
}

/// Newton on level `coarse`, then prolongate and re-solve up to level `fine`.
///
/// Every level must converge; failures carry the level.
pub fn multilevel_solve(
    problem: &BeamProblem,
    coarse: u32,
    fine: u32,
    init: &FeFunction,
    options: &NewtonOptions,
) -> Result<StateSolution> {
    if coarse > fine {
        return Err(Error::param("level_coarse", "must not exceed level_fine"));
    }
    if init.grid().level() != coarse {
        return Err(Error::param("init", "initial guess must live on the coarse level"));
    }
    let mut guess = init.clone();
    let mut per_level = Vec::new();
    let mut total = 0;
    for level in coarse..=fine {
        let at_level = |e: Error| Error::AtLevel {
            level,
            source: Box::new(e),
        };
        let sol = newton_solve(&guess, problem, options)
            .and_then(StateSolution::require_converged)
            .map_err(at_level)?;
        per_level.push((level, sol.newton_iterations));
        total += sol.newton_iterations;
        if level == fine {
            let mut sol = sol;
            sol.level_iterations = per_level;
            sol.newton_iterations = total;
            return Ok(sol);
        }
        guess = sol.phase.prolongate()?;
    }
    unreachable!("loop returns on the finest level")
}

/// Named starting guesses selecting different equilibrium branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateInit {
    /// `K = 0`; leads to the simple hanging beam.
    Simple,
    /// `K = 2 pi t`; the free end turned over to the other side.
    Twisted,
    /// `K = pi sin(pi t) / 2`; the unstable upright state between the two.
    SShape,
}

impl StateInit {
    pub fn profile(self, t: f64) -> f64 {
        use std::f64::consts::PI;
        match self {
            StateInit::Simple => 0.0,
            StateInit::Twisted => 2.0 * PI * t,
            StateInit::SShape => 0.5 * PI * (PI * t).sin(),
        }
    }

    pub fn on_grid(self, grid: UniformGrid) -> FeFunction {
        FeFunction::from_fn(grid, |t| self.profile(t))
    }

    /// Simple and twisted beams are local minimizers and are found by energy
    /// descent; the S-shaped state is a saddle.
    pub fn globalization(self) -> Globalization {
        match self {
            StateInit::SShape => Globalization::Residual,
            _ => Globalization::Energy,
        }
    }

    /// Options for following this branch, starting from `base`.
    pub fn options(self, base: &NewtonOptions) -> NewtonOptions {
        NewtonOptions {
            globalization: self.globalization(),
            ..*base
        }
    }

    /// Multilevel solve from this initialization on level `coarse`.
    pub fn solve(
        self,
        problem: &BeamProblem,
        coarse: u32,
        fine: u32,
        options: &NewtonOptions,
    ) -> Result<StateSolution> {
        let grid = UniformGrid::new(coarse)?;
        multilevel_solve(problem, coarse, fine, &self.on_grid(grid), &self.options(options))
    }

    pub fn name(self) -> &'static str {
        match self {
            StateInit::Simple => "simple",
            StateInit::Twisted => "twisted",
            StateInit::SShape => "s-shape",
        }
    }
}

impl std::str::FromStr for StateInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" | "zero" => Ok(StateInit::Simple),
            "twisted" => Ok(StateInit::Twisted),
            "s-shape" | "s" => Ok(StateInit::SShape),
            other => Err(Error::param("init", format!("unknown initialization `{other}`"))),
        }
    }
}
