use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::adjoint::{adjoint_solve, compliance, AdjointSolution, DesignObjective};
use crate::design::{bfgs_optimize, chi, hard_intervals, DesignResult, PhaseInit, StopReason};
use crate::error::{Error, Result};
use crate::fem::FeFunction;
use crate::homogenization::{homogenization_experiment, Levels, RelaxedDesign};
use crate::io::artifact::{cells_to_nodes, NodalTable, RunArtifact};
use crate::io::config::{Command, ExperimentConfig};
use crate::io::plot::{export_plot, PlotKind};
use crate::material::Material;
use crate::state::{reconstruct_curve, BeamProblem, NewtonOptions, StateSolution};
use crate::verification::{
    compute_auxiliary, verify_kp_structure, verify_monotone_range, verify_q_single_crossing, verify_shear_structure,
    SignReport,
};

/// Runs the pipeline selected by `config.command`. Failures end up in the
/// record rather than in an `Err`.
pub fn run_experiment(config: &ExperimentConfig) -> RunArtifact {
    let mut art = RunArtifact::new(config);
    let outcome = match config.command {
        Command::SolveState => solve_state(config, &mut art),
        Command::OptimizeDesign => optimize(config, &mut art).map(|_| ()),
        Command::Verify => verify(config, &mut art),
        Command::Homogenize => homogenize(config, &mut art),
        Command::Sweep => sweep(config, &mut art),
    };
    if let Err(e) = outcome {
        art.fail(&e);
    }
    art
}

fn table(state: &StateSolution, v: &FeFunction, theta: Vec<f64>, adjoint: Option<&AdjointSolution>) -> NodalTable {
    let grid = state.phase.grid();
    let n = grid.num_nodes();
    let (p_nodal, flux) = match adjoint {
        Some(a) => (a.adjoint.coeffs().to_vec(), cells_to_nodes(&a.flux)),
        None => (vec![0.0; n], vec![0.0; n]),
    };
    NodalTable {
        t: grid.nodes(),
        phase: state.phase.coeffs().to_vec(),
        v: v.coeffs().to_vec(),
        theta,
        shear: cells_to_nodes(&state.shear),
        adjoint: p_nodal,
        flux,
    }
}

fn record_state(art: &mut RunArtifact, state: &StateSolution, problem: &BeamProblem) {
    art.scalar("energy", state.energy);
    art.scalar("K_end", *state.phase.coeffs().last().expect("grid has nodes"));
    art.scalar("residual", state.final_residual_norm);
    art.scalar("newton_iterations", state.newton_iterations as f64);
    art.scalar("shear_end", *state.shear.last().expect("grid has cells"));
    art.flag("state_converged", state.converged);
    art.series("energy_history", state.energy_history.clone());
    let curve = reconstruct_curve(&state.phase, problem.clamp_angle);
    for (i, c) in problem.constraints.iter().enumerate() {
        let at = curve_at(&curve.points, c.time);
        art.scalar(
            &format!("constraint_{i}_distance"),
            (at[0] - c.target[0]).hypot(at[1] - c.target[1]),
        );
    }
    art.curve = Some(curve.points);
}

/// Linear interpolation of nodal curve points at time `t`.
fn curve_at(points: &[[f64; 2]], t: f64) -> [f64; 2] {
    let cells = points.len() - 1;
    let x = (t * cells as f64).clamp(0.0, cells as f64);
    let i = (x.floor() as usize).min(cells - 1);
    let s = x - i as f64;
    [
        points[i][0] + s * (points[i + 1][0] - points[i][0]),
        points[i][1] + s * (points[i + 1][1] - points[i][1]),
    ]
}

fn solve_state(config: &ExperimentConfig, art: &mut RunArtifact) -> Result<()> {
    let problem = config.beam_problem();
    let state = config.state_init.solve(
        &problem,
        config.level_coarse,
        config.level_fine,
        &NewtonOptions::default(),
    )?;
    record_state(art, &state, &problem);
    art.series(
        "level_iterations",
        state.level_iterations.iter().map(|&(_, it)| it as f64).collect(),
    );
    let adjoint = adjoint_solve(&state, &problem).ok();
    art.flag("adjoint_solved", adjoint.is_some());
    let grid = *state.phase.grid();
    let n = grid.num_nodes();
    art.table = Some(table(
        &state,
        &FeFunction::constant(grid, 1.0),
        vec![1.0; n],
        adjoint.as_ref(),
    ));
    Ok(())
}

fn optimize(config: &ExperimentConfig, art: &mut RunArtifact) -> Result<DesignResult> {
    let grid = config.fine_grid()?;
    let base = config.beam_problem();
    let params = config.design_params()?;
    let mut objective = DesignObjective::new(base.clone(), params, grid)?.with_init(config.state_init);
    objective.coarse_level = config.level_coarse;
    let result = bfgs_optimize(&objective, &config.design_init.on_grid(grid), &config.bfgs_options())?;

    let problem = objective.problem_for(&result.v_final);
    record_state(art, &result.state, &problem);
    let parts = compliance(&result.state.phase, &result.v_final, &params, &base)?;
    art.scalar("cost", parts.total);
    art.scalar("cost_load", parts.load);
    art.scalar("cost_length", parts.length);
    art.scalar("cost_perimeter", parts.perimeter);
    art.scalar("lambda", result.lambda);
    art.scalar("epsilon", params.epsilon);
    art.scalar("bfgs_iterations", result.iterations as f64);
    art.scalar("interface_count", result.interfaces.len() as f64);
    if let Some(t) = result.order.t_star {
        art.scalar("t_star", t);
    }
    art.scalar("optimality_violations", result.optimality.violations.len() as f64);
    for (name, x) in [
        ("optimality_worst_hard", result.optimality.worst_hard),
        ("optimality_worst_soft", result.optimality.worst_soft),
    ] {
        // infinite when no cell of that phase exists
        if x.is_finite() {
            art.scalar(name, x);
        }
    }
    art.flag("converged", result.converged);
    art.flag("ordered", result.order.ordered);
    art.flag("optimality_clean", result.optimality.is_clean());
    art.series("cost_history", result.cost_history.clone());
    art.series("gradient_norm_history", result.gradient_norm_history.clone());
    art.series("interfaces", result.interfaces.clone());
    art.series(
        "hard_intervals",
        hard_intervals(&result.v_final, params.epsilon)
            .into_iter()
            .flat_map(|(a, b)| [a, b])
            .collect(),
    );
    if result.stop_reason != StopReason::GradientTolerance {
        art.violate(format!(
            "optimizer stopped without convergence: {:?}",
            result.stop_reason
        ));
    }
    let theta = result.v_final.coeffs().iter().map(|&v| chi(v).min(1.0)).collect();
    art.table = Some(table(&result.state, &result.v_final, theta, Some(&result.adjoint)));
    Ok(result)
}

fn report(art: &mut RunArtifact, r: &SignReport) {
    art.flag(&format!("{}_clean", r.quantity), r.is_clean());
    for v in r.violations.iter().take(5) {
        art.violate(format!(
            "{} at t = {:.4}: {} ({:.3e})",
            r.quantity, v.t, v.what, v.magnitude
        ));
    }
    if r.violations.len() > 5 {
        art.violate(format!("{}: {} more violations", r.quantity, r.violations.len() - 5));
    }
}

/// Optimizes, then checks the ordered structure, the optimality condition,
/// the sign structure of state and adjoint, and the boundary behaviour of `p`.
fn verify(config: &ExperimentConfig, art: &mut RunArtifact) -> Result<()> {
    let result = optimize(config, art)?;
    let grid = *result.v_final.grid();
    let (h, delta) = (grid.h(), config.delta);
    if !result.order.ordered {
        art.violate(format!("design not ordered; interfaces {:?}", result.interfaces));
    }
    if !result.optimality.is_clean() {
        art.violate(format!(
            "optimality condition violated on {} cells",
            result.optimality.violations.len()
        ));
    }
    let state = &result.state;
    report(art, &verify_monotone_range(&state.phase, config.clamp_angle));
    report(art, &verify_shear_structure(&state.shear, &grid, 10.0 * h * delta));
    let aux = compute_auxiliary(
        &state.phase,
        &result.adjoint.adjoint,
        &state.shear,
        &result.adjoint.flux,
        config.clamp_angle,
    )?;
    let q = verify_q_single_crossing(&aux);
    if let Some(t0) = q.change {
        art.scalar("t0", t0);
    }
    report(art, &q);
    let kp = verify_kp_structure(&state.shear, &result.adjoint.flux, &grid);
    report(art, &kp);
    if let (Some(t_star), Some(t2)) = (result.order.t_star, kp.change) {
        art.scalar("t2", t2);
        art.flag("t_star_before_t2", t_star < t2);
        if t_star >= t2 {
            art.violate(format!("t* = {t_star:.4} is not below t2 = {t2:.4}"));
        }
    }
    let flux = &result.adjoint.flux;
    let last = flux.len() - 1;
    let p_slope0 = (flux[1] - flux[0]) / h / delta.max(f64::MIN_POSITIVE);
    art.scalar("p_start", flux[0]);
    art.scalar("p_end", flux[last]);
    art.scalar("p_slope_start_over_delta", p_slope0);
    if flux[last].abs() > 10.0 * h * delta {
        art.violate(format!("|p(1)| = {:.3e} exceeds 10 h delta", flux[last].abs()));
    }
    if delta > 0.0 && !(flux[0] < 0.0) {
        art.violate("p(0) is not negative");
    }
    if delta > 0.0 && (p_slope0 - 1.0).abs() > 0.05 {
        art.violate(format!("p'(0) / delta = {p_slope0:.4}, expected 1"));
    }
    Ok(())
}

fn homogenize(config: &ExperimentConfig, art: &mut RunArtifact) -> Result<()> {
    let grid = config.fine_grid()?;
    let theta_fn = FeFunction::constant(grid, config.theta);
    let relaxed = RelaxedDesign::new(theta_fn.clone())?;
    let base = config.beam_problem();
    let levels = Levels {
        coarse: config.level_coarse,
        fine: config.level_fine,
    };
    let result = homogenization_experiment(&relaxed, &config.periods, &base, levels)?;
    art.series("periods", result.rows.iter().map(|r| r.periods as f64).collect());
    art.series("error", result.rows.iter().map(|r| r.error).collect());
    art.series(
        "arithmetic_error",
        result.rows.iter().map(|r| r.arithmetic_error).collect(),
    );
    art.flag("monotone", result.monotone);
    if let Some(last) = result.rows.last() {
        art.scalar("final_error", last.error);
        art.scalar("final_arithmetic_error", last.arithmetic_error);
    }
    if !result.monotone {
        art.violate("laminate errors do not decrease strictly");
    }
    let problem = base.clone().with_material(
        Material::Relaxed {
            theta: theta_fn,
            soft: base.soft,
            hard: base.hard,
        },
        base.soft,
        base.hard,
    );
    record_state(art, &result.harmonic, &problem);
    let adjoint = adjoint_solve(&result.harmonic, &problem).ok();
    // phase field with chi(v) = theta
    let v = FeFunction::constant(grid, 2.0 * config.theta.sqrt() - 1.0);
    let n = grid.num_nodes();
    art.table = Some(table(&result.harmonic, &v, vec![config.theta; n], adjoint.as_ref()));
    Ok(())
}

/// Directory name of a sweep member.
pub fn sweep_label(init: PhaseInit) -> String {
    init.name().replace(':', "-")
}

fn sweep(config: &ExperimentConfig, art: &mut RunArtifact) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Degenerate(format!("worker pool: {e}")))?;
    let children: Vec<RunArtifact> = pool.install(|| {
        config
            .sweep
            .par_iter()
            .map(|&init| {
                let mut c = config.clone();
                c.command = Command::OptimizeDesign;
                c.design_init = init;
                let mut child = run_experiment(&c);
                child.label = sweep_label(init);
                child
            })
            .collect()
    });
    for child in &children {
        let label = &child.label;
        for key in ["cost", "t_star", "interface_count"] {
            if let Some(&x) = child.scalars.get(key) {
                art.scalar(&format!("{label}.{key}"), x);
            }
        }
        if let Some(&ordered) = child.flags.get("ordered") {
            art.flag(&format!("{label}.ordered"), ordered);
        }
        if !child.success {
            art.violate(format!("{label}: run failed"));
        }
    }
    art.children = children;
    Ok(())
}

/// Writes `record.json`, `config.txt`, `data.csv` and the plots into `dir`;
/// sweep members go to subdirectories. Returns the files written.
pub fn write_outputs(art: &RunArtifact, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: &str, text: &str| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, text)?;
        written.push(path);
        Ok(())
    };
    put("config.txt", &art.config.to_text())?;
    put("record.json", &art.to_json()?)?;
    if let Some(table) = &art.table {
        let path = dir.join("data.csv");
        table.write_csv(&path)?;
        written.push(path);
        for kind in PlotKind::ALL {
            if kind == PlotKind::Curve && art.curve.is_none() {
                continue;
            }
            let svg = export_plot(art, kind)?;
            let path = dir.join(kind.file_name());
            std::fs::write(&path, svg)?;
            written.push(path);
        }
    }
    for child in &art.children {
        written.extend(write_outputs(child, &dir.join(&child.label))?);
    }
    Ok(written)
}
