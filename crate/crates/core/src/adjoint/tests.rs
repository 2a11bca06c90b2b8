use std::f64::consts::FRAC_PI_2;

use super::*;
use crate::fem::UniformGrid;
use crate::material::Material;
use crate::state::{newton_solve, NewtonOptions};

fn params(cl: f64, cp: f64, eps: f64) -> DesignParams {
    DesignParams {
        length_cost: cl,
        perimeter_cost: cp,
        epsilon: eps,
    }
}

fn design_problem(delta: f64) -> BeamProblem {
    BeamProblem::homogeneous(delta, 0.0, 1.0).with_material(Material::Homogeneous(1.0), 0.5, 1.0)
}

fn random_v(grid: UniformGrid, seed: u64) -> FeFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = (0..grid.num_nodes()).map(|_| rng.gen_range(-0.5..0.5)).collect();
    FeFunction::new(grid, c).unwrap()
}

fn solved(problem: &BeamProblem, grid: UniformGrid) -> StateSolution {
    let opts = NewtonOptions {
        polish_steps: 3,
        ..NewtonOptions::default()
    };
    newton_solve(&FeFunction::zeros(grid), problem, &opts).unwrap()
}

#[test]
fn compliance_examples() {
    let g = UniformGrid::new(6).unwrap();
    let k = FeFunction::zeros(g);
    let p = params(1.0, 1.0, g.h());
    let soft = compliance(&k, &FeFunction::constant(g, -1.0), &p, &design_problem(1.0)).unwrap();
    assert_eq!(soft.total, 0.0);
    assert_eq!((soft.load, soft.length, soft.perimeter), (0.0, 0.0, 0.0));

    let hard = compliance(&k, &FeFunction::constant(g, 1.0), &p, &design_problem(1.0)).unwrap();
    assert!(hard.load.abs() < 1e-15);
    assert!((hard.length - 1.0).abs() < 1e-14);
    assert_eq!(hard.perimeter, 0.0);
    assert!((hard.total - 1.0).abs() < 1e-14);

    let upright = BeamProblem::homogeneous(1.0, FRAC_PI_2, 1.0);
    let c = compliance(&k, &FeFunction::constant(g, -1.0), &p, &upright).unwrap();
    assert!((c.load + 0.5).abs() < 1e-14);
}

#[test]
fn compliance_rejects_mixed_grids() {
    let k = FeFunction::zeros(UniformGrid::new(4).unwrap());
    let v = FeFunction::zeros(UniformGrid::new(5).unwrap());
    assert!(compliance(&k, &v, &params(1.0, 1.0, 0.1), &design_problem(1.0)).is_err());
}

#[test]
fn no_load_no_adjoint() {
    let g = UniformGrid::new(5).unwrap();
    let problem = design_problem(0.0);
    let state = solved(&problem, g);
    let adj = adjoint_solve(&state, &problem).unwrap();
    assert!(adj.adjoint.coeffs().iter().all(|&x| x == 0.0));
}

#[test]
fn linearized_adjoint() {
    let delta = 0.01;
    let g = UniformGrid::new(9).unwrap();
    let problem = BeamProblem::homogeneous(delta, 0.0, 1.0);
    let state = solved(&problem, g);
    let adj = adjoint_solve(&state, &problem).unwrap();
    assert_eq!(adj.adjoint.coeffs()[0], 0.0);
    for (n, &p) in adj.adjoint.coeffs().iter().enumerate() {
        let t = g.node(n);
        assert!((p / delta - ((1.0 - t).powi(3) - 1.0) / 6.0).abs() < 1e-4);
    }
    for (c, &flux) in adj.flux.iter().enumerate() {
        let t = g.cell_midpoint(c);
        assert!((flux / delta + 0.5 * (1.0 - t).powi(2)).abs() < 1e-4);
    }
    let slope = (adj.flux[1] - adj.flux[0]) / g.h() / delta;
    assert!((slope - 1.0).abs() < 0.02, "p'(0)/delta = {slope}");
}

#[test]
fn flux_boundary_behaviour_for_graded_material() {
    let delta = 100.0;
    let g = UniformGrid::new(9).unwrap();
    let v = random_v(g, 3);
    let problem = BeamProblem::homogeneous(delta, 0.0, 1.0).with_material(
        Material::PhaseField {
            v,
            soft: 0.5,
            hard: 1.0,
        },
        0.5,
        1.0,
    );
    let state = solved(&problem, g);
    let adj = adjoint_solve(&state, &problem).unwrap();
    let h = g.h();
    let last = adj.flux.len() - 1;
    assert_eq!(adj.adjoint.coeffs()[0], 0.0);
    assert!(adj.flux[last].abs() <= 10.0 * h * delta);
    assert!(adj.flux[0] < 0.0);
    let end_slope = (adj.flux[last] - adj.flux[last - 1]) / h;
    assert!(end_slope.abs() <= 10.0 * h * delta);
    let start_slope = (adj.flux[1] - adj.flux[0]) / h / delta;
    assert!((start_slope - 1.0).abs() < 0.05, "p'(0)/delta = {start_slope}");
}

#[test]
fn adjoint_uses_the_state_hessian() {
    let g = UniformGrid::new(7).unwrap();
    let problem = design_problem(100.0);
    let state = solved(&problem, g);
    let adj = adjoint_solve(&state, &problem).unwrap();
    let system = StateSystem::new(&problem, g).unwrap();
    let m = system.hessian(&state.phase).unwrap();
    let again = crate::state::hessian(&state.phase, &problem).unwrap();
    assert_eq!(m.tri.diag, again.tri.diag);
    assert_eq!(m.tri.lower, again.tri.lower);
    let rhs = system.load_gradient(&state.phase).unwrap();
    let applied = m.mul_vec(adj.adjoint.coeffs());
    let scale = crate::state::norm_inf(&rhs);
    for (a, b) in applied.iter().zip(&rhs) {
        assert!((a - b).abs() <= 1e-12 * scale);
    }
}

#[test]
fn gradient_vanishes_for_soft_design_without_load() {
    let g = UniformGrid::new(5).unwrap();
    let v = FeFunction::constant(g, -1.0);
    let k = FeFunction::zeros(g);
    let g0 = reduced_gradient(&v, &k, &k, &params(1.0, 0.0, 0.1), &design_problem(0.0)).unwrap();
    assert!(g0.iter().all(|&x| x == 0.0));
}

#[test]
fn gradient_of_length_is_hat_mass() {
    let g = UniformGrid::new(5).unwrap();
    let v = FeFunction::zeros(g);
    let k = FeFunction::zeros(g);
    let grad = reduced_gradient(&v, &k, &k, &params(1.0, 0.0, 0.1), &design_problem(0.0)).unwrap();
    let h = g.h();
    for (j, &x) in grad.iter().enumerate() {
        let expect = if j == 0 || j == grad.len() - 1 {
            0.25 * h
        } else {
            0.5 * h
        };
        assert!((x - expect).abs() < 1e-15);
    }
}

#[test]
fn fd_check_is_exact_without_coupling() {
    let g = UniformGrid::new(6).unwrap();
    let v = random_v(g, 9);
    let err = fd_gradient_check(&v, &params(1.0, 0.0, g.h()), &design_problem(0.0), 1e-6, 10, 1).unwrap();
    assert!(err < 1e-8, "{err}");
}

#[test]
fn fd_check_with_load() {
    let g = UniformGrid::new(7).unwrap();
    let p = params(1.0, 1.0, g.h());
    for v in [FeFunction::zeros(g), random_v(g, 4)] {
        let err = fd_gradient_check(&v, &p, &design_problem(100.0), 1e-6, 10, 2).unwrap();
        assert!(err <= 1e-5, "{err}");
    }
}

#[test]
fn fd_error_is_second_order() {
    let g = UniformGrid::new(6).unwrap();
    let p = params(1.0, 1.0, g.h());
    let objective = DesignObjective::new(design_problem(100.0), p, g).unwrap();
    let v = random_v(g, 5);
    let base = objective.evaluate(&v, None).unwrap();
    let grad = objective.gradient(&base).unwrap();
    let w = random_v(g, 6);
    let exact = dot(&grad, w.coeffs());
    let errors: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&s| {
            let at = |sign: f64| {
                let c = v
                    .coeffs()
                    .iter()
                    .zip(w.coeffs())
                    .map(|(a, b)| a + sign * s * b)
                    .collect();
                let shifted = FeFunction::new(g, c).unwrap();
                objective
                    .evaluate(&shifted, Some(&base.state.phase))
                    .unwrap()
                    .cost
                    .total
            };
            ((at(1.0) - at(-1.0)) / (2.0 * s) - exact).abs()
        })
        .collect();
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!((30.0..300.0).contains(&ratio), "{errors:?}");
    }
}
