use std::f64::consts::{FRAC_PI_2, PI};

use elastica::fem::TridiagonalMatrix;
use elastica::state::{hessian, multilevel_solve, newton_solve};
use elastica::verification::verify_monotone_range;
use elastica::{BeamProblem, FeFunction, Material, NewtonOptions, StateInit, UniformGrid};
use proptest::prelude::*;

const SOFT: f64 = 0.5;
const HARD: f64 = 1.0;

fn phase_material(v: Vec<f64>, level: u32) -> Material {
    let grid = UniformGrid::new(level).unwrap();
    Material::PhaseField {
        v: FeFunction::new(grid, v).unwrap(),
        soft: SOFT,
        hard: HARD,
    }
}

fn graded(delta: f64, v: Vec<f64>, level: u32) -> BeamProblem {
    BeamProblem::homogeneous(delta, 0.0, HARD).with_material(phase_material(v, level), SOFT, HARD)
}

fn solve(problem: &BeamProblem, init: &FeFunction, fine: u32) -> FeFunction {
    let level = init.grid().level();
    let sol = multilevel_solve(problem, level, fine, init, &NewtonOptions::default()).unwrap();
    assert!(sol.converged);
    sol.phase
}

/// Consistent P1 mass matrix with the clamped row and column removed.
fn mass(grid: UniformGrid) -> TridiagonalMatrix {
    let n = grid.num_nodes();
    let h = grid.h();
    let mut m = TridiagonalMatrix::zeros(n);
    for c in 0..grid.num_cells() {
        m.add(c, c, h / 3.0);
        m.add(c + 1, c + 1, h / 3.0);
        m.add(c, c + 1, h / 6.0);
        m.add(c + 1, c, h / 6.0);
    }
    m.clamp_dof(0);
    m.diag[0] = 0.0;
    m
}

/// Whether `m - c M` is positive definite on the unclamped dofs.
fn exceeds(m: &TridiagonalMatrix, mass: &TridiagonalMatrix, c: f64) -> bool {
    let mut shifted = m.clone();
    for i in 0..m.dim() {
        shifted.diag[i] -= c * mass.diag[i];
    }
    for i in 0..m.dim() - 1 {
        shifted.lower[i] -= c * mass.lower[i];
        shifted.upper[i] -= c * mass.upper[i];
    }
    shifted.is_positive_definite()
}

#[test]
fn shift_test_brackets_the_laplacian_eigenvalue() {
    // -u'' = mu u, u(0) = 0, u'(1) = 0 has mu = pi^2 / 4
    let grid = UniformGrid::new(7).unwrap();
    let problem = BeamProblem::homogeneous(0.0, 0.0, 1.0);
    let m = hessian(&FeFunction::zeros(grid), &problem).unwrap();
    assert!(m.low_rank.is_empty());
    let mass = mass(grid);
    let mu = PI * PI / 4.0;
    assert!(exceeds(&m.tri, &mass, 0.999 * mu));
    assert!(!exceeds(&m.tri, &mass, 1.001 * mu));
}

#[test]
fn natural_boundary_condition_at_first_order() {
    let delta = 100.0;
    let problem = BeamProblem::homogeneous(delta, 0.0, 1.0);
    let mut previous = f64::INFINITY;
    for level in 5..=9 {
        let sol = StateInit::Simple
            .solve(&problem, 3, level, &NewtonOptions::default())
            .unwrap();
        let h = sol.phase.grid().h();
        let k_end = sol.shear.last().unwrap().abs();
        assert!(k_end <= 10.0 * h * delta, "level {level}: {k_end}");
        assert!(k_end <= previous, "level {level}: {k_end} after {previous}");
        previous = k_end;
    }
}

#[test]
fn energy_settles_along_final_iterates() {
    for delta in [1.0, 30.0, 100.0] {
        let problem = BeamProblem::homogeneous(delta, 0.0, 1.0);
        let grid = UniformGrid::new(8).unwrap();
        let sol = newton_solve(&FeFunction::zeros(grid), &problem, &NewtonOptions::default()).unwrap();
        assert!(sol.converged);
        let tail: Vec<f64> = sol.energy_history.iter().rev().take(3).rev().copied().collect();
        for w in tail.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0), "delta {delta}: {tail:?}");
        }
    }
}

#[test]
fn twisted_and_simple_branches_differ() {
    let problem = BeamProblem::homogeneous(100.0, PI / 4.0, 1.0);
    let opts = NewtonOptions::default();
    let simple = StateInit::Simple.solve(&problem, 3, 7, &opts).unwrap();
    let twisted = StateInit::Twisted.solve(&problem, 3, 7, &opts).unwrap();
    let end = |k: &FeFunction| *k.coeffs().last().unwrap();
    assert!(end(&simple.phase) < 0.0);
    assert!(end(&twisted.phase) > PI);
    assert!(twisted.energy > simple.energy);
}

fn phase_values(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn equilibria_are_monotone_and_in_range(
        delta in 0.1..100.0f64,
        v in phase_values(33),
    ) {
        let problem = graded(delta, v, 5);
        let k = solve(&problem, &FeFunction::zeros(UniformGrid::new(3).unwrap()), 7);
        let report = verify_monotone_range(&k, 0.0);
        prop_assert!(report.is_clean(), "{:?}", report.violations);
    }

    #[test]
    fn equilibrium_does_not_depend_on_the_start(
        delta in 1.0..100.0f64,
        v in phase_values(17),
        start in prop::collection::vec(-FRAC_PI_2..0.0f64, 8),
    ) {
        let problem = graded(delta, v, 4);
        let coarse = UniformGrid::new(3).unwrap();
        let reference = solve(&problem, &FeFunction::zeros(coarse), 7);
        let mut c = vec![0.0];
        c.extend(start);
        let other = solve(&problem, &FeFunction::new(coarse, c).unwrap(), 7);
        prop_assert!(reference.sup_distance(&other).unwrap() <= 1e-8);
    }

    #[test]
    fn hessian_is_coercive_on_the_admissible_range(
        delta in 0.0..100.0f64,
        v in phase_values(65),
        k in prop::collection::vec(-FRAC_PI_2..0.0f64, 64),
    ) {
        let grid = UniformGrid::new(6).unwrap();
        let problem = graded(delta, v, 6);
        let mut c = vec![0.0];
        c.extend(k);
        let m = hessian(&FeFunction::new(grid, c).unwrap(), &problem).unwrap();
        prop_assert!(exceeds(&m.tri, &mass(grid), SOFT * PI * PI / 8.0));
    }
}
