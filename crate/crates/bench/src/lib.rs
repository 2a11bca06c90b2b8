//! Fixtures shared by the benchmarks in `benches/`.

use elastica::{
    BeamProblem, DesignObjective, DesignParams, FeFunction, Material, PhaseInit, TridiagonalMatrix, UniformGrid,
};

/// Stiffness matrix of `-u''` on `n` nodes plus a diagonal shift.
pub fn shifted_laplacian(n: usize, shift: f64) -> TridiagonalMatrix {
    let mut m = TridiagonalMatrix::zeros(n);
    for i in 0..n {
        m.diag[i] = 2.0 + shift;
    }
    for i in 0..n - 1 {
        m.lower[i] = -1.0;
        m.upper[i] = -1.0;
    }
    m
}

/// Classical-design setup: a = 0.5, b = 1, delta = 100, eps = h.
pub fn design_objective(level: u32) -> DesignObjective {
    let grid = UniformGrid::new(level).expect("valid level");
    let base = BeamProblem::homogeneous(100.0, 0.0, 1.0).with_material(Material::Homogeneous(1.0), 0.5, 1.0);
    let params = DesignParams {
        length_cost: 1.0,
        perimeter_cost: 1.0,
        epsilon: grid.h(),
    };
    DesignObjective::new(base, params, grid).expect("valid setup")
}

pub fn random_phase(level: u32, seed: u64) -> FeFunction {
    PhaseInit::Random { seed }.on_grid(UniformGrid::new(level).expect("valid level"))
}
