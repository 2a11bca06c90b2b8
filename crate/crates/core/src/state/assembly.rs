use crate::error::{Error, Result};
use crate::fem::{solve_dense, FeFunction, QuadratureRule, TridiagonalMatrix, UniformGrid};
use crate::state::BeamProblem;

/// Symmetric system `tri + sum_r u_r u_r^T`.
///
/// Without point constraints the low-rank part is empty. Each constraint
/// contributes two rank-one terms from the Gauss-Newton part of its penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrix {
    pub tri: TridiagonalMatrix,
    pub low_rank: Vec<Vec<f64>>,
}

impl SystemMatrix {
    pub fn dim(&self) -> usize {
        self.tri.dim()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.tri.mul_vec(x);
        for u in &self.low_rank {
            let d = dot(u, x);
            for (yi, ui) in y.iter_mut().zip(u) {
                *yi += d * ui;
            }
        }
        y
    }

    /// Inertia of `T + U U^T` from that of `T` and of the capacitance matrix
    /// `I + U^T T^{-1} U`: the two have equally many negative eigenvalues
    /// exactly when the sum is positive definite.
    pub fn is_positive_definite(&self) -> bool {
        let Some(neg_tri) = self.tri.negative_eigenvalues() else {
            return false;
        };
        if self.low_rank.is_empty() {
            return neg_tri == 0;
        }
        let Ok(cap) = self.capacitance() else {
            return false;
        };
        neg_tri == negative_pivots(cap)
    }

    fn capacitance(&self) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let z: Vec<Vec<f64>> = self.low_rank.iter().map(|u| self.tri.solve(u)).collect::<Result<_>>()?;
        let r = self.low_rank.len();
        let cap = (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| f64::from(u8::from(i == j)) + dot(&self.low_rank[i], &z[j]))
                    .collect()
            })
            .collect();
        Ok((cap, z))
    }

    /// Solves through the Woodbury identity on top of the tridiagonal solve.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let base = self.tri.solve(rhs)?;
        if self.low_rank.is_empty() {
            return Ok(base);
        }
        let (cap, z) = self.capacitance()?;
        let proj: Vec<f64> = self.low_rank.iter().map(|u| dot(u, &base)).collect();
        let y = solve_dense(cap, proj)?;
        let mut x = base;
        for (zj, yj) in z.iter().zip(&y) {
            for (xi, zi) in x.iter_mut().zip(zj) {
                *xi -= yj * zi;
            }
        }
        Ok(x)
    }
}

/// Negative pivots of symmetric elimination without pivoting; a vanishing
/// pivot counts as negative.
fn negative_pivots((mut a, _): (Vec<Vec<f64>>, Vec<Vec<f64>>)) -> usize {
    let n = a.len();
    let mut count = 0;
    for k in 0..n {
        let pivot = a[k][k];
        if !(pivot > 0.0) {
            count += 1;
            if pivot == 0.0 {
                continue;
            }
        }
        for i in k + 1..n {
            let f = a[i][k] / pivot;
            for j in k + 1..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    count
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Position of a constraint point and its first derivatives in `K`.
#[derive(Debug, Clone)]
pub(crate) struct ConstraintJet {
    pub position: [f64; 2],
    pub grad_x: Vec<f64>,
    pub grad_y: Vec<f64>,
}

/// Discrete stored energy of a [`BeamProblem`] on one grid.
///
/// The stiffness is sampled once at every quadrature point.
#[derive(Debug, Clone)]
pub struct StateSystem<'a> {
    problem: &'a BeamProblem,
    grid: UniformGrid,
    rule: QuadratureRule,
    stiffness: Vec<f64>,
}

impl<'a> StateSystem<'a> {
    pub fn new(problem: &'a BeamProblem, grid: UniformGrid) -> Result<Self> {
        Self::with_rule(problem, grid, QuadratureRule::default())
    }

    pub fn with_rule(problem: &'a BeamProblem, grid: UniformGrid, rule: QuadratureRule) -> Result<Self> {
        problem.validate()?;
        let stiffness = problem.material.sample(&grid, &rule)?;
        Ok(Self {
            problem,
            grid,
            rule,
            stiffness,
        })
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn problem(&self) -> &BeamProblem {
        self.problem
    }

    /// Stiffness at quadrature point `q` of `cell`.
    #[inline]
    pub fn stiffness_at(&self, cell: usize, q: usize) -> f64 {
        self.stiffness[cell * self.rule.len() + q]
    }

    /// Quadrature average of the stiffness on each cell.
    pub fn cell_stiffness(&self) -> Vec<f64> {
        let nq = self.rule.len();
        self.stiffness
            .chunks(nq)
            .map(|c| c.iter().zip(self.rule.weights()).map(|(a, w)| a * w).sum())
            .collect()
    }

    fn check(&self, k: &FeFunction) -> Result<()> {
        if k.grid() != &self.grid {
            return Err(Error::GridMismatch {
                expected: self.grid.num_nodes(),
                found: k.coeffs().len(),
            });
        }
        Ok(())
    }

    /// Visits every quadrature point: `(cell, q, x, w, s)` with local coordinate `s`.
    fn for_each_point(&self, mut f: impl FnMut(usize, usize, f64, f64, f64)) {
        let h = self.grid.h();
        for cell in 0..self.grid.num_cells() {
            let left = self.grid.node(cell);
            for (q, (&s, &w)) in self.rule.points().iter().zip(self.rule.weights()).enumerate() {
                f(cell, q, left + h * s, h * w, s);
            }
        }
    }

    pub fn energy(&self, k: &FeFunction) -> Result<f64> {
        self.check(k)?;
        let (delta, k0) = (self.problem.delta, self.problem.clamp_angle);
        let mut e = 0.0;
        self.for_each_point(|cell, q, x, w, s| {
            let dk = k.deriv_on_cell(cell);
            let kv = k.eval_in_cell(cell, s);
            e += w * (0.5 * self.stiffness_at(cell, q) * dk * dk + delta * (1.0 - x) * (kv + k0).sin());
        });
        for (c, jet) in self.problem.constraints.iter().zip(self.constraint_jets(k)) {
            let dx = jet.position[0] - c.target[0];
            let dy = jet.position[1] - c.target[1];
            e += c.weight * (dx * dx + dy * dy);
        }
        if !e.is_finite() {
            return Err(Error::NonFinite("energy"));
        }
        Ok(e)
    }

    /// First variation tested with every hat function; entry 0 is zero.
    pub fn residual(&self, k: &FeFunction) -> Result<Vec<f64>> {
        self.check(k)?;
        let (delta, k0) = (self.problem.delta, self.problem.clamp_angle);
        let inv_h = 1.0 / self.grid.h();
        let mut r = vec![0.0; self.grid.num_nodes()];
        self.for_each_point(|cell, q, x, w, s| {
            let flux = self.stiffness_at(cell, q) * k.deriv_on_cell(cell);
            let load = delta * (1.0 - x) * (k.eval_in_cell(cell, s) + k0).cos();
            r[cell] += w * (-flux * inv_h + load * (1.0 - s));
            r[cell + 1] += w * (flux * inv_h + load * s);
        });
        for (c, jet) in self.problem.constraints.iter().zip(self.constraint_jets(k)) {
            let dx = jet.position[0] - c.target[0];
            let dy = jet.position[1] - c.target[1];
            for (j, rj) in r.iter_mut().enumerate() {
                *rj += 2.0 * c.weight * (dx * jet.grad_x[j] + dy * jet.grad_y[j]);
            }
        }
        r[0] = 0.0;
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("residual"));
        }
        Ok(r)
    }

    /// Second variation; row and column 0 replaced by the identity.
    pub fn hessian(&self, k: &FeFunction) -> Result<SystemMatrix> {
        self.check(k)?;
        let (delta, k0) = (self.problem.delta, self.problem.clamp_angle);
        let inv_h = 1.0 / self.grid.h();
        let mut m = TridiagonalMatrix::zeros(self.grid.num_nodes());
        self.for_each_point(|cell, q, x, w, s| {
            let stiff = self.stiffness_at(cell, q) * inv_h * inv_h;
            let react = -delta * (1.0 - x) * (k.eval_in_cell(cell, s) + k0).sin();
            let phi = [1.0 - s, s];
            let sign = [-1.0, 1.0];
            for a in 0..2 {
                for b in 0..2 {
                    m.add(
                        cell + a,
                        cell + b,
                        w * (stiff * sign[a] * sign[b] + react * phi[a] * phi[b]),
                    );
                }
            }
        });
        let mut low_rank = Vec::new();
        for (c, jet) in self.problem.constraints.iter().zip(self.constraint_jets(k)) {
            let dx = jet.position[0] - c.target[0];
            let dy = jet.position[1] - c.target[1];
            // curvature of gamma: d2 gamma = -(cos, sin)(K + K0) phi_i phi_j
            self.for_each_point_until(c.time, |cell, x_w_s| {
                let (_, w, s) = x_w_s;
                let ang = k.eval_in_cell(cell, s) + k0;
                let coef = 2.0 * c.weight * w * (-dx * ang.cos() - dy * ang.sin());
                let phi = [1.0 - s, s];
                for a in 0..2 {
                    for b in 0..2 {
                        m.add(cell + a, cell + b, coef * phi[a] * phi[b]);
                    }
                }
            });
            let scale = (2.0 * c.weight).sqrt();
            let mut ux: Vec<f64> = jet.grad_x.iter().map(|g| scale * g).collect();
            let mut uy: Vec<f64> = jet.grad_y.iter().map(|g| scale * g).collect();
            ux[0] = 0.0;
            uy[0] = 0.0;
            low_rank.push(ux);
            low_rank.push(uy);
        }
        m.clamp_dof(0);
        Ok(SystemMatrix { tri: m, low_rank })
    }

    /// Quadrature over `(0, t)`, splitting the cell that contains `t`.
    fn for_each_point_until(&self, t: f64, mut f: impl FnMut(usize, (f64, f64, f64))) {
        let h = self.grid.h();
        let full = ((t / h).floor() as usize).min(self.grid.num_cells());
        for cell in 0..full {
            let left = self.grid.node(cell);
            for (&s, &w) in self.rule.points().iter().zip(self.rule.weights()) {
                f(cell, (left + h * s, h * w, s));
            }
        }
        let left = self.grid.node(full);
        if full < self.grid.num_cells() && t > left {
            let len = t - left;
            for (&p, &w) in self.rule.points().iter().zip(self.rule.weights()) {
                let x = left + len * p;
                f(full, (x, len * w, (x - left) / h));
            }
        }
    }

    pub(crate) fn constraint_jets(&self, k: &FeFunction) -> Vec<ConstraintJet> {
        let k0 = self.problem.clamp_angle;
        let n = self.grid.num_nodes();
        self.problem
            .constraints
            .iter()
            .map(|c| {
                let mut jet = ConstraintJet {
                    position: [0.0, 0.0],
                    grad_x: vec![0.0; n],
                    grad_y: vec![0.0; n],
                };
                self.for_each_point_until(c.time, |cell, (_, w, s)| {
                    let ang = k.eval_in_cell(cell, s) + k0;
                    let (sin, cos) = ang.sin_cos();
                    jet.position[0] += w * cos;
                    jet.position[1] += w * sin;
                    jet.grad_x[cell] -= w * sin * (1.0 - s);
                    jet.grad_x[cell + 1] -= w * sin * s;
                    jet.grad_y[cell] += w * cos * (1.0 - s);
                    jet.grad_y[cell + 1] += w * cos * s;
                });
                jet
            })
            .collect()
    }

    /// Per-cell shear `k = A K'` with the cell-averaged stiffness.
    pub fn shear(&self, k: &FeFunction) -> Result<Vec<f64>> {
        self.check(k)?;
        Ok(self
            .cell_stiffness()
            .iter()
            .enumerate()
            .map(|(c, a)| a * k.deriv_on_cell(c))
            .collect())
    }

    /// Gradient of the load term `int -delta (1 - t) sin(K + K0)` in `K`; entry 0 is zero.
    pub fn load_gradient(&self, k: &FeFunction) -> Result<Vec<f64>> {
        self.check(k)?;
        let (delta, k0) = (self.problem.delta, self.problem.clamp_angle);
        let mut g = vec![0.0; self.grid.num_nodes()];
        self.for_each_point(|cell, _, x, w, s| {
            let v = -delta * (1.0 - x) * (k.eval_in_cell(cell, s) + k0).cos();
            g[cell] += w * v * (1.0 - s);
            g[cell + 1] += w * v * s;
        });
        g[0] = 0.0;
        Ok(g)
    }

    /// Load part of the compliance, `int -delta (1 - t) sin(K + K0)`.
    pub fn load_compliance(&self, k: &FeFunction) -> Result<f64> {
        self.check(k)?;
        let (delta, k0) = (self.problem.delta, self.problem.clamp_angle);
        let mut j = 0.0;
        self.for_each_point(|cell, _, x, w, s| {
            j -= w * delta * (1.0 - x) * (k.eval_in_cell(cell, s) + k0).sin();
        });
        Ok(j)
    }
}

pub fn energy(k: &FeFunction, problem: &BeamProblem) -> Result<f64> {
    StateSystem::new(problem, *k.grid())?.energy(k)
}

pub fn residual(k: &FeFunction, problem: &BeamProblem) -> Result<Vec<f64>> {
    StateSystem::new(problem, *k.grid())?.residual(k)
}

pub fn hessian(k: &FeFunction, problem: &BeamProblem) -> Result<SystemMatrix> {
    StateSystem::new(problem, *k.grid())?.hessian(k)
}

pub fn shear(k: &FeFunction, problem: &BeamProblem) -> Result<Vec<f64>> {
    StateSystem::new(problem, *k.grid())?.shear(k)
}
