use crate::error::{Error, Result};
use crate::fem::UniformGrid;

/// Five-point Gauss-Legendre rule on (-1, 1), symmetric half.
const GAUSS5_ABSCISSAE: [f64; 3] = [
    0.0,
    0.538_469_310_105_683_091_036_314_420_700,
    0.906_179_845_938_663_992_797_626_878_299,
];
const GAUSS5_WEIGHTS: [f64; 3] = [
    0.568_888_888_888_888_888_888_888_888_889,
    0.478_628_670_499_366_468_041_291_514_836,
    0.236_926_885_056_189_087_514_264_040_720,
];

pub const DEFAULT_POINTS_PER_CELL: usize = 5;

/// Gauss-Legendre rule mapped to the reference cell (0, 1).
///
/// Reference weights sum to one; on a physical cell of width `h` the points
/// are `x_l + h * point` and the weights `h * weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::gauss(DEFAULT_POINTS_PER_CELL).expect("five-point rule is valid")
    }
}

impl QuadratureRule {
    /// `q`-point Gauss-Legendre rule, exact for polynomials of degree `2q - 1`.
    pub fn gauss(q: usize) -> Result<Self> {
        if q == 0 || q > 64 {
            return Err(Error::param("points_per_cell", "must be in 1..=64"));
        }
        let (x, w) = if q == 5 {
            let x = [
                -GAUSS5_ABSCISSAE[2],
                -GAUSS5_ABSCISSAE[1],
                GAUSS5_ABSCISSAE[0],
                GAUSS5_ABSCISSAE[1],
                GAUSS5_ABSCISSAE[2],
            ];
            let w = [
                GAUSS5_WEIGHTS[2],
                GAUSS5_WEIGHTS[1],
                GAUSS5_WEIGHTS[0],
                GAUSS5_WEIGHTS[1],
                GAUSS5_WEIGHTS[2],
            ];
            (x.to_vec(), w.to_vec())
        } else {
            legendre_nodes(q)
        };
        Ok(Self {
            points: x.iter().map(|xi| 0.5 * (xi + 1.0)).collect(),
            weights: w.iter().map(|wi| 0.5 * wi).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points on the reference cell (0, 1).
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Weights on the reference cell; they sum to one.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Mapped points and weights on `cell` of `grid`.
    pub fn cell_points(&self, grid: &UniformGrid, cell: usize) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = grid.h();
        let left = grid.node(cell);
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(&p, &w)| (left + h * p, h * w))
    }

    /// Composite quadrature of `g` over (0, 1).
    pub fn integrate<F: Fn(f64) -> f64>(&self, grid: &UniformGrid, g: F) -> Result<f64> {
        let mut total = 0.0;
        for cell in 0..grid.num_cells() {
            for (x, w) in self.cell_points(grid, cell) {
                let value = g(x);
                if !value.is_finite() {
                    return Err(Error::NonFinite("integrand"));
                }
                total += w * value;
            }
        }
        Ok(total)
    }

    /// Quadrature of `g` over `(lo, hi)` with the rule mapped to that interval.
    pub fn integrate_interval<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, g: F) -> f64 {
        let len = hi - lo;
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| len * w * g(lo + len * p))
            .sum()
    }
}

/// Free-standing convenience wrapper for [`QuadratureRule::integrate`].
pub fn integrate<F: Fn(f64) -> f64>(g: F, grid: &UniformGrid, rule: &QuadratureRule) -> Result<f64> {
    rule.integrate(grid, g)
}

/// Gauss-Legendre nodes and weights on (-1, 1) by Newton iteration on `P_q`.
fn legendre_nodes(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; q];
    let mut w = vec![0.0; q];
    let n = q as f64;
    for i in 0..q.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=q {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pq = if q == 1 { z } else { p1 };
            let pq_minus = if q == 1 { 1.0 } else { p0 };
            dp = n * (z * pq - pq_minus) / (z * z - 1.0);
            let dz = pq / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[q - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[q - 1 - i] = wi;
    }
    (x, w)
}
