use crate::error::{Error, Result};

/// Relative pivot magnitude below which elimination reports singularity.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// Square tridiagonal matrix stored by diagonals.
///
/// `lower[i]` is entry `(i + 1, i)`, `upper[i]` is entry `(i, i + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            upper: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        m.diag.fill(1.0);
        m
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Adds `value` to entry `(i, j)`; `|i - j|` must be at most one.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        if i == j {
            self.diag[i] += value;
        } else if i == j + 1 {
            self.lower[j] += value;
        } else if j == i + 1 {
            self.upper[i] += value;
        } else {
            panic!("entry ({i}, {j}) is outside the tridiagonal band");
        }
    }

    /// Zeroes row and column `k` and puts one on the diagonal.
    pub fn clamp_dof(&mut self, k: usize) {
        self.diag[k] = 1.0;
        if k > 0 {
            self.lower[k - 1] = 0.0;
            self.upper[k - 1] = 0.0;
        }
        if k + 1 < self.dim() {
            self.lower[k] = 0.0;
            self.upper[k] = 0.0;
        }
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim())
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.lower[i - 1].abs();
                }
                if i + 1 < self.dim() {
                    s += self.upper[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Number of negative eigenvalues of the symmetric matrix with
    /// off-diagonal `upper`, counted from the `L D L^T` pivots. `None` when a
    /// pivot vanishes.
    pub fn negative_eigenvalues(&self) -> Option<usize> {
        let mut pivot = 0.0;
        let mut count = 0;
        for i in 0..self.dim() {
            pivot = if i == 0 {
                self.diag[0]
            } else {
                self.diag[i] - self.upper[i - 1] * self.upper[i - 1] / pivot
            };
            if pivot == 0.0 || !pivot.is_finite() {
                return None;
            }
            count += usize::from(pivot < 0.0);
        }
        Some(count)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.negative_eigenvalues() == Some(0)
    }

    /// Largest `|upper[i] - lower[i]|` relative to the matrix norm.
    pub fn asymmetry(&self) -> f64 {
        let norm = self.norm_inf().max(f64::MIN_POSITIVE);
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (l - u).abs())
            .fold(0.0, f64::max)
            / norm
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            d[i][i] = self.diag[i];
            if i + 1 < n {
                d[i][i + 1] = self.upper[i];
                d[i + 1][i] = self.lower[i];
            }
        }
        d
    }

    /// Thomas elimination without pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if rhs.len() != n {
            return Err(Error::GridMismatch {
                expected: n,
                found: rhs.len(),
            });
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let guard = PIVOT_TOLERANCE * self.norm_inf();
        let mut c = vec![0.0; n];
        let mut x = rhs.to_vec();
        let mut pivot = self.diag[0];
        if !(pivot.abs() > guard) {
            return Err(Error::Singular { row: 0, pivot });
        }
        if n > 1 {
            c[0] = self.upper[0] / pivot;
        }
        x[0] /= pivot;
        for i in 1..n {
            pivot = self.diag[i] - self.lower[i - 1] * c[i - 1];
            if !(pivot.abs() > guard) {
                return Err(Error::Singular { row: i, pivot });
            }
            if i + 1 < n {
                c[i] = self.upper[i] / pivot;
            }
            x[i] = (x[i] - self.lower[i - 1] * x[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("tridiagonal solve"));
        }
        Ok(x)
    }
}

/// Free-standing form of [`TridiagonalMatrix::solve`].
pub fn solve_tridiagonal(m: &TridiagonalMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    m.solve(rhs)
}

#[cfg(test)]
mod tests {
    #[test]
    fn definiteness_of_laplacian() {
        let mut m = TridiagonalMatrix::zeros(5);
        for i in 0..5 {
            m.diag[i] = 2.0;
        }
        for i in 0..4 {
            m.lower[i] = -1.0;
            m.upper[i] = -1.0;
        }
        assert!(m.is_positive_definite());
        m.diag[2] = -0.5;
        assert!(!m.is_positive_definite());
    }

    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn inf(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn identity_returns_rhs() {
        let r = vec![3.0, -1.0, 0.25, 7.0];
        assert_eq!(TridiagonalMatrix::identity(4).solve(&r).unwrap(), r);
    }

    #[test]
    fn second_difference_three_by_three() {
        let m = TridiagonalMatrix {
            lower: vec![-1.0, -1.0],
            diag: vec![2.0, 2.0, 2.0],
            upper: vec![-1.0, -1.0],
        };
        let x = m.solve(&[0.0, 1.0, 0.0]).unwrap();
        for (a, b) in x.iter().zip([0.5, 1.0, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let m = TridiagonalMatrix {
            lower: vec![1.0],
            diag: vec![0.0, 1.0],
            upper: vec![1.0],
        };
        assert!(matches!(m.solve(&[1.0, 1.0]), Err(Error::Singular { row: 0, .. })));
        let m = TridiagonalMatrix {
            lower: vec![1.0],
            diag: vec![1.0, 1.0],
            upper: vec![1.0],
        };
        assert!(matches!(m.solve(&[1.0, 1.0]), Err(Error::Singular { row: 1, .. })));
    }

    #[test]
    fn residual_bound_on_random_dominant_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[9usize, 65, 513] {
            for _ in 0..100 {
                let lower: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let upper: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let diag: Vec<f64> = (0..n)
                    .map(|i| {
                        let off =
                            if i > 0 { lower[i - 1].abs() } else { 0.0 } + if i + 1 < n { upper[i].abs() } else { 0.0 };
                        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                        sign * (off + rng.gen_range(0.1..2.0))
                    })
                    .collect();
                let m = TridiagonalMatrix { lower, diag, upper };
                let r: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let x = m.solve(&r).unwrap();
                let res: Vec<f64> = m.mul_vec(&x).iter().zip(&r).map(|(a, b)| a - b).collect();
                assert!(inf(&res) <= 1e-10 * (m.norm_inf() * inf(&x) + inf(&r)));
            }
        }
    }

    #[test]
    fn clamp_dof_clears_row_and_column() {
        let mut m = TridiagonalMatrix {
            lower: vec![-1.0, -1.0],
            diag: vec![2.0, 2.0, 2.0],
            upper: vec![-1.0, -1.0],
        };
        m.clamp_dof(0);
        assert_eq!(m.diag[0], 1.0);
        assert_eq!(m.upper[0], 0.0);
        assert_eq!(m.lower[0], 0.0);
        assert_eq!(m.asymmetry(), 0.0);
    }
}
