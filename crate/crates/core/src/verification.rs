//! Checkers for the sign and monotonicity structure of converged state and
//! adjoint pairs. Every "almost everywhere" statement is tested cell by cell.
//!
//! All checkers are pure functions of their inputs.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{FeFunction, UniformGrid};

/// Slope above which a cell counts as increasing.
pub const SLOPE_TOLERANCE: f64 = 1e-8;
/// Upper bound for nodal phase values.
pub const RANGE_TOLERANCE: f64 = 1e-12;
/// Smallest increment accepted as a strict increase of the shear.
pub const STRICT_TOLERANCE: f64 = 1e-12;
/// Positivity slack for sign tests of `Q` and `kp`.
pub const SIGN_TOLERANCE: f64 = 1e-8;
/// Nodes with `|sin(K + K0)|` below this are dropped from the auxiliary fields.
pub const SIN_CUTOFF: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignViolation {
    pub t: f64,
    pub magnitude: f64,
    pub what: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignReport {
    pub quantity: String,
    pub values: Vec<f64>,
    /// Detected sign-change time (`t0` for Q, `t2` for kp), if any.
    pub change: Option<f64>,
    pub violations: Vec<SignViolation>,
}

impl SignReport {
    fn new(quantity: &str, values: Vec<f64>) -> Self {
        Self {
            quantity: quantity.to_string(),
            values,
            change: None,
            violations: Vec::new(),
        }
    }

    fn flag(&mut self, t: f64, magnitude: f64, what: &str) {
        self.violations.push(SignViolation {
            t,
            magnitude,
            what: what.to_string(),
        });
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `K' <= 0` on every cell and `K + K0 in (-pi/2, 0]` on `[0, 1)`.
pub fn verify_monotone_range(k: &FeFunction, clamp_angle: f64) -> SignReport {
    let grid = k.grid();
    let mut report = SignReport::new("K", k.coeffs().to_vec());
    for cell in 0..grid.num_cells() {
        let slope = k.deriv_on_cell(cell);
        if slope > SLOPE_TOLERANCE {
            report.flag(grid.cell_midpoint(cell), slope, "positive slope");
        }
    }
    for n in 0..grid.num_nodes() - 1 {
        let value = k.coeffs()[n] + clamp_angle;
        if value > RANGE_TOLERANCE {
            report.flag(grid.node(n), value, "above zero");
        } else if value <= -FRAC_PI_2 {
            report.flag(grid.node(n), -FRAC_PI_2 - value, "at or below -pi/2");
        }
    }
    report
}

/// Per-cell shear negative (except possibly the last cell), strictly
/// increasing, and `|k(1)| <= end_tolerance`.
pub fn verify_shear_structure(shear: &[f64], grid: &UniformGrid, end_tolerance: f64) -> SignReport {
    let mut report = SignReport::new("k", shear.to_vec());
    let last = shear.len() - 1;
    for (c, &k) in shear.iter().enumerate().take(last) {
        if k >= 0.0 {
            report.flag(grid.cell_midpoint(c), k, "nonnegative shear");
        }
    }
    for c in 0..last {
        let inc = shear[c + 1] - shear[c];
        if inc <= STRICT_TOLERANCE {
            report.flag(grid.node(c + 1), -inc, "not strictly increasing");
        }
    }
    if shear[last].abs() > end_tolerance {
        report.flag(1.0, shear[last].abs(), "natural boundary condition");
    }
    report
}

/// `rho = cot(K + K0)`, `Q = P - rho` (nodal) and `q = p + k / sin^2` (per cell).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryFields {
    /// `(t, rho, Q)` at retained nodes.
    pub nodal: Vec<(f64, f64, f64)>,
    /// `(t, q)` at cell midpoints with `|sin| >= cutoff`.
    pub cellwise: Vec<(f64, f64)>,
    /// Nodes dropped because `sin(K + K0)` vanishes there.
    pub excluded: Vec<f64>,
}

pub fn compute_auxiliary(
    k: &FeFunction,
    adjoint: &FeFunction,
    shear: &[f64],
    flux: &[f64],
    clamp_angle: f64,
) -> Result<AuxiliaryFields> {
    let grid = k.grid();
    let mut nodal = Vec::new();
    let mut excluded = Vec::new();
    for n in 0..grid.num_nodes() {
        let (sin, cos) = (k.coeffs()[n] + clamp_angle).sin_cos();
        let t = grid.node(n);
        if sin.abs() < SIN_CUTOFF {
            excluded.push(t);
            continue;
        }
        let rho = cos / sin;
        nodal.push((t, rho, adjoint.coeffs()[n] - rho));
    }
    if nodal.is_empty() {
        return Err(Error::Degenerate("sin(K + K0) vanishes at every node".into()));
    }
    let cellwise = (0..grid.num_cells())
        .filter_map(|c| {
            let sin = (k.eval_in_cell(c, 0.5) + clamp_angle).sin();
            (sin.abs() >= SIN_CUTOFF).then(|| (grid.cell_midpoint(c), flux[c] + shear[c] / (sin * sin)))
        })
        .collect();
    Ok(AuxiliaryFields {
        nodal,
        cellwise,
        excluded,
    })
}

/// `Q > 0` on `[0, t0)` and `Q <= 0` on `[t0, 1]`.
pub fn verify_q_single_crossing(aux: &AuxiliaryFields) -> SignReport {
    let values: Vec<f64> = aux.nodal.iter().map(|&(_, _, q)| q).collect();
    let mut report = SignReport::new("Q", values);
    let Some(&(t_first, _, q_first)) = aux.nodal.first() else {
        return report;
    };
    if q_first <= 0.0 {
        report.flag(t_first, -q_first, "Q not positive at the first retained node");
    }
    let crossing = aux.nodal.iter().position(|&(_, _, q)| q <= 0.0);
    if let Some(i) = crossing {
        report.change = Some(aux.nodal[i].0);
        for &(t, _, q) in &aux.nodal[i..] {
            if q > SIGN_TOLERANCE {
                report.flag(t, q, "Q positive after its sign change");
            }
        }
    }
    report
}

/// `kp > 0` and strictly decreasing on `(0, t2)`, `kp <= 0` on `[t2, 1]`.
pub fn verify_kp_structure(shear: &[f64], flux: &[f64], grid: &UniformGrid) -> SignReport {
    let kp: Vec<f64> = shear.iter().zip(flux).map(|(k, p)| k * p).collect();
    let mut report = SignReport::new("kp", kp.clone());
    let first_nonpositive = kp.iter().position(|&x| x <= 0.0);
    let end = first_nonpositive.unwrap_or(kp.len());
    report.change = Some(first_nonpositive.map_or(1.0, |c| grid.node(c)));
    if end == 0 {
        report.flag(grid.cell_midpoint(0), -kp[0], "kp not positive near the clamp");
    }
    for c in 0..end.saturating_sub(1) {
        let diff = kp[c + 1] - kp[c];
        if diff >= 0.0 {
            report.flag(grid.node(c + 1), diff, "kp not strictly decreasing");
        }
    }
    for (c, &x) in kp.iter().enumerate().skip(end) {
        if x > SIGN_TOLERANCE {
            report.flag(grid.cell_midpoint(c), x, "kp positive after t2");
        }
    }
    report
}

/// First interior node where the discrete `p'` stops being positive.
pub fn p_prime_sign_change(flux: &[f64], grid: &UniformGrid) -> Option<f64> {
    flux.windows(2)
        .position(|w| w[1] - w[0] <= 0.0)
        .map(|c| grid.node(c + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    const DELTA: f64 = 0.01;

    fn grid() -> UniformGrid {
        UniformGrid::new(7).unwrap()
    }

    fn k_lin(t: f64) -> f64 {
        DELTA * ((1.0 - t).powi(3) - 1.0) / 6.0
    }

    fn midpoints(g: &UniformGrid, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..g.num_cells()).map(|c| f(g.cell_midpoint(c))).collect()
    }

    #[test]
    fn monotone_range_examples() {
        let g = grid();
        assert!(verify_monotone_range(&FeFunction::zeros(g), 0.0).is_clean());
        assert!(verify_monotone_range(&FeFunction::from_fn(g, k_lin), 0.0).is_clean());
        let mut bumped = FeFunction::from_fn(g, k_lin);
        bumped.coeffs_mut()[40] += 1e-3;
        // raising one node creates one rising cell; the following cell falls faster
        let r = verify_monotone_range(&bumped, 0.0);
        assert_eq!(r.violations.len(), 1);
        assert!((r.violations[0].t - g.cell_midpoint(39)).abs() < 1e-15);
    }

    #[test]
    fn shear_examples() {
        let g = grid();
        let k = midpoints(&g, |t| -DELTA * (1.0 - t).powi(2) / 2.0);
        assert!(verify_shear_structure(&k, &g, 10.0 * g.h() * DELTA).is_clean());
        let flat = vec![-1.0; g.num_cells()];
        let r = verify_shear_structure(&flat, &g, 10.0);
        assert!(!r.is_clean());
        assert!(r.violations.iter().all(|v| v.what == "not strictly increasing"));
    }

    #[test]
    fn auxiliary_in_linear_regime() {
        let g = grid();
        let k = FeFunction::from_fn(g, k_lin);
        let p = FeFunction::from_fn(g, |t| DELTA * ((1.0 - t).powi(3) - 1.0) / 6.0);
        let shear = midpoints(&g, |t| -DELTA * (1.0 - t).powi(2) / 2.0);
        let flux = shear.clone();
        let aux = compute_auxiliary(&k, &p, &shear, &flux, 0.0).unwrap();
        assert_eq!(aux.excluded, vec![0.0]);
        let (t, rho, q) = aux.nodal[0];
        assert_eq!(t, g.h());
        assert!(rho < -1.0 / (DELTA * g.h()));
        assert!(q > 0.0);
        let r = verify_q_single_crossing(&aux);
        assert!(r.is_clean());
    }

    #[test]
    fn auxiliary_for_vertical_beam() {
        let g = UniformGrid::new(2).unwrap();
        let k = FeFunction::constant(g, -FRAC_PI_2);
        let p = FeFunction::zeros(g);
        let shear = vec![-1.0, -0.5, -0.25, 0.0];
        let flux = vec![0.1, 0.2, 0.3, 0.4];
        let aux = compute_auxiliary(&k, &p, &shear, &flux, 0.0).unwrap();
        for &(_, rho, _) in &aux.nodal {
            assert!(rho.abs() < 1e-15);
        }
        for (c, &(_, q)) in aux.cellwise.iter().enumerate() {
            assert!((q - (flux[c] + shear[c])).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_auxiliary() {
        let g = UniformGrid::new(2).unwrap();
        let z = FeFunction::zeros(g);
        assert!(compute_auxiliary(&z, &z, &[0.0; 4], &[0.0; 4], 0.0).is_err());
    }

    #[test]
    fn two_crossings_are_flagged() {
        let aux = AuxiliaryFields {
            nodal: vec![(0.1, 0.0, 1.0), (0.2, 0.0, -1.0), (0.3, 0.0, 0.5), (0.4, 0.0, -0.2)],
            cellwise: vec![],
            excluded: vec![],
        };
        let r = verify_q_single_crossing(&aux);
        assert_eq!(r.change, Some(0.2));
        assert_eq!(r.violations.len(), 1);
    }

    #[test]
    fn kp_examples() {
        let g = grid();
        let k = midpoints(&g, |t| -DELTA * (1.0 - t).powi(2) / 2.0);
        let p = midpoints(&g, |t| -DELTA * (1.0 - t).powi(2) / 2.0);
        let r = verify_kp_structure(&k, &p, &g);
        assert!(r.is_clean());
        assert_eq!(r.change, Some(1.0));
        let ones = vec![1.0; g.num_cells()];
        assert!(!verify_kp_structure(&ones, &ones, &g).is_clean());
    }
}
