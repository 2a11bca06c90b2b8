use serde::{Deserialize, Serialize};

use crate::fem::FeFunction;

/// Zero crossings of the affine interpolant of `v`, sorted. Crossings closer
/// than `2 eps` are merged into their mean.
pub fn extract_interfaces(v: &FeFunction, eps: f64) -> Vec<f64> {
    let grid = v.grid();
    let c = v.coeffs();
    let mut raw = Vec::new();
    // last node with nonzero value
    let mut last: Option<usize> = None;
    for n in 0..c.len() {
        if c[n] == 0.0 {
            continue;
        }
        if let Some(m) = last {
            if (c[m] > 0.0) != (c[n] > 0.0) {
                let t = if n == m + 1 {
                    grid.node(m) + grid.h() * c[m] / (c[m] - c[n])
                } else {
                    0.5 * (grid.node(m + 1) + grid.node(n - 1))
                };
                raw.push(t);
            }
        }
        last = Some(n);
    }
    let mut merged: Vec<Vec<f64>> = Vec::new();
    for t in raw {
        match merged.last_mut() {
            Some(cluster) if t - cluster.last().copied().unwrap_or(t) < 2.0 * eps => cluster.push(t),
            _ => merged.push(vec![t]),
        }
    }
    merged
        .into_iter()
        .map(|cl| cl.iter().sum::<f64>() / cl.len() as f64)
        .collect()
}

/// Outcome of [`check_ordered`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderCheck {
    pub ordered: bool,
    pub t_star: Option<f64>,
    pub interfaces: Vec<f64>,
}

/// Half-width of the band around an interface excluded from the checks, in units of `eps`.
pub const BAND_WIDTH: f64 = 4.0;

/// Hard on `(0, t*)` and soft on `(t*, 1)` with a single interface.
///
/// Outside the band `|t - t*| <= 4 eps` nodal values must be at least 0.9
/// before `t*` and at most -0.9 after it.
pub fn check_ordered(v: &FeFunction, eps: f64) -> OrderCheck {
    let interfaces = extract_interfaces(v, eps);
    let grid = v.grid();
    let ordered = match interfaces.as_slice() {
        [t] if *t > 0.0 && *t < 1.0 => v.coeffs().iter().enumerate().all(|(n, &value)| {
            let x = grid.node(n);
            if (x - t).abs() <= BAND_WIDTH * eps {
                true
            } else if x < *t {
                value >= 0.9
            } else {
                value <= -0.9
            }
        }),
        _ => false,
    };
    OrderCheck {
        ordered,
        t_star: if interfaces.len() == 1 {
            Some(interfaces[0])
        } else {
            None
        },
        interfaces,
    }
}

/// Maximal subintervals where `v > 0`, clipped to [0, 1].
pub fn hard_intervals(v: &FeFunction, eps: f64) -> Vec<(f64, f64)> {
    let crossings = extract_interfaces(v, eps);
    let mut bounds = vec![0.0];
    bounds.extend(crossings);
    bounds.push(1.0);
    bounds
        .windows(2)
        .filter(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            v.eval(mid).map(|x| x > 0.0).unwrap_or(false)
        })
        .map(|w| (w[0], w[1]))
        .collect()
}
