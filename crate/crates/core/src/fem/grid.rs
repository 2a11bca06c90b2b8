use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finest level accepted by [`UniformGrid::new`].
pub const MAX_LEVEL: u32 = 30;

/// Equidistant dyadic grid on [0, 1] with `2^level + 1` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    level: u32,
    num_nodes: usize,
    h: f64,
}

impl UniformGrid {
    pub fn new(level: u32) -> Result<Self> {
        if level < 1 || level > MAX_LEVEL {
            return Err(Error::InvalidLevel(level));
        }
        let cells = 1usize.checked_shl(level).ok_or(Error::InvalidLevel(level))?;
        Ok(Self {
            level,
            num_nodes: cells + 1,
            h: 1.0 / cells as f64,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_cells(&self) -> usize {
        self.num_nodes - 1
    }

    /// Mesh width `1 / (N - 1)`.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Node `n`, computed as `n * h` (exact for dyadic `h`).
    pub fn node(&self, n: usize) -> f64 {
        n as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.num_nodes).map(|n| self.node(n)).collect()
    }

    pub fn cell_midpoint(&self, cell: usize) -> f64 {
        (cell as f64 + 0.5) * self.h
    }

    /// Cell containing `t`; the right endpoint belongs to the last cell.
    pub fn locate(&self, t: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfDomain(t));
        }
        let cell = (t / self.h).floor() as usize;
        Ok(cell.min(self.num_cells() - 1))
    }

    /// Grid one level finer.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.level + 1)
    }
}
