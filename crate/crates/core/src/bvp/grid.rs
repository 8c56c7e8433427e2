use serde::{Deserialize, Serialize};

use crate::error::{DeadcoreError, Result};

/// Minimum node count of a grid.
pub const MIN_NODES: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPolicy {
    /// Constant spacing.
    Uniform,
    /// `r_i = R ρ^i`: constant resolution per unit of `ln r`.
    Geometric,
    /// A base grid with extra nodes concentrated around an estimate of `r*`.
    Graded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nodes: Vec<f64>,
    pub policy: GridPolicy,
}

impl Grid {
    pub fn from_nodes(nodes: Vec<f64>, policy: GridPolicy) -> Result<Self> {
        if nodes.len() < MIN_NODES {
            return Err(DeadcoreError::Parameter(format!(
                "grid needs at least {MIN_NODES} nodes, got {}",
                nodes.len()
            )));
        }
        if nodes[0] <= 0.0 || nodes.iter().any(|x| !x.is_finite()) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DeadcoreError::Parameter(
                "grid nodes must be positive, finite and strictly increasing".into(),
            ));
        }
        Ok(Self { nodes, policy })
    }

    /// `cells + 1` equally spaced nodes on `[r_inner, outer]`.
    pub fn uniform(r_inner: f64, outer: f64, cells: usize) -> Result<Self> {
        if !(outer > r_inner) {
            return Err(DeadcoreError::Domain(format!(
                "outer radius {outer} must exceed R = {r_inner}"
            )));
        }
        let h = (outer - r_inner) / cells as f64;
        let mut nodes: Vec<f64> = (0..=cells).map(|i| r_inner + h * i as f64).collect();
        *nodes.last_mut().expect("non-empty") = outer;
        Self::from_nodes(nodes, GridPolicy::Uniform)
    }

    /// `r_i = R ρ^i`, `i = 0..=cells`.
    pub fn geometric(r_inner: f64, rho: f64, cells: usize) -> Result<Self> {
        if !(rho > 1.0) {
            return Err(DeadcoreError::Parameter(format!(
                "geometric ratio must exceed 1, got {rho}"
            )));
        }
        let lr = rho.ln();
        let nodes: Vec<f64> = (0..=cells).map(|i| r_inner * (lr * i as f64).exp()).collect();
        Self::from_nodes(nodes, GridPolicy::Geometric)
    }

    /// Split every cell that overlaps `[lo, hi]` into `factor` equal pieces.
    pub fn graded(&self, lo: f64, hi: f64, factor: usize) -> Result<Self> {
        if factor < 2 {
            return Ok(Self {
                nodes: self.nodes.clone(),
                policy: GridPolicy::Graded,
            });
        }
        let mut nodes = Vec::with_capacity(self.nodes.len() * 2);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            if w[1] > lo && w[0] < hi {
                let h = (w[1] - w[0]) / factor as f64;
                for k in 1..factor {
                    nodes.push(w[0] + h * k as f64);
                }
            }
        }
        nodes.push(*self.nodes.last().expect("non-empty"));
        Self::from_nodes(nodes, GridPolicy::Graded)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn inner(&self) -> f64 {
        self.nodes[0]
    }

    pub fn outer(&self) -> f64 {
        *self.nodes.last().expect("grid is never empty")
    }

    /// Width of the cell containing `r` (clamped to the grid).
    pub fn cell_width_at(&self, r: f64) -> f64 {
        let n = self.nodes.len();
        let j = self.nodes.partition_point(|&x| x <= r).clamp(1, n - 1);
        self.nodes[j] - self.nodes[j - 1]
    }
}
