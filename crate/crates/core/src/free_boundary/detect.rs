use serde::{Deserialize, Serialize};

use crate::bvp::SolutionProfile;
use crate::error::{DeadcoreError, Result};

/// Detection threshold relative to the profile maximum, used for bare
/// samples that carry no cell scale.
pub const DEFAULT_DETECT_REL: f64 = 1e-6;

/// Default detection threshold for solver profiles, as a fraction of the
/// node's cell scale `γ Δr^{2/(1-p)}`: a node below it lies within a fraction
/// of a cell of the free boundary.
pub const DEFAULT_CELL_FRACTION: f64 = 1e-2;

/// Nodes used by the sub-grid refinement.
const REFINE_NODES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeBoundaryEstimate {
    /// First node of the trailing run below the threshold; `None` if the only
    /// such node is the outer one.
    pub r_star: Option<f64>,
    /// Zero of the `(r* - r)^{2/(1-p)}` fit through the last positive nodes.
    pub refinement: Option<f64>,
    pub bracket: Option<(f64, f64)>,
    /// Threshold applied at the detected node (at `R` when nothing was
    /// detected).
    pub dead_epsilon: f64,
    pub outer: f64,
}

impl FreeBoundaryEstimate {
    pub fn detected(&self) -> bool {
        self.r_star.is_some()
    }

    /// Refined value when present, otherwise the node value.
    pub fn best(&self) -> Option<f64> {
        self.refinement.or(self.r_star)
    }
}

/// Index of the first node of the trailing run of values `< eps`, provided
/// that run starts before the last node.
pub fn dead_tail_start(values: &[f64], eps: f64) -> Option<usize> {
    dead_tail_start_by(values, |_| eps)
}

/// [`dead_tail_start`] with a per-node threshold.
pub fn dead_tail_start_by(values: &[f64], eps: impl Fn(usize) -> f64) -> Option<usize> {
    let m = values.len();
    let mut i = m;
    while i > 0 && values[i - 1] < eps(i - 1) {
        i -= 1;
    }
    if i + 1 < m {
        Some(i)
    } else {
        None
    }
}

/// Locate `r*` on a solver profile. `dead_epsilon = None` uses
/// `DEFAULT_CELL_FRACTION` of the profile's cell scale at each node (or
/// `1e-6 · max(profile)` if the profile carries no cell scale); an explicit
/// value is a uniform absolute threshold.
pub fn detect_free_boundary(profile: &SolutionProfile, dead_epsilon: Option<f64>) -> Result<FreeBoundaryEstimate> {
    if dead_epsilon.is_none() && profile.cell_scale.len() == profile.values.len() {
        let cell = &profile.cell_scale;
        return detect_with(&profile.grid.nodes, &profile.values, profile.p, &|i| {
            DEFAULT_CELL_FRACTION * cell[i]
        });
    }
    detect_on_samples(&profile.grid.nodes, &profile.values, profile.p, dead_epsilon)
}

pub fn detect_on_samples(
    nodes: &[f64],
    values: &[f64],
    p: f64,
    dead_epsilon: Option<f64>,
) -> Result<FreeBoundaryEstimate> {
    if nodes.len() != values.len() || nodes.len() < 2 {
        return Err(DeadcoreError::Parameter(
            "profile needs at least two matching samples".into(),
        ));
    }
    let top = values.iter().copied().fold(0.0, f64::max);
    let eps = dead_epsilon.unwrap_or(DEFAULT_DETECT_REL * top);
    if !(eps >= 0.0) {
        return Err(DeadcoreError::Parameter(format!(
            "dead_epsilon must be nonnegative, got {eps}"
        )));
    }
    detect_with(nodes, values, p, &|_| eps)
}

fn detect_with(nodes: &[f64], values: &[f64], p: f64, eps: &dyn Fn(usize) -> f64) -> Result<FreeBoundaryEstimate> {
    if values[0] < eps(0) || values[0] <= 0.0 {
        return Err(DeadcoreError::DegenerateProfile(format!(
            "value at R ({:e}) is below the detection threshold {:e}",
            values[0],
            eps(0)
        )));
    }
    let outer = *nodes.last().expect("non-empty");
    let Some(i) = dead_tail_start_by(values, eps) else {
        return Ok(FreeBoundaryEstimate {
            r_star: None,
            refinement: None,
            bracket: None,
            dead_epsilon: eps(0),
            outer,
        });
    };
    let r_star = nodes[i];
    let refinement = refine(nodes, values, p, i, eps).map(|z| z.clamp(nodes[i - 1], outer));
    Ok(FreeBoundaryEstimate {
        r_star: Some(r_star),
        refinement,
        bracket: None,
        dead_epsilon: eps(i),
        outer,
    })
}

/// `u^{(1-p)/2}` is linear in `r` near a free boundary; extrapolate its zero
/// from the last positive nodes.
fn refine(nodes: &[f64], values: &[f64], p: f64, dead: usize, eps: &dyn Fn(usize) -> f64) -> Option<f64> {
    let q = (1.0 - p) / 2.0;
    let lo = dead.saturating_sub(REFINE_NODES);
    let pts: Vec<(f64, f64)> = (lo..dead)
        .filter(|&k| values[k] >= eps(k) && values[k] > 0.0)
        .map(|k| (nodes[k], values[k].powf(q)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|t| t.0).sum::<f64>() / n;
    let my = pts.iter().map(|t| t.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|t| (t.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|t| (t.0 - mx) * (t.1 - my)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return None;
    }
    let z = mx - my / slope;
    z.is_finite().then_some(z)
}

/// Least-squares slope of `ln u` against `ln(r_ref - r)` over the positive
/// nodes in `[r_ref - width, r_ref)`.
pub fn local_exponent(nodes: &[f64], values: &[f64], r_ref: f64, width: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = nodes
        .iter()
        .zip(values)
        .filter(|(&r, &v)| r < r_ref && r >= r_ref - width && v > 0.0)
        .map(|(&r, &v)| ((r_ref - r).ln(), v.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(DeadcoreError::InsufficientData(format!(
            "{} positive nodes in the exponent window",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|t| t.0).sum::<f64>() / n;
    let my = pts.iter().map(|t| t.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|t| (t.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|t| (t.0 - mx) * (t.1 - my)).sum();
    Ok(sxy / sxx)
}
