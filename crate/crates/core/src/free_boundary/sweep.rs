use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bvp::{compare_profiles, minimal_solution, MinimalSolution, SolveConfig};
use crate::error::{DeadcoreError, Result};
use crate::free_boundary::detect::{detect_free_boundary, FreeBoundaryEstimate};
use crate::free_boundary::fit::{fit_log_power, fit_power_law, FitKind, LinearFit};
use crate::operator::{BcKind, BoundaryCondition, RadialOperator};

/// Below this r² over the full range, the primary fit is restricted to the
/// top [`TOP_DECADES`] of `h`.
pub const FULL_RANGE_R2: f64 = 0.995;
pub const TOP_DECADES: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SweepFit {
    Power,
    LogPower { m: f64 },
}

impl SweepFit {
    pub fn kind(&self) -> FitKind {
        match self {
            SweepFit::Power => FitKind::Power,
            SweepFit::LogPower { .. } => FitKind::LogPower,
        }
    }

    fn apply(&self, samples: &[(f64, f64)]) -> Result<LinearFit> {
        match *self {
            SweepFit::Power => fit_power_law(samples),
            SweepFit::LogPower { m } => fit_log_power(samples, m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    pub h: f64,
    /// Refined free-boundary radius, if one was detected.
    pub r_star: Option<f64>,
    pub r_star_node: Option<f64>,
    pub converged: bool,
    pub n_final: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub fit_kind: FitKind,
    /// `[h_min, h_max]` of the samples used.
    pub subset_used: (f64, f64),
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub bc: BcKind,
    pub p: f64,
    pub samples: Vec<SweepSample>,
    pub fit_kind: FitKind,
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub subset_used: (f64, f64),
    /// The full-range fit, when the primary fit was restricted.
    pub full_range: Option<FitRecord>,
    /// Some samples had no detected free boundary.
    pub partial: bool,
    /// Detected `r*` values are nondecreasing in `h`.
    pub monotone_in_h: bool,
}

impl SweepResult {
    pub fn primary(&self) -> FitRecord {
        FitRecord {
            exponent: self.exponent,
            intercept: self.intercept,
            r_squared: self.r_squared,
            fit_kind: self.fit_kind,
            subset_used: self.subset_used,
            points: self
                .samples
                .iter()
                .filter(|s| s.r_star.is_some() && s.h >= self.subset_used.0 && s.h <= self.subset_used.1)
                .count(),
        }
    }
}

/// One solved sweep point, with its profile kept for comparison checks.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub h: f64,
    pub solution: MinimalSolution,
    pub estimate: Option<FreeBoundaryEstimate>,
}

/// `h` values must be positive, increasing and geometric (≥ 5 of them).
pub fn validate_h_values(h_values: &[f64]) -> Result<()> {
    if h_values.len() < 5 {
        return Err(DeadcoreError::Parameter(format!(
            "a sweep needs at least 5 h values, got {}",
            h_values.len()
        )));
    }
    if h_values.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
        return Err(DeadcoreError::Parameter("h values must be positive and finite".into()));
    }
    let ratio = (h_values[1] / h_values[0]).ln();
    if !(ratio > 0.0) {
        return Err(DeadcoreError::Parameter("h values must increase".into()));
    }
    for w in h_values.windows(2) {
        if ((w[1] / w[0]).ln() - ratio).abs() > 1e-6 * ratio.max(1.0) {
            return Err(DeadcoreError::Parameter("h values must be geometrically spaced".into()));
        }
    }
    Ok(())
}

/// `count` geometric values from `lo` to `hi` inclusive.
pub fn geometric_h(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && count >= 2) {
        return Err(DeadcoreError::Parameter(format!(
            "geometric range needs 0 < lo < hi and count ≥ 2 (lo={lo}, hi={hi}, count={count})"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect();
    v[0] = lo;
    v[count - 1] = hi;
    Ok(v)
}

/// Solve every `h` in parallel; results come back in input order.
pub fn solve_sweep_points(
    op: &RadialOperator,
    bc: BcKind,
    p: f64,
    h_values: &[f64],
    cfg: &SolveConfig,
) -> Result<Vec<SweepPoint>> {
    h_values
        .par_iter()
        .map(|&h| {
            let solution = minimal_solution(op, BoundaryCondition::new(bc, h)?, p, cfg)?;
            let estimate = match detect_free_boundary(&solution.profile, None) {
                Ok(e) => Some(e),
                Err(DeadcoreError::DegenerateProfile(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(SweepPoint { h, solution, estimate })
        })
        .collect()
}

fn sample_of(pt: &SweepPoint) -> SweepSample {
    let detected = pt.solution.converged && pt.estimate.is_some_and(|e| e.detected());
    SweepSample {
        h: pt.h,
        r_star: if detected {
            pt.estimate.and_then(|e| e.best())
        } else {
            None
        },
        r_star_node: if detected {
            pt.estimate.and_then(|e| e.r_star)
        } else {
            None
        },
        converged: pt.solution.converged,
        n_final: pt.solution.n_final,
        residual: pt.solution.profile.residual,
    }
}

/// Fit collected samples (sorted by `h`).
pub fn fit_sweep(bc: BcKind, p: f64, mut samples: Vec<SweepSample>, fit: SweepFit) -> Result<SweepResult> {
    samples.sort_by(|a, b| a.h.total_cmp(&b.h));
    let detected: Vec<(f64, f64)> = samples.iter().filter_map(|s| s.r_star.map(|r| (s.h, r))).collect();
    let partial = detected.len() < samples.len();
    let monotone_in_h = detected.windows(2).all(|w| w[1].1 >= w[0].1 * (1.0 - 1e-9));
    let full = fit.apply(&detected)?;
    let range = |pts: &[(f64, f64)]| (pts[0].0, pts[pts.len() - 1].0);
    let full_record = FitRecord {
        exponent: full.exponent,
        intercept: full.intercept,
        r_squared: full.r_squared,
        fit_kind: fit.kind(),
        subset_used: range(&detected),
        points: full.points,
    };
    let mut primary = full_record.clone();
    let mut full_range = None;
    if full.r_squared < FULL_RANGE_R2 {
        let h_top = detected[detected.len() - 1].0;
        let top: Vec<(f64, f64)> = detected
            .iter()
            .copied()
            .filter(|(h, _)| *h >= h_top * 10f64.powf(-TOP_DECADES) * (1.0 - 1e-12))
            .collect();
        if top.len() >= 3 {
            let f = fit.apply(&top)?;
            primary = FitRecord {
                exponent: f.exponent,
                intercept: f.intercept,
                r_squared: f.r_squared,
                fit_kind: fit.kind(),
                subset_used: range(&top),
                points: f.points,
            };
            full_range = Some(full_record);
        }
    }
    Ok(SweepResult {
        bc,
        p,
        samples,
        fit_kind: fit.kind(),
        exponent: primary.exponent,
        intercept: primary.intercept,
        r_squared: primary.r_squared,
        subset_used: primary.subset_used,
        full_range,
        partial,
        monotone_in_h,
    })
}

/// Run `minimal_solution` and detection for each `h`, then fit.
pub fn sweep_h(
    op: &RadialOperator,
    bc: BcKind,
    p: f64,
    h_values: &[f64],
    fit: SweepFit,
    cfg: &SolveConfig,
) -> Result<SweepResult> {
    validate_h_values(h_values)?;
    let points = solve_sweep_points(op, bc, p, h_values, cfg)?;
    fit_sweep(bc, p, points.iter().map(sample_of).collect(), fit)
}

/// Pointwise ordering of consecutive profiles: `u_{h_k} ≤ u_{h_{k+1}}`
/// within `tol` (relative to the larger profile's maximum).
pub fn profiles_monotone_in_h(points: &[SweepPoint], tol: f64) -> Result<bool> {
    for w in points.windows(2) {
        let (a, b) = (&w[0].solution.profile, &w[1].solution.profile);
        let scale = b.max_value().max(a.max_value());
        if !compare_profiles(a, b, tol * scale)?.a_below_b {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn samples_of(points: &[SweepPoint]) -> Vec<SweepSample> {
    points.iter().map(sample_of).collect()
}
