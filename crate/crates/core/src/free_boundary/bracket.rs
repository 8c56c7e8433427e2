//! Two-sided bounds on `r*` from calibrated compactly supported comparison
//! functions.
//!
//! A profile `V = θ V₁` with support `[R, c]` is an upper solution when
//! `L V ≤ Λ V^p` on `(R, c)` and its boundary quantity dominates the data;
//! then `u ≤ V` and `r* ≤ c`. Lower solutions reverse both inequalities and
//! give `r* ≥ c`. Writing `L V₁ = Q V₁`, the differential inequality is a
//! bound on `ln θ` at every point where `Q > 0`:
//! `ln θ ≤ (ln Λ - ln Q)/(1-p) - ln V₁` for the upper role, `≥` for the lower
//! one (which needs `Q > 0` everywhere). The boundary condition adds a
//! bound in the opposite direction, so feasibility at a given `c` is a
//! comparison of two numbers. The search then moves `c`: the smallest
//! feasible upper cutoff and the largest feasible lower one form the bracket.
//! The inequalities are enforced on a check grid, not proven between its
//! points.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analytic::auxiliary::solve_g_discrete;
use crate::analytic::families::{
    critical_test_function, inward_test_function, outward_test_function, Role, TestFunctionProfile,
};
use crate::error::{DeadcoreError, Result};
use crate::operator::{operator_regime, BoundaryCondition, DriftSign, RadialOperator, RegimeKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BracketParams {
    /// Uniform check points on `[R, c)`; twelve points clustered at `c` are
    /// added.
    pub check_points: usize,
    /// Candidate `γ` values (outward family and inward upper family).
    pub gammas: Vec<f64>,
    /// Candidate decay rates of the inward family, as multiples of the drift's
    /// natural rate `b₀ / ((m+1) A)`.
    pub k_factors: Vec<f64>,
    /// Ratio between consecutive trial widths `c - R` in the scan.
    pub scan_ratio: f64,
    /// Scan range of `(c - R)/R`.
    pub width_min: f64,
    pub width_max: f64,
    pub bisection_steps: usize,
    /// Nodes of the auxiliary solve (critical family).
    pub aux_grid_points: usize,
    /// Regime inference window `[R, R · regime_span]`.
    pub regime_span: f64,
}

impl Default for BracketParams {
    fn default() -> Self {
        Self {
            check_points: 200,
            gammas: vec![1e-2, 1e-1, 1.0, 10.0],
            k_factors: vec![0.25, 0.5, 0.75, 0.9, 1.0, 1.1, 1.5, 2.0],
            scan_ratio: 1.25,
            width_min: 1e-4,
            width_max: 1e9,
            bisection_steps: 40,
            aux_grid_points: 160,
            regime_span: 1e6,
        }
    }
}

impl BracketParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(DeadcoreError::Parameter(m.to_string()));
        if self.check_points < 8 {
            return bad("check_points must be at least 8");
        }
        if self.gammas.is_empty() || self.gammas.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return bad("gammas must be a nonempty list of positive values");
        }
        if self.k_factors.is_empty() || self.k_factors.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return bad("k_factors must be a nonempty list of positive values");
        }
        if !(self.scan_ratio > 1.0) {
            return bad("scan_ratio must exceed 1");
        }
        if !(self.width_min > 0.0 && self.width_max > self.width_min && self.width_max.is_finite()) {
            return bad("need 0 < width_min < width_max");
        }
        if self.aux_grid_points < 16 {
            return bad("aux_grid_points must be at least 16");
        }
        if !(self.regime_span > 10.0) {
            return bad("regime_span must exceed 10");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BracketFamily {
    Outward { m: f64, j: f64 },
    Inward { m: f64, natural_k: f64 },
    Critical { mu: f64 },
}

/// A calibrated test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibrated {
    pub c: f64,
    pub theta: f64,
    /// `γ` or `k` of the winning candidate (NaN when unused).
    pub gamma: f64,
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeBoundaryBracket {
    pub r_lo: f64,
    pub r_hi: f64,
    pub family: BracketFamily,
    pub lower: Calibrated,
    pub upper: Calibrated,
}

impl FreeBoundaryBracket {
    pub fn contains(&self, r: f64, rel_tol: f64) -> bool {
        r >= self.r_lo * (1.0 - rel_tol) && r <= self.r_hi * (1.0 + rel_tol)
    }

    pub fn width_ratio(&self) -> f64 {
        self.r_hi / self.r_lo
    }

    /// The calibrated `(lower, upper)` comparison functions, rebuilt from the
    /// stored calibrations. `params` must be the ones used for the bracket.
    pub fn comparison_functions(
        &self,
        op: &RadialOperator,
        p: f64,
        params: &BracketParams,
    ) -> Result<(TestFunctionProfile, TestFunctionProfile)> {
        let build = |role: Role, cal: &Calibrated| -> Result<TestFunctionProfile> {
            let tf = match self.family {
                BracketFamily::Outward { m, j } => outward_test_function(role, cal.c, p, m, j, 1.0, cal.gamma)?,
                BracketFamily::Inward { m, .. } => inward_test_function(role, cal.c, p, m, cal.k, cal.gamma)?,
                BracketFamily::Critical { mu } => {
                    let g = solve_g_discrete(cal.c, mu, p, op.r_inner, params.aux_grid_points)?;
                    critical_test_function(role, Arc::new(g))
                }
            };
            Ok(tf.with_theta(cal.theta))
        };
        Ok((build(Role::Lower, &self.lower)?, build(Role::Upper, &self.upper)?))
    }
}

struct Candidate {
    tf: TestFunctionProfile,
    gamma: f64,
    k: f64,
}

struct Problem<'a> {
    op: &'a RadialOperator,
    bc: BoundaryCondition,
    p: f64,
    family: BracketFamily,
    params: &'a BracketParams,
}

impl Problem<'_> {
    fn candidates(&self, role: Role, c: f64) -> Result<Vec<Candidate>> {
        let p = self.p;
        let mut out = Vec::new();
        match self.family {
            BracketFamily::Outward { m, j } => {
                for &g in &self.params.gammas {
                    out.push(Candidate {
                        tf: outward_test_function(role, c, p, m, j, 1.0, g)?,
                        gamma: g,
                        k: f64::NAN,
                    });
                }
            }
            BracketFamily::Inward { m, natural_k } => {
                let gammas: &[f64] = match role {
                    Role::Upper => &self.params.gammas,
                    Role::Lower => &[1.0],
                };
                for &f in &self.params.k_factors {
                    for &g in gammas {
                        out.push(Candidate {
                            tf: inward_test_function(role, c, p, m, f * natural_k, g)?,
                            gamma: g,
                            k: f * natural_k,
                        });
                    }
                }
            }
            BracketFamily::Critical { mu } => {
                let g = solve_g_discrete(c, mu, p, self.op.r_inner, self.params.aux_grid_points)?;
                out.push(Candidate {
                    tf: critical_test_function(role, Arc::new(g)),
                    gamma: f64::NAN,
                    k: f64::NAN,
                });
            }
        }
        Ok(out)
    }

    fn check_radii(&self, c: f64) -> Vec<f64> {
        let r0 = self.op.r_inner;
        let n = self.params.check_points;
        let mut v: Vec<f64> = (0..n).map(|i| r0 + (c - r0) * i as f64 / n as f64).collect();
        for t in 1..=12 {
            v.push(c - (c - r0) * 10f64.powi(-t));
        }
        v
    }

    /// `ln θ` for a feasible calibration of `tf` in `role`, if any.
    fn calibrate(&self, tf: &TestFunctionProfile, role: Role) -> Result<Option<f64>> {
        let r0 = self.op.r_inner;
        let mut lo_ode = f64::NEG_INFINITY; // lower role: ln θ ≥ lo_ode
        let mut hi_ode = f64::INFINITY; // upper role: ln θ ≤ hi_ode
        for r in self.check_radii(tf.c) {
            if !(r < tf.c) {
                continue;
            }
            let ld = tf.log_derivatives(r);
            let co = self.op.evaluate(r)?;
            let q = co.a * ld.d2 - co.b * ld.d1;
            if !(ld.ln_v.is_finite() && q.is_finite()) {
                return Ok(None);
            }
            if q > 0.0 {
                let e = (co.lambda.ln() - q.ln()) / (1.0 - self.p) - ld.ln_v;
                hi_ode = hi_ode.min(e);
                lo_ode = lo_ode.max(e);
            } else if role == Role::Lower {
                return Ok(None);
            }
        }
        let ln_h = self.bc.h.ln();
        let bq = tf.ln_boundary_quantity(self.bc.kind, r0);
        match role {
            Role::Upper => {
                let Some(bq) = bq else { return Ok(None) };
                let need = ln_h - bq;
                Ok((need <= hi_ode).then_some(need))
            }
            Role::Lower => {
                let cap = bq.map_or(f64::INFINITY, |b| ln_h - b);
                Ok((lo_ode <= cap).then_some(lo_ode))
            }
        }
    }

    fn feasible(&self, role: Role, c: f64) -> Result<Option<Calibrated>> {
        for cand in self.candidates(role, c)? {
            if let Some(lt) = self.calibrate(&cand.tf, role)? {
                return Ok(Some(Calibrated {
                    c,
                    theta: lt.exp(),
                    gamma: cand.gamma,
                    k: cand.k,
                }));
            }
        }
        Ok(None)
    }

    fn bisect(&self, role: Role, mut bad: f64, mut good: (f64, Calibrated)) -> Result<Calibrated> {
        for _ in 0..self.params.bisection_steps {
            let mid = 0.5 * (bad + good.0);
            if (good.0 - bad).abs() <= 1e-10 * good.0 {
                break;
            }
            match self.feasible(role, mid)? {
                Some(cal) => good = (mid, cal),
                None => bad = mid,
            }
        }
        Ok(good.1)
    }

    fn widths(&self) -> Vec<f64> {
        let r0 = self.op.r_inner;
        let mut w = Vec::new();
        let mut s = self.params.width_min;
        while s <= self.params.width_max {
            w.push(r0 + r0 * s);
            s *= self.params.scan_ratio;
        }
        w
    }

    /// Smallest feasible upper cutoff.
    fn upper(&self) -> Result<Calibrated> {
        let mut prev = self.op.r_inner;
        for c in self.widths() {
            if let Some(cal) = self.feasible(Role::Upper, c)? {
                return self.bisect(Role::Upper, prev, (c, cal));
            }
            prev = c;
        }
        Err(DeadcoreError::NoBracket(format!(
            "no upper test function of the {:?} family calibrates for c up to {:.3e}",
            self.family, prev
        )))
    }

    /// Largest feasible lower cutoff below the first infeasible one.
    fn lower(&self) -> Result<Calibrated> {
        let mut best: Option<Calibrated> = None;
        for c in self.widths() {
            match (self.feasible(Role::Lower, c)?, best) {
                (Some(cal), _) => best = Some(cal),
                (None, Some(b)) => return self.bisect(Role::Lower, c, (b.c, b)),
                (None, None) => {}
            }
        }
        best.ok_or_else(|| {
            DeadcoreError::NoBracket(format!(
                "no lower test function of the {:?} family calibrates",
                self.family
            ))
        })
    }
}

fn choose_family(op: &RadialOperator, p: f64, params: &BracketParams) -> Result<BracketFamily> {
    if let Some(mu) = op.critical_mu() {
        return Ok(BracketFamily::Critical { mu });
    }
    let regime = operator_regime(op, p, op.r_inner * params.regime_span)?;
    let (m, j) = (regime.exponents.m, regime.exponents.j);
    match regime.label.kind {
        RegimeKind::PowerLaw => Ok(BracketFamily::Outward { m, j }),
        RegimeKind::LogPower if regime.exponents.drift_sign == DriftSign::Inward => {
            let r_ref = op.r_inner * 10.0;
            let co = op.evaluate(r_ref)?;
            let b0 = co.b.abs() / r_ref.powf(m);
            Ok(BracketFamily::Inward {
                m,
                natural_k: b0 / ((m + 1.0) * co.a),
            })
        }
        other => Err(DeadcoreError::NoBracket(format!(
            "no comparison family for regime {other:?} (m = {m}, j = {j})"
        ))),
    }
}

/// `[r_lo, r_hi]` containing the free-boundary radius of the minimal
/// solution.
pub fn bracket_free_boundary(
    op: &RadialOperator,
    bc: BoundaryCondition,
    p: f64,
    params: &BracketParams,
) -> Result<FreeBoundaryBracket> {
    if !(p > 0.0 && p < 1.0) {
        return Err(DeadcoreError::Parameter(format!("p must lie in (0, 1), got {p}")));
    }
    params.validate()?;
    let family = choose_family(op, p, params)?;
    let prob = Problem {
        op,
        bc,
        p,
        family,
        params,
    };
    let upper = prob.upper()?;
    let lower = prob.lower()?;
    if lower.c > upper.c * (1.0 + 1e-9) {
        return Err(DeadcoreError::NoBracket(format!(
            "calibrated lower cutoff {} exceeds upper cutoff {}",
            lower.c, upper.c
        )));
    }
    Ok(FreeBoundaryBracket {
        r_lo: lower.c,
        r_hi: upper.c,
        family,
        lower,
        upper,
    })
}
