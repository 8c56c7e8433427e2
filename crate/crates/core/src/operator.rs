//! Radial operator `A(r) u'' - B(r) u'`, the reaction coefficient `Λ(r)`, and
//! the regime classification that predicts how the free-boundary radius scales
//! with the boundary datum `h`.

use serde::{Deserialize, Serialize};

use crate::error::{DeadcoreError, Result};

/// Tolerance used when deciding whether `m + j` sits exactly on a regime edge.
pub const REGIME_EDGE_TOL: f64 = 1e-9;

/// One signed power-law term `sign * prefactor * r^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub prefactor: f64,
    pub exponent: f64,
    #[serde(default = "default_sign")]
    pub sign: i8,
}

fn default_sign() -> i8 {
    1
}

impl PowerTerm {
    pub fn new(prefactor: f64, exponent: f64, sign: i8) -> Self {
        Self {
            prefactor,
            exponent,
            sign,
        }
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        f64::from(self.sign) * self.prefactor * r.powf(self.exponent)
    }

    fn check(&self) -> Result<()> {
        if !self.prefactor.is_finite() || !self.exponent.is_finite() {
            return Err(DeadcoreError::InvalidOperator(
                "power term has a non-finite prefactor or exponent".into(),
            ));
        }
        if self.sign != 1 && self.sign != -1 {
            return Err(DeadcoreError::InvalidOperator(format!(
                "sign must be +1 or -1, got {}",
                self.sign
            )));
        }
        Ok(())
    }
}

/// A scalar coefficient profile on `[R, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CoefficientSpec {
    Constant {
        value: f64,
    },
    Power(PowerTerm),
    Sum {
        terms: Vec<PowerTerm>,
    },
    /// Sampled values. Between nodes of equal sign the interpolation is
    /// piecewise power-law (exact for power laws), otherwise linear.
    Tabulated {
        r: Vec<f64>,
        values: Vec<f64>,
    },
}

impl CoefficientSpec {
    pub fn constant(value: f64) -> Self {
        CoefficientSpec::Constant { value }
    }

    pub fn power(prefactor: f64, exponent: f64, sign: i8) -> Self {
        CoefficientSpec::Power(PowerTerm::new(prefactor, exponent, sign))
    }

    pub fn zero() -> Self {
        CoefficientSpec::Constant { value: 0.0 }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            CoefficientSpec::Constant { value } => *value,
            CoefficientSpec::Power(t) => t.eval(r),
            CoefficientSpec::Sum { terms } => terms.iter().map(|t| t.eval(r)).sum(),
            CoefficientSpec::Tabulated { r: nodes, values } => interpolate_table(nodes, values, r),
        }
    }

    /// Exactly constant (independent of `r`)?
    pub fn constant_value(&self) -> Option<f64> {
        match self {
            CoefficientSpec::Constant { value } => Some(*value),
            CoefficientSpec::Power(t) if t.exponent == 0.0 || t.prefactor == 0.0 => Some(t.eval(1.0)),
            CoefficientSpec::Sum { terms } if terms.iter().all(|t| t.exponent == 0.0) => {
                Some(terms.iter().map(|t| t.eval(1.0)).sum())
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CoefficientSpec::Constant { value } if !value.is_finite() => Err(DeadcoreError::InvalidOperator(
                "constant coefficient is not finite".into(),
            )),
            CoefficientSpec::Constant { .. } => Ok(()),
            CoefficientSpec::Power(t) => t.check(),
            CoefficientSpec::Sum { terms } => {
                if terms.is_empty() {
                    return Err(DeadcoreError::InvalidOperator("sum with no terms".into()));
                }
                terms.iter().try_for_each(PowerTerm::check)
            }
            CoefficientSpec::Tabulated { r, values } => {
                if r.len() < 2 || r.len() != values.len() {
                    return Err(DeadcoreError::InvalidOperator(
                        "tabulated coefficient needs >= 2 nodes and matching lengths".into(),
                    ));
                }
                if r.iter().chain(values.iter()).any(|x| !x.is_finite()) {
                    return Err(DeadcoreError::InvalidOperator(
                        "tabulated coefficient has non-finite entries".into(),
                    ));
                }
                if r[0] <= 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(DeadcoreError::InvalidOperator(
                        "tabulated nodes must be positive and strictly increasing".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

fn interpolate_table(r: &[f64], v: &[f64], x: f64) -> f64 {
    let n = r.len();
    let i = match r.partition_point(|&ri| ri <= x) {
        0 => 0,
        k if k >= n => n - 2,
        k => k - 1,
    };
    let (r0, r1, v0, v1) = (r[i], r[i + 1], v[i], v[i + 1]);
    if v0 == v1 {
        return v0;
    }
    if v0 * v1 > 0.0 && x > 0.0 {
        let t = (x / r0).ln() / (r1 / r0).ln();
        v0 * (v1 / v0).powf(t)
    } else if x < r0 {
        v0
    } else if x > r1 {
        v1
    } else {
        v0 + (v1 - v0) * (x - r0) / (r1 - r0)
    }
}

/// The radial operator together with its reaction coefficient and inner radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialOperator {
    #[serde(rename = "A")]
    pub a: CoefficientSpec,
    #[serde(rename = "B")]
    pub b: CoefficientSpec,
    #[serde(rename = "Lambda")]
    pub lambda: CoefficientSpec,
    #[serde(rename = "R")]
    pub r_inner: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
}

impl RadialOperator {
    pub fn new(a: CoefficientSpec, b: CoefficientSpec, lambda: CoefficientSpec, r_inner: f64) -> Result<Self> {
        let op = Self { a, b, lambda, r_inner };
        op.check_structure()?;
        Ok(op)
    }

    /// `A = a0`, `B = b0`, `Λ = lambda0`.
    pub fn constant(a0: f64, b0: f64, lambda0: f64, r_inner: f64) -> Result<Self> {
        Self::new(
            CoefficientSpec::constant(a0),
            CoefficientSpec::constant(b0),
            CoefficientSpec::constant(lambda0),
            r_inner,
        )
    }

    /// `A = 1`, `B = sign * b0 * r^m`, `Λ = r^{-j}`.
    pub fn power_law(b0: f64, m: f64, sign: i8, j: f64, r_inner: f64) -> Result<Self> {
        let b = if b0 == 0.0 {
            CoefficientSpec::zero()
        } else {
            CoefficientSpec::power(b0, m, sign)
        };
        let lambda = if j == 0.0 {
            CoefficientSpec::constant(1.0)
        } else {
            CoefficientSpec::power(1.0, -j, 1)
        };
        Self::new(CoefficientSpec::constant(1.0), b, lambda, r_inner)
    }

    /// Parse and structurally validate a JSON operator document.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let op: RadialOperator = serde_json::from_str(s)?;
        op.check_structure()?;
        Ok(op)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn check_structure(&self) -> Result<()> {
        if !(self.r_inner.is_finite() && self.r_inner > 0.0) {
            return Err(DeadcoreError::InvalidOperator(format!(
                "inner radius must be positive and finite, got {}",
                self.r_inner
            )));
        }
        self.a.validate()?;
        self.b.validate()?;
        self.lambda.validate()?;
        let at_r = self.evaluate(self.r_inner)?;
        if !(at_r.a > 0.0) {
            return Err(DeadcoreError::InvalidOperator(format!(
                "diffusion coefficient must be positive, A(R) = {}",
                at_r.a
            )));
        }
        Ok(())
    }

    /// Coefficients at `r >= R`.
    pub fn evaluate(&self, r: f64) -> Result<Coefficients> {
        if !(r.is_finite() && r >= self.r_inner * (1.0 - 1e-14)) {
            return Err(DeadcoreError::Domain(format!(
                "r = {r} is below the inner radius R = {}",
                self.r_inner
            )));
        }
        let c = Coefficients {
            a: self.a.eval(r),
            b: self.b.eval(r),
            lambda: self.lambda.eval(r),
        };
        if !(c.lambda > 0.0) {
            return Err(DeadcoreError::InvalidOperator(format!(
                "reaction coefficient must be positive, Lambda({r}) = {}",
                c.lambda
            )));
        }
        if !(c.a.is_finite() && c.b.is_finite() && c.lambda.is_finite()) {
            return Err(DeadcoreError::InvalidOperator(format!(
                "non-finite coefficient at r = {r}"
            )));
        }
        Ok(c)
    }

    /// `Some(μ)` when the operator has the exact critical form `A = A0`,
    /// `B = -B0 / r` with `B0 > 0`; `μ = B0 / A0`.
    pub fn critical_mu(&self) -> Option<f64> {
        let a0 = self.a.constant_value()?;
        let probe = [1.0, 3.7, 41.0, 1.0e3, 2.9e5].map(|s| self.r_inner * s);
        let rb: Vec<f64> = probe.iter().map(|&r| r * self.b.eval(r)).collect();
        let b0 = -rb[0];
        if !(b0 > 0.0) || a0 <= 0.0 {
            return None;
        }
        rb.iter().all(|&x| ((-x) - b0).abs() <= 1e-9 * b0).then_some(b0 / a0)
    }
}

/// Evaluate `(A, B, Λ)` at `r`.
pub fn evaluate_coefficients(op: &RadialOperator, r: f64) -> Result<Coefficients> {
    op.evaluate(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BcKind {
    Neumann,
    Dirichlet,
}

impl std::fmt::Display for BcKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BcKind::Neumann => f.write_str("neumann"),
            BcKind::Dirichlet => f.write_str("dirichlet"),
        }
    }
}

impl std::str::FromStr for BcKind {
    type Err = DeadcoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "neumann" => Ok(BcKind::Neumann),
            "dirichlet" => Ok(BcKind::Dirichlet),
            other => Err(DeadcoreError::Parameter(format!(
                "unknown boundary condition '{other}'"
            ))),
        }
    }
}

/// Inner boundary datum: `u'(R) = -h` (Neumann) or `u(R) = h` (Dirichlet).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub kind: BcKind,
    pub h: f64,
}

impl BoundaryCondition {
    pub fn new(kind: BcKind, h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(DeadcoreError::Parameter(format!(
                "boundary datum h must be positive, got {h}"
            )));
        }
        Ok(Self { kind, h })
    }

    pub fn neumann(h: f64) -> Result<Self> {
        Self::new(BcKind::Neumann, h)
    }

    pub fn dirichlet(h: f64) -> Result<Self> {
        Self::new(BcKind::Dirichlet, h)
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationFlag {
    NonPositiveDiffusion,
    NonPositiveReaction,
    /// `A` keeps growing over the sampled range: no fixed upper constant.
    UnboundedDiffusion,
    /// `A` keeps decaying over the sampled range: no fixed lower constant.
    DecayingDiffusion,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub r_min: f64,
    pub r_max: f64,
    pub samples: usize,
    pub a_min: f64,
    pub a_max: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Log-log slope of `A` over the top two decades of the sample grid.
    pub a_slope: f64,
    pub flags: Vec<ValidationFlag>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.flags.is_empty()
    }
}

/// Largest |log-log slope| of `A` still accepted as "order one".
pub const DIFFUSION_SLOPE_TOL: f64 = 0.02;

pub fn log_spaced(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let samples = samples.max(2);
    let (la, lb) = (lo.ln(), hi.ln());
    (0..samples)
        .map(|i| {
            if i == samples - 1 {
                hi
            } else {
                (la + (lb - la) * i as f64 / (samples - 1) as f64).exp()
            }
        })
        .collect()
}

fn top_two_decades(r_inner: f64, r_max: f64) -> (f64, f64) {
    ((r_max / 100.0).max(r_inner), r_max)
}

fn loglog_slope(spec: &CoefficientSpec, lo: f64, hi: f64) -> f64 {
    let (fa, fb) = (spec.eval(lo).abs(), spec.eval(hi).abs());
    if fa > 0.0 && fb > 0.0 && hi > lo {
        (fb / fa).ln() / (hi / lo).ln()
    } else {
        0.0
    }
}

pub fn validate_operator(op: &RadialOperator, r_max: f64, samples: usize) -> Result<ValidationReport> {
    if !(r_max > op.r_inner) {
        return Err(DeadcoreError::Domain(format!(
            "r_max = {r_max} must exceed R = {}",
            op.r_inner
        )));
    }
    if samples < 2 {
        return Err(DeadcoreError::Parameter("need at least 2 samples".into()));
    }
    let grid = log_spaced(op.r_inner, r_max, samples);
    let mut rep = ValidationReport {
        r_min: op.r_inner,
        r_max,
        samples,
        a_min: f64::INFINITY,
        a_max: f64::NEG_INFINITY,
        b_min: f64::INFINITY,
        b_max: f64::NEG_INFINITY,
        lambda_min: f64::INFINITY,
        lambda_max: f64::NEG_INFINITY,
        a_slope: 0.0,
        flags: Vec::new(),
    };
    let mut non_finite = false;
    for &r in &grid {
        let (a, b, l) = (op.a.eval(r), op.b.eval(r), op.lambda.eval(r));
        if !(a.is_finite() && b.is_finite() && l.is_finite()) {
            non_finite = true;
            continue;
        }
        rep.a_min = rep.a_min.min(a);
        rep.a_max = rep.a_max.max(a);
        rep.b_min = rep.b_min.min(b);
        rep.b_max = rep.b_max.max(b);
        rep.lambda_min = rep.lambda_min.min(l);
        rep.lambda_max = rep.lambda_max.max(l);
    }
    let (lo, hi) = top_two_decades(op.r_inner, r_max);
    rep.a_slope = loglog_slope(&op.a, lo, hi);
    if non_finite {
        rep.flags.push(ValidationFlag::NonFinite);
    }
    if !(rep.a_min > 0.0) {
        rep.flags.push(ValidationFlag::NonPositiveDiffusion);
    }
    if !(rep.lambda_min > 0.0) {
        rep.flags.push(ValidationFlag::NonPositiveReaction);
    }
    if rep.a_slope > DIFFUSION_SLOPE_TOL {
        rep.flags.push(ValidationFlag::UnboundedDiffusion);
    } else if rep.a_slope < -DIFFUSION_SLOPE_TOL {
        rep.flags.push(ValidationFlag::DecayingDiffusion);
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Regimes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DriftSign {
    Inward,
    Zero,
    Outward,
}

impl DriftSign {
    pub fn as_i32(self) -> i32 {
        match self {
            DriftSign::Inward => -1,
            DriftSign::Zero => 0,
            DriftSign::Outward => 1,
        }
    }
}

impl TryFrom<i32> for DriftSign {
    type Error = DeadcoreError;

    fn try_from(v: i32) -> Result<Self> {
        match v {
            -1 => Ok(DriftSign::Inward),
            0 => Ok(DriftSign::Zero),
            1 => Ok(DriftSign::Outward),
            other => Err(DeadcoreError::Parameter(format!(
                "drift sign must be -1, 0 or +1, got {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeKind {
    NoFreeBoundaryAllH,
    BorderlineHDependent,
    PowerLaw,
    LogPower,
    Unclassified,
}

/// Predicted free-boundary behaviour. Only `PowerLaw` carries the two
/// exponents and only `LogPower` carries `log_power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub kind: RegimeKind,
    #[serde(rename = "exponent_N")]
    pub exponent_n: Option<f64>,
    #[serde(rename = "exponent_D")]
    pub exponent_d: Option<f64>,
    pub log_power: Option<f64>,
}

impl RegimeLabel {
    fn bare(kind: RegimeKind) -> Self {
        Self {
            kind,
            exponent_n: None,
            exponent_d: None,
            log_power: None,
        }
    }

    pub fn power_law(exponent_n: f64, exponent_d: f64) -> Self {
        Self {
            kind: RegimeKind::PowerLaw,
            exponent_n: Some(exponent_n),
            exponent_d: Some(exponent_d),
            log_power: None,
        }
    }

    pub fn log_power(log_power: f64) -> Self {
        Self {
            kind: RegimeKind::LogPower,
            exponent_n: None,
            exponent_d: None,
            log_power: Some(log_power),
        }
    }

    pub fn exponent(&self, bc: BcKind) -> Option<f64> {
        match bc {
            BcKind::Neumann => self.exponent_n,
            BcKind::Dirichlet => self.exponent_d,
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(DeadcoreError::Parameter(format!(
            "absorption power p must lie in (0, 1), got {p}"
        )))
    }
}

/// Classify the drift exponent `m`, drift sign and reaction decay `j`.
///
/// For `B ≡ 0` pass `m = -1` with [`DriftSign::Zero`]; the zero drift is the
/// bounded-by-`1/r` outward case. The inward critical case `m = -1` is
/// reported `Unclassified` here and handled by [`predicted_exponent_critical`].
pub fn classify_regime(m: f64, drift_sign: DriftSign, j: f64, p: f64) -> Result<RegimeLabel> {
    check_p(p)?;
    if !(m.is_finite() && j.is_finite()) {
        return Err(DeadcoreError::Parameter("m and j must be finite".into()));
    }
    let s = m + j;
    let label = match drift_sign {
        DriftSign::Outward | DriftSign::Zero => {
            if j > 2.0 + REGIME_EDGE_TOL {
                RegimeLabel::bare(RegimeKind::NoFreeBoundaryAllH)
            } else if (j - 2.0).abs() <= REGIME_EDGE_TOL
                || ((s - 1.0).abs() <= REGIME_EDGE_TOL && m >= -1.0 - REGIME_EDGE_TOL)
            {
                RegimeLabel::bare(RegimeKind::BorderlineHDependent)
            } else if s > 1.0 && m > -1.0 {
                RegimeLabel::bare(RegimeKind::NoFreeBoundaryAllH)
            } else if s < 1.0 && m >= -1.0 - REGIME_EDGE_TOL {
                let gap = 1.0 - s;
                let exponent_d = (1.0 - p) / gap;
                let exponent_n = if s >= -REGIME_EDGE_TOL {
                    (1.0 - p) / (gap * p)
                } else {
                    (1.0 - p) / (p - s)
                };
                RegimeLabel::power_law(exponent_n, exponent_d)
            } else {
                RegimeLabel::bare(RegimeKind::Unclassified)
            }
        }
        DriftSign::Inward => {
            if m > -1.0 + REGIME_EDGE_TOL {
                RegimeLabel::log_power(1.0 / (1.0 + m))
            } else {
                RegimeLabel::bare(RegimeKind::Unclassified)
            }
        }
    };
    Ok(label)
}

/// Free-boundary exponent for the critical inward drift `B = -μ A0 / r`,
/// `Λ ≈ 1`. `μ = 0` is accepted and reproduces the drift-free exponents.
pub fn predicted_exponent_critical(mu: f64, p: f64, bc: BcKind) -> Result<f64> {
    check_p(p)?;
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(DeadcoreError::Parameter(format!(
            "critical drift ratio mu must be non-negative, got {mu}"
        )));
    }
    Ok(match bc {
        BcKind::Neumann => (1.0 - p) / (1.0 + p + mu * (1.0 - p)),
        BcKind::Dirichlet => (1.0 - p) / 2.0,
    })
}

/// Power-law exponents read off a coefficient profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferredExponents {
    pub m: f64,
    pub drift_sign: DriftSign,
    pub j: f64,
}

/// Estimate `(m, sign, j)` by log-log slopes over the top two decades of
/// `[R, r_max]`. A drift that vanishes on the whole window is reported as
/// `m = -1` with zero sign.
pub fn infer_exponents(op: &RadialOperator, r_max: f64) -> Result<InferredExponents> {
    if !(r_max > op.r_inner) {
        return Err(DeadcoreError::Domain(format!(
            "r_max = {r_max} must exceed R = {}",
            op.r_inner
        )));
    }
    let (lo, hi) = top_two_decades(op.r_inner, r_max);
    let window = log_spaced(lo, hi, 16);
    let b_scale = window.iter().map(|&r| op.b.eval(r).abs() * r).fold(0.0_f64, f64::max);
    let (m, drift_sign) = if b_scale <= 1e-300 {
        (-1.0, DriftSign::Zero)
    } else {
        let b_hi = op.b.eval(hi);
        let sign = if b_hi > 0.0 {
            DriftSign::Outward
        } else if b_hi < 0.0 {
            DriftSign::Inward
        } else {
            DriftSign::Zero
        };
        (loglog_slope(&op.b, lo, hi), sign)
    };
    // `0.0 - x` rather than `-x`, so a constant Λ gives j = 0, not -0
    let j = 0.0 - loglog_slope(&op.lambda, lo, hi);
    Ok(InferredExponents { m, drift_sign, j })
}

/// Regime of a concrete operator: the classification of its inferred
/// exponents plus the critical drift ratio when `B = -B0/r` exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorRegime {
    pub exponents: InferredExponents,
    pub label: RegimeLabel,
    pub critical_mu: Option<f64>,
}

impl OperatorRegime {
    /// Predicted `r*(h)` exponent for a boundary condition, if any.
    pub fn predicted_exponent(&self, p: f64, bc: BcKind) -> Option<f64> {
        if let Some(mu) = self.critical_mu {
            return predicted_exponent_critical(mu, p, bc).ok();
        }
        self.label.exponent(bc)
    }
}

pub fn operator_regime(op: &RadialOperator, p: f64, r_max: f64) -> Result<OperatorRegime> {
    let exponents = infer_exponents(op, r_max)?;
    let label = classify_regime(exponents.m, exponents.drift_sign, exponents.j, p)?;
    Ok(OperatorRegime {
        exponents,
        label,
        critical_mu: op.critical_mu(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_power_laws() {
        let op = RadialOperator::new(
            CoefficientSpec::constant(1.0),
            CoefficientSpec::power(1.0, 0.0, 1),
            CoefficientSpec::power(1.0, -0.5, 1),
            1.0,
        )
        .unwrap();
        let c = evaluate_coefficients(&op, 4.0).unwrap();
        assert_eq!((c.a, c.b, c.lambda), (1.0, 1.0, 0.5));

        let op = RadialOperator::new(
            CoefficientSpec::constant(1.0),
            CoefficientSpec::power(2.0, -1.0, -1),
            CoefficientSpec::constant(1.0),
            1.0,
        )
        .unwrap();
        let c = evaluate_coefficients(&op, 2.0).unwrap();
        assert_eq!((c.a, c.b, c.lambda), (1.0, -1.0, 1.0));

        let op = RadialOperator::constant(1.0, 0.0, 1.0, 1.0).unwrap();
        let c = evaluate_coefficients(&op, 1.0).unwrap();
        assert_eq!((c.a, c.b, c.lambda), (1.0, 0.0, 1.0));
    }

    #[test]
    fn evaluate_errors() {
        let op = RadialOperator::constant(1.0, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(op.evaluate(0.5), Err(DeadcoreError::Domain(_))));
        let bad = RadialOperator {
            a: CoefficientSpec::constant(1.0),
            b: CoefficientSpec::zero(),
            lambda: CoefficientSpec::Sum {
                terms: vec![PowerTerm::new(1.0, 0.0, 1), PowerTerm::new(1.0, 1.0, -1)],
            },
            r_inner: 0.5,
        };
        assert!(bad.evaluate(0.7).is_ok());
        assert!(matches!(bad.evaluate(2.0), Err(DeadcoreError::InvalidOperator(_))));
    }

    #[test]
    fn json_schema_field_names() {
        let doc = r#"{"A": {"kind":"constant","value":1.0},
                      "B": {"kind":"power","prefactor":1.0,"exponent":-1.0,"sign":-1},
                      "Lambda": {"kind":"constant","value":1.0}, "R": 1.0}"#;
        let op = RadialOperator::from_json_str(doc).unwrap();
        assert_eq!(op.b.eval(2.0), -0.5);
        assert_eq!(op.critical_mu(), Some(1.0));
        let back: serde_json::Value = serde_json::from_str(&op.to_json_string().unwrap()).unwrap();
        for key in ["A", "B", "Lambda", "R"] {
            assert!(back.get(key).is_some(), "missing {key}");
        }
        assert_eq!(back["B"]["kind"], "power");
    }

    #[test]
    fn json_rejects_bad_documents() {
        for doc in [
            "{",
            r#"{"A": {"kind":"constant","value":1.0}, "B": {"kind":"constant","value":0.0}, "Lambda": {"kind":"constant","value":1.0}, "R": -1.0}"#,
            r#"{"A": {"kind":"constant","value":0.0}, "B": {"kind":"constant","value":0.0}, "Lambda": {"kind":"constant","value":1.0}, "R": 1.0}"#,
            r#"{"A": {"kind":"constant","value":1.0}, "B": {"kind":"power","prefactor":1.0,"exponent":1.0,"sign":3}, "Lambda": {"kind":"constant","value":1.0}, "R": 1.0}"#,
            r#"{"A": {"kind":"constant","value":1.0}, "B": {"kind":"tabulated","r":[2.0,1.0],"values":[0.0,0.0]}, "Lambda": {"kind":"constant","value":1.0}, "R": 1.0}"#,
            r#"{"A": {"kind":"constant","value":1.0}, "B": {"kind":"sum","terms":[]}, "Lambda": {"kind":"constant","value":1.0}, "R": 1.0}"#,
        ] {
            assert!(RadialOperator::from_json_str(doc).is_err(), "accepted {doc}");
        }
    }

    #[test]
    fn tabulated_is_exact_for_power_laws() {
        let r: Vec<f64> = log_spaced(1.0, 1e4, 9);
        let values: Vec<f64> = r.iter().map(|x| -2.0 / x).collect();
        let spec = CoefficientSpec::Tabulated { r, values };
        for x in [1.0, 1.7, 33.3, 999.0, 5e4] {
            assert!((spec.eval(x) + 2.0 / x).abs() < 1e-12 * (2.0 / x));
        }
    }

    #[test]
    fn validation_examples() {
        let op = RadialOperator::constant(1.0, 0.0, 1.0, 1.0).unwrap();
        let rep = validate_operator(&op, 1e6, 64).unwrap();
        assert!(rep.passed());
        assert_eq!((rep.a_min, rep.a_max), (1.0, 1.0));

        let op = RadialOperator::new(
            CoefficientSpec::power(1.0, 0.1, 1),
            CoefficientSpec::zero(),
            CoefficientSpec::constant(1.0),
            1.0,
        )
        .unwrap();
        let rep = validate_operator(&op, 1e6, 64).unwrap();
        assert!(rep.flags.contains(&ValidationFlag::UnboundedDiffusion));

        let op = RadialOperator::new(
            CoefficientSpec::constant(1.0),
            CoefficientSpec::zero(),
            CoefficientSpec::power(1.0, -3.0, 1),
            1.0,
        )
        .unwrap();
        let rep = validate_operator(&op, 1e6, 64).unwrap();
        assert!(rep.passed());
        assert!((rep.lambda_min - 1e-18).abs() < 1e-30);
    }

    #[test]
    fn classify_examples() {
        let l = classify_regime(1.0, DriftSign::Outward, 0.5, 0.5).unwrap();
        assert_eq!(l.kind, RegimeKind::NoFreeBoundaryAllH);
        assert_eq!(l.exponent_n, None);

        let l = classify_regime(0.0, DriftSign::Outward, 0.0, 0.5).unwrap();
        assert_eq!(l.kind, RegimeKind::PowerLaw);
        assert!((l.exponent_n.unwrap() - 1.0).abs() < 1e-15);
        assert!((l.exponent_d.unwrap() - 0.5).abs() < 1e-15);

        let l = classify_regime(1.0, DriftSign::Inward, 0.0, 0.5).unwrap();
        assert_eq!(l.kind, RegimeKind::LogPower);
        assert_eq!(l.log_power, Some(0.5));

        let l = classify_regime(0.0, DriftSign::Outward, 1.0, 0.5).unwrap();
        assert_eq!(l.kind, RegimeKind::BorderlineHDependent);

        let l = classify_regime(-1.0, DriftSign::Inward, 0.0, 0.5).unwrap();
        assert_eq!(l.kind, RegimeKind::Unclassified);

        assert!(classify_regime(0.0, DriftSign::Outward, 0.0, 1.0).is_err());
        assert!(classify_regime(0.0, DriftSign::Outward, 0.0, 0.0).is_err());
    }

    #[test]
    fn zero_drift_reproduces_explicit_exponents() {
        for p in [0.2, 0.5, 0.8] {
            let l = classify_regime(-1.0, DriftSign::Zero, 0.0, p).unwrap();
            assert!((l.exponent_n.unwrap() - (1.0 - p) / (1.0 + p)).abs() < 1e-14);
            assert!((l.exponent_d.unwrap() - (1.0 - p) / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn critical_exponent_examples() {
        assert!((predicted_exponent_critical(2.0, 0.5, BcKind::Neumann).unwrap() - 0.2).abs() < 1e-15);
        assert!((predicted_exponent_critical(2.0, 0.5, BcKind::Dirichlet).unwrap() - 0.25).abs() < 1e-15);
        for p in [0.1, 0.5, 0.9] {
            let e = predicted_exponent_critical(0.0, p, BcKind::Neumann).unwrap();
            assert!((e - (1.0 - p) / (1.0 + p)).abs() < 1e-15);
        }
        assert!(predicted_exponent_critical(-0.5, 0.5, BcKind::Neumann).is_err());
    }

    #[test]
    fn critical_exponent_matches_laplacian_formula() {
        for d in 2..=10 {
            let mu = (d - 1) as f64;
            for p in [0.25, 0.5, 0.75] {
                let lap = (1.0 - p) / (1.0 + p + mu * (1.0 - p));
                let e = predicted_exponent_critical(mu, p, BcKind::Neumann).unwrap();
                assert!((e - lap).abs() < 1e-15);
                assert_eq!(
                    predicted_exponent_critical(mu, p, BcKind::Dirichlet).unwrap(),
                    (1.0 - p) / 2.0
                );
            }
        }
    }

    #[test]
    fn infer_exponents_from_specs() {
        let op = RadialOperator::power_law(1.0, 1.0, 1, 0.5, 1.0).unwrap();
        let e = infer_exponents(&op, 1e6).unwrap();
        assert!((e.m - 1.0).abs() < 1e-12 && (e.j - 0.5).abs() < 1e-12);
        assert_eq!(e.drift_sign, DriftSign::Outward);

        let op = RadialOperator::constant(1.0, 0.0, 1.0, 1.0).unwrap();
        let r = operator_regime(&op, 0.5, 1e6).unwrap();
        assert_eq!(r.exponents.drift_sign, DriftSign::Zero);
        assert!(r.exponents.j.is_sign_positive(), "j = {}", r.exponents.j);
        assert_eq!(r.label.kind, RegimeKind::PowerLaw);
        assert!((r.predicted_exponent(0.5, BcKind::Neumann).unwrap() - 1.0 / 3.0).abs() < 1e-12);

        let op = RadialOperator::power_law(2.0, -1.0, -1, 0.0, 1.0).unwrap();
        let r = operator_regime(&op, 0.5, 1e6).unwrap();
        assert_eq!(r.critical_mu, Some(2.0));
        assert!((r.predicted_exponent(0.5, BcKind::Neumann).unwrap() - 0.2).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn neumann_branches_agree_at_zero(p in 0.01f64..0.99) {
                let a = (1.0 - p) / ((1.0 - 0.0) * p);
                let b = (1.0 - p) / (p - 0.0);
                prop_assert!((a - b).abs() < 1e-12);
            }

            #[test]
            fn classification_is_total_and_deterministic(
                m in -1.0f64..3.0, j in -3.0f64..1.99, p in 0.01f64..0.99, s in -1i32..=1
            ) {
                let sign = DriftSign::try_from(s).unwrap();
                let a = classify_regime(m, sign, j, p).unwrap();
                let b = classify_regime(m, sign, j, p).unwrap();
                prop_assert_eq!(a, b);
                match a.kind {
                    RegimeKind::PowerLaw => prop_assert!(a.exponent_n.unwrap() > 0.0 && a.exponent_d.unwrap() > 0.0 && a.log_power.is_none()),
                    RegimeKind::LogPower => prop_assert!((a.log_power.unwrap() - 1.0 / (1.0 + m)).abs() < 1e-12),
                    _ => prop_assert!(a.exponent_n.is_none() && a.exponent_d.is_none() && a.log_power.is_none()),
                }
                if m > -1.0 + 1e-6 || sign != DriftSign::Inward {
                    prop_assert!(a.kind != RegimeKind::Unclassified);
                }
            }

            #[test]
            fn dirichlet_critical_independent_of_mu(mu in 0.0f64..50.0, p in 0.01f64..0.99) {
                prop_assert_eq!(predicted_exponent_critical(mu, p, BcKind::Dirichlet).unwrap(), (1.0 - p) / 2.0);
            }
        }
    }
}
