//! Compactly supported comparison functions `V(r) = θ (c - r)^l f(r)`.
//!
//! Everything is evaluated in log-derivative form (`ln V`, `V'/V`, `V''/V`)
//! because `f` spans hundreds of orders of magnitude for the exponential
//! families.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analytic::auxiliary::AuxiliarySolution;
use crate::error::{DeadcoreError, Result};
use crate::operator::{BcKind, REGIME_EDGE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Upper,
    Lower,
}

/// Exponent ledger of the outward family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutwardFamilyParams {
    pub l: f64,
    pub delta: f64,
    #[serde(rename = "L")]
    pub big_l: f64,
    pub theta: f64,
    pub gamma: f64,
    pub k: f64,
}

impl OutwardFamilyParams {
    pub fn new(role: Role, c: f64, p: f64, m: f64, j: f64, theta: f64, gamma: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(DeadcoreError::Parameter(format!("p must lie in (0, 1), got {p}")));
        }
        if m + j >= 1.0 - REGIME_EDGE_TOL {
            return Err(DeadcoreError::Regime(format!(
                "outward family needs m + j < 1, got {}",
                m + j
            )));
        }
        if m < -1.0 - REGIME_EDGE_TOL {
            return Err(DeadcoreError::Regime(format!("outward family needs m >= -1, got {m}")));
        }
        if !(theta > 0.0 && gamma > 0.0) {
            return Err(DeadcoreError::Parameter("theta and gamma must be positive".into()));
        }
        let big_l = 1.0 - m - j;
        let (l, delta) = match role {
            Role::Upper => (2.0 / (1.0 - p), (1.0 + m + j) / (1.0 - p)),
            Role::Lower => (1.0 / (1.0 - p), (m + j) / (1.0 - p)),
        };
        Ok(Self {
            l,
            delta,
            big_l,
            theta,
            gamma,
            k: c.powf(-big_l),
        })
    }
}

/// The `f` factor.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// `c^{-δ} (γ + r^{-k})`
    Outward { ln_c_delta: f64, gamma: f64, k: f64 },
    /// `exp(2k c^{m+1} - k r^{m+1})`
    InwardLower { k: f64, m: f64, c: f64 },
    /// `γ exp(k c^{m+1}/2 - k r^{m+1})`
    InwardUpper { gamma: f64, k: f64, m: f64, c: f64 },
    /// `g_c(r)` from the auxiliary linear problem.
    Critical(Arc<AuxiliarySolution>),
}

/// `(ln f, f'/f, f''/f)`
type LogTriple = (f64, f64, f64);

impl Factor {
    fn log_triple(&self, r: f64) -> LogTriple {
        match self {
            Factor::Outward { ln_c_delta, gamma, k } => {
                let rk = r.powf(-k);
                let base = gamma + rk;
                (
                    ln_c_delta + base.ln(),
                    -k * rk / r / base,
                    k * (k + 1.0) * rk / (r * r) / base,
                )
            }
            Factor::InwardLower { k, m, c } => {
                let e = m + 1.0;
                let d1 = -k * e * r.powf(*m);
                (
                    2.0 * k * c.powf(e) - k * r.powf(e),
                    d1,
                    d1 * d1 - k * e * m * r.powf(m - 1.0),
                )
            }
            Factor::InwardUpper { gamma, k, m, c } => {
                let e = m + 1.0;
                let d1 = -k * e * r.powf(*m);
                (
                    gamma.ln() + 0.5 * k * c.powf(e) - k * r.powf(e),
                    d1,
                    d1 * d1 - k * e * m * r.powf(m - 1.0),
                )
            }
            Factor::Critical(g) => {
                let v = g.value(r);
                (v.ln(), g.derivative(r) / v, g.second_derivative(r) / v)
            }
        }
    }
}

/// `ln V`, `V'/V`, `V''/V` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDerivatives {
    pub ln_v: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionProfile {
    pub c: f64,
    pub l: f64,
    pub role: Role,
    pub theta: f64,
    pub factor: Factor,
}

impl TestFunctionProfile {
    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    /// Log-derivatives of the `θ = 1` profile; valid for `r < c`.
    pub fn log_derivatives(&self, r: f64) -> LogDerivatives {
        let (lf, f1, f2) = self.factor.log_triple(r);
        let gap = self.c - r;
        let l = self.l;
        LogDerivatives {
            ln_v: l * gap.ln() + lf,
            d1: -l / gap + f1,
            d2: l * (l - 1.0) / (gap * gap) - 2.0 * l / gap * f1 + f2,
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        if r >= self.c {
            return 0.0;
        }
        self.theta * self.log_derivatives(r).ln_v.exp()
    }

    pub fn derivative(&self, r: f64) -> f64 {
        if r >= self.c {
            return 0.0;
        }
        let ld = self.log_derivatives(r);
        self.theta * ld.ln_v.exp() * ld.d1
    }

    pub fn sample(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|&r| self.value(r)).collect()
    }

    /// `ln` of the boundary quantity of the `θ = 1` profile at `R`:
    /// `ln V(R)` (Dirichlet) or `ln(-V'(R))` (Neumann). `None` when
    /// `V'(R) ≥ 0`.
    pub fn ln_boundary_quantity(&self, bc: BcKind, r_inner: f64) -> Option<f64> {
        let ld = self.log_derivatives(r_inner);
        match bc {
            BcKind::Dirichlet => Some(ld.ln_v),
            BcKind::Neumann => (ld.d1 < 0.0).then(|| ld.ln_v + (-ld.d1).ln()),
        }
    }
}

/// `(c - r)^l θ c^{-δ} (γ + r^{-k})` with the role's exponent ledger.
pub fn outward_test_function(
    role: Role,
    c: f64,
    p: f64,
    m: f64,
    j: f64,
    theta: f64,
    gamma: f64,
) -> Result<TestFunctionProfile> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(DeadcoreError::Parameter(format!("cutoff c must be positive, got {c}")));
    }
    let fp = OutwardFamilyParams::new(role, c, p, m, j, theta, gamma)?;
    Ok(TestFunctionProfile {
        c,
        l: fp.l,
        role,
        theta,
        factor: Factor::Outward {
            ln_c_delta: -fp.delta * c.ln(),
            gamma,
            k: fp.k,
        },
    })
}

/// Exponential family for inward drift `m > -1`, with `l = 2/(1-p)`.
pub fn inward_test_function(role: Role, c: f64, p: f64, m: f64, k: f64, gamma: f64) -> Result<TestFunctionProfile> {
    if !(p > 0.0 && p < 1.0) {
        return Err(DeadcoreError::Parameter(format!("p must lie in (0, 1), got {p}")));
    }
    if m <= -1.0 {
        return Err(DeadcoreError::Regime(format!("inward family needs m > -1, got {m}")));
    }
    if !(k > 0.0 && gamma > 0.0 && c > 0.0) {
        return Err(DeadcoreError::Parameter("k, gamma and c must be positive".into()));
    }
    let factor = match role {
        Role::Lower => Factor::InwardLower { k, m, c },
        Role::Upper => Factor::InwardUpper { gamma, k, m, c },
    };
    Ok(TestFunctionProfile {
        c,
        l: 2.0 / (1.0 - p),
        role,
        theta: 1.0,
        factor,
    })
}

/// `(c - r)^{2/(1-p)} g_c(r)` for the critical drift; `c` is taken from `g`.
pub fn critical_test_function(role: Role, g: Arc<AuxiliarySolution>) -> TestFunctionProfile {
    TestFunctionProfile {
        c: g.c,
        l: 2.0 / (1.0 - g.p),
        role,
        theta: 1.0,
        factor: Factor::Critical(g),
    }
}
