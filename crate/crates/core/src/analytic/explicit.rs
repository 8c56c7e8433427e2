//! Closed-form solutions for constant `A`, `Λ` and no drift.
//!
//! Substituting `u = γ (r* - r)^{2/(1-p)}` into `A u'' = Λ u^p` forces
//! `γ^{1-p} = Λ (1-p)^2 / (2 A (1+p))`; the boundary datum then fixes `r*`.

use serde::{Deserialize, Serialize};

use crate::error::{DeadcoreError, Result};
use crate::operator::{BcKind, BoundaryCondition, RadialOperator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplicitProfile {
    pub bc: BoundaryCondition,
    pub a: f64,
    pub lambda: f64,
    pub p: f64,
    pub r_inner: f64,
    /// Prefactor `γ*` of `(r* - r)^{2/(1-p)}`.
    pub gamma: f64,
    pub r_star: f64,
}

/// `γ*` from the ODE.
pub fn gamma_star(a: f64, lambda: f64, p: f64) -> f64 {
    (lambda * (1.0 - p).powi(2) / (2.0 * a * (1.0 + p))).powf(1.0 / (1.0 - p))
}

/// Neumann free-boundary radius in its fully expanded form.
pub fn r_star_neumann(a: f64, lambda: f64, p: f64, r_inner: f64, h: f64) -> f64 {
    r_inner + (2f64.powf(p) * (1.0 + p) * a / lambda).powf(1.0 / (1.0 + p)) * h.powf((1.0 - p) / (1.0 + p)) / (1.0 - p)
}

/// Dirichlet free-boundary radius in its fully expanded form.
pub fn r_star_dirichlet(a: f64, lambda: f64, p: f64, r_inner: f64, h: f64) -> f64 {
    r_inner + (2.0 * (1.0 + p) * a / lambda).sqrt() * h.powf((1.0 - p) / 2.0) / (1.0 - p)
}

pub fn explicit_profile(bc: BoundaryCondition, a: f64, lambda: f64, p: f64, r_inner: f64) -> Result<ExplicitProfile> {
    if !(p > 0.0 && p < 1.0) {
        return Err(DeadcoreError::Parameter(format!("p must lie in (0, 1), got {p}")));
    }
    if !(a > 0.0 && lambda > 0.0 && a.is_finite() && lambda.is_finite()) {
        return Err(DeadcoreError::Parameter("A and Lambda must be positive".into()));
    }
    if !(r_inner > 0.0 && r_inner.is_finite()) {
        return Err(DeadcoreError::Parameter("R must be positive".into()));
    }
    let gamma = gamma_star(a, lambda, p);
    let l = 2.0 / (1.0 - p);
    let width = match bc.kind {
        // -u'(R) = γ l (r*-R)^{l-1} = h
        BcKind::Neumann => (bc.h / (gamma * l)).powf(1.0 / (l - 1.0)),
        // u(R) = γ (r*-R)^l = h
        BcKind::Dirichlet => (bc.h / gamma).powf(1.0 / l),
    };
    Ok(ExplicitProfile {
        bc,
        a,
        lambda,
        p,
        r_inner,
        gamma,
        r_star: r_inner + width,
    })
}

/// Explicit profile of an operator with constant `A`, `Λ` and `B ≡ 0`.
pub fn explicit_profile_for(op: &RadialOperator, bc: BoundaryCondition, p: f64) -> Result<ExplicitProfile> {
    let a = op.a.constant_value();
    let lambda = op.lambda.constant_value();
    let b = op.b.constant_value();
    match (a, b, lambda) {
        (Some(a), Some(0.0), Some(lambda)) => explicit_profile(bc, a, lambda, p, op.r_inner),
        _ => Err(DeadcoreError::UnsupportedOperator(
            "closed form requires constant A, constant Lambda and B = 0".into(),
        )),
    }
}

impl ExplicitProfile {
    pub fn exponent(&self) -> f64 {
        2.0 / (1.0 - self.p)
    }

    pub fn value(&self, r: f64) -> f64 {
        if r >= self.r_star {
            0.0
        } else {
            self.gamma * (self.r_star - r).powf(self.exponent())
        }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        if r >= self.r_star {
            0.0
        } else {
            let l = self.exponent();
            -self.gamma * l * (self.r_star - r).powf(l - 1.0)
        }
    }

    pub fn second_derivative(&self, r: f64) -> f64 {
        if r >= self.r_star {
            0.0
        } else {
            let l = self.exponent();
            self.gamma * l * (l - 1.0) * (self.r_star - r).powf(l - 2.0)
        }
    }

    pub fn sample(&self, nodes: &[f64]) -> Vec<f64> {
        nodes.iter().map(|&r| self.value(r)).collect()
    }
}
