//! Explicit upper solution `U(r) = γ + (h/F(R)) exp(-∫_R^r F)` for drifts
//! bounded by an iterated exponential `F = exp∘…∘exp` (N times).
//!
//! `U` is an upper solution for the Neumann problem as soon as
//! `(C₂+1) (h/F(R)) F(r)² e^{-∫_R^r F} ≤ γ^p / F(r)` on `[R, ∞)`. All of it is
//! evaluated in log space; `ln F = exp^{(N-1)}` never overflows where `F`
//! itself is representable.

use serde::{Deserialize, Serialize};

use crate::error::{DeadcoreError, Result};
use crate::quadrature::integrate;

/// `exp^{(n)}(x)`.
pub fn iterated_exp(n: u32, x: f64) -> f64 {
    (0..n).fold(x, |acc, _| acc.exp())
}

/// Largest `N` with `exp^{(N)}(r)` finite.
pub fn largest_representable_order(r: f64) -> u32 {
    let mut n = 0;
    let mut v = r;
    loop {
        let next = v.exp();
        if !next.is_finite() || n >= 64 {
            return n;
        }
        v = next;
        n += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceCertificate {
    pub order: u32,
    pub h: f64,
    pub r_inner: f64,
    pub gamma: f64,
    /// Upper bound `C₂` of the diffusion coefficient.
    pub diffusion_bound: f64,
    pub verified: bool,
    /// Smallest `γ` for which the check grid passes.
    pub gamma_threshold: f64,
    /// Check grid and `∫_R^r F` on it.
    pub check_r: Vec<f64>,
    pub check_integral: Vec<f64>,
    /// Largest `ln LHS - ln RHS` seen on the check grid.
    pub worst_log_margin: f64,
}

impl ExistenceCertificate {
    pub fn f_at_r(&self) -> f64 {
        iterated_exp(self.order, self.r_inner)
    }

    /// `U(r)`; past the check grid the exponential term is below `e^{-700}`.
    pub fn value(&self, r: f64) -> f64 {
        let n = self.check_r.len();
        if r <= self.r_inner {
            return self.gamma + self.h / self.f_at_r();
        }
        if r >= self.check_r[n - 1] {
            return self.gamma;
        }
        let j = self.check_r.partition_point(|&x| x <= r).clamp(1, n - 1) - 1;
        let (r0, r1) = (self.check_r[j], self.check_r[j + 1]);
        let i = self.check_integral[j] + (self.check_integral[j + 1] - self.check_integral[j]) * (r - r0) / (r1 - r0);
        self.gamma + self.h / self.f_at_r() * (-i).exp()
    }

    /// `U'(r) = -(h/F(R)) F(r) e^{-∫F}`, exact at `r = R` (`= -h`).
    pub fn derivative(&self, r: f64) -> f64 {
        if r <= self.r_inner {
            return -self.h;
        }
        let u = self.value(r) - self.gamma;
        -u * iterated_exp(self.order, r)
    }
}

/// Build the certificate and check it on a grid fine enough to resolve
/// `e^{-∫F}` (steps of `0.05 / F(r)`), out to where the exponential term is
/// negligible.
pub fn existence_certificate(
    order: u32,
    h: f64,
    r_inner: f64,
    gamma: f64,
    diffusion_bound: f64,
    p: f64,
) -> Result<ExistenceCertificate> {
    if order == 0 {
        return Err(DeadcoreError::Parameter("certificate order N must be >= 1".into()));
    }
    if !(h > 0.0 && gamma > 0.0 && r_inner > 0.0 && diffusion_bound > 0.0) {
        return Err(DeadcoreError::Parameter("h, gamma, R and C2 must be positive".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(DeadcoreError::Parameter(format!("p must lie in (0, 1), got {p}")));
    }
    let largest = largest_representable_order(r_inner);
    let f_r = iterated_exp(order, r_inner);
    if order > largest || !f_r.is_finite() {
        return Err(DeadcoreError::CertificateUnrepresentable {
            requested: order,
            largest,
        });
    }
    let ln_f = |r: f64| iterated_exp(order - 1, r);
    let f = |r: f64| iterated_exp(order, r);
    let base = (diffusion_bound + 1.0).ln() + h.ln() - f_r.ln();

    let mut check_r = vec![r_inner];
    let mut check_integral = vec![0.0];
    // sup over the grid of 3 ln F - ∫F
    let mut sup_term = 3.0 * ln_f(r_inner);
    let mut r = r_inner;
    let mut acc = 0.0;
    const MAX_STEPS: usize = 2_000_000;
    while check_r.len() < MAX_STEPS {
        let fr = f(r);
        if !fr.is_finite() {
            return Err(DeadcoreError::CertificateUnrepresentable {
                requested: order,
                largest: order - 1,
            });
        }
        let next = r + 0.05 / fr;
        let piece = integrate(f, r, next, 0.0, 1e-12)?;
        acc += piece.value;
        r = next;
        check_r.push(r);
        check_integral.push(acc);
        let term = 3.0 * ln_f(r) - acc;
        sup_term = sup_term.max(term);
        // e^{-∫F} has decayed far below anything that matters, and F'/F < F
        // makes 3 ln F - ∫F decreasing from here on.
        if acc > 750.0 && term < sup_term - 50.0 {
            break;
        }
    }
    let gamma_threshold = ((base + sup_term) / p).exp();
    let worst_log_margin = base + sup_term - p * gamma.ln();
    Ok(ExistenceCertificate {
        order,
        h,
        r_inner,
        gamma,
        diffusion_bound,
        verified: worst_log_margin <= 0.0,
        gamma_threshold,
        check_r,
        check_integral,
        worst_log_margin,
    })
}
