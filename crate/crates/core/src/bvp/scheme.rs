//! Exponentially fitted (Scharfetter–Gummel) three-point stencil for
//! `L u = A u'' - B u'`.
//!
//! With frozen coefficients the flux `J = A u' - B u` is exact for
//! `u = e^{B r/A}` across each half cell, which keeps the discrete operator an
//! M-matrix at any Péclet number; for `B = 0` it is the ordinary central
//! difference.

use crate::bvp::grid::Grid;
use crate::error::Result;
use crate::operator::{BcKind, BoundaryCondition, RadialOperator};

/// Bernoulli function `x / (e^x - 1)`.
#[inline]
pub fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        x / x.exp_m1()
    }
}

/// Discrete operator rows. Interior node `i` (1 ≤ i < M):
/// `(L u)_i = lower[i] u_{i-1} + diag[i] u_i + upper[i] u_{i+1}`.
///
/// Row 0 is the Neumann half-cell balance
/// `flux_upper u_1 + flux_diag u_0 + A(R) h = half_cell Λ(R) u_0^p`.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub lambda: Vec<f64>,
    pub flux_upper: f64,
    pub flux_diag: f64,
    pub a_inner: f64,
    pub half_cell: f64,
}

impl Stencil {
    pub fn assemble(op: &RadialOperator, grid: &Grid) -> Result<Self> {
        let r = &grid.nodes;
        let m = r.len();
        let mut lower = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut upper = vec![0.0; m];
        let mut lambda = vec![0.0; m];
        let mut flux_upper = 0.0;
        let mut flux_diag = 0.0;
        let mut a_inner = 0.0;
        for i in 0..m {
            let c = op.evaluate(r[i])?;
            lambda[i] = c.lambda;
            if i == 0 {
                let hp = r[1] - r[0];
                let xp = c.b * hp / c.a;
                flux_upper = c.a / hp * bernoulli(xp);
                flux_diag = -c.a / hp * bernoulli(-xp) + c.b;
                a_inner = c.a;
            } else if i + 1 < m {
                let hp = r[i + 1] - r[i];
                let hm = r[i] - r[i - 1];
                let hbar = 0.5 * (hp + hm);
                let (xp, xm) = (c.b * hp / c.a, c.b * hm / c.a);
                let wp = c.a / hp;
                let wm = c.a / hm;
                upper[i] = wp * bernoulli(xp) / hbar;
                lower[i] = wm * bernoulli(-xm) / hbar;
                diag[i] = -(wp * bernoulli(-xp) + wm * bernoulli(xm)) / hbar;
            }
        }
        Ok(Self {
            lower,
            diag,
            upper,
            lambda,
            flux_upper,
            flux_diag,
            a_inner,
            half_cell: 0.5 * (r[1] - r[0]),
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    #[inline]
    pub fn apply(&self, u: &[f64], i: usize) -> f64 {
        self.lower[i] * u[i - 1] + self.diag[i] * u[i] + self.upper[i] * u[i + 1]
    }

    /// Neumann row defect divided by the half-cell width, so that it is
    /// commensurate with interior `L u - Λ u^p`.
    pub fn neumann_defect(&self, u: &[f64], h: f64, p: f64) -> f64 {
        (self.flux_upper * u[1] + self.flux_diag * u[0] + self.a_inner * h) / self.half_cell
            - self.lambda[0] * u[0].max(0.0).powf(p)
    }

    /// Pointwise defect `(L u)_i - Λ_i u_i^p` at interior nodes, the boundary
    /// defect at node 0, and 0 at the outer node.
    pub fn defects(&self, u: &[f64], bc: BoundaryCondition, p: f64) -> Vec<f64> {
        let m = self.len();
        let mut out = vec![0.0; m];
        out[0] = match bc.kind {
            BcKind::Dirichlet => u[0] - bc.h,
            BcKind::Neumann => self.neumann_defect(u, bc.h, p),
        };
        for i in 1..m - 1 {
            out[i] = self.apply(u, i) - self.lambda[i] * u[i].max(0.0).powf(p);
        }
        out
    }
}

/// Solve a tridiagonal system in place (Thomas algorithm). `lower[0]` and
/// `upper[n-1]` are ignored. Returns `None` on a zero pivot.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv == 0.0 {
        return None;
    }
    c[0] = upper[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i] * c[i - 1];
        if piv == 0.0 || !piv.is_finite() {
            return None;
        }
        c[i] = if i + 1 < n { upper[i] / piv } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / piv;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Some(x)
}
