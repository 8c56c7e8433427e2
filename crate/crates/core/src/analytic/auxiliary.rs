//! The auxiliary linear problem behind the critical inward drift.
//!
//! `g_c` is the maximal solution of
//! `g'' + (μ/r - 4/((1-p)(c-r))) g' - 2μ/((1-p) r (c-r)) g = 0`, `g(R) = 1`,
//! `g ≤ 1` on `[R, c)`. Multiplying by `r^μ (c-r)^{4/(1-p)}` and integrating
//! from `z` to `c` gives, after `s = z + (c-z)τ`,
//!
//! ```text
//! g'(z) = -κ z^{-μ} ∫₀¹ s^{μ-1} (1-τ)^q g(s) dτ,   κ = 2μ/(1-p),  q = (3+p)/(1-p)
//! ```
//!
//! which has no singular factor left at `z → c`. `v_c` is the same integral
//! with `g ≡ 1`, integrated once more from `R`.
//!
//! Plain Picard iteration of this identity diverges once `κ v_c(c) > 1`
//! (already for moderate `c`), so the discretised linear equation is solved
//! directly instead.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{DeadcoreError, Result};
use crate::quadrature::{gauss_legendre, integrate, Quad};

const INNER_TOL: f64 = 1e-13;
/// Absolute tolerance for the outer `v_c` integral.
pub const V_C_TOL: f64 = 1e-10;

fn check(c: f64, mu: f64, p: f64, r_inner: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(DeadcoreError::Parameter(format!("p must lie in (0, 1), got {p}")));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(DeadcoreError::Parameter(format!("mu must be positive, got {mu}")));
    }
    if !(r_inner > 0.0 && c > r_inner && c.is_finite()) {
        return Err(DeadcoreError::Domain(format!(
            "need 0 < R < c, got R = {r_inner}, c = {c}"
        )));
    }
    Ok(())
}

fn q_exp(p: f64) -> f64 {
    (3.0 + p) / (1.0 - p)
}

fn kappa(mu: f64, p: f64) -> f64 {
    2.0 * mu / (1.0 - p)
}

/// `K(z) = ∫₀¹ (z + (c-z)τ)^{μ-1} (1-τ)^q dτ`.
pub fn inner_kernel(c: f64, mu: f64, p: f64, z: f64) -> Result<f64> {
    let q = q_exp(p);
    let span = c - z;
    if span <= 0.0 {
        return Ok(c.powf(mu - 1.0) / (q + 1.0));
    }
    let f = |t: f64| (z + span * t).powf(mu - 1.0) * (1.0 - t).powf(q);
    // s^{μ-1} changes on the scale τ ~ z/(c-z); split there.
    let knee = (10.0 * z / span).min(1.0);
    let mut total = integrate(f, 0.0, knee, 0.0, INNER_TOL)?.value;
    if knee < 1.0 {
        total += integrate(f, knee, 1.0, 0.0, INNER_TOL)?.value;
    }
    Ok(total)
}

/// `v_c(r) = ∫_R^r z^{-μ} (c-z)^{-4/(1-p)} ∫_z^c s^{μ-1} (c-s)^{(3+p)/(1-p)} ds dz`.
pub fn v_c_integral(c: f64, mu: f64, p: f64, r_inner: f64, r: f64) -> Result<Quad> {
    check(c, mu, p, r_inner)?;
    if !(r >= r_inner && r <= c) {
        return Err(DeadcoreError::Domain(format!("r = {r} outside [R, c]")));
    }
    if r == r_inner {
        return Ok(Quad { value: 0.0, error: 0.0 });
    }
    // Outer integral in t = ln z.
    let failure = std::cell::Cell::new(None);
    let integrand = |t: f64| {
        let z = t.exp();
        match inner_kernel(c, mu, p, z) {
            Ok(k) => z.powf(1.0 - mu) * k,
            Err(e) => {
                failure.set(Some(e.to_string()));
                f64::NAN
            }
        }
    };
    let q = integrate(integrand, r_inner.ln(), r.ln(), V_C_TOL, 1e-12);
    if let Some(msg) = failure.take() {
        return Err(DeadcoreError::numerical(
            format!("inner quadrature failed: {msg}"),
            f64::NAN,
        ));
    }
    q
}

/// `k(y) = ∫₀¹ (y + (1-y)τ)^{μ-1} (1-τ)^q dτ`, the kernel in rescaled variables.
fn rescaled_kernel(mu: f64, p: f64, y: f64) -> Result<f64> {
    inner_kernel(1.0, mu, p, y)
}

/// `v_c(c)` in the rescaled form `∫_{R/c}^1 y^{-μ} k(y) dy`.
pub fn v_c_rescaled(c: f64, mu: f64, p: f64, r_inner: f64) -> Result<f64> {
    check(c, mu, p, r_inner)?;
    let f = |t: f64| {
        let y = t.exp();
        y.powf(1.0 - mu) * rescaled_kernel(mu, p, y).unwrap_or(f64::NAN)
    };
    Ok(integrate(f, (r_inner / c).ln(), 0.0, V_C_TOL, 1e-12)?.value)
}

/// `lim_{c→∞} v_c(c) = ∫₀¹ y^{-μ} k(y) dy`. Finite only for `μ < 1`; for
/// `μ ≥ 1` `v_c(c)` grows without bound (like `ln c` or `c^{μ-1}`).
pub fn v_c_limit(mu: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(DeadcoreError::Parameter(format!("p must lie in (0, 1), got {p}")));
    }
    if !(mu > 0.0 && mu < 1.0) {
        return Err(DeadcoreError::Regime(format!(
            "v_c(c) diverges as c grows when mu >= 1 (mu = {mu})"
        )));
    }
    // y^{-μ} is integrable at 0; substitute y = w^{1/(1-μ)} to remove it.
    let e = 1.0 / (1.0 - mu);
    let f = |w: f64| {
        if w <= 0.0 {
            return e * rescaled_kernel(mu, p, 0.0).unwrap_or(f64::NAN);
        }
        let y = w.powf(e);
        e * rescaled_kernel(mu, p, y).unwrap_or(f64::NAN)
    };
    Ok(integrate(f, 0.0, 1.0, V_C_TOL, 1e-12)?.value)
}

/// Two-sided bounds on `-g_c'(R)`, from `e^{-κ v_c(c)} ≤ g_c ≤ 1`:
/// `κ R^{-μ} K(R) e^{-κ v_c(c)} ≤ -g_c'(R) ≤ κ R^{-μ} K(R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBracket {
    pub lower: f64,
    pub upper: f64,
    pub v_c_at_c: f64,
    pub gamma: f64,
}

pub fn g_prime_bracket(c: f64, mu: f64, p: f64, r_inner: f64) -> Result<DerivativeBracket> {
    check(c, mu, p, r_inner)?;
    let kap = kappa(mu, p);
    let upper = kap * r_inner.powf(-mu) * inner_kernel(c, mu, p, r_inner)?;
    let v = v_c_integral(c, mu, p, r_inner, c)?.value;
    let gamma = (-kap * v).exp();
    Ok(DerivativeBracket {
        lower: upper * gamma,
        upper,
        v_c_at_c: v,
        gamma,
    })
}

/// Discrete `g_c` on a logarithmic grid `R = z_0 < … < z_{N-1} = c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxiliarySolution {
    pub c: f64,
    pub mu: f64,
    pub p: f64,
    pub r_inner: f64,
    pub z: Vec<f64>,
    pub g: Vec<f64>,
    pub g_prime: Vec<f64>,
    pub g_prime_at_r: f64,
    /// Sup-norm defect of the integral identity re-evaluated with adaptive
    /// quadrature at a handful of nodes (NaN when not computed).
    pub identity_defect: f64,
}

impl AuxiliarySolution {
    fn locate(&self, r: f64) -> (usize, f64) {
        let n = self.z.len();
        let j = self.z.partition_point(|&zi| zi <= r).clamp(1, n - 1) - 1;
        let th = ((r - self.z[j]) / (self.z[j + 1] - self.z[j])).clamp(0.0, 1.0);
        (j, th)
    }

    pub fn value(&self, r: f64) -> f64 {
        let (j, th) = self.locate(r);
        self.g[j] * (1.0 - th) + self.g[j + 1] * th
    }

    pub fn derivative(&self, r: f64) -> f64 {
        let (j, th) = self.locate(r);
        self.g_prime[j] * (1.0 - th) + self.g_prime[j + 1] * th
    }

    /// `g''` read off the ODE.
    pub fn second_derivative(&self, r: f64) -> f64 {
        let (c, mu, p) = (self.c, self.mu, self.p);
        let gap = (c - r).max(f64::MIN_POSITIVE);
        let g = self.value(r);
        let gp = self.derivative(r);
        -(mu / r - 4.0 / ((1.0 - p) * gap)) * gp + kappa(mu, p) * g / (r * gap)
    }

    pub fn min_g(&self) -> f64 {
        self.g.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Solve for `g_c` with `grid_points` nodes (≥ 16) and verify the integral
/// identity independently.
pub fn solve_g_auxiliary(c: f64, mu: f64, p: f64, r_inner: f64, grid_points: usize) -> Result<AuxiliarySolution> {
    let mut sol = solve_g_discrete(c, mu, p, r_inner, grid_points)?;
    sol.identity_defect = integral_identity_defect(&sol, 6)?;
    if !(sol.identity_defect < 1e-2) {
        return Err(DeadcoreError::numerical(
            "auxiliary solution fails its integral identity",
            sol.identity_defect,
        ));
    }
    Ok(sol)
}

/// The discrete solve alone, without the independent defect check.
pub fn solve_g_discrete(c: f64, mu: f64, p: f64, r_inner: f64, grid_points: usize) -> Result<AuxiliarySolution> {
    check(c, mu, p, r_inner)?;
    if grid_points < 16 {
        return Err(DeadcoreError::Parameter(
            "auxiliary grid needs at least 16 nodes".into(),
        ));
    }
    let n = grid_points;
    let q = q_exp(p);
    let kap = kappa(mu, p);
    let ln_span = (c / r_inner).ln();
    let mut z: Vec<f64> = (0..n)
        .map(|i| r_inner * (ln_span * i as f64 / (n - 1) as f64).exp())
        .collect();
    z[n - 1] = c;

    let (xg, wg) = gauss_legendre(20);
    const PIECES: usize = 40;

    // P[i, ·]: weights such that ∫₀¹ s^{μ-1}(1-τ)^q g(s) dτ ≈ P[i, ·] · g.
    let mut pmat = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let zi = z[i];
        let span = c - zi;
        if span <= 0.0 {
            pmat[(i, n - 1)] = c.powf(mu - 1.0) / (q + 1.0);
            continue;
        }
        let lo = (zi / c * 1e-4).clamp(1e-14, 1e-10);
        let mut edges = Vec::with_capacity(PIECES + 1);
        edges.push(0.0);
        for k in 0..PIECES {
            edges.push(lo * (1.0 / lo).powf(k as f64 / (PIECES - 1) as f64));
        }
        *edges.last_mut().expect("non-empty") = 1.0;
        for e in edges.windows(2) {
            let (a, b) = (e[0], e[1]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (x, w) in xg.iter().zip(&wg) {
                let t = mid + half * x;
                let s = zi + span * t;
                let weight = half * w * s.powf(mu - 1.0) * (1.0 - t).powf(q);
                let j = z.partition_point(|&zz| zz <= s).clamp(1, n - 1) - 1;
                let th = ((s - z[j]) / (z[j + 1] - z[j])).clamp(0.0, 1.0);
                pmat[(i, j)] += weight * (1.0 - th);
                pmat[(i, j + 1)] += weight * th;
            }
        }
    }
    let d: Vec<f64> = z.iter().map(|&zi| kap * zi.powf(-mu)).collect();

    // g(z_i) = 1 + Σ trapezoid of g' = 1 - Σ ... D P g
    let mut system = DMatrix::<f64>::identity(n, n);
    let mut acc = vec![0.0; n];
    for i in 1..n {
        let half = 0.5 * (z[i] - z[i - 1]);
        for k in 0..n {
            acc[k] += half * (d[i - 1] * pmat[(i - 1, k)] + d[i] * pmat[(i, k)]);
        }
        for k in 0..n {
            system[(i, k)] += acc[k];
        }
    }
    let rhs = DVector::<f64>::from_element(n, 1.0);
    let g = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| DeadcoreError::numerical("auxiliary linear system is singular", f64::NAN))?;
    let pg = &pmat * &g;
    let g_prime: Vec<f64> = (0..n).map(|i| -d[i] * pg[i]).collect();
    let g: Vec<f64> = g.iter().copied().collect();
    if g.iter().any(|v| !v.is_finite()) {
        return Err(DeadcoreError::numerical(
            "auxiliary solve produced non-finite values",
            f64::NAN,
        ));
    }
    Ok(AuxiliarySolution {
        c,
        mu,
        p,
        r_inner,
        g_prime_at_r: g_prime[0],
        z,
        g,
        g_prime,
        identity_defect: f64::NAN,
    })
}

/// `max_i |g(z_i) - 1 - ∫_R^{z_i} g'(z) dz|` where `g'` is recomputed from the
/// interpolated `g` with adaptive quadrature, at `samples` spread-out nodes.
pub fn integral_identity_defect(sol: &AuxiliarySolution, samples: usize) -> Result<f64> {
    let (c, mu, p) = (sol.c, sol.mu, sol.p);
    let q = q_exp(p);
    let kap = kappa(mu, p);
    let g_prime = |z: f64| -> f64 {
        let span = c - z;
        if span <= 0.0 {
            return -kap * c.powf(-mu) * c.powf(mu - 1.0) / (q + 1.0) * sol.value(c);
        }
        let f = |t: f64| {
            let s = z + span * t;
            s.powf(mu - 1.0) * (1.0 - t).powf(q) * sol.value(s)
        };
        let knee = (10.0 * z / span).min(1.0);
        let mut k = integrate(f, 0.0, knee, 0.0, 1e-9).map(|x| x.value).unwrap_or(f64::NAN);
        if knee < 1.0 {
            k += integrate(f, knee, 1.0, 0.0, 1e-9).map(|x| x.value).unwrap_or(f64::NAN);
        }
        -kap * z.powf(-mu) * k
    };
    let n = sol.z.len();
    let mut worst: f64 = 0.0;
    for s in 1..=samples.max(1) {
        let i = (s * (n - 1)) / samples.max(1);
        let zi = sol.z[i];
        let outer = integrate(
            |t: f64| t.exp() * g_prime(t.exp()),
            sol.r_inner.ln(),
            zi.ln(),
            1e-9,
            1e-9,
        )?;
        worst = worst.max((sol.g[i] - 1.0 - outer.value).abs());
    }
    if !worst.is_finite() {
        return Err(DeadcoreError::numerical(
            "identity check produced non-finite values",
            worst,
        ));
    }
    Ok(worst)
}
