//! Monotone iteration on truncated domains `[R, n]` and continuation in `n`.
//!
//! Each sweep solves the linear problem `(L - Λ w_k^{p-1}) w_{k+1} = 0` with the
//! boundary conditions. Started from a discrete upper solution, the iterates
//! decrease monotonically and stay above the solution (the reaction term is
//! lagged as a coefficient, which keeps every sweep an M-matrix solve);
//! the contraction factor is about `1 - p`. A few Newton steps on the positive
//! set polish the result once the sweeps have settled.

use serde::{Deserialize, Serialize};

use crate::analytic::explicit::gamma_star;
use crate::bvp::grid::{Grid, GridPolicy};
use crate::bvp::scheme::{solve_tridiagonal, Stencil};
use crate::error::{DeadcoreError, Result};
use crate::free_boundary::detect::{dead_tail_start_by, DEFAULT_CELL_FRACTION};
use crate::operator::{BcKind, BoundaryCondition, RadialOperator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Sweep stopping tolerance: every node must move by less than
    /// `tol_abs · (w_i + s_i)`, with `s_i` the node's cell scale.
    pub tol_abs: f64,
    pub max_sweeps: usize,
    /// Nodes below `dead_epsilon · s_i` are frozen at zero.
    pub dead_epsilon: f64,
    pub continuation_factor: f64,
    pub n_max: f64,
    /// First truncation radius; defaults to `8 R`.
    pub n_initial: Option<f64>,
    /// Nodes per unit of `ln r` (geometric) or per unit length (uniform).
    pub grid_points: usize,
    pub grid_policy: GridPolicy,
    /// Cell split factor around `r*` for the graded policy.
    pub refine_factor: usize,
    pub newton_polish: bool,
    /// Hard cap on the node count of any single grid.
    pub max_nodes: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tol_abs: 1e-9,
            max_sweeps: 20_000,
            dead_epsilon: 1e-8,
            continuation_factor: 2.0,
            n_max: 1e8,
            n_initial: None,
            grid_points: 1000,
            grid_policy: GridPolicy::Geometric,
            refine_factor: 4,
            newton_polish: true,
            max_nodes: 4_000_000,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(DeadcoreError::Parameter(m.to_string()));
        if !(self.tol_abs > 0.0 && self.tol_abs.is_finite()) {
            return bad("tol_abs must be positive");
        }
        if self.max_sweeps == 0 {
            return bad("max_sweeps must be positive");
        }
        if !(self.dead_epsilon >= 0.0 && self.dead_epsilon < 1.0) {
            return bad("dead_epsilon must lie in [0, 1)");
        }
        if !(self.continuation_factor > 1.0 && self.continuation_factor.is_finite()) {
            return bad("continuation_factor must exceed 1");
        }
        if !(self.n_max > 0.0 && self.n_max.is_finite()) {
            return bad("n_max must be positive and finite");
        }
        if let Some(n0) = self.n_initial {
            if !(n0 > 0.0 && n0.is_finite()) {
                return bad("n_initial must be positive and finite");
            }
        }
        if self.grid_points < 4 || self.grid_points > 1_000_000 {
            return bad("grid_points must lie in [4, 1e6]");
        }
        if self.refine_factor == 0 || self.refine_factor > 64 {
            return bad("refine_factor must lie in [1, 64]");
        }
        if self.max_nodes < 64 {
            return bad("max_nodes must be at least 64");
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: SolveConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionProfile {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub bc: BoundaryCondition,
    pub p: f64,
    /// Sup-norm of the discrete defect on nodes above `dead_epsilon · s_i`.
    pub residual: f64,
    /// `residual` divided by the largest reaction term `Λ u^p`.
    pub relative_residual: f64,
    pub sweeps_used: usize,
    pub newton_steps: usize,
    /// Freezing threshold as a fraction of the cell scale.
    pub dead_epsilon: f64,
    /// `s_i = γ(r_i) Δr_i^{2/(1-p)}`: the size of the local dead-core profile
    /// `γ (r* - r)^{2/(1-p)}` one cell away from its free boundary, with
    /// `γ` from the local `A` and `Λ`. It does not depend on `h`.
    #[serde(default)]
    pub cell_scale: Vec<f64>,
}

impl SolutionProfile {
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Linear interpolation; zero beyond the outer radius.
    pub fn value_at(&self, r: f64) -> f64 {
        let x = &self.grid.nodes;
        if r <= x[0] {
            return self.values[0];
        }
        if r >= self.grid.outer() {
            return 0.0;
        }
        let j = x.partition_point(|&v| v <= r) - 1;
        let t = (r - x[j]) / (x[j + 1] - x[j]);
        self.values[j] * (1.0 - t) + self.values[j + 1] * t
    }
}

/// Cell scales `γ(r_i) Δr_i^{2/(1-p)}`, `Δr_i` the mean of the adjacent cells.
pub fn cell_scales(op: &RadialOperator, grid: &Grid, p: f64) -> Result<Vec<f64>> {
    let x = &grid.nodes;
    let m = x.len();
    let e = 2.0 / (1.0 - p);
    (0..m)
        .map(|i| {
            let c = op.evaluate(x[i])?;
            let dr = 0.5 * (x[(i + 1).min(m - 1)] - x[i.saturating_sub(1)]);
            Ok(gamma_star(c.a, c.lambda, p) * dr.powf(e))
        })
        .collect()
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(DeadcoreError::Parameter(format!("p must lie in (0, 1), got {p}")))
    }
}

/// Grid on `[R, n]` according to the configured policy (`Graded` builds its
/// geometric base grid here).
pub fn build_grid(r_inner: f64, n: f64, cfg: &SolveConfig) -> Result<Grid> {
    if !(n > r_inner) {
        return Err(DeadcoreError::Domain(format!(
            "truncation radius {n} must exceed R = {r_inner}"
        )));
    }
    match cfg.grid_policy {
        GridPolicy::Uniform => {
            let cells = ((n - r_inner) * cfg.grid_points as f64).ceil().max(16.0);
            if cells > cfg.max_nodes as f64 {
                return Err(DeadcoreError::Parameter(format!(
                    "uniform grid on [{r_inner}, {n}] needs {cells} cells (max_nodes = {})",
                    cfg.max_nodes
                )));
            }
            Grid::uniform(r_inner, n, cells as usize)
        }
        GridPolicy::Geometric | GridPolicy::Graded => {
            let cells = ((n / r_inner).ln() * cfg.grid_points as f64).ceil().max(16.0);
            if cells > cfg.max_nodes as f64 {
                return Err(DeadcoreError::Parameter(format!(
                    "geometric grid on [{r_inner}, {n}] needs {cells} cells (max_nodes = {})",
                    cfg.max_nodes
                )));
            }
            let rho = ((n / r_inner).ln() / cells).exp();
            let mut g = Grid::geometric(r_inner, rho, cells as usize)?;
            *g.nodes.last_mut().expect("non-empty") = n;
            Ok(g)
        }
    }
}

/// Grid whose outer node is the first lattice node at or beyond `target`.
/// Lattice grids for different targets are nested, so successive
/// continuation profiles share their nodes.
fn continuation_grid(r_inner: f64, target: f64, cfg: &SolveConfig) -> Result<Grid> {
    let gp = cfg.grid_points as f64;
    let cells = match cfg.grid_policy {
        GridPolicy::Uniform => ((target - r_inner) * gp).ceil().max(16.0),
        GridPolicy::Geometric | GridPolicy::Graded => ((target / r_inner).ln() * gp).ceil().max(16.0),
    };
    if cells > cfg.max_nodes as f64 {
        return Err(DeadcoreError::Parameter(format!(
            "continuation grid up to n = {target:.6e} needs {cells} cells (max_nodes = {})",
            cfg.max_nodes
        )));
    }
    let cells = cells as usize;
    match cfg.grid_policy {
        GridPolicy::Uniform => Grid::uniform(r_inner, r_inner + cells as f64 / gp, cells),
        GridPolicy::Geometric | GridPolicy::Graded => Grid::geometric(r_inner, (1.0 / gp).exp(), cells),
    }
}

/// A discrete upper solution to start the sweeps from.
fn initial_upper(stencil: &Stencil, grid: &Grid, bc: BoundaryCondition, p: f64) -> Vec<f64> {
    let m = grid.len();
    match bc.kind {
        BcKind::Dirichlet => {
            let mut w = vec![bc.h; m];
            w[m - 1] = 0.0;
            w
        }
        BcKind::Neumann => {
            // U = γ + (h/F) e^{-F (r - R)}: slope -h at R, then flat.
            let r0 = grid.inner();
            let f = 1.0 / r0;
            let phi: Vec<f64> = grid.nodes.iter().map(|&r| bc.h / f * (-f * (r - r0)).exp()).collect();
            let lphi: Vec<f64> = (0..m)
                .map(|i| {
                    if i == 0 || i + 1 == m {
                        0.0
                    } else {
                        stencil.apply(&phi, i)
                    }
                })
                .collect();
            let row0 = stencil.flux_upper * phi[1] + stencil.flux_diag * phi[0] + stencil.a_inner * bc.h;
            let mut gamma = (bc.h / f * 1e-3).max(1e-300);
            for _ in 0..4000 {
                // γ enters row 0 through (flux_upper + flux_diag) γ = B(R) γ.
                let ok_row0 = row0 + (stencil.flux_upper + stencil.flux_diag) * gamma
                    <= stencil.half_cell * stencil.lambda[0] * (gamma + phi[0]).powf(p);
                let ok_interior = (1..m - 1).all(|i| lphi[i] <= stencil.lambda[i] * (gamma + phi[i]).powf(p));
                if ok_row0 && ok_interior {
                    break;
                }
                gamma *= 2.0;
            }
            let mut w: Vec<f64> = phi.iter().map(|v| gamma + v).collect();
            w[m - 1] = 0.0;
            w
        }
    }
}

struct Sweeps {
    values: Vec<f64>,
    sweeps: usize,
    newton: usize,
}

fn sup_defect(stencil: &Stencil, u: &[f64], bc: BoundaryCondition, p: f64, dead: &[f64]) -> (f64, f64) {
    let d = stencil.defects(u, bc, p);
    let m = u.len();
    let mut res: f64 = match bc.kind {
        BcKind::Dirichlet => d[0].abs(),
        BcKind::Neumann if u[0] > dead[0] => d[0].abs(),
        BcKind::Neumann => 0.0,
    };
    let mut scale: f64 = stencil.lambda[0] * u[0].max(0.0).powf(p);
    for i in 1..m - 1 {
        if u[i] > dead[i] {
            res = res.max(d[i].abs());
            scale = scale.max(stencil.lambda[i] * u[i].powf(p));
        }
    }
    (res, scale)
}

fn iterate(
    stencil: &Stencil,
    grid: &Grid,
    bc: BoundaryCondition,
    p: f64,
    cfg: &SolveConfig,
    cell: &[f64],
) -> Result<Sweeps> {
    let m = grid.len();
    let dead: Vec<f64> = cell.iter().map(|s| cfg.dead_epsilon * s).collect();
    let mut w = initial_upper(stencil, grid, bc, p);
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        match bc.kind {
            BcKind::Dirichlet => {
                diag[0] = 1.0;
                upper[0] = 0.0;
                rhs[0] = bc.h;
            }
            BcKind::Neumann => {
                let w0 = w[0].max(f64::MIN_POSITIVE);
                diag[0] = stencil.flux_diag - stencil.half_cell * stencil.lambda[0] * w0.powf(p - 1.0);
                upper[0] = stencil.flux_upper;
                rhs[0] = -stencil.a_inner * bc.h;
            }
        }
        for i in 1..m - 1 {
            if w[i] <= dead[i] {
                lower[i] = 0.0;
                diag[i] = 1.0;
                upper[i] = 0.0;
            } else {
                lower[i] = stencil.lower[i];
                diag[i] = stencil.diag[i] - stencil.lambda[i] * w[i].powf(p - 1.0);
                upper[i] = stencil.upper[i];
            }
            rhs[i] = 0.0;
        }
        lower[m - 1] = 0.0;
        diag[m - 1] = 1.0;
        rhs[m - 1] = 0.0;
        let mut next = solve_tridiagonal(&lower, &diag, &upper, &rhs)
            .ok_or_else(|| DeadcoreError::numerical("singular sweep matrix", f64::NAN))?;
        let mut settled = true;
        for ((n, o), s) in next.iter_mut().zip(&w).zip(cell) {
            if !n.is_finite() {
                return Err(DeadcoreError::numerical("non-finite iterate", f64::NAN));
            }
            *n = n.max(0.0);
            settled &= (*n - o).abs() <= cfg.tol_abs * (*n + s);
        }
        w = next;
        if settled {
            converged = true;
            break;
        }
    }
    if !converged {
        let (res, _) = sup_defect(stencil, &w, bc, p, &dead);
        return Err(DeadcoreError::numerical(
            format!("monotone iteration did not settle within {} sweeps", cfg.max_sweeps),
            res,
        ));
    }

    let mut newton = 0;
    if cfg.newton_polish {
        let (mut res, _) = sup_defect(stencil, &w, bc, p, &dead);
        for _ in 0..12 {
            let d = stencil.defects(&w, bc, p);
            match bc.kind {
                BcKind::Dirichlet => {
                    diag[0] = 1.0;
                    upper[0] = 0.0;
                    rhs[0] = 0.0;
                }
                BcKind::Neumann => {
                    let w0 = w[0].max(f64::MIN_POSITIVE);
                    diag[0] = stencil.flux_diag - stencil.half_cell * p * stencil.lambda[0] * w0.powf(p - 1.0);
                    upper[0] = stencil.flux_upper;
                    rhs[0] = -d[0] * stencil.half_cell;
                }
            }
            for i in 1..m - 1 {
                if w[i] <= dead[i] {
                    lower[i] = 0.0;
                    diag[i] = 1.0;
                    upper[i] = 0.0;
                    rhs[i] = 0.0;
                } else {
                    lower[i] = stencil.lower[i];
                    diag[i] = stencil.diag[i] - p * stencil.lambda[i] * w[i].powf(p - 1.0);
                    upper[i] = stencil.upper[i];
                    rhs[i] = -d[i];
                }
            }
            lower[m - 1] = 0.0;
            diag[m - 1] = 1.0;
            rhs[m - 1] = 0.0;
            let Some(step) = solve_tridiagonal(&lower, &diag, &upper, &rhs) else {
                break;
            };
            let cand: Vec<f64> = w.iter().zip(&step).map(|(a, b)| (a + b).max(0.0)).collect();
            if cand.iter().any(|v| !v.is_finite()) {
                break;
            }
            let (cres, _) = sup_defect(stencil, &cand, bc, p, &dead);
            if !(cres < res) {
                break;
            }
            let small = step
                .iter()
                .zip(&cand)
                .zip(cell)
                .all(|((d, c), s)| d.abs() <= 1e-3 * cfg.tol_abs * (c + s));
            w = cand;
            res = cres;
            newton += 1;
            if small {
                break;
            }
        }
    }
    Ok(Sweeps {
        values: w,
        sweeps,
        newton,
    })
}

/// Discrete solution of `L u = Λ u^p` on `grid = [R, n]` with `u(n) = 0`.
pub fn solve_truncated(
    op: &RadialOperator,
    bc: BoundaryCondition,
    p: f64,
    n: f64,
    grid: &Grid,
    cfg: &SolveConfig,
) -> Result<SolutionProfile> {
    check_p(p)?;
    cfg.validate()?;
    if !(n > op.r_inner) {
        return Err(DeadcoreError::Domain(format!(
            "truncation radius {n} must exceed R = {}",
            op.r_inner
        )));
    }
    if (grid.inner() - op.r_inner).abs() > 1e-12 * op.r_inner || (grid.outer() - n).abs() > 1e-12 * n {
        return Err(DeadcoreError::Domain(format!(
            "grid spans [{}, {}] but the problem is posed on [{}, {n}]",
            grid.inner(),
            grid.outer(),
            op.r_inner
        )));
    }
    let stencil = Stencil::assemble(op, grid)?;
    let cell = cell_scales(op, grid, p)?;
    let out = iterate(&stencil, grid, bc, p, cfg, &cell)?;
    let dead: Vec<f64> = cell.iter().map(|s| cfg.dead_epsilon * s).collect();
    let (residual, scale) = sup_defect(&stencil, &out.values, bc, p, &dead);
    Ok(SolutionProfile {
        grid: grid.clone(),
        values: out.values,
        bc,
        p,
        residual,
        relative_residual: if scale > 0.0 { residual / scale } else { residual },
        sweeps_used: out.sweeps,
        newton_steps: out.newton,
        dead_epsilon: cfg.dead_epsilon,
        cell_scale: cell,
    })
}

/// Sup-norm of the discrete defect over nodes above the profile's freezing
/// threshold, including the boundary row (Dirichlet: `|u(R) - h|`).
pub fn residual_norm(profile: &SolutionProfile, op: &RadialOperator, p: f64) -> Result<f64> {
    check_p(p)?;
    let stencil = Stencil::assemble(op, &profile.grid)?;
    let cell = cell_scales(op, &profile.grid, p)?;
    let dead: Vec<f64> = cell.iter().map(|s| profile.dead_epsilon * s).collect();
    Ok(sup_defect(&stencil, &profile.values, profile.bc, p, &dead).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationStep {
    pub n: f64,
    pub nodes: usize,
    pub r_star: Option<f64>,
    pub sweeps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalSolution {
    pub profile: SolutionProfile,
    /// A dead zone of at least 10% of `n` appeared and stopped moving.
    pub converged: bool,
    pub n_final: f64,
    /// Profile of the preceding continuation step (on a nested grid).
    pub previous: Option<SolutionProfile>,
    pub steps: Vec<ContinuationStep>,
    pub note: String,
}

fn next_targets(r_inner: f64, n0: f64, factor: f64, n_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = n0.max(r_inner * (1.0 + 1e-6));
    loop {
        if t >= n_max {
            out.push(n_max.max(t.min(n_max)));
            break;
        }
        out.push(t);
        t = r_inner + (t - r_inner) * factor;
        if out.len() > 200 {
            break;
        }
    }
    out
}

/// Minimal solution as the limit of truncated solutions, doubling `n` until
/// the dead zone stabilises or `n_max` is passed.
pub fn minimal_solution(
    op: &RadialOperator,
    bc: BoundaryCondition,
    p: f64,
    cfg: &SolveConfig,
) -> Result<MinimalSolution> {
    check_p(p)?;
    cfg.validate()?;
    let r_inner = op.r_inner;
    let n0 = cfg.n_initial.unwrap_or(8.0 * r_inner);
    if !(n0 > r_inner) {
        return Err(DeadcoreError::Domain(format!(
            "n_initial = {n0} must exceed R = {r_inner}"
        )));
    }
    let n_max = cfg.n_max.max(n0);
    let mut steps = Vec::new();
    let mut previous: Option<SolutionProfile> = None;
    let mut last_r: Option<f64> = None;
    let mut converged = false;
    let mut current: Option<SolutionProfile> = None;
    let mut last_n = n0;
    for target in next_targets(r_inner, n0, cfg.continuation_factor, n_max) {
        let grid = continuation_grid(r_inner, target, cfg)?;
        let n = grid.outer();
        let profile = solve_truncated(op, bc, p, n, &grid, cfg)?;
        let r_star = dead_tail_start_by(&profile.values, |i| DEFAULT_CELL_FRACTION * profile.cell_scale[i])
            .map(|i| grid.nodes[i]);
        steps.push(ContinuationStep {
            n,
            nodes: grid.len(),
            r_star,
            sweeps: profile.sweeps_used,
        });
        let stable = match (r_star, last_r) {
            (Some(a), Some(b)) => n - a >= 0.1 * n && (a - b).abs() <= grid.cell_width_at(a) * (1.0 + 1e-9),
            _ => false,
        };
        last_r = r_star;
        last_n = n;
        if let Some(prev) = current.take() {
            previous = Some(prev);
        }
        current = Some(profile);
        if stable {
            converged = true;
            break;
        }
    }
    let mut profile = current.expect("at least one continuation step");
    if converged && cfg.grid_policy == GridPolicy::Graded {
        if let Some(rs) = last_r {
            let graded = profile.grid.graded(0.8 * rs, 1.2 * rs, cfg.refine_factor)?;
            profile = solve_truncated(op, bc, p, last_n, &graded, cfg)?;
        }
    }
    let note = if converged {
        format!("dead zone stabilised at n = {last_n:.6e}")
    } else {
        format!("no free boundary up to n_max = {n_max:.6e}")
    };
    Ok(MinimalSolution {
        profile,
        converged,
        n_final: last_n,
        previous,
        steps,
        note,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    ABelowB,
    BBelowA,
    /// Both orderings hold within tolerance.
    Equal,
    Crossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub a_below_b: bool,
    pub b_below_a: bool,
    pub crossing: bool,
    /// `max(a - b)` (positive when `a ≤ b` is violated).
    pub max_a_over_b: f64,
    pub max_b_over_a: f64,
}

impl ComparisonReport {
    pub fn ordering(&self) -> Ordering {
        match (self.a_below_b, self.b_below_a) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::ABelowB,
            (false, true) => Ordering::BBelowA,
            (false, false) => Ordering::Crossing,
        }
    }
}

/// Pointwise ordering of two nonnegative profiles sampled at `nodes_a` and
/// `nodes_b` (each extended by zero past its outer node). Comparison happens
/// at the nodes of both grids.
pub fn compare_samples(
    nodes_a: &[f64],
    values_a: &[f64],
    nodes_b: &[f64],
    values_b: &[f64],
    tol: f64,
) -> Result<ComparisonReport> {
    if nodes_a.is_empty() || nodes_b.is_empty() || nodes_a.len() != values_a.len() || nodes_b.len() != values_b.len() {
        return Err(DeadcoreError::Incompatible("empty or mismatched samples".into()));
    }
    if (nodes_a[0] - nodes_b[0]).abs() > 1e-12 * nodes_a[0].abs().max(1.0) {
        return Err(DeadcoreError::Incompatible(format!(
            "profiles start at different radii ({} vs {})",
            nodes_a[0], nodes_b[0]
        )));
    }
    let interp = |x: &[f64], v: &[f64], r: f64| -> f64 {
        if r >= *x.last().expect("non-empty") {
            return if r == *x.last().expect("non-empty") {
                v[v.len() - 1]
            } else {
                0.0
            };
        }
        let j = x.partition_point(|&t| t <= r).max(1) - 1;
        let t = (r - x[j]) / (x[j + 1] - x[j]);
        v[j] * (1.0 - t) + v[j + 1] * t
    };
    let mut max_ab = f64::NEG_INFINITY;
    let mut max_ba = f64::NEG_INFINITY;
    for (&r, &va) in nodes_a.iter().zip(values_a) {
        let vb = interp(nodes_b, values_b, r);
        max_ab = max_ab.max(va - vb);
        max_ba = max_ba.max(vb - va);
    }
    for (&r, &vb) in nodes_b.iter().zip(values_b) {
        let va = interp(nodes_a, values_a, r);
        max_ab = max_ab.max(va - vb);
        max_ba = max_ba.max(vb - va);
    }
    let a_below_b = max_ab <= tol;
    let b_below_a = max_ba <= tol;
    Ok(ComparisonReport {
        a_below_b,
        b_below_a,
        crossing: !a_below_b && !b_below_a,
        max_a_over_b: max_ab,
        max_b_over_a: max_ba,
    })
}

pub fn compare_profiles(a: &SolutionProfile, b: &SolutionProfile, tol: f64) -> Result<ComparisonReport> {
    compare_samples(&a.grid.nodes, &a.values, &b.grid.nodes, &b.values, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::explicit::explicit_profile;

    fn unit_op() -> RadialOperator {
        RadialOperator::constant(1.0, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn config_json_round_trip_and_validation() {
        let cfg = SolveConfig::from_json_str(r#"{"tol_abs": 1e-8, "grid_policy": "uniform"}"#).unwrap();
        assert_eq!(cfg.tol_abs, 1e-8);
        assert_eq!(cfg.grid_policy, GridPolicy::Uniform);
        assert_eq!(cfg.max_sweeps, SolveConfig::default().max_sweeps);
        assert!(SolveConfig::from_json_str(r#"{"tol_abs": -1}"#).is_err());
        assert!(SolveConfig::from_json_str(r#"{"continuation_factor": 1.0}"#).is_err());
        assert!(SolveConfig::from_json_str(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn dirichlet_boundary_value_is_exact() {
        let op = RadialOperator::power_law(1.0, 0.0, 1, 0.0, 1.0).unwrap();
        let cfg = SolveConfig::default();
        let grid = build_grid(1.0, 20.0, &cfg).unwrap();
        let prof = solve_truncated(&op, BoundaryCondition::dirichlet(2.5).unwrap(), 0.5, 20.0, &grid, &cfg).unwrap();
        assert_eq!(prof.values[0], 2.5);
        assert_eq!(*prof.values.last().unwrap(), 0.0);
        assert!(prof.values.iter().all(|&v| v >= 0.0));
        assert_eq!(prof.argmax(), 0);
    }

    #[test]
    fn matches_explicit_dirichlet_profile() {
        let cfg = SolveConfig {
            grid_policy: GridPolicy::Uniform,
            grid_points: 400,
            ..SolveConfig::default()
        };
        let grid = build_grid(1.0, 8.0, &cfg).unwrap();
        let bc = BoundaryCondition::dirichlet(1.0).unwrap();
        let prof = solve_truncated(&unit_op(), bc, 0.5, 8.0, &grid, &cfg).unwrap();
        let e = explicit_profile(bc, 1.0, 1.0, 0.5, 1.0).unwrap();
        let err = grid
            .nodes
            .iter()
            .zip(&prof.values)
            .map(|(&r, &v)| (v - e.value(r)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "sup error {err}");
        assert!(prof.relative_residual < 1e-8, "{}", prof.relative_residual);
    }

    #[test]
    fn neumann_slope_at_boundary() {
        let cfg = SolveConfig {
            grid_policy: GridPolicy::Uniform,
            grid_points: 400,
            ..SolveConfig::default()
        };
        let grid = build_grid(1.0, 8.0, &cfg).unwrap();
        let bc = BoundaryCondition::neumann(1.0).unwrap();
        let prof = solve_truncated(&unit_op(), bc, 0.5, 8.0, &grid, &cfg).unwrap();
        let e = explicit_profile(bc, 1.0, 1.0, 0.5, 1.0).unwrap();
        // second-order one-sided difference
        let hh = grid.nodes[1] - grid.nodes[0];
        let d = (-3.0 * prof.values[0] + 4.0 * prof.values[1] - prof.values[2]) / (2.0 * hh);
        assert!((d + 1.0).abs() < 1e-3, "slope {d}");
        assert!((prof.values[0] - e.value(1.0)).abs() < 1e-3 * e.value(1.0));
    }

    #[test]
    fn grid_convergence_is_second_order() {
        let bc = BoundaryCondition::dirichlet(1.0).unwrap();
        let e = explicit_profile(bc, 1.0, 1.0, 0.5, 1.0).unwrap();
        let mut errs = Vec::new();
        for pts in [20, 40, 80] {
            let cfg = SolveConfig {
                grid_policy: GridPolicy::Uniform,
                grid_points: pts,
                ..SolveConfig::default()
            };
            let grid = build_grid(1.0, 8.0, &cfg).unwrap();
            let prof = solve_truncated(&unit_op(), bc, 0.5, 8.0, &grid, &cfg).unwrap();
            let err = grid
                .nodes
                .iter()
                .zip(&prof.values)
                .map(|(&r, &v)| (v - e.value(r)).abs())
                .fold(0.0, f64::max);
            errs.push(err);
        }
        assert!(errs[0] / errs[1] >= 3.5 && errs[1] / errs[2] >= 3.5, "{errs:?}");
    }

    #[test]
    fn minimal_solution_constant_coefficients() {
        let cfg = SolveConfig::default();
        let bc = BoundaryCondition::neumann(1.0).unwrap();
        let sol = minimal_solution(&unit_op(), bc, 0.5, &cfg).unwrap();
        assert!(sol.converged, "{}", sol.note);
        let r = sol.steps.last().unwrap().r_star.unwrap();
        assert!((r - 4.3019).abs() < 0.05 * 4.3019, "r* = {r}");
        let prev = sol.previous.as_ref().unwrap();
        let cmp = compare_profiles(prev, &sol.profile, 10.0 * cfg.tol_abs * sol.profile.max_value()).unwrap();
        assert!(cmp.a_below_b, "{cmp:?}");
    }

    #[test]
    fn residual_flags_zero_profile() {
        let cfg = SolveConfig::default();
        let grid = build_grid(1.0, 4.0, &cfg).unwrap();
        let prof = SolutionProfile {
            values: vec![0.0; grid.len()],
            grid,
            bc: BoundaryCondition::dirichlet(3.0).unwrap(),
            p: 0.5,
            residual: 0.0,
            relative_residual: 0.0,
            sweeps_used: 0,
            newton_steps: 0,
            dead_epsilon: 0.0,
            cell_scale: Vec::new(),
        };
        assert_eq!(residual_norm(&prof, &unit_op(), 0.5).unwrap(), 3.0);
    }

    #[test]
    fn compare_is_reflexive_and_detects_order() {
        let x = vec![1.0, 2.0, 3.0];
        let a = vec![3.0, 1.0, 0.0];
        let b = vec![4.0, 2.0, 0.0];
        let r = compare_samples(&x, &a, &x, &a, 0.0).unwrap();
        assert_eq!(r.ordering(), Ordering::Equal);
        let r = compare_samples(&x, &a, &x, &b, 0.0).unwrap();
        assert_eq!(r.ordering(), Ordering::ABelowB);
        assert!(compare_samples(&x, &a, &[1.5, 2.0, 3.0], &a, 0.0).is_err());
    }

    #[test]
    fn domain_errors() {
        let cfg = SolveConfig::default();
        let grid = build_grid(1.0, 4.0, &cfg).unwrap();
        let bc = BoundaryCondition::dirichlet(1.0).unwrap();
        assert!(matches!(
            solve_truncated(&unit_op(), bc, 0.5, 0.5, &grid, &cfg),
            Err(DeadcoreError::Domain(_))
        ));
        assert!(solve_truncated(&unit_op(), bc, 1.5, 4.0, &grid, &cfg).is_err());
    }
}
