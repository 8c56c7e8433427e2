//! End-to-end acceptance suite (custom harness). Prints one PASS/FAIL line
//! per criterion, in order, and exits non-zero if any criterion fails.

use std::time::Instant;

use deadcore::analytic::auxiliary::{g_prime_bracket, solve_g_auxiliary};
use deadcore::analytic::explicit::{r_star_dirichlet, r_star_neumann};
use deadcore::bvp::{build_grid, compare_profiles, minimal_solution, solve_truncated, SolveConfig};
use deadcore::free_boundary::{
    bracket_free_boundary, detect_free_boundary, fit_power_law, geometric_h, profiles_monotone_in_h,
    solve_sweep_points, sweep::fit_sweep, sweep::samples_of, BracketParams, SweepFit, SweepPoint,
};
use deadcore::nonradial::{bracket_radii_nonradial, FieldSpec};
use deadcore::operator::{BcKind, BoundaryCondition, CoefficientSpec, RadialOperator};

const P: f64 = 0.5;

struct Outcome {
    pass: bool,
    detail: String,
}

/// Checks from the comparison-principle criterion, accumulated over the
/// solves of criteria 1–5.
#[derive(Default)]
struct ComparisonLog {
    solves: usize,
    brackets: usize,
    failures: Vec<String>,
}

impl ComparisonLog {
    fn check_points(&mut self, label: &str, op: &RadialOperator, bc: BcKind, points: &[SweepPoint], bracket: bool) {
        let tol = 10.0 * SolveConfig::default().tol_abs;
        for pt in points {
            self.solves += 1;
            let prof = &pt.solution.profile;
            if prof.values.iter().any(|&v| v < 0.0) {
                self.failures.push(format!("{label} h={:e}: negative value", pt.h));
            }
            if prof.argmax() != 0 {
                self.failures
                    .push(format!("{label} h={:e}: argmax at node {}", pt.h, prof.argmax()));
            }
            if let Some(prev) = &pt.solution.previous {
                match compare_profiles(prev, prof, tol * prof.max_value()) {
                    Ok(c) if c.a_below_b => {}
                    Ok(c) => self.failures.push(format!(
                        "{label} h={:e}: not monotone in n (excess {:e})",
                        pt.h, c.max_a_over_b
                    )),
                    Err(e) => self.failures.push(format!("{label} h={:e}: {e}", pt.h)),
                }
            }
            if bracket {
                let r = pt.estimate.and_then(|e| e.best());
                match (
                    r,
                    bracket_free_boundary(
                        op,
                        BoundaryCondition::new(bc, pt.h).unwrap(),
                        P,
                        &BracketParams::default(),
                    ),
                ) {
                    (Some(r), Ok(b)) => {
                        self.brackets += 1;
                        if !b.contains(r, 1e-3) {
                            self.failures.push(format!(
                                "{label} h={:e}: r*={r:.6} outside bracket [{:.6}, {:.6}]",
                                pt.h, b.r_lo, b.r_hi
                            ));
                        }
                    }
                    (_, Err(_)) | (None, _) => {}
                }
            }
        }
        match profiles_monotone_in_h(points, tol) {
            Ok(true) => {}
            Ok(false) => self.failures.push(format!("{label}: profiles not monotone in h")),
            Err(e) => self.failures.push(format!("{label}: {e}")),
        }
    }
}

fn unit_op() -> RadialOperator {
    RadialOperator::constant(1.0, 0.0, 1.0, 1.0).unwrap()
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target.abs()
}

fn criterion_1(log: &mut ComparisonLog) -> Outcome {
    let cfg = SolveConfig::default();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for bc in [BcKind::Neumann, BcKind::Dirichlet] {
        let hs = [10.0, 100.0, 1000.0];
        let points = solve_sweep_points(&unit_op(), bc, P, &hs, &cfg).unwrap();
        for pt in &points {
            let exact = match bc {
                BcKind::Neumann => r_star_neumann(1.0, 1.0, P, 1.0, pt.h),
                BcKind::Dirichlet => r_star_dirichlet(1.0, 1.0, P, 1.0, pt.h),
            };
            let got = pt.estimate.and_then(|e| e.best()).unwrap_or(f64::NAN);
            let err = ((got - exact) / exact).abs();
            worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
            parts.push(format!("{bc} h={:e}: {got:.5} vs {exact:.5}", pt.h));
        }
        log.check_points("c1", &unit_op(), bc, &points, true);
    }
    Outcome {
        pass: worst < 0.01,
        detail: format!("max rel err {worst:.2e} [{}]", parts.join("; ")),
    }
}

#[allow(clippy::too_many_arguments)]
fn sweep_exponent(
    log: &mut ComparisonLog,
    label: &str,
    op: &RadialOperator,
    bc: BcKind,
    p: f64,
    hs: &[f64],
    fit: SweepFit,
    bracket: bool,
) -> deadcore::free_boundary::SweepResult {
    let cfg = SolveConfig::default();
    let points = solve_sweep_points(op, bc, p, hs, &cfg).unwrap();
    if p == P {
        log.check_points(label, op, bc, &points, bracket);
    }
    fit_sweep(bc, p, samples_of(&points), fit).unwrap()
}

fn criterion_2(log: &mut ComparisonLog) -> Outcome {
    let hs = geometric_h(10.0, 1e5, 8).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [0.3, 0.5, 0.7] {
        for bc in [BcKind::Neumann, BcKind::Dirichlet] {
            let target = match bc {
                BcKind::Neumann => (1.0 - p) / (1.0 + p),
                BcKind::Dirichlet => (1.0 - p) / 2.0,
            };
            let r = sweep_exponent(log, "c2", &unit_op(), bc, p, &hs, SweepFit::Power, false);
            let ok = within(r.exponent, target, 0.10) && !r.partial;
            pass &= ok;
            parts.push(format!("p={p} {bc}: {:.4} vs {target:.4}", r.exponent));
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn criterion_3(log: &mut ComparisonLog) -> Outcome {
    let op = RadialOperator::power_law(1.0, 0.0, 1, 0.0, 1.0).unwrap();
    let hs = geometric_h(1e2, 1e6, 9).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (bc, target) in [(BcKind::Neumann, 1.0), (BcKind::Dirichlet, 0.5)] {
        let r = sweep_exponent(log, "c3", &op, bc, P, &hs, SweepFit::Power, true);
        let ok = within(r.exponent, target, 0.10) && !r.partial;
        pass &= ok;
        parts.push(format!("{bc}: {:.4} vs {target} (r2 {:.4})", r.exponent, r.r_squared));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn critical_op(mu: f64) -> RadialOperator {
    RadialOperator::new(
        CoefficientSpec::constant(1.0),
        CoefficientSpec::power(mu, -1.0, -1),
        CoefficientSpec::constant(1.0),
        1.0,
    )
    .unwrap()
}

fn criterion_4(log: &mut ComparisonLog) -> Outcome {
    let hs = geometric_h(1e4, 1e12, 9).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (bc, target) in [(BcKind::Neumann, 0.2), (BcKind::Dirichlet, 0.25)] {
        let r = sweep_exponent(log, "c4", &critical_op(2.0), bc, P, &hs, SweepFit::Power, true);
        let ok = within(r.exponent, target, 0.10) && !r.partial;
        pass &= ok;
        // growth rates of the calibrated analytic bracket over the same range
        let (mut lo, mut hi) = (Vec::new(), Vec::new());
        for &h in &hs {
            if let Ok(b) = bracket_free_boundary(
                &critical_op(2.0),
                BoundaryCondition::new(bc, h).unwrap(),
                P,
                &BracketParams::default(),
            ) {
                lo.push((h, b.r_lo));
                hi.push((h, b.r_hi));
            }
        }
        let slope = |v: &[(f64, f64)]| fit_power_law(v).map_or(f64::NAN, |f| f.exponent);
        parts.push(format!(
            "{bc}: {:.4} vs {target} (r2 {:.4}; bracket ends grow as h^{:.3}, h^{:.3})",
            r.exponent,
            r.r_squared,
            slope(&lo),
            slope(&hi)
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn criterion_5(log: &mut ComparisonLog) -> Outcome {
    let op = RadialOperator::power_law(1.0, 1.0, -1, 0.0, 1.0).unwrap();
    let hs = geometric_h(1e2, 1e8, 7).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for bc in [BcKind::Neumann, BcKind::Dirichlet] {
        let r = sweep_exponent(log, "c5", &op, bc, P, &hs, SweepFit::LogPower { m: 1.0 }, true);
        // r² over the whole range, as stated
        let full = r.full_range.as_ref().map_or(r.r_squared, |f| f.r_squared);
        let ok = full >= 0.99 && !r.partial;
        pass &= ok;
        parts.push(format!("{bc}: r2 {full:.5} slope {:.4}", r.exponent));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn criterion_6() -> Outcome {
    let op = RadialOperator::power_law(1.0, 1.0, 1, 0.5, 1.0).unwrap();
    let cfg = SolveConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [1e2, 1e3, 1e4] {
        let grid = build_grid(1.0, n, &cfg).unwrap();
        let prof = solve_truncated(&op, BoundaryCondition::neumann(1.0).unwrap(), P, n, &grid, &cfg).unwrap();
        let m = prof.values.len();
        let min = prof.values[..m - 1].iter().copied().fold(f64::INFINITY, f64::min);
        pass &= min > 0.0;
        parts.push(format!("n={n:e}: min on [R, n-cell] = {min:.3e}"));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn criterion_7() -> Outcome {
    let op = RadialOperator::power_law(1.0, 0.0, 1, 1.0, 1.0).unwrap();
    let cfg = SolveConfig {
        n_max: 1e4,
        ..SolveConfig::default()
    };
    let small = minimal_solution(&op, BoundaryCondition::neumann(1e-3).unwrap(), P, &cfg).unwrap();
    let small_fb = detect_free_boundary(&small.profile, None).unwrap();
    let large = minimal_solution(&op, BoundaryCondition::neumann(1e3).unwrap(), P, &cfg).unwrap();
    let large_fb = detect_free_boundary(&large.profile, None).unwrap();
    let pass = small.converged && small_fb.detected() && !large.converged && !large_fb.detected();
    Outcome {
        pass,
        detail: format!(
            "h=1e-3: r*={:?} converged={}; h=1e3: r*={:?} n_final={:e}",
            small_fb.best(),
            small.converged,
            large_fb.best(),
            large.n_final
        ),
    }
}

fn criterion_8(log: &ComparisonLog) -> Outcome {
    Outcome {
        pass: log.failures.is_empty() && log.solves > 0,
        detail: format!(
            "{} solves, {} bracket checks, {} failures{}",
            log.solves,
            log.brackets,
            log.failures.len(),
            log.failures
                .iter()
                .take(5)
                .map(|f| format!("; {f}"))
                .collect::<String>()
        ),
    }
}

fn criterion_9() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let hs = geometric_h(1e4, 1e12, 9).unwrap();
    let mut dummy = ComparisonLog::default();
    for (d, bc, target) in [
        (2usize, BcKind::Neumann, 0.25),
        (3, BcKind::Neumann, 0.2),
        (3, BcKind::Dirichlet, 0.25),
    ] {
        let op = critical_op((d - 1) as f64);
        let r = sweep_exponent(&mut dummy, "c9", &op, bc, P, &hs, SweepFit::Power, false);
        let ok = within(r.exponent, target, 0.10);
        pass &= ok;
        parts.push(format!("d={d} {bc}: {:.4} vs {target}", r.exponent));
    }
    // isotropic field: envelope brackets equal the radial solution
    let field = FieldSpec::laplacian(3, 1.0);
    let cfg = SolveConfig::default();
    let h = 1e6;
    let env = bracket_radii_nonradial(&field, P, BcKind::Dirichlet, h, &cfg).unwrap();
    let radial = minimal_solution(&critical_op(2.0), BoundaryCondition::dirichlet(h).unwrap(), P, &cfg).unwrap();
    let rr = detect_free_boundary(&radial.profile, None).unwrap().best().unwrap();
    let lo = env.r_star_minus_bound.unwrap_or(f64::NAN);
    let hi = env.r_star_plus_bound.unwrap_or(f64::NAN);
    let ok = within(lo, rr, 1e-6) && within(hi, rr, 1e-6);
    pass &= ok;
    parts.push(format!("envelope d=3 h=1e6: [{lo:.6}, {hi:.6}] vs radial {rr:.6}"));
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn criterion_10() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for mu in [0.5, 2.0] {
        let mut pts = Vec::new();
        for c in [1e2, 1e3, 1e4] {
            let g = solve_g_auxiliary(c, mu, P, 1.0, 400).unwrap();
            let b = g_prime_bracket(c, mu, P, 1.0).unwrap();
            let d = -g.g_prime_at_r;
            let inside = d >= b.lower * (1.0 - 1e-3) && d <= b.upper * (1.0 + 1e-3);
            pass &= inside;
            parts.push(format!(
                "mu={mu} c={c:e}: -g'(R)={d:.5e} in [{:.5e}, {:.5e}] {}",
                b.lower,
                b.upper,
                if inside { "yes" } else { "NO" }
            ));
            pts.push((c, d));
        }
        let slope = fit_power_law(&pts).unwrap().exponent;
        let ok = within(slope, mu - 1.0, 0.10);
        pass &= ok;
        parts.push(format!("mu={mu}: slope {slope:.4} vs {}", mu - 1.0));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn main() {
    let mut log = ComparisonLog::default();
    let mut failed = Vec::new();
    let mut run = |n: usize, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        println!(
            "criterion {n:>2}: {} ({:.1} s) {}",
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed.push(n);
        }
    };
    run(1, &mut || criterion_1(&mut log));
    run(2, &mut || criterion_2(&mut log));
    run(3, &mut || criterion_3(&mut log));
    run(4, &mut || criterion_4(&mut log));
    run(5, &mut || criterion_5(&mut log));
    run(6, &mut criterion_6);
    run(7, &mut criterion_7);
    run(8, &mut || criterion_8(&log));
    run(9, &mut criterion_9);
    run(10, &mut criterion_10);
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
