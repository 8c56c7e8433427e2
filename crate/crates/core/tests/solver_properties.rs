//! Comparison-principle properties of computed minimal solutions.

use deadcore::bvp::{compare_profiles, minimal_solution, solve_truncated, Grid, GridPolicy, SolveConfig};
use deadcore::free_boundary::{bracket_free_boundary, detect_free_boundary, BracketParams};
use deadcore::operator::{BcKind, BoundaryCondition, RadialOperator};
use proptest::prelude::*;

fn cfg() -> SolveConfig {
    SolveConfig {
        n_max: 1e4,
        grid_points: 400,
        ..SolveConfig::default()
    }
}

fn bc_kind() -> impl Strategy<Value = BcKind> {
    prop_oneof![Just(BcKind::Neumann), Just(BcKind::Dirichlet)]
}

/// Constant coefficients with a drift of either sign.
fn constant_op() -> impl Strategy<Value = RadialOperator> {
    (0.5f64..2.0, -1.0f64..1.0, 0.5f64..2.0, 0.5f64..3.0)
        .prop_map(|(a, b, l, r)| RadialOperator::constant(a, b, l, r).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn minimal_solutions_are_nonnegative_and_peak_at_the_boundary(
        op in constant_op(), kind in bc_kind(), p in 0.2f64..0.8, log_h in -1.0f64..3.0,
    ) {
        let h = 10f64.powf(log_h);
        let bc = BoundaryCondition::new(kind, h).unwrap();
        let sol = minimal_solution(&op, bc, p, &cfg()).unwrap();
        let prof = &sol.profile;
        prop_assert!(prof.values.iter().all(|&v| v >= 0.0));
        prop_assert_eq!(prof.argmax(), 0);
        prop_assert_eq!(*prof.values.last().unwrap(), 0.0);
        if kind == BcKind::Dirichlet {
            prop_assert_eq!(prof.values[0], h);
        }
        let tol = 10.0 * cfg().tol_abs * prof.max_value();
        if let Some(prev) = &sol.previous {
            let c = compare_profiles(prev, prof, tol).unwrap();
            prop_assert!(c.a_below_b, "u_n exceeds u_2n by {}", c.max_a_over_b);
        }
        for step in sol.steps.windows(2) {
            prop_assert!(step[1].n > step[0].n);
        }
    }

    #[test]
    fn minimal_solutions_grow_with_the_datum(
        op in constant_op(), kind in bc_kind(), p in 0.2f64..0.8, log_h in -1.0f64..2.5, ratio in 1.2f64..20.0,
    ) {
        let h = 10f64.powf(log_h);
        let a = minimal_solution(&op, BoundaryCondition::new(kind, h).unwrap(), p, &cfg()).unwrap();
        let b = minimal_solution(&op, BoundaryCondition::new(kind, h * ratio).unwrap(), p, &cfg()).unwrap();
        let tol = 10.0 * cfg().tol_abs * b.profile.max_value();
        let c = compare_profiles(&a.profile, &b.profile, tol).unwrap();
        prop_assert!(c.a_below_b, "u_h exceeds u_(h·{ratio}) by {}", c.max_a_over_b);
        if a.converged && b.converged {
            let ra = detect_free_boundary(&a.profile, None).unwrap().best().unwrap();
            let rb = detect_free_boundary(&b.profile, None).unwrap().best().unwrap();
            prop_assert!(rb >= ra * (1.0 - 1e-9), "r*({h}) = {ra} > r*({}) = {rb}", h * ratio);
        }
    }

    #[test]
    fn truncation_radius_orders_solutions_on_a_shared_grid(
        p in 0.2f64..0.8, h in 0.1f64..10.0, kind in bc_kind(),
    ) {
        // Same geometric ratio, so the shorter grid is a prefix of the longer one
        // and both discrete problems share every interior stencil.
        let op = RadialOperator::constant(1.0, 0.0, 1.0, 1.0).unwrap();
        let cfg = cfg();
        let bc = BoundaryCondition::new(kind, h).unwrap();
        let rho = 6f64.powf(1.0 / 400.0);
        let short = Grid::geometric(1.0, rho, 400).unwrap();
        let long = Grid::geometric(1.0, rho, 800).unwrap();
        let a = solve_truncated(&op, bc, p, short.outer(), &short, &cfg).unwrap();
        let b = solve_truncated(&op, bc, p, long.outer(), &long, &cfg).unwrap();
        for (x, y) in a.grid.nodes.iter().zip(&b.grid.nodes) {
            prop_assert_eq!(x, y);
        }
        let c = compare_profiles(&a, &b, 10.0 * cfg.tol_abs * b.max_value()).unwrap();
        prop_assert!(c.a_below_b, "{}", c.max_a_over_b);
    }

    #[test]
    fn calibrated_comparison_functions_sandwich_the_solution(
        kind in bc_kind(), log_h in 0.0f64..3.0, b0 in prop_oneof![Just(0.0), 0.2f64..1.0],
    ) {
        let p = 0.5;
        let op = RadialOperator::constant(1.0, b0, 1.0, 1.0).unwrap();
        let bc = BoundaryCondition::new(kind, 10f64.powf(log_h)).unwrap();
        let params = BracketParams::default();
        let br = bracket_free_boundary(&op, bc, p, &params).unwrap();
        let (lower, upper) = br.comparison_functions(&op, p, &params).unwrap();
        let sol = minimal_solution(&op, bc, p, &SolveConfig { grid_policy: GridPolicy::Geometric, ..cfg() }).unwrap();
        let prof = &sol.profile;
        let scale = prof.max_value();
        for (&r, &u) in prof.grid.nodes.iter().zip(&prof.values) {
            // discretisation error of the solve is O(Δr²) relative to the peak
            let slack = 1e-3 * scale;
            prop_assert!(lower.value(r) <= u + slack, "lower {} > u {} at r = {r}", lower.value(r), u);
            prop_assert!(u <= upper.value(r) + slack, "u {} > upper {} at r = {r}", u, upper.value(r));
        }
        let r = detect_free_boundary(prof, None).unwrap().best().unwrap();
        prop_assert!(br.contains(r, 1e-3), "{r} not in [{}, {}]", br.r_lo, br.r_hi);
    }
}

#[test]
fn uniform_and_graded_policies_agree_with_geometric() {
    let op = RadialOperator::constant(1.0, 0.0, 1.0, 1.0).unwrap();
    let bc = BoundaryCondition::neumann(10.0).unwrap();
    let mut r = Vec::new();
    for policy in [GridPolicy::Geometric, GridPolicy::Uniform, GridPolicy::Graded] {
        let cfg = SolveConfig {
            grid_policy: policy,
            grid_points: 200,
            ..SolveConfig::default()
        };
        let sol = minimal_solution(&op, bc, 0.5, &cfg).unwrap();
        assert!(sol.converged, "{policy:?}: {}", sol.note);
        r.push(detect_free_boundary(&sol.profile, None).unwrap().best().unwrap());
    }
    // independent closed form: 1 + (2^p (1+p))^{1/(1+p)} h^{(1-p)/(1+p)} / (1-p)
    let exact = 1.0 + (2f64.sqrt() * 1.5).powf(1.0 / 1.5) * 10f64.powf(1.0 / 3.0) / 0.5;
    for (k, x) in r.iter().enumerate() {
        assert!((x - exact).abs() < 5e-3 * exact, "policy {k}: {x} vs {exact}");
    }
}
