use deadcore::bvp::{minimal_solution, SolveConfig};
use deadcore::free_boundary::{
    detect_free_boundary, fit_power_law, geometric_h, local_exponent, profiles_monotone_in_h, solve_sweep_points,
    sweep_h, SweepFit,
};
use deadcore::operator::{BcKind, BoundaryCondition, RadialOperator};
use proptest::prelude::*;

fn cfg() -> SolveConfig {
    SolveConfig {
        n_max: 1e4,
        grid_points: 400,
        ..SolveConfig::default()
    }
}

fn unit_op() -> RadialOperator {
    RadialOperator::constant(1.0, 0.0, 1.0, 1.0).unwrap()
}

/// `(Λ(1-p)² / (2A(1+p)))^{1/(1-p)}`, written out independently of the crate.
fn gamma(a: f64, lambda: f64, p: f64) -> f64 {
    (lambda * (1.0 - p).powi(2) / (2.0 * a * (1.0 + p))).powf(1.0 / (1.0 - p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn larger_thresholds_never_move_the_free_boundary_outward(
        p in 0.2f64..0.8, log_h in 0.0f64..3.0, e1 in -12.0f64..-6.0, de in 0.0f64..4.0,
    ) {
        let sol = minimal_solution(&unit_op(), BoundaryCondition::neumann(10f64.powf(log_h)).unwrap(), p, &cfg()).unwrap();
        let top = sol.profile.max_value();
        let lo = detect_free_boundary(&sol.profile, Some(10f64.powf(e1) * top)).unwrap();
        let hi = detect_free_boundary(&sol.profile, Some(10f64.powf(e1 + de) * top)).unwrap();
        if let (Some(a), Some(b)) = (lo.r_star, hi.r_star) {
            prop_assert!(b <= a, "r*(eps) = {a} < r*(larger eps) = {b}");
        }
        prop_assert!(hi.detected() || !lo.detected());
    }

    #[test]
    fn profile_vanishes_with_the_expected_local_exponent(
        p in 0.2f64..0.7, log_h in 0.0f64..2.0, kind in prop_oneof![Just(BcKind::Neumann), Just(BcKind::Dirichlet)],
    ) {
        let bc = BoundaryCondition::new(kind, 10f64.powf(log_h)).unwrap();
        let sol = minimal_solution(&unit_op(), bc, p, &cfg()).unwrap();
        prop_assert!(sol.converged);
        let r = detect_free_boundary(&sol.profile, None).unwrap().best().unwrap();
        let e = local_exponent(&sol.profile.grid.nodes, &sol.profile.values, r, 0.25 * (r - 1.0)).unwrap();
        let expected = 2.0 / (1.0 - p);
        prop_assert!((e - expected).abs() < 0.15 * expected, "exponent {e} vs {expected}");
    }

    #[test]
    fn power_fit_recovers_synthetic_exponents(
        slope in -2.0f64..2.0, c in 0.1f64..10.0, lo in -3.0f64..0.0, decades in 1.0f64..6.0, n in 5usize..30,
    ) {
        let h = geometric_h(10f64.powf(lo), 10f64.powf(lo + decades), n).unwrap();
        let s: Vec<(f64, f64)> = h.iter().map(|&x| (x, c * x.powf(slope))).collect();
        let f = fit_power_law(&s).unwrap();
        prop_assert!((f.exponent - slope).abs() < 1e-9);
        prop_assert!((f.intercept - c.ln()).abs() < 1e-8);
        prop_assert!(f.r_squared >= 0.0 && f.r_squared <= 1.0);
        prop_assert_eq!(f.points, n);
    }
}

#[test]
fn sweep_is_sorted_monotone_and_well_fitted() {
    let h = geometric_h(1.0, 1e3, 7).unwrap();
    let points = solve_sweep_points(&unit_op(), BcKind::Neumann, 0.5, &h, &cfg()).unwrap();
    assert!(profiles_monotone_in_h(&points, 10.0 * cfg().tol_abs).unwrap());
    let res = sweep_h(&unit_op(), BcKind::Neumann, 0.5, &h, SweepFit::Power, &cfg()).unwrap();
    assert!(res.samples.windows(2).all(|w| w[0].h < w[1].h));
    assert!(res.monotone_in_h);
    assert!(!res.partial);
    assert!((0.0..=1.0).contains(&res.r_squared));
    let r: Vec<f64> = res.samples.iter().map(|s| s.r_star.unwrap()).collect();
    assert!(r.windows(2).all(|w| w[1] > w[0]));
    // each radius against the closed form R + (h / (γ ℓ))^{1/(ℓ-1)}, ℓ = 2/(1-p)
    let (g, l) = (gamma(1.0, 1.0, 0.5), 4.0);
    for s in &res.samples {
        let exact = 1.0 + (s.h / (g * l)).powf(1.0 / (l - 1.0));
        let got = s.r_star.unwrap();
        assert!((got - exact).abs() < 5e-3 * exact, "h = {}: {got} vs {exact}", s.h);
    }
}

#[test]
fn sweeps_are_deterministic() {
    let h = geometric_h(0.1, 100.0, 6).unwrap();
    let a = sweep_h(&unit_op(), BcKind::Dirichlet, 0.4, &h, SweepFit::Power, &cfg()).unwrap();
    let b = sweep_h(&unit_op(), BcKind::Dirichlet, 0.4, &h, SweepFit::Power, &cfg()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn neumann_free_boundary_lies_beyond_dirichlet_for_large_data() {
    let h = 1e6;
    for p in [0.3, 0.5, 0.7] {
        let radius = |kind| {
            let sol = minimal_solution(
                &unit_op(),
                BoundaryCondition::new(kind, h).unwrap(),
                p,
                &SolveConfig::default(),
            )
            .unwrap();
            assert!(sol.converged, "p = {p}, {kind:?}: {}", sol.note);
            detect_free_boundary(&sol.profile, None).unwrap().best().unwrap()
        };
        let (n, d) = (radius(BcKind::Neumann), radius(BcKind::Dirichlet));
        assert!(n > d, "p = {p}: Neumann {n} ≤ Dirichlet {d}");
        let (g, l) = (gamma(1.0, 1.0, p), 2.0 / (1.0 - p));
        let dirichlet = 1.0 + (h / g).powf(1.0 / l);
        assert!((d - dirichlet).abs() < 5e-3 * dirichlet, "p = {p}: {d} vs {dirichlet}");
    }
}
