//! Radial bracket operators for a non-radial field, and the radii they give.
//!
//! For a nonincreasing radial `V(|x|)`,
//! `L V = x̂ᵀ a x̂ (V'' + beta(x) V')` with `beta = AB / (x̂ᵀ a x̂ · r)`.
//! Because `V' ≤ 0`, replacing `beta` by its infimum and `Λ / x̂ᵀ a x̂` by its
//! infimum gives a radial problem whose solutions are upper solutions of the
//! full one; the suprema give lower solutions. With isotropic `a = s I` the
//! normalisation by `s` is unnecessary and the operators keep `A = s`.

use serde::{Deserialize, Serialize};

use crate::bvp::{minimal_solution, MinimalSolution, SolveConfig};
use crate::error::{DeadcoreError, Result};
use crate::free_boundary::detect_free_boundary;
use crate::nonradial::envelope::{radial_envelopes, EnvelopeProfile};
use crate::nonradial::field::FieldSpec;
use crate::operator::{
    infer_exponents, log_spaced, operator_regime, BcKind, BoundaryCondition, CoefficientSpec, PowerTerm,
    RadialOperator, RegimeKind,
};

/// Radial span of tabulated envelopes, in units of `R`.
pub const TABLE_SPAN: f64 = 1e8;
pub const TABLE_NODES_PER_DECADE: usize = 8;
pub const DEFAULT_SPHERE_SAMPLES: usize = 256;
/// Relative variation of `r B / A` below which a tabulated drift is treated as
/// the critical `-μ/r` law.
const CRITICAL_FLATNESS: f64 = 1e-3;
const DISTORTION_ITERATIONS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketOperators {
    /// Its solutions are upper solutions: bounds `r^{*,+}` from above.
    pub upper: RadialOperator,
    /// Its solutions are lower solutions: bounds `r^{*,-}` from below.
    pub lower: RadialOperator,
    pub envelope: Option<EnvelopeProfile>,
}

fn spec_from_terms(mut terms: Vec<PowerTerm>, constant: f64) -> CoefficientSpec {
    terms.retain(|t| t.prefactor != 0.0);
    if constant != 0.0 {
        terms.push(PowerTerm::new(constant.abs(), 0.0, if constant < 0.0 { -1 } else { 1 }));
    }
    match terms.len() {
        0 => CoefficientSpec::zero(),
        1 if terms[0].exponent == 0.0 => CoefficientSpec::constant(terms[0].eval(1.0)),
        1 => CoefficientSpec::Power(terms[0]),
        _ => CoefficientSpec::Sum { terms },
    }
}

/// Build the two radial operators.
pub fn bracket_operators(field: &FieldSpec, sphere_samples: usize) -> Result<BracketOperators> {
    field.validate()?;
    let r0 = field.r_inner();
    let dm1 = (field.d - 1) as f64;
    if let Some(scale) = field.a.isotropic_scale() {
        // a = s(r) I: B = -((d-1) s / r + x̂·b)
        let parts = field.b.parts(field.d);
        let c = parts.constant.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut terms: Vec<PowerTerm> = match &scale {
            CoefficientSpec::Constant { value } => vec![PowerTerm::new(dm1 * value, -1.0, -1)],
            CoefficientSpec::Power(t) => vec![PowerTerm::new(dm1 * t.prefactor, t.exponent - 1.0, -1)],
            _ => unreachable!("isotropic scales are constants or single powers"),
        };
        if dm1 == 0.0 {
            terms.clear();
        }
        terms.extend(
            parts
                .radial
                .iter()
                .map(|t| PowerTerm::new(t.prefactor, t.exponent, -t.sign)),
        );
        // inf x̂·b = radial - c  → B_upper = ... + c ; sup → B_lower = ... - c
        let upper = RadialOperator::new(
            scale.clone(),
            spec_from_terms(terms.clone(), c),
            field.lambda.clone(),
            r0,
        )?;
        let lower = RadialOperator::new(scale, spec_from_terms(terms, -c), field.lambda.clone(), r0)?;
        return Ok(BracketOperators {
            upper,
            lower,
            envelope: None,
        });
    }
    let decades = TABLE_SPAN.log10();
    let nodes = log_spaced(
        r0,
        r0 * TABLE_SPAN,
        (decades * TABLE_NODES_PER_DECADE as f64) as usize + 1,
    );
    let env = radial_envelopes(field, &nodes, sphere_samples)?;
    let tab = |v: Vec<f64>| CoefficientSpec::Tabulated {
        r: nodes.clone(),
        values: v,
    };
    let lam: Vec<f64> = nodes.iter().map(|&r| field.lambda.eval(r)).collect();
    let upper = RadialOperator::new(
        CoefficientSpec::constant(1.0),
        tab(env.beta_minus.iter().map(|b| -b).collect()),
        tab(lam.iter().zip(&env.arr_max).map(|(l, a)| l / a).collect()),
        r0,
    )?;
    let lower = RadialOperator::new(
        CoefficientSpec::constant(1.0),
        tab(env.beta_plus.iter().map(|b| -b).collect()),
        tab(lam.iter().zip(&env.arr_min).map(|(l, a)| l / a).collect()),
        r0,
    )?;
    Ok(BracketOperators {
        upper,
        lower,
        envelope: Some(env),
    })
}

/// Regime note for one bracket operator; `Err` when no radial theory applies.
fn regime_note(label: &str, op: &RadialOperator, p: f64) -> Result<String> {
    if let Some(mu) = op.critical_mu() {
        return Ok(format!("{label}: critical inward drift, mu = {mu}"));
    }
    let r_max = op.r_inner * 1e6;
    let reg = operator_regime(op, p, r_max)?;
    if reg.label.kind != RegimeKind::Unclassified {
        return Ok(format!(
            "{label}: {:?} (m = {:.4}, j = {:.4})",
            reg.label.kind, reg.exponents.m, reg.exponents.j
        ));
    }
    // tabulated envelopes of a -μ/r drift
    let ex = infer_exponents(op, r_max)?;
    let samples: Vec<f64> = log_spaced(r_max / 100.0, r_max, 16)
        .iter()
        .map(|&r| op.evaluate(r).map(|c| -r * c.b / c.a).unwrap_or(f64::NAN))
        .collect();
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo > 0.0 && (hi - lo) <= CRITICAL_FLATNESS * hi {
        return Ok(format!(
            "{label}: near-critical inward drift, mu ≈ {:.6}",
            0.5 * (lo + hi)
        ));
    }
    Err(DeadcoreError::Regime(format!(
        "{label} envelope operator is outside every implemented regime (m = {:.4}, j = {:.4}, drift {:?})",
        ex.m, ex.j, ex.drift_sign
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialRun {
    /// Boundary datum imposed at `R`.
    pub boundary_value: f64,
    /// Ratio used to move the datum from `R` to the annulus `[R, R₁]`
    /// (`γ₁` for the upper run, `γ₂` for the lower one; 1 when `R₁ = R`).
    pub distortion: f64,
    pub r_star: Option<f64>,
    pub converged: bool,
    pub n_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonradialBracket {
    /// Lower bound on the inner radius `r^{*,-}` of the dead set.
    pub r_star_minus_bound: Option<f64>,
    /// Upper bound on the outer radius `r^{*,+}` of the dead set.
    pub r_star_plus_bound: Option<f64>,
    pub upper: RadialRun,
    pub lower: RadialRun,
    pub regime_notes: Vec<String>,
    pub operators: BracketOperators,
}

/// Datum at `R` seen across the annulus: `V(R₁)` (Dirichlet) or the extreme
/// of `-V'` over `[R, R₁]` (Neumann; `min` for the upper role, `max` for the
/// lower one).
fn annulus_datum(sol: &MinimalSolution, bc: BoundaryCondition, r1: f64, upper: bool) -> f64 {
    let prof = &sol.profile;
    match bc.kind {
        BcKind::Dirichlet => prof.value_at(r1),
        BcKind::Neumann => {
            let x = &prof.grid.nodes;
            let mut ext = bc.h;
            for i in 0..x.len() - 1 {
                if x[i] >= r1 {
                    break;
                }
                let slope = -(prof.values[i + 1] - prof.values[i]) / (x[i + 1] - x[i]);
                ext = if upper { ext.min(slope) } else { ext.max(slope) };
            }
            ext
        }
    }
}

fn run(
    op: &RadialOperator,
    kind: BcKind,
    target: f64,
    r1: f64,
    upper: bool,
    p: f64,
    cfg: &SolveConfig,
) -> Result<RadialRun> {
    let mut h = target;
    let mut last = None;
    for _ in 0..DISTORTION_ITERATIONS {
        let bc = BoundaryCondition::new(kind, h)?;
        let sol = minimal_solution(op, bc, p, cfg)?;
        let seen = if r1 > op.r_inner {
            annulus_datum(&sol, bc, r1, upper)
        } else {
            h
        };
        let ok = if upper {
            seen >= target * (1.0 - 1e-12)
        } else {
            kind == BcKind::Dirichlet || seen <= target * (1.0 + 1e-12)
        };
        let done = ok;
        last = Some((sol, h, seen));
        if done {
            break;
        }
        if !(seen > 0.0) {
            return Err(DeadcoreError::numerical("annulus datum vanished", seen));
        }
        h *= target / seen * if upper { 1.0 + 1e-9 } else { 1.0 - 1e-9 };
    }
    let (sol, h, seen) = last.expect("at least one iteration");
    let ok = if upper {
        seen >= target * (1.0 - 1e-12)
    } else {
        kind == BcKind::Dirichlet || seen <= target * (1.0 + 1e-12)
    };
    if !ok {
        return Err(DeadcoreError::numerical(
            "boundary datum adjustment across the annulus did not settle",
            (seen - target).abs() / target,
        ));
    }
    let est = detect_free_boundary(&sol.profile, None)?;
    Ok(RadialRun {
        boundary_value: h,
        distortion: target / h,
        r_star: if sol.converged { est.best() } else { None },
        converged: sol.converged,
        n_final: sol.n_final,
    })
}

/// Bounds on the inner and outer radii of the dead set of the non-radial
/// problem with datum `h · h₀(x)` on `∂D`.
pub fn bracket_radii_nonradial(
    field: &FieldSpec,
    p: f64,
    bc_kind: BcKind,
    h: f64,
    cfg: &SolveConfig,
) -> Result<NonradialBracket> {
    field.validate()?;
    if bc_kind == BcKind::Neumann && !field.star_shaped {
        return Err(DeadcoreError::HypothesisViolation(
            "Neumann data on a domain that is not star-shaped with respect to the origin".into(),
        ));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(DeadcoreError::Parameter(format!("h must be positive, got {h}")));
    }
    let ops = bracket_operators(field, DEFAULT_SPHERE_SAMPLES)?;
    let mut notes = vec![
        regime_note("upper", &ops.upper, p)?,
        regime_note("lower", &ops.lower, p)?,
    ];
    let (h0_min, h0_max) = field.h0_range;
    let r1 = field.r_outer();
    let upper = run(&ops.upper, bc_kind, h * h0_max, r1, true, p, cfg)?;
    let lower = run(&ops.lower, bc_kind, h * h0_min, r1, false, p, cfg)?;
    if !upper.converged {
        notes.push("upper operator: no free boundary up to n_max".into());
    }
    if !lower.converged {
        notes.push("lower operator: no free boundary up to n_max".into());
    }
    if let Some(env) = &ops.envelope {
        notes.push(format!(
            "sampled envelopes: {} sphere points, sampling error {:.2e}",
            env.samples_used, env.sampling_error
        ));
    }
    Ok(NonradialBracket {
        r_star_minus_bound: lower.r_star,
        r_star_plus_bound: upper.r_star,
        upper,
        lower,
        regime_notes: notes,
        operators: ops,
    })
}
