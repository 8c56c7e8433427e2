use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use deadcore::analytic::explicit_profile_for;
use deadcore::bvp::{minimal_solution, ContinuationStep, MinimalSolution, SolveConfig};
use deadcore::free_boundary::{detect_free_boundary, geometric_h, sweep_h, validate_h_values, SweepFit, SweepResult};
use deadcore::io::{json_document, write_envelope_csv, write_profile_csv, write_sweep_csv, write_table};
use deadcore::nonradial::{bracket_radii_nonradial, radial_envelopes, FieldSpec};
use deadcore::operator::{log_spaced, operator_regime, OperatorRegime};
use deadcore::{
    classify_regime, predicted_exponent_critical, BcKind, BoundaryCondition, DeadcoreError, DriftSign, RadialOperator,
    RegimeKind, RegimeLabel,
};
use serde::Serialize;

use crate::{Cli, CliError, Command, DriftArg, FitArg, Format, Options};

type Result<T> = std::result::Result<T, CliError>;

/// Window for exponent inference: the top two decades below `1e6 R`.
const CLASSIFY_SPAN: f64 = 1e6;

/// Everything that determines an artifact, embedded in every JSON output.
#[derive(Serialize)]
struct RunConfig<'a, S: Serialize> {
    command: &'a Command,
    options: &'a Options,
    spec: Option<&'a S>,
    solver: Option<&'a SolveConfig>,
    h_values: Option<&'a [f64]>,
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Solve => solve(cli),
        Command::Sweep { fit } => sweep(cli, *fit),
        Command::Classify => classify(cli),
        Command::Predict { m, drift_sign, j, mu } => predict(cli, *m, *drift_sign, *j, *mu),
        Command::Oracle { rel_tol } => oracle(cli, *rel_tol),
        Command::Envelope {
            r_max_ratio,
            nodes,
            sphere_samples,
        } => envelope(cli, *r_max_ratio, *nodes, *sphere_samples),
    }
}

fn config_err(m: impl Into<String>) -> CliError {
    CliError::Config(m.into())
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))
}

fn spec_text(o: &Options) -> Result<String> {
    let path = o.spec.as_ref().ok_or_else(|| config_err("--spec <path> is required"))?;
    read_text(path)
}

fn load_operator(o: &Options) -> Result<RadialOperator> {
    Ok(RadialOperator::from_json_str(&spec_text(o)?)?)
}

fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| config_err(format!("--{flag} is required")))
}

fn boundary(o: &Options) -> Result<BoundaryCondition> {
    let kind: BcKind = need(o.bc, "bc")?.into();
    Ok(BoundaryCondition::new(kind, need(o.h, "h")?)?)
}

fn absorption_power(o: &Options) -> Result<f64> {
    let p = need(o.p, "p")?;
    if p > 0.0 && p < 1.0 {
        Ok(p)
    } else {
        Err(config_err(format!("--p must lie in (0, 1), got {p}")))
    }
}

fn solver_config(o: &Options) -> Result<SolveConfig> {
    let mut cfg = match &o.config {
        Some(path) => SolveConfig::from_json_str(&read_text(path)?)?,
        None => SolveConfig::default(),
    };
    if let Some(t) = o.tol {
        cfg.tol_abs = t;
    }
    if let Some(n) = o.n_max {
        cfg.n_max = n;
    }
    if let Some(g) = o.grid_points {
        cfg.grid_points = g;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).map_err(|e| config_err(format!("cannot create {}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn write_json(path: &Path, text: &str) -> Result<()> {
    fs::write(path, format!("{text}\n")).map_err(|e| config_err(format!("cannot write {}: {e}", path.display())))
}

/// Shortest round-trip form for ordinary magnitudes, scientific otherwise.
fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e7).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), num)
}

#[derive(Serialize)]
struct ProfileArtifact<'a> {
    r_star: Option<f64>,
    r_star_node: Option<f64>,
    converged: bool,
    n_final: f64,
    residual: f64,
    relative_residual: f64,
    note: &'a str,
    continuation: &'a [ContinuationStep],
    grid: &'a [f64],
    values: &'a [f64],
}

/// `(refined r*, node r*)` when the continuation settled on a dead zone.
fn free_boundary(sol: &MinimalSolution) -> Result<(Option<f64>, Option<f64>)> {
    if !sol.converged {
        return Ok((None, None));
    }
    match detect_free_boundary(&sol.profile, None) {
        Ok(e) if e.detected() => Ok((e.best(), e.r_star)),
        Ok(_) | Err(DeadcoreError::DegenerateProfile(_)) => Ok((None, None)),
        Err(e) => Err(e.into()),
    }
}

fn solve(cli: &Cli) -> Result<()> {
    let o = &cli.opts;
    let op = load_operator(o)?;
    let bc = boundary(o)?;
    let p = absorption_power(o)?;
    let cfg = solver_config(o)?;
    let sol = minimal_solution(&op, bc, p, &cfg)?;
    let (r_star, r_node) = free_boundary(&sol)?;
    if let Some(out) = &o.out {
        match o.format {
            Format::Csv => write_profile_csv(create(out)?, &sol.profile)?,
            Format::Json => {
                let art = ProfileArtifact {
                    r_star,
                    r_star_node: r_node,
                    converged: sol.converged,
                    n_final: sol.n_final,
                    residual: sol.profile.residual,
                    relative_residual: sol.profile.relative_residual,
                    note: &sol.note,
                    continuation: &sol.steps,
                    grid: &sol.profile.grid.nodes,
                    values: &sol.profile.values,
                };
                let run = RunConfig {
                    command: &cli.command,
                    options: o,
                    spec: Some(&op),
                    solver: Some(&cfg),
                    h_values: None,
                };
                write_json(out, &json_document("profile", &run, &art)?)?;
            }
        }
    }
    println!(
        "r_star={} residual={} n_final={}",
        opt_num(r_star),
        num(sol.profile.residual),
        num(sol.n_final)
    );
    if !sol.converged {
        println!("note: {}", sol.note);
    }
    Ok(())
}

fn h_range(o: &Options) -> Result<Vec<f64>> {
    let lo = need(o.h_min, "h-min")?;
    let hi = need(o.h_max, "h-max")?;
    let n = need(o.h_points, "h-points")?;
    if !(hi > lo) {
        return Err(config_err(format!("empty h range [{lo}, {hi}]")));
    }
    let hs = geometric_h(lo, hi, n)?;
    validate_h_values(&hs)?;
    Ok(hs)
}

fn regime_of(op: &RadialOperator, p: f64) -> Result<OperatorRegime> {
    Ok(operator_regime(op, p, op.r_inner * CLASSIFY_SPAN)?)
}

#[derive(Serialize)]
struct SweepArtifact<'a> {
    predicted_exponent: Option<f64>,
    predicted_log_power: Option<f64>,
    fit: deadcore::free_boundary::FitRecord,
    sweep: &'a SweepResult,
}

/// `out` with its extension replaced by `fit.json`.
fn fit_path(out: &Path) -> PathBuf {
    out.with_extension("fit.json")
}

fn sweep(cli: &Cli, fit_arg: FitArg) -> Result<()> {
    let o = &cli.opts;
    let op = load_operator(o)?;
    let kind: BcKind = need(o.bc, "bc")?.into();
    let p = absorption_power(o)?;
    let hs = h_range(o)?;
    let cfg = solver_config(o)?;
    let regime = regime_of(&op, p).ok();
    let log_m = regime
        .filter(|r| r.label.kind == RegimeKind::LogPower && r.critical_mu.is_none())
        .map(|r| r.exponents.m);
    let fit = match fit_arg {
        FitArg::Power => SweepFit::Power,
        FitArg::LogPower => SweepFit::LogPower {
            m: log_m.ok_or_else(|| config_err("--fit log-power needs an operator in the log-power regime"))?,
        },
        FitArg::Auto => log_m.map_or(SweepFit::Power, |m| SweepFit::LogPower { m }),
    };
    let res = sweep_h(&op, kind, p, &hs, fit, &cfg)?;
    let predicted = regime.and_then(|r| r.predicted_exponent(p, kind));
    let log_power = regime.and_then(|r| r.label.log_power);
    let art = SweepArtifact {
        predicted_exponent: predicted,
        predicted_log_power: log_power,
        fit: res.primary(),
        sweep: &res,
    };
    let run = RunConfig {
        command: &cli.command,
        options: o,
        spec: Some(&op),
        solver: Some(&cfg),
        h_values: Some(&hs),
    };
    if let Some(out) = &o.out {
        match o.format {
            Format::Csv => {
                write_sweep_csv(create(out)?, &res)?;
                write_json(&fit_path(out), &json_document("sweep-fit", &run, &art)?)?;
            }
            Format::Json => write_json(out, &json_document("sweep", &run, &art)?)?,
        }
    }
    match fit {
        SweepFit::Power => println!(
            "predicted_exponent={} fitted_exponent={} r_squared={} points={}",
            opt_num(predicted),
            num(res.exponent),
            num(res.r_squared),
            art.fit.points
        ),
        SweepFit::LogPower { m } => println!(
            "predicted_log_power={} fit=r_star^{} vs ln h slope={} r_squared={} points={}",
            opt_num(log_power),
            num(1.0 + m),
            num(res.exponent),
            num(res.r_squared),
            art.fit.points
        ),
    }
    if let Some(full) = &res.full_range {
        println!(
            "note: full-range r_squared={} below threshold; fitted h in [{}, {}] (full-range exponent {})",
            num(full.r_squared),
            num(res.subset_used.0),
            num(res.subset_used.1),
            num(full.exponent)
        );
    }
    if res.partial {
        let missing = res.samples.iter().filter(|s| s.r_star.is_none()).count();
        println!(
            "note: {missing} of {} points had no free boundary up to n_max",
            res.samples.len()
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct ClassifyArtifact {
    #[serde(flatten)]
    regime: OperatorRegime,
    predicted_exponent_neumann: Option<f64>,
    predicted_exponent_dirichlet: Option<f64>,
}

fn label_line(label: &RegimeLabel) -> String {
    format!(
        "regime={:?} exponent_N={} exponent_D={} log_power={}",
        label.kind,
        opt_num(label.exponent_n),
        opt_num(label.exponent_d),
        opt_num(label.log_power)
    )
}

fn emit_json(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_json(path, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn classify(cli: &Cli) -> Result<()> {
    let o = &cli.opts;
    let op = load_operator(o)?;
    let p = absorption_power(o)?;
    let regime = regime_of(&op, p)?;
    let art = ClassifyArtifact {
        regime,
        predicted_exponent_neumann: regime.predicted_exponent(p, BcKind::Neumann),
        predicted_exponent_dirichlet: regime.predicted_exponent(p, BcKind::Dirichlet),
    };
    let run = RunConfig {
        command: &cli.command,
        options: o,
        spec: Some(&op),
        solver: None,
        h_values: None,
    };
    emit_json(o.out.as_ref(), &json_document("classification", &run, &art)?)?;
    if o.out.is_some() {
        println!("{}", label_line(&regime.label));
    }
    Ok(())
}

fn predict(cli: &Cli, m: Option<f64>, drift: Option<DriftArg>, j: Option<f64>, mu: Option<f64>) -> Result<()> {
    let o = &cli.opts;
    let p = absorption_power(o)?;
    let label = if let Some(mu) = mu {
        RegimeLabel::power_law(
            predicted_exponent_critical(mu, p, BcKind::Neumann)?,
            predicted_exponent_critical(mu, p, BcKind::Dirichlet)?,
        )
    } else {
        let sign = match need(drift, "drift-sign")? {
            DriftArg::Inward => DriftSign::Inward,
            DriftArg::Zero => DriftSign::Zero,
            DriftArg::Outward => DriftSign::Outward,
        };
        let m = need(m, "m")?;
        let label = classify_regime(m, sign, need(j, "j")?, p)?;
        if label.kind == RegimeKind::Unclassified && sign == DriftSign::Inward && (m + 1.0).abs() < 1e-9 {
            return Err(config_err("critical inward drift (m = -1): pass --mu"));
        }
        label
    };
    let run = RunConfig::<()> {
        command: &cli.command,
        options: o,
        spec: None,
        solver: None,
        h_values: None,
    };
    emit_json(o.out.as_ref(), &json_document("regime", &run, &label)?)?;
    if o.out.is_some() {
        println!("{}", label_line(&label));
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleArtifact {
    r_star_numeric: Option<f64>,
    r_star_exact: f64,
    rel_err: Option<f64>,
    profile_sup_err: f64,
    rel_tol: f64,
    passed: bool,
}

fn oracle(cli: &Cli, rel_tol: f64) -> Result<()> {
    let o = &cli.opts;
    let op = load_operator(o)?;
    let bc = boundary(o)?;
    let p = absorption_power(o)?;
    let cfg = solver_config(o)?;
    let exact = explicit_profile_for(&op, bc, p)?;
    let sol = minimal_solution(&op, bc, p, &cfg)?;
    let (r_star, _) = free_boundary(&sol)?;
    let prof = &sol.profile;
    let exact_vals = exact.sample(&prof.grid.nodes);
    let scale = exact_vals.iter().copied().fold(0.0, f64::max);
    let sup = prof
        .values
        .iter()
        .zip(&exact_vals)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale;
    let rel = r_star.map(|r| (r - exact.r_star).abs() / exact.r_star);
    let passed = rel.is_some_and(|e| e <= rel_tol);
    let art = OracleArtifact {
        r_star_numeric: r_star,
        r_star_exact: exact.r_star,
        rel_err: rel,
        profile_sup_err: sup,
        rel_tol,
        passed,
    };
    if let Some(out) = &o.out {
        match o.format {
            Format::Csv => {
                let rows = prof
                    .grid
                    .nodes
                    .iter()
                    .zip(&prof.values)
                    .zip(&exact_vals)
                    .map(|((&r, &u), &e)| vec![Some(r), Some(u), Some(e)]);
                write_table(create(out)?, &["r", "u", "u_exact"], rows)?;
            }
            Format::Json => {
                let run = RunConfig {
                    command: &cli.command,
                    options: o,
                    spec: Some(&op),
                    solver: Some(&cfg),
                    h_values: None,
                };
                write_json(out, &json_document("oracle", &run, &art)?)?;
            }
        }
    }
    println!(
        "r_star_numeric={} r_star_exact={} rel_err={} profile_sup_err={}",
        opt_num(r_star),
        num(exact.r_star),
        opt_num(rel),
        num(sup)
    );
    if passed {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "free-boundary radius misses the closed form by more than {rel_tol}"
        )))
    }
}

#[derive(Serialize)]
struct EnvelopeArtifact<'a> {
    envelope: &'a deadcore::nonradial::EnvelopeProfile,
    bracket: Option<&'a deadcore::nonradial::NonradialBracket>,
}

fn envelope(cli: &Cli, r_max_ratio: f64, nodes: usize, sphere_samples: usize) -> Result<()> {
    let o = &cli.opts;
    let field = FieldSpec::from_json_str(&spec_text(o)?)?;
    if !(r_max_ratio > 1.0 && r_max_ratio.is_finite()) || nodes < 2 {
        return Err(config_err("--r-max-ratio must exceed 1 and --nodes must be at least 2"));
    }
    let r = log_spaced(field.r_inner(), field.r_inner() * r_max_ratio, nodes);
    let env = radial_envelopes(&field, &r, sphere_samples)?;
    let mut cfg = None;
    let bracket = match o.h {
        Some(h) => {
            let kind: BcKind = need(o.bc, "bc")?.into();
            let p = absorption_power(o)?;
            let c = solver_config(o)?;
            let b = bracket_radii_nonradial(&field, p, kind, h, &c)?;
            cfg = Some(c);
            Some(b)
        }
        None => None,
    };
    if let Some(out) = &o.out {
        match o.format {
            Format::Csv => write_envelope_csv(create(out)?, &env)?,
            Format::Json => {
                let run = RunConfig {
                    command: &cli.command,
                    options: o,
                    spec: Some(&field),
                    solver: cfg.as_ref(),
                    h_values: None,
                };
                let art = EnvelopeArtifact {
                    envelope: &env,
                    bracket: bracket.as_ref(),
                };
                write_json(out, &json_document("envelope", &run, &art)?)?;
            }
        }
    }
    println!(
        "exact={} samples_used={} sampling_error={}",
        env.exact,
        env.samples_used,
        num(env.sampling_error)
    );
    if let Some(b) = &bracket {
        println!(
            "r_star_minus_bound={} r_star_plus_bound={}",
            opt_num(b.r_star_minus_bound),
            opt_num(b.r_star_plus_bound)
        );
        for n in &b.regime_notes {
            println!("note: {n}");
        }
    }
    Ok(())
}
