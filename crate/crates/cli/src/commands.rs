use serde_json::{json, Value};

use dyncorr::bounds::{
    cnimp_error_surface, fit_minima, protocol_efficiency_compare, snimp_bound_model, snimp_error_report, sweep_lambda,
    sweep_n, BoundModel, CnimpTarget,
};
use dyncorr::models::System;
use dyncorr::oracle::{exact_correlation, CorrelationQuery};
use dyncorr::protocols::snimp::snimp_pair;
use dyncorr::protocols::{
    cnimp_estimate, gamma_operator, projective_correlate, rotation_protocol, snimp_distribution, CouplingChoice,
    Snimp, Timing,
};
use dyncorr::sampling::{finite_sample_estimator, sample_sharded, stream_for, SampleRun, B1_STREAM, B2_STREAM};
use dyncorr::spin::Spin;
use dyncorr::{Error, C64};

use crate::config::{Config, ConfigError};
use crate::output::{float, table, Row, COMPARE_HEADER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Exact,
    Snimp,
    Projective,
    Rotation,
    Cnimp,
    SweepLambda,
    SweepN,
    Compare,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Exact => "exact",
            Command::Snimp => "snimp",
            Command::Projective => "projective",
            Command::Rotation => "rotation",
            Command::Cnimp => "cnimp",
            Command::SweepLambda => "sweep-lambda",
            Command::SweepN => "sweep-n",
            Command::Compare => "compare",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] Error),
    #[error("self-check failed: {0}")]
    Check(String),
}

/// What a command produced: the CSV body and the command-specific metadata.
pub struct Outcome {
    pub csv: String,
    pub results: Value,
}

fn c64(c: C64) -> Value {
    json!([c.re, c.im])
}

/// Query `C(t1, t2)` ignoring any `t3`.
fn pair_query(cfg: &Config) -> Result<CorrelationQuery, ConfigError> {
    Ok(CorrelationQuery { t3: None, ..cfg.query()? })
}

fn snimp_base(cfg: &Config) -> Result<Snimp, RunError> {
    let s = Snimp::new(pair_query(cfg)?, cfg.float("lambda")?, CouplingChoice::B1)
        .with_timing(cfg.timing()?)
        .with_form(cfg.form()?)
        .with_ancilla(cfg.ancilla()?);
    Ok(s)
}

fn target(cfg: &Config) -> Result<CnimpTarget, ConfigError> {
    match cfg.raw("target") {
        "c12" => Ok(CnimpTarget::C12),
        "c13" => Ok(CnimpTarget::C13),
        "c23" => Ok(CnimpTarget::C23),
        other => Err(ConfigError::Value {
            key: "target".into(),
            message: format!("expected c12, c13 or c23, got '{other}'"),
        }),
    }
}

fn relative(value: f64, exact: C64) -> Option<f64> {
    (exact.norm() > dyncorr::bounds::NORMALIZATION_FLOOR).then(|| value / exact.norm())
}

pub fn run(command: Command, cfg: &Config) -> Result<Outcome, RunError> {
    let system = cfg.system()?;
    match command {
        Command::Exact => exact(cfg, &system),
        Command::Snimp => snimp(cfg, &system),
        Command::Projective => projective(cfg, &system),
        Command::Rotation => rotation(cfg, &system),
        Command::Cnimp => cnimp(cfg, &system),
        Command::SweepLambda => sweep(cfg, &system),
        Command::SweepN => scaling(cfg, &system),
        Command::Compare => compare(cfg, &system),
        Command::Selftest => selftest(cfg, &system),
    }
}

fn exact(cfg: &Config, system: &System) -> Result<Outcome, RunError> {
    let q = pair_query(cfg)?;
    let c = exact_correlation(system, &q)?;
    let row = Row { c, ..Row::default() };
    Ok(Outcome {
        csv: table(&[row], false),
        results: json!({ "C": c64(c) }),
    })
}

fn snimp(cfg: &Config, system: &System) -> Result<Outcome, RunError> {
    let base = snimp_base(cfg)?;
    let (n, seed, shards) = (cfg.uint("n")?, cfg.uint("seed")?, cfg.uint("shards")?);
    let exact = exact_correlation(system, &base.query)?;
    let (report, estimate, _) = snimp_error_report(system, &base, n, None)?;
    let pair = snimp_pair(system, &base)?;
    let draw = |dist, role| -> Result<SampleRun, Error> {
        let stream = stream_for(0, role);
        Ok(SampleRun { seed, stream, n, table: sample_sharded(dist, n, seed, stream, shards)? })
    };
    let (r1, r2) = (draw(&pair.b1, B1_STREAM)?, draw(&pair.b2, B2_STREAM)?);
    let k = &pair.components;
    let cn = finite_sample_estimator(&r1, &r2, k.factors, k.lambda, k.levels)?;
    let rel = report.with_measured((cn - exact).norm()).to_relative()?;
    let row = Row {
        lambda: Some(base.lambda),
        n: Some(n as f64),
        seed: Some(seed),
        c: exact,
        sys: Some(rel.eps_sys),
        stat: Some(rel.eps_stat_bound),
        tot: Some(rel.eps_tot_bound),
        measured: rel.measured_dev,
        ..Row::default()
    }
    .sampled(Some(cn));
    Ok(Outcome {
        csv: table(&[row], false),
        results: json!({
            "C_lambda": c64(estimate),
            "script_C1": k.c1,
            "script_C2": k.c2,
            "f1": k.factors.f1,
            "f2": k.factors.f2,
            "counts_b1": r1.table.counts(),
            "counts_b2": r2.table.counts(),
        }),
    })
}

fn projective(cfg: &Config, system: &System) -> Result<Outcome, RunError> {
    let q = pair_query(cfg)?;
    let c = exact_correlation(system, &q)?;
    let value = projective_correlate(system, &q)?;
    let gamma = gamma_operator(system, &q)?;
    let row = Row {
        c,
        re_cn: Some(value),
        sys: relative((value - c.re).abs(), c),
        ..Row::default()
    };
    Ok(Outcome {
        csv: table(&[row], false),
        results: json!({
            "projective_correlation": value,
            "gamma": {
                "antihermitian": gamma.antihermitian,
                "deviation": gamma.deviation,
                "correlation": c64(gamma.correlation),
                "expectation": c64(gamma.expectation),
                "identity_residual": gamma.identity_residual,
            },
        }),
    })
}

fn rotation(cfg: &Config, system: &System) -> Result<Outcome, RunError> {
    let q = pair_query(cfg)?;
    let theta = cfg.float("rotation_angle")?;
    let c = exact_correlation(system, &q)?;
    let value = rotation_protocol(system, &q, theta)?;
    let row = Row {
        c,
        im_cn: Some(value),
        sys: relative((value - c.im).abs(), c),
        ..Row::default()
    };
    Ok(Outcome {
        csv: table(&[row], false),
        results: json!({ "im_C": value, "theta": theta }),
    })
}

fn model_rows(model: &BoundModel, exact: C64, ns: &[f64], every_point: bool) -> Vec<Row> {
    let row = |k: usize, n: f64| Row {
        lambda: Some(model.points[k].0),
        lambda2: model.points[k].1,
        n: Some(n),
        c: exact,
        sys: Some(model.sys[k]),
        stat: Some(model.stat(k, n)),
        tot: Some(model.total(k, n)),
        ..Row::default()
    };
    if every_point {
        let n = ns[0];
        (0..model.points.len()).map(|k| row(k, n)).collect()
    } else {
        ns.iter().map(|&n| row(model.argmin(n).0, n)).collect()
    }
}

fn minimum(model: &BoundModel, n: f64) -> Value {
    let (k, v) = model.argmin(n);
    json!({ "lambda": model.points[k].0, "lambda2": model.points[k].1, "min": v })
}

/// Bound surface of one cNIMP estimator over the coupling grid at sample size `n`.
fn cnimp(cfg: &Config, system: &System) -> Result<Outcome, RunError> {
    let q = cfg.query()?;
    let t = target(cfg)?;
    let n = cfg.uint("n")? as f64;
    let surface = cnimp_error_surface(system, &q, &cfg.cnimp_grid()?)?;
    let model = surface.model(t);
    let exact = t.pick(&surface.exact);
    let mut results = json!({
        "target": t.name(),
        "exact": c64(exact),
        "minimum": minimum(model, n),
    });
    if let Some(l2) = cfg.optional_float("lambda2")? {
        let l1 = cfg.float("lambda")?;
        let e = cnimp_estimate(system, &dyncorr::protocols::Cnimp::new(q, l1, l2))?;
        results["estimate_at"] = json!({ "lambda": l1, "lambda2": l2, "C": c64(t.pick(&e)) });
    }
    Ok(Outcome {
        csv: table(&model_rows(model, exact, &[n], true), true),
        results,
    })
}

fn sweep(cfg: &Config, system: &System) -> Result<Outcome, RunError> {
    let base = snimp_base(cfg)?;
    let (n, seed) = (cfg.uint("n")?, cfg.uint("seed")?);
    let s = sweep_lambda(system, &base, n, &cfg.lambda_grid()?, Some(seed))?;
    let rows: Vec<Row> = s
        .points
        .iter()
        .map(|p| {
            Row {
                lambda: Some(p.lambda),
                n: Some(n as f64),
                seed: Some(seed),
                c: p.exact,
                sys: Some(p.report.eps_sys),
                stat: Some(p.report.eps_stat_bound),
                tot: Some(p.report.eps_tot_bound),
                measured: p.report.measured_dev,
                ..Row::default()
            }
            .sampled(p.sampled)
        })
        .collect();
    Ok(Outcome {
        csv: table(&rows, false),
        results: json!({ "lambda_star": s.lambda_star(), "min": s.min() }),
    })
}

fn sample_sizes(cfg: &Config) -> Result<Vec<f64>, RunError> {
    let ns = cfg.floats("sample_sizes")?;
    if ns.iter().any(|&n| n.is_nan() || n < 1.0) {
        return Err(ConfigError::Value { key: "sample_sizes".into(), message: "sample sizes must be at least 1".into() }.into());
    }
    Ok(ns)
}

fn scaling(cfg: &Config, system: &System) -> Result<Outcome, RunError> {
    let ns = sample_sizes(cfg)?;
    let (model, exact, two) = match cfg.raw("protocol") {
        "snimp" => {
            let base = snimp_base(cfg)?;
            let exact = exact_correlation(system, &base.query)?;
            (snimp_bound_model(system, &base, &cfg.lambda_grid()?)?, exact, false)
        }
        "cnimp" => {
            let t = target(cfg)?;
            let mut surface = cnimp_error_surface(system, &cfg.query()?, &cfg.cnimp_grid()?)?;
            let exact = t.pick(&surface.exact);
            (surface.models.swap_remove(t as usize), exact, true)
        }
        other => {
            return Err(ConfigError::Value {
                key: "protocol".into(),
                message: format!("expected snimp or cnimp, got '{other}'"),
            }
            .into())
        }
    };
    let fit = fit_minima(&sweep_n(&model, &ns))?;
    Ok(Outcome {
        csv: table(&model_rows(&model, exact, &ns, false), two),
        results: json!({
            "protocol": cfg.raw("protocol"),
            "fit": { "exponent": fit.exponent, "prefactor": fit.prefactor, "r_squared": fit.r_squared },
        }),
    })
}

fn compare(cfg: &Config, system: &System) -> Result<Outcome, RunError> {
    let q = cfg.query()?;
    if q.t3.is_none() {
        return Err(ConfigError::Missing("t3".into()).into());
    }
    let rows = protocol_efficiency_compare(
        system,
        &q,
        cfg.float("accuracy")?,
        &sample_sizes(cfg)?,
        &cfg.lambda_grid()?,
        &cfg.cnimp_grid()?,
    )?;
    let mut csv = format!("{COMPARE_HEADER}\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.target,
            r.protocol,
            float(r.exponent),
            float(r.prefactor),
            float(r.r_squared),
            float(r.n_per_sample),
            r.samples,
            float(r.total_measurements)
        ));
    }
    Ok(Outcome {
        csv,
        results: json!({ "accuracy": cfg.float("accuracy")? }),
    })
}

fn check(name: &str, value: f64, tolerance: f64, out: &mut Vec<(String, f64, f64)>) {
    out.push((name.to_string(), value, tolerance));
}

/// Internal consistency checks on the configured system.
fn selftest(cfg: &Config, system: &System) -> Result<Outcome, RunError> {
    let q = pair_query(cfg)?;
    let c = exact_correlation(system, &q)?;
    let mut checks = Vec::new();

    let gamma = gamma_operator(system, &q)?;
    check("projective identity", gamma.identity_residual, 1e-10, &mut checks);

    let base = snimp_base(cfg)?;
    let deferred = snimp_distribution(system, &base.clone().with_timing(Timing::Deferred))?;
    let immediate = snimp_distribution(system, &base.clone().with_timing(Timing::Immediate))?;
    let gap = deferred
        .probabilities()
        .iter()
        .zip(immediate.probabilities())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    check("immediate equals deferred", gap, 1e-12, &mut checks);

    let weak = Snimp { lambda: 1e-4, ..base };
    let estimate = dyncorr::protocols::snimp_estimate(system, &weak)?;
    check("weak coupling limit", (estimate - c).norm(), 1e-6, &mut checks);

    let reg = system.register();
    if reg.spin() == Spin::HALF {
        let im = rotation_protocol(system, &q, cfg.float("rotation_angle")?)?;
        check("rotation imaginary part", (im - c.im).abs(), 1e-12, &mut checks);
    }

    let mut csv = String::from("check,value,tolerance,pass\n");
    let mut failed = Vec::new();
    for (name, value, tol) in &checks {
        let pass = *value <= *tol;
        if !pass {
            failed.push(name.clone());
        }
        csv.push_str(&format!("{name},{},{},{pass}\n", float(*value), float(*tol)));
    }
    if !failed.is_empty() {
        eprint!("{csv}");
        return Err(RunError::Check(failed.join(", ")));
    }
    Ok(Outcome {
        csv,
        results: json!({ "checks": checks.len() }),
    })
}
