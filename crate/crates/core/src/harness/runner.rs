use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{random_factored, FactoredMatrix};
use crate::objectives::{local_lipschitz_estimate, Objective};
use crate::solvers::{erfdr_run, rank_increasing_run, EvalPoint, OpCounters, SolverParams, Stage};

use super::check::{check_rows, is_cheap_method};
use super::config::{InitSpec, Method, RunConfig};
use super::trace_io::{fmt_scalar, write_summary, write_trace, StageSummary, Summary, TraceRow};

/// Everything a run produced.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub summary: Summary,
    pub rows: Vec<TraceRow>,
    pub final_point: FactoredMatrix,
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Crfdr => "crfdr",
        Method::Erfdr => "erfdr",
        Method::Rfdr => "rfdr",
        Method::RankIncreasing => "rank_increasing",
    }
}

fn initial_point(cfg: &RunConfig, m: usize, n: usize) -> Result<FactoredMatrix> {
    match cfg.solver.init {
        InitSpec::Zero => Ok(FactoredMatrix::zeros(m, n)),
        InitSpec::Random { rank, scale, seed } => {
            let f = random_factored(m, n, rank, &mut ChaCha8Rng::seed_from_u64(seed));
            if f.is_zero() {
                return Ok(f);
            }
            let s1 = f.singular_value(1);
            FactoredMatrix::from_parts(f.u().clone(), f.sigma() * (scale / s1), f.v().clone())
        }
    }
}

/// Loads the problem, runs the configured solver, verifies the result and
/// writes the trace and summary into `out_dir`.
pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<RunOutput> {
    let problem = cfg.load_problem()?;
    cfg.validate(&problem)?;
    let obj = problem.objective()?;
    let (m, n) = obj.shape();
    let x0 = initial_point(cfg, m, n)?;
    let x0_dense = x0.to_dense();
    let start = EvalPoint::new(obj.as_ref(), x0.clone(), &mut OpCounters::default())?;
    let params = cfg.params(x0.singular_value(1), start.grad.norm());
    params.validate(m, n)?;
    let scheme = cfg.scheme();

    let (stages, staged_stop) = if cfg.solver.method == Method::RankIncreasing {
        let st = cfg.solver.staging.as_ref().expect("validated");
        let out = rank_increasing_run(
            x0,
            st.r0,
            obj.as_ref(),
            &params,
            &scheme,
            &cfg.solver.delta_schedule,
            st.tau,
            st.eps,
            &st.policy.build(),
            st.max_stages,
        )?;
        (out.stages, Some(out.stop))
    } else {
        let trace = erfdr_run(
            x0,
            obj.as_ref(),
            &params,
            &scheme,
            &cfg.solver.delta_schedule,
        )?;
        let stage = Stage {
            index: 0,
            rank: params.rank,
            tolerance: trace.stop_tol,
            met_tolerance: true,
            trace,
        };
        (vec![stage], None)
    };
    if stages.is_empty() {
        return Err(Error::Config(
            "staging produced no stage; eps is below the stopping floor".into(),
        ));
    }

    let mut rows = Vec::new();
    let mut offset = OpCounters::default();
    let mut radius = 0.0f64;
    let mut stage_summaries = Vec::new();
    let mut begin = x0_dense.clone();
    for (i, st) in stages.iter().enumerate() {
        let t = &st.trace;
        for rec in &t.records {
            rows.push(TraceRow::from_record(i, st.rank, rec, offset));
        }
        offset = offset + t.counters;
        let shift = (&begin - &x0_dense).norm();
        radius = radius.max(shift + t.ball_radius(params.alpha_hi, params.kappa2));
        begin = t.final_point.to_dense();
        if staged_stop.is_some() {
            stage_summaries.push(StageSummary {
                index: i,
                rank: st.rank,
                tolerance: st.tolerance,
                met_tolerance: st.met_tolerance,
                iterations: t.iterations(),
                f0: t.f0,
                final_f: t.final_f,
                final_surrogate: t.final_surrogate,
                stop: format!("{:?}", t.stop),
            });
        }
    }
    let total = offset;
    let in_rows = rows
        .last()
        .map_or(OpCounters::default(), TraceRow::counters);
    let last = &stages.last().expect("nonempty").trace;
    let lipschitz = local_lipschitz_estimate(
        obj.as_ref(),
        &x0_dense,
        radius.max(1.0),
        cfg.lipschitz_samples,
    )?;
    let final_point = last.final_point.clone();
    let kappa1_rate = scheme.kappa1_for_surrogate(&params, m, n);

    let mut summary = Summary {
        name: cfg.name.clone(),
        method: method_name(cfg.solver.method).into(),
        scheme: format!("{scheme:?}"),
        m,
        n,
        params: params.clone(),
        stop_tol: last.stop_tol,
        stop: staged_stop.map_or_else(|| format!("{:?}", last.stop), |s| format!("{s:?}")),
        iterations: rows.len(),
        f0: start.f,
        final_f: last.final_f,
        final_surrogate: last.final_surrogate,
        final_rank: final_point.rank(),
        f_lower_bound: 0.0,
        kappa1_rate,
        ball_radius: radius,
        lipschitz,
        counters: total,
        counters_after_last_row: total - in_rows,
        stages: stage_summaries,
        trace_file: cfg.output.trace.clone(),
        checks: Default::default(),
        rate_bound_ok: true,
        census_ok: true,
    };
    let report = check_rows(&rows, &summary);
    summary.rate_bound_ok = report.rate_bound == 0;
    summary.census_ok = report.census == 0;
    summary.checks = report;

    std::fs::create_dir_all(out_dir)?;
    let trace_path = out_dir.join(&cfg.output.trace);
    let summary_path = out_dir.join(&cfg.output.summary);
    write_trace(&trace_path, &rows)?;
    write_summary(&summary_path, &summary)?;
    Ok(RunOutput {
        summary,
        rows,
        final_point,
        trace_path,
        summary_path,
    })
}

/// Per-method totals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub name: String,
    pub method: String,
    pub iterations: usize,
    pub final_f: f64,
    pub final_rank: usize,
    pub f_evals: usize,
    pub grad_evals: usize,
    pub qr: usize,
    pub small_svd: usize,
    pub large_svd: usize,
    pub cone_projections: usize,
    pub checks_passed: bool,
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub rows: Vec<CompareRow>,
    /// Cheap runs that recorded a large SVD.
    pub failures: Vec<String>,
    pub table: String,
}

fn slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Runs every config on one shared problem, in parallel, and tabulates the
/// operation counts. Each run writes into its own subdirectory of `out_dir`.
pub fn compare(configs: &[RunConfig], out_dir: &Path) -> Result<Comparison> {
    if configs.len() < 2 {
        return Err(Error::Config("compare needs at least two configs".into()));
    }
    let first = configs[0].load_problem()?;
    for cfg in &configs[1..] {
        if cfg.load_problem()? != first {
            return Err(Error::Config(format!(
                "config `{}` describes a different problem than `{}`",
                cfg.name, configs[0].name
            )));
        }
    }
    let results: Vec<Result<RunOutput>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .enumerate()
            .map(|(i, cfg)| {
                let dir = out_dir.join(format!("{i:02}-{}", slug(&cfg.name)));
                s.spawn(move || run(cfg, &dir))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for res in results {
        let out = res?;
        let s = &out.summary;
        if is_cheap_method(&s.method) && s.counters.large_svd > 0 {
            failures.push(format!("{}: {} large SVDs", s.name, s.counters.large_svd));
        }
        rows.push(CompareRow {
            name: s.name.clone(),
            method: s.method.clone(),
            iterations: s.iterations,
            final_f: s.final_f,
            final_rank: s.final_rank,
            f_evals: s.counters.f_evals,
            grad_evals: s.counters.grad_evals,
            qr: s.counters.qr,
            small_svd: s.counters.small_svd,
            large_svd: s.counters.large_svd,
            cone_projections: s.counters.cone_projections,
            checks_passed: s.checks.passed(),
        });
    }

    let mut table = format!(
        "{:<24} {:<16} {:>6} {:>24} {:>4} {:>7} {:>7} {:>5} {:>7} {:>7} {:>7} {:>6}\n",
        "name",
        "method",
        "iters",
        "final_f",
        "rank",
        "f",
        "grad",
        "qr",
        "small",
        "large",
        "cone",
        "checks"
    );
    for r in &rows {
        let _ = writeln!(
            table,
            "{:<24} {:<16} {:>6} {:>24} {:>4} {:>7} {:>7} {:>5} {:>7} {:>7} {:>7} {:>6}",
            r.name,
            r.method,
            r.iterations,
            fmt_scalar(r.final_f),
            r.final_rank,
            r.f_evals,
            r.grad_evals,
            r.qr,
            r.small_svd,
            r.large_svd,
            r.cone_projections,
            if r.checks_passed { "ok" } else { "FAIL" }
        );
    }
    for f in &failures {
        let _ = writeln!(table, "FAILURE {f}");
    }

    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("comparison.txt"), &table)?;
    let mut w = csv::Writer::from_path(out_dir.join("comparison.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(Comparison {
        rows,
        failures,
        table,
    })
}

/// Solver parameters a config resolves to for its own starting point.
pub fn resolved_params(cfg: &RunConfig) -> Result<SolverParams> {
    let problem = cfg.load_problem()?;
    let obj = problem.objective()?;
    let (m, n) = obj.shape();
    let x0 = initial_point(cfg, m, n)?;
    let p = EvalPoint::new(obj.as_ref(), x0.clone(), &mut OpCounters::default())?;
    Ok(cfg.params(x0.singular_value(1), p.grad.norm()))
}

/// Exposes the objective built from a config, for examples and tests.
pub fn objective_of(cfg: &RunConfig) -> Result<Box<dyn Objective>> {
    cfg.load_problem()?.objective()
}
