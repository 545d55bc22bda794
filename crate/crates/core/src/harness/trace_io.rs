use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::{IterateRecord, OpCounters, SolverParams};

/// Column order of trace files.
pub const TRACE_COLUMNS: [&str; 24] = [
    "stage",
    "stage_rank",
    "iter",
    "f",
    "surrogate",
    "grad_norm",
    "dist_x0",
    "rank",
    "delta",
    "alpha0",
    "alpha",
    "main_backtracks",
    "reduced_backtracks",
    "branch_fired",
    "reduced",
    "f_base",
    "predicted_decrease",
    "f_next",
    "f_evals",
    "grad_evals",
    "qr",
    "small_svd",
    "large_svd",
    "cone_projections",
];

/// One row of a trace file. Counters are cumulative over the whole run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub stage: usize,
    pub stage_rank: usize,
    pub iter: usize,
    pub f: f64,
    pub surrogate: f64,
    pub grad_norm: f64,
    pub dist_x0: f64,
    pub rank: usize,
    pub delta: f64,
    pub alpha0: f64,
    pub alpha: f64,
    pub main_backtracks: usize,
    pub reduced_backtracks: Option<usize>,
    pub branch_fired: bool,
    pub reduced: bool,
    pub f_base: f64,
    pub predicted_decrease: f64,
    pub f_next: f64,
    pub f_evals: usize,
    pub grad_evals: usize,
    pub qr: usize,
    pub small_svd: usize,
    pub large_svd: usize,
    pub cone_projections: usize,
}

impl TraceRow {
    pub fn from_record(
        stage: usize,
        stage_rank: usize,
        rec: &IterateRecord,
        offset: OpCounters,
    ) -> Self {
        let c = rec.counters + offset;
        Self {
            stage,
            stage_rank,
            iter: rec.iter,
            f: rec.f,
            surrogate: rec.surrogate,
            grad_norm: rec.grad_norm,
            dist_x0: rec.dist_x0,
            rank: rec.rank,
            delta: rec.delta,
            alpha0: rec.alpha0,
            alpha: rec.alpha,
            main_backtracks: rec.main_backtracks,
            reduced_backtracks: rec.reduced_backtracks,
            branch_fired: rec.branch_fired,
            reduced: rec.reduced,
            f_base: rec.f_base,
            predicted_decrease: rec.predicted_decrease,
            f_next: rec.f_next,
            f_evals: c.f_evals,
            grad_evals: c.grad_evals,
            qr: c.qr,
            small_svd: c.small_svd,
            large_svd: c.large_svd,
            cone_projections: c.cone_projections,
        }
    }

    pub fn counters(&self) -> OpCounters {
        OpCounters {
            f_evals: self.f_evals,
            grad_evals: self.grad_evals,
            qr: self.qr,
            small_svd: self.small_svd,
            large_svd: self.large_svd,
            cone_projections: self.cone_projections,
        }
    }

    fn fields(&self) -> Vec<String> {
        let f = |x: f64| fmt_scalar(x);
        vec![
            self.stage.to_string(),
            self.stage_rank.to_string(),
            self.iter.to_string(),
            f(self.f),
            f(self.surrogate),
            f(self.grad_norm),
            f(self.dist_x0),
            self.rank.to_string(),
            f(self.delta),
            f(self.alpha0),
            f(self.alpha),
            self.main_backtracks.to_string(),
            self.reduced_backtracks
                .map_or_else(String::new, |b| b.to_string()),
            self.branch_fired.to_string(),
            self.reduced.to_string(),
            f(self.f_base),
            f(self.predicted_decrease),
            f(self.f_next),
            self.f_evals.to_string(),
            self.grad_evals.to_string(),
            self.qr.to_string(),
            self.small_svd.to_string(),
            self.large_svd.to_string(),
            self.cone_projections.to_string(),
        ]
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_scalar(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_COLUMNS)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != TRACE_COLUMNS {
        return Err(Error::Parse(format!(
            "{}: unexpected trace header {header:?}",
            path.display()
        )));
    }
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<TraceRow>, _>>()?;
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub index: usize,
    pub rank: usize,
    pub tolerance: f64,
    pub met_tolerance: bool,
    pub iterations: usize,
    pub f0: f64,
    pub final_f: f64,
    pub final_surrogate: f64,
    pub stop: String,
}

/// Offline checks and their violation counts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub rows: usize,
    pub armijo: usize,
    pub monotone: usize,
    pub rate_bound: usize,
    pub step_floor: usize,
    pub backtracks: usize,
    pub rank: usize,
    pub counters: usize,
    pub census: usize,
    /// First few violations, human readable.
    pub messages: Vec<String>,
}

impl CheckReport {
    pub fn violations(&self) -> usize {
        self.armijo
            + self.monotone
            + self.rate_bound
            + self.step_floor
            + self.backtracks
            + self.rank
            + self.counters
            + self.census
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }
}

/// Run summary written next to the trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub method: String,
    pub scheme: String,
    pub m: usize,
    pub n: usize,
    pub params: SolverParams,
    /// Resolved stopping tolerance of the last stage.
    pub stop_tol: f64,
    pub stop: String,
    pub iterations: usize,
    pub f0: f64,
    pub final_f: f64,
    pub final_surrogate: f64,
    pub final_rank: usize,
    /// Lower bound on `f` used by the rate check.
    pub f_lower_bound: f64,
    pub kappa1_rate: f64,
    pub ball_radius: f64,
    pub lipschitz: f64,
    pub counters: OpCounters,
    /// Work done after the last trace row (gradient at a stationary start,
    /// stage start evaluations, a rejected final map).
    pub counters_after_last_row: OpCounters,
    pub stages: Vec<StageSummary>,
    pub trace_file: String,
    pub checks: CheckReport,
    pub rate_bound_ok: bool,
    pub census_ok: bool,
}

pub fn write_summary(path: &Path, s: &Summary) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(s)? + "\n")?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}
