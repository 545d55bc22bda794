use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::solvers::{max_backtracks_bound, rate_bound, OpCounters};

use super::trace_io::{read_summary, read_trace, CheckReport, Summary, TraceRow};

const MAX_MESSAGES: usize = 20;

fn flag(report: &mut CheckReport, counter: fn(&mut CheckReport) -> &mut usize, msg: String) {
    *counter(report) += 1;
    if report.messages.len() < MAX_MESSAGES {
        report.messages.push(msg);
    }
}

/// Methods whose maps must never run a large SVD.
pub fn is_cheap_method(method: &str) -> bool {
    matches!(method, "crfdr" | "rank_increasing")
}

/// Re-verifies every recorded step against the run parameters in
/// `summary`, using only the numbers in the rows.
pub fn check_rows(rows: &[TraceRow], summary: &Summary) -> CheckReport {
    let p = &summary.params;
    let l = summary.lipschitz;
    let floor = p.step_floor(l);
    let mut rep = CheckReport {
        rows: rows.len(),
        ..CheckReport::default()
    };

    let mut stage_start = 0usize;
    let mut running_min = f64::INFINITY;
    let mut prev: Option<&TraceRow> = None;
    for (idx, row) in rows.iter().enumerate() {
        let at = format!("row {idx} (stage {}, iter {})", row.stage, row.iter);
        if prev.is_none_or(|q| q.stage != row.stage) {
            stage_start = idx;
            running_min = f64::INFINITY;
        }
        let k = idx - stage_start;
        let f0 = rows[stage_start].f;

        if !(row.f_next <= row.f_base - p.c * row.alpha * row.predicted_decrease) {
            flag(
                &mut rep,
                |r| &mut r.armijo,
                format!("{at}: Armijo inequality fails"),
            );
        }
        if !(row.f_next < row.f) {
            flag(
                &mut rep,
                |r| &mut r.monotone,
                format!("{at}: f did not decrease"),
            );
        }
        if let Some(q) = prev {
            if q.f_next.to_bits() != row.f.to_bits() {
                flag(
                    &mut rep,
                    |r| &mut r.monotone,
                    format!("{at}: f differs from previous f_next"),
                );
            }
            if row.stage_rank < q.stage_rank || row.stage < q.stage {
                flag(
                    &mut rep,
                    |r| &mut r.rank,
                    format!("{at}: stage rank decreased"),
                );
            }
            if !row.counters().dominates(&q.counters()) {
                flag(
                    &mut rep,
                    |r| &mut r.counters,
                    format!("{at}: counters decreased"),
                );
            }
        }
        if row.rank > row.stage_rank || row.stage_rank > p.rank {
            flag(
                &mut rep,
                |r| &mut r.rank,
                format!("{at}: rank {} above bound", row.rank),
            );
        }

        running_min = running_min.min(row.surrogate);
        let bound = rate_bound(f0, summary.f_lower_bound, k, summary.kappa1_rate, p, l);
        if !(running_min < bound) {
            flag(
                &mut rep,
                |r| &mut r.rate_bound,
                format!("{at}: running minimum {running_min:e} not below {bound:e}"),
            );
        }
        if row.rank == row.stage_rank && !row.reduced {
            let slack = 1e-12 * row.f.abs().max(1.0);
            let target = row.f - p.c * summary.kappa1_rate * row.alpha * row.surrogate.powi(2);
            if !(row.f_next <= target + slack) {
                flag(
                    &mut rep,
                    |r| &mut r.rate_bound,
                    format!("{at}: sufficient decrease fails"),
                );
            }
        }

        if !(row.alpha >= floor) {
            flag(
                &mut rep,
                |r| &mut r.step_floor,
                format!("{at}: step {:e} below {floor:e}", row.alpha),
            );
        }
        let cap = max_backtracks_bound(row.alpha0, p.beta, p.c, p.kappa2, l);
        for b in std::iter::once(row.main_backtracks).chain(row.reduced_backtracks) {
            if b > cap {
                flag(
                    &mut rep,
                    |r| &mut r.backtracks,
                    format!("{at}: {b} backtracks, bound {cap}"),
                );
            }
        }
        if is_cheap_method(&summary.method) && row.large_svd > 0 {
            flag(
                &mut rep,
                |r| &mut r.census,
                format!("{at}: large SVD in a cheap run"),
            );
        }
        prev = Some(row);
    }

    let in_rows = rows
        .last()
        .map_or(OpCounters::default(), TraceRow::counters);
    if in_rows + summary.counters_after_last_row != summary.counters {
        flag(
            &mut rep,
            |r| &mut r.counters,
            "summary totals differ from trace rows".into(),
        );
    }
    if is_cheap_method(&summary.method) && summary.counters.large_svd > 0 {
        flag(
            &mut rep,
            |r| &mut r.census,
            "summary records a large SVD in a cheap run".into(),
        );
    }
    rep
}

/// Summary file belonging to a trace: `summary.json` in the same directory.
pub fn sibling_summary(trace: &Path) -> PathBuf {
    trace
        .parent()
        .map_or_else(|| PathBuf::from("summary.json"), |d| d.join("summary.json"))
}

/// Reads a trace and its summary from disk and checks them.
pub fn check_trace(trace: &Path, summary: Option<&Path>) -> Result<(Summary, CheckReport)> {
    let rows = read_trace(trace)?;
    let summary_path = summary.map_or_else(|| sibling_summary(trace), Path::to_path_buf);
    let summary = read_summary(&summary_path)?;
    let report = check_rows(&rows, &summary);
    Ok((summary, report))
}
