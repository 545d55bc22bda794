//! Experiment plumbing: JSON run configurations, synthetic problem
//! generation, CSV traces with cumulative operation counters, JSON
//! summaries, an offline trace verifier and a multi-method comparison.
//!
//! A run writes `trace.csv` (one row per map application) and
//! `summary.json` (resolved parameters, totals and check results) into its
//! output directory. [`check_trace`] re-derives every Armijo inequality,
//! the running-minimum rate bound, the step-size floor, the backtrack bound
//! and the counter bookkeeping from those two files alone.

mod check;
mod config;
mod gen;
mod runner;
mod suite;
mod trace_io;

pub use check::{check_rows, check_trace, is_cheap_method, sibling_summary};
pub use config::{
    DirectionKind, InitSpec, Method, OutputSpec, ParamsSpec, ProblemData, ProblemKind, ProblemSpec,
    RankPolicySpec, RunConfig, SolverSpec, StagingSpec,
};
pub use gen::{gen_problem, write_problem, GenSpec};
pub use runner::{compare, objective_of, resolved_params, run, CompareRow, Comparison, RunOutput};
pub use suite::default_suite;
pub use trace_io::{
    fmt_scalar, read_summary, read_trace, write_summary, write_trace, CheckReport, StageSummary,
    Summary, TraceRow, TRACE_COLUMNS,
};
