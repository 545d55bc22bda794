//! Command-line front end: `run`, `compare`, `gen`, `check`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver error or failed
//! check, 4 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lowrank_opt::harness::{self, GenSpec, ProblemKind, RunConfig};
use lowrank_opt::Error;

#[derive(Parser)]
#[command(
    name = "lowrank",
    version,
    about = "Descent methods on bounded-rank matrices"
)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "lowrank-out")]
    out: PathBuf,
    /// Overrides the seed of generated problems.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print nothing on success.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one JSON config; writes trace.csv and summary.json.
    Run { config: PathBuf },
    /// Run several configs over the same problem and tabulate their costs.
    Compare {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// Write a synthetic problem (target.txt, mask.txt, problem.json).
    Gen {
        #[arg(long, value_parser = parse_kind, default_value = "approx")]
        kind: ProblemKind,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        data_rank: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 1.0)]
        mask_density: f64,
    },
    /// Re-verify a trace against its summary.
    Check {
        trace: PathBuf,
        /// Defaults to summary.json next to the trace.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

fn parse_kind(s: &str) -> Result<ProblemKind, String> {
    match s {
        "approx" => Ok(ProblemKind::Approx),
        "completion" => Ok(ProblemKind::Completion),
        _ => Err(format!("unknown problem kind `{s}` (approx | completion)")),
    }
}

fn load(path: &Path, seed: Option<u64>) -> Result<RunConfig, Error> {
    let cfg = RunConfig::load(path)?;
    Ok(match seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    })
}

fn execute(cli: &Cli) -> Result<bool, Error> {
    let say = |s: String| {
        if !cli.quiet {
            println!("{s}");
        }
    };
    match &cli.cmd {
        Cmd::Run { config } => {
            let cfg = load(config, cli.seed)?;
            let out = harness::run(&cfg, &cli.out)?;
            let s = &out.summary;
            say(format!(
                "{}: {} after {} iterations, f = {:.10e}, surrogate = {:.3e}, rank {}",
                s.name, s.stop, s.iterations, s.final_f, s.final_surrogate, s.final_rank
            ));
            say(format!(
                "checks: {} ({} violations); trace {}",
                if s.checks.passed() { "pass" } else { "FAIL" },
                s.checks.violations(),
                out.trace_path.display()
            ));
            Ok(s.checks.passed())
        }
        Cmd::Compare { configs } => {
            let cfgs = configs
                .iter()
                .map(|p| load(p, cli.seed))
                .collect::<Result<Vec<_>, _>>()?;
            let cmp = harness::compare(&cfgs, &cli.out)?;
            say(cmp.table.trim_end().to_string());
            Ok(cmp.failures.is_empty() && cmp.rows.iter().all(|r| r.checks_passed))
        }
        Cmd::Gen {
            kind,
            m,
            n,
            data_rank,
            noise,
            mask_density,
        } => {
            let spec = GenSpec {
                kind: *kind,
                m: *m,
                n: *n,
                data_rank: *data_rank,
                noise: *noise,
                mask_density: *mask_density,
                seed: cli.seed.unwrap_or(0),
            };
            for p in harness::write_problem(&spec, &cli.out)? {
                say(p.display().to_string());
            }
            Ok(true)
        }
        Cmd::Check { trace, summary } => {
            let (s, rep) = harness::check_trace(trace, summary.as_deref())?;
            say(format!(
                "{}: {} rows, {} violations (armijo {}, monotone {}, rate {}, floor {}, backtracks {}, rank {}, counters {}, census {})",
                s.name,
                rep.rows,
                rep.violations(),
                rep.armijo,
                rep.monotone,
                rep.rate_bound,
                rep.step_floor,
                rep.backtracks,
                rep.rank,
                rep.counters,
                rep.census
            ));
            for m in &rep.messages {
                say(format!("  {m}"));
            }
            Ok(rep.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
