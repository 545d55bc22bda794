//! Runs a JSON config through the harness, then re-reads the trace and
//! verifies it offline.
//!
//! ```text
//! cargo run --example harness_run -- crates/core/examples/configs/approx_crfdr.json
//! ```

use std::path::PathBuf;

use lowrank_opt::harness::{check_trace, run, RunConfig};

fn main() -> lowrank_opt::Result<()> {
    let path = std::env::args().nth(1).map_or_else(
        || PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/completion_warm.json"),
        PathBuf::from,
    );
    let cfg = RunConfig::load(&path)?;
    let out_dir = std::env::temp_dir().join(format!("lowrank-{}", cfg.name));
    let out = run(&cfg, &out_dir)?;
    let s = &out.summary;
    println!(
        "{} ({}): {} after {} rows, f = {:.6e}",
        s.name, s.method, s.stop, s.iterations, s.final_f
    );
    println!(
        "L estimate {:.3}, ball radius {:.3}, kappa1 {:.3e}",
        s.lipschitz, s.ball_radius, s.kappa1_rate
    );
    println!("counters {:?}", s.counters);

    let (_, report) = check_trace(&out.trace_path, None)?;
    println!(
        "offline check: {} rows, {} violations",
        report.rows,
        report.violations()
    );
    println!("trace written to {}", out.trace_path.display());
    Ok(())
}
