//! Rank-increasing outer loop: solve at rank 1, then grow the rank bound by
//! one per stage while halving the stage tolerance.
//!
//! ```text
//! cargo run --example rank_increasing
//! ```

use std::sync::Arc;

use lowrank_opt::matcore::Mat;
use lowrank_opt::solvers::{rank_increasing_run, StageInfo};
use lowrank_opt::{
    ApproxProblem, DeltaSchedule, FactoredMatrix, RankPolicy, Scheme, SolverParams, SparseConeKind,
};

fn main() -> lowrank_opt::Result<()> {
    let d = [5.0, 3.0, 1.0, 0.1];
    let a = Mat::from_fn(6, 5, |i, j| if i == j && i < d.len() { d[i] } else { 0.0 });
    let obj = ApproxProblem::new(a)?;
    let params = SolverParams::new(3);
    let scheme = Scheme::crfdr(SparseConeKind::OneEntry);

    let policies = [
        ("increase by one", RankPolicy::IncreaseBy(1)),
        (
            "jump to the bound once rank 1 is saturated",
            RankPolicy::Custom(Arc::new(|s: &StageInfo| {
                if s.iterate_rank == s.rank {
                    s.max_rank
                } else {
                    s.rank
                }
            })),
        ),
    ];
    for (label, policy) in policies {
        let out = rank_increasing_run(
            FactoredMatrix::zeros(6, 5),
            1,
            &obj,
            &params,
            &scheme,
            &DeltaSchedule::Constant,
            0.5,
            1e-2,
            &policy,
            64,
        )?;
        println!("{label}: {:?}, final f = {:.6e}", out.stop, out.final_f);
        for st in out.stages.iter().take(5) {
            println!(
                "  stage {:>2}  rank {}  tol {:.2e}  met {}  maps {:>3}  f {:.6e}",
                st.index,
                st.rank,
                st.tolerance,
                st.met_tolerance,
                st.trace.iterations(),
                st.trace.final_f
            );
        }
        if out.stages.len() > 5 {
            println!("  ... {} more stages", out.stages.len() - 5);
        }
    }
    Ok(())
}
