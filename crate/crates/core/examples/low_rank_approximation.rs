//! Best rank-r approximation of a noisy low-rank matrix, solved with the
//! cheap factored scheme and with the dense restricted-cone scheme.
//!
//! ```text
//! cargo run --example low_rank_approximation
//! ```

use lowrank_opt::harness::{gen_problem, GenSpec, ProblemKind};
use lowrank_opt::solvers::erfdr_run;
use lowrank_opt::{
    ApproxProblem, DeltaSchedule, FactoredMatrix, Scheme, SolverParams, SparseConeKind,
};

fn main() -> lowrank_opt::Result<()> {
    let data = gen_problem(&GenSpec {
        kind: ProblemKind::Approx,
        m: 40,
        n: 30,
        data_rank: 5,
        noise: 0.1,
        mask_density: 1.0,
        seed: 42,
    })?;
    let obj = ApproxProblem::new(data.target)?;
    let r = 5;
    let best = obj.optimal_value(r);
    println!("optimal value at rank {r}: {best:.10e}");

    let params = SolverParams {
        max_iters: 1000,
        ..SolverParams::new(r)
    };
    let schemes = [
        ("crfdr/one_entry", Scheme::crfdr(SparseConeKind::OneEntry)),
        ("crfdr/one_row", Scheme::crfdr(SparseConeKind::OneRow)),
        ("rfdr", Scheme::rfdr()),
    ];
    for (name, scheme) in schemes {
        let trace = erfdr_run(
            FactoredMatrix::zeros(40, 30),
            &obj,
            &params,
            &scheme,
            &DeltaSchedule::Constant,
        )?;
        let c = trace.counters;
        println!(
            "{name:<16} {:?} after {:>4} maps  f - f* = {:.2e}  rank {}  large SVDs {}",
            trace.stop,
            trace.iterations(),
            trace.final_f - best,
            trace.final_point.rank(),
            c.large_svd,
        );
    }
    Ok(())
}
