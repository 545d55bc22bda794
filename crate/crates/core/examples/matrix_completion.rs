//! Recover a rank-3 matrix from half of its entries.
//!
//! ```text
//! cargo run --example matrix_completion
//! ```

use lowrank_opt::harness::{gen_problem, GenSpec, ProblemKind};
use lowrank_opt::matcore::singular_values;
use lowrank_opt::solvers::erfdr_run;
use lowrank_opt::{
    CompletionProblem, DeltaSchedule, FactoredMatrix, Scheme, SolverParams, SparseConeKind,
    StepPolicy,
};

fn main() -> lowrank_opt::Result<()> {
    let (m, n, r) = (30, 25, 3);
    let data = gen_problem(&GenSpec {
        kind: ProblemKind::Completion,
        m,
        n,
        data_rank: r,
        noise: 0.0,
        mask_density: 0.5,
        seed: 5,
    })?;
    let mask = data.mask.clone().expect("completion problems carry a mask");
    let obj = CompletionProblem::new(data.target.clone(), mask)?;
    println!("{} of {} entries observed", obj.observed(), m * n);

    // Warm-started steps with a slowly shrinking reduction threshold.
    let params = SolverParams {
        alpha_hi: 4.0,
        step_policy: StepPolicy::WarmStart,
        max_iters: 3000,
        ..SolverParams::new(r)
    };
    let schedule = DeltaSchedule::Geometric {
        initial: 1.0,
        ratio: 0.95,
    };
    let trace = erfdr_run(
        FactoredMatrix::zeros(m, n),
        &obj,
        &params,
        &Scheme::crfdr(SparseConeKind::OneColumn),
        &schedule,
    )?;

    let x = trace.final_point.to_dense();
    let rel = (&x - &data.target).norm() / data.target.norm();
    println!(
        "{:?} after {} maps, f = {:.3e}",
        trace.stop,
        trace.iterations(),
        trace.final_f
    );
    println!("relative recovery error on all entries: {rel:.3e}");
    let s = singular_values(&x);
    println!("leading singular values: {:.4?}", &s[..r + 1]);
    for rec in trace
        .records
        .iter()
        .step_by(trace.records.len().div_ceil(8).max(1))
    {
        println!(
            "  iter {:>5}  f {:.3e}  surrogate {:.3e}  alpha {:.3}",
            rec.iter, rec.f, rec.surrogate, rec.alpha
        );
    }
    Ok(())
}
