use crate::geometry::{SparseConeKind, TieBreak};
use crate::solvers::{DeltaSchedule, StepPolicy};

use super::config::{
    DirectionKind, InitSpec, Method, OutputSpec, ParamsSpec, ProblemKind, ProblemSpec,
    RankPolicySpec, RunConfig, SolverSpec, StagingSpec,
};
use super::gen::GenSpec;

fn inline_diag(m: usize, n: usize, d: &[f64]) -> ProblemSpec {
    let target = (0..m)
        .map(|i| {
            (0..n)
                .map(|j| if i == j && i < d.len() { d[i] } else { 0.0 })
                .collect()
        })
        .collect();
    ProblemSpec::Inline {
        kind: ProblemKind::Approx,
        target,
        mask: None,
    }
}

fn generated(
    kind: ProblemKind,
    m: usize,
    n: usize,
    data_rank: usize,
    noise: f64,
    density: f64,
    seed: u64,
) -> ProblemSpec {
    ProblemSpec::Generated(GenSpec {
        kind,
        m,
        n,
        data_rank,
        noise,
        mask_density: density,
        seed,
    })
}

fn solver(method: Method, rank: usize, cone: SparseConeKind) -> SolverSpec {
    SolverSpec {
        method,
        rank,
        direction: DirectionKind::Crfd,
        cone,
        tie_break: TieBreak::Left,
        params: ParamsSpec {
            max_iters: Some(400),
            ..ParamsSpec::default()
        },
        delta_schedule: DeltaSchedule::Constant,
        staging: None,
        init: InitSpec::Zero,
    }
}

fn config(name: &str, problem: ProblemSpec, solver: SolverSpec) -> RunConfig {
    RunConfig {
        name: name.into(),
        problem,
        solver,
        output: OutputSpec::default(),
        lipschitz_samples: 64,
        base_dir: None,
    }
}

/// Runs covering every method, cone, step policy and problem kind. Each is
/// small enough to finish in well under a second.
pub fn default_suite() -> Vec<RunConfig> {
    use SparseConeKind::*;
    let approx = || generated(ProblemKind::Approx, 8, 6, 3, 0.1, 1.0, 7);
    let completion = || generated(ProblemKind::Completion, 8, 7, 2, 0.01, 0.6, 11);
    let mut out = vec![
        config(
            "diag-crfdr",
            inline_diag(3, 3, &[3.0, 2.0, 1.0]),
            solver(Method::Crfdr, 2, OneEntry),
        ),
        config(
            "approx-crfdr-row",
            approx(),
            solver(Method::Crfdr, 3, OneRow),
        ),
        config("approx-rfdr", approx(), solver(Method::Rfdr, 3, OneEntry)),
        config(
            "approx-erfdr-crfd",
            approx(),
            solver(Method::Erfdr, 2, OneColumn),
        ),
        config(
            "completion-crfdr",
            completion(),
            solver(Method::Crfdr, 3, OneEntry),
        ),
        config(
            "completion-rfdr",
            completion(),
            solver(Method::Rfdr, 3, OneEntry),
        ),
    ];

    let mut warm = config(
        "approx-crfdr-warm",
        approx(),
        solver(Method::Crfdr, 2, OneColumn),
    );
    warm.solver.params.step_policy = Some(StepPolicy::WarmStart);
    warm.solver.tie_break = TieBreak::Right;
    out.push(warm);

    let mut decaying = config(
        "completion-crfdr-decay",
        completion(),
        solver(Method::Crfdr, 3, OneRow),
    );
    decaying.solver.delta_schedule = DeltaSchedule::Geometric {
        initial: 1.0,
        ratio: 0.9,
    };
    decaying.solver.params.c = Some(0.3);
    out.push(decaying);

    let mut random_start = config(
        "approx-random-start",
        approx(),
        solver(Method::Erfdr, 3, OneEntry),
    );
    random_start.solver.direction = DirectionKind::Rfd;
    random_start.solver.init = InitSpec::Random {
        rank: 3,
        scale: 2.0,
        seed: 5,
    };
    random_start.solver.params.delta = Some(0.5);
    out.push(random_start);

    let mut staged = config(
        "diag-rank-increasing",
        inline_diag(6, 5, &[5.0, 3.0, 1.0, 0.1]),
        solver(Method::RankIncreasing, 3, OneEntry),
    );
    staged.solver.staging = Some(StagingSpec {
        r0: 1,
        tau: 0.5,
        eps: 1e-2,
        policy: RankPolicySpec::IncreaseBy(1),
        max_stages: 64,
    });
    out.push(staged);
    out
}
