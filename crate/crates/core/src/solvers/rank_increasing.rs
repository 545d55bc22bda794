use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::FactoredMatrix;
use crate::objectives::Objective;

use super::run::{default_stop_tol, run_loop, StopReason, Trace};
use super::{DeltaSchedule, EvalPoint, OpCounters, Scheme, SolverParams};

/// State handed to a rank policy after a stage finishes.
#[derive(Clone, Debug)]
pub struct StageInfo {
    pub stage: usize,
    pub rank: usize,
    pub max_rank: usize,
    pub final_f: f64,
    pub final_surrogate: f64,
    /// Rank of the stage's final iterate.
    pub iterate_rank: usize,
}

/// Chooses the rank bound of the next stage.
#[derive(Clone, Default)]
pub enum RankPolicy {
    #[default]
    Constant,
    /// `min(r_i + step, r)`.
    IncreaseBy(usize),
    Custom(Arc<dyn Fn(&StageInfo) -> usize + Send + Sync>),
}

impl fmt::Debug for RankPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankPolicy::Constant => write!(f, "Constant"),
            RankPolicy::IncreaseBy(s) => write!(f, "IncreaseBy({s})"),
            RankPolicy::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl RankPolicy {
    pub fn next_rank(&self, info: &StageInfo) -> Result<usize> {
        let next = match self {
            RankPolicy::Constant => info.rank,
            RankPolicy::IncreaseBy(s) => (info.rank + s).min(info.max_rank),
            RankPolicy::Custom(f) => f(info),
        };
        if next < info.rank || next > info.max_rank {
            return Err(Error::Policy {
                got: next,
                lo: info.rank,
                hi: info.max_rank,
            });
        }
        Ok(next)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StagedStop {
    /// The next stage tolerance would fall below the stopping floor.
    Finished,
    /// A stage ran out of iterations or stagnated before its tolerance.
    StageBudget,
    MaxStages,
}

#[derive(Clone, Debug)]
pub struct Stage {
    pub index: usize,
    pub rank: usize,
    pub tolerance: f64,
    pub met_tolerance: bool,
    pub trace: Trace,
}

#[derive(Clone, Debug)]
pub struct StagedTrace {
    pub stages: Vec<Stage>,
    pub stop: StagedStop,
    pub final_point: FactoredMatrix,
    pub final_f: f64,
    pub counters: OpCounters,
}

impl StagedTrace {
    pub fn ranks(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.rank).collect()
    }
}

/// Runs the rank-reduction loop at rank bounds `r₀ ≤ r₁ ≤ … ≤ r` with
/// stage tolerances `τⁱ ε`, taking at least one map per stage.
///
/// Stages continue until the tolerance would drop below `params.stop_tol`
/// (or its gradient-relative default), or until `max_stages`.
#[allow(clippy::too_many_arguments)]
pub fn rank_increasing_run(
    x0: FactoredMatrix,
    r0: usize,
    obj: &dyn Objective,
    params: &SolverParams,
    scheme: &Scheme,
    schedule: &DeltaSchedule,
    tau: f64,
    eps: f64,
    policy: &RankPolicy,
    max_stages: usize,
) -> Result<StagedTrace> {
    let (m, n) = obj.shape();
    params.validate(m, n)?;
    let r = params.rank;
    if r0 == 0 || r0 > r {
        return Err(Error::Config(format!(
            "initial rank must satisfy 1 <= r0 <= {r}, got {r0}"
        )));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Config(format!("tau must lie in (0, 1), got {tau}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Config(format!("eps must be positive, got {eps}")));
    }
    if x0.rank() > r0 {
        return Err(Error::InvalidInput(format!(
            "initial point has rank {} above r0 = {r0}",
            x0.rank()
        )));
    }
    let floor = match params.stop_tol {
        Some(t) => t,
        None => {
            let mut scratch = OpCounters::default();
            default_stop_tol(&EvalPoint::new(obj, x0.clone(), &mut scratch)?.grad)
        }
    };

    let mut stages: Vec<Stage> = Vec::new();
    let mut x = x0;
    let mut rank = r0;
    let mut counters = OpCounters::default();
    let mut tolerance = eps;
    let stop = loop {
        let index = stages.len();
        if index == max_stages {
            break StagedStop::MaxStages;
        }
        let stage_params = SolverParams {
            rank,
            stop_tol: Some(tolerance),
            ..params.clone()
        };
        let trace = run_loop(x.clone(), obj, &stage_params, scheme, schedule, 1)?;
        counters = counters + trace.counters;
        let met = trace.final_surrogate <= tolerance;
        let met = met || trace.stop == StopReason::Stationary;
        x = trace.final_point.clone();
        let info = StageInfo {
            stage: index,
            rank,
            max_rank: r,
            final_f: trace.final_f,
            final_surrogate: trace.final_surrogate,
            iterate_rank: x.rank(),
        };
        stages.push(Stage {
            index,
            rank,
            tolerance,
            met_tolerance: met,
            trace,
        });
        if !met {
            break StagedStop::StageBudget;
        }
        let next = policy.next_rank(&info)?;
        let next_tol = tolerance * tau;
        if next_tol < floor {
            break StagedStop::Finished;
        }
        rank = next;
        tolerance = next_tol;
    };
    let final_f = stages.last().map_or_else(
        || {
            let mut scratch = OpCounters::default();
            EvalPoint::new(obj, x.clone(), &mut scratch).map(|p| p.f)
        },
        |s| Ok(s.trace.final_f),
    )?;
    Ok(StagedTrace {
        stages,
        stop,
        final_point: x,
        final_f,
        counters,
    })
}
