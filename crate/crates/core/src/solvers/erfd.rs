use crate::error::{Error, Result};
use crate::matcore::{svd_thin, FactoredMatrix, DEFAULT_RANK_TOL};
use crate::objectives::Objective;

use super::direction::{DirectionChoice, DirectionPolicy, DirectionSource};
use super::{backtrack, EvalPoint, OpCounters, SolverParams};

/// Result of one backtracking step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub next: FactoredMatrix,
    pub f_next: f64,
    /// Objective at the point the step started from.
    pub f_base: f64,
    pub alpha0: f64,
    pub alpha: f64,
    pub backtracks: usize,
    /// `⟨−∇f(X), G⟩`.
    pub predicted_decrease: f64,
    pub source: DirectionSource,
}

impl StepOutcome {
    pub(crate) fn stay(point: &EvalPoint, alpha0: f64, source: DirectionSource) -> Self {
        Self {
            next: point.x.clone(),
            f_next: point.f,
            f_base: point.f,
            alpha0,
            alpha: alpha0,
            backtracks: 0,
            predicted_decrease: 0.0,
            source,
        }
    }

    /// Armijo inequality re-checked from the recorded numbers.
    pub fn armijo_holds(&self, c: f64) -> bool {
        self.f_next <= self.f_base - c * self.alpha * self.predicted_decrease
    }
}

/// Result of one rank-reduction map application.
#[derive(Clone, Debug)]
pub struct MapOutcome {
    pub chosen: StepOutcome,
    /// Step from `X` itself.
    pub main_f: f64,
    pub main_backtracks: usize,
    /// Step from the rank-`(r − 1)` truncation, when `σ_r(X) ≤ Δ`.
    pub reduced_f: Option<f64>,
    pub reduced_backtracks: Option<usize>,
    /// Whether the truncated candidate was returned.
    pub reduced: bool,
}

impl MapOutcome {
    pub fn branch_fired(&self) -> bool {
        self.reduced_f.is_some()
    }

    pub(crate) fn combine(main: StepOutcome, alt: Option<StepOutcome>) -> Self {
        let (main_f, main_backtracks) = (main.f_next, main.backtracks);
        match alt {
            None => Self {
                chosen: main,
                main_f,
                main_backtracks,
                reduced_f: None,
                reduced_backtracks: None,
                reduced: false,
            },
            Some(alt) => {
                let (reduced_f, reduced_backtracks) = (Some(alt.f_next), Some(alt.backtracks));
                let reduced = alt.f_next < main.f_next;
                Self {
                    chosen: if reduced { alt } else { main },
                    main_f,
                    main_backtracks,
                    reduced_f,
                    reduced_backtracks,
                    reduced,
                }
            }
        }
    }
}

/// Backtracking line search along `X + αG` on the dense path, followed by a
/// re-factorization of the accepted point.
pub fn erfd_step(
    point: &EvalPoint,
    obj: &dyn Objective,
    params: &SolverParams,
    direction: &DirectionChoice,
    alpha0: f64,
    counters: &mut OpCounters,
) -> Result<StepOutcome> {
    params.check_alpha0(alpha0)?;
    if direction.direction.shape() != point.dense.shape() {
        return Err(Error::DimensionMismatch {
            expected: point.dense.shape(),
            found: direction.direction.shape(),
        });
    }
    if direction.is_zero() {
        return Ok(StepOutcome::stay(point, alpha0, direction.source));
    }
    let g = &direction.direction;
    let ls = backtrack(
        point.f,
        direction.predicted_decrease,
        alpha0,
        params,
        counters,
        |alpha| obj.value(&(&point.dense + g * alpha)),
    )?;
    counters.small_svd += 1;
    let next = svd_thin(&(&point.dense + g * ls.alpha), DEFAULT_RANK_TOL)?.truncate(params.rank);
    Ok(StepOutcome {
        next,
        f_next: ls.f_new,
        f_base: point.f,
        alpha0,
        alpha: ls.alpha,
        backtracks: ls.backtracks,
        predicted_decrease: direction.predicted_decrease,
        source: direction.source,
    })
}

/// `σ_r(X) ∈ (0, Δ]` with `r` the target rank.
pub(crate) fn reduction_fires(x: &FactoredMatrix, r: usize, delta: f64) -> bool {
    x.rank() == r && x.singular_value(r) <= delta
}

/// One step from `X` and, if `σ_r(X) ≤ Δ`, one from its rank-`(r − 1)`
/// truncation; returns the lower-`f` candidate, preferring the step from `X`
/// on ties.
pub fn erfdr_map(
    point: &EvalPoint,
    obj: &dyn Objective,
    params: &SolverParams,
    policy: &DirectionPolicy,
    delta: f64,
    alpha0: f64,
    counters: &mut OpCounters,
) -> Result<MapOutcome> {
    let d = policy.choose(&point.x, &point.grad, params, counters)?;
    let main = erfd_step(point, obj, params, &d, alpha0, counters)?;
    let alt = if reduction_fires(&point.x, params.rank, delta) {
        let hat = EvalPoint::new(obj, point.x.truncate(params.rank - 1), counters)?;
        let d_hat = policy.choose(&hat.x, &hat.grad, params, counters)?;
        Some(erfd_step(&hat, obj, params, &d_hat, alpha0, counters)?)
    } else {
        None
    };
    Ok(MapOutcome::combine(main, alt))
}
