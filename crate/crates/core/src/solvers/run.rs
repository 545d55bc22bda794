use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{proj_tangent_space, SparseConeKind, TieBreak};
use crate::matcore::{FactoredMatrix, Mat};
use crate::objectives::Objective;

use super::direction::{crfd_kappa1, DirectionPolicy};
use super::erfd::{erfdr_map, MapOutcome};
use super::{crfdr_step_detailed, DeltaSchedule, EvalPoint, OpCounters, SolverParams};

/// Which map the loop applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Scheme {
    /// Factored cheap map.
    Crfdr {
        cone: SparseConeKind,
        tie_break: TieBreak,
    },
    /// Dense map with any direction policy.
    Erfdr { policy: DirectionPolicy },
}

impl Scheme {
    pub fn crfdr(cone: SparseConeKind) -> Self {
        Scheme::Crfdr {
            cone,
            tie_break: TieBreak::Left,
        }
    }

    /// Dense map with the full restricted-cone direction.
    pub fn rfdr() -> Self {
        Scheme::Erfdr {
            policy: DirectionPolicy::Rfd {
                tie_break: TieBreak::Left,
            },
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn apply(
        &self,
        point: &EvalPoint,
        obj: &dyn Objective,
        params: &SolverParams,
        delta: f64,
        alpha0: f64,
        counters: &mut OpCounters,
    ) -> Result<MapOutcome> {
        match self {
            Scheme::Crfdr { cone, tie_break } => crfdr_step_detailed(
                point, obj, params, *cone, *tie_break, delta, alpha0, counters,
            ),
            Scheme::Erfdr { policy } => {
                erfdr_map(point, obj, params, policy, delta, alpha0, counters)
            }
        }
    }

    /// `κ₁` with `⟨G, −∇f⟩ ≥ κ₁ · surrogate²` at every iterate.
    pub fn kappa1_for_surrogate(&self, params: &SolverParams, m: usize, n: usize) -> f64 {
        match self {
            Scheme::Crfdr { cone, .. } => crfd_kappa1(params, *cone, m, n),
            Scheme::Erfdr { policy } => policy.kappa1_for_surrogate(params, m, n),
        }
    }
}

/// Stationarity surrogate: `‖P_T(−∇f)‖` at rank `r`, `‖∇f‖` below it.
pub fn surrogate(x: &FactoredMatrix, grad: &Mat, r: usize) -> Result<f64> {
    if x.rank() == r {
        Ok(proj_tangent_space(x, grad)?.norm())
    } else {
        Ok(grad.norm())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Surrogate fell to `stop_tol`.
    Converged,
    /// Surrogate exactly zero.
    Stationary,
    MaxIters,
    /// The accepted step did not lower `f` in floating point.
    Stagnated,
}

/// One application of the rank-reduction map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub iter: usize,
    pub f: f64,
    pub surrogate: f64,
    pub grad_norm: f64,
    /// `‖X_i − X₀‖`.
    pub dist_x0: f64,
    pub rank: usize,
    pub delta: f64,
    pub alpha0: f64,
    pub alpha: f64,
    pub main_backtracks: usize,
    pub reduced_backtracks: Option<usize>,
    pub branch_fired: bool,
    pub reduced: bool,
    /// Objective at the start point of the accepted line search.
    pub f_base: f64,
    /// `⟨−∇f, G⟩` of the accepted line search.
    pub predicted_decrease: f64,
    pub f_next: f64,
    /// Cumulative, including the gradient at the next iterate.
    pub counters: OpCounters,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub records: Vec<IterateRecord>,
    pub stop: StopReason,
    pub rank: usize,
    pub f0: f64,
    pub stop_tol: f64,
    /// `κ₁` valid for the surrogate, used by the rate bound.
    pub kappa1_rate: f64,
    pub final_point: FactoredMatrix,
    pub final_f: f64,
    pub final_surrogate: f64,
    pub final_grad_norm: f64,
    pub final_dist_x0: f64,
    pub counters: OpCounters,
}

impl Trace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// Smallest radius `ρ` such that every iterate and every trial point
    /// `X_i + αG_i` (`α ≤ ᾱ`, `‖G_i‖ ≤ ‖∇f(X_i)‖/κ₂`) lies in `B[X₀, ρ]`.
    pub fn ball_radius(&self, alpha_hi: f64, kappa2: f64) -> f64 {
        let reach = |d: f64, g: f64| d + alpha_hi / kappa2 * g;
        self.records
            .iter()
            .map(|r| reach(r.dist_x0, r.grad_norm))
            .fold(reach(self.final_dist_x0, self.final_grad_norm), f64::max)
    }
}

/// `√((f₀ − f_inf) / (c κ₁ α_min (k + 1)))` with
/// `α_min = min(α̲, 2βκ₂(1 − c)/L)`.
pub fn rate_bound(
    f0: f64,
    f_inf: f64,
    k: usize,
    kappa1: f64,
    params: &SolverParams,
    lipschitz: f64,
) -> f64 {
    let floor = params.step_floor(lipschitz);
    ((f0 - f_inf).max(0.0) / (params.c * kappa1 * floor * (k + 1) as f64)).sqrt()
}

pub(crate) fn default_stop_tol(grad0: &Mat) -> f64 {
    (1e-8 * grad0.norm()).max(1e-14)
}

/// Iterates the rank-reduction map from `X₀` until the surrogate reaches
/// `stop_tol` or `max_iters` maps have been applied.
pub fn erfdr_run(
    x0: FactoredMatrix,
    obj: &dyn Objective,
    params: &SolverParams,
    scheme: &Scheme,
    schedule: &DeltaSchedule,
) -> Result<Trace> {
    run_loop(x0, obj, params, scheme, schedule, 0)
}

pub(crate) fn run_loop(
    x0: FactoredMatrix,
    obj: &dyn Objective,
    params: &SolverParams,
    scheme: &Scheme,
    schedule: &DeltaSchedule,
    min_iters: usize,
) -> Result<Trace> {
    let (m, n) = obj.shape();
    params.validate(m, n)?;
    if x0.shape() != (m, n) {
        return Err(Error::DimensionMismatch {
            expected: (m, n),
            found: x0.shape(),
        });
    }
    if x0.rank() > params.rank {
        return Err(Error::InvalidInput(format!(
            "initial point has rank {} above the bound {}",
            x0.rank(),
            params.rank
        )));
    }
    let r = params.rank;
    let mut counters = OpCounters::default();
    let mut point = EvalPoint::new(obj, x0, &mut counters)?;
    let x0_dense = point.dense.clone();
    let f0 = point.f;
    let stop_tol = params
        .stop_tol
        .unwrap_or_else(|| default_stop_tol(&point.grad));
    let mut records = Vec::new();
    let mut prev_alpha = None;

    let stop = loop {
        let s = surrogate(&point.x, &point.grad, r)?;
        if s == 0.0 {
            break StopReason::Stationary;
        }
        let i = records.len();
        if s <= stop_tol && i >= min_iters {
            break StopReason::Converged;
        }
        if i >= params.max_iters {
            break StopReason::MaxIters;
        }
        let delta = schedule.delta(i, params.delta);
        let alpha0 = params.initial_step(prev_alpha);
        let out = scheme.apply(&point, obj, params, delta, alpha0, &mut counters)?;
        let step = &out.chosen;
        if !(step.f_next < point.f) {
            break StopReason::Stagnated;
        }
        prev_alpha = Some(step.alpha);
        let mut rec = IterateRecord {
            iter: i,
            f: point.f,
            surrogate: s,
            grad_norm: point.grad.norm(),
            dist_x0: (&point.dense - &x0_dense).norm(),
            rank: point.x.rank(),
            delta,
            alpha0,
            alpha: step.alpha,
            main_backtracks: out.main_backtracks,
            reduced_backtracks: out.reduced_backtracks,
            branch_fired: out.branch_fired(),
            reduced: out.reduced,
            f_base: step.f_base,
            predicted_decrease: step.predicted_decrease,
            f_next: step.f_next,
            counters,
        };
        let MapOutcome { chosen, .. } = out;
        point = EvalPoint::with_value(obj, chosen.next, chosen.f_next, &mut counters)?;
        rec.counters = counters;
        records.push(rec);
    };

    Ok(Trace {
        stop,
        rank: r,
        f0,
        stop_tol,
        kappa1_rate: scheme.kappa1_for_surrogate(params, m, n),
        final_f: point.f,
        final_surrogate: surrogate(&point.x, &point.grad, r)?,
        final_grad_norm: point.grad.norm(),
        final_dist_x0: (&point.dense - &x0_dense).norm(),
        final_point: point.x,
        counters,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::stationarity_measure;
    use crate::matcore::{gaussian, svd_thin, DEFAULT_RANK_TOL};
    use crate::objectives::{ApproxProblem, CompletionProblem};
    use crate::solvers::max_backtracks_bound;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diag(d: &[f64]) -> Mat {
        Mat::from_diagonal(&DVector::from_vec(d.to_vec()))
    }

    #[test]
    fn stationary_start_takes_no_steps() {
        let obj = ApproxProblem::new(diag(&[3.0, 2.0, 1.0])).unwrap();
        let x0 = obj.optimum(2);
        let trace = erfdr_run(
            x0,
            &obj,
            &SolverParams::new(2),
            &Scheme::crfdr(SparseConeKind::OneEntry),
            &DeltaSchedule::Constant,
        )
        .unwrap();
        assert_eq!(trace.iterations(), 0);
        assert!(matches!(
            trace.stop,
            StopReason::Converged | StopReason::Stationary
        ));
    }

    #[test]
    fn converges_to_truncation() {
        let obj = ApproxProblem::new(diag(&[3.0, 2.0, 1.0])).unwrap();
        for scheme in [
            Scheme::crfdr(SparseConeKind::OneEntry),
            Scheme::crfdr(SparseConeKind::OneRow),
            Scheme::rfdr(),
        ] {
            let trace = erfdr_run(
                FactoredMatrix::zeros(3, 3),
                &obj,
                &SolverParams::new(2),
                &scheme,
                &DeltaSchedule::Constant,
            )
            .unwrap();
            assert!(matches!(
                trace.stop,
                StopReason::Converged | StopReason::Stationary
            ));
            assert!((trace.final_f - 0.5).abs() <= 1e-6);
            let err = (trace.final_point.to_dense() - diag(&[3.0, 2.0, 0.0])).norm();
            assert!(err <= 1e-6, "{scheme:?}: {err}");
        }
    }

    #[test]
    fn trace_invariants_and_rate_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..8 {
            let (m, n) = (6, 5);
            let target = gaussian(m, 2, &mut rng) * gaussian(2, n, &mut rng)
                + gaussian(m, n, &mut rng) * 0.05;
            let mask = Mat::from_fn(m, n, |_, _| f64::from(rng.random_bool(0.8) as u8));
            let obj = CompletionProblem::new(target, mask).unwrap();
            let params = SolverParams {
                max_iters: 200,
                delta: 0.05,
                step_policy: if trial % 2 == 0 {
                    crate::solvers::StepPolicy::Max
                } else {
                    crate::solvers::StepPolicy::WarmStart
                },
                ..SolverParams::new(3)
            };
            let scheme = if trial % 3 == 0 {
                Scheme::rfdr()
            } else {
                Scheme::crfdr(SparseConeKind::ALL[trial % 3])
            };
            let trace = erfdr_run(
                FactoredMatrix::zeros(m, n),
                &obj,
                &params,
                &scheme,
                &DeltaSchedule::Constant,
            )
            .unwrap();
            let mut running_min = f64::INFINITY;
            let mut prev = OpCounters::default();
            for (k, rec) in trace.records.iter().enumerate() {
                assert!(rec.f_next < rec.f);
                assert!(rec.f_next <= rec.f_base - params.c * rec.alpha * rec.predicted_decrease);
                assert!(rec.counters.dominates(&prev));
                prev = rec.counters;
                // Lipschitz constant of a masked quadratic is at most 1.
                assert!(rec.alpha >= params.step_floor(1.0));
                assert!(
                    rec.main_backtracks
                        <= max_backtracks_bound(
                            rec.alpha0,
                            params.beta,
                            params.c,
                            params.kappa2,
                            1.0
                        )
                );
                running_min = running_min.min(rec.surrogate);
                assert!(
                    running_min < rate_bound(trace.f0, 0.0, k, trace.kappa1_rate, &params, 1.0)
                );
                if rec.rank == params.rank && !rec.reduced {
                    assert!(
                        rec.f_next
                            <= rec.f
                                - params.c * trace.kappa1_rate * rec.alpha * rec.surrogate.powi(2)
                                + 1e-12
                    );
                }
            }
            assert_eq!(
                trace.counters,
                trace.records.last().map_or(trace.counters, |r| r.counters)
            );
            assert!(trace.final_point.rank() <= params.rank);
        }
    }

    #[test]
    fn surrogate_is_measure_at_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let x = svd_thin(
            &(gaussian(5, 2, &mut rng) * gaussian(2, 4, &mut rng)),
            DEFAULT_RANK_TOL,
        )
        .unwrap();
        let g = gaussian(5, 4, &mut rng);
        let s = surrogate(&x, &g, 2).unwrap();
        assert!((s - stationarity_measure(&x, &g, 2).unwrap()).abs() < 1e-12);
        assert_eq!(surrogate(&x, &g, 3).unwrap(), g.norm());
    }

    #[test]
    fn rank_above_bound_rejected() {
        let obj = ApproxProblem::new(Mat::identity(3, 3)).unwrap();
        let x0 = svd_thin(&Mat::identity(3, 3), DEFAULT_RANK_TOL).unwrap();
        assert!(erfdr_run(
            x0,
            &obj,
            &SolverParams::new(2),
            &Scheme::rfdr(),
            &DeltaSchedule::Constant
        )
        .is_err());
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let obj = ApproxProblem::new(gaussian(5, 5, &mut rng)).unwrap();
        let run = || {
            erfdr_run(
                FactoredMatrix::zeros(5, 5),
                &obj,
                &SolverParams::new(2),
                &Scheme::crfdr(SparseConeKind::OneColumn),
                &DeltaSchedule::Geometric {
                    initial: 1.0,
                    ratio: 0.9,
                },
            )
            .unwrap()
            .records
        };
        assert_eq!(run(), run());
    }
}
