//! Retraction-free descent on the rank-≤`r` variety.
//!
//! All methods share one skeleton: pick a search direction `G` such that the
//! straight line `X + αG` stays in the variety, then backtrack on `α` until
//! the Armijo condition holds. The rank-reduction map additionally tries the
//! same step from the rank-`(r − 1)` truncation whenever `σ_r(X) ≤ Δ` and
//! keeps the better candidate.
//!
//! Two execution paths are provided:
//!
//! - a dense path ([`erfd_step`], [`erfdr_map`]) that works with any
//!   [`DirectionPolicy`], including the restricted-tangent-cone baseline whose
//!   direction needs a large truncated SVD at rank-deficient points;
//! - a factored path ([`crfd_step_detailed`], [`crfdr_step_detailed`]) for
//!   the sparse-cone direction, which only ever decomposes matrices with at
//!   most `2r` rows or columns.

mod detailed;
mod direction;
mod erfd;
mod rank_increasing;
mod run;

pub use detailed::{crfd_step_detailed, crfdr_step_detailed};
pub use direction::{
    choose_direction_crfd, choose_direction_rfd, DirectionChoice, DirectionPolicy, DirectionSource,
};
pub use erfd::{erfd_step, erfdr_map, MapOutcome, StepOutcome};
pub use rank_increasing::{
    rank_increasing_run, RankPolicy, Stage, StageInfo, StagedStop, StagedTrace,
};
pub use run::{erfdr_run, rate_bound, surrogate, IterateRecord, Scheme, StopReason, Trace};

use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{FactoredMatrix, Mat};
use crate::objectives::Objective;

/// Initial step-size rule for each line search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepPolicy {
    /// Always start from `alpha_hi`.
    #[default]
    Max,
    /// Previous accepted step divided by `beta`, clamped to
    /// `[alpha_lo, alpha_hi]`.
    WarmStart,
}

/// Per-iteration rank-reduction thresholds `Δ_i ≥ Δ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DeltaSchedule {
    /// `Δ_i = Δ`.
    #[default]
    Constant,
    /// `Δ_i = max(Δ, initial · ratioⁱ)`.
    Geometric { initial: f64, ratio: f64 },
}

impl DeltaSchedule {
    pub fn delta(&self, iter: usize, floor: f64) -> f64 {
        match *self {
            DeltaSchedule::Constant => floor,
            DeltaSchedule::Geometric { initial, ratio } => {
                floor.max(initial * ratio.powi(iter.min(i32::MAX as usize) as i32))
            }
        }
    }
}

/// Algorithm parameters.
///
/// `kappa1` and `stop_tol` may be left unset: `kappa1` then defaults to the
/// largest admissible value for the direction in use and `stop_tol` to
/// `max(1e-8 ‖∇f(X₀)‖, 1e-14)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub beta: f64,
    pub c: f64,
    pub kappa1: Option<f64>,
    pub kappa2: f64,
    pub delta: f64,
    /// Target rank `r < min(m, n)`.
    pub rank: usize,
    pub stop_tol: Option<f64>,
    pub max_iters: usize,
    pub max_backtracks_cap: usize,
    pub step_policy: StepPolicy,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            alpha_lo: 1e-12,
            alpha_hi: 1.0,
            beta: 0.5,
            c: 1e-4,
            kappa1: None,
            kappa2: 1.0,
            delta: 1e-3,
            rank: 1,
            stop_tol: None,
            max_iters: 1000,
            max_backtracks_cap: 100,
            step_policy: StepPolicy::Max,
        }
    }
}

fn in_open_unit(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

impl SolverParams {
    pub fn new(rank: usize) -> Self {
        Self {
            rank,
            ..Self::default()
        }
    }

    /// Checks every range constraint for an `m × n` problem.
    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.alpha_lo > 0.0 && self.alpha_lo <= self.alpha_hi && self.alpha_hi.is_finite()) {
            return fail(format!(
                "need 0 < alpha_lo <= alpha_hi < inf, got alpha_lo = {}, alpha_hi = {}",
                self.alpha_lo, self.alpha_hi
            ));
        }
        if !in_open_unit(self.beta) {
            return fail(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if !in_open_unit(self.c) {
            return fail(format!("c must lie in (0, 1), got {}", self.c));
        }
        if let Some(k1) = self.kappa1 {
            if !(k1 > 0.0 && k1 <= 0.5) {
                return fail(format!("kappa1 must lie in (0, 1/2], got {k1}"));
            }
        }
        if !(self.kappa2 > 0.0 && self.kappa2 <= 1.0) {
            return fail(format!("kappa2 must lie in (0, 1], got {}", self.kappa2));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return fail(format!(
                "delta must be positive and finite, got {}",
                self.delta
            ));
        }
        if self.rank == 0 || self.rank >= m.min(n) {
            return fail(format!(
                "rank must satisfy 1 <= r < min(m, n) = {}, got {}",
                m.min(n),
                self.rank
            ));
        }
        if let Some(tol) = self.stop_tol {
            if !(tol >= 0.0) {
                return fail(format!("stop_tol must be nonnegative, got {tol}"));
            }
        }
        if self.max_backtracks_cap == 0 {
            return fail("max_backtracks_cap must be positive".into());
        }
        Ok(())
    }

    pub(crate) fn check_alpha0(&self, alpha0: f64) -> Result<()> {
        if alpha0 >= self.alpha_lo && alpha0 <= self.alpha_hi {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "initial step {alpha0} outside [{}, {}]",
                self.alpha_lo, self.alpha_hi
            )))
        }
    }

    pub(crate) fn initial_step(&self, previous: Option<f64>) -> f64 {
        match (self.step_policy, previous) {
            (StepPolicy::WarmStart, Some(prev)) => {
                (prev / self.beta).clamp(self.alpha_lo, self.alpha_hi)
            }
            _ => self.alpha_hi,
        }
    }

    /// `min(alpha_lo, 2 β κ₂ (1 − c) / L)`.
    pub fn step_floor(&self, lipschitz: f64) -> f64 {
        let star = 2.0 * self.beta * self.kappa2 * (1.0 - self.c) / lipschitz;
        self.alpha_lo.min(star)
    }
}

/// Cumulative operation counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    pub f_evals: usize,
    pub grad_evals: usize,
    /// QR factorizations with column pivoting.
    pub qr: usize,
    /// SVDs whose smaller dimension is at most `r` (or at most `2r` when
    /// merging bases).
    pub small_svd: usize,
    /// Truncated SVDs of full `m × n` matrices.
    pub large_svd: usize,
    pub cone_projections: usize,
}

impl Add for OpCounters {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            f_evals: self.f_evals + o.f_evals,
            grad_evals: self.grad_evals + o.grad_evals,
            qr: self.qr + o.qr,
            small_svd: self.small_svd + o.small_svd,
            large_svd: self.large_svd + o.large_svd,
            cone_projections: self.cone_projections + o.cone_projections,
        }
    }
}

impl Sub for OpCounters {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            f_evals: self.f_evals - o.f_evals,
            grad_evals: self.grad_evals - o.grad_evals,
            qr: self.qr - o.qr,
            small_svd: self.small_svd - o.small_svd,
            large_svd: self.large_svd - o.large_svd,
            cone_projections: self.cone_projections - o.cone_projections,
        }
    }
}

impl OpCounters {
    /// Componentwise `self >= earlier`.
    pub fn dominates(&self, earlier: &Self) -> bool {
        self.f_evals >= earlier.f_evals
            && self.grad_evals >= earlier.grad_evals
            && self.qr >= earlier.qr
            && self.small_svd >= earlier.small_svd
            && self.large_svd >= earlier.large_svd
            && self.cone_projections >= earlier.cone_projections
    }
}

/// A factored iterate together with its dense expansion, objective value
/// and gradient.
#[derive(Clone, Debug)]
pub struct EvalPoint {
    pub x: FactoredMatrix,
    pub dense: Mat,
    pub f: f64,
    pub grad: Mat,
}

impl EvalPoint {
    /// Evaluates `f` and `∇f` at `x`.
    pub fn new(obj: &dyn Objective, x: FactoredMatrix, counters: &mut OpCounters) -> Result<Self> {
        let dense = x.to_dense();
        counters.f_evals += 1;
        let f = obj.value(&dense);
        Self::finish(obj, x, dense, f, counters)
    }

    /// Reuses a known objective value (from the accepted line-search trial)
    /// and evaluates only the gradient.
    pub fn with_value(
        obj: &dyn Objective,
        x: FactoredMatrix,
        f: f64,
        counters: &mut OpCounters,
    ) -> Result<Self> {
        let dense = x.to_dense();
        Self::finish(obj, x, dense, f, counters)
    }

    fn finish(
        obj: &dyn Objective,
        x: FactoredMatrix,
        dense: Mat,
        f: f64,
        counters: &mut OpCounters,
    ) -> Result<Self> {
        if obj.shape() != x.shape() {
            return Err(Error::DimensionMismatch {
                expected: obj.shape(),
                found: x.shape(),
            });
        }
        if !f.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "objective value {f} is not finite"
            )));
        }
        counters.grad_evals += 1;
        let grad = obj.gradient(&dense);
        if grad.shape() != dense.shape() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NumericalFailure(
                "gradient is malformed or non-finite".into(),
            ));
        }
        Ok(Self { x, dense, f, grad })
    }
}

/// Upper bound on the number of backtracks of one Armijo line search:
/// `max(0, ⌈ln(2κ₂(1 − c)/(α₀ L)) / ln β⌉)`.
pub fn max_backtracks_bound(alpha0: f64, beta: f64, c: f64, kappa2: f64, lipschitz: f64) -> usize {
    if lipschitz <= 0.0 {
        return 0;
    }
    let ratio = 2.0 * kappa2 * (1.0 - c) / (alpha0 * lipschitz);
    let j = (ratio.ln() / beta.ln()).ceil();
    if j > 0.0 {
        j as usize
    } else {
        0
    }
}

pub(crate) struct LineSearch {
    pub alpha: f64,
    pub f_new: f64,
    pub backtracks: usize,
}

/// Backtracks from `alpha0` until `f(α) ≤ f0 − c α decrease`.
pub(crate) fn backtrack(
    f0: f64,
    decrease: f64,
    alpha0: f64,
    params: &SolverParams,
    counters: &mut OpCounters,
    mut trial: impl FnMut(f64) -> f64,
) -> Result<LineSearch> {
    let mut alpha = alpha0;
    let mut backtracks = 0;
    loop {
        counters.f_evals += 1;
        let f_new = trial(alpha);
        if f_new <= f0 - params.c * alpha * decrease {
            return Ok(LineSearch {
                alpha,
                f_new,
                backtracks,
            });
        }
        if backtracks == params.max_backtracks_cap {
            return Err(Error::LineSearchFailure {
                cap: params.max_backtracks_cap,
            });
        }
        alpha *= params.beta;
        backtracks += 1;
    }
}
