//! First-order descent methods on the determinantal variety of `m × n` real
//! matrices of rank at most `r`.
//!
//! The crate is organised bottom-up:
//!
//! - [`matcore`]: dense primitives, thin SVD with an explicit numerical-rank
//!   cutoff, Householder QR with column pivoting, and the [`FactoredMatrix`]
//!   iterate representation.
//! - [`geometry`]: tangent space / normal space / tangent cone / restricted
//!   tangent cone projections, the three sparse rank-one cones, and the
//!   Bouligand stationarity measure.
//! - [`objectives`]: the [`Objective`] trait with low-rank approximation and
//!   matrix completion instances, gradient checking and Lipschitz estimates.
//! - [`solvers`]: the backtracking descent step, the rank-reduction map and
//!   loop, the cheap factored variant that never needs a large SVD, and a
//!   rank-increasing outer scheme.
//! - [`harness`]: problem generation, JSON run configurations, CSV traces,
//!   JSON summaries and an offline trace verifier.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod error;
pub mod geometry;
pub mod harness;
pub mod matcore;
pub mod objectives;
pub mod solvers;

pub use error::{Error, Result};
pub use geometry::{SparseConeKind, TieBreak};
pub use matcore::{FactoredMatrix, Mat, PivotedQR};
pub use objectives::{ApproxProblem, CompletionProblem, Objective};
pub use solvers::{
    DeltaSchedule, DirectionPolicy, OpCounters, RankPolicy, Scheme, SolverParams, StepPolicy, Trace,
};
