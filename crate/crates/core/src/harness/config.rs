use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{SparseConeKind, TieBreak};
use crate::matcore::{self, Mat};
use crate::objectives::{ApproxProblem, CompletionProblem, Objective};
use crate::solvers::{
    DeltaSchedule, DirectionPolicy, RankPolicy, Scheme, SolverParams, StepPolicy,
};

use super::gen::{gen_problem, GenSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Approx,
    Completion,
}

/// Where the problem data comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "source", deny_unknown_fields)]
pub enum ProblemSpec {
    Generated(GenSpec),
    /// Matrices in the plain text format; relative paths resolve against the
    /// config file's directory.
    Files {
        kind: ProblemKind,
        target: PathBuf,
        #[serde(default)]
        mask: Option<PathBuf>,
    },
    Inline {
        kind: ProblemKind,
        target: Vec<Vec<f64>>,
        #[serde(default)]
        mask: Option<Vec<Vec<f64>>>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Factored cheap map.
    #[default]
    Crfdr,
    /// Dense map; direction chosen by `direction`.
    Erfdr,
    /// Dense map with the full restricted-cone direction.
    Rfdr,
    /// Staged run with growing rank bound, using the cheap map.
    RankIncreasing,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionKind {
    #[default]
    Crfd,
    Rfd,
}

/// Every field optional; unset fields take the solver defaults, except
/// `delta`, which defaults to `1e-3 σ₁(X₀)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSpec {
    pub alpha_lo: Option<f64>,
    pub alpha_hi: Option<f64>,
    pub beta: Option<f64>,
    pub c: Option<f64>,
    pub kappa1: Option<f64>,
    pub kappa2: Option<f64>,
    pub delta: Option<f64>,
    pub stop_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub max_backtracks_cap: Option<usize>,
    pub step_policy: Option<StepPolicy>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankPolicySpec {
    Constant,
    IncreaseBy(usize),
}

impl RankPolicySpec {
    pub fn build(self) -> RankPolicy {
        match self {
            RankPolicySpec::Constant => RankPolicy::Constant,
            RankPolicySpec::IncreaseBy(s) => RankPolicy::IncreaseBy(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StagingSpec {
    pub r0: usize,
    pub tau: f64,
    pub eps: f64,
    pub policy: RankPolicySpec,
    #[serde(default = "default_max_stages")]
    pub max_stages: usize,
}

fn default_max_stages() -> usize {
    64
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum InitSpec {
    #[default]
    Zero,
    /// Random rank-`rank` point with orthonormal factors and singular values
    /// in `(0, scale]`.
    Random { rank: usize, scale: f64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    pub method: Method,
    pub rank: usize,
    #[serde(default)]
    pub direction: DirectionKind,
    #[serde(default = "default_cone")]
    pub cone: SparseConeKind,
    #[serde(default)]
    pub tie_break: TieBreak,
    #[serde(default)]
    pub params: ParamsSpec,
    #[serde(default)]
    pub delta_schedule: DeltaSchedule,
    #[serde(default)]
    pub staging: Option<StagingSpec>,
    #[serde(default)]
    pub init: InitSpec,
}

fn default_cone() -> SparseConeKind {
    SparseConeKind::OneEntry
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_trace")]
    pub trace: String,
    #[serde(default = "default_summary")]
    pub summary: String,
}

fn default_trace() -> String {
    "trace.csv".into()
}

fn default_summary() -> String {
    "summary.json".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            trace: default_trace(),
            summary: default_summary(),
        }
    }
}

/// A complete run description, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub problem: ProblemSpec,
    pub solver: SolverSpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Random pairs for the Lipschitz estimate when the objective has no
    /// known constant.
    #[serde(default = "default_lipschitz_samples")]
    pub lipschitz_samples: usize,
    /// Directory against which relative problem paths resolve.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_lipschitz_samples() -> usize {
    64
}

/// Problem matrices after loading or generation.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemData {
    pub kind: ProblemKind,
    pub target: Mat,
    pub mask: Option<Mat>,
}

impl ProblemData {
    pub fn objective(&self) -> Result<Box<dyn Objective>> {
        Ok(match (self.kind, &self.mask) {
            (ProblemKind::Approx, None) => Box::new(ApproxProblem::new(self.target.clone())?),
            (ProblemKind::Completion, Some(mask)) => {
                Box::new(CompletionProblem::new(self.target.clone(), mask.clone())?)
            }
            (ProblemKind::Completion, None) => Box::new(CompletionProblem::new(
                self.target.clone(),
                Mat::from_element(self.target.nrows(), self.target.ncols(), 1.0),
            )?),
            (ProblemKind::Approx, Some(_)) => {
                return Err(Error::Config(
                    "an approximation problem takes no mask".into(),
                ))
            }
        })
    }
}

fn rows_to_mat(rows: &[Vec<f64>], what: &str) -> Result<Mat> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if m == 0 || n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Config(format!(
            "{what} must be a nonempty rectangular array"
        )));
    }
    Ok(Mat::from_fn(m, n, |i, j| rows[i][j]))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Replaces the generator seed of a generated problem.
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let ProblemSpec::Generated(g) = &mut self.problem {
            g.seed = seed;
        }
        self
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn load_problem(&self) -> Result<ProblemData> {
        match &self.problem {
            ProblemSpec::Generated(g) => gen_problem(g),
            ProblemSpec::Files { kind, target, mask } => Ok(ProblemData {
                kind: *kind,
                target: matcore::load_dense(&self.resolve(target))?,
                mask: mask
                    .as_ref()
                    .map(|m| matcore::load_dense(&self.resolve(m)))
                    .transpose()?,
            }),
            ProblemSpec::Inline { kind, target, mask } => Ok(ProblemData {
                kind: *kind,
                target: rows_to_mat(target, "target")?,
                mask: mask.as_ref().map(|m| rows_to_mat(m, "mask")).transpose()?,
            }),
        }
    }

    pub fn scheme(&self) -> Scheme {
        let s = &self.solver;
        let crfd = DirectionPolicy::Crfd {
            cone: s.cone,
            tie_break: s.tie_break,
        };
        match (s.method, s.direction) {
            (Method::Crfdr | Method::RankIncreasing, _) => Scheme::Crfdr {
                cone: s.cone,
                tie_break: s.tie_break,
            },
            (Method::Erfdr, DirectionKind::Crfd) => Scheme::Erfdr { policy: crfd },
            (Method::Erfdr, DirectionKind::Rfd) | (Method::Rfdr, _) => Scheme::Erfdr {
                policy: DirectionPolicy::Rfd {
                    tie_break: s.tie_break,
                },
            },
        }
    }

    /// Solver parameters with every default filled in. `sigma1` and
    /// `grad_norm` describe the starting point.
    pub fn params(&self, sigma1: f64, grad_norm: f64) -> SolverParams {
        let p = &self.solver.params;
        let d = SolverParams::new(self.solver.rank);
        let delta = p.delta.unwrap_or_else(|| {
            let scale = if sigma1 > 0.0 { sigma1 } else { grad_norm };
            if scale > 0.0 {
                1e-3 * scale
            } else {
                1e-3
            }
        });
        SolverParams {
            alpha_lo: p.alpha_lo.unwrap_or(d.alpha_lo),
            alpha_hi: p.alpha_hi.unwrap_or(d.alpha_hi),
            beta: p.beta.unwrap_or(d.beta),
            c: p.c.unwrap_or(d.c),
            kappa1: p.kappa1,
            kappa2: p.kappa2.unwrap_or(d.kappa2),
            delta,
            rank: self.solver.rank,
            stop_tol: p.stop_tol,
            max_iters: p.max_iters.unwrap_or(d.max_iters),
            max_backtracks_cap: p.max_backtracks_cap.unwrap_or(d.max_backtracks_cap),
            step_policy: p.step_policy.unwrap_or(d.step_policy),
        }
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self, problem: &ProblemData) -> Result<()> {
        let (m, n) = problem.target.shape();
        if let Some(mask) = &problem.mask {
            if mask.shape() != (m, n) {
                return Err(Error::Config(format!(
                    "mask shape {:?} differs from target shape {:?}",
                    mask.shape(),
                    (m, n)
                )));
            }
        }
        self.params(1.0, 1.0).validate(m, n)?;
        if self.solver.method == Method::RankIncreasing && self.solver.staging.is_none() {
            return Err(Error::Config(
                "rank_increasing needs a `staging` block".into(),
            ));
        }
        if let InitSpec::Random { rank, scale, .. } = self.solver.init {
            let r0 = self
                .solver
                .staging
                .as_ref()
                .map_or(self.solver.rank, |s| s.r0);
            if rank > r0 || !(scale > 0.0) {
                return Err(Error::Config(format!(
                    "random init needs rank <= {r0} and a positive scale"
                )));
            }
        }
        Ok(())
    }
}
