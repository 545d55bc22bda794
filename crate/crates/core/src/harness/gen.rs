use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{self, gaussian, Mat};

use super::config::{ProblemData, ProblemKind, ProblemSpec};

/// Synthetic problem: `A = L Rᵀ + noise · N / ‖N‖` with standard-normal
/// `L` (`m × data_rank`), `R` (`n × data_rank`) and `N`, and for completion
/// a Bernoulli(`mask_density`) observation mask.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub kind: ProblemKind,
    pub m: usize,
    pub n: usize,
    pub data_rank: usize,
    #[serde(default)]
    pub noise: f64,
    #[serde(default = "one")]
    pub mask_density: f64,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::Config("m and n must be positive".into()));
        }
        if self.data_rank > self.m.min(self.n) {
            return Err(Error::Config(format!(
                "data_rank {} exceeds min(m, n) = {}",
                self.data_rank,
                self.m.min(self.n)
            )));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Config(format!(
                "noise must be nonnegative, got {}",
                self.noise
            )));
        }
        if !(self.mask_density > 0.0 && self.mask_density <= 1.0) {
            return Err(Error::Config(format!(
                "mask_density must lie in (0, 1], got {}",
                self.mask_density
            )));
        }
        Ok(())
    }
}

/// Deterministic per seed.
pub fn gen_problem(spec: &GenSpec) -> Result<ProblemData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let l = gaussian(spec.m, spec.data_rank, &mut rng);
    let r = gaussian(spec.n, spec.data_rank, &mut rng);
    let mut target = &l * r.transpose();
    if spec.noise > 0.0 {
        let noise = gaussian(spec.m, spec.n, &mut rng);
        target += &noise * (spec.noise / noise.norm());
    }
    let mask = match spec.kind {
        ProblemKind::Approx => None,
        ProblemKind::Completion => Some(Mat::from_fn(spec.m, spec.n, |_, _| {
            if rng.random::<f64>() < spec.mask_density {
                1.0
            } else {
                0.0
            }
        })),
    };
    Ok(ProblemData {
        kind: spec.kind,
        target,
        mask,
    })
}

/// Writes `target.txt`, `mask.txt` (completion only) and `problem.json`, a
/// problem block referring to them, into `dir`.
pub fn write_problem(spec: &GenSpec, dir: &Path) -> Result<Vec<PathBuf>> {
    let data = gen_problem(spec)?;
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let target = dir.join("target.txt");
    matcore::save_dense(&target, &data.target)?;
    written.push(target);
    let mask = match &data.mask {
        Some(mask) => {
            let p = dir.join("mask.txt");
            matcore::save_dense(&p, mask)?;
            written.push(p);
            Some(PathBuf::from("mask.txt"))
        }
        None => None,
    };
    let block = ProblemSpec::Files {
        kind: spec.kind,
        target: PathBuf::from("target.txt"),
        mask,
    };
    let json = dir.join("problem.json");
    std::fs::write(&json, serde_json::to_string_pretty(&block)? + "\n")?;
    written.push(json);
    Ok(written)
}
