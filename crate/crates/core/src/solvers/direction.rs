use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    self, cone_unit_sphere_constant, sparse_cone_project, SparseConeKind, TieBreak,
};
use crate::matcore::{FactoredMatrix, Mat};

use super::{OpCounters, SolverParams};

/// Which projection produced a search direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionSource {
    /// Restricted tangent cone of the variety at a rank-deficient point,
    /// normal term included (large SVD).
    RestrictedConeFull,
    /// Restricted tangent cone of the fixed-rank manifold (`rank X = r`).
    RestrictedConeFixed,
    /// One of the sparse rank-one cones (`rank X < r`).
    SparseCone,
}

/// A search direction `G` together with `⟨−∇f(X), G⟩`.
#[derive(Clone, Debug)]
pub struct DirectionChoice {
    pub direction: Mat,
    /// Set for sparse-cone directions.
    pub factored: Option<FactoredMatrix>,
    pub predicted_decrease: f64,
    pub kappa1_used: f64,
    pub source: DirectionSource,
}

impl DirectionChoice {
    pub fn is_zero(&self) -> bool {
        self.predicted_decrease == 0.0 && self.direction.iter().all(|&g| g == 0.0)
    }
}

/// How the dense path picks its direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DirectionPolicy {
    /// Cheap direction: restricted fixed-rank projection at full rank,
    /// sparse-cone projection otherwise.
    Crfd {
        cone: SparseConeKind,
        tie_break: TieBreak,
    },
    /// Baseline: full restricted-cone projection.
    Rfd { tie_break: TieBreak },
}

impl DirectionPolicy {
    pub fn choose(
        &self,
        x: &FactoredMatrix,
        grad: &Mat,
        params: &SolverParams,
        counters: &mut OpCounters,
    ) -> Result<DirectionChoice> {
        match *self {
            DirectionPolicy::Crfd { cone, tie_break } => {
                choose_direction_crfd(x, grad, params, cone, tie_break, counters)
            }
            DirectionPolicy::Rfd { tie_break } => {
                choose_direction_rfd(x, grad, params, tie_break, counters)
            }
        }
    }

    /// `κ₁` that the direction is guaranteed to satisfy at rank-`r` points.
    pub fn kappa1(&self, params: &SolverParams, m: usize, n: usize) -> f64 {
        match *self {
            DirectionPolicy::Crfd { cone, .. } => crfd_kappa1(params, cone, m, n),
            DirectionPolicy::Rfd { .. } => params.kappa1.unwrap_or(0.5),
        }
    }

    /// `κ₁` for which `⟨G, −∇f⟩ ≥ κ₁ · surrogate²` holds at every iterate,
    /// with `‖∇f‖` standing in for the stationarity measure below rank `r`.
    pub fn kappa1_for_surrogate(&self, params: &SolverParams, m: usize, n: usize) -> f64 {
        match *self {
            DirectionPolicy::Crfd { cone, .. } => crfd_kappa1(params, cone, m, n),
            DirectionPolicy::Rfd { .. } => self.kappa1(params, m, n).min(0.5 / m.min(n) as f64),
        }
    }
}

pub(crate) fn crfd_kappa1(params: &SolverParams, cone: SparseConeKind, m: usize, n: usize) -> f64 {
    params
        .kappa1
        .unwrap_or_else(|| cone_unit_sphere_constant(cone, m, n).min(0.5))
}

pub(crate) fn check_cone_kappa1(
    params: &SolverParams,
    cone: SparseConeKind,
    m: usize,
    n: usize,
) -> Result<()> {
    let constant = cone_unit_sphere_constant(cone, m, n);
    match params.kappa1 {
        Some(k1) if k1 > constant => Err(Error::Config(format!(
            "kappa1 = {k1} exceeds the {cone:?} cone constant {constant}"
        ))),
        _ => Ok(()),
    }
}

fn check_inputs(x: &FactoredMatrix, grad: &Mat, r: usize) -> Result<()> {
    if x.shape() != grad.shape() {
        return Err(Error::DimensionMismatch {
            expected: x.shape(),
            found: grad.shape(),
        });
    }
    if x.rank() > r {
        return Err(Error::InvalidState(format!(
            "iterate has rank {} above the bound {r}",
            x.rank()
        )));
    }
    Ok(())
}

/// Cheap direction. At full rank it is the restricted fixed-rank projection
/// of `−∇f`; below full rank it is the sparse-cone projection of `−∇f`.
pub fn choose_direction_crfd(
    x: &FactoredMatrix,
    grad: &Mat,
    params: &SolverParams,
    cone: SparseConeKind,
    tie_break: TieBreak,
    counters: &mut OpCounters,
) -> Result<DirectionChoice> {
    check_inputs(x, grad, params.rank)?;
    let (m, n) = x.shape();
    check_cone_kappa1(params, cone, m, n)?;
    let neg = -grad;
    if x.rank() == params.rank {
        let direction = geometry::proj_restricted_fixed(x, &neg, tie_break)?;
        Ok(DirectionChoice {
            predicted_decrease: direction.norm_squared(),
            direction,
            factored: None,
            kappa1_used: crfd_kappa1(params, cone, m, n),
            source: DirectionSource::RestrictedConeFixed,
        })
    } else {
        counters.cone_projections += 1;
        let g = sparse_cone_project(cone, &neg);
        Ok(DirectionChoice {
            direction: g.to_dense(),
            predicted_decrease: g.sigma().norm_squared(),
            factored: Some(g),
            kappa1_used: cone_unit_sphere_constant(cone, m, n),
            source: DirectionSource::SparseCone,
        })
    }
}

/// Baseline direction: the restricted tangent cone projection of `−∇f`,
/// which needs a large truncated SVD of the normal part when `rank X < r`.
pub fn choose_direction_rfd(
    x: &FactoredMatrix,
    grad: &Mat,
    params: &SolverParams,
    tie_break: TieBreak,
    counters: &mut OpCounters,
) -> Result<DirectionChoice> {
    check_inputs(x, grad, params.rank)?;
    let neg = -grad;
    let full = x.rank() < params.rank;
    if full {
        counters.large_svd += 1;
    }
    let direction = geometry::proj_restricted_cone_variety(x, &neg, params.rank, tie_break)?;
    Ok(DirectionChoice {
        predicted_decrease: direction.norm_squared(),
        direction,
        factored: None,
        kappa1_used: params.kappa1.unwrap_or(0.5),
        source: if full {
            DirectionSource::RestrictedConeFull
        } else {
            DirectionSource::RestrictedConeFixed
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::stationarity_measure;
    use crate::matcore::{gaussian, inner, random_factored, svd_thin, DEFAULT_RANK_TOL};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn direction_condition(x: &FactoredMatrix, grad: &Mat, r: usize, d: &DirectionChoice, k2: f64) {
        let pd = inner(&d.direction, &(-grad)).unwrap();
        let s = stationarity_measure(x, grad, r).unwrap();
        let scale = grad.norm_squared().max(1e-300);
        assert!((pd - d.predicted_decrease).abs() <= 1e-12 * scale);
        assert!(
            pd >= d.kappa1_used * s * s - 1e-12 * scale,
            "{pd} vs {}",
            d.kappa1_used * s * s
        );
        assert!(pd >= k2 * d.direction.norm_squared() - 1e-12 * scale);
    }

    #[test]
    fn one_entry_at_zero() {
        let grad = Mat::from_row_slice(2, 2, &[3.0, -4.0, 1.0, 2.0]);
        let x = FactoredMatrix::zeros(2, 2);
        let d = choose_direction_crfd(
            &x,
            &grad,
            &SolverParams::new(1),
            SparseConeKind::OneEntry,
            TieBreak::Left,
            &mut OpCounters::default(),
        )
        .unwrap();
        assert_eq!(
            d.direction,
            Mat::from_row_slice(2, 2, &[0.0, 4.0, 0.0, 0.0])
        );
        assert_eq!(d.predicted_decrease, 16.0);
        assert_eq!(d.source, DirectionSource::SparseCone);
    }

    #[test]
    fn zero_gradient_gives_zero_direction() {
        let x = FactoredMatrix::zeros(3, 2);
        for cone in SparseConeKind::ALL {
            let d = choose_direction_crfd(
                &x,
                &Mat::zeros(3, 2),
                &SolverParams::new(1),
                cone,
                TieBreak::Left,
                &mut OpCounters::default(),
            )
            .unwrap();
            assert!(d.is_zero());
        }
    }

    #[test]
    fn kappa1_above_cone_constant_is_config_error() {
        let p = SolverParams {
            kappa1: Some(0.5),
            ..SolverParams::new(1)
        };
        let err = choose_direction_crfd(
            &FactoredMatrix::zeros(3, 3),
            &Mat::identity(3, 3),
            &p,
            SparseConeKind::OneEntry,
            TieBreak::Left,
            &mut OpCounters::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn full_rank_branches_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = SolverParams::new(2);
        let x = random_factored(5, 4, 2, &mut rng);
        let grad = gaussian(5, 4, &mut rng);
        let mut c = OpCounters::default();
        let a = choose_direction_crfd(
            &x,
            &grad,
            &p,
            SparseConeKind::OneRow,
            TieBreak::Left,
            &mut c,
        )
        .unwrap();
        let b = choose_direction_rfd(&x, &grad, &p, TieBreak::Left, &mut c).unwrap();
        assert_eq!(a.source, DirectionSource::RestrictedConeFixed);
        assert_eq!(a.direction, b.direction);
        assert_eq!(c, OpCounters::default());
    }

    #[test]
    fn rfd_at_zero_truncates_negative_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let grad = gaussian(4, 5, &mut rng);
        let mut c = OpCounters::default();
        let d = choose_direction_rfd(
            &FactoredMatrix::zeros(4, 5),
            &grad,
            &SolverParams::new(2),
            TieBreak::Left,
            &mut c,
        )
        .unwrap();
        let expect = svd_thin(&(-&grad), DEFAULT_RANK_TOL)
            .unwrap()
            .truncate(2)
            .to_dense();
        assert!((d.direction - expect).norm() < 1e-12);
        assert_eq!(c.large_svd, 1);
    }

    #[test]
    fn directions_satisfy_descent_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..60 {
            let (m, n) = (4 + trial % 3, 3 + trial % 2);
            let r = 2;
            let k = trial % (r + 1);
            let x = random_factored(m, n, k, &mut rng);
            let grad = gaussian(m, n, &mut rng);
            let p = SolverParams::new(r);
            let mut c = OpCounters::default();
            let rfd = choose_direction_rfd(&x, &grad, &p, TieBreak::Left, &mut c).unwrap();
            direction_condition(&x, &grad, r, &rfd, 1.0);
            for cone in SparseConeKind::ALL {
                let d =
                    choose_direction_crfd(&x, &grad, &p, cone, TieBreak::Right, &mut c).unwrap();
                direction_condition(&x, &grad, r, &d, 1.0);
                // Feasibility of the whole segment.
                for alpha in [0.1, 1.0] {
                    let y = x.to_dense() + &d.direction * alpha;
                    let sv = crate::matcore::singular_values(&y);
                    assert!(sv.get(r).copied().unwrap_or(0.0) <= 1e-10 * sv[0].max(1.0));
                }
            }
        }
    }
}
