use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::{self, sparse_cone_project, SparseConeKind, TieBreak};
use crate::matcore::{qr_col_pivot, svd_thin, FactoredMatrix, Mat, DEFAULT_RANK_TOL};
use crate::objectives::Objective;

use super::direction::{check_cone_kappa1, DirectionSource};
use super::erfd::{reduction_fires, MapOutcome, StepOutcome};
use super::{backtrack, EvalPoint, OpCounters, SolverParams};

const MERGE_TOL: f64 = 1e-8;

#[allow(clippy::too_many_arguments)]
fn outcome(
    point: &EvalPoint,
    next: FactoredMatrix,
    f_next: f64,
    alpha0: f64,
    alpha: f64,
    backtracks: usize,
    decrease: f64,
    source: DirectionSource,
) -> StepOutcome {
    StepOutcome {
        next,
        f_next,
        f_base: point.f,
        alpha0,
        alpha,
        backtracks,
        predicted_decrease: decrease,
        source,
    }
}

/// Orthonormal basis of `[B b]` via pivoted QR, returned with the
/// unpermuted triangular factor and checked against the input.
fn merge_basis(b: &Mat, extra: &Mat, counters: &mut OpCounters) -> Result<(Mat, Mat)> {
    let mut stacked = Mat::zeros(b.nrows(), b.ncols() + 1);
    stacked.columns_mut(0, b.ncols()).copy_from(b);
    stacked.set_column(b.ncols(), &extra.column(0));
    counters.qr += 1;
    let qr = qr_col_pivot(&stacked, DEFAULT_RANK_TOL)?;
    let r = qr.r_unpermuted();
    let mismatch = (&qr.q * &r - &stacked).norm();
    if mismatch > MERGE_TOL * stacked.norm() {
        return Err(Error::NumericalFailure(format!(
            "basis merge reconstructs with error {mismatch:e}"
        )));
    }
    Ok((qr.q, r))
}

/// Factored cheap step. Only matrices with at most `rank + 1` rows or
/// columns are decomposed; the objective sees dense expansions of factored
/// products.
pub fn crfd_step_detailed(
    point: &EvalPoint,
    obj: &dyn Objective,
    params: &SolverParams,
    cone: SparseConeKind,
    tie_break: TieBreak,
    alpha0: f64,
    counters: &mut OpCounters,
) -> Result<StepOutcome> {
    params.check_alpha0(alpha0)?;
    let x = &point.x;
    let (m, n) = x.shape();
    let k = x.rank();
    if k > params.rank {
        return Err(Error::InvalidState(format!(
            "iterate has rank {k} above the bound {}",
            params.rank
        )));
    }
    check_cone_kappa1(params, cone, m, n)?;
    let g = -&point.grad;

    if k == params.rank {
        let source = DirectionSource::RestrictedConeFixed;
        let (u, v) = (x.u(), x.v());
        let g1 = u.transpose() * &g;
        let g2 = &g * v;
        let (s1, s2) = (g1.norm_squared(), g2.norm_squared());
        let left = geometry::prefer_left(s1, s2, tie_break);
        let decrease = if left { s1 } else { s2 };
        if decrease == 0.0 {
            return Ok(StepOutcome::stay(point, alpha0, source));
        }
        let sigma = Mat::from_diagonal(x.sigma());
        if left {
            // X + α UUᵀG = U (ΣVᵀ + α G₁)
            let base = &sigma * v.transpose();
            let ls = backtrack(point.f, decrease, alpha0, params, counters, |a| {
                obj.value(&(u * (&base + &g1 * a)))
            })?;
            counters.small_svd += 1;
            let small = svd_thin(&(&base + &g1 * ls.alpha), DEFAULT_RANK_TOL)?;
            let next = FactoredMatrix::from_parts_unchecked(
                u * small.u(),
                small.sigma().clone(),
                small.v().clone(),
            );
            Ok(outcome(
                point,
                next,
                ls.f_new,
                alpha0,
                ls.alpha,
                ls.backtracks,
                decrease,
                source,
            ))
        } else {
            // X + α GVVᵀ = (UΣ + α G₂) Vᵀ
            let base = u * &sigma;
            let ls = backtrack(point.f, decrease, alpha0, params, counters, |a| {
                obj.value(&((&base + &g2 * a) * v.transpose()))
            })?;
            counters.small_svd += 1;
            let small = svd_thin(&(&base + &g2 * ls.alpha), DEFAULT_RANK_TOL)?;
            let next = FactoredMatrix::from_parts_unchecked(
                small.u().clone(),
                small.sigma().clone(),
                v * small.v(),
            );
            Ok(outcome(
                point,
                next,
                ls.f_new,
                alpha0,
                ls.alpha,
                ls.backtracks,
                decrease,
                source,
            ))
        }
    } else {
        let source = DirectionSource::SparseCone;
        counters.cone_projections += 1;
        let bar = sparse_cone_project(cone, &g);
        if bar.is_zero() {
            return Ok(StepOutcome::stay(point, alpha0, source));
        }
        let sbar = bar.sigma()[0];
        let decrease = sbar * sbar;
        if k == 0 {
            let dir = bar.to_dense();
            let ls = backtrack(point.f, decrease, alpha0, params, counters, |a| {
                obj.value(&(&dir * a))
            })?;
            let next = FactoredMatrix::from_parts_unchecked(
                bar.u().clone(),
                DVector::from_element(1, ls.alpha * sbar),
                bar.v().clone(),
            );
            return Ok(outcome(
                point,
                next,
                ls.f_new,
                alpha0,
                ls.alpha,
                ls.backtracks,
                decrease,
                source,
            ));
        }
        let (q1, r1) = merge_basis(x.u(), bar.u(), counters)?;
        let (q2, r2) = merge_basis(x.v(), bar.v(), counters)?;
        let core = |a: f64| {
            let mut d = DVector::zeros(k + 1);
            d.rows_mut(0, k).copy_from(x.sigma());
            d[k] = a * sbar;
            &r1 * Mat::from_diagonal(&d) * r2.transpose()
        };
        let ls = backtrack(point.f, decrease, alpha0, params, counters, |a| {
            obj.value(&(&q1 * core(a) * q2.transpose()))
        })?;
        counters.small_svd += 1;
        let small = svd_thin(&core(ls.alpha), DEFAULT_RANK_TOL)?;
        let next = FactoredMatrix::from_parts_unchecked(
            &q1 * small.u(),
            small.sigma().clone(),
            &q2 * small.v(),
        );
        Ok(outcome(
            point,
            next,
            ls.f_new,
            alpha0,
            ls.alpha,
            ls.backtracks,
            decrease,
            source,
        ))
    }
}

/// Factored cheap rank-reduction map. The rank-`(r − 1)` truncation is the
/// stored SVD without its last triplet.
#[allow(clippy::too_many_arguments)]
pub fn crfdr_step_detailed(
    point: &EvalPoint,
    obj: &dyn Objective,
    params: &SolverParams,
    cone: SparseConeKind,
    tie_break: TieBreak,
    delta: f64,
    alpha0: f64,
    counters: &mut OpCounters,
) -> Result<MapOutcome> {
    let main = crfd_step_detailed(point, obj, params, cone, tie_break, alpha0, counters)?;
    let alt = if reduction_fires(&point.x, params.rank, delta) {
        let hat = EvalPoint::new(obj, point.x.truncate(params.rank - 1), counters)?;
        Some(crfd_step_detailed(
            &hat, obj, params, cone, tie_break, alpha0, counters,
        )?)
    } else {
        None
    };
    Ok(MapOutcome::combine(main, alt))
}
