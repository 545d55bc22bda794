//! Projections onto the tangent space, normal space, tangent cone and
//! restricted tangent cone of the bounded-rank variety, the three sparse
//! rank-one cones used by the cheap descent direction, and the Bouligand
//! stationarity measure.
//!
//! Every projection takes the base point `X` as a [`FactoredMatrix`], so the
//! orthogonal projectors onto its column and row spaces are `UUᵀ` and `VVᵀ`
//! and no pseudo-inverse is ever formed.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matcore::{self, FactoredMatrix, Mat, DEFAULT_RANK_TOL};

/// Selection rule for the restricted fixed-rank projection when
/// `‖UUᵀZ‖ = ‖ZVVᵀ‖`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Column-space candidate `UUᵀZ`.
    #[default]
    Left,
    /// Row-space candidate `ZVVᵀ`.
    Right,
}

/// Closed cones inside the rank-one matrices with trivial polar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparseConeKind {
    /// At most one nonzero entry.
    OneEntry,
    /// At most one nonzero row.
    OneRow,
    /// At most one nonzero column.
    OneColumn,
}

impl SparseConeKind {
    pub const ALL: [SparseConeKind; 3] = [Self::OneEntry, Self::OneRow, Self::OneColumn];
}

fn check_shape(x: &FactoredMatrix, z: &Mat) -> Result<()> {
    if x.shape() == z.shape() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: x.shape(),
            found: z.shape(),
        })
    }
}

fn check_rank(x: &FactoredMatrix, r: usize) -> Result<()> {
    if x.rank() > r {
        Err(Error::InvalidState(format!(
            "base point has rank {} above the bound {r}",
            x.rank()
        )))
    } else {
        Ok(())
    }
}

/// `UUᵀZ`
fn left_part(x: &FactoredMatrix, z: &Mat) -> Mat {
    x.u() * (x.u().transpose() * z)
}

/// `ZVVᵀ`
fn right_part(x: &FactoredMatrix, z: &Mat) -> Mat {
    (z * x.v()) * x.v().transpose()
}

/// Projection onto the tangent space of the fixed-rank manifold at `X`:
/// `UUᵀZ + ZVVᵀ − UUᵀZVVᵀ`.
pub fn proj_tangent_space(x: &FactoredMatrix, z: &Mat) -> Result<Mat> {
    check_shape(x, z)?;
    let ut_z = x.u().transpose() * z;
    let zv = z * x.v();
    let core = &ut_z * x.v();
    Ok(x.u() * &ut_z + &zv * x.v().transpose() - x.u() * core * x.v().transpose())
}

/// Projection onto the normal space, `Z − P_T(Z)`.
pub fn proj_normal_space(x: &FactoredMatrix, z: &Mat) -> Result<Mat> {
    Ok(z - proj_tangent_space(x, z)?)
}

/// The same normal projection in product form `(I − UUᵀ) Z (I − VVᵀ)`.
pub fn proj_normal_space_direct(x: &FactoredMatrix, z: &Mat) -> Result<Mat> {
    check_shape(x, z)?;
    let left = z - left_part(x, z);
    Ok(&left - right_part(x, &left))
}

/// Orthogonal splitting of `Z` at `X` into tangent and normal parts.
#[derive(Clone, Debug)]
pub struct TangentDecomposition {
    pub tangent_part: Mat,
    pub normal_part: Mat,
    pub at: FactoredMatrix,
}

impl TangentDecomposition {
    pub fn new(x: &FactoredMatrix, z: &Mat) -> Result<Self> {
        let tangent_part = proj_tangent_space(x, z)?;
        let normal_part = z - &tangent_part;
        Ok(Self {
            tangent_part,
            normal_part,
            at: x.clone(),
        })
    }
}

/// `‖UᵀZ‖² = ‖UUᵀZ‖²` against `‖ZV‖²`, compared exactly.
pub(crate) fn prefer_left(left_sq: f64, right_sq: f64, tie_break: TieBreak) -> bool {
    left_sq > right_sq || (left_sq == right_sq && tie_break == TieBreak::Left)
}

/// Projection onto the restricted tangent cone of the fixed-rank manifold:
/// the larger of `UUᵀZ` and `ZVVᵀ`, with `tie_break` deciding equality.
pub fn proj_restricted_fixed(x: &FactoredMatrix, z: &Mat, tie_break: TieBreak) -> Result<Mat> {
    check_shape(x, z)?;
    let utz = x.u().transpose() * z;
    let zv = z * x.v();
    Ok(
        if prefer_left(utz.norm_squared(), zv.norm_squared(), tie_break) {
            x.u() * utz
        } else {
            zv * x.v().transpose()
        },
    )
}

/// Best rank-`s` approximation of the normal part of `Z` at `X`. This is the
/// expensive truncated SVD of a potentially near-full-rank `m × n` matrix.
fn truncated_normal_part(x: &FactoredMatrix, z: &Mat, s: usize) -> Result<Mat> {
    if s == 0 {
        return Ok(Mat::zeros(z.nrows(), z.ncols()));
    }
    let normal = proj_normal_space_direct(x, z)?;
    Ok(matcore::svd_thin(&normal, DEFAULT_RANK_TOL)?
        .truncate(s)
        .to_dense())
}

/// Projection onto the tangent cone of the rank-≤`r` variety at `X`:
/// tangent-space part plus the rank-`(r − k)` truncation of the normal part.
pub fn proj_tangent_cone_variety(x: &FactoredMatrix, z: &Mat, r: usize) -> Result<Mat> {
    check_rank(x, r)?;
    Ok(proj_tangent_space(x, z)? + truncated_normal_part(x, z, r - x.rank())?)
}

/// Projection onto the restricted tangent cone of the rank-≤`r` variety.
pub fn proj_restricted_cone_variety(
    x: &FactoredMatrix,
    z: &Mat,
    r: usize,
    tie_break: TieBreak,
) -> Result<Mat> {
    check_rank(x, r)?;
    Ok(proj_restricted_fixed(x, z, tie_break)? + truncated_normal_part(x, z, r - x.rank())?)
}

fn unit(len: usize, i: usize, sign: f64) -> Mat {
    let mut e = Mat::zeros(len, 1);
    e[(i, 0)] = sign;
    e
}

/// Projection onto one of the sparse cones, returned directly as a rank-≤1
/// SVD. Ties go to the smallest row index, then the smallest column index.
pub fn sparse_cone_project(kind: SparseConeKind, z: &Mat) -> FactoredMatrix {
    let (m, n) = z.shape();
    match kind {
        SparseConeKind::OneEntry => {
            // Row-major scan with strict comparison keeps the first maximizer.
            let mut best = (0, 0, 0.0f64);
            for i in 0..m {
                for j in 0..n {
                    if z[(i, j)].abs() > best.2 {
                        best = (i, j, z[(i, j)].abs());
                    }
                }
            }
            let (i, j, mag) = best;
            if mag == 0.0 {
                return FactoredMatrix::zeros(m, n);
            }
            FactoredMatrix::from_parts_unchecked(
                unit(m, i, z[(i, j)].signum()),
                DVector::from_element(1, mag),
                unit(n, j, 1.0),
            )
        }
        SparseConeKind::OneRow => {
            let (i, nrm) = argmax_norm((0..m).map(|i| z.row(i).norm()));
            if nrm == 0.0 {
                return FactoredMatrix::zeros(m, n);
            }
            FactoredMatrix::from_parts_unchecked(
                unit(m, i, 1.0),
                DVector::from_element(1, nrm),
                Mat::from_iterator(n, 1, z.row(i).iter().map(|v| v / nrm)),
            )
        }
        SparseConeKind::OneColumn => {
            let (j, nrm) = argmax_norm((0..n).map(|j| z.column(j).norm()));
            if nrm == 0.0 {
                return FactoredMatrix::zeros(m, n);
            }
            FactoredMatrix::from_parts_unchecked(
                Mat::from_iterator(m, 1, z.column(j).iter().map(|v| v / nrm)),
                DVector::from_element(1, nrm),
                unit(n, j, 1.0),
            )
        }
    }
}

fn argmax_norm(norms: impl Iterator<Item = f64>) -> (usize, f64) {
    norms.enumerate().fold(
        (0, 0.0),
        |best, (i, v)| if v > best.1 { (i, v) } else { best },
    )
}

/// `min ‖P_C(X)‖²` over the unit sphere: `1/(mn)`, `1/m`, `1/n`.
pub fn cone_unit_sphere_constant(kind: SparseConeKind, m: usize, n: usize) -> f64 {
    match kind {
        SparseConeKind::OneEntry => 1.0 / (m * n) as f64,
        SparseConeKind::OneRow => 1.0 / m as f64,
        SparseConeKind::OneColumn => 1.0 / n as f64,
    }
}

/// Bouligand stationarity measure `‖P_{T(X)}(−∇f(X))‖` on the rank-≤`r`
/// variety. When `rank X < r` this needs the large truncated SVD; solvers
/// use it only for diagnostics.
pub fn stationarity_measure(x: &FactoredMatrix, grad: &Mat, r: usize) -> Result<f64> {
    check_shape(x, grad)?;
    Ok(proj_tangent_cone_variety(x, &(-grad), r)?.norm())
}
