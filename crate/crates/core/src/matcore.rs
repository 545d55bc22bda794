//! Dense-matrix primitives and factorizations with explicit numerical-rank
//! semantics.
//!
//! Every iterate produced by the solvers is a [`FactoredMatrix`]: a thin SVD
//! `U diag(σ) Vᵀ` with orthonormal factors and strictly positive,
//! nonincreasing singular values. The zero matrix is the factorization with
//! `k = 0` (empty factors), which lets the factored algorithms detect the
//! "nothing to merge" case without inspecting entries.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dense real matrix. Row-major only for external text I/O.
pub type Mat = DMatrix<f64>;

/// Relative spectral cutoff: singular values `σ_j ≤ DEFAULT_RANK_TOL · σ_1`
/// are treated as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Orthonormality tolerance for factors of an `m × n` matrix.
pub fn default_orth_tol(m: usize, n: usize) -> f64 {
    1e-10 * (m.max(n) as f64).sqrt()
}

pub fn ensure_finite(a: &Mat, what: &str) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} has non-finite entries"
        )))
    }
}

pub fn ensure_same_shape(a: &Mat, b: &Mat) -> Result<()> {
    if a.shape() == b.shape() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a.shape(),
            found: b.shape(),
        })
    }
}

/// Frobenius inner product `⟨A, B⟩ = tr(Bᵀ A)`.
pub fn inner(a: &Mat, b: &Mat) -> Result<f64> {
    ensure_same_shape(a, b)?;
    Ok(a.dot(b))
}

pub fn frobenius(a: &Mat) -> f64 {
    a.norm()
}

/// Thin SVD `U diag(σ) Vᵀ` of a matrix of rank `k ≤ min(m, n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredMatrix {
    u: Mat,
    sigma: DVector<f64>,
    v: Mat,
}

impl FactoredMatrix {
    /// The zero `m × n` matrix (empty factors).
    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            u: Mat::zeros(m, 0),
            sigma: DVector::zeros(0),
            v: Mat::zeros(n, 0),
        }
    }

    /// Builds a factorization after checking shapes, sign and ordering of
    /// `sigma`, and orthonormality of both factors.
    pub fn from_parts(u: Mat, sigma: DVector<f64>, v: Mat) -> Result<Self> {
        let k = sigma.len();
        if u.ncols() != k || v.ncols() != k {
            return Err(Error::InvalidInput(format!(
                "factor widths {} and {} do not match {} singular values",
                u.ncols(),
                v.ncols(),
                k
            )));
        }
        if k > u.nrows().min(v.nrows()) {
            return Err(Error::InvalidInput(format!(
                "rank {k} exceeds min({}, {})",
                u.nrows(),
                v.nrows()
            )));
        }
        ensure_finite(&u, "U")?;
        ensure_finite(&v, "V")?;
        if sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidInput(
                "singular values must be finite and positive".into(),
            ));
        }
        if sigma.as_slice().windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(
                "singular values must be nonincreasing".into(),
            ));
        }
        let f = Self { u, sigma, v };
        let tol = default_orth_tol(f.nrows(), f.ncols());
        if f.orthonormality_defect() > tol {
            return Err(Error::InvalidInput(format!(
                "factors are not orthonormal within {tol:e}"
            )));
        }
        Ok(f)
    }

    pub(crate) fn from_parts_unchecked(u: Mat, sigma: DVector<f64>, v: Mat) -> Self {
        debug_assert_eq!(u.ncols(), sigma.len());
        debug_assert_eq!(v.ncols(), sigma.len());
        Self { u, sigma, v }
    }

    pub fn nrows(&self) -> usize {
        self.u.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.v.nrows()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows(), self.ncols())
    }

    /// Stored rank `k`.
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    pub fn u(&self) -> &Mat {
        &self.u
    }

    pub fn v(&self) -> &Mat {
        &self.v
    }

    pub fn sigma(&self) -> &DVector<f64> {
        &self.sigma
    }

    /// `σ_j` for 1-based `j`, zero beyond the stored rank.
    pub fn singular_value(&self, j: usize) -> f64 {
        if j == 0 || j > self.rank() {
            0.0
        } else {
            self.sigma[j - 1]
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.sigma.norm()
    }

    /// Expands to the dense product `U (diag(σ) Vᵀ)`.
    pub fn to_dense(&self) -> Mat {
        let mut sv = self.v.transpose();
        for (mut row, s) in sv.row_iter_mut().zip(self.sigma.iter()) {
            row *= *s;
        }
        &self.u * sv
    }

    /// Keeps the leading `min(k, s)` triplets: a metric projection onto the
    /// matrices of rank at most `s`.
    pub fn truncate(&self, s: usize) -> Self {
        let keep = s.min(self.rank());
        Self {
            u: self.u.columns(0, keep).into_owned(),
            sigma: self.sigma.rows(0, keep).into_owned(),
            v: self.v.columns(0, keep).into_owned(),
        }
    }

    /// Largest deviation of `UᵀU` and `VᵀV` from the identity (max-abs).
    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.rank();
        let id = Mat::identity(k, k);
        let du = (self.u.transpose() * &self.u - &id).amax();
        let dv = (self.v.transpose() * &self.v - &id).amax();
        du.max(dv)
    }
}

/// Free-function form of [`FactoredMatrix::truncate`].
pub fn truncate(f: &FactoredMatrix, s: usize) -> FactoredMatrix {
    f.truncate(s)
}

const JACOBI_EPS: f64 = 1e-15;
const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided Jacobi SVD of a matrix with `m >= n`: orthogonalizes the
/// columns of `A V` by plane rotations. Returns `(A V, V)`.
fn jacobi_columns(a: &Mat) -> (Mat, Mat) {
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = Mat::identity(n, n);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= JACOBI_EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut w, &mut v] {
                    for i in 0..mat.nrows() {
                        let (xp, xq) = (mat[(i, p)], mat[(i, q)]);
                        mat[(i, p)] = c * xp - s * xq;
                        mat[(i, q)] = s * xp + c * xq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (w, v)
}

/// Raw SVD sorted by nonincreasing singular value: `(U, σ, V)` with
/// `min(m, n)` columns. Columns of `U` belonging to zero singular values
/// are zero.
fn sorted_svd(a: &Mat) -> (Mat, Vec<f64>, Mat) {
    let (m, n) = a.shape();
    if m < n {
        let (u, s, v) = sorted_svd(&a.transpose());
        return (v, s, u);
    }
    if n == 0 {
        return (Mat::zeros(m, 0), Vec::new(), Mat::zeros(n, 0));
    }
    let (w, v) = jacobi_columns(a);
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut us = Mat::zeros(m, n);
    let mut vs = Mat::zeros(n, n);
    let mut sv = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        if norms[src] > 0.0 {
            us.set_column(dst, &(w.column(src) / norms[src]));
        }
        vs.set_column(dst, &v.column(src));
        sv.push(norms[src]);
    }
    (us, sv, vs)
}

/// Thin SVD truncated at the numerical rank: keeps `σ_j > rank_tol · σ_1`.
pub fn svd_thin(a: &Mat, rank_tol: f64) -> Result<FactoredMatrix> {
    ensure_finite(a, "matrix")?;
    let (m, n) = a.shape();
    let (u, s, v) = sorted_svd(a);
    let s1 = s.first().copied().unwrap_or(0.0);
    if s1 == 0.0 {
        return Ok(FactoredMatrix::zeros(m, n));
    }
    let k = s.iter().take_while(|&&x| x > rank_tol * s1).count();
    Ok(FactoredMatrix::from_parts_unchecked(
        u.columns(0, k).into_owned(),
        DVector::from_iterator(k, s.into_iter().take(k)),
        v.columns(0, k).into_owned(),
    ))
}

/// All `min(m, n)` singular values, nonincreasing.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    sorted_svd(a).1
}

/// Householder QR with column pivoting, stopped at the detected numerical
/// rank: `M P = Q R` with `Q` of width `q` and `R` of size `q × p`.
#[derive(Clone, Debug)]
pub struct PivotedQR {
    pub q: Mat,
    /// Upper triangular in the permuted column order.
    pub r: Mat,
    /// Column `j` of `M P` is column `perm[j]` of `M`.
    pub perm: Vec<usize>,
}

impl PivotedQR {
    pub fn rank(&self) -> usize {
        self.q.ncols()
    }

    /// `R Pᵀ`, so that `M ≈ Q · r_unpermuted()`.
    pub fn r_unpermuted(&self) -> Mat {
        let mut out = Mat::zeros(self.r.nrows(), self.r.ncols());
        for (j, &src) in self.perm.iter().enumerate() {
            out.set_column(src, &self.r.column(j));
        }
        out
    }

    pub fn reconstruct(&self) -> Mat {
        &self.q * self.r_unpermuted()
    }
}

/// Householder QR with column pivoting.
/// Elimination stops once the largest remaining column norm falls to
/// `rank_tol` times the largest column norm of `M`.
pub fn qr_col_pivot(m_in: &Mat, rank_tol: f64) -> Result<PivotedQR> {
    ensure_finite(m_in, "matrix")?;
    let (m, p) = m_in.shape();
    let mut a = m_in.clone();
    let mut perm: Vec<usize> = (0..p).collect();
    let scale = (0..p).map(|j| a.column(j).norm()).fold(0.0, f64::max);
    let mut reflectors: Vec<DVector<f64>> = Vec::new();

    let steps = m.min(p);
    for k in 0..steps {
        // Trailing column norms are recomputed each step; p is small.
        let (best, best_norm) = (k..p).map(|j| (j, a.view((k, j), (m - k, 1)).norm())).fold(
            (k, -1.0),
            |acc, (j, nrm)| if nrm > acc.1 { (j, nrm) } else { acc },
        );
        if scale == 0.0 || best_norm <= rank_tol * scale {
            break;
        }
        a.swap_columns(k, best);
        perm.swap(k, best);

        let x = a.view((k, k), (m - k, 1)).into_owned();
        let alpha = if x[0] >= 0.0 { -best_norm } else { best_norm };
        let mut v = DVector::from_column_slice(x.as_slice());
        v[0] -= alpha;
        let vnorm = v.norm();
        if vnorm > 0.0 {
            v /= vnorm;
            let mut block = a.view_mut((k, k), (m - k, p - k));
            let w = block.tr_mul(&v);
            block -= &v * w.transpose() * 2.0;
        }
        for i in (k + 1)..m {
            a[(i, k)] = 0.0;
        }
        a[(k, k)] = alpha;
        reflectors.push(v);
    }

    let q_rank = reflectors.len();
    let mut q = Mat::identity(m, q_rank);
    for (k, v) in reflectors.iter().enumerate().rev() {
        let mut block = q.view_mut((k, 0), (m - k, q_rank));
        let w = block.tr_mul(v);
        block -= v * w.transpose() * 2.0;
    }
    let r = a.rows(0, q_rank).upper_triangle();
    Ok(PivotedQR { q, r, perm })
}

/// `m × n` matrix with independent standard-normal entries.
pub fn gaussian<R: rand::Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Mat {
    use rand_distr::{Distribution, StandardNormal};
    Mat::from_fn(m, n, |_, _| StandardNormal.sample(rng))
}

/// Random `m × n` matrix of rank exactly `k` (almost surely), returned in
/// factored form. Singular values are spread over roughly `[0.1, 3]`.
pub fn random_factored<R: rand::Rng + ?Sized>(
    m: usize,
    n: usize,
    k: usize,
    rng: &mut R,
) -> FactoredMatrix {
    if k == 0 {
        return FactoredMatrix::zeros(m, n);
    }
    let a = gaussian(m, k, rng) * gaussian(k, n, rng);
    let f = svd_thin(&a, DEFAULT_RANK_TOL).expect("gaussian factors are finite");
    f.truncate(k)
}

fn fmt_scalar(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `"m n"` followed by `m` lines of `n` scalars (17 significant digits).
pub fn write_dense<W: Write>(w: &mut W, a: &Mat) -> Result<()> {
    writeln!(w, "{} {}", a.nrows(), a.ncols())?;
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|j| fmt_scalar(a[(i, j)])).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    Ok(())
}

struct Tokens<R> {
    reader: R,
    buf: Vec<String>,
}

impl<R: BufRead> Tokens<R> {
    fn new(reader: R) -> Self {
        Self {
            reader,
            buf: Vec::new(),
        }
    }

    fn next(&mut self) -> Result<Option<String>> {
        while self.buf.is_empty() {
            let mut line = String::new();
            if self.reader.read_line(&mut line)? == 0 {
                return Ok(None);
            }
            self.buf = line.split_whitespace().rev().map(str::to_owned).collect();
        }
        Ok(self.buf.pop())
    }

    fn expect<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let tok = self
            .next()?
            .ok_or_else(|| Error::Parse(format!("unexpected end of input reading {what}")))?;
        tok.parse()
            .map_err(|_| Error::Parse(format!("cannot parse {what} from {tok:?}")))
    }

    fn block(&mut self, allow_empty: bool) -> Result<Mat> {
        let m: usize = self.expect("row count")?;
        let n: usize = self.expect("column count")?;
        if !allow_empty && (m == 0 || n == 0) {
            return Err(Error::Parse(format!("empty matrix {m}x{n}")));
        }
        let mut a = Mat::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                let x: f64 = self.expect("matrix entry")?;
                if !x.is_finite() {
                    return Err(Error::Parse(format!("non-finite entry at ({i}, {j})")));
                }
                a[(i, j)] = x;
            }
        }
        Ok(a)
    }
}

/// Reads one dense block written by [`write_dense`]. Entries may be spread
/// over lines arbitrarily; only the token order matters.
pub fn read_dense<R: BufRead>(r: R) -> Result<Mat> {
    Tokens::new(r).block(false)
}

/// Writes `U`, then `σ` as a `1 × k` block, then `V`.
pub fn write_factored<W: Write>(w: &mut W, f: &FactoredMatrix) -> Result<()> {
    write_dense(w, f.u())?;
    write_dense(w, &Mat::from_row_slice(1, f.rank(), f.sigma().as_slice()))?;
    write_dense(w, f.v())
}

pub fn read_factored<R: BufRead>(r: R) -> Result<FactoredMatrix> {
    let mut t = Tokens::new(r);
    let u = t.block(true)?;
    let s = t.block(true)?;
    let v = t.block(true)?;
    if s.nrows() != 1 {
        return Err(Error::Parse("singular values must be a single row".into()));
    }
    FactoredMatrix::from_parts(u, DVector::from_column_slice(s.as_slice()), v)
}

pub fn save_dense(path: &std::path::Path, a: &Mat) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_dense(&mut w, a)?;
    w.flush()?;
    Ok(())
}

pub fn load_dense(path: &std::path::Path) -> Result<Mat> {
    read_dense(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn randn(m: usize, n: usize, seed: u64) -> Mat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Mat::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng))
    }

    #[test]
    fn svd_of_zero_is_empty() {
        let f = svd_thin(&Mat::zeros(3, 2), DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank(), 0);
        assert_eq!(f.shape(), (3, 2));
        assert_eq!(f.to_dense(), Mat::zeros(3, 2));
    }

    #[test]
    fn svd_of_diagonal() {
        let a = Mat::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let f = svd_thin(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank(), 3);
        for (got, want) in f.sigma().iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn svd_of_outer_product() {
        let u = DVector::from_vec(vec![1.0, 2.0]);
        let v = DVector::from_vec(vec![2.0, 0.0, 1.0]);
        let a = &u * v.transpose();
        let f = svd_thin(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank(), 1);
        assert!((f.sigma()[0] - 5.0).abs() < 1e-13);
        assert!((f.to_dense() - a).norm() < 1e-13);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut a = Mat::zeros(2, 2);
        a[(0, 1)] = f64::NAN;
        assert!(matches!(
            svd_thin(&a, DEFAULT_RANK_TOL),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn truncate_diagonal() {
        let a = Mat::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let f = svd_thin(&a, DEFAULT_RANK_TOL).unwrap();
        let t = truncate(&f, 2);
        assert_eq!(t.rank(), 2);
        let want = Mat::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 0.0]));
        assert!((t.to_dense() - want).norm() < 1e-13);
        assert!(truncate(&f, 0).is_zero());
    }

    #[test]
    fn truncate_residual_is_the_tail() {
        let a = randn(5, 3, 7) * randn(3, 4, 8);
        let f = svd_thin(&a, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(f.rank(), 3);
        let full = singular_values(&a);
        let res = (&a - truncate(&f, 2).to_dense()).norm();
        assert!((res - full[2]).abs() < 1e-10 * full[0]);
    }

    #[test]
    fn qr_detects_duplicate_column() {
        let mut m = Mat::zeros(3, 2);
        m[(0, 0)] = 1.0;
        m[(0, 1)] = 1.0;
        let qr = qr_col_pivot(&m, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(qr.rank(), 1);
        assert!((qr.reconstruct() - m).norm() < 1e-14);
    }

    #[test]
    fn qr_of_identity() {
        let m = Mat::identity(3, 3);
        let qr = qr_col_pivot(&m, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(qr.rank(), 3);
        // Q is a signed permutation.
        for x in qr.q.iter() {
            assert!(x.abs() < 1e-15 || (x.abs() - 1.0).abs() < 1e-15);
        }
        assert!((qr.reconstruct() - m).norm() < 1e-14);
    }

    #[test]
    fn qr_merges_orthogonal_bases() {
        let u = DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]) / 2f64.sqrt();
        let ubar = DVector::from_vec(vec![1.0, -1.0, 1.0, 0.0]) / 3f64.sqrt();
        let m = Mat::from_columns(&[u.clone(), ubar.clone()]);
        let qr = qr_col_pivot(&m, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(qr.rank(), 2);
        let proj_q = &qr.q * qr.q.transpose();
        let proj_ref = &u * u.transpose() + &ubar * ubar.transpose();
        assert!((proj_q - proj_ref).norm() < 1e-14);
    }

    #[test]
    fn qr_diagonal_is_nonincreasing() {
        let m = randn(6, 4, 3);
        let qr = qr_col_pivot(&m, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(qr.rank(), 4);
        let d: Vec<f64> = (0..4).map(|i| qr.r[(i, i)].abs()).collect();
        assert!(d.windows(2).all(|w| w[0] >= w[1] - 1e-14));
        assert!((qr.reconstruct() - &m).norm() < 1e-12);
        assert!((qr.q.transpose() * &qr.q - Mat::identity(4, 4)).amax() < 1e-14);
    }

    #[test]
    fn singular_values_basic() {
        assert_eq!(singular_values(&Mat::zeros(2, 3)), vec![0.0, 0.0]);
        let a = Mat::from_diagonal(&DVector::from_vec(vec![2.0, -5.0]));
        let s = singular_values(&a);
        assert!((s[0] - 5.0).abs() < 1e-15 && (s[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn inner_products() {
        let i2 = Mat::identity(2, 2);
        assert_eq!(inner(&i2, &i2).unwrap(), 2.0);
        let a = randn(3, 4, 1);
        let b = randn(3, 4, 2);
        assert_eq!(inner(&a, &b).unwrap(), inner(&b, &a).unwrap());
        assert!(matches!(
            inner(&a, &randn(4, 3, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
        let s2: f64 = singular_values(&a).iter().map(|s| s * s).sum();
        assert!((frobenius(&a).powi(2) - s2).abs() < 1e-12 * s2);
    }

    #[test]
    fn from_parts_validates() {
        let u = Mat::identity(3, 2);
        let v = Mat::identity(2, 2);
        assert!(FactoredMatrix::from_parts(
            u.clone(),
            DVector::from_vec(vec![1.0, 2.0]),
            v.clone()
        )
        .is_err());
        assert!(FactoredMatrix::from_parts(
            u.clone(),
            DVector::from_vec(vec![2.0, 0.0]),
            v.clone()
        )
        .is_err());
        assert!(
            FactoredMatrix::from_parts(u * 2.0, DVector::from_vec(vec![2.0, 1.0]), v.clone())
                .is_err()
        );
        assert!(FactoredMatrix::from_parts(
            Mat::identity(3, 2),
            DVector::from_vec(vec![2.0, 1.0]),
            v
        )
        .is_ok());
    }

    #[test]
    fn text_format_round_trip() {
        let a = randn(3, 2, 11);
        let mut buf = Vec::new();
        write_dense(&mut buf, &a).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("3 2\n"));
        assert_eq!(text.lines().count(), 4);
        assert_eq!(read_dense(&buf[..]).unwrap(), a);

        let f = svd_thin(&a, DEFAULT_RANK_TOL).unwrap();
        let mut buf = Vec::new();
        write_factored(&mut buf, &f).unwrap();
        assert_eq!(read_factored(&buf[..]).unwrap(), f);

        let z = FactoredMatrix::zeros(3, 2);
        let mut buf = Vec::new();
        write_factored(&mut buf, &z).unwrap();
        assert_eq!(read_factored(&buf[..]).unwrap(), z);
    }

    #[test]
    fn read_dense_reports_truncation() {
        assert!(matches!(
            read_dense("2 2\n1 2\n3\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            read_dense("2 x\n".as_bytes()),
            Err(Error::Parse(_))
        ));
    }

    proptest! {
        #[test]
        fn eckart_young(m in 1usize..7, n in 1usize..7, seed in any::<u64>()) {
            let a = randn(m, n, seed);
            let f = svd_thin(&a, DEFAULT_RANK_TOL).unwrap();
            prop_assert!(f.orthonormality_defect() < default_orth_tol(m, n));
            prop_assert!(f.sigma().as_slice().windows(2).all(|w| w[0] >= w[1]));
            let s = singular_values(&a);
            let total: f64 = s.iter().map(|x| x * x).sum();
            for keep in 0..=m.min(n) {
                let tail: f64 = s[keep..].iter().map(|x| x * x).sum();
                let res = (&a - truncate(&f, keep).to_dense()).norm_squared();
                prop_assert!((res - tail).abs() <= 1e-10 * total.max(1e-300));
            }
        }

        #[test]
        fn singular_values_are_one_lipschitz(m in 1usize..7, n in 1usize..7, seed in any::<u64>()) {
            let x = randn(m, n, seed);
            let y = randn(m, n, seed.wrapping_add(1)) * 0.3 + &x;
            let d = (&x - &y).norm();
            for (a, b) in singular_values(&x).iter().zip(singular_values(&y)) {
                prop_assert!((a - b).abs() <= d * (1.0 + 1e-12));
            }
        }
    }
}
