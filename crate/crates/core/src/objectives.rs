//! Differentiable objectives on `m × n` matrices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matcore::{
    self, ensure_finite, ensure_same_shape, FactoredMatrix, Mat, DEFAULT_RANK_TOL,
};

/// A cost function with locally Lipschitz gradient.
///
/// Implementations must be pure: repeated calls with the same argument
/// return bit-identical results. Solvers rely on this for reproducible
/// traces and never check it.
pub trait Objective: Send + Sync {
    fn shape(&self) -> (usize, usize);

    fn value(&self, x: &Mat) -> f64;

    fn gradient(&self, x: &Mat) -> Mat;

    /// Global Lipschitz constant of the gradient, when known.
    fn lipschitz_hint(&self) -> Option<f64> {
        None
    }
}

/// `f(X) = ½‖X − A‖²`.
#[derive(Clone, Debug)]
pub struct ApproxProblem {
    target: Mat,
}

impl ApproxProblem {
    pub fn new(target: Mat) -> Result<Self> {
        if target.nrows() == 0 || target.ncols() == 0 {
            return Err(Error::InvalidInput("target matrix is empty".into()));
        }
        ensure_finite(&target, "target")?;
        Ok(Self { target })
    }

    pub fn target(&self) -> &Mat {
        &self.target
    }

    /// Global minimizer over the rank-≤`r` matrices (truncated SVD of `A`).
    pub fn optimum(&self, r: usize) -> FactoredMatrix {
        matcore::svd_thin(&self.target, DEFAULT_RANK_TOL)
            .expect("target validated finite")
            .truncate(r)
    }

    /// `½ Σ_{j>r} σ_j(A)²`.
    pub fn optimal_value(&self, r: usize) -> f64 {
        0.5 * matcore::singular_values(&self.target)
            .iter()
            .skip(r)
            .map(|s| s * s)
            .sum::<f64>()
    }
}

impl Objective for ApproxProblem {
    fn shape(&self) -> (usize, usize) {
        self.target.shape()
    }

    fn value(&self, x: &Mat) -> f64 {
        0.5 * (x - &self.target).norm_squared()
    }

    fn gradient(&self, x: &Mat) -> Mat {
        x - &self.target
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// `f(X) = ½‖P_Ω(X − A)‖²` for a 0/1 observation mask `Ω`.
#[derive(Clone, Debug)]
pub struct CompletionProblem {
    target: Mat,
    mask: Mat,
}

impl CompletionProblem {
    pub fn new(target: Mat, mask: Mat) -> Result<Self> {
        ensure_same_shape(&target, &mask)?;
        if target.is_empty() {
            return Err(Error::InvalidInput("target matrix is empty".into()));
        }
        ensure_finite(&target, "target")?;
        if mask.iter().any(|&w| w != 0.0 && w != 1.0) {
            return Err(Error::InvalidInput("mask entries must be 0 or 1".into()));
        }
        Ok(Self { target, mask })
    }

    pub fn target(&self) -> &Mat {
        &self.target
    }

    pub fn mask(&self) -> &Mat {
        &self.mask
    }

    pub fn observed(&self) -> usize {
        self.mask.iter().filter(|&&w| w == 1.0).count()
    }
}

impl Objective for CompletionProblem {
    fn shape(&self) -> (usize, usize) {
        self.target.shape()
    }

    fn value(&self, x: &Mat) -> f64 {
        0.5 * (x - &self.target).component_mul(&self.mask).norm_squared()
    }

    fn gradient(&self, x: &Mat) -> Mat {
        (x - &self.target).component_mul(&self.mask)
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(1.0)
    }
}

const CHECK_SEED: u64 = 0x6772_6164;
const MAX_COORDINATE_DIRECTIONS: usize = 32;
const RANDOM_DIRECTIONS: usize = 5;

/// Largest relative discrepancy between `⟨∇f(X), D⟩` and the central
/// difference `(f(X + hD) − f(X − hD)) / 2h`, over evenly spaced coordinate
/// directions and five fixed random unit directions. Each discrepancy is
/// scaled by `‖∇f(X)‖ ‖D‖`.
pub fn finite_diff_check(obj: &dyn Objective, x: &Mat, step: f64) -> Result<f64> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "step must be positive, got {step}"
        )));
    }
    let (m, n) = x.shape();
    let grad = obj.gradient(x);
    ensure_same_shape(x, &grad)?;
    let gnorm = grad.norm();

    let mut directions = Vec::new();
    let count = (m * n).min(MAX_COORDINATE_DIRECTIONS);
    for t in 0..count {
        let idx = t * (m * n) / count;
        let mut d = Mat::zeros(m, n);
        d[(idx / n, idx % n)] = 1.0;
        directions.push(d);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(CHECK_SEED);
    for _ in 0..RANDOM_DIRECTIONS {
        let d = matcore::gaussian(m, n, &mut rng);
        let nrm = d.norm();
        directions.push(d / nrm);
    }

    let mut worst = 0.0f64;
    for d in &directions {
        let fd = (obj.value(&(x + d * step)) - obj.value(&(x - d * step))) / (2.0 * step);
        let exact = grad.dot(d);
        let scale = (gnorm * d.norm()).max(1e-12);
        worst = worst.max((fd - exact).abs() / scale);
    }
    Ok(worst)
}

/// Sampled estimate of `sup ‖∇f(X) − ∇f(Y)‖ / ‖X − Y‖` over the closed ball
/// of the given radius. A known global constant takes precedence.
pub fn local_lipschitz_estimate(
    obj: &dyn Objective,
    center: &Mat,
    radius: f64,
    samples: usize,
) -> Result<f64> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if let Some(hint) = obj.lipschitz_hint() {
        return Ok(hint);
    }
    if samples == 0 {
        return Err(Error::InvalidInput(
            "no Lipschitz hint and zero samples requested".into(),
        ));
    }
    let (m, n) = center.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(CHECK_SEED ^ 0x4c);
    let point = |rng: &mut ChaCha8Rng| {
        let d = matcore::gaussian(m, n, rng);
        let t: f64 = rand::Rng::random(rng);
        center + d.normalize() * (radius * t)
    };
    let mut best = 0.0f64;
    for _ in 0..samples {
        let x = point(&mut rng);
        let y = point(&mut rng);
        let dist = (&x - &y).norm();
        if dist > 0.0 {
            best = best.max((obj.gradient(&x) - obj.gradient(&y)).norm() / dist);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::gaussian;
    use nalgebra::DVector;

    /// Non-quadratic objective without a Lipschitz hint:
    /// `f(X) = Σ cosh(x_ij)`.
    struct CoshSum;

    impl Objective for CoshSum {
        fn shape(&self) -> (usize, usize) {
            (3, 3)
        }
        fn value(&self, x: &Mat) -> f64 {
            x.iter().map(|v| v.cosh()).sum()
        }
        fn gradient(&self, x: &Mat) -> Mat {
            x.map(f64::sinh)
        }
    }

    fn random_mask(m: usize, n: usize, rng: &mut ChaCha8Rng) -> Mat {
        Mat::from_fn(m, n, |_, _| {
            if rand::Rng::random::<f64>(rng) < 0.5 {
                1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn approx_gradient_is_exact_at_identity() {
        let obj = ApproxProblem::new(Mat::zeros(2, 2)).unwrap();
        let err = finite_diff_check(&obj, &Mat::identity(2, 2), 1e-6).unwrap();
        assert!(err <= 1e-8, "{err}");
    }

    #[test]
    fn completion_gradient_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = gaussian(5, 4, &mut rng);
        let obj = CompletionProblem::new(a, random_mask(5, 4, &mut rng)).unwrap();
        let x = gaussian(5, 4, &mut rng);
        let err = finite_diff_check(&obj, &x, 1e-6 * (1.0 + x.norm())).unwrap();
        assert!(err <= 1e-6, "{err}");
    }

    #[test]
    fn nonquadratic_gradient_check() {
        let x = Mat::from_fn(3, 3, |i, j| 0.3 * i as f64 - 0.2 * j as f64);
        let err = finite_diff_check(&CoshSum, &x, 1e-6 * (1.0 + x.norm())).unwrap();
        assert!(err <= 1e-6, "{err}");
    }

    #[test]
    fn zero_step_rejected() {
        let obj = ApproxProblem::new(Mat::zeros(2, 2)).unwrap();
        assert!(finite_diff_check(&obj, &Mat::identity(2, 2), 0.0).is_err());
    }

    #[test]
    fn wrong_gradient_is_flagged() {
        struct Broken;
        impl Objective for Broken {
            fn shape(&self) -> (usize, usize) {
                (2, 2)
            }
            fn value(&self, x: &Mat) -> f64 {
                0.5 * x.norm_squared()
            }
            fn gradient(&self, x: &Mat) -> Mat {
                x * 2.0
            }
        }
        let err = finite_diff_check(&Broken, &Mat::identity(2, 2), 1e-6).unwrap();
        assert!(err > 0.1);
    }

    #[test]
    fn lipschitz_estimates() {
        let obj = ApproxProblem::new(Mat::zeros(3, 3)).unwrap();
        assert_eq!(
            local_lipschitz_estimate(&obj, &Mat::zeros(3, 3), 1.0, 0).unwrap(),
            1.0
        );

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = gaussian(3, 3, &mut rng);
        let mask = random_mask(3, 3, &mut rng);
        let obj = CompletionProblem::new(a.clone(), mask.clone()).unwrap();
        assert!(local_lipschitz_estimate(&obj, &Mat::zeros(3, 3), 2.0, 10).unwrap() <= 1.0);

        // Sampled path for the masked identity, bypassing the hint.
        struct NoHint(CompletionProblem);
        impl Objective for NoHint {
            fn shape(&self) -> (usize, usize) {
                self.0.shape()
            }
            fn value(&self, x: &Mat) -> f64 {
                self.0.value(x)
            }
            fn gradient(&self, x: &Mat) -> Mat {
                self.0.gradient(x)
            }
        }
        let est = local_lipschitz_estimate(&NoHint(obj), &Mat::zeros(3, 3), 2.0, 200).unwrap();
        assert!(est > 0.0 && est <= 1.0 + 1e-12, "{est}");

        assert!(local_lipschitz_estimate(&CoshSum, &Mat::zeros(3, 3), 1.0, 0).is_err());
        assert!(local_lipschitz_estimate(&CoshSum, &Mat::zeros(3, 3), 0.0, 10).is_err());
        // sinh' = cosh ≤ cosh(1) on the unit ball.
        let est = local_lipschitz_estimate(&CoshSum, &Mat::zeros(3, 3), 1.0, 200).unwrap();
        assert!(est > 1.0 && est <= 1f64.cosh());
    }

    #[test]
    fn descent_lemma_with_estimated_constant() {
        let center = Mat::zeros(3, 3);
        let l = local_lipschitz_estimate(&CoshSum, &center, 1.0, 500).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let x = gaussian(3, 3, &mut rng).normalize() * 0.4;
            let y = gaussian(3, 3, &mut rng).normalize() * 0.4;
            let gap = CoshSum.value(&y) - CoshSum.value(&x) - CoshSum.gradient(&x).dot(&(&y - &x));
            // Small slack covers the gap between the sampled and true constant.
            assert!(gap <= 0.5 * l * (&y - &x).norm_squared() * 1.05);
        }
    }

    #[test]
    fn approx_optimum_is_truncation() {
        let a = Mat::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let obj = ApproxProblem::new(a).unwrap();
        assert!((obj.optimal_value(2) - 0.5).abs() < 1e-14);
        let opt = obj.optimum(2);
        assert!((obj.value(&opt.to_dense()) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn full_mask_matches_approx() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = gaussian(4, 3, &mut rng);
        let c = CompletionProblem::new(a.clone(), Mat::from_element(4, 3, 1.0)).unwrap();
        let p = ApproxProblem::new(a).unwrap();
        let x = gaussian(4, 3, &mut rng);
        assert_eq!(c.value(&x), p.value(&x));
    }

    #[test]
    fn mask_validation() {
        let bad = Mat::from_element(2, 2, 0.5);
        assert!(CompletionProblem::new(Mat::zeros(2, 2), bad).is_err());
        assert!(CompletionProblem::new(Mat::zeros(2, 2), Mat::zeros(3, 2)).is_err());
    }
}
