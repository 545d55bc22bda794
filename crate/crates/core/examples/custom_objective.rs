//! Plugging in a user objective: entrywise-weighted approximation
//! `½ Σ w_ij (x_ij − a_ij)²`.
//!
//! ```text
//! cargo run --example custom_objective
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lowrank_opt::matcore::{gaussian, Mat};
use lowrank_opt::objectives::{finite_diff_check, local_lipschitz_estimate};
use lowrank_opt::solvers::erfdr_run;
use lowrank_opt::{DeltaSchedule, FactoredMatrix, Objective, Scheme, SolverParams, SparseConeKind};

struct Weighted {
    target: Mat,
    weights: Mat,
}

impl Objective for Weighted {
    fn shape(&self) -> (usize, usize) {
        self.target.shape()
    }

    fn value(&self, x: &Mat) -> f64 {
        0.5 * (x - &self.target)
            .component_mul(&self.weights)
            .dot(&(x - &self.target))
    }

    fn gradient(&self, x: &Mat) -> Mat {
        (x - &self.target).component_mul(&self.weights)
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(self.weights.max())
    }
}

fn main() -> lowrank_opt::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (m, n) = (12, 10);
    let target = gaussian(m, 2, &mut rng) * gaussian(2, n, &mut rng);
    let weights = gaussian(m, n, &mut rng).map(|v| 0.5 + v.abs().min(2.0));
    let obj = Weighted { target, weights };

    let x = gaussian(m, n, &mut rng);
    println!("gradient check: {:.2e}", finite_diff_check(&obj, &x, 1e-6)?);
    println!(
        "Lipschitz constant: {}",
        local_lipschitz_estimate(&obj, &x, 1.0, 16)?
    );

    let params = SolverParams {
        max_iters: 2000,
        ..SolverParams::new(2)
    };
    let trace = erfdr_run(
        FactoredMatrix::zeros(m, n),
        &obj,
        &params,
        &Scheme::crfdr(SparseConeKind::OneEntry),
        &DeltaSchedule::Constant,
    )?;
    println!(
        "{:?} after {} maps: f = {:.3e}, surrogate = {:.3e}",
        trace.stop,
        trace.iterations(),
        trace.final_f,
        trace.final_surrogate
    );
    Ok(())
}
