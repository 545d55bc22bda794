//! Counts the expensive operations one map costs on each branch, for the
//! factored cheap map and the dense restricted-cone map.
//!
//! ```text
//! cargo run --example operation_census
//! ```

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lowrank_opt::matcore::{gaussian, random_factored};
use lowrank_opt::solvers::EvalPoint;
use lowrank_opt::{
    ApproxProblem, FactoredMatrix, OpCounters, Scheme, SolverParams, SparseConeKind,
};

fn main() -> lowrank_opt::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (m, n, r) = (60, 40, 4);
    let obj = ApproxProblem::new(gaussian(m, n, &mut rng))?;
    let params = SolverParams::new(r);
    let delta = 1e-2;

    let u = random_factored(m, n, r, &mut rng).u().clone();
    let v = random_factored(m, n, r, &mut rng).v().clone();
    let points = [
        (
            "rank r, well separated",
            FactoredMatrix::from_parts(
                u.clone(),
                DVector::from_vec(vec![4.0, 3.0, 2.0, 1.0]),
                v.clone(),
            )?,
        ),
        (
            "rank r, sigma_r <= delta",
            FactoredMatrix::from_parts(u, DVector::from_vec(vec![4.0, 3.0, 2.0, 1e-3]), v)?,
        ),
        ("rank r - 2", random_factored(m, n, r - 2, &mut rng)),
        ("zero", FactoredMatrix::zeros(m, n)),
    ];
    let schemes = [
        ("crfdr", Scheme::crfdr(SparseConeKind::OneEntry)),
        ("rfdr", Scheme::rfdr()),
    ];

    println!(
        "{:<26} {:<6} {:>5} {:>5} {:>4} {:>6} {:>6} {:>5}",
        "iterate", "map", "f", "grad", "qr", "small", "large", "cone"
    );
    for (label, x) in &points {
        for (name, scheme) in &schemes {
            let mut c = OpCounters::default();
            let point = EvalPoint::new(&obj, x.clone(), &mut c)?;
            scheme.apply(&point, &obj, &params, delta, 1.0, &mut c)?;
            println!(
                "{label:<26} {name:<6} {:>5} {:>5} {:>4} {:>6} {:>6} {:>5}",
                c.f_evals, c.grad_evals, c.qr, c.small_svd, c.large_svd, c.cone_projections
            );
        }
    }
    Ok(())
}
