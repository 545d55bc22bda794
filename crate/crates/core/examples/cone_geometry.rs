//! Projections onto the tangent objects of the bounded-rank variety at a
//! rank-deficient point, and why the normal part matters there.
//!
//! ```text
//! cargo run --example cone_geometry
//! ```

use lowrank_opt::geometry::{
    cone_unit_sphere_constant, proj_normal_space, proj_restricted_cone_variety,
    proj_tangent_cone_variety, proj_tangent_space, sparse_cone_project, stationarity_measure,
};
use lowrank_opt::matcore::{svd_thin, Mat, DEFAULT_RANK_TOL};
use lowrank_opt::{ApproxProblem, Objective, SparseConeKind, TieBreak};

fn main() -> lowrank_opt::Result<()> {
    // X = diag(3, 0, 0) is critical for rank-one matrices but not for rank <= 2.
    let a = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 2.0, 0.0]));
    let x = svd_thin(
        &Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 0.0, 0.0])),
        DEFAULT_RANK_TOL,
    )?;
    let obj = ApproxProblem::new(a)?;
    let g = obj.gradient(&x.to_dense());
    let z = g.map(|v| 0.0 - v);

    println!("-grad f(X) = {z:.3}");
    println!(
        "tangent space part norm:  {:.4}",
        proj_tangent_space(&x, &z)?.norm()
    );
    println!(
        "normal space part norm:   {:.4}",
        proj_normal_space(&x, &z)?.norm()
    );
    println!(
        "tangent cone (r = 2):     {:.4}",
        proj_tangent_cone_variety(&x, &z, 2)?.norm()
    );
    println!(
        "restricted cone (r = 2):  {:.4}",
        proj_restricted_cone_variety(&x, &z, 2, TieBreak::Left)?.norm()
    );
    println!(
        "stationarity at r = 1:    {:.4}",
        stationarity_measure(&x, &g, 1)?
    );
    println!(
        "stationarity at r = 2:    {:.4}",
        stationarity_measure(&x, &g, 2)?
    );

    let w = Mat::from_row_slice(2, 3, &[1.0, -2.0, 0.5, 0.0, 3.0, -1.0]);
    println!("\nsparse cones for {w:.2}");
    for kind in SparseConeKind::ALL {
        let p = sparse_cone_project(kind, &w);
        println!(
            "{kind:?}: ‖P(W)‖² = {:.3} of ‖W‖² = {:.3}, worst case ratio on 2 x 3 is {:.3}",
            p.frobenius_norm().powi(2),
            w.norm_squared(),
            cone_unit_sphere_constant(kind, 2, 3)
        );
    }
    Ok(())
}
