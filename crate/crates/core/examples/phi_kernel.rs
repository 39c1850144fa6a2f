//! One Krylov evaluation of `φ₀(A)v₀ + φ₁(A)v₁ + φ₂(A)v₂` for a stiff
//! embedded-boundary operator, checked against the dense augmented-matrix
//! exponential.
//!
//! `cargo run --release --example phi_kernel`

use ebetd::ebpoisson::{EmbeddedOperator, ZeroDirichlet};
use ebetd::geometry::{shapes, UniformGrid2D};
use ebetd::phifun::{
    phi_combination_dense, phi_combination_with_stats, phi_scalar, KrylovOptions, PhiCombinationRequest,
};

fn main() -> ebetd::Result<()> {
    for k in 0..4 {
        println!("phi_{k}(-1) = {:.12}", phi_scalar(k, -1.0));
    }

    let grid = UniformGrid2D::square(-1.0, 1.0, 60)?;
    let ls = grid.sample(&shapes::peanut());
    let op = EmbeddedOperator::assemble(&ls, &|_| 1.0, &ZeroDirichlet, 0.0)?;
    let n = op.n_dofs();
    let v0 = op.sample(|p| (-(p[0] * p[0] + p[1] * p[1]) * 4.0).exp());
    let v1 = vec![1.0; n];
    let v2 = op.sample(|p| p[0] * p[1]);
    let dt = 0.005;
    println!("{n} dofs, dt·‖A‖∞ = {:.1}", dt * op.matrix.norm_inf());

    for tol in [1e-6, 1e-8, 1e-10] {
        let req =
            PhiCombinationRequest::new(&op.matrix, dt, vec![&v0, &v1, &v2]).options(KrylovOptions::with_tolerance(tol));
        let (y, stats) = phi_combination_with_stats(&req)?;
        let a = op.matrix.to_dense() * dt;
        let reference = phi_combination_dense(&a, &[&v0, &v1, &v2])?;
        let err = y
            .iter()
            .zip(&reference)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt()
            / reference.iter().map(|q| q * q).sum::<f64>().sqrt();
        println!(
            "tol {tol:.0e}: relative error {err:.2e}, {} substeps, {} matvecs, max Krylov dim {}",
            stats.substeps, stats.matvecs, stats.max_dim
        );
    }
    Ok(())
}
