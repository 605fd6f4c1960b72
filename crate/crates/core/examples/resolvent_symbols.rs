//! Pointwise symbols: the closed-form resolvent, its Helmholtz split and a Riesz transform.

use lame_resolvent::symbols::{
    helmholtz_factors, lame_matrix, leray_projector, resolvent_symbol, riesz_norm, riesz_symbol, LameParameters, SymbolMatrix,
};
use num_complex::Complex64;

fn main() -> lame_resolvent::Result<()> {
    let params = LameParameters::new(1.0, 2.0)?;
    let xi = [0.6, -0.3, 0.9];
    let z = Complex64::new(0.8, 0.05);
    let r = resolvent_symbol(&xi, z, &params)?;
    let residual = lame_matrix(&xi, z, &params).matmul(&r).max_abs_diff(&SymbolMatrix::identity(3));
    println!("rho = {}, |L_z R_z - I| = {residual:.2e}", params.rho());
    let (s, p) = helmholtz_factors(&xi, z, &params)?;
    println!("shear factor {s:.4}, pressure factor {p:.4}");
    let pi = leray_projector(&xi)?;
    println!("Leray projector idempotent: {:.2e}", pi.matmul(&pi).max_abs_diff(&pi));
    for row in r.to_rows() {
        println!("  {row:+.4?}");
    }
    println!("R_1(xi) = {:.4}, Riesz norm on L^4: {:.4}", riesz_symbol(0, &xi)?, riesz_norm(4.0)?);
    Ok(())
}
