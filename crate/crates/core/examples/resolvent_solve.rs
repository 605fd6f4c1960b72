//! Solves `(-Lame - z) u = f` on a periodic grid for a Gaussian source and
//! reports the residual and the norms of the solution.

use lame_resolvent::field::{resolvent_solve, solve_residual, Domain, PeriodicGrid, VectorField};
use lame_resolvent::symbols::LameParameters;
use num_complex::Complex64;

fn main() -> lame_resolvent::Result<()> {
    let params = LameParameters::new(1.0, 2.0)?;
    let grid = PeriodicGrid::cubic(2, 256, 32.0)?;
    let f = VectorField::single(grid, Domain::Space, 2, 0, |x| Complex64::new((-0.5 * (x[0] * x[0] + x[1] * x[1])).exp(), 0.0))?;
    for z in [Complex64::new(-1.0, 0.5), Complex64::new(1.0, 0.1), Complex64::new(4.0, 0.01)] {
        let u = resolvent_solve(&f, z, &params)?;
        println!(
            "z = {z}: residual {:.2e}, |u|_2 = {:.5}, |u|_4 = {:.5}, |f|_(4/3) = {:.5}",
            solve_residual(&u, &f, z, &params)?,
            u.lp_norm(2.0)?,
            u.lp_norm(4.0)?,
            f.lp_norm(4.0 / 3.0)?
        );
    }
    Ok(())
}
