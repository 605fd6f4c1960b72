//! Eigenvalue report for `-Lame + V` with a seeded random potential scaled
//! under the smallness threshold, plus the unperturbed check.

use std::f64::consts::PI;
use std::time::Instant;

use lame_resolvent::eigen::{
    dense_eigenvalues, eigen_region_report, free_spectrum, potential_exponent, potential_norm, smallness_threshold, EigenFlag,
    PotentialField, ReportOptions, SpectralOperator, DENSE_CAP,
};
use lame_resolvent::field::PeriodicGrid;
use lame_resolvent::symbols::LameParameters;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> lame_resolvent::Result<()> {
    let params = LameParameters::new(1.0, 2.0)?;
    let grid = PeriodicGrid::cubic(2, 32, PI)?;
    let (p, q, ell, t, c) = (1.2, 3.0, 1.0, 0.5, 1.0);

    let clock = Instant::now();
    let free = SpectralOperator::new(&grid, &params, None)?.to_dense(DENSE_CAP)?;
    let ev = dense_eigenvalues(&free, true)?;
    let err = ev.iter().zip(free_spectrum(&grid, &params)).map(|(e, x)| (e.re - x).abs()).fold(0.0, f64::max);
    println!("V = 0: order {}, max deviation from the lattice spectrum {err:.2e} ({:.1?})", ev.len(), clock.elapsed());

    let threshold = smallness_threshold(2, p, q, ell, c, t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let raw = PotentialField::random(&grid, 1.0, false, &mut rng)?;
    let v = raw.scale(Complex64::new(0.9 * threshold / potential_norm(&raw, potential_exponent(p, q)?)?, 0.0));

    let clock = Instant::now();
    let r = eigen_region_report(&grid, &params, &v, p, q, ell, t, c, &ReportOptions::default())?;
    println!(
        "random V: |V|_{} = {:.4} vs threshold {:.4} ({}); {} eigenvalues ({:.1?})",
        r.norm_exponent,
        r.potential_norm,
        r.threshold,
        r.stamp,
        r.eigenvalues.len(),
        clock.elapsed()
    );
    println!("on ray {}, in Z {}, outside Z {}", r.count(EigenFlag::OnRay), r.count(EigenFlag::InZ), r.count(EigenFlag::OutsideZ));
    for e in r.eigenvalues.iter().take(6) {
        println!("  E = {:+.6} {:+.6}i  {:?}  kappa = {:?}", e.re, e.im, e.flag, e.kappa);
    }
    Ok(())
}
