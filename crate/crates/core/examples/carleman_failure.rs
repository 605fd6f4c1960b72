//! Carleman multiplier probe, scaling check and the two logarithmic divergences.

use lame_resolvent::carleman::aniso::{carleman_exponent, ProbeConfig};
use lame_resolvent::carleman::divergence::{admissibility_divergence, h_eps_l1, log_divergence};
use lame_resolvent::carleman::scaling_necessity_check;
use lame_resolvent::fit::dyadic;
use lame_resolvent::symbols::LameParameters;
use num_complex::Complex64;

fn main() -> lame_resolvent::Result<()> {
    let deltas = dyadic(-4, -10);
    for (d, p, q) in [(2, 2.0, 2.0), (3, 6.0 / 5.0, 6.0)] {
        let r = carleman_exponent(&ProbeConfig::new(d, p, q), &deltas)?;
        println!(
            "probe d={d} p={p:.3} q={q:.3}: slope {:.4} (expected {:.4}), estimate impossible: {}",
            r.sweep.fit.slope, r.sweep.expected_slope, r.impossible
        );
    }
    let s = scaling_necessity_check(3, 2.0, 2.0, &[1.0, 0.8, 0.64, 0.5])?;
    println!("scaling d=3 p=q=2: exponent {:.4} (predicted {}), bounded: {}", s.fit.slope, s.predicted, s.bounded);

    let eps = dyadic(-3, -9);
    let params = LameParameters::new(1.0, 2.0)?;
    let t = log_divergence(&params, &eps)?;
    println!("Re u_2(0): slope {:.4} in ln(1/eps), R^2 {:.6}, monotone {}", t.fit.slope, t.fit.r_squared, t.is_monotone());
    print!("{}", t.to_csv("re_u2_0"));
    for z in [Complex64::new(-1.0, 0.0), Complex64::new(0.0, 1.0)] {
        let t = admissibility_divergence(z, params.rho(), &eps)?;
        println!("Re T_z h_eps(0), z={z}: slope {:.4}, R^2 {:.6}, monotone {}", t.fit.slope, t.fit.r_squared, t.is_monotone());
    }
    let l1: Vec<f64> = eps.iter().map(|&e| h_eps_l1(e, 400.0)).collect();
    println!("||h_eps||_1: {l1:.4?}");
    Ok(())
}
