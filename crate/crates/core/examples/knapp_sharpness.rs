//! Knapp-slab lower bound for `I_delta` over a dyadic sweep of `delta`.

use lame_resolvent::fit::dyadic;
use lame_resolvent::sharpness::knapp::{knapp_exponent, KnappConfig, KnappObservation};

fn main() -> lame_resolvent::Result<()> {
    let deltas = dyadic(-4, -10);
    for (d, p, q) in [(2, 2.0, 2.0), (3, 2.0, 2.0), (2, 1.0, f64::INFINITY)] {
        let cfg = KnappConfig::new(d, p, q)?;
        let sweep = knapp_exponent(&cfg, &deltas)?;
        println!("d={d} p={p} q={q}: slope {:.4} (expected {:.4})", sweep.fit.slope, sweep.expected_slope);
        print!("{}", sweep.to_csv());
    }
    let mut cfg = KnappConfig::new(2, 2.0, 2.0)?;
    cfg.observation = KnappObservation::Full;
    let sweep = knapp_exponent(&cfg, &deltas)?;
    println!("full-grid observation: slope {:.4}", sweep.fit.slope);
    for pt in &sweep.points {
        println!("  delta={:e} ratio*delta={:.4}", pt.delta, pt.ratio * pt.delta);
    }
    Ok(())
}
