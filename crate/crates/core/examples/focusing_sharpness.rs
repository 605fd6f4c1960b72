//! Focusing lower bound: `||m_delta(D) f||_{L^q(B_delta)}` against `delta`,
//! with the upper bound for the background part `M_delta(D) f`.

use lame_resolvent::sharpness::focusing::{default_deltas, focusing_exponent, FocusingConfig};

fn main() -> lame_resolvent::Result<()> {
    for dim in [2, 3] {
        let cfg = FocusingConfig::new(dim, 2.0, 2.0)?;
        let t = std::time::Instant::now();
        let sweep = focusing_exponent(&cfg, &default_deltas())?;
        println!(
            "d={dim} q=2: main slope {:.4} (expected {:.4}), background slope {:.4}, {:.1?}",
            sweep.fit_main.slope,
            sweep.expected_slope,
            sweep.fit_background.map(|f| f.slope).unwrap_or(f64::NAN),
            t.elapsed()
        );
        for p in &sweep.points {
            println!(
                "  delta={:e} main={:.4e} background<={:.4e} remainder/leading={:.2e} tail={:.1e}",
                p.delta,
                p.main,
                p.background_bound,
                p.remainder / p.leading,
                p.tail_bound
            );
        }
    }
    Ok(())
}
