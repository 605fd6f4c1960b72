//! Quadrature against the leading stationary-phase term along `x = (x_1, 0)`.

use lame_resolvent::fit::dyadic;
use lame_resolvent::sharpness::stationary::stationary_check;

fn main() -> lame_resolvent::Result<()> {
    let mut x1 = dyadic(10, 4);
    x1.reverse();
    let mut far = dyadic(20, 12);
    far.reverse();
    for dim in [2, 3] {
        for (label, list) in [("2^4..2^10", &x1), ("2^12..2^20", &far)] {
            let c = stationary_check(dim, 0.0, 0.25, list)?;
            println!("d={dim} x_1 in {label}: error slope {:.3}", c.fit.slope);
            for (x, e) in c.x1.iter().zip(&c.rel_error) {
                println!("  x_1={x:>9} rel_error={e:.3e}");
            }
            println!("  analytic c_d = {:?}, calibrated c_d = {:?}", c.analytic_constant, c.calibrated_constant);
        }
    }
    Ok(())
}
