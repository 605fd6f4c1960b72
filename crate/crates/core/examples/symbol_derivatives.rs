//! Uniformity in `delta` of the derivative constants of `a_delta` and of `sup |b_delta| / delta`.

use lame_resolvent::fit::dyadic;
use lame_resolvent::sharpness::derivative::derivative_bound_check;
use lame_resolvent::symbols::LameParameters;

fn main() -> lame_resolvent::Result<()> {
    let table = derivative_bound_check(&dyadic(-4, -10), &LameParameters::new(1.0, 2.0)?, 3)?;
    print!("{}", table.to_csv());
    println!("spreads across delta: {:?}", table.spreads());
    println!("uniform within a factor 10: {}", table.is_uniform(10.0));
    Ok(())
}
