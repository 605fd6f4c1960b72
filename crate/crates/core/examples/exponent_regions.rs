//! Canonical points, region polygons and the bound function for a few exponent pairs.

use lame_resolvent::geometry::{bound_profile, canonical_points, classify, kappa, region_polyline, render, ExponentPair, RegionTag};
use num_complex::Complex64;

fn main() -> lame_resolvent::Result<()> {
    for dim in [3, 4] {
        println!("d={dim}");
        for (name, p) in canonical_points(dim)?.as_map() {
            println!("  {name:<5} ({}, {})", render(p.x()), render(p.y()));
        }
        for tag in [RegionTag::R1, RegionTag::R2tilde, RegionTag::R3tilde] {
            let pl = region_polyline(dim, tag)?;
            let v: Vec<String> = pl.vertices.iter().map(|p| format!("({}, {})", render(p.x()), render(p.y()))).collect();
            println!("  {tag}: {}", v.join(" "));
        }
    }
    let z = Complex64::new(-1.0, 0.5);
    for (xn, xd, yn, yd) in [(4, 5, 1, 5), (1, 2, 1, 4), (1, 5, 1, 10), (1, 1, 0, 1)] {
        let p = ExponentPair::from_fracs(xn, xd, yn, yd)?;
        let tag = classify(3, &p)?;
        let prof = bound_profile(3, &p);
        let k = if tag.has_bound() { format!("{:.4}", kappa(3, &p, z)?) } else { "-".into() };
        println!("d=3 ({xn}/{xd}, {yn}/{yd}): {tag}, gamma {}, kappa(z={z}) {k}", render(prof.gamma));
    }
    Ok(())
}
