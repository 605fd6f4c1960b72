//! The nine acceptance criteria, each at its stated tolerance. Prints one
//! PASS/FAIL line per criterion and exits non-zero on any failure that is not
//! listed in `KNOWN_FAILURES`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use lame_resolvent::carleman::aniso::{carleman_exponent, ProbeConfig};
use lame_resolvent::carleman::divergence::{admissibility_divergence, log_divergence};
use lame_resolvent::eigen::{
    dense_eigenvalues, eigen_region_report, free_spectrum, holder_chain_check, potential_exponent, potential_norm, smallness_threshold,
    PotentialField, ReportOptions, SpectralOperator, DENSE_CAP,
};
use lame_resolvent::field::{Domain, PeriodicGrid, VectorField};
use lame_resolvent::fit::dyadic;
use lame_resolvent::geometry::{canonical_points, classify, gamma, region_polyline, ExponentPair, RegionTag};
use lame_resolvent::sharpness::derivative::derivative_bound_check;
use lame_resolvent::sharpness::focusing::{default_deltas, focusing_exponent, FocusingConfig};
use lame_resolvent::sharpness::knapp::{knapp_exponent, KnappConfig, KnappObservation};
use lame_resolvent::sharpness::stationary::stationary_check;
use lame_resolvent::symbols::{imag_symbol, lame_matrix, leray_projector, resolvent_symbol, ImagVariant, LameParameters, SymbolMatrix};
use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that fail on the stated range; the analysis lives with the
/// project notes. The harness still evaluates and reports them.
const KNOWN_FAILURES: &[usize] = &[5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Check = fn() -> lame_resolvent::Result<Outcome>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn symbol_correctness() -> lame_resolvent::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_inv, mut worst_helm, mut worst_lu) = (0.0f64, 0.0f64, 0.0f64);
    let mut accepted = 0;
    while accepted < 10_000 {
        let d = rng.random_range(2..=4usize);
        let xi: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mu = rng.random_range(0.5..2.0);
        let lambda = rng.random_range(-mu + 0.25..3.0);
        let z = c(rng.random_range(-4.0..8.0), rng.random_range(-2.0..2.0));
        let params = LameParameters::new(mu, lambda)?;
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        // Denominators bounded away from zero.
        if r2 < 0.05 || (mu * r2 - z).norm() < 0.1 || (params.p_modulus() * r2 - z).norm() < 0.1 {
            continue;
        }
        accepted += 1;
        let l = lame_matrix(&xi, z, &params);
        let r = resolvent_symbol(&xi, z, &params)?;
        worst_inv = worst_inv.max(l.matmul(&r).max_abs_diff(&SymbolMatrix::identity(d)));
        // Helmholtz split from the Leray projector, built independently of the closed form.
        let pi = leray_projector(&xi)?;
        let s = (c(mu * r2, 0.0) - z).inv();
        let p = (c(params.p_modulus() * r2, 0.0) - z).inv();
        let split = SymbolMatrix::from_fn(d, |j, k| {
            let id = if j == k { c(1.0, 0.0) } else { c(0.0, 0.0) };
            s * (id - pi.get(j, k)) + p * pi.get(j, k)
        });
        worst_helm = worst_helm.max(split.max_abs_diff(&r));
        // Gaussian elimination as a third route.
        worst_lu = worst_lu.max(l.inverse()?.max_abs_diff(&r));
    }
    let pass = worst_inv < 1e-12 && worst_helm < 1e-12;
    Ok(outcome(
        pass,
        format!("10^4 samples: |L R - I| {worst_inv:.2e}, Helmholtz split {worst_helm:.2e}, elimination route {worst_lu:.2e}"),
    ))
}

fn pair(x: Rational64, y: Rational64) -> ExponentPair {
    ExponentPair::new(x, y).expect("figure point inside the unit square")
}

/// Figure coordinates are on a 10 x 10 canvas; returns `(x/10, y/10)`.
fn fig(xn: i64, xd: i64, yn: i64, yd: i64) -> ExponentPair {
    pair(Rational64::new(xn, 10 * xd), Rational64::new(yn, 10 * yd))
}

fn geometry_fidelity() -> lame_resolvent::Result<Outcome> {
    let mut mismatches = Vec::new();
    let figure_points: [(usize, Vec<(&str, ExponentPair)>); 2] = [
        (
            3,
            vec![
                ("D", fig(10, 3, 10, 3)),
                ("B", fig(20, 3, 5, 3)),
                ("B'", fig(25, 3, 10, 3)),
                ("D'", fig(20, 3, 20, 3)),
                ("A", fig(20, 3, 0, 1)),
                ("A'", fig(10, 1, 10, 3)),
                ("H", fig(5, 1, 5, 1)),
                ("P_o", fig(4, 1, 3, 1)),
                ("P_o'", fig(7, 1, 6, 1)),
                ("P_*", fig(3, 1, 3, 1)),
                ("P_*'", fig(7, 1, 7, 1)),
            ],
        ),
        (
            4,
            vec![
                ("D", fig(30, 8, 30, 8)),
                ("B", fig(25, 4, 9, 4)),
                ("B'", fig(31, 4, 15, 4)),
                ("D'", fig(50, 8, 50, 8)),
                ("A", fig(50, 8, 5, 4)),
                ("E", fig(50, 8, 0, 1)),
                ("A'", fig(35, 4, 30, 8)),
                ("E'", fig(10, 1, 30, 8)),
                ("H", fig(5, 1, 5, 1)),
                ("P_o", fig(110, 26, 90, 26)),
                ("P_o'", fig(170, 26, 150, 26)),
                ("P_*", fig(50, 14, 50, 14)),
                ("P_*'", fig(90, 14, 90, 14)),
            ],
        ),
    ];
    for (d, points) in &figure_points {
        let cp = canonical_points(*d)?;
        for (name, want) in points {
            if cp.get(name)? != *want {
                mismatches.push(format!("d={d} {name}"));
            }
        }
    }
    // Region polygons read off the figure outlines, counter-clockwise.
    let polygons = [
        (3, RegionTag::R1, vec![fig(20, 3, 0, 1), fig(10, 1, 10, 3), fig(25, 3, 10, 3), fig(20, 3, 5, 3)]),
        (3, RegionTag::R2tilde, vec![fig(20, 3, 5, 3), fig(25, 3, 10, 3), fig(7, 1, 6, 1), fig(5, 1, 5, 1), fig(4, 1, 3, 1)]),
        (3, RegionTag::R3tilde, vec![fig(0, 1, 0, 1), fig(20, 3, 0, 1), fig(20, 3, 5, 3), fig(4, 1, 3, 1), fig(3, 1, 3, 1)]),
        (4, RegionTag::R1, vec![fig(50, 8, 5, 4), fig(35, 4, 30, 8), fig(31, 4, 15, 4), fig(25, 4, 9, 4)]),
        (4, RegionTag::R2tilde, vec![fig(25, 4, 9, 4), fig(31, 4, 15, 4), fig(170, 26, 150, 26), fig(5, 1, 5, 1), fig(110, 26, 90, 26)]),
        (
            4,
            RegionTag::R3tilde,
            vec![fig(0, 1, 0, 1), fig(5, 1, 0, 1), fig(50, 8, 5, 4), fig(25, 4, 9, 4), fig(110, 26, 90, 26), fig(50, 14, 50, 14)],
        ),
    ];
    for (d, tag, want) in &polygons {
        if region_polyline(*d, *tag)?.vertices != *want {
            mismatches.push(format!("d={d} {tag} polyline"));
        }
        let dual: Vec<ExponentPair> = want.iter().map(|v| v.dual()).collect();
        if *tag == RegionTag::R3tilde {
            let got = region_polyline(*d, RegionTag::R3tildePrime)?.vertices;
            if got.len() != dual.len() || !dual.iter().all(|v| got.contains(v)) {
                mismatches.push(format!("d={d} R3tilde' polyline"));
            }
        }
    }
    // Duality on a 200 x 200 rational grid.
    let mut grid_failures = 0usize;
    for d in [3usize, 4] {
        for i in 0..200 {
            for j in 0..200 {
                let p = pair(Rational64::new(i, 199), Rational64::new(j, 199));
                let dp = p.dual();
                if dp.dual() != p || gamma(d, &p) != gamma(d, &dp) {
                    grid_failures += 1;
                }
                let (a, b) = (classify(d, &p)?, classify(d, &dp)?);
                if (a == RegionTag::R3tilde) != (b == RegionTag::R3tildePrime) {
                    grid_failures += 1;
                }
            }
        }
    }
    let pass = mismatches.is_empty() && grid_failures == 0;
    Ok(outcome(
        pass,
        format!(
            "{} figure points and 6 polygons checked, mismatches {:?}; duality grid failures {grid_failures}",
            figure_points.iter().map(|(_, v)| v.len()).sum::<usize>(),
            mismatches
        ),
    ))
}

/// Brute-force `sup |I_delta|` along rays `r (cos t, sin t, 0, ...)`; the
/// symbol depends on `xi` only through `|xi|` and `xi_1^2`.
fn sup_oracle(dim: usize, delta: f64, rho: f64) -> lame_resolvent::Result<f64> {
    let mut best = 0.0f64;
    for a in 0..=90 {
        let t = a as f64 * PI / 180.0;
        for k in 0..=40_000 {
            let r = 0.3 + 1.4 * k as f64 / 40_000.0;
            let mut xi = vec![0.0; dim];
            xi[0] = r * t.cos();
            xi[1] = r * t.sin();
            best = best.max(imag_symbol(&xi, delta, rho, ImagVariant::Raw)?.total.abs());
        }
    }
    Ok(best)
}

fn knapp() -> lame_resolvent::Result<Outcome> {
    let deltas = dyadic(-4, -10);
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, p, q) in [(2, 2.0, 2.0), (3, 2.0, 2.0), (2, 1.0, f64::INFINITY)] {
        let sweep = knapp_exponent(&KnappConfig::new(d, p, q)?, &deltas)?;
        let ok = within(sweep.fit.slope, sweep.expected_slope, 0.1);
        pass &= ok;
        parts.push(format!("({d},{p},{q}) slope {:.3} vs {:.3}", sweep.fit.slope, sweep.expected_slope));
        if p == 2.0 && q == 2.0 {
            let mut full = KnappConfig::new(d, p, q)?;
            full.observation = KnappObservation::Full;
            let rho = full.params.rho();
            let full_sweep = knapp_exponent(&full, &deltas)?;
            let (mut lo, mut hi) = (f64::MAX, 0.0f64);
            for pt in &full_sweep.points {
                let r = pt.ratio / sup_oracle(d, pt.delta, rho)?;
                lo = lo.min(r);
                hi = hi.max(r);
            }
            let band = lo >= 0.1 && hi <= 1.0;
            pass &= band;
            parts.push(format!("ratio/sup in [{lo:.3}, {hi:.3}]"));
        }
    }
    Ok(outcome(pass, parts.join("; ")))
}

fn focusing() -> lame_resolvent::Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [2, 3] {
        let sweep = focusing_exponent(&FocusingConfig::new(d, 2.0, 2.0)?, &default_deltas())?;
        let bg = sweep.fit_background.map(|f| f.slope).unwrap_or(f64::NAN);
        let ok = within(sweep.fit_main.slope, sweep.expected_slope, 0.15) && bg - sweep.fit_main.slope >= 0.8;
        pass &= ok;
        parts.push(format!(
            "d={d} main {:.3} vs {:.3}, background {bg:.3} (gap {:.3})",
            sweep.fit_main.slope,
            sweep.expected_slope,
            bg - sweep.fit_main.slope
        ));
    }
    Ok(outcome(pass, parts.join("; ")))
}

fn stationary() -> lame_resolvent::Result<Outcome> {
    let mut x1 = dyadic(10, 4);
    x1.reverse();
    let mut far = dyadic(20, 12);
    far.reverse();
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [2, 3] {
        let near = stationary_check(d, 0.0, 0.25, &x1)?;
        pass &= near.fit.slope <= -0.9;
        let ext = stationary_check(d, 0.0, 0.25, &far)?;
        parts.push(format!(
            "d={d} slope {:.3} over 2^4..2^10 (extended 2^12..2^20: {:.3}; |c_d| analytic {:.3}, fitted at 2^10 {:.3})",
            near.fit.slope,
            ext.fit.slope,
            c(near.analytic_constant[0], near.analytic_constant[1]).norm(),
            c(near.calibrated_constant[0], near.calibrated_constant[1]).norm()
        ));
    }
    Ok(outcome(pass, parts.join("; ")))
}

fn derivative_uniformity() -> lame_resolvent::Result<Outcome> {
    let table = derivative_bound_check(&dyadic(-4, -10), &LameParameters::new(1.0, 2.0)?, 3)?;
    let worst = table.spreads().into_iter().fold(0.0, f64::max);
    Ok(outcome(table.is_uniform(10.0), format!("{} columns, worst spread {worst:.3}", table.alphas.len() + 1)))
}

fn carleman_probe() -> lame_resolvent::Result<Outcome> {
    let deltas = dyadic(-4, -10);
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, p, q) in [(2, 2.0, 2.0), (3, 6.0 / 5.0, 6.0)] {
        let r = carleman_exponent(&ProbeConfig::new(d, p, q), &deltas)?;
        let mut ok = within(r.sweep.fit.slope, r.sweep.expected_slope, 0.15);
        if d == 3 {
            ok &= r.sweep.fit.slope < 0.0 && r.impossible;
        }
        pass &= ok;
        parts.push(format!("({d},{p:.3},{q}) slope {:.3} vs {:.3}", r.sweep.fit.slope, r.sweep.expected_slope));
    }
    Ok(outcome(pass, parts.join("; ")))
}

fn log_divergences() -> lame_resolvent::Result<Outcome> {
    let eps = dyadic(-3, -9);
    let params = LameParameters::new(1.0, 2.0)?;
    let mut tables = vec![("Re u_2(0)".to_string(), log_divergence(&params, &eps)?)];
    for z in [c(-1.0, 0.0), c(0.0, 1.0)] {
        tables.push((format!("Re T_z h(0) z={z}"), admissibility_divergence(z, params.rho(), &eps)?));
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, t) in &tables {
        pass &= t.is_monotone() && t.fit.slope > 0.0 && t.fit.r_squared > 0.99;
        parts.push(format!("{name}: slope {:.4}, R^2 {:.5}, monotone {}", t.fit.slope, t.fit.r_squared, t.is_monotone()));
    }
    Ok(outcome(pass, parts.join("; ")))
}

fn random_field(grid: &PeriodicGrid, rng: &mut ChaCha8Rng) -> lame_resolvent::Result<VectorField> {
    let comps =
        (0..grid.dim()).map(|_| (0..grid.len()).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()).collect();
    VectorField::new(grid.clone(), Domain::Space, comps)
}

fn eigen_demo() -> lame_resolvent::Result<Outcome> {
    let params = LameParameters::new(1.0, 2.0)?;
    let grid = PeriodicGrid::cubic(2, 32, PI)?;
    let ev = dense_eigenvalues(&SpectralOperator::new(&grid, &params, None)?.to_dense(DENSE_CAP)?, false)?;
    let off_ray = ev.iter().map(|e| if e.re >= 0.0 { e.im.abs() } else { e.norm() }).fold(0.0, f64::max);
    let closed = free_spectrum(&grid, &params);
    let mut re: Vec<f64> = ev.iter().map(|e| e.re).collect();
    re.sort_by(f64::total_cmp);
    let match_err = re.iter().zip(&closed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let free_ok = ev.len() == closed.len() && off_ray <= 1e-8 && match_err <= 1e-8;

    // Hoelder chain with an independent pointwise evaluation of the left side
    // (vector norms are l^p over components).
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pairs = [(1.0, 2.0), (1.2, 3.0), (1.5, 6.0), (2.0, 4.0), (1.0, f64::INFINITY), (2.0, 2.0)];
    let mut holder_fail = 0;
    let mut lhs_gap = 0.0f64;
    for trial in 0..1000 {
        let d = 2 + trial % 2;
        let g = PeriodicGrid::cubic(d, 6, 1.0 + rng.random_range(0.0..2.0))?;
        let (p, q) = pairs[trial % pairs.len()];
        let v = PotentialField::random(&g, rng.random_range(0.1..10.0), trial % 3 == 0, &mut rng)?;
        let u = random_field(&g, &mut rng)?;
        let (lhs, rhs) = holder_chain_check(&v, &u, p, q)?;
        let mut acc = 0.0f64;
        for i in 0..g.len() {
            let ui: Vec<Complex64> = (0..d).map(|k| u.components()[k][i]).collect();
            let vu = v.at(i).matvec(&ui);
            acc += vu.iter().map(|w| w.norm().powf(p)).sum::<f64>();
        }
        let direct = (acc * g.cell_volume()).powf(1.0 / p);
        lhs_gap = lhs_gap.max((direct - lhs).abs() / direct);
        if lhs > rhs * (1.0 + 1e-12) {
            holder_fail += 1;
        }
    }
    let holder_ok = holder_fail == 0 && lhs_gap < 1e-10;

    // Seeded random potential under the threshold, run twice.
    let (p, q, ell, t, c_user) = (1.2, 3.0, 1.0, 0.5, 1.0);
    let small = PeriodicGrid::cubic(2, 16, PI)?;
    let report = || -> lame_resolvent::Result<String> {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let raw = PotentialField::random(&small, 1.0, false, &mut rng)?;
        let scale = 0.9 * smallness_threshold(2, p, q, ell, c_user, t)? / potential_norm(&raw, potential_exponent(p, q)?)?;
        let r = eigen_region_report(&small, &params, &raw.scale(c(scale, 0.0)), p, q, ell, t, c_user, &ReportOptions::default())?;
        if !r.hypothesis_satisfied {
            return Ok(String::new());
        }
        serde_json::to_string(&r).map_err(|e| lame_resolvent::Error::Format(e.to_string()))
    };
    let (first, second) = (report()?, report()?);
    let report_ok = !first.is_empty() && first == second;

    Ok(outcome(
        free_ok && holder_ok && report_ok,
        format!(
            "V=0: {} eigenvalues, off-ray {off_ray:.1e}, closed-form gap {match_err:.1e}; Hoelder: {holder_fail} violations in 1000, lhs route gap {lhs_gap:.1e}; seeded report deterministic {report_ok}",
            ev.len()
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 9] = [
        ("symbol correctness", symbol_correctness),
        ("geometry fidelity", geometry_fidelity),
        ("Knapp exponent", knapp),
        ("focusing exponent", focusing),
        ("stationary phase", stationary),
        ("derivative uniformity", derivative_uniformity),
        ("Carleman probe", carleman_probe),
        ("log divergences", log_divergences),
        ("eigen demonstration", eigen_demo),
    ];
    let mut unexpected = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        let clock = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let known = KNOWN_FAILURES.contains(&n);
        let note = match (pass, known) {
            (false, true) => " [known failure]",
            (true, true) => " [listed as known failure but passed]",
            _ => "",
        };
        println!("criterion {n} ({name}): {}{note} in {:.1?} -- {detail}", if pass { "PASS" } else { "FAIL" }, clock.elapsed());
        if !pass && !known {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criterion failure(s) outside the known list");
        ExitCode::FAILURE
    }
}
