//! Focusing construction: `f` whose transform lives on a shell around the
//! sphere, observed on the cone segment `B_delta` far from the origin.
//!
//! In the variables `eta_1 = tau + psi(eta') - 1`, the multiplier acting on `hat f`
//! reduces to `a_delta(tau, eta') chi(eta') phi(tau)`, so
//! `m_delta(D) f(x) = (2 pi)^{-d} e^{-i x_1} int e^{i x_1 tau} phi(tau) I_delta(x; tau) dtau`.
//! The `tau` integral is done first, tabulated in `|eta'|^2` on Chebyshev
//! nodes, then the radial `eta'` integral.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::stationary::{fresnel_constant, radial_nodes, sphere_kernel, CHI_RADIUS};
use super::{check_dyadic, per_scale, sphere_area};
use crate::error::{Error, Result};
use crate::field::{Domain, PeriodicGrid, VectorField};
use crate::fit::{loglog_fit, LineFit};
use crate::profiles::Profile;
use crate::quadrature::{gauss_legendre, Rule};
use crate::symbols::{a_delta, b_delta, default_eps_circ, psi};

/// `hat f(eta) = chi(eta') phi(eta_1 + 1 - psi(eta')) |eta|^2 / eta_1^2`.
pub fn focusing_profile(eta: &[f64], eps_circ: f64) -> f64 {
    let r2: f64 = eta[1..].iter().map(|v| v * v).sum();
    let r = r2.sqrt();
    if r >= CHI_RADIUS {
        return 0.0;
    }
    let ps = psi(&eta[1..]).expect("|eta'| < 1/10");
    let tau = eta[0] + 1.0 - ps;
    let base = Profile::Chi.eval(r) * Profile::Focus { eps: eps_circ }.eval(tau);
    if base == 0.0 {
        return 0.0;
    }
    base * (eta[0] * eta[0] + r2) / (eta[0] * eta[0])
}

/// Range of the factor `eta_1^2 / |eta|^2` that `hat f` divides by.
pub fn dividing_factor_range(eps_circ: f64) -> (f64, f64) {
    let r2 = CHI_RADIUS * CHI_RADIUS;
    let min_eta1 = 1.0 - 2.0 * eps_circ - psi(&[CHI_RADIUS]).unwrap();
    (1.0 / (1.0 + r2 / (min_eta1 * min_eta1)), 1.0)
}

/// Grid centered at `-e_1` covering `supp hat f` with margin.
pub fn focusing_grid(dim: usize, eps_circ: f64, n: usize) -> Result<PeriodicGrid> {
    if dim < 2 {
        return Err(Error::Shape("the focusing field needs d >= 2".into()));
    }
    if n < 16 || n % 2 == 1 {
        return Err(Error::UnresolvedScale { axis: 0, min_n: 16 });
    }
    let reach0 = 2.0 * eps_circ + psi(&[CHI_RADIUS])? + 0.01;
    let half = |w: f64| PI * n as f64 / (2.0 * w);
    let mut lengths = vec![half(1.25 * CHI_RADIUS); dim];
    lengths[0] = half(reach0);
    let mut center = vec![0.0; dim];
    center[0] = -1.0;
    PeriodicGrid::new(vec![n; dim], lengths)?.with_center(center)
}

/// `f` on `grid` (one component, space domain).
pub fn focusing_field(eps_circ: f64, grid: &PeriodicGrid) -> Result<VectorField> {
    let d = grid.dim();
    for axis in 0..d {
        let (scale, reach) = if axis == 0 { (eps_circ, 2.0 * eps_circ + psi(&[CHI_RADIUS])?) } else { (CHI_RADIUS / 2.0, CHI_RADIUS) };
        let h = grid.dxi(axis);
        let c = grid.center()[axis] + if axis == 0 { 1.0 } else { 0.0 };
        let covered = (grid.n()[axis] / 2) as f64 * h - c.abs();
        if h > scale / 8.0 || covered < reach {
            let min_n = 2 * ((reach + c.abs()) / h.min(scale / 8.0)).ceil() as usize;
            return Err(Error::UnresolvedScale { axis, min_n });
        }
    }
    let hat = VectorField::single(grid.clone(), Domain::Frequency, 1, 0, |eta| Complex64::new(focusing_profile(eta, eps_circ), 0.0))?;
    hat.inverse()
}

/// Focusing sweep parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusingConfig {
    pub dim: usize,
    pub q: f64,
    /// Exponent for the reported `||f||_p` (the ratio's denominator is constant in delta).
    pub p: f64,
    pub rho: f64,
    pub eps_circ: f64,
    pub nu: f64,
    /// Gauss-Legendre order in `x_1` and in `|x'|` on `B_delta`.
    pub x_order: usize,
    /// Chebyshev nodes in `|eta'|^2` for the `tau` table.
    pub table_nodes: usize,
    /// Relative accuracy of the truncated `tau` integral.
    pub tol: f64,
    /// Gauss-Legendre nodes in `tau` for the background bound (0 skips it).
    pub background_order: usize,
    /// Grid points per axis for `||f||_p`.
    pub n: usize,
}

impl FocusingConfig {
    pub fn new(dim: usize, q: f64, rho: f64) -> Result<Self> {
        if rho == 1.0 {
            return Err(Error::DegenerateRatio);
        }
        Ok(Self {
            dim,
            q,
            p: 2.0,
            rho,
            eps_circ: default_eps_circ(rho),
            nu: 100.0,
            x_order: 8,
            table_nodes: 10,
            tol: 1e-7,
            background_order: 24,
            n: if dim <= 2 { 64 } else { 48 },
        })
    }
}

/// `(d - 1)/2 - d/q`.
pub fn expected_slope(dim: usize, q: f64) -> f64 {
    (dim as f64 - 1.0) / 2.0 - dim as f64 / q
}

/// Default sweep: `x_1 * (1/20)^2 >> 1` on `B_delta` needs `delta` well below `2^-20` at `nu = 100`.
pub fn default_deltas() -> Vec<f64> {
    crate::fit::dyadic(-24, -30)
}

/// Norms on `B_delta` at one scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusingPoint {
    pub delta: f64,
    /// `||m_delta(D) f||_{L^q(B_delta)}`.
    pub main: f64,
    /// `||(2 pi)^{-d} int |J_delta(x; tau)| phi dtau||_{L^q(B_delta)}`, an upper bound for
    /// `||M_delta(D) f||_{L^q(B_delta)}` (NaN when skipped).
    pub background_bound: f64,
    /// Same norm of the leading stationary-phase part of `m_delta(D) f`.
    pub leading: f64,
    /// Same norm of `m_delta(D) f` minus its leading part.
    pub remainder: f64,
    /// Rigorous bound on the truncated `tau` tail relative to the table values.
    pub tail_bound: f64,
    pub norm_f: f64,
}

/// Sweep result with fitted slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusingSweep {
    pub points: Vec<FocusingPoint>,
    pub fit_main: LineFit,
    pub fit_background: Option<LineFit>,
    pub expected_slope: f64,
}

impl FocusingSweep {
    /// CSV with header `delta,ratio,norm_f,norm_Tf,slope_running`; `ratio = norm_Tf / norm_f`.
    pub fn to_csv(&self) -> String {
        let s: Vec<f64> = self.points.iter().map(|p| p.delta).collect();
        let v: Vec<f64> = self.points.iter().map(|p| p.main).collect();
        let running = crate::fit::running_slopes(&s, &v);
        let mut out = String::from("delta,ratio,norm_f,norm_Tf,slope_running\n");
        for (p, r) in self.points.iter().zip(running) {
            out.push_str(&format!("{:e},{:e},{:e},{:e},{}\n", p.delta, p.main / p.norm_f, p.norm_f, p.main, r));
        }
        out
    }
}

/// Chebyshev points of the second kind on `[a, b]` and barycentric weights.
struct Cheb {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Cheb {
    fn new(n: usize, a: f64, b: f64) -> Self {
        let m = n - 1;
        let nodes = (0..n).map(|k| 0.5 * (a + b) + 0.5 * (b - a) * (PI * k as f64 / m as f64).cos()).collect();
        let weights = (0..n)
            .map(|k| {
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                if k == 0 || k == m {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        Self { nodes, weights }
    }

    fn interp(&self, values: &[Complex64], x: f64) -> Complex64 {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for ((xk, wk), vk) in self.nodes.iter().zip(&self.weights).zip(values) {
            let dx = x - xk;
            if dx == 0.0 {
                return *vk;
            }
            let t = wk / dx;
            num += vk * t;
            den += t;
        }
        num / den
    }
}

/// Truncation point for the `tau` integral and the resulting tail bound.
///
/// On `|tau| <= 2 eps` the factor `|tau + 2 psi - 2| >= 1 - 2 eps`, so the
/// two tails beyond `T` contribute at most `2 delta / ((1 - 2 eps)^2 T)`.
fn tau_cutoff(delta: f64, eps: f64, abs_tol: f64) -> (f64, f64) {
    let c = (1.0 - 2.0 * eps).powi(2);
    let t = (2.0 * delta / (c * abs_tol)).min(2.0 * eps);
    let bound = if t >= 2.0 * eps { 0.0 } else { 2.0 * delta / (c * t) };
    (t, bound)
}

/// Panels for `int_0^T` graded from the `delta` scale up to the oscillation length.
fn tau_breaks(delta: f64, t_max: f64, x1: f64, eps: f64) -> Vec<f64> {
    let cap = (2.0 * PI / x1.abs().max(1e-300)).min(eps / 4.0);
    let mut breaks = vec![0.0];
    let mut step = delta / 8.0;
    let mut b = 0.0;
    while b < t_max {
        b = (b + step).min(t_max);
        breaks.push(b);
        step = (step * 1.5).min(cap);
    }
    breaks
}

/// `G(x_1, u) = int e^{i x_1 tau} a_delta(tau, psi) phi(tau) dtau` at `|eta'|^2 = u`.
fn tau_table(x1: f64, delta: f64, eps: f64, cheb: &Cheb, t_max: f64, rule: &Rule) -> Vec<Complex64> {
    let breaks = tau_breaks(delta, t_max, x1, eps);
    let nodes = rule.composite(&breaks);
    let phi = Profile::Focus { eps };
    cheb.nodes
        .iter()
        .map(|&u| {
            let ps = u / (1.0 + (1.0 - u).sqrt());
            let mut acc = Complex64::new(0.0, 0.0);
            for &(t, w) in &nodes {
                for tau in [t, -t] {
                    acc += Complex64::from_polar(w * a_delta(tau, ps, delta) * phi.eval(tau), x1 * tau);
                }
            }
            acc
        })
        .collect()
}

/// Norms of `m_delta(D) f` (and its parts) on `B_delta` at one scale.
pub fn focusing_point(cfg: &FocusingConfig, delta: f64, norm_f: f64) -> Result<FocusingPoint> {
    let (d, eps) = (cfg.dim, cfg.eps_circ);
    if cfg.nu * delta > eps {
        return Err(Error::ParameterRange(format!("nu * delta = {} exceeds eps_circ = {eps}", cfg.nu * delta)));
    }
    let prefactor = (2.0 * PI).powi(-(d as i32));
    let u_max = CHI_RADIUS * CHI_RADIUS;
    let cheb = Cheb::new(cfg.table_nodes, 0.0, u_max);
    let rule = Rule::new(16);
    // |G| is close to pi / 2 near tau = 0.
    let (t_max, tail) = tau_cutoff(delta, eps, cfg.tol * PI / 2.0);
    let (xn, xw) = gauss_legendre(cfg.x_order);
    let (lo, hi) = (1.0 / (20.0 * cfg.nu * delta), 1.0 / (10.0 * cfg.nu * delta));
    let c_d = fresnel_constant(d);
    let phi = Profile::Focus { eps };
    let (bn, bw) = gauss_legendre(cfg.background_order.max(1));

    let mut sums = [0.0f64; 4];
    let mut maxes = [0.0f64; 4];
    for (a, wa) in xn.iter().zip(&xw) {
        let x1 = 0.5 * (lo + hi) + 0.5 * (hi - lo) * a;
        let w1 = 0.5 * (hi - lo) * wa;
        let s_max = x1 / 32.0;
        let table = tau_table(x1, delta, eps, &cheb, t_max, &rule);
        let radial = radial_nodes(x1, s_max, 0);
        let main_pre: Vec<Complex64> = radial
            .iter()
            .map(|&(r, w)| {
                let ps = psi(&[r]).expect("r < 1/10");
                let amp = w * Profile::Chi.eval(r) * r.powi(d as i32 - 2);
                Complex64::from_polar(amp, x1 * ps) * cheb.interp(&table, r * r)
            })
            .collect();
        let back_pre: Vec<(f64, Vec<Complex64>)> = if cfg.background_order == 0 {
            Vec::new()
        } else {
            bn.iter()
                .zip(&bw)
                .map(|(bt, btw)| {
                    let tau = 2.0 * eps * bt;
                    let row = radial
                        .iter()
                        .map(|&(r, w)| {
                            let ps = psi(&[r]).expect("r < 1/10");
                            let b = b_delta(tau, ps, r * r, delta, cfg.rho).expect("tau + psi - 1 < 0 on the shell");
                            Complex64::from_polar(w * b * Profile::Chi.eval(r) * r.powi(d as i32 - 2), x1 * ps)
                        })
                        .collect();
                    (2.0 * eps * btw * phi.eval(tau), row)
                })
                .collect()
        };
        for (b, wb) in xn.iter().zip(&xw) {
            let s = 0.5 * s_max * (1.0 + b);
            let ws = 0.5 * s_max * wb * sphere_area(d - 1) * s.powi(d as i32 - 2);
            let kern: Vec<f64> = radial.iter().map(|&(r, _)| sphere_kernel(d, s * r)).collect();
            // Both values omit the common unimodular factor e^{-i x_1}.
            let main: Complex64 = main_pre.iter().zip(&kern).map(|(p, k)| p * k).sum::<Complex64>() * prefactor;
            let x_norm = x1.hypot(s);
            let lead = c_d
                * Complex64::from_polar(prefactor, x1 - x_norm)
                * (x1 / x_norm).powf((d as f64 + 1.0) / 2.0)
                * x1.powf(-(d as f64 - 1.0) / 2.0)
                * cheb.interp(&table, (s / x_norm).powi(2));
            let background: f64 =
                back_pre.iter().map(|(wt, row)| wt * row.iter().zip(&kern).map(|(p, k)| p * k).sum::<Complex64>().norm()).sum::<f64>()
                    * prefactor;
            let vals = [main.norm(), background, lead.norm(), (main - lead).norm()];
            for k in 0..4 {
                if cfg.q.is_infinite() {
                    maxes[k] = maxes[k].max(vals[k]);
                } else {
                    sums[k] += w1 * ws * vals[k].powf(cfg.q);
                }
            }
        }
    }
    let norm = |k: usize| if cfg.q.is_infinite() { maxes[k] } else { sums[k].powf(1.0 / cfg.q) };
    Ok(FocusingPoint {
        delta,
        main: norm(0),
        background_bound: if cfg.background_order == 0 { f64::NAN } else { norm(1) },
        leading: norm(2),
        remainder: norm(3),
        tail_bound: tail / (PI / 2.0),
        norm_f,
    })
}

/// `m_delta(D) f(x)` by the reduced integral, for any `x` with `x_1 != 0`.
pub fn m_delta_f(cfg: &FocusingConfig, delta: f64, x: &[f64]) -> Result<Complex64> {
    let d = x.len();
    if d != cfg.dim || d < 2 {
        return Err(Error::Shape(format!("point of length {d} for a {}-dimensional sweep", cfg.dim)));
    }
    let eps = cfg.eps_circ;
    let (x1, s) = (x[0], x[1..].iter().map(|v| v * v).sum::<f64>().sqrt());
    let cheb = Cheb::new(cfg.table_nodes, 0.0, CHI_RADIUS * CHI_RADIUS);
    let (t_max, _) = tau_cutoff(delta, eps, cfg.tol * PI / 2.0);
    let table = tau_table(x1, delta, eps, &cheb, t_max, &Rule::new(16));
    let sum: Complex64 = radial_nodes(x1, s, 1)
        .into_iter()
        .map(|(r, w)| {
            let ps = psi(&[r]).expect("r < 1/10");
            let amp = w * Profile::Chi.eval(r) * r.powi(d as i32 - 2) * sphere_kernel(d, s * r);
            Complex64::from_polar(amp, x1 * ps - x1) * cheb.interp(&table, r * r)
        })
        .sum();
    Ok(sum * (2.0 * PI).powi(-(d as i32)))
}

/// Slope of `||m_delta(D) f||_{L^q(B_delta)}` over a dyadic sweep, with the background bound.
pub fn focusing_exponent(cfg: &FocusingConfig, deltas: &[f64]) -> Result<FocusingSweep> {
    check_dyadic(deltas)?;
    if cfg.q < 1.0 {
        return Err(Error::Domain(format!("q must be >= 1, got {}", cfg.q)));
    }
    for &d in deltas {
        if cfg.nu * d > cfg.eps_circ {
            return Err(Error::ParameterRange(format!("nu * delta = {} exceeds eps_circ = {}", cfg.nu * d, cfg.eps_circ)));
        }
    }
    let grid = focusing_grid(cfg.dim, cfg.eps_circ, cfg.n)?;
    let norm_f = focusing_field(cfg.eps_circ, &grid)?.lp_norm(cfg.p)?;
    let points = per_scale(deltas, |d| focusing_point(cfg, d, norm_f))?;
    let main: Vec<f64> = points.iter().map(|p| p.main).collect();
    let fit_main = loglog_fit(deltas, &main)?;
    let fit_background = if cfg.background_order == 0 {
        None
    } else {
        let b: Vec<f64> = points.iter().map(|p| p.background_bound).collect();
        Some(loglog_fit(deltas, &b)?)
    };
    Ok(FocusingSweep { points, fit_main, fit_background, expected_slope: expected_slope(cfg.dim, cfg.q) })
}
