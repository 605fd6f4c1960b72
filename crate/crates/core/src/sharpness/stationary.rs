//! The oscillatory integral
//! `I_delta(x; tau) = int e^{i(x'.xi' + x_1 psi(xi'))} a_delta(tau, xi') chi(xi') dxi'`
//! and its leading stationary-phase term.
//!
//! The integrand is radial in `xi'`, so the quadrature reduces to one radial
//! integral against the sphere kernel `K_d(t) = int_{S^{d-2}} e^{i t w_1} dw`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{loglog_fit, LineFit};
use crate::profiles::Profile;
use crate::quadrature::{bessel_j0, Rule};
use crate::symbols::{a_delta, psi};

/// Outer radius of `supp chi`.
pub const CHI_RADIUS: f64 = 0.1;

const PANEL_ORDER: usize = 16;

/// `K_d(t) = int_{S^{d-2}} e^{i t w_1} dw`, real since the sphere is symmetric.
pub fn sphere_kernel(dim: usize, t: f64) -> f64 {
    match dim {
        2 => 2.0 * t.cos(),
        3 => 2.0 * PI * bessel_j0(t),
        _ => {
            // |S^{d-3}| int_0^pi cos(t cos th) sin^{d-3} th dth.
            let rule = Rule::new(PANEL_ORDER);
            let panels = (t.abs() / PI).ceil().max(1.0) as usize * 2;
            let breaks: Vec<f64> = (0..=panels).map(|k| PI * k as f64 / panels as f64).collect();
            let inner: f64 = rule.composite(&breaks).iter().map(|(th, w)| w * (t * th.cos()).cos() * th.sin().powi(dim as i32 - 3)).sum();
            super::sphere_area(dim - 2) * inner
        }
    }
}

/// Radial nodes on `[0, CHI_RADIUS]` resolving the phases `x_1 psi(r)` and `s r`
/// for `s <= s_max`, with `2^refine` panels per oscillation.
pub fn radial_nodes(x1: f64, s_max: f64, refine: u32) -> Vec<(f64, f64)> {
    let freq = x1.abs() * CHI_RADIUS / (1.0 - CHI_RADIUS * CHI_RADIUS).sqrt() + s_max.abs();
    let width = (2.0 * PI / freq.max(1e-300)).min(CHI_RADIUS / 32.0) / 2f64.powi(refine as i32);
    let panels = (CHI_RADIUS / width).ceil() as usize;
    let breaks: Vec<f64> = (0..=panels).map(|k| CHI_RADIUS * k as f64 / panels as f64).collect();
    Rule::new(PANEL_ORDER).composite(&breaks)
}

/// Evaluation route for [`oscillatory_integral`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    LeadingAsymptotic,
}

/// Self-consistency target of the refined quadrature.
pub const QUADRATURE_TOL: f64 = 1e-10;

fn radial_sum(x1: f64, s: f64, tau: f64, delta: f64, dim: usize, refine: u32) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (r, w) in radial_nodes(x1, s, refine) {
        let ps = psi(&[r])?;
        let amp = a_delta(tau, ps, delta) * Profile::Chi.eval(r) * r.powi(dim as i32 - 2) * sphere_kernel(dim, s * r);
        acc += Complex64::from_polar(w * amp, x1 * ps);
    }
    Ok(acc)
}

fn split(x: &[f64]) -> Result<(f64, f64)> {
    if x.len() < 2 {
        return Err(Error::Shape("the oscillatory integral needs d >= 2".into()));
    }
    Ok((x[0], x[1..].iter().map(|v| v * v).sum::<f64>().sqrt()))
}

/// `c_d = (2 pi)^{(d-1)/2} e^{i pi (d-1)/4}`, the Fresnel constant of a
/// positive-definite Hessian in `d - 1` variables.
pub fn fresnel_constant(dim: usize) -> Complex64 {
    let m = dim as f64 - 1.0;
    Complex64::from_polar((2.0 * PI).powf(m / 2.0), PI * m / 4.0)
}

/// Leading term `c_d e^{i(x_1 - |x|)} (x_1/|x|)^{(d+1)/2} a_delta(tau, -x'/|x|) x_1^{-(d-1)/2}`
/// for `x_1 >= 1/2`, `32 |x'| <= x_1`; `x_1 <= -1/2` by conjugate symmetry.
pub fn leading_term(x: &[f64], tau: f64, delta: f64, c_d: Complex64) -> Result<Complex64> {
    let (x1, s) = split(x)?;
    if x1.abs() < 0.5 || 32.0 * s > x1.abs() {
        return Err(Error::Domain(format!("leading term needs |x_1| >= 1/2 and 32|x'| <= |x_1|, got x_1 = {x1}, |x'| = {s}")));
    }
    let dim = x.len();
    let norm = x1.hypot(s);
    let ps = psi(&[s / norm])?;
    let a1 = x1.abs();
    let value = c_d
        * Complex64::from_polar(1.0, a1 - norm)
        * (a1 / norm).powf((dim as f64 + 1.0) / 2.0)
        * a_delta(tau, ps, delta)
        * a1.powf(-(dim as f64 - 1.0) / 2.0);
    Ok(if x1 > 0.0 { value } else { value.conj() })
}

/// `I_delta(x; tau)` by refined radial quadrature or by the leading asymptotic term.
pub fn oscillatory_integral(x: &[f64], tau: f64, delta: f64, method: Method) -> Result<Complex64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    match method {
        Method::LeadingAsymptotic => leading_term(x, tau, delta, fresnel_constant(x.len())),
        Method::Quadrature => {
            let (x1, s) = split(x)?;
            let mut prev = radial_sum(x1, s, tau, delta, x.len(), 0)?;
            for refine in 1..8 {
                let next = radial_sum(x1, s, tau, delta, x.len(), refine)?;
                if (next - prev).norm() <= QUADRATURE_TOL * next.norm().max(1e-300) {
                    return Ok(next);
                }
                prev = next;
            }
            Ok(prev)
        }
    }
}

/// `c_d` fitted at `x = (2^10, 0)`, `tau = 0`, `delta = 1/4`.
pub fn calibrated_constant(dim: usize) -> Result<Complex64> {
    let mut x = vec![0.0; dim];
    x[0] = 1024.0;
    let q = oscillatory_integral(&x, 0.0, 0.25, Method::Quadrature)?;
    Ok(q / leading_term(&x, 0.0, 0.25, Complex64::new(1.0, 0.0))?)
}

/// Relative error between the two routes along `x = (x_1, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryCheck {
    pub dim: usize,
    pub tau: f64,
    pub delta: f64,
    pub x1: Vec<f64>,
    pub rel_error: Vec<f64>,
    pub fit: LineFit,
    pub analytic_constant: [f64; 2],
    pub calibrated_constant: [f64; 2],
}

pub fn stationary_check(dim: usize, tau: f64, delta: f64, x1_list: &[f64]) -> Result<StationaryCheck> {
    let c_d = fresnel_constant(dim);
    let mut rel_error = Vec::with_capacity(x1_list.len());
    for &x1 in x1_list {
        let mut x = vec![0.0; dim];
        x[0] = x1;
        let q = oscillatory_integral(&x, tau, delta, Method::Quadrature)?;
        let l = leading_term(&x, tau, delta, c_d)?;
        rel_error.push((q - l).norm() / q.norm());
    }
    let fit = loglog_fit(x1_list, &rel_error)?;
    let cal = calibrated_constant(dim)?;
    Ok(StationaryCheck {
        dim,
        tau,
        delta,
        x1: x1_list.to_vec(),
        rel_error,
        fit,
        analytic_constant: [c_d.re, c_d.im],
        calibrated_constant: [cal.re, cal.im],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernels_match_closed_forms() {
        // K_4(t) = 4 pi sin(t)/t.
        for t in [0.3, 2.0, 17.0, 60.0] {
            assert!((sphere_kernel(4, t) - 4.0 * PI * t.sin() / t).abs() < 1e-12, "t={t}");
        }
        assert!((sphere_kernel(3, 0.0) - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn radial_route_matches_tensor_quadrature() {
        // Independent route: tensor Gauss-Legendre over the square [-0.1, 0.1]^2.
        let (x, tau, delta) = ([8.0, 3.0, -1.5], 0.01, 0.2);
        let rule = Rule::new(24);
        let nodes = rule.composite(&(0..=8).map(|k| -0.1 + 0.025 * k as f64).collect::<Vec<_>>());
        let mut tensor = Complex64::new(0.0, 0.0);
        for &(a, wa) in &nodes {
            for &(b, wb) in &nodes {
                let r = a.hypot(b);
                if r >= 0.1 {
                    continue;
                }
                let ps = psi(&[a, b]).unwrap();
                let amp = a_delta(tau, ps, delta) * Profile::Chi.eval(r);
                tensor += Complex64::from_polar(wa * wb * amp, x[1] * a + x[2] * b + x[0] * ps);
            }
        }
        let radial = oscillatory_integral(&x, tau, delta, Method::Quadrature).unwrap();
        assert!((radial - tensor).norm() < 1e-8 * tensor.norm(), "{radial} vs {tensor}");
    }

    #[test]
    fn conjugate_symmetry_in_x() {
        let q = oscillatory_integral(&[40.0, 0.5], 0.0, 0.3, Method::Quadrature).unwrap();
        let r = oscillatory_integral(&[-40.0, -0.5], 0.0, 0.3, Method::Quadrature).unwrap();
        assert!((q - r.conj()).norm() < 1e-12 * q.norm());
    }

    #[test]
    fn linear_in_inverse_delta_at_tau_zero() {
        let x = [64.0, 0.0, 0.0];
        let a = oscillatory_integral(&x, 0.0, 0.5, Method::Quadrature).unwrap();
        let b = oscillatory_integral(&x, 0.0, 0.125, Method::Quadrature).unwrap();
        assert!((b / a - Complex64::new(4.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn leading_term_domain() {
        assert!(oscillatory_integral(&[0.25, 0.0], 0.0, 0.1, Method::LeadingAsymptotic).is_err());
        assert!(oscillatory_integral(&[10.0, 1.0], 0.0, 0.1, Method::LeadingAsymptotic).is_err());
        assert!(oscillatory_integral(&[64.0, 1.0], 0.0, 0.1, Method::LeadingAsymptotic).is_ok());
    }

    #[test]
    fn leading_term_far_out() {
        // The cutoff chi has plateau 1/20, so the asymptotic regime is x_1 * 0.05^2 >> 1.
        for dim in [2, 3] {
            let mut x = vec![0.0; dim];
            x[0] = 2f64.powi(16);
            let q = oscillatory_integral(&x, 0.0, 0.25, Method::Quadrature).unwrap();
            let l = oscillatory_integral(&x, 0.0, 0.25, Method::LeadingAsymptotic).unwrap();
            assert!((q - l).norm() < 1e-4 * q.norm(), "dim={dim}");
        }
    }
}
