//! Two logarithmic divergences in `d = 2` along the annular family
//! `hat h_eps = phi_0(eps^2 |xi|) - phi_0(eps |xi|)`, supported in `1/(2 eps) <= |xi| <= 1/eps^2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::profiles::Profile;
use crate::quadrature::{bessel_j0, geometric_breaks, Rule};
use crate::symbols::LameParameters;

/// Relative change at which polar refinement stops.
pub const REFINE_TOL: f64 = 1e-4;

/// `hat h_eps` as a function of `|xi|`.
pub fn annulus_profile(r: f64, eps: f64) -> f64 {
    Profile::LowPass.eval(eps * eps * r) - Profile::LowPass.eval(eps * r)
}

/// `(|xi|^2 - 1)^2 - (2 xi_1)^2 - |xi|^4 / 2`, nonnegative once `|xi| >= 4`.
pub fn positivity_margin(xi: &[f64]) -> f64 {
    let r2 = xi[0] * xi[0] + xi[1] * xi[1];
    (r2 - 1.0).powi(2) - 4.0 * xi[0] * xi[0] - r2 * r2 / 2.0
}

/// One row of a divergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub eps: f64,
    pub value: f64,
    pub ln_inv_eps: f64,
}

/// Values against `ln(1/eps)` with the linear fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceTable {
    pub rows: Vec<DivergenceRow>,
    pub fit: LineFit,
}

impl DivergenceTable {
    fn new(rows: Vec<DivergenceRow>) -> Result<Self> {
        let x: Vec<f64> = rows.iter().map(|r| r.ln_inv_eps).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.value).collect();
        Ok(Self { fit: fit_line(&x, &y)?, rows })
    }

    /// Strictly increasing as `eps` decreases.
    pub fn is_monotone(&self) -> bool {
        let mut sorted = self.rows.clone();
        sorted.sort_by(|a, b| b.eps.total_cmp(&a.eps));
        sorted.windows(2).all(|w| w[1].value > w[0].value)
    }

    /// CSV with header `eps,<value_name>,ln_inv_eps`.
    pub fn to_csv(&self, value_name: &str) -> String {
        let mut out = format!("eps,{value_name},ln_inv_eps\n");
        for r in &self.rows {
            out.push_str(&format!("{:e},{:e},{:e}\n", r.eps, r.value, r.ln_inv_eps));
        }
        out
    }
}

/// `int_{R^2} F(xi) hat h_eps(|xi|) dxi` in polar coordinates: Gauss-Legendre
/// panels geometric in `|xi|` (breaks at the profile transitions), trapezoid in
/// angle; both refined by doubling until the relative change is below [`REFINE_TOL`].
pub fn annulus_integral(eps: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    let edges = [0.5 / eps, 1.0 / eps, 0.5 / (eps * eps), 1.0 / (eps * eps)];
    let rule = Rule::new(8);
    let eval = |level: u32| {
        let ratio = 2f64.powf(1.0 / 2f64.powi(level as i32));
        let n_theta = 16usize << level;
        let mut nodes = Vec::new();
        for w in edges.windows(2) {
            nodes.extend(rule.composite(&geometric_breaks(w[0], w[1], ratio)));
        }
        let mut total = 0.0;
        for (r, wr) in nodes {
            let h = annulus_profile(r, eps);
            if h == 0.0 {
                continue;
            }
            let ang: f64 = (0..n_theta)
                .map(|k| {
                    let t = 2.0 * PI * (k as f64 + 0.5) / n_theta as f64;
                    f(r * t.cos(), r * t.sin())
                })
                .sum::<f64>()
                * (2.0 * PI / n_theta as f64);
            total += wr * r * h * ang;
        }
        total
    };
    let mut prev = eval(0);
    for level in 1..8 {
        let next = eval(level);
        if (next - prev).abs() <= REFINE_TOL * next.abs() {
            return next;
        }
        prev = next;
    }
    prev
}

fn check_eps_list(eps: &[f64], max: f64) -> Result<()> {
    if eps.len() < 2 {
        return Err(Error::Domain("need at least two values of eps".into()));
    }
    for &e in eps {
        if !(e > 0.0 && e <= max) {
            return Err(Error::ParameterRange(format!("eps = {e} must lie in (0, {max}]")));
        }
    }
    Ok(())
}

/// `Re u_2(0)` for the conjugated system with `v = e_1` and right side `(0, h_eps)`:
/// `(2 pi)^{-2} int [Re(1/w)/mu + (1/(lambda + 2 mu) - 1/mu) xi_2^2 Re(1/w^2)] hat h_eps`,
/// `w = |xi|^2 - 1 + 2 i xi_1`.
pub fn re_u2_at_origin(params: &LameParameters, eps: f64) -> f64 {
    let (mu, pm) = (params.mu(), params.p_modulus());
    let integral = annulus_integral(eps, |x1, x2| {
        let w = Complex64::new(x1 * x1 + x2 * x2 - 1.0, 2.0 * x1);
        let inv = w.inv();
        inv.re / mu + (1.0 / pm - 1.0 / mu) * x2 * x2 * (inv * inv).re
    });
    integral / (4.0 * PI * PI)
}

/// Table of `Re u_2(0)` against `ln(1/eps)`.
pub fn log_divergence(params: &LameParameters, eps_list: &[f64]) -> Result<DivergenceTable> {
    params.require_nondegenerate()?;
    check_eps_list(eps_list, 0.125)?;
    let rows = crate::sharpness::per_scale(eps_list, |eps| {
        Ok(DivergenceRow { eps, value: re_u2_at_origin(params, eps), ln_inv_eps: (1.0 / eps).ln() })
    })?;
    DivergenceTable::new(rows)
}

/// `Re T_z h_eps(0)` for the first component of the normalized resolvent
/// `(|xi|^2 - z)^{-1} (I - Pi) + (rho |xi|^2 - z)^{-1} Pi` applied to `(h_eps, 0)`.
pub fn re_resolvent_at_origin(z: Complex64, rho: f64, eps: f64) -> f64 {
    let (a, b) = (z.re, z.im);
    let lor = |t: f64| (t - a) / ((t - a).powi(2) + b * b);
    let integral = annulus_integral(eps, |x1, x2| {
        let r2 = x1 * x1 + x2 * x2;
        lor(r2) * x2 * x2 / r2 + lor(rho * r2) * x1 * x1 / r2
    });
    integral / (4.0 * PI * PI)
}

/// Table of `Re T_z h_eps(0)` against `ln(1/eps)` for `|z| = 1`, `z != 1`.
pub fn admissibility_divergence(z: Complex64, rho: f64, eps_list: &[f64]) -> Result<DivergenceTable> {
    if (z.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("|z| must be 1, got {}", z.norm())));
    }
    if (z - 1.0).norm() < 1e-12 {
        return Err(Error::ExcludedParameter("z = 1 lies on the spectrum".into()));
    }
    if !(rho > 0.0) {
        return Err(Error::InvalidParameters(format!("rho must be positive, got {rho}")));
    }
    check_eps_list(eps_list, 0.5 * rho.sqrt().min(1.0))?;
    let rows = crate::sharpness::per_scale(eps_list, |eps| {
        Ok(DivergenceRow { eps, value: re_resolvent_at_origin(z, rho, eps), ln_inv_eps: (1.0 / eps).ln() })
    })?;
    DivergenceTable::new(rows)
}

/// Radial inverse transform of `phi_0(|xi|)` in the plane:
/// `Phi(u) = (2 pi)^{-1} int_0^1 phi_0(t) J_0(u t) t dt`.
pub fn low_pass_kernel(u: f64) -> f64 {
    let panels = (u / PI).ceil().max(1.0) as usize + 4;
    let breaks: Vec<f64> = (0..=panels).map(|k| k as f64 / panels as f64).collect();
    let rule = Rule::new(12);
    rule.composite(&breaks).iter().map(|(t, w)| w * Profile::LowPass.eval(*t) * bessel_j0(u * t) * t).sum::<f64>() / (2.0 * PI)
}

/// `||h_eps||_{L^1(R^2)}` from `h_eps(x) = eps^{-4} Phi(|x|/eps^2) - eps^{-2} Phi(|x|/eps)`.
///
/// After `|x| = eps^2 u` the norm is `2 pi int |Phi(u) - eps^2 Phi(eps u)| u du`; beyond
/// `u_max` the first term is negligible and the second integrates to a rescaled tail.
pub fn h_eps_l1(eps: f64, u_max: f64) -> f64 {
    let rule = Rule::new(12);
    let panels = (u_max / 2.0).ceil() as usize;
    let breaks: Vec<f64> = (0..=panels).map(|k| u_max * k as f64 / panels as f64).collect();
    let nodes = rule.composite(&breaks);
    let near: f64 = nodes.iter().map(|(u, w)| w * (low_pass_kernel(*u) - eps * eps * low_pass_kernel(eps * u)).abs() * u).sum();
    // int_{eps u_max}^{u_max} |Phi(v)| v dv.
    let far: f64 =
        Rule::new(12).composite(&geometric_breaks(eps * u_max, u_max, 1.25)).iter().map(|(v, w)| w * low_pass_kernel(*v).abs() * v).sum();
    2.0 * PI * (near + far)
}
