//! The singularity exponent `gamma`, the bound function `kappa` and the
//! spectral regions `{kappa <= ell}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{classify, frac, ExponentPair};
use crate::error::{Error, Result};

pub const DEFAULT_ZBOUNDARY_SAMPLES: usize = 720;

/// `gamma` together with the power of `|z|` in `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundProfile {
    pub gamma: Rational64,
    pub kappa_exponent: Rational64,
}

/// `max{0, 1 - (d+1)/2 (x-y), (d+1)/2 - d x, d y - (d-1)/2}`.
pub fn gamma(dim: usize, p: &ExponentPair) -> Rational64 {
    let d = dim as i64;
    let terms = [
        Rational64::zero(),
        Rational64::from_integer(1) - frac(d + 1, 2) * p.gap(),
        frac(d + 1, 2) - Rational64::from_integer(d) * p.x(),
        Rational64::from_integer(d) * p.y() - frac(d - 1, 2),
    ];
    terms.into_iter().max().unwrap_or_else(Rational64::zero)
}

pub fn bound_profile(dim: usize, p: &ExponentPair) -> BoundProfile {
    BoundProfile { gamma: gamma(dim, p), kappa_exponent: frac(-1, 1) + frac(dim as i64, 2) * p.gap() }
}

/// Distance from `w` to the ray `[0, inf)`.
pub fn dist_to_ray(w: Complex64) -> Result<f64> {
    if w.re == 0.0 && w.im == 0.0 {
        return Err(Error::Domain("dist_to_ray needs w != 0".into()));
    }
    Ok(if w.re >= 0.0 { w.im.abs() } else { w.norm() })
}

fn check_off_ray(z: Complex64) -> Result<()> {
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(Error::SpectralParameter { re: z.re, im: z.im });
    }
    Ok(())
}

/// `|z|^{-1 + d(x-y)/2} * dist(z/|z|, [0, inf))^{-gamma}`.
pub fn kappa(dim: usize, p: &ExponentPair, z: Complex64) -> Result<f64> {
    check_off_ray(z)?;
    let prof = bound_profile(dim, p);
    let r = z.norm();
    let a = prof.kappa_exponent.to_f64().unwrap_or(f64::NAN);
    let g = prof.gamma.to_f64().unwrap_or(f64::NAN);
    Ok(r.powf(a) * dist_to_ray(z / r)?.powf(-g))
}

fn supported(dim: usize, p: &ExponentPair) -> Result<()> {
    if !classify(dim, p)?.has_bound() {
        return Err(Error::UnsupportedExponent { x: super::render(p.x()), y: super::render(p.y()) });
    }
    Ok(())
}

/// Whether `kappa(z) <= ell`.
pub fn zregion_contains(dim: usize, p: &ExponentPair, ell: f64, z: Complex64) -> Result<bool> {
    if !(ell > 0.0) {
        return Err(Error::Domain(format!("ell must be positive, got {ell}")));
    }
    supported(dim, p)?;
    Ok(kappa(dim, p, z)? <= ell)
}

/// Sampled boundary of `{kappa <= ell}` in the cut plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ZBoundary {
    /// Closed-form radius `r(theta)` at midpoint angles in `(0, 2 pi)`.
    Curve(Vec<Complex64>),
    /// `kappa` is constant along rays; the boundary consists of these rays,
    /// each sampled on `(0, radius]`.
    Rays { angles: Vec<f64>, points: Vec<Complex64> },
    /// The level set is empty or the whole cut plane.
    Empty,
}

impl ZBoundary {
    pub fn points(&self) -> &[Complex64] {
        match self {
            ZBoundary::Curve(p) | ZBoundary::Rays { points: p, .. } => p,
            ZBoundary::Empty => &[],
        }
    }
}

/// Boundary of `Z(ell)`: `r(theta) = (ell * D(theta)^gamma)^{1/a}` with `a` the
/// power of `|z|`; for `a = 0` the boundary rays are traced out to `ray_radius`.
pub fn zboundary_with_radius(dim: usize, p: &ExponentPair, ell: f64, samples: usize, ray_radius: f64) -> Result<ZBoundary> {
    if !(ell > 0.0) {
        return Err(Error::Domain(format!("ell must be positive, got {ell}")));
    }
    if samples == 0 {
        return Err(Error::Domain("need at least one boundary sample".into()));
    }
    supported(dim, p)?;
    let prof = bound_profile(dim, p);
    let a = prof.kappa_exponent.to_f64().unwrap_or(f64::NAN);
    let g = prof.gamma.to_f64().unwrap_or(f64::NAN);
    if !prof.kappa_exponent.is_zero() {
        let pts = (0..samples)
            .map(|k| {
                let theta = 2.0 * PI * (k as f64 + 0.5) / samples as f64;
                let w = Complex64::from_polar(1.0, theta);
                let dist = dist_to_ray(w).unwrap_or(1.0);
                let r = (ell * dist.powf(g)).powf(1.0 / a);
                w * r
            })
            .collect();
        return Ok(ZBoundary::Curve(pts));
    }
    // kappa = D(theta)^{-gamma}; D = sin(theta) on the right half-plane, 1 on the left.
    if prof.gamma.is_zero() {
        return Ok(ZBoundary::Empty);
    }
    let target = ell.powf(-1.0 / g);
    let angles = if target < 1.0 {
        let t = target.asin();
        vec![t, 2.0 * PI - t]
    } else if target == 1.0 {
        vec![PI / 2.0, 3.0 * PI / 2.0]
    } else {
        return Ok(ZBoundary::Empty);
    };
    let points =
        angles.iter().flat_map(|&t| (1..=samples).map(move |k| Complex64::from_polar(ray_radius * k as f64 / samples as f64, t))).collect();
    Ok(ZBoundary::Rays { angles, points })
}

/// [`zboundary_with_radius`] with rays traced to radius 10.
pub fn zregion_boundary(dim: usize, p: &ExponentPair, ell: f64, samples: usize) -> Result<ZBoundary> {
    zboundary_with_radius(dim, p, ell, samples, 10.0)
}
