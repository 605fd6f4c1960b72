//! Anisotropic bump near the singular point `(0, 1, 0)` of the Carleman multiplier.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Domain, PeriodicGrid, SparseSpectrum, VectorField};
use crate::profiles::Profile;
use crate::sharpness::{check_dyadic, Sweep, SweepPoint};
use crate::symbols::carleman_symbol;

/// `hat h_delta(xi) = phi(xi_1 / delta) phi((xi_2 - 1) / delta) psi(|xi_bar| / sqrt(delta))`.
pub fn aniso_profile(xi: &[f64], delta: f64) -> f64 {
    let bar = xi[2..].iter().map(|v| v * v).sum::<f64>().sqrt();
    Profile::AnisoPhi.eval(xi[0] / delta) * Profile::AnisoPhi.eval((xi[1] - 1.0) / delta) * Profile::AnisoPsi.eval(bar / delta.sqrt())
}

/// Measure of the support box: `(3/2 delta)^2 |B^{d-2}| (2 sqrt(delta))^{d-2}`.
pub fn support_measure(dim: usize, delta: f64) -> f64 {
    (1.5 * delta).powi(2) * crate::sharpness::ball_volume(dim - 2) * (2.0 * delta.sqrt()).powi(dim as i32 - 2)
}

/// `max | |xi|^2 - 1 + 2 i xi_1 |` over the support box.
pub fn max_denominator(dim: usize, delta: f64) -> f64 {
    let (x1, x2) = (2.0 * delta, 1.0 + 2.0 * delta);
    let bar2 = if dim > 2 { 4.0 * delta } else { 0.0 };
    (x1 * x1 + x2 * x2 + bar2 - 1.0).hypot(2.0 * x1)
}

/// Lattice with spacing `delta/16` in `xi_1, xi_2` (half-cell offset in `xi_1`, so
/// no point has `xi_1 = 0`) and `sqrt(delta)/16` across; `n` points per axis.
pub fn aniso_grid(dim: usize, delta: f64, n: usize) -> Result<PeriodicGrid> {
    if dim < 2 {
        return Err(Error::Shape("the anisotropic bump needs d >= 2".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::ParameterRange(format!("delta must lie in (0, 1), got {delta}")));
    }
    if n < 64 || n % 2 == 1 {
        return Err(Error::UnresolvedScale { axis: 0, min_n: 64 });
    }
    let res = n as f64 / 64.0;
    let mut lengths = vec![16.0 * res * std::f64::consts::PI / delta.sqrt(); dim];
    lengths[0] = 16.0 * res * std::f64::consts::PI / delta;
    lengths[1] = lengths[0];
    let mut center = vec![0.0; dim];
    center[0] = 1.25 * delta;
    center[1] = 1.0 + 1.25 * delta;
    let mut offsets = vec![false; dim];
    offsets[0] = true;
    PeriodicGrid::new(vec![n; dim], lengths)?.with_offset(offsets)?.with_center(center)
}

/// `h_delta` on `grid` (one component, space domain).
pub fn aniso_field(delta: f64, grid: &PeriodicGrid) -> Result<VectorField> {
    let d = grid.dim();
    for axis in 0..d {
        let (scale, lo, hi) = match axis {
            0 => (delta, 0.5 * delta, 2.0 * delta),
            1 => (delta, 1.0 + 0.5 * delta, 1.0 + 2.0 * delta),
            _ => (delta.sqrt(), -2.0 * delta.sqrt(), 2.0 * delta.sqrt()),
        };
        let h = grid.dxi(axis);
        let n = grid.n()[axis];
        let (first, last) = (grid.xi_coord(axis, 0), grid.xi_coord(axis, n - 1));
        if h > scale / 8.0 || first > lo || last + h < hi {
            let reach = (hi - grid.center()[axis]).abs().max((lo - grid.center()[axis]).abs());
            return Err(Error::UnresolvedScale { axis, min_n: 2 * ((reach / h.min(scale / 8.0)).ceil() as usize + 1) });
        }
    }
    VectorField::single(grid.clone(), Domain::Frequency, 1, 0, |xi| Complex64::new(aniso_profile(xi, delta), 0.0))?.inverse()
}

/// Half-widths of the observation box `|x_1|, |x_2| <= 1/(100 delta)`, `|x_bar| <= 1/(100 sqrt(delta))`.
pub fn observation_box(dim: usize, delta: f64) -> Vec<f64> {
    let mut w = vec![1.0 / (100.0 * delta.sqrt()); dim];
    w[0] = 1.0 / (100.0 * delta);
    w[1] = w[0];
    w
}

/// `-2 + (d + 2)/2 (1/p - 1/q)`.
pub fn expected_slope(dim: usize, p: f64, q: f64) -> f64 {
    -2.0 + (dim as f64 + 2.0) / 2.0 * (1.0 / p - 1.0 / q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub dim: usize,
    pub p: f64,
    pub q: f64,
    pub n: usize,
    pub box_order: usize,
}

impl ProbeConfig {
    pub fn new(dim: usize, p: f64, q: f64) -> Self {
        Self { dim, p, q, n: 64, box_order: 4 }
    }
}

/// Fitted slope and the verdict "estimate impossible" when the ratio grows as `delta -> 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub sweep: Sweep,
    pub impossible: bool,
}

impl ProbeResult {
    /// CSV with header `delta,ratio`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,ratio\n");
        for p in &self.sweep.points {
            out.push_str(&format!("{:e},{:e}\n", p.delta, p.ratio));
        }
        out
    }
}

/// `||1_A carleman_symbol(D) h_delta||_q / ||h_delta||_p` at one scale.
pub fn probe_point(cfg: &ProbeConfig, delta: f64) -> Result<SweepPoint> {
    let grid = aniso_grid(cfg.dim, delta, cfg.n)?;
    let h = aniso_field(delta, &grid)?;
    let norm_f = h.lp_norm(cfg.p)?;
    let spec = SparseSpectrum::from_fn(&grid, |xi| {
        let a = aniso_profile(xi, delta);
        if a == 0.0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Ok(carleman_symbol(xi)? * a)
        }
    })?;
    let norm_tf = spec.box_norm(&observation_box(cfg.dim, delta), cfg.q, cfg.box_order)?;
    Ok(SweepPoint { delta, ratio: norm_tf / norm_f, norm_f, norm_tf })
}

pub fn carleman_exponent(cfg: &ProbeConfig, deltas: &[f64]) -> Result<ProbeResult> {
    check_dyadic(deltas)?;
    let points = crate::sharpness::per_scale(deltas, |d| probe_point(cfg, d))?;
    let sweep = Sweep::new(points, expected_slope(cfg.dim, cfg.p, cfg.q))?;
    Ok(ProbeResult { impossible: sweep.fit.slope < 0.0, sweep })
}
