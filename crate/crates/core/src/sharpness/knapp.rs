//! Knapp slab: `h_delta` with Fourier support in a `delta x sqrt(delta)` slab
//! tangent to the unit sphere at `e_d`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_dyadic, per_scale, ObservationSet, Sweep, SweepPoint};
use crate::error::{Error, Result};
use crate::field::{restricted_ratio, Domain, PeriodicGrid, SparseSpectrum, VectorField};
use crate::profiles::Profile;
use crate::symbols::{imag_symbol, ImagVariant, LameParameters};

/// Grid points per axis used by the sweep.
pub const DEFAULT_N: usize = 64;

/// Gauss-Legendre order per axis on the observation box.
pub const DEFAULT_BOX_ORDER: usize = 4;

/// `hat h_delta(xi) = psi((xi_d - 1) / delta) prod_j phi(xi_j / sqrt(delta))`.
pub fn knapp_profile(xi: &[f64], delta: f64) -> f64 {
    let (t, y) = xi.split_last().expect("nonempty frequency");
    let s = delta.sqrt();
    Profile::SlabPsi.eval((t - 1.0) / delta) * y.iter().map(|v| Profile::SlabPhi.eval(v / s)).product::<f64>()
}

/// Measure of `supp hat h_delta`: `(3/4) delta (2 sqrt(delta))^{d-1}`.
pub fn support_measure(dim: usize, delta: f64) -> f64 {
    0.75 * delta * (2.0 * delta.sqrt()).powi(dim as i32 - 1)
}

/// Measure of `{hat h_delta = 1}`: `(1/4) delta (sqrt(delta))^{d-1}`.
pub fn plateau_measure(dim: usize, delta: f64) -> f64 {
    0.25 * delta * delta.sqrt().powi(dim as i32 - 1)
}

/// Half-widths of `A_delta`; the last axis is the normal direction.
pub fn a_delta_box(dim: usize, delta: f64) -> Vec<f64> {
    let mut w = vec![1.0 / (100.0 * dim as f64 * delta.sqrt()); dim];
    w[dim - 1] = 1.0 / (100.0 * delta);
    w
}

/// `max |x . (xi - e_d)|` over `x in A_delta`, `xi in supp hat h_delta`.
pub fn phase_coherence(dim: usize, delta: f64) -> f64 {
    let w = a_delta_box(dim, delta);
    w[dim - 1] * delta + w[..dim - 1].iter().map(|v| v * delta.sqrt()).sum::<f64>()
}

/// Grid with spacing `delta / (n/2)` along `x_d` and `sqrt(delta) / (n/2)` across,
/// centered in frequency at `e_d`.
pub fn knapp_grid(dim: usize, delta: f64, n: usize) -> Result<PeriodicGrid> {
    if dim < 2 {
        return Err(Error::Shape("the Knapp slab needs d >= 2".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::ParameterRange(format!("delta must lie in (0, 1), got {delta}")));
    }
    if n < 16 || n % 2 == 1 {
        return Err(Error::UnresolvedScale { axis: dim - 1, min_n: 16 });
    }
    let half = |w: f64| std::f64::consts::PI * n as f64 / (2.0 * w);
    let mut lengths = vec![half(delta.sqrt()); dim];
    lengths[dim - 1] = half(delta);
    let mut center = vec![0.0; dim];
    center[dim - 1] = 1.0;
    PeriodicGrid::new(vec![n; dim], lengths)?.with_center(center)
}

/// Checks that the lattice resolves both scales and covers the slab.
pub fn validate_grid(grid: &PeriodicGrid, delta: f64) -> Result<()> {
    let d = grid.dim();
    for axis in 0..d {
        let (scale, lo, hi) =
            if axis == d - 1 { (delta, 1.0 + 0.25 * delta, 1.0 + delta) } else { (delta.sqrt(), -delta.sqrt(), delta.sqrt()) };
        let n = grid.n()[axis];
        let first = grid.xi_coord(axis, 0);
        let last = grid.xi_coord(axis, n - 1);
        let h = grid.dxi(axis);
        let reach = (hi - grid.center()[axis]).abs().max((lo - grid.center()[axis]).abs());
        let min_n = 2 * ((reach / h).ceil() as usize + 1);
        if h > scale / 8.0 {
            return Err(Error::UnresolvedScale { axis, min_n: min_n.max(16) });
        }
        if first > lo + 1e-12 * scale || last + h < hi - 1e-12 * scale {
            return Err(Error::UnresolvedScale { axis, min_n });
        }
    }
    Ok(())
}

/// `h_delta` on `grid` (one component, space domain).
pub fn knapp_field(delta: f64, grid: &PeriodicGrid) -> Result<VectorField> {
    validate_grid(grid, delta)?;
    let hat = VectorField::single(grid.clone(), Domain::Frequency, 1, 0, |xi| Complex64::new(knapp_profile(xi, delta), 0.0))?;
    hat.inverse()
}

/// Where the Knapp ratio is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnappObservation {
    /// The box `A_delta`, integrated by tensor Gauss-Legendre nodes
    /// (it is far smaller than the grid spacing).
    ADelta,
    /// Every grid point.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnappConfig {
    pub dim: usize,
    pub p: f64,
    pub q: f64,
    pub params: LameParameters,
    pub n: usize,
    pub observation: KnappObservation,
    pub box_order: usize,
}

impl KnappConfig {
    pub fn new(dim: usize, p: f64, q: f64) -> Result<Self> {
        Ok(Self {
            dim,
            p,
            q,
            params: LameParameters::new(1.0, 2.0)?,
            n: DEFAULT_N,
            observation: KnappObservation::ADelta,
            box_order: DEFAULT_BOX_ORDER,
        })
    }
}

/// `-1 + (d + 1)/2 (1/p - 1/q)`.
pub fn expected_slope(dim: usize, p: f64, q: f64) -> f64 {
    -1.0 + (dim as f64 + 1.0) / 2.0 * (1.0 / p - 1.0 / q)
}

/// The restricted ratio `||1_A I_delta(D) h_delta||_q / ||h_delta||_p` at one scale.
pub fn knapp_point(cfg: &KnappConfig, delta: f64) -> Result<SweepPoint> {
    cfg.params.require_nondegenerate()?;
    let rho = cfg.params.rho();
    let grid = knapp_grid(cfg.dim, delta, cfg.n)?;
    let h = knapp_field(delta, &grid)?;
    let norm_f = h.lp_norm(cfg.p)?;
    if norm_f == 0.0 {
        return Err(Error::Domain("Knapp field vanished on the grid".into()));
    }
    let symbol = |xi: &[f64]| imag_symbol(xi, delta, rho, ImagVariant::Raw).map(|s| Complex64::new(s.total, 0.0));
    let norm_tf = match cfg.observation {
        KnappObservation::ADelta => {
            let spec = SparseSpectrum::from_fn(&grid, |xi| Ok(symbol(xi)? * knapp_profile(xi, delta)))?;
            spec.box_norm(&a_delta_box(cfg.dim, delta), cfg.q, cfg.box_order)?
        }
        KnappObservation::Full => {
            let obs = ObservationSet::Full;
            restricted_ratio(symbol, &h, cfg.p, cfg.q, |x| obs.contains(x))? * norm_f
        }
    };
    Ok(SweepPoint { delta, ratio: norm_tf / norm_f, norm_f, norm_tf })
}

/// Dyadic sweep of [`knapp_point`] with the fitted slope.
pub fn knapp_exponent(cfg: &KnappConfig, deltas: &[f64]) -> Result<Sweep> {
    check_dyadic(deltas)?;
    let points = per_scale(deltas, |d| knapp_point(cfg, d))?;
    Sweep::new(points, expected_slope(cfg.dim, cfg.p, cfg.q))
}
