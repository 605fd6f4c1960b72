//! Failure of Carleman and uniform Sobolev estimates for the Lame operator.
//!
//! `e^{v.x} (-Delta^*) e^{-v.x}` has symbol `M_eta = mu (eta^t eta) I + (lambda + mu) eta eta^t`
//! with `eta = xi + i v`; for `v = e_1` the `(1, 2)` entry of `M_eta^{-1}` is a
//! multiple of `(xi_1 + i) xi_2 / (|xi|^2 - 1 + 2 i xi_1)^2`, which is singular
//! on a codimension-two set and drives both experiments here.

pub mod aniso;
pub mod divergence;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Domain, PeriodicGrid, VectorField};
use crate::fit::{loglog_fit, LineFit};
use crate::symbols::{conjugated_inverse, conjugated_matrix, LameParameters, SymbolMatrix};

/// Conjugated Lame system, optionally with lower-order terms `M_1 grad + M_2`.
///
/// `(M_1 grad u)_j = sum_k (M_1)_{jk} d_k u_j`, so row `j` of `M_1` is the drift
/// acting on component `j`; `M_2` multiplies `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlemanConfig {
    pub dim: usize,
    pub params: LameParameters,
    v: Vec<f64>,
    pub m1: Option<SymbolMatrix>,
    pub m2: Option<SymbolMatrix>,
}

impl CarlemanConfig {
    /// `v = e_1`, no lower-order terms.
    pub fn new(dim: usize, params: LameParameters) -> Result<Self> {
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        Self::with_direction(dim, params, v)
    }

    pub fn with_direction(dim: usize, params: LameParameters, v: Vec<f64>) -> Result<Self> {
        if dim < 2 || v.len() != dim {
            return Err(Error::Shape(format!("direction of length {} in dimension {dim}", v.len())));
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameters(format!("|v| must be 1, got {n}")));
        }
        Ok(Self { dim, params, v, m1: None, m2: None })
    }

    pub fn direction(&self) -> &[f64] {
        &self.v
    }

    /// Symbol of the conjugated operator at `xi`.
    pub fn symbol(&self, xi: &[f64]) -> SymbolMatrix {
        let base = conjugated_matrix(xi, &self.v, &self.params);
        if self.m1.is_none() && self.m2.is_none() {
            return base;
        }
        let eta: Vec<Complex64> = xi.iter().zip(&self.v).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let i = Complex64::new(0.0, 1.0);
        SymbolMatrix::from_fn(self.dim, |j, k| {
            let mut e = base.get(j, k);
            if let (Some(m1), true) = (&self.m1, j == k) {
                e += i * (0..self.dim).map(|l| m1.get(j, l) * eta[l]).sum::<Complex64>();
            }
            if let Some(m2) = &self.m2 {
                e += m2.get(j, k);
            }
            e
        })
    }

    /// Inverse symbol; closed form without lower-order terms.
    pub fn inverse_symbol(&self, xi: &[f64]) -> Result<SymbolMatrix> {
        if self.m1.is_none() && self.m2.is_none() {
            conjugated_inverse(xi, &self.v, &self.params)
        } else {
            self.symbol(xi).inverse()
        }
    }
}

/// `hat u = S(xi)^{-1} hat f` for the conjugated symbol `S`.
pub fn conjugated_solve(config: &CarlemanConfig, f: &VectorField) -> Result<VectorField> {
    if f.ncomp() != config.dim || f.grid().dim() != config.dim {
        return Err(Error::Shape(format!("{}-component field for a {}-dimensional system", f.ncomp(), config.dim)));
    }
    f.apply_multiplier(|xi| config.inverse_symbol(xi))
}

/// Outcome of the scaling test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingVerdict {
    pub dim: usize,
    pub p: f64,
    pub q: f64,
    pub scales: Vec<f64>,
    pub ratios: Vec<f64>,
    pub fit: LineFit,
    /// `d (1/p - 1/q) - 2`.
    pub predicted: f64,
    pub bounded: bool,
}

/// Tolerance on the fitted exponent for the "bounded" verdict.
pub const SCALING_TOL: f64 = 0.05;

/// `||u_s||_q / ||e^{s v.x} (-Delta^*) e^{-s v.x} u_s||_p` for `u_s(x) = u(s x)`,
/// `u` a fixed Gaussian vector field; the fitted power of `s` is reported.
///
/// Scaling `v` with `s` keeps the weighted estimate invariant in form, so
/// only the homogeneity `d (1/p - 1/q) - 2` survives.
pub fn scaling_necessity_check(dim: usize, p: f64, q: f64, scales: &[f64]) -> Result<ScalingVerdict> {
    if !(1.0..=f64::INFINITY).contains(&p) || !(1.0..=f64::INFINITY).contains(&q) {
        return Err(Error::Domain(format!("exponents must be >= 1, got p = {p}, q = {q}")));
    }
    if scales.len() < 2 || scales.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::Domain("need at least two positive scales".into()));
    }
    let (s_min, s_max) = scales.iter().fold((f64::MAX, 0.0f64), |(a, b), s| (a.min(*s), b.max(*s)));
    // Gaussian width 1/s: the box must hold 7/s_min, the lattice resolve s_max.
    let half = 7.0 / s_min;
    let n_needed = (2.0 * half * s_max / 0.6).ceil() as usize;
    let n = n_needed.next_power_of_two().max(16);
    let grid = PeriodicGrid::cubic(dim, n, half)?;
    let params = LameParameters::new(1.0, 2.0)?;
    let mut ratios = Vec::with_capacity(scales.len());
    for &s in scales {
        let u = VectorField::from_fn(grid.clone(), Domain::Space, dim, |x| {
            let r2: f64 = x.iter().map(|a| (s * a).powi(2)).sum();
            let g = (-0.5 * r2).exp();
            (0..dim).map(|j| Complex64::new(g * (1.0 + 0.25 * j as f64), 0.0)).collect()
        })?;
        let mut v = vec![0.0; dim];
        v[0] = s;
        let pu = u.apply_multiplier(|xi| Ok(conjugated_matrix(xi, &v, &params)))?;
        ratios.push(u.lp_norm(q)? / pu.lp_norm(p)?);
    }
    let fit = loglog_fit(scales, &ratios)?;
    let predicted = dim as f64 * (1.0 / p - 1.0 / q) - 2.0;
    Ok(ScalingVerdict { dim, p, q, scales: scales.to_vec(), ratios, bounded: fit.slope.abs() < SCALING_TOL, fit, predicted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::carleman_symbol;

    fn params() -> LameParameters {
        LameParameters::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn first_component_is_the_scalar_carleman_multiplier() {
        let cfg = CarlemanConfig::new(3, params()).unwrap();
        let factor = 1.0 / params().p_modulus() - 1.0;
        let grid = PeriodicGrid::cubic(3, 8, 7.0).unwrap().with_half_offset();
        for xi in grid.frequencies() {
            let m = cfg.inverse_symbol(&xi).unwrap().get(0, 1);
            let want = carleman_symbol(&xi).unwrap() * factor;
            assert!((m - want).norm() <= 1e-12 * want.norm().max(1.0), "xi={xi:?}");
        }
    }

    #[test]
    fn solve_matches_scalar_multiplier_on_fields() {
        let cfg = CarlemanConfig::new(2, params()).unwrap();
        let grid = PeriodicGrid::cubic(2, 32, 10.0).unwrap();
        let h = |x: &[f64]| Complex64::new((-(x[0] * x[0] + x[1] * x[1]) / 4.0).exp(), 0.0);
        let f = VectorField::single(grid.clone(), Domain::Space, 2, 1, h).unwrap();
        let u = conjugated_solve(&cfg, &f).unwrap();
        let factor = 1.0 / params().p_modulus() - 1.0;
        let scalar =
            VectorField::single(grid, Domain::Space, 1, 0, h).unwrap().apply_scalar(|xi| Ok(carleman_symbol(xi)? * factor)).unwrap();
        let err = u.components()[0].iter().zip(&scalar.components()[0]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "err={err}");
    }

    #[test]
    fn rotation_covariance() {
        // v = e_2 on the rotated field equals the rotated v = e_1 solution. The half-offset
        // lattice is symmetric under xi -> -xi, so 90 degree rotations permute it exactly.
        let n = 16;
        let grid = PeriodicGrid::cubic(2, n, 6.0).unwrap().with_half_offset();
        let g = |xi: &[f64]| (-(xi[0] - 1.0).powi(2) - 0.5 * (xi[1] + 0.5).powi(2)).exp();
        let fhat = VectorField::from_fn(grid.clone(), Domain::Frequency, 2, |xi| {
            vec![Complex64::new(g(xi), 0.0), Complex64::new(0.3 * g(xi), 0.1)]
        })
        .unwrap();
        // R(xi_0, xi_1) = (-xi_1, xi_0) on centered indices; vectors rotate the same way.
        let rot = |i: usize, j: usize| (n - 1 - j, i);
        let rotate = |c: &[Vec<Complex64>]| {
            let mut out = vec![vec![Complex64::new(0.0, 0.0); n * n]; 2];
            for i in 0..n {
                for j in 0..n {
                    let (a, b) = rot(i, j);
                    out[0][a * n + b] = -c[1][i * n + j];
                    out[1][a * n + b] = c[0][i * n + j];
                }
            }
            out
        };
        let frot = VectorField::new(grid.clone(), Domain::Frequency, rotate(fhat.components())).unwrap();
        let u = conjugated_solve(&CarlemanConfig::new(2, params()).unwrap(), &fhat.inverse().unwrap()).unwrap().forward().unwrap();
        let cfg2 = CarlemanConfig::with_direction(2, params(), vec![0.0, 1.0]).unwrap();
        let ur = conjugated_solve(&cfg2, &frot.inverse().unwrap()).unwrap().forward().unwrap();
        let want = rotate(u.components());
        let err = (0..2).flat_map(|c| ur.components()[c].iter().zip(&want[c]).map(|(a, b)| (a - b).norm())).fold(0.0, f64::max);
        assert!(err < 1e-12 * u.max_abs(), "err={err}");
    }

    #[test]
    fn scalar_case_decouples() {
        let p = LameParameters::new(1.0, -1.0).unwrap();
        let cfg = CarlemanConfig::new(2, p).unwrap();
        let m = cfg.inverse_symbol(&[0.3, 1.7]).unwrap();
        assert!(m.get(0, 1).norm() < 1e-15 && m.get(1, 0).norm() < 1e-15);
    }

    #[test]
    fn zero_lower_order_terms_reduce_to_lame() {
        let mut cfg = CarlemanConfig::new(3, params()).unwrap();
        let xi = [0.2, -0.4, 1.1];
        let plain = cfg.inverse_symbol(&xi).unwrap();
        cfg.m1 = Some(SymbolMatrix::zeros(3));
        cfg.m2 = Some(SymbolMatrix::zeros(3));
        assert!(cfg.inverse_symbol(&xi).unwrap().max_abs_diff(&plain) < 1e-13);
        cfg.m2 = Some(SymbolMatrix::scalar(3, Complex64::new(0.5, 0.0)));
        let s = cfg.symbol(&xi);
        assert!(s.matmul(&cfg.inverse_symbol(&xi).unwrap()).max_abs_diff(&SymbolMatrix::identity(3)) < 1e-13);
    }

    #[test]
    fn direction_must_be_unit() {
        assert!(matches!(CarlemanConfig::with_direction(2, params(), vec![2.0, 0.0]), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn scaling_exponents() {
        let scales = [1.0, 0.8, 0.64, 0.5];
        for (d, p, q, want) in [(2, 1.0, f64::INFINITY, 0.0), (3, 2.0, 2.0, -2.0), (2, 2.0, 2.0, -2.0)] {
            let v = scaling_necessity_check(d, p, q, &scales).unwrap();
            assert!((v.fit.slope - want).abs() < 0.02, "d={d} p={p} q={q} slope={}", v.fit.slope);
            assert_eq!(v.bounded, want == 0.0);
            assert!((v.predicted - want).abs() < 1e-15);
        }
    }
}
