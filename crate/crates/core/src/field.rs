//! Vector fields on periodic grids, the quadrature Fourier pair
//! `f^(xi) = int e^{-i x.xi} f(x) dx`, multipliers, and `L^p` / Lorentz norms.
//!
//! A grid may carry a frequency `center` `c`: the stored samples `v` then
//! represent `u(x) = e^{i c.x} v(x)`, and the frequency lattice is shifted by `c`.
//! Moduli and hence all norms are unaffected by the modulation.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbols::{lame_matrix, resolvent_symbol, LameParameters, SymbolMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Box `prod [-L_a, L_a)` sampled with `n_a` points per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    n: Vec<usize>,
    half_length: Vec<f64>,
    offset: Vec<bool>,
    center: Vec<f64>,
}

impl PeriodicGrid {
    pub fn new(n: Vec<usize>, half_length: Vec<f64>) -> Result<Self> {
        if n.is_empty() || n.len() != half_length.len() {
            return Err(Error::Shape(format!("grid axes: {} sizes, {} half-lengths", n.len(), half_length.len())));
        }
        if let Some(bad) = n.iter().find(|&&k| k < 2 || k % 2 != 0) {
            return Err(Error::Shape(format!("points per axis must be even and >= 2, got {bad}")));
        }
        if let Some(bad) = half_length.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(Error::Shape(format!("half-length must be positive, got {bad}")));
        }
        let d = n.len();
        Ok(Self { n, half_length, offset: vec![false; d], center: vec![0.0; d] })
    }

    pub fn cubic(dim: usize, n: usize, half_length: f64) -> Result<Self> {
        Self::new(vec![n; dim], vec![half_length; dim])
    }

    /// Shifts the frequency lattice by half a cell on the flagged axes.
    pub fn with_offset(mut self, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != self.dim() {
            return Err(Error::Shape("offset flags must match the dimension".into()));
        }
        self.offset = flags;
        Ok(self)
    }

    pub fn with_half_offset(self) -> Self {
        let d = self.dim();
        Self { offset: vec![true; d], ..self }
    }

    pub fn with_center(mut self, center: Vec<f64>) -> Result<Self> {
        if center.len() != self.dim() {
            return Err(Error::Shape("frequency center must match the dimension".into()));
        }
        self.center = center;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn half_lengths(&self) -> &[f64] {
        &self.half_length
    }

    pub fn offsets(&self) -> &[bool] {
        &self.offset
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn is_plain(&self) -> bool {
        self.offset.iter().all(|o| !o) && self.center.iter().all(|c| *c == 0.0)
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `h_a = 2 L_a / n_a`.
    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.half_length[axis] / self.n[axis] as f64
    }

    /// Frequency spacing `pi / L_a`.
    pub fn dxi(&self, axis: usize) -> f64 {
        PI / self.half_length[axis]
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    pub fn freq_cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.dxi(a)).product()
    }

    pub fn x_coord(&self, axis: usize, i: usize) -> f64 {
        -self.half_length[axis] + i as f64 * self.spacing(axis)
    }

    /// Frequency of centered index `k`, i.e. `c_a + (pi/L_a)(k - n_a/2 + s_a)`.
    pub fn xi_coord(&self, axis: usize, k: usize) -> f64 {
        let s = if self.offset[axis] { 0.5 } else { 0.0 };
        self.center[axis] + self.dxi(axis) * (k as f64 - (self.n[axis] / 2) as f64 + s)
    }

    /// Multi-index of a row-major flat index.
    pub fn unravel(&self, mut flat: usize, idx: &mut [usize]) {
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.n[a];
            flat /= self.n[a];
        }
    }

    pub fn x_at(&self, flat: usize, out: &mut [f64]) {
        let mut idx = vec![0; self.dim()];
        self.unravel(flat, &mut idx);
        for a in 0..self.dim() {
            out[a] = self.x_coord(a, idx[a]);
        }
    }

    pub fn xi_at(&self, flat: usize, out: &mut [f64]) {
        let mut idx = vec![0; self.dim()];
        self.unravel(flat, &mut idx);
        for a in 0..self.dim() {
            out[a] = self.xi_coord(a, idx[a]);
        }
    }

    /// Sample positions, row-major.
    pub fn positions(&self) -> Vec<Vec<f64>> {
        self.coords(false)
    }

    /// Lattice frequencies in centered order, row-major.
    pub fn frequencies(&self) -> Vec<Vec<f64>> {
        self.coords(true)
    }

    fn coords(&self, freq: bool) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut out = Vec::with_capacity(self.len());
        let mut idx = vec![0usize; d];
        for _ in 0..self.len() {
            out.push((0..d).map(|a| if freq { self.xi_coord(a, idx[a]) } else { self.x_coord(a, idx[a]) }).collect());
            for a in (0..d).rev() {
                idx[a] += 1;
                if idx[a] < self.n[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        out
    }
}

/// Which side of the Fourier pair the samples live on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    Space,
    Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Complex components sampled on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: PeriodicGrid,
    domain: Domain,
    components: Vec<Vec<Complex64>>,
}

impl VectorField {
    pub fn new(grid: PeriodicGrid, domain: Domain, components: Vec<Vec<Complex64>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Shape("a field needs at least one component".into()));
        }
        if let Some(c) = components.iter().find(|c| c.len() != grid.len()) {
            return Err(Error::Shape(format!("component of length {} on a grid of {} points", c.len(), grid.len())));
        }
        Ok(Self { grid, domain, components })
    }

    pub fn zeros(grid: PeriodicGrid, domain: Domain, ncomp: usize) -> Self {
        let len = grid.len();
        Self { grid, domain, components: vec![vec![ZERO; len]; ncomp.max(1)] }
    }

    /// Samples `f(x)` (or `f(xi)` in the frequency domain) at every grid point.
    pub fn from_fn(grid: PeriodicGrid, domain: Domain, ncomp: usize, f: impl Fn(&[f64]) -> Vec<Complex64>) -> Result<Self> {
        let pts = match domain {
            Domain::Space => grid.positions(),
            Domain::Frequency => grid.frequencies(),
        };
        let mut comps = vec![Vec::with_capacity(grid.len()); ncomp];
        for p in &pts {
            let v = f(p);
            if v.len() != ncomp {
                return Err(Error::Shape(format!("sampler returned {} components, expected {ncomp}", v.len())));
            }
            for (c, x) in comps.iter_mut().zip(v) {
                c.push(x);
            }
        }
        Self::new(grid, domain, comps)
    }

    /// A field with `value` in component `slot` and zeros elsewhere.
    pub fn single(grid: PeriodicGrid, domain: Domain, ncomp: usize, slot: usize, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        if slot >= ncomp {
            return Err(Error::Shape(format!("slot {slot} out of {ncomp} components")));
        }
        let pts = match domain {
            Domain::Space => grid.positions(),
            Domain::Frequency => grid.frequencies(),
        };
        let mut comps = vec![vec![ZERO; grid.len()]; ncomp];
        comps[slot] = pts.iter().map(|p| f(p)).collect();
        Self::new(grid, domain, comps)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.components
    }

    pub fn ncomp(&self) -> usize {
        self.components.len()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let components = self.components.iter().map(|v| v.iter().map(|x| x * c).collect()).collect();
        Self { components, ..self.clone() }
    }

    /// Largest componentwise sample difference.
    pub fn max_abs_diff(&self, other: &VectorField) -> f64 {
        self.components.iter().zip(&other.components).flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm())).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// The other side of the Fourier pair.
    pub fn transform(&self, dir: Direction) -> Result<VectorField> {
        let expected = match dir {
            Direction::Forward => Domain::Space,
            Direction::Inverse => Domain::Frequency,
        };
        if self.domain != expected {
            return Err(Error::Domain(format!("{dir:?} transform applied to a {:?}-domain field", self.domain)));
        }
        let plan = TransformPlan::new(&self.grid);
        let components = self.components.iter().map(|c| plan.run(c, dir)).collect();
        let domain = match dir {
            Direction::Forward => Domain::Frequency,
            Direction::Inverse => Domain::Space,
        };
        Ok(Self { grid: self.grid.clone(), domain, components })
    }

    pub fn forward(&self) -> Result<VectorField> {
        self.transform(Direction::Forward)
    }

    pub fn inverse(&self) -> Result<VectorField> {
        self.transform(Direction::Inverse)
    }

    /// `m(D) f = F^{-1}(m f^)` for a matrix symbol; the output has `m.dim()` components.
    pub fn apply_multiplier(&self, symbol: impl Fn(&[f64]) -> Result<SymbolMatrix>) -> Result<VectorField> {
        let hat = self.to_frequency()?;
        let freqs = self.grid.frequencies();
        let mut out: Option<Vec<Vec<Complex64>>> = None;
        let mut v = vec![ZERO; hat.ncomp()];
        for (i, xi) in freqs.iter().enumerate() {
            let m = symbol(xi).map_err(|e| pole_on_grid(e, xi))?;
            if m.dim() != hat.ncomp() {
                return Err(Error::Shape(format!("{}x{} symbol on a {}-component field", m.dim(), m.dim(), hat.ncomp())));
            }
            for (c, slot) in v.iter_mut().enumerate() {
                *slot = hat.components[c][i];
            }
            let w = m.matvec(&v);
            let o = out.get_or_insert_with(|| vec![vec![ZERO; freqs.len()]; w.len()]);
            for (c, x) in w.into_iter().enumerate() {
                o[c][i] = x;
            }
        }
        let comps = out.unwrap_or_default();
        VectorField::new(self.grid.clone(), Domain::Frequency, comps)?.inverse()
    }

    /// Scalar multiplier applied to every component.
    pub fn apply_scalar(&self, symbol: impl Fn(&[f64]) -> Result<Complex64>) -> Result<VectorField> {
        let hat = self.to_frequency()?;
        let freqs = self.grid.frequencies();
        let mult: Vec<Complex64> = freqs.iter().map(|xi| symbol(xi).map_err(|e| pole_on_grid(e, xi))).collect::<Result<_>>()?;
        let components = hat.components.iter().map(|c| c.iter().zip(&mult).map(|(a, m)| a * m).collect()).collect();
        VectorField { grid: self.grid.clone(), domain: Domain::Frequency, components }.inverse()
    }

    fn to_frequency(&self) -> Result<VectorField> {
        match self.domain {
            Domain::Space => self.forward(),
            Domain::Frequency => Err(Error::Domain("multipliers act on space-domain fields".into())),
        }
    }

    /// Vector `L^p` norm: `l^p` over components of Riemann-sum `L^p` norms (max for `p = inf`).
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        self.lp_norm_on(p, |_| true)
    }

    /// `L^p` norm of `1_A f` for the observation set `A` (a predicate on positions).
    pub fn lp_norm_on(&self, p: f64, mask: impl Fn(&[f64]) -> bool) -> Result<f64> {
        let keep = self.mask(mask);
        let w = self.cell_weight();
        norm_from_samples(self.components.iter().flat_map(|c| c.iter().zip(&keep).filter(|(_, k)| **k).map(|(x, _)| x.norm())), p, w)
    }

    /// Norms of each component separately.
    pub fn component_norms(&self, p: f64) -> Result<Vec<f64>> {
        let w = self.cell_weight();
        self.components.iter().map(|c| norm_from_samples(c.iter().map(|x| x.norm()), p, w)).collect()
    }

    fn cell_weight(&self) -> f64 {
        match self.domain {
            Domain::Space => self.grid.cell_volume(),
            Domain::Frequency => self.grid.freq_cell_volume(),
        }
    }

    fn mask(&self, mask: impl Fn(&[f64]) -> bool) -> Vec<bool> {
        let pts = match self.domain {
            Domain::Space => self.grid.positions(),
            Domain::Frequency => self.grid.frequencies(),
        };
        pts.iter().map(|p| mask(p)).collect()
    }

    /// Vector Lorentz norm: `l^q` over components of the scalar `L^{q,r}` norms.
    pub fn lorentz_norm(&self, q: f64, r: LorentzIndex) -> Result<f64> {
        if !(q >= 1.0) || !q.is_finite() {
            return Err(Error::Domain(format!("Lorentz norms need 1 <= q < inf, got {q}")));
        }
        let w = self.cell_weight();
        let s: f64 = self.components.iter().map(|c| scalar_lorentz(c.iter().map(|x| x.norm()).collect(), q, r, w).powf(q)).sum();
        Ok(s.powf(1.0 / q))
    }
}

fn pole_on_grid(e: Error, xi: &[f64]) -> Error {
    match e {
        Error::Pole(_) | Error::SingularFrequency => Error::PoleOnGrid { at: xi.to_vec() },
        other => other,
    }
}

/// `u = (L(D) - z)^{-1} f` with `L(D) = -mu Laplace - (lambda + mu) grad div`.
/// At `xi = 0` the symbol reduces to `-1/z`.
pub fn resolvent_solve(f: &VectorField, z: Complex64, params: &LameParameters) -> Result<VectorField> {
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(Error::SpectralParameter { re: z.re, im: z.im });
    }
    let d = f.grid().dim();
    if f.ncomp() != d {
        return Err(Error::Shape(format!("a solve in dimension {d} needs {d} components, got {}", f.ncomp())));
    }
    f.apply_multiplier(
        |xi| {
            if xi.iter().all(|&x| x == 0.0) {
                Ok(SymbolMatrix::scalar(d, -z.inv()))
            } else {
                resolvent_symbol(xi, z, params)
            }
        },
    )
}

/// `max |(L(D) - z) u - f| / max |f|`.
pub fn solve_residual(u: &VectorField, f: &VectorField, z: Complex64, params: &LameParameters) -> Result<f64> {
    let lu = u.apply_multiplier(|xi| Ok(lame_matrix(xi, z, params)))?;
    Ok(lu.max_abs_diff(f) / f.max_abs())
}

/// `(sum |x|^p w)^{1/p}`, or the max for `p = inf`.
pub fn norm_from_samples(samples: impl Iterator<Item = f64>, p: f64, w: f64) -> Result<f64> {
    if p.is_infinite() && p > 0.0 {
        return Ok(samples.fold(0.0, f64::max));
    }
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("L^p norms need p >= 1, got {p}")));
    }
    let s: f64 = samples.map(|x| x.powf(p)).sum();
    Ok((s * w).powf(1.0 / p))
}

/// Second Lorentz index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LorentzIndex {
    /// `sup_t t mu(|f| > t)^{1/q}`.
    Weak,
    /// `int_0^inf mu(|f| > t)^{1/q} dt`.
    Restricted,
}

/// Scalar Lorentz norm from the decreasing rearrangement; each sample carries measure `w`.
pub fn scalar_lorentz(mut a: Vec<f64>, q: f64, r: LorentzIndex, w: f64) -> f64 {
    a.sort_by(|x, y| y.total_cmp(x));
    let level = |k: usize| (k as f64 * w).powf(1.0 / q);
    match r {
        LorentzIndex::Weak => a.iter().enumerate().map(|(i, v)| v * level(i + 1)).fold(0.0, f64::max),
        LorentzIndex::Restricted => (0..a.len()).map(|i| (a[i] - a.get(i + 1).copied().unwrap_or(0.0)) * level(i + 1)).sum(),
    }
}

/// `||1_A T f||_q / ||f||_p`: a lower bound for the `p -> q` norm of `T`.
pub fn restricted_ratio(
    symbol: impl Fn(&[f64]) -> Result<Complex64>,
    f: &VectorField,
    p: f64,
    q: f64,
    observation: impl Fn(&[f64]) -> bool,
) -> Result<f64> {
    let nf = f.lp_norm(p)?;
    if nf == 0.0 {
        return Err(Error::Domain("restricted ratio of a zero test field".into()));
    }
    Ok(f.apply_scalar(symbol)?.lp_norm_on(q, observation)? / nf)
}

/// Nonzero lattice samples of a spectrum, evaluated off-grid by direct summation
/// of the inverse quadrature `(2 pi)^{-d} sum e^{i x.xi} F(xi) dxi`.
///
/// Used where an observation set is much smaller than the grid spacing.
#[derive(Debug, Clone)]
pub struct SparseSpectrum {
    dim: usize,
    freqs: Vec<f64>,
    values: Vec<Complex64>,
    weight: f64,
}

impl SparseSpectrum {
    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(&[f64]) -> Result<Complex64>) -> Result<Self> {
        let d = grid.dim();
        let mut freqs = Vec::new();
        let mut values = Vec::new();
        for xi in grid.frequencies() {
            let v = f(&xi).map_err(|e| pole_on_grid(e, &xi))?;
            if v != ZERO {
                freqs.extend_from_slice(&xi);
                values.push(v);
            }
        }
        let weight = grid.freq_cell_volume() / (2.0 * PI).powi(d as i32);
        Ok(Self { dim: d, freqs, values, weight })
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        let s: Complex64 = self
            .freqs
            .chunks(self.dim)
            .zip(&self.values)
            .map(|(xi, v)| {
                let ph: f64 = xi.iter().zip(x).map(|(a, b)| a * b).sum();
                v * Complex64::from_polar(1.0, ph)
            })
            .sum();
        s * self.weight
    }

    /// `L^q` norm over the centered box `prod [-w_a, w_a]` by a tensor
    /// Gauss-Legendre rule of the given order (max over nodes for `q = inf`).
    pub fn box_norm(&self, half_widths: &[f64], q: f64, order: usize) -> Result<f64> {
        if half_widths.len() != self.dim {
            return Err(Error::Shape("box dimension mismatch".into()));
        }
        let (nodes, weights) = crate::quadrature::gauss_legendre(order);
        let d = self.dim;
        let total = order.pow(d as u32);
        let mut x = vec![0.0; d];
        let mut samples = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rest = flat;
            let mut w = 1.0;
            for a in 0..d {
                let i = rest % order;
                rest /= order;
                x[a] = nodes[i] * half_widths[a];
                w *= weights[i] * half_widths[a];
            }
            samples.push((self.eval(&x).norm(), w));
        }
        if q.is_infinite() {
            let center = self.eval(&vec![0.0; d]).norm();
            return Ok(samples.iter().map(|s| s.0).fold(center, f64::max));
        }
        if !(q >= 1.0) {
            return Err(Error::Domain(format!("L^q norms need q >= 1, got {q}")));
        }
        Ok(samples.iter().map(|(v, w)| v.powf(q) * w).sum::<f64>().powf(1.0 / q))
    }
}

/// Per-axis FFT plans and phase tables for the quadrature transform.
type FftPair = (std::sync::Arc<dyn Fft<f64>>, std::sync::Arc<dyn Fft<f64>>);

struct TransformPlan {
    grid: PeriodicGrid,
    ffts: Vec<FftPair>,
}

impl TransformPlan {
    fn new(grid: &PeriodicGrid) -> Self {
        let mut planner = FftPlanner::new();
        let ffts = grid.n.iter().map(|&n| (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))).collect();
        Self { grid: grid.clone(), ffts }
    }

    fn run(&self, data: &[Complex64], dir: Direction) -> Vec<Complex64> {
        let mut out = data.to_vec();
        let g = &self.grid;
        let d = g.dim();
        for a in 0..d {
            let n = g.n[a];
            let stride: usize = g.n[a + 1..].iter().product();
            let outer: usize = g.n[..a].iter().product();
            let s = if g.offset[a] { 0.5 } else { 0.0 };
            let h = g.spacing(a);
            let l2 = 2.0 * g.half_length[a];
            let half = n / 2;
            // x_i xi_m = -pi (m + s) + 2 pi i (m + s) / n with m = k - n/2.
            let twist: Vec<Complex64> = (0..n).map(|i| Complex64::from_polar(1.0, -2.0 * PI * i as f64 * s / n as f64)).collect();
            let phase: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(1.0, PI * (k as f64 - half as f64 + s))).collect();
            let mut buf = vec![ZERO; n];
            let (fwd, inv) = &self.ffts[a];
            for o in 0..outer {
                for inner in 0..stride {
                    let base = o * n * stride + inner;
                    match dir {
                        Direction::Forward => {
                            for i in 0..n {
                                buf[i] = out[base + i * stride] * twist[i];
                            }
                            fwd.process(&mut buf);
                            for k in 0..n {
                                out[base + k * stride] = buf[(k + half) % n] * phase[k] * h;
                            }
                        }
                        Direction::Inverse => {
                            for k in 0..n {
                                buf[(k + half) % n] = out[base + k * stride] * phase[k].conj() / l2;
                            }
                            inv.process(&mut buf);
                            for i in 0..n {
                                out[base + i * stride] = buf[i] * twist[i].conj();
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

const MAGIC: &[u8; 4] = b"LAMF";
const VERSION: u32 = 1;

/// Writes space-domain samples in the LAMF layout: magic, version, `d`,
/// `n` per axis, `L` per axis, then each component's complex128 samples in
/// row-major order, component after component.
pub fn write_lamf(path: &Path, grid: &PeriodicGrid, components: &[Vec<Complex64>]) -> Result<()> {
    let bytes = encode_lamf(grid, components)?;
    std::fs::File::create(path)?.write_all(&bytes)?;
    Ok(())
}

pub fn encode_lamf(grid: &PeriodicGrid, components: &[Vec<Complex64>]) -> Result<Vec<u8>> {
    if !grid.is_plain() {
        return Err(Error::Format("LAMF stores unmodulated grids without frequency offsets".into()));
    }
    let mut b = Vec::with_capacity(16 + 12 * grid.dim() + 16 * grid.len() * components.len());
    b.extend_from_slice(MAGIC);
    b.extend_from_slice(&VERSION.to_le_bytes());
    b.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    for &n in grid.n() {
        b.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for &l in grid.half_lengths() {
        b.extend_from_slice(&l.to_le_bytes());
    }
    for c in components {
        if c.len() != grid.len() {
            return Err(Error::Shape("component length does not match the grid".into()));
        }
        for x in c {
            b.extend_from_slice(&x.re.to_le_bytes());
            b.extend_from_slice(&x.im.to_le_bytes());
        }
    }
    Ok(b)
}

/// Reads a LAMF file; the component count is inferred from the payload length.
pub fn read_lamf(path: &Path) -> Result<(PeriodicGrid, Vec<Vec<Complex64>>)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_lamf(&bytes)
}

pub fn decode_lamf(bytes: &[u8]) -> Result<(PeriodicGrid, Vec<Vec<Complex64>>)> {
    let short = || Error::Format("truncated header".into());
    let u32_at =
        |o: usize| -> Result<u32> { Ok(u32::from_le_bytes(bytes.get(o..o + 4).ok_or_else(short)?.try_into().map_err(|_| short())?)) };
    if bytes.get(..4) != Some(MAGIC.as_slice()) {
        return Err(Error::Format("missing LAMF magic".into()));
    }
    let version = u32_at(4)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let d = u32_at(8)? as usize;
    if d == 0 || d > 16 {
        return Err(Error::Format(format!("implausible dimension {d}")));
    }
    let mut off = 12;
    let mut n = Vec::with_capacity(d);
    for _ in 0..d {
        n.push(u32_at(off)? as usize);
        off += 4;
    }
    let mut l = Vec::with_capacity(d);
    for _ in 0..d {
        let raw = bytes.get(off..off + 8).ok_or_else(short)?;
        l.push(f64::from_le_bytes(raw.try_into().map_err(|_| short())?));
        off += 8;
    }
    let grid = PeriodicGrid::new(n, l).map_err(|e| Error::Format(e.to_string()))?;
    let payload = &bytes[off..];
    let per = 16 * grid.len();
    if payload.is_empty() || !payload.len().is_multiple_of(per) {
        return Err(Error::Format(format!("payload of {} bytes is not a whole number of components", payload.len())));
    }
    let comps = payload
        .chunks(per)
        .map(|c| {
            c.chunks(16)
                .map(|s| {
                    let re = f64::from_le_bytes(s[..8].try_into().unwrap_or([0; 8]));
                    let im = f64::from_le_bytes(s[8..].try_into().unwrap_or([0; 8]));
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect();
    Ok((grid, comps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{lame_matrix, leray_projector, resolvent_symbol, LameParameters};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_field(grid: &PeriodicGrid, ncomp: usize, seed: u64) -> VectorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let comps =
            (0..ncomp).map(|_| (0..grid.len()).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()).collect();
        VectorField::new(grid.clone(), Domain::Space, comps).unwrap()
    }

    #[test]
    fn constant_field_transform() {
        let g = PeriodicGrid::cubic(2, 8, 3.0).unwrap();
        let f = VectorField::from_fn(g.clone(), Domain::Space, 1, |_| vec![c(1.0, 0.0)]).unwrap();
        let hat = f.forward().unwrap();
        let freqs = g.frequencies();
        for (xi, v) in freqs.iter().zip(&hat.components()[0]) {
            let expect = if xi.iter().all(|x| *x == 0.0) { 36.0 } else { 0.0 };
            assert!((v - c(expect, 0.0)).norm() < 1e-12, "{xi:?} {v}");
        }
    }

    #[test]
    fn gaussian_transform() {
        for offset in [false, true] {
            let mut g = PeriodicGrid::new(vec![64, 48], vec![12.0, 12.0]).unwrap();
            if offset {
                g = g.with_half_offset();
            }
            let f =
                VectorField::from_fn(g.clone(), Domain::Space, 1, |x| vec![c((-0.5 * (x[0] * x[0] + x[1] * x[1])).exp(), 0.0)]).unwrap();
            let hat = f.forward().unwrap();
            for (xi, v) in g.frequencies().iter().zip(&hat.components()[0]) {
                let r2 = xi[0] * xi[0] + xi[1] * xi[1];
                if r2 < 9.0 {
                    let e = 2.0 * PI * (-0.5 * r2).exp();
                    assert!((v - c(e, 0.0)).norm() < 1e-6 * e, "{xi:?}");
                }
            }
        }
    }

    #[test]
    fn resolvent_solve_has_small_residual() {
        let params = LameParameters::new(1.0, 2.0).unwrap();
        let g = PeriodicGrid::cubic(2, 64, 10.0).unwrap();
        let f = VectorField::from_fn(g, Domain::Space, 2, |x| {
            let e = (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp();
            vec![c(e, 0.0), c(0.0, x[0] * e)]
        })
        .unwrap();
        for z in [c(-1.0, 0.5), c(2.0, 0.3), c(-0.2, 0.0)] {
            let u = resolvent_solve(&f, z, &params).unwrap();
            assert!(solve_residual(&u, &f, z, &params).unwrap() < 1e-12, "z = {z}");
        }
        assert!(matches!(resolvent_solve(&f, c(1.0, 0.0), &params), Err(Error::SpectralParameter { .. })));
    }

    #[test]
    fn roundtrip_and_plancherel() {
        let g = PeriodicGrid::new(vec![8, 4, 6], vec![2.0, 1.0, 5.0]).unwrap().with_offset(vec![true, false, true]).unwrap();
        let f = random_field(&g, 3, 7);
        let hat = f.forward().unwrap();
        let back = hat.inverse().unwrap();
        assert!(back.max_abs_diff(&f) < 1e-12 * f.max_abs());
        let lhs = f.lp_norm(2.0).unwrap();
        let rhs = hat.lp_norm(2.0).unwrap() * (2.0 * PI).powf(-1.5);
        assert!((lhs / rhs - 1.0).abs() < 1e-10);
        assert!(f.forward().unwrap().forward().is_err());
    }

    #[test]
    fn identity_and_composition() {
        let g = PeriodicGrid::cubic(2, 16, 4.0).unwrap().with_half_offset();
        let f = random_field(&g, 2, 3);
        let id = f.apply_multiplier(|_| Ok(SymbolMatrix::identity(2))).unwrap();
        assert!(id.max_abs_diff(&f) < 1e-12);
        let p = LameParameters::new(1.0, 2.0).unwrap();
        let z = c(-1.0, 0.5);
        let solved = f.apply_multiplier(|xi| resolvent_symbol(xi, z, &p)).unwrap();
        let back = solved.apply_multiplier(|xi| Ok(lame_matrix(xi, z, &p))).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-12 * f.max_abs().max(1.0));
        let m1 = |xi: &[f64]| SymbolMatrix::from_fn(2, |j, k| c(xi[j] + k as f64, xi[k]));
        let m2 = |xi: &[f64]| SymbolMatrix::from_fn(2, |j, k| c(1.0 + (j * k) as f64, xi[0] * xi[1]));
        let two = f.apply_multiplier(|xi| Ok(m2(xi))).unwrap().apply_multiplier(|xi| Ok(m1(xi))).unwrap();
        let one = f.apply_multiplier(|xi| Ok(m1(xi).matmul(&m2(xi)))).unwrap();
        assert!(two.max_abs_diff(&one) < 1e-12 * one.max_abs());
    }

    #[test]
    fn leray_fixes_gradients() {
        let g = PeriodicGrid::cubic(2, 32, 8.0).unwrap().with_half_offset();
        let scalar =
            VectorField::from_fn(g.clone(), Domain::Space, 1, |x| vec![c((-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp(), 0.0)]).unwrap();
        let hat = scalar.forward().unwrap();
        let freqs = g.frequencies();
        let grad_hat: Vec<Vec<Complex64>> =
            (0..2).map(|a| freqs.iter().zip(&hat.components()[0]).map(|(xi, v)| c(0.0, xi[a]) * v).collect()).collect();
        let grad = VectorField::new(g.clone(), Domain::Frequency, grad_hat).unwrap().inverse().unwrap();
        let proj = grad.apply_multiplier(leray_projector).unwrap();
        assert!(proj.max_abs_diff(&grad) < 1e-12);
    }

    #[test]
    fn pole_on_lattice_is_reported() {
        let g = PeriodicGrid::cubic(2, 8, PI).unwrap();
        let f = random_field(&g, 2, 1);
        let err = f.apply_multiplier(leray_projector).unwrap_err();
        assert!(matches!(err, Error::PoleOnGrid { .. }));
    }

    #[test]
    fn norm_examples() {
        let g = PeriodicGrid::cubic(2, 8, 2.0).unwrap();
        let h2 = g.cell_volume();
        let f = VectorField::single(g.clone(), Domain::Space, 2, 1, |x| if x == [0.0, 0.0] { c(0.0, 3.0) } else { c(0.0, 0.0) }).unwrap();
        for p in [1.0, 2.0, 3.5] {
            assert!((f.lp_norm(p).unwrap() - 3.0 * h2.powf(1.0 / p)).abs() < 1e-14);
        }
        assert_eq!(f.lp_norm(f64::INFINITY).unwrap(), 3.0);
        let ind = VectorField::single(g.clone(), Domain::Space, 1, 0, |x| {
            if x[1] == 0.0 && x[0] >= 0.0 && x[0] < 1.25 {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
        .unwrap();
        let count = ind.components()[0].iter().filter(|v| v.re == 1.0).count();
        assert_eq!(count, 3);
        assert!((ind.lp_norm(3.0).unwrap() - (count as f64 * h2).powf(1.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn lorentz_on_indicator() {
        let w: f64 = 0.25;
        let a = vec![2.0; 7];
        let expect = 2.0 * (7.0 * w).powf(1.0 / 3.0);
        assert!((scalar_lorentz(a.clone(), 3.0, LorentzIndex::Weak, w) - expect).abs() < 1e-14);
        assert!((scalar_lorentz(a, 3.0, LorentzIndex::Restricted, w) - expect).abs() < 1e-14);
    }

    #[test]
    fn lorentz_weak_below_strong_and_permutation_invariant() {
        let g = PeriodicGrid::cubic(2, 16, 3.0).unwrap();
        for seed in 0..20 {
            let f = random_field(&g, 2, seed);
            for q in [1.0, 1.5, 2.0, 4.0] {
                let weak = f.lorentz_norm(q, LorentzIndex::Weak).unwrap();
                assert!(weak <= f.lp_norm(q).unwrap() * (1.0 + 1e-12));
                let mut comps = f.components().to_vec();
                comps[0].reverse();
                comps[1].rotate_left(17);
                let perm = VectorField::new(g.clone(), Domain::Space, comps).unwrap();
                assert_eq!(perm.lorentz_norm(q, LorentzIndex::Weak).unwrap(), weak);
                let strong = f.lorentz_norm(q, LorentzIndex::Restricted).unwrap();
                assert!((perm.lorentz_norm(q, LorentzIndex::Restricted).unwrap() / strong - 1.0).abs() < 1e-12);
                assert!(strong >= weak * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn restricted_ratio_examples() {
        let g = PeriodicGrid::cubic(2, 16, 3.0).unwrap();
        let f = random_field(&g, 1, 9);
        let r = restricted_ratio(|_| Ok(c(0.0, 2.5)), &f, 2.0, 3.0, |_| true).unwrap();
        let expect = 2.5 * f.lp_norm(3.0).unwrap() / f.lp_norm(2.0).unwrap();
        assert!((r / expect - 1.0).abs() < 1e-12);
        let sup = 1.0;
        let r = restricted_ratio(|xi| Ok(c((-(xi[0] * xi[0])).exp(), 0.0)), &f, 2.0, 2.0, |_| true).unwrap();
        assert!(r <= sup + 1e-10);
        let zero = VectorField::zeros(g, Domain::Space, 1);
        assert!(restricted_ratio(|_| Ok(c(1.0, 0.0)), &zero, 2.0, 2.0, |_| true).is_err());
    }

    #[test]
    fn sparse_spectrum_matches_fft() {
        let g = PeriodicGrid::cubic(2, 16, 6.0).unwrap().with_center(vec![0.5, -0.25]).unwrap();
        let spec = |xi: &[f64]| Ok(c((-(xi[0] * xi[0] + xi[1] * xi[1])).exp(), 0.0));
        let sparse = SparseSpectrum::from_fn(&g, spec).unwrap();
        let hat = VectorField::from_fn(g.clone(), Domain::Frequency, 1, |xi| vec![spec(xi).unwrap()]).unwrap();
        let space = hat.inverse().unwrap();
        for (i, x) in g.positions().iter().enumerate().step_by(37) {
            // Stored samples omit the modulation e^{i c.x}.
            let modulated = space.components()[0][i] * Complex64::from_polar(1.0, 0.5 * x[0] - 0.25 * x[1]);
            assert!((sparse.eval(x) - modulated).norm() < 1e-12);
        }
        let box_l2 = sparse.box_norm(&[0.5, 0.5], 2.0, 6).unwrap();
        assert!(box_l2 > 0.0);
    }

    #[test]
    fn lamf_roundtrip() {
        let g = PeriodicGrid::new(vec![4, 6], vec![1.5, 2.0]).unwrap();
        let f = random_field(&g, 4, 11);
        let bytes = encode_lamf(&g, f.components()).unwrap();
        assert_eq!(&bytes[..4], b"LAMF");
        let (g2, comps) = decode_lamf(&bytes).unwrap();
        assert_eq!(g2, g);
        assert_eq!(comps, f.components());
        assert!(decode_lamf(&bytes[..bytes.len() - 3]).is_err());
        assert!(decode_lamf(b"NOPE").is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        write_lamf(&path, &g, f.components()).unwrap();
        assert_eq!(read_lamf(&path).unwrap().1, f.components());
    }
}
