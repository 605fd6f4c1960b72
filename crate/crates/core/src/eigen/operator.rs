//! Spectral discretization of `-Lame + V` and its eigensolvers.
//!
//! The flat layout of a field is component-major: entry `k * N + i` holds
//! component `k` at grid point `i`, matching [`VectorField`] components.

use faer::{Mat, Side};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PotentialField;
use crate::error::{Error, Result};
use crate::field::{Domain, PeriodicGrid, VectorField};
use crate::symbols::{lame_matrix, LameParameters, SymbolMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default cap on the dense matrix order `d * n^d`.
pub const DENSE_CAP: usize = 6000;

/// `u -> -Lame u + V u` with the Lame part exact per lattice frequency.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    grid: PeriodicGrid,
    params: LameParameters,
    potential: Option<PotentialField>,
    /// `L_0(xi)` in the order of `grid.frequencies()`.
    symbols: Vec<SymbolMatrix>,
}

impl SpectralOperator {
    pub fn new(grid: &PeriodicGrid, params: &LameParameters, potential: Option<&PotentialField>) -> Result<Self> {
        if let Some(v) = potential {
            if v.grid() != grid {
                return Err(Error::Shape("potential and operator grids differ".into()));
            }
        }
        let symbols = grid.frequencies().par_iter().map(|xi| lame_matrix(xi, ZERO, params)).collect();
        Ok(Self { grid: grid.clone(), params: *params, potential: potential.cloned(), symbols })
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Matrix order `d * N`.
    pub fn order(&self) -> usize {
        self.dim() * self.grid.len()
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn params(&self) -> &LameParameters {
        &self.params
    }

    pub fn potential(&self) -> Option<&PotentialField> {
        self.potential.as_ref()
    }

    fn split(&self, u: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
        if u.len() != self.order() {
            return Err(Error::Shape(format!("vector of length {} for an operator of order {}", u.len(), self.order())));
        }
        Ok(u.chunks(self.grid.len()).map(<[Complex64]>::to_vec).collect())
    }

    /// `F^{-1} m(xi) F u` for a per-frequency matrix `m`.
    fn multiplier(&self, u: &[Complex64], m: impl Fn(usize) -> Result<SymbolMatrix>) -> Result<Vec<Complex64>> {
        let d = self.dim();
        let hat = VectorField::new(self.grid.clone(), Domain::Space, self.split(u)?)?.forward()?.into_components();
        let mut out = vec![vec![ZERO; self.grid.len()]; d];
        let mut v = vec![ZERO; d];
        for i in 0..self.grid.len() {
            for (k, c) in hat.iter().enumerate() {
                v[k] = c[i];
            }
            for (j, w) in m(i)?.matvec(&v).into_iter().enumerate() {
                out[j][i] = w;
            }
        }
        Ok(VectorField::new(self.grid.clone(), Domain::Frequency, out)?.inverse()?.into_components().concat())
    }

    /// `-Lame u`, without the potential.
    pub fn apply_free(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        self.multiplier(u, |i| Ok(self.symbols[i].clone()))
    }

    pub fn apply(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = self.apply_free(u)?;
        if let Some(v) = &self.potential {
            for (o, w) in out.iter_mut().zip(v.apply_flat(u)?) {
                *o += w;
            }
        }
        Ok(out)
    }

    /// `(L_0(D) - sigma)^{-1} u`: the exact inverse when `V = 0`.
    pub fn free_resolvent(&self, sigma: Complex64, u: &[Complex64]) -> Result<Vec<Complex64>> {
        self.multiplier(u, |i| {
            let d = self.dim();
            let shifted = SymbolMatrix::from_fn(d, |j, k| {
                let s = if j == k { sigma } else { ZERO };
                self.symbols[i].get(j, k) - s
            });
            shifted.inverse().map_err(|_| Error::Pole(format!("shift {sigma} is an eigenvalue of the free operator")))
        })
    }

    /// Dense matrix, one column per unit vector.
    pub fn to_dense(&self, cap: usize) -> Result<Mat<Complex64>> {
        let m = self.order();
        if m > cap {
            return Err(Error::SizeCap { order: m, cap });
        }
        let cols: Vec<Vec<Complex64>> = (0..m)
            .into_par_iter()
            .map(|c| {
                let mut e = vec![ZERO; m];
                e[c] = Complex64::new(1.0, 0.0);
                self.apply(&e)
            })
            .collect::<Result<_>>()?;
        Ok(Mat::from_fn(m, m, |i, j| cols[j][i]))
    }
}

/// Dense or matrix-free result of [`assemble_operator`].
#[derive(Debug, Clone)]
pub enum Assembled {
    Dense(Mat<Complex64>),
    MatrixFree(Box<SpectralOperator>),
}

/// How [`assemble_operator`] chooses its representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssemblyMode {
    /// Dense when the order fits under the cap, matrix-free otherwise.
    Auto,
    Dense,
    MatrixFree,
}

pub fn assemble_operator(
    grid: &PeriodicGrid,
    params: &LameParameters,
    potential: Option<&PotentialField>,
    mode: AssemblyMode,
    cap: usize,
) -> Result<Assembled> {
    let op = SpectralOperator::new(grid, params, potential)?;
    match mode {
        AssemblyMode::MatrixFree => Ok(Assembled::MatrixFree(Box::new(op))),
        AssemblyMode::Dense => Ok(Assembled::Dense(op.to_dense(cap)?)),
        AssemblyMode::Auto if op.order() <= cap => Ok(Assembled::Dense(op.to_dense(cap)?)),
        AssemblyMode::Auto => Ok(Assembled::MatrixFree(Box::new(op))),
    }
}

/// `max |A - A^*| / max |A|`.
pub fn hermitian_defect(a: &Mat<Complex64>) -> f64 {
    let n = a.nrows();
    let (mut defect, mut scale) = (0.0f64, 0.0f64);
    for j in 0..n {
        for i in 0..n {
            defect = defect.max((a[(i, j)] - a[(j, i)].conj()).norm());
            scale = scale.max(a[(i, j)].norm());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        defect / scale
    }
}

/// All eigenvalues, sorted by real then imaginary part. The self-adjoint
/// solver is used when `hermitian` is set, in which case the values are real.
pub fn dense_eigenvalues(a: &Mat<Complex64>, hermitian: bool) -> Result<Vec<Complex64>> {
    let mut ev: Vec<Complex64> = if hermitian {
        a.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?
            .into_iter()
            .map(|x| Complex64::new(x, 0.0))
            .collect()
    } else {
        a.eigenvalues().map_err(|e| Error::Eigen(format!("{e:?}")))?
    };
    sort_spectrum(&mut ev);
    Ok(ev)
}

pub fn sort_spectrum(ev: &mut [Complex64]) {
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// The closed-form spectrum with `V = 0`: `mu |xi|^2` with multiplicity
/// `d - 1` and `(lambda + 2 mu) |xi|^2` once, per lattice frequency. Sorted.
pub fn free_spectrum(grid: &PeriodicGrid, params: &LameParameters) -> Vec<f64> {
    let d = grid.dim();
    let mut out = Vec::with_capacity(d * grid.len());
    for xi in grid.frequencies() {
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        out.extend(std::iter::repeat_n(params.mu() * r2, d - 1));
        out.push(params.p_modulus() * r2);
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Controls for [`nearest_eigenvalues`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterativeOptions {
    /// Converged when `|A x - theta x| <= tol * max(1, |theta|)` with `|x| = 1`.
    pub tol: f64,
    pub max_iter: usize,
    /// Extra subspace vectors beyond the requested count.
    pub guard: usize,
    pub gmres_tol: f64,
    pub gmres_restart: usize,
    pub gmres_max_restarts: usize,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 300, guard: 6, gmres_tol: 1e-12, gmres_restart: 40, gmres_max_restarts: 25 }
    }
}

/// A Ritz value with its residual; `converged` is judged per eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenEstimate {
    pub value: Complex64,
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (u, v) in y.iter_mut().zip(x) {
        *u += a * v;
    }
}

/// Restarted GMRES from a zero initial guess. Returns the iterate and its
/// relative residual; failing to reach `tol` is not an error here.
pub fn gmres(
    apply: impl Fn(&[Complex64]) -> Result<Vec<Complex64>>,
    b: &[Complex64],
    tol: f64,
    restart: usize,
    max_restarts: usize,
) -> Result<(Vec<Complex64>, f64)> {
    let bnorm = norm(b);
    let mut x = vec![ZERO; b.len()];
    if bnorm == 0.0 {
        return Ok((x, 0.0));
    }
    let mut rel = 1.0;
    for _ in 0..max_restarts.max(1) {
        let ax = apply(&x)?;
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = norm(&r);
        rel = beta / bnorm;
        if rel <= tol {
            break;
        }
        let mut basis = vec![r.iter().map(|v| v / beta).collect::<Vec<_>>()];
        let mut h: Vec<Vec<Complex64>> = Vec::new();
        let mut rot: Vec<(f64, Complex64)> = Vec::new();
        let mut g = vec![Complex64::new(beta, 0.0)];
        for j in 0..restart {
            let mut w = apply(&basis[j])?;
            let mut col = vec![ZERO; j + 2];
            for (i, q) in basis.iter().enumerate() {
                col[i] = dot(q, &w);
                axpy(&mut w, -col[i], q);
            }
            let wn = norm(&w);
            col[j + 1] = Complex64::new(wn, 0.0);
            for (i, &(c, s)) in rot.iter().enumerate() {
                let (a, bb) = (col[i], col[i + 1]);
                col[i] = c * a + s * bb;
                col[i + 1] = -s.conj() * a + c * bb;
            }
            // Rotation [c, s; -conj(s), c] zeroing the subdiagonal entry.
            let (a, bb) = (col[j], col[j + 1]);
            let r = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            let (c, s) = if a.norm() == 0.0 { (0.0, bb.conj() / bb.norm()) } else { (a.norm() / r, (a / a.norm()) * bb.conj() / r) };
            col[j] = c * a + s * bb;
            col[j + 1] = ZERO;
            rot.push((c, s));
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s.conj() * gj);
            h.push(col);
            rel = g[j + 1].norm() / bnorm;
            if rel <= tol || wn <= 1e-300 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // Back substitution on the rotated Hessenberg columns.
        let k = h.len();
        let mut y = vec![ZERO; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for (jj, yj) in y.iter().enumerate().skip(i + 1) {
                s -= h[jj][i] * yj;
            }
            y[i] = s / h[i][i];
        }
        for (yi, q) in y.iter().zip(&basis) {
            axpy(&mut x, *yi, q);
        }
        if rel <= tol {
            break;
        }
    }
    Ok((x, rel))
}

/// Modified Gram-Schmidt, twice. Columns that collapse are dropped.
fn orthonormalize(cols: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(cols.len());
    for mut v in cols {
        let n0 = norm(&v);
        for _ in 0..2 {
            for q in &out {
                let c = dot(q, &v);
                axpy(&mut v, -c, q);
            }
        }
        let n1 = norm(&v);
        if n1 > 1e-12 * n0 && n1 > 0.0 {
            out.push(v.iter().map(|x| x / n1).collect());
        }
    }
    out
}

/// The `k` eigenvalues nearest `sigma`, by subspace iteration on
/// `(A - sigma)^{-1}` with Rayleigh-Ritz on `A`. Inner solves use GMRES,
/// right-preconditioned by the free resolvent at `sigma`. The start block
/// is drawn from a fixed seed so the result is reproducible.
pub fn nearest_eigenvalues(op: &SpectralOperator, sigma: Complex64, k: usize, opts: &IterativeOptions) -> Result<Vec<EigenEstimate>> {
    let n = op.order();
    if k == 0 || k > n {
        return Err(Error::Domain(format!("requested {k} eigenvalues of an operator of order {n}")));
    }
    let m = (k + opts.guard).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_e16e);
    let mut x: Vec<Vec<Complex64>> = orthonormalize(
        (0..m).map(|_| (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()).collect(),
    );
    let solve = |b: &Vec<Complex64>| -> Result<Vec<Complex64>> {
        let shifted = |w: &[Complex64]| -> Result<Vec<Complex64>> {
            let pw = op.free_resolvent(sigma, w)?;
            let mut aw = op.apply(&pw)?;
            axpy(&mut aw, -sigma, &pw);
            Ok(aw)
        };
        let (w, _) = gmres(shifted, b, opts.gmres_tol, opts.gmres_restart, opts.gmres_max_restarts)?;
        op.free_resolvent(sigma, &w)
    };
    let mut best: Vec<EigenEstimate> = Vec::new();
    for _ in 0..opts.max_iter.max(1) {
        let y: Vec<Vec<Complex64>> = x.par_iter().map(solve).collect::<Result<_>>()?;
        x = orthonormalize(y);
        let ax: Vec<Vec<Complex64>> = x.par_iter().map(|v| op.apply(v)).collect::<Result<_>>()?;
        let b = x.len();
        let small = Mat::<Complex64>::from_fn(b, b, |i, j| dot(&x[i], &ax[j]));
        let eig = small.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let (s, u) = (eig.S(), eig.U());
        let mut order: Vec<usize> = (0..b).collect();
        order.sort_by(|&i, &j| (s[i] - sigma).norm().total_cmp(&(s[j] - sigma).norm()));
        let mut next = Vec::with_capacity(b);
        best.clear();
        for (rank, &c) in order.iter().enumerate() {
            let theta = s[c];
            let mut v = vec![ZERO; n];
            let mut av = vec![ZERO; n];
            for i in 0..b {
                axpy(&mut v, u[(i, c)], &x[i]);
                axpy(&mut av, u[(i, c)], &ax[i]);
            }
            let vn = norm(&v);
            if rank < k {
                axpy(&mut av, -theta, &v);
                let residual = norm(&av) / vn;
                best.push(EigenEstimate { value: theta, residual, converged: residual <= opts.tol * theta.norm().max(1.0) });
            }
            next.push(v);
        }
        x = orthonormalize(next);
        if best.len() == k && best.iter().all(|e| e.converged) {
            break;
        }
    }
    Ok(best)
}
