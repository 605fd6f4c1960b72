//! Closed-form Fourier symbols of the Lame resolvent and its relatives.
//!
//! Frequencies are plain slices `&[f64]` of length `d`; axis `0` is `xi_1`,
//! `xi' = xi[1..]`, `xi_2 = xi[1]` and `xi_bar = xi[2..]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Denominators with magnitude below this are reported as poles.
pub const POLE_THRESHOLD: f64 = 1e-30;

/// Lame coefficients with `mu > 0` and `lambda + 2 mu > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LameParameters {
    mu: f64,
    lambda: f64,
    rho: f64,
}

impl LameParameters {
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameters(format!("mu must be positive, got {mu}")));
        }
        if !(lambda + 2.0 * mu > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameters(format!("lambda + 2 mu must be positive, got {}", lambda + 2.0 * mu)));
        }
        Ok(Self { mu, lambda, rho: (lambda + 2.0 * mu) / mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `(lambda + 2 mu) / mu`.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `lambda + 2 mu`.
    pub fn p_modulus(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }

    /// `lambda + mu = 0`: the operator is `mu` times the vector Laplacian.
    pub fn is_scalar(&self) -> bool {
        self.lambda + self.mu == 0.0
    }

    pub fn require_nondegenerate(&self) -> Result<()> {
        if self.is_scalar() {
            return Err(Error::DegenerateRatio);
        }
        Ok(())
    }
}

/// Default focusing width `min(1/8, |1 - rho| / 8)`.
pub fn default_eps_circ(rho: f64) -> f64 {
    (0.125f64).min((1.0 - rho).abs() / 8.0)
}

/// A frequency with its coordinate views.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPoint {
    pub xi: Vec<f64>,
}

impl FrequencyPoint {
    pub fn new(xi: Vec<f64>) -> Result<Self> {
        if xi.is_empty() {
            return Err(Error::Shape("frequency needs at least one coordinate".into()));
        }
        Ok(Self { xi })
    }

    /// `xi_1`, also written `tau`.
    pub fn xi1(&self) -> f64 {
        self.xi[0]
    }

    pub fn xi_prime(&self) -> &[f64] {
        &self.xi[1..]
    }

    pub fn xi2(&self) -> Option<f64> {
        self.xi.get(1).copied()
    }

    pub fn xi_bar(&self) -> &[f64] {
        self.xi.get(2..).unwrap_or(&[])
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.xi)
    }
}

pub(crate) fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum()
}

fn check_nonzero(xi: &[f64]) -> Result<f64> {
    let r2 = norm_sq(xi);
    if r2 == 0.0 {
        return Err(Error::SingularFrequency);
    }
    Ok(r2)
}

fn check_pole(den: Complex64, what: &str) -> Result<()> {
    if den.norm() < POLE_THRESHOLD {
        return Err(Error::Pole(what.to_string()));
    }
    Ok(())
}

/// Dense `d x d` complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl SymbolMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, Complex64::new(1.0, 0.0))
    }

    pub fn scalar(dim: usize, c: Complex64) -> Self {
        Self::from_fn(dim, |j, k| if j == k { c } else { Complex64::new(0.0, 0.0) })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            for k in 0..dim {
                entries.push(f(j, k));
            }
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.entries[j * self.dim + k]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn matmul(&self, other: &SymbolMatrix) -> SymbolMatrix {
        assert_eq!(self.dim, other.dim, "matrix dimensions differ");
        let d = self.dim;
        SymbolMatrix::from_fn(d, |j, k| (0..d).map(|l| self.get(j, l) * other.get(l, k)).sum())
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim).map(|j| (0..self.dim).map(|k| self.get(j, k) * v[k]).sum()).collect()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &SymbolMatrix) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim;
        (0..d).all(|j| (0..d).all(|k| (self.get(j, k) - self.get(k, j).conj()).norm() <= tol))
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<SymbolMatrix> {
        let d = self.dim;
        let mut a = self.entries.clone();
        let mut inv = SymbolMatrix::identity(d).entries;
        let scale = self.max_abs();
        if !(scale > 0.0) {
            return Err(Error::Pole("zero symbol matrix".into()));
        }
        for col in 0..d {
            let piv = (col..d).max_by(|&x, &y| a[x * d + col].norm().total_cmp(&a[y * d + col].norm())).unwrap_or(col);
            if a[piv * d + col].norm() < POLE_THRESHOLD * scale {
                return Err(Error::Pole("singular symbol matrix".into()));
            }
            for k in 0..d {
                a.swap(col * d + k, piv * d + k);
                inv.swap(col * d + k, piv * d + k);
            }
            let p = a[col * d + col].inv();
            for k in 0..d {
                a[col * d + k] *= p;
                inv[col * d + k] *= p;
            }
            for r in 0..d {
                if r != col {
                    let f = a[r * d + col];
                    for k in 0..d {
                        let (ak, ik) = (a[col * d + k], inv[col * d + k]);
                        a[r * d + k] -= f * ak;
                        inv[r * d + k] -= f * ik;
                    }
                }
            }
        }
        Ok(SymbolMatrix { dim: d, entries: inv })
    }

    /// Rows of `[re, im]` pairs.
    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        self.entries.chunks(self.dim).map(|r| r.iter().map(|c| [c.re, c.im]).collect()).collect()
    }
}

/// `L_z(xi) = (mu |xi|^2 - z) I + (lambda + mu) xi xi^t`.
pub fn lame_matrix(xi: &[f64], z: Complex64, params: &LameParameters) -> SymbolMatrix {
    let r2 = norm_sq(xi);
    let diag = Complex64::new(params.mu * r2, 0.0) - z;
    let c = params.lambda + params.mu;
    SymbolMatrix::from_fn(xi.len(), |j, k| {
        let off = Complex64::new(c * xi[j] * xi[k], 0.0);
        if j == k {
            diag + off
        } else {
            off
        }
    })
}

/// The pair `(1/(mu |xi|^2 - z), 1/((lambda + 2 mu)|xi|^2 - z))`.
pub fn helmholtz_factors(xi: &[f64], z: Complex64, params: &LameParameters) -> Result<(Complex64, Complex64)> {
    let r2 = check_nonzero(xi)?;
    let ds = Complex64::new(params.mu * r2, 0.0) - z;
    let dp = Complex64::new(params.p_modulus() * r2, 0.0) - z;
    check_pole(ds, "z equals mu |xi|^2")?;
    check_pole(dp, "z equals (lambda + 2 mu) |xi|^2")?;
    Ok((ds.inv(), dp.inv()))
}

/// `L_z(xi)^{-1}` in closed form:
/// `delta_jk / (mu|xi|^2 - z) + (1/((lambda+2mu)|xi|^2 - z) - 1/(mu|xi|^2 - z)) xi_j xi_k / |xi|^2`.
pub fn resolvent_symbol(xi: &[f64], z: Complex64, params: &LameParameters) -> Result<SymbolMatrix> {
    let (s, p) = helmholtz_factors(xi, z, params)?;
    let r2 = norm_sq(xi);
    let diff = p - s;
    Ok(SymbolMatrix::from_fn(xi.len(), |j, k| {
        let rank1 = diff * (xi[j] * xi[k] / r2);
        if j == k {
            s + rank1
        } else {
            rank1
        }
    }))
}

/// `xi xi^t / |xi|^2`.
pub fn leray_projector(xi: &[f64]) -> Result<SymbolMatrix> {
    let r2 = check_nonzero(xi)?;
    Ok(SymbolMatrix::from_fn(xi.len(), |j, k| Complex64::new(xi[j] * xi[k] / r2, 0.0)))
}

/// `i xi_j / |xi|` for the zero-based axis `j`.
pub fn riesz_symbol(j: usize, xi: &[f64]) -> Result<Complex64> {
    let r2 = check_nonzero(xi)?;
    let x = xi.get(j).ok_or_else(|| Error::Shape(format!("axis {j} out of range for d = {}", xi.len())))?;
    Ok(Complex64::new(0.0, x / r2.sqrt()))
}

/// `L^p` operator norm `tan(pi / (2 min{p, p'}))` of a single Riesz transform.
pub fn riesz_norm(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("Riesz transforms are bounded only for 1 < p < inf, got {p}")));
    }
    let pp = p / (p - 1.0);
    Ok((std::f64::consts::PI / (2.0 * p.min(pp))).tan())
}

/// Which sphere pairs with which angular factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ImagVariant {
    /// Spheres `|xi| = 1` (with `|xi'|^2`) and `rho |xi|^2 = 1` (with `xi_1^2`).
    Raw,
    /// After the rescaling `xi -> rho^{-1/2} xi`: spheres `|xi|^2 = rho` and `|xi| = 1`.
    Normalized,
}

/// `Im` of the resolvent entry used for lower bounds, split as `big + small`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagParts {
    pub total: f64,
    /// The `|xi'|^2 / |xi|^2` term.
    pub big: f64,
    /// The `xi_1^2 / |xi|^2` term.
    pub small: f64,
}

pub fn imag_symbol(xi: &[f64], delta: f64, rho: f64, variant: ImagVariant) -> Result<ImagParts> {
    if rho == 1.0 {
        return Err(Error::DegenerateRatio);
    }
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let r2 = check_nonzero(xi)?;
    let x1 = xi[0] * xi[0];
    let xp = r2 - x1;
    let lor = |e: f64| delta / (e * e + delta * delta);
    let (big, small) = match variant {
        ImagVariant::Raw => (lor(r2 - 1.0) * xp / r2, lor(rho * r2 - 1.0) * x1 / r2),
        ImagVariant::Normalized => (lor(r2 / rho - 1.0) * xp / r2, lor(r2 - 1.0) * x1 / r2),
    };
    Ok(ImagParts { total: big + small, big, small })
}

/// `psi(xi') = 1 - sqrt(1 - |xi'|^2)`, its gradient, and the normal map
/// `g(eta) = -eta / sqrt(1 + |eta|^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphGeometry {
    pub psi: f64,
    pub grad_psi: Vec<f64>,
    pub g: Vec<f64>,
}

pub fn psi(xi_prime: &[f64]) -> Result<f64> {
    let r2 = norm_sq(xi_prime);
    if !(r2 < 1.0) {
        return Err(Error::Domain(format!("|xi'| = {} must be < 1", r2.sqrt())));
    }
    // 1 - sqrt(1 - r2) without cancellation.
    Ok(r2 / (1.0 + (1.0 - r2).sqrt()))
}

pub fn grad_psi(xi_prime: &[f64]) -> Result<Vec<f64>> {
    let r2 = norm_sq(xi_prime);
    if !(r2 < 1.0) {
        return Err(Error::Domain(format!("|xi'| = {} must be < 1", r2.sqrt())));
    }
    let s = (1.0 - r2).sqrt();
    Ok(xi_prime.iter().map(|v| v / s).collect())
}

pub fn normal_map(eta: &[f64]) -> Vec<f64> {
    let s = (1.0 + norm_sq(eta)).sqrt();
    eta.iter().map(|v| -v / s).collect()
}

/// Gaussian curvature of the graph of `psi` at `xi'`.
pub fn graph_curvature(xi_prime: &[f64]) -> Result<f64> {
    let r2 = norm_sq(xi_prime);
    if !(r2 < 1.0) {
        return Err(Error::Domain(format!("|xi'| = {} must be < 1", r2.sqrt())));
    }
    // Hessian is I/s + xi' xi'^t / s^3 with s = sqrt(1 - r2).
    let m = xi_prime.len() as i32;
    let s = (1.0 - r2).sqrt();
    let det = s.powi(-(m - 1)) * (1.0 / s + r2 / (s * s * s));
    Ok(det / (1.0 + r2 / (s * s)).powf((m as f64 + 2.0) / 2.0))
}

pub fn graph_geometry(xi_prime: &[f64], eta: &[f64]) -> Result<GraphGeometry> {
    Ok(GraphGeometry { psi: psi(xi_prime)?, grad_psi: grad_psi(xi_prime)?, g: normal_map(eta) })
}

/// `a_delta(tau, xi') = delta / (tau^2 (tau + 2 psi - 2)^2 + delta^2)`.
pub fn a_delta(tau: f64, psi_value: f64, delta: f64) -> f64 {
    let e = tau * (tau + 2.0 * psi_value - 2.0);
    delta / (e * e + delta * delta)
}

/// `b_delta = rho^2 delta / ([tau(tau + 2 psi - 2) + 1 - rho]^2 + (rho delta)^2) * |xi'|^2 / (tau + psi - 1)^2`.
pub fn b_delta(tau: f64, psi_value: f64, r2: f64, delta: f64, rho: f64) -> Result<f64> {
    let x1 = tau + psi_value - 1.0;
    if x1.abs() < POLE_THRESHOLD {
        return Err(Error::Pole("tau + psi(xi') - 1 = 0 in b_delta".into()));
    }
    let e = tau * (tau + 2.0 * psi_value - 2.0) + 1.0 - rho;
    Ok(rho * rho * delta / (e * e + (rho * delta).powi(2)) * r2 / (x1 * x1))
}

/// `(a_delta, b_delta)` at `(tau, xi')`.
pub fn reduced_symbols(tau: f64, xi_prime: &[f64], delta: f64, rho: f64) -> Result<(f64, f64)> {
    let ps = psi(xi_prime)?;
    Ok((a_delta(tau, ps, delta), b_delta(tau, ps, norm_sq(xi_prime), delta, rho)?))
}

/// `(xi_1 + i) xi_2 / (|xi|^2 - 1 + 2 i xi_1)^2`.
pub fn carleman_symbol(xi: &[f64]) -> Result<Complex64> {
    if xi.len() < 2 {
        return Err(Error::Shape("the scalar Carleman symbol needs d >= 2".into()));
    }
    let w = Complex64::new(norm_sq(xi) - 1.0, 2.0 * xi[0]);
    check_pole(w * w, "singular set {xi_1 = 0, |xi| = 1}")?;
    Ok(Complex64::new(xi[0], 1.0) * xi[1] / (w * w))
}

/// `M_eta^{-1}` for `M_eta = mu (eta^t eta) I + (lambda + mu) eta eta^t`, `eta = xi + i v`.
pub fn conjugated_inverse(xi: &[f64], v: &[f64], params: &LameParameters) -> Result<SymbolMatrix> {
    if v.len() != xi.len() {
        return Err(Error::Shape(format!("v has length {}, xi has {}", v.len(), xi.len())));
    }
    let eta: Vec<Complex64> = xi.iter().zip(v).map(|(a, b)| Complex64::new(*a, *b)).collect();
    let s: Complex64 = eta.iter().map(|e| e * e).sum();
    check_pole(s, "eta^t eta = 0")?;
    let inv_s = Complex64::new(params.mu, 0.0).inv() / s;
    let inv_p = Complex64::new(params.p_modulus(), 0.0).inv() / s;
    let diff = (inv_p - inv_s) / s;
    Ok(SymbolMatrix::from_fn(xi.len(), |j, k| {
        let rank1 = diff * eta[j] * eta[k];
        if j == k {
            inv_s + rank1
        } else {
            rank1
        }
    }))
}

/// `M_eta` itself.
pub fn conjugated_matrix(xi: &[f64], v: &[f64], params: &LameParameters) -> SymbolMatrix {
    let eta: Vec<Complex64> = xi.iter().zip(v).map(|(a, b)| Complex64::new(*a, *b)).collect();
    let s: Complex64 = eta.iter().map(|e| e * e).sum();
    let c = params.lambda + params.mu;
    SymbolMatrix::from_fn(xi.len(), |j, k| {
        let rank1 = eta[j] * eta[k] * c;
        if j == k {
            s * params.mu + rank1
        } else {
            rank1
        }
    })
}
