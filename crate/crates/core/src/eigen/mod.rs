//! Matrix potentials, the smallness hypothesis for eigenvalue exclusion, and
//! eigenvalue reports for the discretized operator `-Lame + V` against the
//! region `Z_{p,q}(ell) = {z off [0, inf) : kappa(z) <= ell}`.
//!
//! Reports are desk-scale demonstrations: a periodic grid has discrete
//! `L^2` spectrum, while the exclusion statement concerns the continuum.

mod operator;

pub use operator::{
    assemble_operator, dense_eigenvalues, free_spectrum, gmres, hermitian_defect, nearest_eigenvalues, sort_spectrum, Assembled,
    AssemblyMode, EigenEstimate, IterativeOptions, SpectralOperator, DENSE_CAP,
};

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{norm_from_samples, read_lamf, write_lamf, Domain, PeriodicGrid, VectorField};
use crate::geometry::{classify, kappa, zregion_contains, ExponentPair};
use crate::symbols::{LameParameters, SymbolMatrix};

/// `d x d` complex samples on a common grid; entry `(j, k)` is stored at `j * d + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    grid: PeriodicGrid,
    entries: Vec<Vec<Complex64>>,
}

impl PotentialField {
    pub fn new(grid: PeriodicGrid, entries: Vec<Vec<Complex64>>) -> Result<Self> {
        let d = grid.dim();
        if entries.len() != d * d {
            return Err(Error::Shape(format!("a potential in dimension {d} needs {} entries, got {}", d * d, entries.len())));
        }
        if entries.iter().any(|e| e.len() != grid.len()) {
            return Err(Error::Shape("potential entry length does not match the grid".into()));
        }
        if entries.iter().flatten().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("potential has non-finite samples".into()));
        }
        Ok(Self { grid, entries })
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(&[f64]) -> SymbolMatrix) -> Result<Self> {
        let d = grid.dim();
        let mut entries = vec![Vec::with_capacity(grid.len()); d * d];
        for x in grid.positions() {
            let m = f(&x);
            if m.dim() != d {
                return Err(Error::Shape(format!("sampler returned a {0}x{0} matrix in dimension {d}", m.dim())));
            }
            for (e, v) in entries.iter_mut().zip(m.entries()) {
                e.push(*v);
            }
        }
        Self::new(grid, entries)
    }

    /// `V = c I`.
    pub fn scalar(grid: PeriodicGrid, c: Complex64) -> Result<Self> {
        let d = grid.dim();
        Self::from_fn(grid, |_| SymbolMatrix::scalar(d, c))
    }

    /// Independent entries with real and imaginary parts uniform in
    /// `[-amplitude, amplitude)`; with `hermitian` the lower triangle mirrors
    /// the upper one and the diagonal is real.
    pub fn random(grid: &PeriodicGrid, amplitude: f64, hermitian: bool, rng: &mut impl Rng) -> Result<Self> {
        let d = grid.dim();
        let mut draw = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * amplitude;
        let mut entries = vec![Vec::with_capacity(grid.len()); d * d];
        for _ in 0..grid.len() {
            let mut m = vec![Complex64::new(0.0, 0.0); d * d];
            for j in 0..d {
                for k in 0..d {
                    if hermitian && k < j {
                        m[j * d + k] = m[k * d + j].conj();
                    } else if hermitian && k == j {
                        m[j * d + k] = Complex64::new(draw().re, 0.0);
                    } else {
                        m[j * d + k] = draw();
                    }
                }
            }
            for (e, v) in entries.iter_mut().zip(m) {
                e.push(v);
            }
        }
        Self::new(grid.clone(), entries)
    }

    /// Reads a LAMF file with `d^2` components.
    pub fn read(path: &std::path::Path) -> Result<Self> {
        let (grid, comps) = read_lamf(path)?;
        Self::new(grid, comps)
    }

    pub fn write(&self, path: &std::path::Path) -> Result<()> {
        write_lamf(path, &self.grid, &self.entries)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn entry(&self, j: usize, k: usize) -> &[Complex64] {
        &self.entries[j * self.dim() + k]
    }

    pub fn entries(&self) -> &[Vec<Complex64>] {
        &self.entries
    }

    /// The matrix `V(x_i)`.
    pub fn at(&self, i: usize) -> SymbolMatrix {
        let d = self.dim();
        SymbolMatrix::from_fn(d, |j, k| self.entries[j * d + k][i])
    }

    pub fn scale(&self, a: Complex64) -> Self {
        let entries = self.entries.iter().map(|e| e.iter().map(|v| v * a).collect()).collect();
        Self { grid: self.grid.clone(), entries }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.grid.len()).all(|i| self.at(i).is_hermitian(tol))
    }

    /// `sup_x |V(x)|_{2 -> 2}`: the operator norm of multiplication by `V`.
    pub fn sup_operator_norm(&self) -> Result<f64> {
        let d = self.dim();
        let mut best = 0.0f64;
        for i in 0..self.grid.len() {
            let m = self.at(i);
            let a = Mat::<Complex64>::from_fn(d, d, |j, k| m.get(j, k));
            let s = a.singular_values().map_err(|e| Error::Eigen(format!("{e:?}")))?;
            best = best.max(s.first().copied().unwrap_or(0.0));
        }
        Ok(best)
    }

    /// `(V u)_j = sum_k V_jk u_k` pointwise.
    pub fn apply(&self, u: &VectorField) -> Result<VectorField> {
        if u.domain() != Domain::Space || u.grid() != &self.grid || u.ncomp() != self.dim() {
            return Err(Error::Shape("potential applies to space-domain fields with d components on its grid".into()));
        }
        let flat = self.apply_flat(&u.components().concat())?;
        VectorField::new(self.grid.clone(), Domain::Space, flat.chunks(self.grid.len()).map(<[Complex64]>::to_vec).collect())
    }

    /// [`Self::apply`] on the component-major flat layout.
    pub fn apply_flat(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let (d, n) = (self.dim(), self.grid.len());
        if u.len() != d * n {
            return Err(Error::Shape(format!("vector of length {} for a potential of order {}", u.len(), d * n)));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); d * n];
        for j in 0..d {
            for k in 0..d {
                let e = &self.entries[j * d + k];
                for i in 0..n {
                    out[j * n + i] += e[i] * u[k * n + i];
                }
            }
        }
        Ok(out)
    }
}

/// `(sum_{j,k} |V_jk|_s^s)^{1/s}`, and `max_{j,k} |V_jk|_inf` for `s = inf`.
pub fn potential_norm(v: &PotentialField, s: f64) -> Result<f64> {
    let w = v.grid.cell_volume();
    let norms = v.entries.iter().map(|e| norm_from_samples(e.iter().map(|x| x.norm()), s, w)).collect::<Result<Vec<_>>>()?;
    norm_from_samples(norms.into_iter(), s, 1.0)
}

/// `s = pq / (q - p)`, infinite when `p = q`.
pub fn potential_exponent(p: f64, q: f64) -> Result<f64> {
    if !(p >= 1.0) || !(q >= 1.0) {
        return Err(Error::Domain(format!("exponents must be at least 1, got p = {p}, q = {q}")));
    }
    if p > q {
        return Err(Error::ExponentOrder { p, q });
    }
    Ok(if p == q {
        f64::INFINITY
    } else if q.is_infinite() {
        p
    } else {
        p * q / (q - p)
    })
}

/// `1 - 1/p + 1/q`, the exponent of `d` in the Holder chain constant.
fn chain_exponent(p: f64, q: f64) -> f64 {
    1.0 - 1.0 / p + 1.0 / q
}

/// The bound `t / (C ell d^{1 - 1/p + 1/q})` on `|V|_{pq/(q-p)}`.
pub fn smallness_threshold(dim: usize, p: f64, q: f64, ell: f64, c_user: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::ParameterRange(format!("t must lie in (0, 1), got {t}")));
    }
    if !(ell > 0.0) || !(c_user > 0.0) {
        return Err(Error::ParameterRange(format!("ell and C must be positive, got ell = {ell}, C = {c_user}")));
    }
    if !(p >= 1.0) || !(q >= 1.0) {
        return Err(Error::Domain(format!("exponents must be at least 1, got p = {p}, q = {q}")));
    }
    let gap = 1.0 / p - 1.0 / q;
    if (gap - 2.0 / dim as f64).abs() < 1e-12 && ell < 1.0 {
        return Err(Error::ParameterRange(format!("on the line 1/p - 1/q = 2/d the level must satisfy ell >= 1, got {ell}")));
    }
    Ok(t / (c_user * ell * (dim as f64).powf(chain_exponent(p, q))))
}

/// Both sides of `|V u|_p <= d^{1 - 1/p + 1/q} |V|_{pq/(q-p)} |u|_q`.
pub fn holder_chain_check(v: &PotentialField, u: &VectorField, p: f64, q: f64) -> Result<(f64, f64)> {
    let s = potential_exponent(p, q)?;
    let lhs = v.apply(u)?.lp_norm(p)?;
    let rhs = (v.dim() as f64).powf(chain_exponent(p, q)) * potential_norm(v, s)? * u.lp_norm(q)?;
    Ok((lhs, rhs))
}

/// Where an eigenvalue sits relative to `[0, inf)` and `Z_{p,q}(ell)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenFlag {
    OnRay,
    InZ,
    OutsideZ,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenEntry {
    pub re: f64,
    pub im: f64,
    pub flag: EigenFlag,
    /// `kappa_{p,q}(E)`, absent for eigenvalues on the ray.
    pub kappa: Option<f64>,
    /// Residual of the iterative solver; absent for dense solves.
    pub residual: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParameters {
    pub dim: usize,
    pub n: Vec<usize>,
    pub half_length: Vec<f64>,
    pub mu: f64,
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
    pub ell: f64,
    pub t: f64,
    pub c_user: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    DenseHermitian,
    DenseGeneral,
    ShiftInvert,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub label: String,
    pub parameters: ReportParameters,
    pub solver: SolverKind,
    /// An eigenvalue is `on_ray` when its distance to `[0, inf)` is at most this.
    pub ray_tolerance: f64,
    pub norm_exponent: f64,
    pub potential_norm: f64,
    pub threshold: f64,
    pub hypothesis_satisfied: bool,
    pub stamp: String,
    pub eigenvalues: Vec<EigenEntry>,
}

impl EigenReport {
    pub fn count(&self, flag: EigenFlag) -> usize {
        self.eigenvalues.iter().filter(|e| e.flag == flag).count()
    }

    pub fn unconverged(&self) -> usize {
        self.eigenvalues.iter().filter(|e| !e.converged).count()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,flag,kappa,residual,converged\n");
        for e in &self.eigenvalues {
            let flag = match e.flag {
                EigenFlag::OnRay => "on_ray",
                EigenFlag::InZ => "in_z",
                EigenFlag::OutsideZ => "outside_z",
            };
            let opt = |v: Option<f64>| v.map(|x| format!("{x:.17e}")).unwrap_or_default();
            s.push_str(&format!("{:.17e},{:.17e},{flag},{},{},{}\n", e.re, e.im, opt(e.kappa), opt(e.residual), e.converged));
        }
        s
    }
}

/// Controls for [`eigen_region_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub dense_cap: usize,
    /// `(center, k)`: keep the `k` eigenvalues nearest `center`. Required
    /// above the dense cap, where the shift-invert solver runs.
    pub window: Option<(Complex64, usize)>,
    pub ray_tolerance: f64,
    pub iterative: IterativeOptions,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { dense_cap: DENSE_CAP, window: None, ray_tolerance: 1e-8, iterative: IterativeOptions::default() }
    }
}

pub const LABEL: &str = "desk-scale demonstration: eigenvalues of a periodic spectral discretization (L^2 spectrum), not a verification of the continuum exclusion statement";
const STAMP_OK: &str = "smallness hypothesis satisfied";
const STAMP_FAIL: &str = "hypothesis not satisfied; corollary makes no claim";

/// Computes eigenvalues of `-Lame + V` and flags each against `Z_{p,q}(ell)`.
#[allow(clippy::too_many_arguments)]
pub fn eigen_region_report(
    grid: &PeriodicGrid,
    params: &LameParameters,
    v: &PotentialField,
    p: f64,
    q: f64,
    ell: f64,
    t: f64,
    c_user: f64,
    opts: &ReportOptions,
) -> Result<EigenReport> {
    let d = grid.dim();
    let pair = ExponentPair::from_exponents(p, q)?;
    if !classify(d, &pair)?.has_bound() {
        return Err(Error::UnsupportedExponent { x: format!("1/{p}"), y: format!("1/{q}") });
    }
    let s = potential_exponent(p, q)?;
    let threshold = smallness_threshold(d, p, q, ell, c_user, t)?;
    let vnorm = potential_norm(v, s)?;
    let op = SpectralOperator::new(grid, params, Some(v))?;

    let (solver, estimates) = if op.order() <= opts.dense_cap {
        let hermitian = v.is_hermitian(0.0);
        let mut ev = dense_eigenvalues(&op.to_dense(opts.dense_cap)?, hermitian)?;
        if let Some((center, k)) = opts.window {
            ev.sort_by(|a, b| (a - center).norm().total_cmp(&(b - center).norm()));
            ev.truncate(k);
            sort_spectrum(&mut ev);
        }
        let kind = if hermitian { SolverKind::DenseHermitian } else { SolverKind::DenseGeneral };
        (kind, ev.into_iter().map(|e| (e, None, true)).collect::<Vec<_>>())
    } else {
        let (center, k) = opts.window.ok_or(Error::SizeCap { order: op.order(), cap: opts.dense_cap })?;
        let mut est = nearest_eigenvalues(&op, center, k, &opts.iterative)?;
        est.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
        (SolverKind::ShiftInvert, est.into_iter().map(|e| (e.value, Some(e.residual), e.converged)).collect())
    };

    let eigenvalues = estimates
        .into_iter()
        .map(|(e, residual, converged)| {
            let ray_distance = if e.re >= 0.0 { e.im.abs() } else { e.norm() };
            let (flag, kap) = if ray_distance <= opts.ray_tolerance {
                (EigenFlag::OnRay, None)
            } else {
                let inside = zregion_contains(d, &pair, ell, e)?;
                (if inside { EigenFlag::InZ } else { EigenFlag::OutsideZ }, Some(kappa(d, &pair, e)?))
            };
            Ok(EigenEntry { re: e.re, im: e.im, flag, kappa: kap, residual, converged })
        })
        .collect::<Result<Vec<_>>>()?;

    let ok = vnorm <= threshold;
    Ok(EigenReport {
        label: LABEL.into(),
        parameters: ReportParameters {
            dim: d,
            n: grid.n().to_vec(),
            half_length: grid.half_lengths().to_vec(),
            mu: params.mu(),
            lambda: params.lambda(),
            p,
            q,
            ell,
            t,
            c_user,
        },
        solver,
        ray_tolerance: opts.ray_tolerance,
        norm_exponent: s,
        potential_norm: vnorm,
        threshold,
        hypothesis_satisfied: ok,
        stamp: if ok { STAMP_OK } else { STAMP_FAIL }.into(),
        eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn unit_box(n: usize) -> PeriodicGrid {
        PeriodicGrid::cubic(2, n, 0.5).unwrap()
    }

    fn params() -> LameParameters {
        LameParameters::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn scalar_potential_norm() {
        let v = PotentialField::scalar(unit_box(8), Complex64::new(0.0, -3.0)).unwrap();
        for s in [1.0, 2.0, 3.5] {
            assert!((potential_norm(&v, s).unwrap() - 3.0 * 2f64.powf(1.0 / s)).abs() < 1e-13);
        }
        assert!((potential_norm(&v, f64::INFINITY).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn single_entry_norm_and_homogeneity() {
        let g = unit_box(16);
        let v = PotentialField::from_fn(g, |x| {
            SymbolMatrix::from_fn(2, |j, k| if (j, k) == (0, 1) { Complex64::new(x[0] + 0.5, 0.0) } else { Complex64::new(0.0, 0.0) })
        })
        .unwrap();
        // Riemann sum of |x + 1/2|^2 over 16 left endpoints, times the y-length.
        let exact = ((0..16).map(|i| (i as f64 / 16.0).powi(2)).sum::<f64>() / 16.0).sqrt();
        assert!((potential_norm(&v, 2.0).unwrap() - exact).abs() < 1e-14);
        let a = Complex64::new(-1.5, 2.0);
        assert!((potential_norm(&v.scale(a), 2.0).unwrap() - 2.5 * exact).abs() < 1e-13);
    }

    #[test]
    fn threshold_hand_value() {
        let th = smallness_threshold(3, 1.5, f64::INFINITY, 1.0, 1.0, 0.5).unwrap();
        assert!((th - 1.0 / (2.0 * 3f64.cbrt())).abs() < 1e-15);
        let a = smallness_threshold(3, 1.2, 3.0, 2.0, 1.0, 0.5).unwrap();
        let b = smallness_threshold(3, 1.2, 3.0, 4.0, 1.0, 0.5).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-15);
        // Linear in t.
        let c = smallness_threshold(3, 1.2, 3.0, 2.0, 1.0, 0.25).unwrap();
        assert!((a - 2.0 * c).abs() < 1e-15);
    }

    #[test]
    fn threshold_refuses_small_level_on_critical_line() {
        assert!(matches!(smallness_threshold(3, 1.5, f64::INFINITY, 0.5, 1.0, 0.5), Err(Error::ParameterRange(_))));
        assert!(smallness_threshold(3, 1.2, 3.0, 0.5, 1.0, 0.5).is_ok());
        assert!(smallness_threshold(2, 1.2, 3.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn holder_rejects_reversed_exponents() {
        let g = unit_box(4);
        let v = PotentialField::scalar(g.clone(), Complex64::new(1.0, 0.0)).unwrap();
        let u = VectorField::zeros(g, Domain::Space, 2);
        assert!(matches!(holder_chain_check(&v, &u, 3.0, 2.0), Err(Error::ExponentOrder { .. })));
    }

    #[test]
    fn holder_scalar_constant_ratio() {
        // V = cI, u = a constant on the unit box: lhs / rhs = |a|_p / (d |a|_q).
        let g = unit_box(8);
        let v = PotentialField::scalar(g.clone(), Complex64::new(0.7, 0.2)).unwrap();
        let a = [Complex64::new(1.0, 1.0), Complex64::new(-2.0, 0.5)];
        let u = VectorField::from_fn(g, Domain::Space, 2, |_| a.to_vec()).unwrap();
        let (p, q) = (1.2, 3.0);
        let (lhs, rhs) = holder_chain_check(&v, &u, p, q).unwrap();
        let lp = |r: f64| (a[0].norm().powf(r) + a[1].norm().powf(r)).powf(1.0 / r);
        assert!((lhs / rhs - lp(p) / (2.0 * lp(q))).abs() < 1e-13);
        assert!(lhs <= rhs);
    }

    #[test]
    fn holder_equality_for_matching_entry() {
        // One entry of V against the matching component of u, p = q:
        // |V u|_p = |V|_inf |u|_p when |V| is constant on the support of u.
        let g = unit_box(8);
        let v = PotentialField::from_fn(g.clone(), |_| {
            SymbolMatrix::from_fn(2, |j, k| if (j, k) == (1, 0) { Complex64::new(0.0, 2.0) } else { Complex64::new(0.0, 0.0) })
        })
        .unwrap();
        let u = VectorField::single(g, Domain::Space, 2, 0, |x| Complex64::new(x[0].cos(), x[1])).unwrap();
        let (lhs, rhs) = holder_chain_check(&v, &u, 2.0, 2.0).unwrap();
        assert!((lhs - 2.0 * u.lp_norm(2.0).unwrap()).abs() < 1e-13);
        assert!((rhs - 2.0 * lhs).abs() < 1e-12, "rhs carries the factor d");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn holder_chain_holds(seed in any::<u64>(), pair in 0usize..3) {
            let (p, q) = [(1.2, 3.0), (2.0, 2.0), (1.0, 4.0)][pair];
            let g = PeriodicGrid::cubic(2, 8, 1.3).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = PotentialField::random(&g, 1.0, false, &mut rng).unwrap();
            let u = VectorField::from_fn(g, Domain::Space, 2, |_| {
                vec![Complex64::new(rng_pair(seed, 1), 0.3), Complex64::new(-0.2, rng_pair(seed, 2))]
            }).unwrap();
            let (lhs, rhs) = holder_chain_check(&v, &u, p, q).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-10));
        }
    }

    fn rng_pair(seed: u64, k: u64) -> f64 {
        ChaCha8Rng::seed_from_u64(seed ^ k).random_range(-1.0..1.0)
    }

    #[test]
    fn scalar_shift_moves_spectrum() {
        let g = PeriodicGrid::cubic(2, 8, PI).unwrap();
        let c = Complex64::new(0.3, -0.7);
        let v = PotentialField::scalar(g.clone(), c).unwrap();
        let op = SpectralOperator::new(&g, &params(), Some(&v)).unwrap();
        let ev = dense_eigenvalues(&op.to_dense(DENSE_CAP).unwrap(), false).unwrap();
        for (e, x) in ev.iter().zip(free_spectrum(&g, &params())) {
            assert!((e - c - x).norm() < 1e-10 * x.max(1.0), "{e} vs {x} + {c}");
        }
    }

    #[test]
    fn hermitian_potential_gives_real_spectrum() {
        let g = PeriodicGrid::cubic(2, 8, PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = PotentialField::random(&g, 0.8, true, &mut rng).unwrap();
        assert!(v.is_hermitian(0.0));
        let a = SpectralOperator::new(&g, &params(), Some(&v)).unwrap().to_dense(DENSE_CAP).unwrap();
        assert!(hermitian_defect(&a) < 1e-12);
        let ev = dense_eigenvalues(&a, false).unwrap();
        assert!(ev.iter().all(|e| e.im.abs() < 1e-8));
    }

    #[test]
    fn weyl_bound_for_hermitian_potential() {
        let g = PeriodicGrid::cubic(2, 8, PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = PotentialField::random(&g, 0.5, true, &mut rng).unwrap();
        let a = SpectralOperator::new(&g, &params(), Some(&v)).unwrap().to_dense(DENSE_CAP).unwrap();
        let ev = dense_eigenvalues(&a, true).unwrap();
        let bound = v.sup_operator_norm().unwrap();
        let gap = ev.iter().zip(free_spectrum(&g, &params())).map(|(e, x)| (e.re - x).abs()).fold(0.0, f64::max);
        assert!(gap <= bound + 1e-10, "{gap} > {bound}");
    }

    #[test]
    fn report_flags_partition_and_stamp() {
        let g = PeriodicGrid::cubic(2, 8, PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = PotentialField::random(&g, 1.0, false, &mut rng).unwrap();
        let r = eigen_region_report(&g, &params(), &v, 1.2, 3.0, 1.0, 0.5, 1.0, &ReportOptions::default()).unwrap();
        assert!(!r.hypothesis_satisfied);
        assert_eq!(r.stamp, STAMP_FAIL);
        assert_eq!(r.eigenvalues.len(), 128);
        let total = r.count(EigenFlag::OnRay) + r.count(EigenFlag::InZ) + r.count(EigenFlag::OutsideZ);
        assert_eq!(total, 128);
        for e in &r.eigenvalues {
            assert_eq!(e.kappa.is_some(), e.flag != EigenFlag::OnRay);
        }
    }

    #[test]
    fn zero_potential_report_is_on_ray() {
        let g = PeriodicGrid::cubic(2, 8, PI).unwrap();
        let v = PotentialField::scalar(g.clone(), Complex64::new(0.0, 0.0)).unwrap();
        let r = eigen_region_report(&g, &params(), &v, 1.2, 3.0, 1.0, 0.5, 1.0, &ReportOptions::default()).unwrap();
        assert!(r.hypothesis_satisfied);
        assert_eq!(r.solver, SolverKind::DenseHermitian);
        assert_eq!(r.count(EigenFlag::OnRay), 128);
    }

    #[test]
    fn report_is_deterministic_and_windowed() {
        let g = PeriodicGrid::cubic(2, 8, PI).unwrap();
        let make = || {
            let mut rng = ChaCha8Rng::seed_from_u64(21);
            let v = PotentialField::random(&g, 0.05, false, &mut rng).unwrap();
            let opts = ReportOptions { window: Some((Complex64::new(1.1, 0.0), 5)), ..Default::default() };
            serde_json::to_string(&eigen_region_report(&g, &params(), &v, 1.2, 3.0, 1.0, 0.5, 1.0, &opts).unwrap()).unwrap()
        };
        let a = make();
        assert_eq!(a, make());
        let r: EigenReport = serde_json::from_str(&a).unwrap();
        assert_eq!(r.eigenvalues.len(), 5);
    }

    #[test]
    fn matrix_free_report_above_cap() {
        let g = PeriodicGrid::cubic(2, 8, PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v = PotentialField::random(&g, 0.1, false, &mut rng).unwrap();
        let mut opts = ReportOptions { dense_cap: 64, ..Default::default() };
        assert!(matches!(eigen_region_report(&g, &params(), &v, 1.2, 3.0, 1.0, 0.5, 1.0, &opts), Err(Error::SizeCap { .. })));
        opts.window = Some((Complex64::new(-0.5, 0.2), 3));
        let r = eigen_region_report(&g, &params(), &v, 1.2, 3.0, 1.0, 0.5, 1.0, &opts).unwrap();
        assert_eq!(r.solver, SolverKind::ShiftInvert);
        assert!(r.eigenvalues.iter().all(|e| e.converged && e.residual.is_some()));
    }

    #[test]
    fn potential_lamf_round_trip() {
        let g = unit_box(4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = PotentialField::random(&g, 1.0, false, &mut rng).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.bin");
        v.write(&path).unwrap();
        assert_eq!(PotentialField::read(&path).unwrap(), v);
    }
}
