//! Empirical constants for the symbol bounds
//! `|d^alpha a_delta| <~ delta / (tau^2 (tau + 2 psi - 2)^2 + delta^2)` and `|b_delta| <~ delta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbols::{a_delta, b_delta, default_eps_circ, psi, LameParameters};

/// Table of `sup |d^alpha a_delta| / bound` per `delta` and multi-index, plus `sup |b_delta| / delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeTable {
    pub dim: usize,
    pub rho: f64,
    pub eps_circ: f64,
    pub deltas: Vec<f64>,
    /// Multi-indices over `xi'`.
    pub alphas: Vec<Vec<usize>>,
    /// `rows[k][j]`: constant for `deltas[k]` and `alphas[j]`.
    pub rows: Vec<Vec<f64>>,
    pub b_over_delta: Vec<f64>,
}

impl DerivativeTable {
    /// `max / min` across `delta` of each column, the `b` column last.
    pub fn spreads(&self) -> Vec<f64> {
        let spread = |col: Vec<f64>| {
            let max = col.iter().copied().fold(f64::MIN, f64::max);
            let min = col.iter().copied().fold(f64::MAX, f64::min);
            max / min
        };
        let mut out: Vec<f64> = (0..self.alphas.len()).map(|j| spread(self.rows.iter().map(|r| r[j]).collect())).collect();
        out.push(spread(self.b_over_delta.clone()));
        out
    }

    pub fn is_uniform(&self, factor: f64) -> bool {
        self.spreads().iter().all(|s| s.is_finite() && *s <= factor)
    }

    pub fn to_csv(&self) -> String {
        let names: Vec<String> =
            self.alphas.iter().map(|a| format!("alpha_{}", a.iter().map(|v| v.to_string()).collect::<String>())).collect();
        let mut out = format!("delta,{},b_over_delta\n", names.join(","));
        for (k, d) in self.deltas.iter().enumerate() {
            let vals: Vec<String> = self.rows[k].iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&format!("{d:e},{},{:e}\n", vals.join(","), self.b_over_delta[k]));
        }
        out
    }
}

/// Multi-indices of length `m` with `|alpha| <= 2`, ordered by degree.
pub fn multi_indices(m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; m]];
    for j in 0..m {
        let mut a = vec![0; m];
        a[j] = 1;
        out.push(a);
    }
    for j in 0..m {
        for k in j..m {
            let mut a = vec![0; m];
            a[j] += 1;
            a[k] += 1;
            out.push(a);
        }
    }
    out
}

fn a_at(tau: f64, xi: &[f64], delta: f64) -> f64 {
    a_delta(tau, psi(xi).expect("|xi'| < 1"), delta)
}

/// Central difference of `a_delta(tau, .)` at `xi` with step `h`.
pub fn central_difference(tau: f64, xi: &[f64], delta: f64, alpha: &[usize], h: f64) -> f64 {
    let shifted = |steps: &[(usize, f64)]| {
        let mut p = xi.to_vec();
        for &(j, s) in steps {
            p[j] += s * h;
        }
        a_at(tau, &p, delta)
    };
    let nz: Vec<usize> = (0..alpha.len()).filter(|&j| alpha[j] > 0).collect();
    match (alpha.iter().sum::<usize>(), nz.as_slice()) {
        (0, _) => a_at(tau, xi, delta),
        (1, [j]) => (shifted(&[(*j, 1.0)]) - shifted(&[(*j, -1.0)])) / (2.0 * h),
        (2, [j]) => (shifted(&[(*j, 1.0)]) - 2.0 * a_at(tau, xi, delta) + shifted(&[(*j, -1.0)])) / (h * h),
        (2, [j, k]) => {
            (shifted(&[(*j, 1.0), (*k, 1.0)]) - shifted(&[(*j, 1.0), (*k, -1.0)]) - shifted(&[(*j, -1.0), (*k, 1.0)])
                + shifted(&[(*j, -1.0), (*k, -1.0)]))
                / (4.0 * h * h)
        }
        _ => panic!("only |alpha| <= 2 is supported"),
    }
}

/// Sample `tau` values: a uniform grid on `|tau| <= 2 eps` plus points scaled by `delta`.
fn tau_samples(delta: f64, eps: f64) -> Vec<f64> {
    let mut t: Vec<f64> = (0..=32).map(|k| 2.0 * eps * (k as f64 / 16.0 - 1.0)).collect();
    for c in [0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 1.0, 2.0, 4.0, 8.0, 16.0] {
        if c * delta <= 2.0 * eps {
            t.push(c * delta);
            t.push(-c * delta);
        }
    }
    t
}

/// Sample `xi'` on a tensor grid of step `1/50` inside `|xi'| <= 1/10`.
fn xi_samples(m: usize) -> Vec<Vec<f64>> {
    let per = 11usize;
    let mut out = Vec::new();
    for flat in 0..per.pow(m as u32) {
        let mut rest = flat;
        let p: Vec<f64> = (0..m)
            .map(|_| {
                let i = rest % per;
                rest /= per;
                (i as f64 - 5.0) / 50.0
            })
            .collect();
        if p.iter().map(|v| v * v).sum::<f64>() <= 0.01 + 1e-12 {
            out.push(p);
        }
    }
    out
}

/// Empirical constants over `|tau| <= 2 eps_circ`, `|xi'| <= 1/10` in dimension `dim`,
/// with derivative step `h = delta / 8`.
pub fn derivative_bound_check(deltas: &[f64], params: &LameParameters, dim: usize) -> Result<DerivativeTable> {
    params.require_nondegenerate()?;
    if dim < 2 {
        return Err(Error::Shape("derivative checks need d >= 2".into()));
    }
    if deltas.is_empty() || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Domain("deltas must be positive and nonempty".into()));
    }
    let rho = params.rho();
    let eps = default_eps_circ(rho);
    let m = dim - 1;
    let alphas = multi_indices(m);
    let xis = xi_samples(m);
    let mut rows = Vec::new();
    let mut b_col = Vec::new();
    for &delta in deltas {
        let h = delta / 8.0;
        let mut row = vec![0.0f64; alphas.len()];
        let mut b_sup = 0.0f64;
        for tau in tau_samples(delta, eps) {
            for xi in &xis {
                let bound = a_at(tau, xi, delta);
                for (j, alpha) in alphas.iter().enumerate() {
                    row[j] = row[j].max(central_difference(tau, xi, delta, alpha, h).abs() / bound);
                }
                let ps = psi(xi)?;
                let r2: f64 = xi.iter().map(|v| v * v).sum();
                b_sup = b_sup.max(b_delta(tau, ps, r2, delta, rho)?.abs());
            }
        }
        rows.push(row);
        b_col.push(b_sup / delta);
    }
    Ok(DerivativeTable { dim, rho, eps_circ: eps, deltas: deltas.to_vec(), alphas, rows, b_over_delta: b_col })
}
