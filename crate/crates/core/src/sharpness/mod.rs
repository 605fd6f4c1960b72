//! Lower-bound experiments for the imaginary-part multiplier `I_delta`.
//!
//! Each experiment evaluates a ratio (or a restricted norm) along a dyadic
//! sweep of `delta` and fits the log-log slope.

pub mod derivative;
pub mod focusing;
pub mod knapp;
pub mod stationary;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{loglog_fit, running_slopes, LineFit};

/// Counterexample families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Knapp,
    Focusing,
    CarlemanAniso,
    Annulus,
}

/// A named test-function family with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionSpec {
    pub family: Family,
    pub dim: usize,
    /// `delta` for the scaled families, `epsilon` for the annulus.
    pub scale: f64,
    pub rho: f64,
    pub eps_circ: f64,
    pub nu: f64,
}

/// Where the output of a multiplier is measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationSet {
    /// `{|x_d| <= 1/(100 delta), |x_j| <= 1/(100 d sqrt(delta))}`.
    ADelta {
        delta: f64,
    },
    /// `{1/(20 nu delta) <= x_1 <= 1/(10 nu delta), x_1 >= 32 |x'|}`.
    BDelta {
        delta: f64,
        nu: f64,
    },
    Full,
}

impl ObservationSet {
    pub fn contains(&self, x: &[f64]) -> bool {
        let d = x.len();
        match *self {
            ObservationSet::ADelta { delta } => {
                let (t, y) = x.split_last().expect("nonempty point");
                t.abs() <= 1.0 / (100.0 * delta) && y.iter().all(|v| v.abs() <= 1.0 / (100.0 * d as f64 * delta.sqrt()))
            }
            ObservationSet::BDelta { delta, nu } => {
                let x1 = x[0];
                let xp = x[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
                (1.0 / (20.0 * nu * delta)..=1.0 / (10.0 * nu * delta)).contains(&x1) && x1 >= 32.0 * xp
            }
            ObservationSet::Full => true,
        }
    }

    /// Lebesgue measure in dimension `d` (infinite for the full space).
    pub fn measure(&self, d: usize) -> f64 {
        match *self {
            ObservationSet::ADelta { delta } => {
                let side = 2.0 / (100.0 * d as f64 * delta.sqrt());
                2.0 / (100.0 * delta) * side.powi(d as i32 - 1)
            }
            ObservationSet::BDelta { delta, nu } => {
                // int x_1^{d-1} dx_1 times |B^{d-1}| 32^{-(d-1)}.
                let (a, b) = (1.0 / (20.0 * nu * delta), 1.0 / (10.0 * nu * delta));
                let k = d as f64;
                ball_volume(d - 1) * 32f64.powf(1.0 - k) * (b.powf(k) - a.powf(k)) / k
            }
            ObservationSet::Full => f64::INFINITY,
        }
    }
}

/// Volume of the unit ball in `R^m`.
pub fn ball_volume(m: usize) -> f64 {
    let mf = m as f64;
    std::f64::consts::PI.powf(mf / 2.0) / gamma_half_integer(mf / 2.0 + 1.0)
}

/// Surface area of the unit sphere `S^{m-1}` in `R^m` (`|S^0| = 2`).
pub fn sphere_area(m: usize) -> f64 {
    m as f64 * ball_volume(m)
}

fn gamma_half_integer(x: f64) -> f64 {
    // x is a positive integer or half-integer.
    if (x - 0.5).abs() < 1e-12 {
        std::f64::consts::PI.sqrt()
    } else if (x - 1.0).abs() < 1e-12 {
        1.0
    } else {
        (x - 1.0) * gamma_half_integer(x - 1.0)
    }
}

/// One sample of a sweep; serialized as a CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub delta: f64,
    pub ratio: f64,
    pub norm_f: f64,
    #[serde(rename = "norm_Tf")]
    pub norm_tf: f64,
}

/// Per-scale data with the fitted slope of `log2 ratio` against `log2 delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub points: Vec<SweepPoint>,
    pub fit: LineFit,
    pub expected_slope: f64,
    pub running: Vec<f64>,
}

impl Sweep {
    pub fn new(points: Vec<SweepPoint>, expected_slope: f64) -> Result<Self> {
        let (s, r): (Vec<f64>, Vec<f64>) = points.iter().map(|p| (p.delta, p.ratio)).unzip();
        let fit = loglog_fit(&s, &r)?;
        Ok(Self { running: running_slopes(&s, &r), points, fit, expected_slope })
    }

    pub fn slope_error(&self) -> f64 {
        (self.fit.slope - self.expected_slope).abs()
    }

    /// CSV with header `delta,ratio,norm_f,norm_Tf,slope_running`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,ratio,norm_f,norm_Tf,slope_running\n");
        for (p, s) in self.points.iter().zip(&self.running) {
            out.push_str(&format!("{:e},{:e},{:e},{:e},{}\n", p.delta, p.ratio, p.norm_f, p.norm_tf, s));
        }
        out
    }
}

/// Rejects sweeps that are too short or not dyadic.
pub fn check_dyadic(deltas: &[f64]) -> Result<()> {
    if deltas.len() < 5 {
        return Err(Error::ParameterRange(format!("a sweep needs at least 5 scales, got {}", deltas.len())));
    }
    for d in deltas {
        let e = d.log2();
        if !(*d > 0.0) || (e - e.round()).abs() > 1e-9 {
            return Err(Error::ParameterRange(format!("scale {d} is not a power of two")));
        }
    }
    Ok(())
}

/// Evaluates independent per-scale instances concurrently; order is preserved.
pub(crate) fn per_scale<T: Send>(deltas: &[f64], f: impl Fn(f64) -> Result<T> + Sync) -> Result<Vec<T>> {
    deltas.par_iter().map(|&d| f(d)).collect()
}
