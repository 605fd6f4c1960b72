//! Ordinary least-squares line fits for scaling laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fitted line `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    pub r_squared: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Shape(format!("line fit needs >= 2 paired samples, got {} and {}", x.len(), y.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Domain("line fit over non-finite samples".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("line fit with constant abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let max_residual = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).abs()).fold(0.0, f64::max);
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LineFit { slope, intercept, max_residual, r_squared })
}

/// Fit of `log2 value` against `log2 scale`; both inputs must be positive.
pub fn loglog_fit(scale: &[f64], value: &[f64]) -> Result<LineFit> {
    if scale.iter().chain(value).any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("log-log fit needs positive samples".into()));
    }
    let lx: Vec<f64> = scale.iter().map(|v| v.log2()).collect();
    let ly: Vec<f64> = value.iter().map(|v| v.log2()).collect();
    fit_line(&lx, &ly)
}

/// Running log-log slopes: entry `k` fits the first `k + 1` samples (NaN for `k = 0`).
pub fn running_slopes(scale: &[f64], value: &[f64]) -> Vec<f64> {
    (0..scale.len()).map(|k| loglog_fit(&scale[..=k], &value[..=k]).map(|f| f.slope).unwrap_or(f64::NAN)).collect()
}

/// Dyadic list `2^hi, 2^{hi-1}, ..., 2^lo` for exponents `hi >= lo`.
pub fn dyadic(hi: i32, lo: i32) -> Vec<f64> {
    (lo..=hi).rev().map(|k| 2f64.powi(k)).collect()
}

/// Parses `2^a..2^b` (either order) or a comma-separated list of floats.
pub fn parse_scale_list(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Domain(format!("cannot parse scale list '{s}'; use 2^-4..2^-10 or a,b,c"));
    if let Some((a, b)) = s.split_once("..") {
        let exp = |t: &str| -> Result<i32> { t.trim().strip_prefix("2^").ok_or_else(bad)?.parse::<i32>().map_err(|_| bad()) };
        let (a, b) = (exp(a)?, exp(b)?);
        return Ok(dyadic(a.max(b), a.min(b)));
    }
    s.split(',')
        .map(|t| {
            let t = t.trim();
            match t.strip_prefix("2^") {
                Some(e) => e.parse::<i32>().map(|e| 2f64.powi(e)).map_err(|_| bad()),
                None => t.parse::<f64>().map_err(|_| bad()),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let s = dyadic(-4, -10);
        let v: Vec<f64> = s.iter().map(|d| 3.0 * d.powf(-1.5)).collect();
        let f = loglog_fit(&s, &v).unwrap();
        assert!((f.slope + 1.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.log2()).abs() < 1e-10);
        assert!(f.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn scale_lists() {
        assert_eq!(parse_scale_list("2^-4..2^-6").unwrap(), vec![0.0625, 0.03125, 0.015625]);
        assert_eq!(parse_scale_list("2^-6..2^-4").unwrap(), vec![0.0625, 0.03125, 0.015625]);
        assert_eq!(parse_scale_list("0.5, 2^-2").unwrap(), vec![0.5, 0.25]);
        assert!(parse_scale_list("x..y").is_err());
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_line(&[1.0], &[1.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(loglog_fit(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }
}
