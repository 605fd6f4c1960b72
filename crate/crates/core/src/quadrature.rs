//! Gauss-Legendre rules, composite panels and the Bessel function `J_0`.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs n >= 1");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let step = p / d;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d.is_finite() { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (z * p - p0) / (z * z - 1.0);
    (p, d)
}

/// A fixed rule on `[-1, 1]` mapped onto arbitrary panels.
#[derive(Debug, Clone)]
pub struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `(node, weight)` pairs on `[a, b]`.
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (m + h * x, h * w))
    }

    /// `(node, weight)` pairs of the composite rule over consecutive breakpoints.
    pub fn composite(&self, breaks: &[f64]) -> Vec<(f64, f64)> {
        breaks.windows(2).flat_map(|ab| self.on(ab[0], ab[1]).collect::<Vec<_>>()).collect()
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Breakpoints on `[a, b]` (with `0 < a < b`) spaced geometrically by `ratio`.
pub fn geometric_breaks(a: f64, b: f64, ratio: f64) -> Vec<f64> {
    let n = ((b / a).ln() / ratio.ln()).ceil().max(1.0) as usize;
    let q = (b / a).powf(1.0 / n as f64);
    (0..=n).map(|k| if k == n { b } else { a * q.powi(k as i32) }).collect()
}

/// Bessel function `J_0`.
///
/// Below 25 the integral `(1/pi) int_0^pi cos(x cos t) dt` is summed by the
/// midpoint rule, which converges geometrically once the node count exceeds
/// `|x|`. Above 25 the Hankel expansion is summed until its terms stop shrinking.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x > 25.0 {
        return hankel_j0(x);
    }
    let n = (x.ceil() as usize) + 40;
    let h = PI / n as f64;
    (0..n).map(|k| (x * ((k as f64 + 0.5) * h).cos()).cos()).sum::<f64>() / n as f64
}

fn hankel_j0(x: f64) -> f64 {
    let (mut p, mut q) = (1.0, 0.0);
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        a *= -(2.0 * kf - 1.0).powi(2) / (8.0 * kf * x);
        if a.abs() >= last || a.abs() < 1e-18 {
            break;
        }
        last = a.abs();
        // Even terms enter P and odd terms Q, each with sign (-1)^{floor(k/2)}.
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
    }
    let chi = x - 0.25 * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_on_polynomials() {
        for n in [1, 2, 5, 16, 33] {
            let r = Rule::new(n);
            for k in 0..(2 * n) {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let got = r.integrate(-1.0, 1.0, |x| x.powi(k as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} k={k} got={got}");
            }
        }
    }

    #[test]
    fn composite_exp() {
        let r = Rule::new(8);
        let pts = r.composite(&geometric_breaks(1e-3, 10.0, 2.0));
        let got: f64 = pts.iter().map(|(x, w)| w / x).sum();
        assert!((got - (1e4f64).ln()).abs() < 1e-10);
    }

    #[test]
    fn j0_reference_values() {
        // J_0 values from standard tables.
        let table = [
            (0.0, 1.0),
            (1.0, 0.765_197_686_557_966_6),
            (2.404_825_557_695_773, 0.0),
            (10.0, -0.245_935_764_451_348_3),
            (50.0, 0.055_812_327_669_251_6),
            (100.0, 0.019_985_850_304_223_12),
        ];
        for (x, v) in table {
            assert!((bessel_j0(x) - v).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn j0_branches_agree() {
        for x in [25.5, 30.0, 41.7, 80.0] {
            let n = (x as usize) + 60;
            let h = PI / n as f64;
            let mid = (0..n).map(|k| (x * ((k as f64 + 0.5) * h).cos()).cos()).sum::<f64>() / n as f64;
            assert!((bessel_j0(x) - mid).abs() < 1e-14, "x={x}");
        }
    }
}
