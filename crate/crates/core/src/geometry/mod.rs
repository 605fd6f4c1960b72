//! Exact-rational geometry of exponent pairs `(1/p, 1/q)` in the unit square.
//!
//! Points, segments and regions are handled with [`Rational64`] so that the
//! half-open boundary prescriptions of the region definitions are decided
//! exactly. Floating point enters only through [`kappa`] and [`dist_to_ray`].

mod bounds;
mod regions;

pub use bounds::{
    bound_profile, dist_to_ray, gamma, kappa, zregion_boundary, zregion_contains, BoundProfile, ZBoundary, DEFAULT_ZBOUNDARY_SAMPLES,
};
pub use regions::{classify, in_r0, region_polyline, Polyline, RegionTag};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point `(x, y) = (1/p, 1/q)` of the closed unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExponentPair {
    x: Rational64,
    y: Rational64,
}

impl ExponentPair {
    pub fn new(x: Rational64, y: Rational64) -> Result<Self> {
        let unit = |v: Rational64| v >= Rational64::zero() && v <= Rational64::one();
        if !unit(x) || !unit(y) {
            return Err(Error::Domain(format!("({}, {}) is outside the unit square", render(x), render(y))));
        }
        Ok(Self { x, y })
    }

    /// Shorthand for `new(xn/xd, yn/yd)`.
    pub fn from_fracs(xn: i64, xd: i64, yn: i64, yd: i64) -> Result<Self> {
        Self::new(Rational64::new(xn, xd), Rational64::new(yn, yd))
    }

    /// Builds the pair from Lebesgue exponents, with `f64::INFINITY` for `p = inf`.
    /// Only exponents whose reciprocals are exactly representable with small
    /// denominators survive the conversion.
    pub fn from_exponents(p: f64, q: f64) -> Result<Self> {
        Self::new(reciprocal_exact(p)?, reciprocal_exact(q)?)
    }

    pub fn x(&self) -> Rational64 {
        self.x
    }

    pub fn y(&self) -> Rational64 {
        self.y
    }

    pub fn xf(&self) -> f64 {
        self.x.to_f64().unwrap_or(f64::NAN)
    }

    pub fn yf(&self) -> f64 {
        self.y.to_f64().unwrap_or(f64::NAN)
    }

    /// `1/p - 1/q`.
    pub fn gap(&self) -> Rational64 {
        self.x - self.y
    }

    /// The duality map `(x, y) -> (1 - y, 1 - x)`.
    pub fn dual(&self) -> Self {
        Self { x: Rational64::one() - self.y, y: Rational64::one() - self.x }
    }

    /// Lebesgue exponent `p` (infinite when `x = 0`).
    pub fn p(&self) -> f64 {
        recip_to_exponent(self.x)
    }

    pub fn q(&self) -> f64 {
        recip_to_exponent(self.y)
    }
}

impl fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", render(self.x), render(self.y))
    }
}

/// Dual point; free-function form of [`ExponentPair::dual`].
pub fn dual_point(p: &ExponentPair) -> ExponentPair {
    p.dual()
}

/// Renders a rational as `num/den`.
pub fn render(r: Rational64) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `num/den`, an integer, or a finite decimal such as `0.25`, exactly.
pub fn parse_rational(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let bad = || Error::Domain(format!("cannot parse '{s}' as an exact rational"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 15 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_part: i64 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
        let den = 10_i64.pow(frac.len() as u32);
        let frac_part: i64 = frac.parse().map_err(|_| bad())?;
        let mag = int_part.abs() * den + frac_part;
        return Ok(Rational64::new(if negative { -mag } else { mag }, den));
    }
    s.parse::<i64>().map(Rational64::from_integer).map_err(|_| bad())
}

impl FromStr for ExponentPair {
    type Err = Error;

    /// Parses `x,y` with each coordinate in any form accepted by [`parse_rational`].
    fn from_str(s: &str) -> Result<Self> {
        let (x, y) = s.split_once(',').ok_or_else(|| Error::Domain(format!("expected 'x,y', got '{s}'")))?;
        Self::new(parse_rational(x)?, parse_rational(y)?)
    }
}

fn recip_to_exponent(r: Rational64) -> f64 {
    if r.is_zero() {
        f64::INFINITY
    } else {
        (r.recip()).to_f64().unwrap_or(f64::NAN)
    }
}

fn reciprocal_exact(p: f64) -> Result<Rational64> {
    if p.is_infinite() && p > 0.0 {
        return Ok(Rational64::zero());
    }
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("Lebesgue exponent {p} must be >= 1")));
    }
    let r = Rational64::approximate_float(1.0 / p).ok_or_else(|| Error::Domain(format!("cannot represent 1/{p} exactly")))?;
    if (r.to_f64().unwrap_or(f64::NAN) - 1.0 / p).abs() > 1e-14 || r.denom().abs() > 1_000_000 {
        return Err(Error::Domain(format!("cannot represent 1/{p} exactly")));
    }
    Ok(r)
}

fn frac(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn pt(x: Rational64, y: Rational64) -> ExponentPair {
    // Canonical points are in the unit square by construction.
    ExponentPair { x, y }
}

/// The named points of the exponent square for a given dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalPoints {
    pub dim: usize,
    /// Only defined for `d >= 3`.
    pub a: Option<ExponentPair>,
    pub b: ExponentPair,
    pub d: ExponentPair,
    pub e: ExponentPair,
    pub h: ExponentPair,
    pub p_star: ExponentPair,
    pub p_circ: ExponentPair,
}

impl CanonicalPoints {
    pub fn a(&self) -> Result<ExponentPair> {
        self.a.ok_or(Error::UndefinedPoint { name: "A", dim: self.dim })
    }

    /// Looks a point up by name; a trailing `'` selects the dual point.
    pub fn get(&self, name: &str) -> Result<ExponentPair> {
        let (base, primed) = match name.strip_suffix('\'') {
            Some(b) => (b, true),
            None => (name, false),
        };
        let p = match base {
            "A" => self.a()?,
            "B" => self.b,
            "D" => self.d,
            "E" => self.e,
            "H" => self.h,
            "P_*" | "Pstar" => self.p_star,
            "P_o" | "Pcirc" => self.p_circ,
            _ => return Err(Error::Domain(format!("unknown point name '{name}'"))),
        };
        Ok(if primed { p.dual() } else { p })
    }

    /// All defined points (and their duals), keyed by name.
    pub fn as_map(&self) -> BTreeMap<&'static str, ExponentPair> {
        let mut m = BTreeMap::new();
        if let Some(a) = self.a {
            m.insert("A", a);
            m.insert("A'", a.dual());
        }
        m.insert("B", self.b);
        m.insert("B'", self.b.dual());
        m.insert("D", self.d);
        m.insert("D'", self.d.dual());
        m.insert("E", self.e);
        m.insert("E'", self.e.dual());
        m.insert("H", self.h);
        m.insert("P_*", self.p_star);
        m.insert("P_*'", self.p_star.dual());
        m.insert("P_o", self.p_circ);
        m.insert("P_o'", self.p_circ.dual());
        m
    }
}

/// Canonical points A (d >= 3), B, D, E, H, P_* and P_o.
pub fn canonical_points(dim: usize) -> Result<CanonicalPoints> {
    if dim < 2 {
        return Err(Error::Domain(format!("dimension must be >= 2, got {dim}")));
    }
    let d = dim as i64;
    let a = (dim >= 3).then(|| pt(frac(d + 1, 2 * d), frac(d - 3, 2 * d)));
    let b = pt(frac(d + 1, 2 * d), frac((d - 1) * (d - 1), 2 * d * (d + 1)));
    let dd = pt(frac(d - 1, 2 * d), frac(d - 1, 2 * d));
    let e = pt(frac(d + 1, 2 * d), Rational64::zero());
    let h = pt(frac(1, 2), frac(1, 2));
    let (p_star, p_circ) = if dim == 2 {
        (dd, dd)
    } else if dim % 2 == 1 {
        let s = frac(3 * (d - 1), 2 * (3 * d + 1));
        let den = 2 * (d * d + 4 * d - 1);
        (pt(s, s), pt(frac((d + 5) * (d - 1), den), frac((d - 1) * (d + 3), den)))
    } else {
        let s = frac(3 * d - 2, 2 * (3 * d + 2));
        let den = 2 * (d * d + 3 * d - 2);
        (pt(s, s), pt(frac(d * d + 3 * d - 6, den), frac((d - 1) * (d + 2), den)))
    };
    Ok(CanonicalPoints { dim, a, b, d: dd, e, h, p_star, p_circ })
}

pub(crate) fn is_nonneg(r: Rational64) -> bool {
    !r.is_negative()
}
