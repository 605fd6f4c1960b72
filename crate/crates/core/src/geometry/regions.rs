//! Region membership and polygon export.

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{canonical_points, frac, is_nonneg, pt, ExponentPair};
use crate::error::{Error, Result};

/// Classification of an exponent pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionTag {
    R1,
    R2tilde,
    R3tilde,
    R3tildePrime,
    OnSegmentBBprime,
    OnCriticalEndpointB,
    OnCriticalEndpointBprime,
    InsideR0Unclassified,
    OutsideR0,
}

impl RegionTag {
    pub const ALL: [RegionTag; 9] = [
        RegionTag::R1,
        RegionTag::R2tilde,
        RegionTag::R3tilde,
        RegionTag::R3tildePrime,
        RegionTag::OnSegmentBBprime,
        RegionTag::OnCriticalEndpointB,
        RegionTag::OnCriticalEndpointBprime,
        RegionTag::InsideR0Unclassified,
        RegionTag::OutsideR0,
    ];

    /// The four regions on which a resolvent bound with `kappa` holds.
    pub fn has_bound(self) -> bool {
        matches!(self, RegionTag::R1 | RegionTag::R2tilde | RegionTag::R3tilde | RegionTag::R3tildePrime)
    }

    pub fn name(self) -> &'static str {
        match self {
            RegionTag::R1 => "R1",
            RegionTag::R2tilde => "R2tilde",
            RegionTag::R3tilde => "R3tilde",
            RegionTag::R3tildePrime => "R3tildePrime",
            RegionTag::OnSegmentBBprime => "OnSegmentBBprime",
            RegionTag::OnCriticalEndpointB => "OnCriticalEndpointB",
            RegionTag::OnCriticalEndpointBprime => "OnCriticalEndpointBprime",
            RegionTag::InsideR0Unclassified => "InsideR0Unclassified",
            RegionTag::OutsideR0 => "OutsideR0",
        }
    }
}

impl std::str::FromStr for RegionTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RegionTag::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Domain(format!("unknown region tag '{s}'")))
    }
}

impl std::fmt::Display for RegionTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Closed segment `[a, b]` with optionally removed endpoints; `a == b` encodes a point.
#[derive(Debug, Clone, Copy)]
struct Cut {
    a: ExponentPair,
    b: ExponentPair,
    with_a: bool,
    with_b: bool,
}

impl Cut {
    fn closed(a: ExponentPair, b: ExponentPair) -> Self {
        Self { a, b, with_a: true, with_b: true }
    }

    fn point(a: ExponentPair) -> Self {
        Self::closed(a, a)
    }

    fn contains(&self, p: &ExponentPair) -> bool {
        if !on_closed_segment(p, &self.a, &self.b) {
            return false;
        }
        (self.with_a || *p != self.a) && (self.with_b || *p != self.b)
    }
}

/// A convex polygon minus finitely many boundary cuts.
#[derive(Debug, Clone)]
struct RegionDef {
    hull: Vec<ExponentPair>,
    cuts: Vec<Cut>,
}

impl RegionDef {
    fn new(named: &[ExponentPair], cuts: Vec<Cut>) -> Self {
        let mut hull = convex_hull(named);
        if let Some(k) = hull.iter().position(|v| *v == named[0]) {
            hull.rotate_left(k);
        }
        Self { hull, cuts }
    }

    fn contains(&self, p: &ExponentPair) -> bool {
        in_closed_hull(p, &self.hull) && !self.cuts.iter().any(|c| c.contains(p))
    }
}

fn cross(o: &ExponentPair, a: &ExponentPair, b: &ExponentPair) -> Rational64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn on_closed_segment(p: &ExponentPair, a: &ExponentPair, b: &ExponentPair) -> bool {
    if !cross(a, b, p).is_zero() {
        return false;
    }
    let within = |v: Rational64, s: Rational64, t: Rational64| v >= s.min(t) && v <= s.max(t);
    within(p.x, a.x, b.x) && within(p.y, a.y, b.y)
}

/// Counterclockwise convex hull with collinear points dropped (monotone chain).
fn convex_hull(points: &[ExponentPair]) -> Vec<ExponentPair> {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<ExponentPair> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &ExponentPair>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for p in iter {
            while hull.len() >= start + 2 && is_nonneg(-cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p)) {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    hull
}

fn in_closed_hull(p: &ExponentPair, hull: &[ExponentPair]) -> bool {
    match hull.len() {
        0 => false,
        1 => *p == hull[0],
        2 => on_closed_segment(p, &hull[0], &hull[1]),
        n => (0..n).all(|i| is_nonneg(cross(&hull[i], &hull[(i + 1) % n], p))),
    }
}

/// Membership in the admissible range `R_0`.
pub fn in_r0(dim: usize, p: &ExponentPair) -> bool {
    let gap = p.gap();
    if gap < Rational64::zero() {
        return false;
    }
    if dim == 2 {
        return gap < Rational64::one();
    }
    let d = dim as i64;
    if gap > frac(2, d) {
        return false;
    }
    let corner = pt(Rational64::one(), frac(d - 2, d));
    let axis = pt(frac(2, d), Rational64::zero());
    *p != corner && *p != axis
}

struct Regions {
    b: ExponentPair,
    r1: RegionDef,
    r2: RegionDef,
    r3: RegionDef,
}

fn regions(dim: usize) -> Result<Regions> {
    let c = canonical_points(dim)?;
    let (b, po, h) = (c.b, c.p_circ, c.h);
    let r2 = RegionDef::new(
        &[b, b.dual(), po.dual(), h, po],
        vec![
            Cut { a: po, b: h, with_a: true, with_b: false },
            Cut { a: po.dual(), b: h, with_a: true, with_b: false },
            Cut::closed(b, b.dual()),
        ],
    );
    let origin = pt(Rational64::zero(), Rational64::zero());
    let (r1, r3) = if dim == 2 {
        let e = c.e;
        let corner = pt(Rational64::one(), Rational64::zero());
        let r1 = RegionDef::new(
            &[b, e, e.dual(), b.dual(), corner],
            vec![Cut::closed(b, e), Cut::closed(b.dual(), e.dual()), Cut::point(corner)],
        );
        let r3 = RegionDef::new(&[origin, e, b, c.d], vec![Cut::closed(b, c.d), Cut::closed(b, e)]);
        (r1, r3)
    } else {
        let a = c.a()?;
        let axis = pt(frac(2, dim as i64), Rational64::zero());
        let r1 = RegionDef::new(&[a, b, a.dual(), b.dual()], vec![Cut::closed(a, b), Cut::closed(a.dual(), b.dual())]);
        let r3 = RegionDef::new(
            &[origin, axis, a, b, po, c.p_star],
            vec![Cut::closed(a, b), Cut::closed(b, po), Cut::closed(po, c.p_star), Cut::point(axis)],
        );
        (r1, r3)
    };
    Ok(Regions { b, r1, r2, r3 })
}

/// Classifies `p` for dimension `dim`. Exact; no floating point involved.
///
/// The open segment `(B, B')` belongs to `R1`, so `OnSegmentBBprime` is never
/// returned here; it only names the segment for [`region_polyline`].
pub fn classify(dim: usize, p: &ExponentPair) -> Result<RegionTag> {
    if !in_r0(dim, p) {
        return Ok(RegionTag::OutsideR0);
    }
    let r = regions(dim)?;
    let tag = if *p == r.b {
        RegionTag::OnCriticalEndpointB
    } else if *p == r.b.dual() {
        RegionTag::OnCriticalEndpointBprime
    } else if r.r1.contains(p) {
        RegionTag::R1
    } else if r.r2.contains(p) {
        RegionTag::R2tilde
    } else if r.r3.contains(p) {
        RegionTag::R3tilde
    } else if r.r3.contains(&p.dual()) {
        RegionTag::R3tildePrime
    } else {
        RegionTag::InsideR0Unclassified
    };
    Ok(tag)
}

/// Polygon of a region: counterclockwise vertices, with `edge_open[i]` flagging
/// the edge from vertex `i` to vertex `i + 1` as excluded from the region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub tag: RegionTag,
    pub vertices: Vec<ExponentPair>,
    pub edge_open: Vec<bool>,
    pub vertex_included: Vec<bool>,
}

fn midpoint(a: &ExponentPair, b: &ExponentPair) -> ExponentPair {
    let half = frac(1, 2);
    pt((a.x + b.x) * half, (a.y + b.y) * half)
}

fn polyline_of(tag: RegionTag, vertices: Vec<ExponentPair>, member: impl Fn(&ExponentPair) -> bool) -> Polyline {
    let n = vertices.len();
    let edge_open = (0..n).map(|i| n > 1 && !member(&midpoint(&vertices[i], &vertices[(i + 1) % n]))).collect();
    let vertex_included = vertices.iter().map(&member).collect();
    Polyline { tag, vertices, edge_open, vertex_included }
}

/// Vertex data of a region, a critical segment, or a critical endpoint.
pub fn region_polyline(dim: usize, tag: RegionTag) -> Result<Polyline> {
    let r = regions(dim)?;
    let cls = |t: RegionTag| move |p: &ExponentPair| classify(dim, p).map(|c| c == t).unwrap_or(false);
    let pl = match tag {
        RegionTag::R1 => polyline_of(tag, r.r1.hull.clone(), cls(tag)),
        RegionTag::R2tilde => polyline_of(tag, r.r2.hull.clone(), cls(tag)),
        RegionTag::R3tilde => polyline_of(tag, r.r3.hull.clone(), cls(tag)),
        RegionTag::R3tildePrime => {
            let named: Vec<ExponentPair> = r.r3.hull.iter().map(|v| v.dual()).collect();
            let def = RegionDef::new(&named, Vec::new());
            polyline_of(tag, def.hull, cls(tag))
        }
        RegionTag::OnSegmentBBprime => polyline_of(tag, vec![r.b, r.b.dual()], |p| on_closed_segment(p, &r.b, &r.b.dual())),
        RegionTag::OnCriticalEndpointB => polyline_of(tag, vec![r.b], |_| true),
        RegionTag::OnCriticalEndpointBprime => polyline_of(tag, vec![r.b.dual()], |_| true),
        RegionTag::InsideR0Unclassified | RegionTag::OutsideR0 => return Err(Error::Domain(format!("{tag} is not a polygonal region"))),
    };
    Ok(pl)
}
