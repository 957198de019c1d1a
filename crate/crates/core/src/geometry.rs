//! Exact planar primitives.
//!
//! Every coordinate is a [`Rational`]; no predicate ever touches a float.
//! Crossing detection has two routes that must agree exactly:
//!
//! * the reference route classifies every segment pair with rational
//!   arithmetic ([`reference`]);
//! * the accelerated route rescales a family onto a common integer grid,
//!   filters segment pairs by bounding box and classifies the survivors with
//!   `i128` (or `BigInt` when the grid is too fine).

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use thiserror::Error;

use crate::homotopy::PuncturedPlane;

pub type Rational = BigRational;

/// `num/den` as a [`Rational`].
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Point {
        Point { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Point {
        Point::new(int(x), int(y))
    }

    pub fn offset(&self, dx: &Rational, dy: &Rational) -> Point {
        Point::new(&self.x + dx, &self.y + dy)
    }

    /// `self + t * (other - self)`.
    pub fn lerp(&self, other: &Point, t: &Rational) -> Point {
        Point::new(
            &self.x + t * (&other.x - &self.x),
            &self.y + t * (&other.y - &self.y),
        )
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (
            self.x.to_f64().unwrap_or(f64::NAN),
            self.y.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Sign of the cross product `(b - a) x (c - a)`.
pub fn orient(a: &Point, b: &Point, c: &Point) -> i8 {
    if let Some(s) = orient_f64(a.to_f64(), b.to_f64(), c.to_f64()) {
        return s;
    }
    let v = (&b.x - &a.x) * (&c.y - &a.y) - (&b.y - &a.y) * (&c.x - &a.x);
    sign_of(&v)
}

/// Sign of the orientation determinant from float shadows of the points,
/// when it is far enough from zero that rounding cannot flip it. The
/// shadows are within a relative `2^-52` of the exact coordinates, so the
/// computed determinant is within about `2^-48 M^2` of the exact one.
fn orient_f64(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Option<i8> {
    let m = [a.0, a.1, b.0, b.1, c.0, c.1].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !m.is_finite() || m > 1e150 || m < 1e-150 {
        return None;
    }
    let v = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    let bound = 1e-12 * m * m;
    if v > bound {
        Some(1)
    } else if v < -bound {
        Some(-1)
    } else {
        None
    }
}

fn sign_of<T: Signed>(v: &T) -> i8 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

/// True if `p` lies on the closed segment `a..b`.
pub fn on_segment(p: &Point, a: &Point, b: &Point) -> bool {
    in_box(p, a, b) && orient(a, b, p) == 0
}

/// Float test that `p` is well outside the bounding box of the segment
/// `a..b` (all given as float shadows); false whenever rounding could matter.
pub fn clearly_off_box(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    let ((px, py), (ax, ay), (bx, by)) = (p, a, b);
    let off = |v: f64, l: f64, h: f64| {
        let pad = 1e-9 * (1.0 + v.abs());
        v < l.min(h) - pad || v > l.max(h) + pad
    };
    off(px, ax, bx) || off(py, ay, by)
}

fn in_box(p: &Point, a: &Point, b: &Point) -> bool {
    let (xl, xh) = if a.x <= b.x { (&a.x, &b.x) } else { (&b.x, &a.x) };
    let (yl, yh) = if a.y <= b.y { (&a.y, &b.y) } else { (&b.y, &a.y) };
    &p.x >= xl && &p.x <= xh && &p.y >= yl && &p.y <= yh
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("general position violated between curve {curve_a} segment {seg_a} and curve {curve_b} segment {seg_b}: {kind}")]
    GeneralPositionViolation {
        curve_a: usize,
        seg_a: usize,
        curve_b: usize,
        seg_b: usize,
        kind: ContactKind,
    },
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
    #[error("perturbation failed after {attempts} attempts")]
    PerturbationFailed { attempts: usize },
}

/// How two segments that are not in general position meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactKind {
    /// Collinear with an overlap of positive length.
    Overlap,
    /// A vertex of one curve lies on the other curve (or the curves touch at
    /// a vertex without that vertex being an endpoint of both).
    VertexContact,
    /// Three or more curve pieces through one point.
    TriplePoint,
}

impl fmt::Display for ContactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ContactKind::Overlap => "overlapping segments",
            ContactKind::VertexContact => "vertex contact",
            ContactKind::TriplePoint => "triple point",
        };
        f.write_str(s)
    }
}

/// An open or closed polygonal curve.
///
/// Closed curves store their vertices once; the closing segment from the last
/// vertex back to the first is implicit. The first vertex is the basepoint.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyCurve {
    vertices: Vec<Point>,
    closed: bool,
}

impl PolyCurve {
    /// Builds a curve. For closed curves a trailing copy of the first vertex
    /// is accepted and dropped.
    pub fn new(mut vertices: Vec<Point>, closed: bool) -> Result<PolyCurve, GeometryError> {
        if closed && vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        let min = if closed { 3 } else { 2 };
        if vertices.len() < min {
            return Err(GeometryError::InvalidCurve(format!(
                "{} curve needs at least {min} vertices, got {}",
                if closed { "closed" } else { "open" },
                vertices.len()
            )));
        }
        let nseg = if closed { vertices.len() } else { vertices.len() - 1 };
        for i in 0..nseg {
            let j = (i + 1) % vertices.len();
            if vertices[i] == vertices[j] {
                return Err(GeometryError::InvalidCurve(format!(
                    "zero-length segment {i} at {}",
                    vertices[i]
                )));
            }
        }
        Ok(PolyCurve { vertices, closed })
    }

    pub fn closed(vertices: Vec<Point>) -> Result<PolyCurve, GeometryError> {
        PolyCurve::new(vertices, true)
    }

    pub fn open(vertices: Vec<Point>) -> Result<PolyCurve, GeometryError> {
        PolyCurve::new(vertices, false)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn start(&self) -> &Point {
        &self.vertices[0]
    }

    pub fn end(&self) -> &Point {
        if self.closed {
            &self.vertices[0]
        } else {
            self.vertices.last().unwrap()
        }
    }

    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len() - 1
        }
    }

    pub fn segment(&self, i: usize) -> (&Point, &Point) {
        let n = self.vertices.len();
        (&self.vertices[i], &self.vertices[(i + 1) % n])
    }

    pub fn segments(&self) -> impl Iterator<Item = (&Point, &Point)> + '_ {
        (0..self.segment_count()).map(move |i| self.segment(i))
    }

    /// Same point set, opposite orientation, same start.
    pub fn reversed(&self) -> PolyCurve {
        let mut v = self.vertices.clone();
        if self.closed {
            v[1..].reverse();
        } else {
            v.reverse();
        }
        PolyCurve { vertices: v, closed: self.closed }
    }

    pub fn translated(&self, dx: &Rational, dy: &Rational) -> PolyCurve {
        PolyCurve {
            vertices: self.vertices.iter().map(|p| p.offset(dx, dy)).collect(),
            closed: self.closed,
        }
    }

    /// Concatenates two closed loops sharing a basepoint; the result passes
    /// through the basepoint once in its interior.
    pub fn concat_loops(&self, other: &PolyCurve) -> Result<PolyCurve, GeometryError> {
        if !self.closed || !other.closed || self.start() != other.start() {
            return Err(GeometryError::InvalidCurve(
                "loop concatenation needs two closed curves with a common basepoint".into(),
            ));
        }
        let mut v = self.vertices.clone();
        v.extend(other.vertices.iter().cloned());
        PolyCurve::closed(v)
    }

    /// Open path `self` followed by open path `other` (which must start where
    /// `self` ends). Closes the result if it returns to its start.
    pub fn join(&self, other: &PolyCurve) -> Result<PolyCurve, GeometryError> {
        if self.end() != other.start() {
            return Err(GeometryError::InvalidCurve("paths do not meet".into()));
        }
        let mut v: Vec<Point> = if self.closed {
            let mut v = self.vertices.clone();
            v.push(self.vertices[0].clone());
            v
        } else {
            self.vertices.clone()
        };
        v.extend(other.vertices.iter().skip(1).cloned());
        if other.closed {
            v.push(other.vertices[0].clone());
        }
        let closed = v.first() == v.last();
        PolyCurve::new(v, closed)
    }

    /// Inserts the midpoint of segment `i` as an extra vertex.
    pub fn subdivided(&self, i: usize) -> PolyCurve {
        let (a, b) = self.segment(i);
        let mid = a.lerp(b, &rat(1, 2));
        let mut v = self.vertices.clone();
        v.insert(i + 1, mid);
        PolyCurve { vertices: v, closed: self.closed }
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = self.vertices[0].clone();
        let mut hi = self.vertices[0].clone();
        for p in &self.vertices[1..] {
            if p.x < lo.x {
                lo.x = p.x.clone();
            }
            if p.y < lo.y {
                lo.y = p.y.clone();
            }
            if p.x > hi.x {
                hi.x = p.x.clone();
            }
            if p.y > hi.y {
                hi.y = p.y.clone();
            }
        }
        (lo, hi)
    }

    /// True if `p` lies anywhere on the curve, endpoints included.
    pub fn contains_point(&self, p: &Point) -> bool {
        self.segments().any(|(a, b)| on_segment(p, a, b))
    }

    /// True if `p` lies on the curve at a parameter in the open interval.
    pub fn passes_through(&self, p: &Point) -> bool {
        if p == self.start() || p == self.end() {
            // endpoints are excluded, but a closed curve could revisit them
            return self.vertices[1..]
                .iter()
                .enumerate()
                .any(|(i, v)| v == p && (self.closed || i + 1 < self.vertices.len() - 1))
                || self.segments().any(|(a, b)| a != p && b != p && on_segment(p, a, b));
        }
        self.contains_point(p)
    }
}

/// A position on a curve: segment index plus a parameter along the segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveParam {
    pub segment: usize,
    pub t: Rational,
}

impl CurveParam {
    /// Parameter scaled to the whole curve, in `[0, 1]`.
    pub fn global(&self, segment_count: usize) -> Rational {
        (int(self.segment as i64) + &self.t) / int(segment_count as i64)
    }
}

/// One transversal interior crossing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrossingRecord {
    pub curve_a: usize,
    pub curve_b: usize,
    pub param_a: CurveParam,
    pub param_b: CurveParam,
    pub location: Point,
}

/// Which end of a segment a touching point is, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Start,
    End,
}

/// How two closed segments intersect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Contact {
    None,
    Proper,
    /// A single common point which is an endpoint of at least one segment.
    Touch { a_end: Option<End>, b_end: Option<End> },
    Overlap,
}

/// Classifies segments `a0a1` and `b0b1` exactly.
pub fn classify_segments(a0: &Point, a1: &Point, b0: &Point, b1: &Point) -> Contact {
    let o1 = orient(a0, a1, b0);
    let o2 = orient(a0, a1, b1);
    let o3 = orient(b0, b1, a0);
    let o4 = orient(b0, b1, a1);
    classify_from_orient([o1, o2, o3, o4], || {
        collinear_contact(
            [(&a0.x, &a0.y), (&a1.x, &a1.y)],
            [(&b0.x, &b0.y), (&b1.x, &b1.y)],
        )
    }, |which| match which {
        0 => endpoint_role(b0, a0, a1, End::Start, true),
        1 => endpoint_role(b1, a0, a1, End::End, true),
        2 => endpoint_role(a0, b0, b1, End::Start, false),
        _ => endpoint_role(a1, b0, b1, End::End, false),
    })
}

fn endpoint_role(p: &Point, s0: &Point, s1: &Point, pe: End, p_is_b: bool) -> Contact {
    let other = if p == s0 {
        Some(End::Start)
    } else if p == s1 {
        Some(End::End)
    } else {
        None
    };
    if p_is_b {
        Contact::Touch { a_end: other, b_end: Some(pe) }
    } else {
        Contact::Touch { a_end: Some(pe), b_end: other }
    }
}

fn classify_from_orient(
    o: [i8; 4],
    collinear: impl FnOnce() -> Contact,
    touch: impl FnOnce(usize) -> Contact,
) -> Contact {
    let [o1, o2, o3, o4] = o;
    if o1 == 0 && o2 == 0 {
        return collinear();
    }
    if o1 * o2 > 0 || o3 * o4 > 0 {
        return Contact::None;
    }
    if o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0 {
        return Contact::Proper;
    }
    let which = [o1, o2, o3, o4].iter().position(|&v| v == 0).unwrap();
    touch(which)
}

/// Collinear segments: disjoint, touching at one shared endpoint, or
/// overlapping.
fn collinear_contact<'a, T: PartialOrd + PartialEq>(a: [(&'a T, &'a T); 2], b: [(&'a T, &'a T); 2]) -> Contact {
    // project on x unless the segments are vertical
    let use_x = a[0].0 != a[1].0;
    let key = |p: (&'a T, &'a T)| -> &'a T { if use_x { p.0 } else { p.1 } };
    let (alo, ahi, alo_end, ahi_end) = if key(a[0]) <= key(a[1]) {
        (key(a[0]), key(a[1]), End::Start, End::End)
    } else {
        (key(a[1]), key(a[0]), End::End, End::Start)
    };
    let (blo, bhi, blo_end, bhi_end) = if key(b[0]) <= key(b[1]) {
        (key(b[0]), key(b[1]), End::Start, End::End)
    } else {
        (key(b[1]), key(b[0]), End::End, End::Start)
    };
    if ahi < blo || bhi < alo {
        Contact::None
    } else if ahi == blo {
        Contact::Touch { a_end: Some(ahi_end), b_end: Some(blo_end) }
    } else if bhi == alo {
        Contact::Touch { a_end: Some(alo_end), b_end: Some(bhi_end) }
    } else {
        Contact::Overlap
    }
}

/// Parameters `(t_a, t_b)` of the proper crossing of two segments.
fn crossing_params(a0: &Point, a1: &Point, b0: &Point, b1: &Point) -> (Rational, Rational) {
    let dax = &a1.x - &a0.x;
    let day = &a1.y - &a0.y;
    let dbx = &b1.x - &b0.x;
    let dby = &b1.y - &b0.y;
    let wx = &b0.x - &a0.x;
    let wy = &b0.y - &a0.y;
    let den = &dax * &dby - &day * &dbx;
    let ta = (&wx * &dby - &wy * &dbx) / &den;
    let tb = (&wx * &day - &wy * &dax) / &den;
    (ta, tb)
}

// ---------------------------------------------------------------------------
// Contact policy shared by both routes.

/// What a segment-pair contact means for two curves (or one curve with itself).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verdict {
    Nothing,
    Crossing,
    Violation(ContactKind),
}

fn is_curve_endpoint(c: &PolyCurve, seg: usize, end: Option<End>) -> bool {
    match end {
        Some(End::Start) => seg == 0,
        Some(End::End) => seg + 1 == c.segment_count(),
        None => false,
    }
}

fn pair_verdict(ca: &PolyCurve, i: usize, cb: &PolyCurve, j: usize, contact: Contact) -> Verdict {
    match contact {
        Contact::None => Verdict::Nothing,
        Contact::Proper => Verdict::Crossing,
        Contact::Overlap => Verdict::Violation(ContactKind::Overlap),
        Contact::Touch { a_end, b_end } => {
            if is_curve_endpoint(ca, i, a_end) && is_curve_endpoint(cb, j, b_end) {
                Verdict::Nothing
            } else {
                Verdict::Violation(ContactKind::VertexContact)
            }
        }
    }
}

fn adjacent(c: &PolyCurve, i: usize, j: usize) -> bool {
    let n = c.segment_count();
    j == i + 1 || (c.is_closed() && i == 0 && j + 1 == n)
}

fn self_verdict(c: &PolyCurve, i: usize, j: usize, contact: Contact) -> Verdict {
    match contact {
        Contact::None => Verdict::Nothing,
        Contact::Proper => Verdict::Crossing,
        Contact::Overlap => Verdict::Violation(ContactKind::Overlap),
        Contact::Touch { a_end, b_end } => {
            let shared = if j == i + 1 {
                a_end == Some(End::End) && b_end == Some(End::Start)
            } else {
                // wrap-around pair (0, n-1) of a closed curve
                a_end == Some(End::Start) && b_end == Some(End::End)
            };
            if adjacent(c, i, j) && shared {
                Verdict::Nothing
            } else {
                Verdict::Violation(ContactKind::VertexContact)
            }
        }
    }
}

fn violation(ca: usize, i: usize, cb: usize, j: usize, kind: ContactKind) -> GeometryError {
    GeometryError::GeneralPositionViolation { curve_a: ca, seg_a: i, curve_b: cb, seg_b: j, kind }
}

fn record(
    ca: usize,
    c1: &PolyCurve,
    i: usize,
    cb: usize,
    c2: &PolyCurve,
    j: usize,
) -> CrossingRecord {
    let (a0, a1) = c1.segment(i);
    let (b0, b1) = c2.segment(j);
    let (ta, tb) = crossing_params(a0, a1, b0, b1);
    let location = a0.lerp(a1, &ta);
    CrossingRecord {
        curve_a: ca,
        curve_b: cb,
        param_a: CurveParam { segment: i, t: ta },
        param_b: CurveParam { segment: j, t: tb },
        location,
    }
}

fn reject_triple_points(records: &[CrossingRecord]) -> Result<(), GeometryError> {
    let mut seen: HashMap<&Point, &CrossingRecord> = HashMap::with_capacity(records.len());
    for r in records {
        if let Some(prev) = seen.insert(&r.location, r) {
            return Err(violation(
                prev.curve_a,
                prev.param_a.segment,
                r.curve_b,
                r.param_b.segment,
                ContactKind::TriplePoint,
            ));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Integer grid (accelerated route).

/// Magnitude bound that keeps every cross product inside `i128`.
const SMALL_LIMIT_BITS: u64 = 61;

#[derive(Clone, Debug)]
enum GridCoords {
    Small(Vec<Vec<[i128; 2]>>),
    Big(Vec<Vec<[BigInt; 2]>>),
}

/// A family rescaled by the common denominator of all its coordinates.
#[derive(Clone, Debug)]
pub struct Grid {
    coords: GridCoords,
    boxes: Vec<Vec<[i128; 4]>>,
}

fn lcm_of_denominators<'a>(points: impl Iterator<Item = &'a Point>) -> BigInt {
    let mut l = BigInt::one();
    for p in points {
        l = l.lcm(p.x.denom());
        l = l.lcm(p.y.denom());
    }
    l
}

fn scale(v: &Rational, l: &BigInt) -> BigInt {
    v.numer() * (l / v.denom())
}

/// Saturating conversion used only for bounding boxes; boxes of curves on the
/// big grid are widened to the full range, which disables filtering safely.
fn clamp_i128(v: &BigInt) -> Option<i128> {
    v.to_i128()
}

impl Grid {
    pub fn new(curves: &[&PolyCurve]) -> Grid {
        let l = lcm_of_denominators(curves.iter().flat_map(|c| c.vertices().iter()));
        let big: Vec<Vec<[BigInt; 2]>> = curves
            .iter()
            .map(|c| c.vertices().iter().map(|p| [scale(&p.x, &l), scale(&p.y, &l)]).collect())
            .collect();
        let small_ok = big
            .iter()
            .flatten()
            .flatten()
            .all(|v| v.bits() <= SMALL_LIMIT_BITS);
        let coords = if small_ok {
            GridCoords::Small(
                big.iter()
                    .map(|c| c.iter().map(|[x, y]| [x.to_i128().unwrap(), y.to_i128().unwrap()]).collect())
                    .collect(),
            )
        } else {
            GridCoords::Big(big)
        };
        let boxes = curves
            .iter()
            .enumerate()
            .map(|(ci, c)| {
                (0..c.segment_count())
                    .map(|s| {
                        let n = c.vertices().len();
                        let (p, q) = (s, (s + 1) % n);
                        match &coords {
                            GridCoords::Small(v) => {
                                let (a, b) = (v[ci][p], v[ci][q]);
                                [a[0].min(b[0]), a[0].max(b[0]), a[1].min(b[1]), a[1].max(b[1])]
                            }
                            GridCoords::Big(v) => {
                                let (a, b) = (&v[ci][p], &v[ci][q]);
                                let lo = |u: &BigInt, v: &BigInt| clamp_i128(u.min(v)).unwrap_or(i128::MIN);
                                let hi = |u: &BigInt, v: &BigInt| clamp_i128(u.max(v)).unwrap_or(i128::MAX);
                                [lo(&a[0], &b[0]), hi(&a[0], &b[0]), lo(&a[1], &b[1]), hi(&a[1], &b[1])]
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        Grid { coords, boxes }
    }

    pub fn is_small(&self) -> bool {
        matches!(self.coords, GridCoords::Small(_))
    }

    fn boxes_meet(&self, ca: usize, i: usize, cb: usize, j: usize) -> bool {
        let a = &self.boxes[ca][i];
        let b = &self.boxes[cb][j];
        a[0] <= b[1] && b[0] <= a[1] && a[2] <= b[3] && b[2] <= a[3]
    }

    fn classify(&self, ca: usize, i: usize, cb: usize, j: usize) -> Contact {
        match &self.coords {
            GridCoords::Small(v) => {
                let (na, nb) = (v[ca].len(), v[cb].len());
                grid_classify(&v[ca][i], &v[ca][(i + 1) % na], &v[cb][j], &v[cb][(j + 1) % nb])
            }
            GridCoords::Big(v) => {
                let (na, nb) = (v[ca].len(), v[cb].len());
                grid_classify(&v[ca][i], &v[ca][(i + 1) % na], &v[cb][j], &v[cb][(j + 1) % nb])
            }
        }
    }
}

fn grid_orient<T>(a: &[T; 2], b: &[T; 2], c: &[T; 2]) -> i8
where
    T: Signed + Clone,
    for<'x> &'x T: std::ops::Sub<&'x T, Output = T>,
{
    let v = (&b[0] - &a[0]) * (&c[1] - &a[1]) - (&b[1] - &a[1]) * (&c[0] - &a[0]);
    sign_of(&v)
}

fn grid_classify<T>(a0: &[T; 2], a1: &[T; 2], b0: &[T; 2], b1: &[T; 2]) -> Contact
where
    T: Signed + Clone + PartialOrd,
    for<'x> &'x T: std::ops::Sub<&'x T, Output = T>,
{
    let o = [
        grid_orient(a0, a1, b0),
        grid_orient(a0, a1, b1),
        grid_orient(b0, b1, a0),
        grid_orient(b0, b1, a1),
    ];
    classify_from_orient(
        o,
        || collinear_contact([(&a0[0], &a0[1]), (&a1[0], &a1[1])], [(&b0[0], &b0[1]), (&b1[0], &b1[1])]),
        |which| {
            let (p, s0, s1, pe, p_is_b) = match which {
                0 => (b0, a0, a1, End::Start, true),
                1 => (b1, a0, a1, End::End, true),
                2 => (a0, b0, b1, End::Start, false),
                _ => (a1, b0, b1, End::End, false),
            };
            let other = if p == s0 {
                Some(End::Start)
            } else if p == s1 {
                Some(End::End)
            } else {
                None
            };
            if p_is_b {
                Contact::Touch { a_end: other, b_end: Some(pe) }
            } else {
                Contact::Touch { a_end: Some(pe), b_end: other }
            }
        },
    )
}

/// Visits the contacting segment pairs between curves `ca` and `cb` of a grid.
fn grid_pair_scan(
    grid: &Grid,
    curves: &[&PolyCurve],
    ca: usize,
    cb: usize,
    mut on_cross: impl FnMut(usize, usize),
) -> Result<(), GeometryError> {
    let (c1, c2) = (curves[ca], curves[cb]);
    for i in 0..c1.segment_count() {
        for j in 0..c2.segment_count() {
            if !grid.boxes_meet(ca, i, cb, j) {
                continue;
            }
            match pair_verdict(c1, i, c2, j, grid.classify(ca, i, cb, j)) {
                Verdict::Nothing => {}
                Verdict::Crossing => on_cross(i, j),
                Verdict::Violation(kind) => return Err(violation(ca, i, cb, j, kind)),
            }
        }
    }
    Ok(())
}

fn grid_self_scan(
    grid: &Grid,
    curves: &[&PolyCurve],
    ci: usize,
    mut on_cross: impl FnMut(usize, usize),
) -> Result<(), GeometryError> {
    let c = curves[ci];
    let n = c.segment_count();
    for i in 0..n {
        for j in i + 1..n {
            if !grid.boxes_meet(ci, i, ci, j) {
                continue;
            }
            match self_verdict(c, i, j, grid.classify(ci, i, ci, j)) {
                Verdict::Nothing => {}
                Verdict::Crossing => on_cross(i, j),
                Verdict::Violation(kind) => return Err(violation(ci, i, ci, j, kind)),
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Public operations (accelerated route).

/// All transversal interior crossings between two curves in general
/// position. Shared endpoints are never counted.
pub fn curve_pair_crossings(
    c1: &PolyCurve,
    c2: &PolyCurve,
) -> Result<Vec<CrossingRecord>, GeometryError> {
    let curves = [c1, c2];
    let grid = Grid::new(&curves);
    let mut hits = Vec::new();
    grid_pair_scan(&grid, &curves, 0, 1, |i, j| hits.push((i, j)))?;
    let records: Vec<CrossingRecord> =
        hits.into_iter().map(|(i, j)| record(0, c1, i, 1, c2, j)).collect();
    reject_triple_points(&records)?;
    Ok(records)
}

/// All self-crossings of a curve, as unordered parameter pairs.
pub fn curve_self_crossings(c: &PolyCurve) -> Result<Vec<CrossingRecord>, GeometryError> {
    let curves = [c];
    let grid = Grid::new(&curves);
    let mut hits = Vec::new();
    grid_self_scan(&grid, &curves, 0, |i, j| hits.push((i, j)))?;
    let records: Vec<CrossingRecord> =
        hits.into_iter().map(|(i, j)| record(0, c, i, 0, c, j)).collect();
    reject_triple_points(&records)?;
    Ok(records)
}

/// Crossing count between two curves (no triple-point check).
pub fn count_pair_crossings(c1: &PolyCurve, c2: &PolyCurve) -> Result<usize, GeometryError> {
    let curves = [c1, c2];
    let grid = Grid::new(&curves);
    let mut n = 0;
    grid_pair_scan(&grid, &curves, 0, 1, |_, _| n += 1)?;
    Ok(n)
}

pub fn count_self_crossings(c: &PolyCurve) -> Result<usize, GeometryError> {
    let curves = [c];
    let grid = Grid::new(&curves);
    let mut n = 0;
    grid_self_scan(&grid, &curves, 0, |_, _| n += 1)?;
    Ok(n)
}

/// Exact crossing statistics of a family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyCounts {
    /// Self-crossings of each curve.
    pub self_counts: Vec<usize>,
    /// `pair[i][j - i - 1]` is the number of crossings between curves `i < j`.
    pair: Vec<Vec<usize>>,
}

impl FamilyCounts {
    pub fn len(&self) -> usize {
        self.self_counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.self_counts.is_empty()
    }

    pub fn pair(&self, i: usize, j: usize) -> usize {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.pair[i][j - i - 1],
            std::cmp::Ordering::Greater => self.pair[j][i - j - 1],
            std::cmp::Ordering::Equal => self.self_counts[i],
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.pair
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(d, &c)| (i, i + d + 1, c)))
    }

    pub fn max_pair(&self) -> usize {
        self.pairs().map(|(_, _, c)| c).max().unwrap_or(0)
    }

    pub fn max_self(&self) -> usize {
        self.self_counts.iter().copied().max().unwrap_or(0)
    }

    /// Total crossings counted with multiplicity, self-crossings included.
    pub fn total(&self) -> usize {
        self.self_counts.iter().sum::<usize>() + self.pairs().map(|(_, _, c)| c).sum::<usize>()
    }

    /// Number of unordered pairs of distinct curves that cross at least once.
    pub fn crossing_pairs(&self) -> usize {
        self.pairs().filter(|&(_, _, c)| c > 0).count()
    }
}

/// Self and pairwise crossing counts for a whole family, pairs distributed
/// across threads.
pub fn family_crossing_counts(family: &[PolyCurve]) -> Result<FamilyCounts, GeometryError> {
    let curves: Vec<&PolyCurve> = family.iter().collect();
    let grid = Grid::new(&curves);
    let self_counts = (0..curves.len())
        .into_par_iter()
        .map(|i| {
            let mut n = 0;
            grid_self_scan(&grid, &curves, i, |_, _| n += 1).map(|_| n)
        })
        .collect::<Result<Vec<usize>, _>>()?;
    let pair = (0..curves.len())
        .into_par_iter()
        .map(|i| {
            (i + 1..curves.len())
                .map(|j| {
                    let mut n = 0;
                    grid_pair_scan(&grid, &curves, i, j, |_, _| n += 1).map(|_| n)
                })
                .collect::<Result<Vec<usize>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FamilyCounts { self_counts, pair })
}

/// Every crossing of a family (self and pairwise), with curve indices.
pub fn family_crossings(family: &[PolyCurve]) -> Result<Vec<CrossingRecord>, GeometryError> {
    let curves: Vec<&PolyCurve> = family.iter().collect();
    let grid = Grid::new(&curves);
    let per_curve = (0..curves.len())
        .into_par_iter()
        .map(|a| {
            let mut out = Vec::new();
            let mut hits = Vec::new();
            grid_self_scan(&grid, &curves, a, |i, j| hits.push((i, j)))?;
            out.extend(hits.drain(..).map(|(i, j)| record(a, curves[a], i, a, curves[a], j)));
            for b in a + 1..curves.len() {
                grid_pair_scan(&grid, &curves, a, b, |i, j| hits.push((i, j)))?;
                out.extend(hits.drain(..).map(|(i, j)| record(a, curves[a], i, b, curves[b], j)));
            }
            Ok(out)
        })
        .collect::<Result<Vec<Vec<CrossingRecord>>, GeometryError>>()?;
    Ok(per_curve.into_iter().flatten().collect())
}

// ---------------------------------------------------------------------------
// General position.

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Contact { curve_a: usize, seg_a: usize, curve_b: usize, seg_b: usize, kind: ContactKind },
    TriplePoint { location: Point },
    ThroughPuncture { curve: usize, puncture: usize },
    ThroughBasepoint { curve: usize },
    PunctureColumnVertex { curve: usize, vertex: usize, puncture: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Contact { curve_a, seg_a, curve_b, seg_b, kind } => write!(
                f,
                "{kind} between curve {curve_a} segment {seg_a} and curve {curve_b} segment {seg_b}"
            ),
            Violation::TriplePoint { location } => write!(f, "triple point at {location}"),
            Violation::ThroughPuncture { curve, puncture } => {
                write!(f, "curve {curve} passes through puncture {puncture}")
            }
            Violation::ThroughBasepoint { curve } => {
                write!(f, "curve {curve} passes through the basepoint")
            }
            Violation::PunctureColumnVertex { curve, vertex, puncture } => write!(
                f,
                "vertex {vertex} of curve {curve} is on the vertical line of puncture {puncture}"
            ),
        }
    }
}

impl From<GeometryError> for Violation {
    fn from(e: GeometryError) -> Violation {
        match e {
            GeometryError::GeneralPositionViolation { curve_a, seg_a, curve_b, seg_b, kind } => {
                Violation::Contact { curve_a, seg_a, curve_b, seg_b, kind }
            }
            other => panic!("not a contact error: {other}"),
        }
    }
}

/// Checks everything the crossing and word computations rely on. Returns
/// every violation found rather than stopping at the first.
pub fn check_general_position(family: &[PolyCurve], plane: &PuncturedPlane) -> Vec<Violation> {
    let mut out = curve_contact_violations(family);
    for (ci, c) in family.iter().enumerate() {
        for (pi, a) in plane.punctures().iter().enumerate() {
            if c.contains_point(a) {
                out.push(Violation::ThroughPuncture { curve: ci, puncture: pi });
            }
            for (vi, v) in c.vertices().iter().enumerate() {
                if v.x == a.x {
                    out.push(Violation::PunctureColumnVertex { curve: ci, vertex: vi, puncture: pi });
                }
            }
        }
        if c.passes_through(plane.basepoint()) {
            out.push(Violation::ThroughBasepoint { curve: ci });
        }
    }
    out
}

/// Contact and triple-point violations only (no puncture context).
pub fn curve_contact_violations(family: &[PolyCurve]) -> Vec<Violation> {
    let curves: Vec<&PolyCurve> = family.iter().collect();
    let grid = Grid::new(&curves);
    let mut out = Vec::new();
    let mut hits: Vec<(usize, usize, usize, usize)> = Vec::new();
    for a in 0..curves.len() {
        let mut local = Vec::new();
        if let Err(e) = grid_self_scan(&grid, &curves, a, |i, j| local.push((a, i, a, j))) {
            out.push(e.into());
        }
        hits.extend(local);
    }
    let pair_results: Vec<(Vec<(usize, usize, usize, usize)>, Option<Violation>)> = (0..curves.len())
        .into_par_iter()
        .flat_map_iter(|a| (a + 1..curves.len()).map(move |b| (a, b)))
        .map(|(a, b)| {
            let mut local = Vec::new();
            let err = grid_pair_scan(&grid, &curves, a, b, |i, j| local.push((a, i, b, j)))
                .err()
                .map(Violation::from);
            (local, err)
        })
        .collect();
    for (local, err) in pair_results {
        hits.extend(local);
        out.extend(err);
    }
    let records: Vec<CrossingRecord> = hits
        .par_iter()
        .map(|&(a, i, b, j)| record(a, curves[a], i, b, curves[b], j))
        .collect();
    let mut seen: HashMap<&Point, usize> = HashMap::with_capacity(records.len());
    for r in &records {
        let c = seen.entry(&r.location).or_insert(0);
        *c += 1;
        if *c == 2 {
            out.push(Violation::TriplePoint { location: r.location.clone() });
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Perturbation.

/// Offset direction for vertex `vertex` of curve `curve`; the perturbation
/// moves that vertex by `epsilon` times this vector.
pub trait PerturbScheme {
    fn offset(&self, curve: usize, vertex: usize, family: &[PolyCurve]) -> (Rational, Rational);
}

/// Index-derived shift: curve `i` of `N` moves its interior vertices by
/// `(i + 1) / N` along a fixed direction that depends only on whether the
/// vertex lies above the curve's start.
#[derive(Clone, Copy, Debug, Default)]
pub struct IndexShift;

impl PerturbScheme for IndexShift {
    fn offset(&self, curve: usize, vertex: usize, family: &[PolyCurve]) -> (Rational, Rational) {
        let c = &family[curve];
        let scale = rat(curve as i64 + 1, family.len() as i64);
        let p = &c.vertices()[vertex];
        if p.y > c.start().y {
            (&scale * rat(1, 2), scale)
        } else {
            (scale.clone(), -scale * rat(1, 4))
        }
    }
}

impl<F> PerturbScheme for F
where
    F: Fn(usize, usize, &[PolyCurve]) -> (Rational, Rational),
{
    fn offset(&self, curve: usize, vertex: usize, family: &[PolyCurve]) -> (Rational, Rational) {
        self(curve, vertex, family)
    }
}

const PERTURB_ATTEMPTS: usize = 24;

/// [`perturb_family_with`] using [`IndexShift`].
pub fn perturb_family(
    family: &[PolyCurve],
    epsilon: &Rational,
    plane: &PuncturedPlane,
) -> Result<Vec<PolyCurve>, GeometryError> {
    perturb_family_with(family, epsilon, plane, &IndexShift)
}

/// Moves every interior vertex (endpoints and basepoints stay fixed) by
/// `epsilon` times the scheme's offset, halving `epsilon` until the result
/// passes [`check_general_position`].
pub fn perturb_family_with(
    family: &[PolyCurve],
    epsilon: &Rational,
    plane: &PuncturedPlane,
    scheme: &dyn PerturbScheme,
) -> Result<Vec<PolyCurve>, GeometryError> {
    if !epsilon.is_positive() {
        return Err(GeometryError::NonPositiveEpsilon);
    }
    let offsets: Vec<Vec<Option<(Rational, Rational)>>> = family
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let last = c.vertices().len() - 1;
            (0..c.vertices().len())
                .map(|vi| {
                    let fixed = vi == 0 || (!c.is_closed() && vi == last);
                    (!fixed).then(|| scheme.offset(ci, vi, family))
                })
                .collect()
        })
        .collect();
    let mut eps = epsilon.clone();
    for _ in 0..PERTURB_ATTEMPTS {
        let moved: Result<Vec<PolyCurve>, GeometryError> = family
            .iter()
            .zip(&offsets)
            .map(|(c, offs)| {
                let v = c
                    .vertices()
                    .iter()
                    .zip(offs)
                    .map(|(p, o)| match o {
                        Some((dx, dy)) => p.offset(&(&eps * dx), &(&eps * dy)),
                        None => p.clone(),
                    })
                    .collect();
                PolyCurve::new(v, c.is_closed())
            })
            .collect();
        if let Ok(moved) = moved {
            if check_general_position(&moved, plane).is_empty() {
                return Ok(moved);
            }
        }
        eps /= int(2);
    }
    Err(GeometryError::PerturbationFailed { attempts: PERTURB_ATTEMPTS })
}

// ---------------------------------------------------------------------------

/// Reference route: every segment pair classified with rational arithmetic,
/// no grid and no filtering.
pub mod reference {
    use super::*;

    pub fn pair_count(c1: &PolyCurve, c2: &PolyCurve) -> Result<usize, GeometryError> {
        let mut n = 0;
        for i in 0..c1.segment_count() {
            for j in 0..c2.segment_count() {
                let (a0, a1) = c1.segment(i);
                let (b0, b1) = c2.segment(j);
                match pair_verdict(c1, i, c2, j, classify_segments(a0, a1, b0, b1)) {
                    Verdict::Nothing => {}
                    Verdict::Crossing => n += 1,
                    Verdict::Violation(kind) => return Err(violation(0, i, 1, j, kind)),
                }
            }
        }
        Ok(n)
    }

    pub fn self_count(c: &PolyCurve) -> Result<usize, GeometryError> {
        let mut n = 0;
        for i in 0..c.segment_count() {
            for j in i + 1..c.segment_count() {
                let (a0, a1) = c.segment(i);
                let (b0, b1) = c.segment(j);
                match self_verdict(c, i, j, classify_segments(a0, a1, b0, b1)) {
                    Verdict::Nothing => {}
                    Verdict::Crossing => n += 1,
                    Verdict::Violation(kind) => return Err(violation(0, i, 0, j, kind)),
                }
            }
        }
        Ok(n)
    }
}
