//! Free-group words of curves in punctured planes.
//!
//! A curve's word is read off its crossings with the upward vertical rays
//! of the punctures: crossing the ray of the `i`-th puncture in the `+x`
//! direction appends `g_i`, in the `-x` direction `g_i^-1`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    clearly_off_box, curve_contact_violations, on_segment, orient, GeometryError, Point, PolyCurve, Violation,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomotopyError {
    #[error("invalid punctured plane: {0}")]
    InvalidPlane(String),
    #[error("point {0} lies on the curve")]
    PointOnCurve(Point),
    #[error("curve vertex {vertex} touches the ray of puncture {puncture}")]
    DegenerateRayContact { vertex: usize, puncture: usize },
    #[error("segment {segment} passes through puncture {puncture}")]
    ThroughPuncture { segment: usize, puncture: usize },
    #[error("curve is not a loop at the basepoint")]
    NotALoop,
    #[error("edges {0} and {1} do not share their endpoint set")]
    NotParallel(usize, usize),
    #[error("invalid multigraph: {0}")]
    InvalidGraph(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

// ---------------------------------------------------------------------------
// Words.

/// A generator `g_gen` (1-based) raised to `sign = ±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub gen: usize,
    pub sign: i8,
}

impl Letter {
    pub fn new(gen: usize, sign: i8) -> Letter {
        assert!(gen >= 1 && (sign == 1 || sign == -1), "bad letter g{gen}^{sign}");
        Letter { gen, sign }
    }

    pub fn inverse(self) -> Letter {
        Letter { gen: self.gen, sign: -self.sign }
    }
}

/// A freely reduced word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReducedWord {
    letters: Vec<Letter>,
}

impl ReducedWord {
    pub fn empty() -> ReducedWord {
        ReducedWord::default()
    }

    pub fn generator(gen: usize) -> ReducedWord {
        ReducedWord { letters: vec![Letter::new(gen, 1)] }
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce(letters: impl IntoIterator<Item = Letter>) -> ReducedWord {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        ReducedWord { letters: out }
    }

    /// Word from `(generator, exponent)` pairs, e.g. `[(1, 2), (2, -1)]` is
    /// `g1^2 g2^-1`.
    pub fn from_powers(powers: &[(usize, i64)]) -> ReducedWord {
        ReducedWord::reduce(powers.iter().flat_map(|&(g, e)| {
            let l = Letter::new(g, if e < 0 { -1 } else { 1 });
            std::iter::repeat(l).take(e.unsigned_abs() as usize)
        }))
    }

    /// `g_gen^e` as a reduced word.
    pub fn power(gen: usize, e: i64) -> ReducedWord {
        ReducedWord::from_powers(&[(gen, e)])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn invert(&self) -> ReducedWord {
        ReducedWord { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    pub fn concat(&self, other: &ReducedWord) -> ReducedWord {
        ReducedWord::reduce(self.letters.iter().chain(other.letters.iter()).copied())
    }

    /// Sum of the exponents of `g_gen`.
    pub fn exponent_sum(&self, gen: usize) -> i64 {
        self.letters.iter().filter(|l| l.gen == gen).map(|l| l.sign as i64).sum()
    }

    /// True if every letter has positive sign.
    pub fn is_positive(&self) -> bool {
        self.letters.iter().all(|l| l.sign > 0)
    }

    /// Parses the [`Display`](fmt::Display) form: `1` or space-separated
    /// `gI` / `gI^-1` tokens.
    pub fn parse(s: &str) -> Option<ReducedWord> {
        let s = s.trim();
        if s == "1" || s.is_empty() {
            return Some(ReducedWord::empty());
        }
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            let rest = tok.strip_prefix('g')?;
            let (g, sign) = match rest.split_once('^') {
                Some((g, "-1")) => (g, -1),
                Some((g, "1")) => (g, 1),
                Some(_) => return None,
                None => (rest, 1),
            };
            let g: usize = g.parse().ok()?;
            if g == 0 {
                return None;
            }
            letters.push(Letter::new(g, sign));
        }
        Some(ReducedWord::reduce(letters))
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            if l.sign > 0 {
                write!(f, "g{}", l.gen)?;
            } else {
                write!(f, "g{}^-1", l.gen)?;
            }
        }
        Ok(())
    }
}

pub fn reduce(letters: &[Letter]) -> ReducedWord {
    ReducedWord::reduce(letters.iter().copied())
}

pub fn invert(w: &ReducedWord) -> ReducedWord {
    w.invert()
}

pub fn concat(w1: &ReducedWord, w2: &ReducedWord) -> ReducedWord {
    w1.concat(w2)
}

// ---------------------------------------------------------------------------
// Double cosets.

/// Representative of the double coset `<g_a> w <g_b>`: `w` with its maximal
/// leading `g_a`-power and then its maximal trailing `g_b`-power removed.
pub fn double_coset_core(w: &ReducedWord, a: usize, b: usize) -> ReducedWord {
    let (start, end) = core_range(&w.letters, a, b);
    ReducedWord { letters: w.letters[start..end].to_vec() }
}

/// True iff `g2 = g_a^s g g_b^t` or `g2 = g_a^s g^-1 g_b^t` for some
/// integers `s`, `t`.
pub fn double_coset_member(g: &ReducedWord, g2: &ReducedWord, a: usize, b: usize) -> bool {
    let c2 = core_range(&g2.letters, a, b);
    let c2 = &g2.letters[c2.0..c2.1];
    let (s, e) = core_range(&g.letters, a, b);
    if c2 == &g.letters[s..e] {
        return true;
    }
    // the core of g^-1 is the inverse of g with its trailing g_a run and
    // then its leading g_b run removed
    let l = &g.letters;
    let end = l.len() - l.iter().rev().take_while(|x| x.gen == a).count();
    let start = l[..end].iter().take_while(|x| x.gen == b).count();
    let inv = &l[start..end];
    c2.len() == inv.len() && c2.iter().zip(inv.iter().rev()).all(|(x, y)| *x == y.inverse())
}

fn core_range(l: &[Letter], a: usize, b: usize) -> (usize, usize) {
    let start = l.iter().take_while(|x| x.gen == a).count();
    let end = l.len() - l[start..].iter().rev().take_while(|x| x.gen == b).count();
    (start, end)
}

/// The same relation decided by trying every `|s|, |t| <= |g| + |g2| + 1`.
pub fn double_coset_member_bounded(g: &ReducedWord, g2: &ReducedWord, a: usize, b: usize) -> bool {
    let bound = (g.len() + g2.len() + 1) as i64;
    let candidates = [g.clone(), g.invert()];
    (-bound..=bound).any(|s| {
        let left = ReducedWord::power(a, s);
        candidates.iter().any(|h| {
            let lh = left.concat(h);
            (-bound..=bound).any(|t| &lh.concat(&ReducedWord::power(b, t)) == g2)
        })
    })
}

// ---------------------------------------------------------------------------
// Punctured planes and curve words.

/// Punctures `a_1..a_n` (sorted by x, then y) and a basepoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PuncturedPlane {
    punctures: Vec<Point>,
    basepoint: Point,
}

impl PuncturedPlane {
    pub fn new(mut punctures: Vec<Point>, basepoint: Point) -> Result<PuncturedPlane, HomotopyError> {
        punctures.sort_by(|p, q| p.x.cmp(&q.x).then_with(|| p.y.cmp(&q.y)));
        if punctures.windows(2).any(|w| w[0] == w[1]) {
            return Err(HomotopyError::InvalidPlane("repeated puncture".into()));
        }
        if punctures.iter().any(|a| a.x == basepoint.x) {
            return Err(HomotopyError::InvalidPlane(format!(
                "basepoint {basepoint} shares a vertical line with a puncture"
            )));
        }
        Ok(PuncturedPlane { punctures, basepoint })
    }

    pub fn punctures(&self) -> &[Point] {
        &self.punctures
    }

    pub fn basepoint(&self) -> &Point {
        &self.basepoint
    }

    pub fn len(&self) -> usize {
        self.punctures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.punctures.is_empty()
    }
}

/// Reads the ray crossings of a curve against `punctures`, generator `i+1`
/// for `punctures[i]`. Curve endpoints may coincide with punctures (edges of
/// a multigraph start at vertices); such an endpoint never contributes a
/// letter for its own ray.
pub fn path_word(c: &PolyCurve, punctures: &[Point]) -> Result<ReducedWord, HomotopyError> {
    let verts = c.vertices();
    let nv = verts.len();
    let mut letters = Vec::new();
    for (vi, v) in verts.iter().enumerate() {
        for (pi, a) in punctures.iter().enumerate() {
            if v.x != a.x {
                continue;
            }
            let endpoint = vi == 0 || (!c.is_closed() && vi == nv - 1);
            if v == a && endpoint {
                continue;
            }
            return Err(HomotopyError::DegenerateRayContact { vertex: vi, puncture: pi });
        }
    }
    for (si, (p, q)) in c.segments().enumerate() {
        // punctures whose column lies strictly between the segment ends, in
        // the order the segment meets them
        let mut hits: Vec<(usize, Letter)> = Vec::new();
        let rightward = p.x < q.x;
        let (lo, hi) = if rightward { (&p.x, &q.x) } else { (&q.x, &p.x) };
        for (pi, a) in punctures.iter().enumerate() {
            if &a.x <= lo || &a.x >= hi {
                continue;
            }
            // side of a relative to the directed segment; above the segment
            // means the segment passes below the puncture
            let o = orient(p, q, a);
            if o == 0 {
                return Err(HomotopyError::ThroughPuncture { segment: si, puncture: pi });
            }
            let segment_below = (o > 0) == rightward;
            if !segment_below {
                hits.push((pi, Letter::new(pi + 1, if rightward { 1 } else { -1 })));
            }
        }
        hits.sort_by(|(i, _), (j, _)| {
            let ord = punctures[*i].x.cmp(&punctures[*j].x);
            if rightward {
                ord
            } else {
                ord.reverse()
            }
        });
        letters.extend(hits.into_iter().map(|(_, l)| l));
    }
    Ok(ReducedWord::reduce(letters))
}

/// The word of a loop at the plane's basepoint.
pub fn curve_word(c: &PolyCurve, plane: &PuncturedPlane) -> Result<ReducedWord, HomotopyError> {
    if !c.is_closed() || c.start() != plane.basepoint() {
        return Err(HomotopyError::NotALoop);
    }
    path_word(c, plane.punctures())
}

/// Signed winding number (counterclockwise positive), computed from a
/// rightward horizontal ray so that it is independent of [`curve_word`].
pub fn winding_number(c: &PolyCurve, p: &Point) -> Result<i64, HomotopyError> {
    Ok(winding_numbers(c, std::slice::from_ref(p))?[0])
}

/// [`winding_number`] at many points. Float shadows of the segments let
/// most segments be skipped without exact arithmetic; every counted
/// crossing is still decided exactly.
pub fn winding_numbers(c: &PolyCurve, points: &[Point]) -> Result<Vec<i64>, HomotopyError> {
    let mut segs: Vec<(&Point, &Point)> = c.segments().collect();
    let real = segs.len();
    if !c.is_closed() {
        segs.push((c.end(), c.start()));
    }
    let shadows: Vec<((f64, f64), (f64, f64))> = segs.iter().map(|(a, b)| (a.to_f64(), b.to_f64())).collect();
    points
        .iter()
        .map(|p| {
            let pf = p.to_f64();
            let finite = pf.0.is_finite() && pf.1.is_finite();
            let near = |i: usize| !finite || !clearly_off_box(pf, shadows[i].0, shadows[i].1);
            if (0..real).any(|i| near(i) && on_segment(p, segs[i].0, segs[i].1)) {
                return Err(HomotopyError::PointOnCurve(p.clone()));
            }
            let pad = 1e-9 * (1.0 + pf.1.abs());
            let mut w = 0;
            for (i, (a, b)) in segs.iter().enumerate() {
                let (ay, by) = (shadows[i].0 .1, shadows[i].1 .1);
                let away = finite && ((ay < pf.1 - pad && by < pf.1 - pad) || (ay > pf.1 + pad && by > pf.1 + pad));
                if away {
                    continue;
                }
                if a.y <= p.y && b.y > p.y && orient(a, b, p) > 0 {
                    w += 1;
                } else if b.y <= p.y && a.y > p.y && orient(a, b, p) < 0 {
                    w -= 1;
                }
            }
            Ok(w)
        })
        .collect()
}

pub fn loops_homotopic(
    c1: &PolyCurve,
    c2: &PolyCurve,
    plane: &PuncturedPlane,
    oriented: bool,
) -> Result<bool, HomotopyError> {
    let w1 = curve_word(c1, plane)?;
    let w2 = curve_word(c2, plane)?;
    Ok(w1 == w2 || (!oriented && w1 == w2.invert()))
}

// ---------------------------------------------------------------------------
// Multigraphs.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub label: String,
    pub point: Point,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub curve: PolyCurve,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }
}

/// Vertices plus edges drawn as polygonal curves. Loop edges are closed
/// curves based at their vertex; other edges are open curves from `u` to `v`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DrawnMultigraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

impl DrawnMultigraph {
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<DrawnMultigraph, HomotopyError> {
        for (i, a) in vertices.iter().enumerate() {
            for b in &vertices[..i] {
                if a.label == b.label {
                    return Err(HomotopyError::InvalidGraph(format!("duplicate label {}", a.label)));
                }
                if a.point.x == b.point.x {
                    return Err(HomotopyError::InvalidGraph(format!(
                        "vertices {} and {} share a vertical line",
                        b.label, a.label
                    )));
                }
            }
        }
        for (ei, e) in edges.iter().enumerate() {
            let (Some(u), Some(v)) = (vertices.get(e.u), vertices.get(e.v)) else {
                return Err(HomotopyError::InvalidGraph(format!("edge {ei} has an unknown endpoint")));
            };
            if e.curve.is_closed() != e.is_loop() {
                return Err(HomotopyError::InvalidGraph(format!(
                    "edge {ei}: loops must be closed curves and other edges open"
                )));
            }
            if e.curve.start() != &u.point || e.curve.end() != &v.point {
                return Err(HomotopyError::InvalidGraph(format!(
                    "edge {ei} does not run from {} to {}",
                    u.label, v.label
                )));
            }
            for w in &vertices {
                if e.curve.passes_through(&w.point) {
                    return Err(HomotopyError::InvalidGraph(format!(
                        "edge {ei} passes through vertex {}",
                        w.label
                    )));
                }
            }
        }
        Ok(DrawnMultigraph { vertices, edges })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_points(&self) -> Vec<Point> {
        self.vertices.iter().map(|v| v.point.clone()).collect()
    }

    pub fn curves(&self) -> Vec<PolyCurve> {
        self.edges.iter().map(|e| e.curve.clone()).collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Contact violations among the edges, plus interior vertices of edges
    /// that sit on a vertex's vertical line.
    pub fn general_position_violations(&self) -> Vec<Violation> {
        let curves = self.curves();
        let mut out = curve_contact_violations(&curves);
        for (ci, e) in self.edges.iter().enumerate() {
            let last = e.curve.vertices().len() - 1;
            for (vi, p) in e.curve.vertices().iter().enumerate() {
                let endpoint = vi == 0 || (!e.curve.is_closed() && vi == last);
                if endpoint {
                    continue;
                }
                for (pi, w) in self.vertices.iter().enumerate() {
                    if p.x == w.point.x {
                        out.push(Violation::PunctureColumnVertex { curve: ci, vertex: vi, puncture: pi });
                    }
                }
            }
        }
        out
    }

    /// Word of edge `e` over all vertices (generator `i+1` for vertex `i`),
    /// read from `u` to `v`.
    pub fn edge_word(&self, e: usize) -> Result<ReducedWord, HomotopyError> {
        path_word(&self.edges[e].curve, &self.vertex_points())
    }

    /// Canonical homotopy key of an edge: parallel edges are homotopic iff
    /// their keys are equal.
    pub fn homotopy_key(&self, e: usize) -> Result<(usize, usize, ReducedWord), HomotopyError> {
        let edge = &self.edges[e];
        let (u, v) = (edge.u, edge.v);
        let w = self.edge_word(e)?;
        if u == v {
            let c = double_coset_core(&w, u + 1, u + 1);
            let ci = c.invert();
            Ok((u, v, std::cmp::min(c, ci)))
        } else if u < v {
            Ok((u, v, double_coset_core(&w, u + 1, v + 1)))
        } else {
            Ok((v, u, double_coset_core(&w.invert(), v + 1, u + 1)))
        }
    }
}

/// A loop at `u` is trivial iff its word over all vertices lies in `<g_u>`:
/// turning around its own endpoint is the only freedom a loop edge has.
pub fn is_trivial_loop(e: usize, g: &DrawnMultigraph) -> Result<bool, HomotopyError> {
    let edge = &g.edges()[e];
    if !edge.is_loop() {
        return Err(HomotopyError::NotALoop);
    }
    Ok(double_coset_core(&g.edge_word(e)?, edge.u + 1, edge.u + 1).is_empty())
}

/// Homotopy of parallel edges with endpoints fixed and interiors avoiding
/// every vertex.
pub fn edges_homotopic(e1: usize, e2: usize, g: &DrawnMultigraph) -> Result<bool, HomotopyError> {
    let (a, b) = (&g.edges()[e1], &g.edges()[e2]);
    let same = (a.u == b.u && a.v == b.v) || (a.u == b.v && a.v == b.u);
    if !same {
        return Err(HomotopyError::NotParallel(e1, e2));
    }
    Ok(g.homotopy_key(e1)? == g.homotopy_key(e2)?)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct NonHomotopyReport {
    pub trivial_loops: Vec<usize>,
    pub homotopic_pairs: Vec<(usize, usize)>,
}

impl NonHomotopyReport {
    pub fn is_empty(&self) -> bool {
        self.trivial_loops.is_empty() && self.homotopic_pairs.is_empty()
    }
}

pub fn validate_nonhomotopic(g: &DrawnMultigraph) -> Result<NonHomotopyReport, HomotopyError> {
    let mut report = NonHomotopyReport::default();
    let mut classes: HashMap<(usize, usize, ReducedWord), Vec<usize>> = HashMap::new();
    for e in 0..g.edge_count() {
        let key = g.homotopy_key(e)?;
        if key.0 == key.1 && key.2.is_empty() {
            report.trivial_loops.push(e);
        }
        classes.entry(key).or_default().push(e);
    }
    for members in classes.values() {
        for (i, &x) in members.iter().enumerate() {
            for &y in &members[i + 1..] {
                report.homotopic_pairs.push((x, y));
            }
        }
    }
    report.homotopic_pairs.sort();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{int, rat};

    fn p(x: i64, y: i64) -> Point {
        Point::from_ints(x, y)
    }

    fn w(s: &str) -> ReducedWord {
        ReducedWord::parse(s).unwrap()
    }

    fn square(r: i64, ccw: bool) -> PolyCurve {
        let mut pts = vec![p(-r, 0), p(-r, -r), p(r, -r), p(r, r), p(-r, r)];
        if !ccw {
            pts[1..].reverse();
        }
        PolyCurve::closed(pts).unwrap()
    }

    #[test]
    fn words_reduce_and_print() {
        assert_eq!(w("g1 g2 g2^-1 g1^-1"), ReducedWord::empty());
        assert_eq!(w("g1 g2^-1 g3").to_string(), "g1 g2^-1 g3");
        assert_eq!(ReducedWord::empty().to_string(), "1");
        assert_eq!(w("g2 g1").invert(), w("g1^-1 g2^-1"));
        assert_eq!(w("g1 g2").concat(&w("g2^-1 g3")), w("g1 g3"));
        assert_eq!(ReducedWord::power(2, -3).exponent_sum(2), -3);
        assert!(ReducedWord::parse("g0").is_none());
        assert!(ReducedWord::parse("h1").is_none());
        assert!(ReducedWord::parse("g1^2").is_none());
    }

    #[test]
    fn double_coset_core_strips_both_ends() {
        assert_eq!(double_coset_core(&w("g1 g1 g2 g3 g3^-1 g1"), 1, 1), w("g2"));
        assert_eq!(double_coset_core(&w("g1 g2 g1"), 1, 2), w("g2 g1"));
        assert_eq!(double_coset_core(&w("g1 g1"), 1, 1), ReducedWord::empty());
        assert!(double_coset_member(&w("g2"), &w("g1 g2 g1^-1"), 1, 1));
        assert!(double_coset_member(&w("g2"), &w("g1 g2^-1"), 1, 1));
        assert!(!double_coset_member(&w("g2"), &w("g2 g2"), 1, 1));
    }

    #[test]
    fn coset_membership_agrees_with_bounded_search() {
        let words = ["1", "g1", "g2", "g1 g2", "g2 g1 g2^-1", "g1^-1 g2 g1 g2", "g2 g2 g1"];
        for a in words {
            for b in words {
                for (x, y) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
                    assert_eq!(
                        double_coset_member(&w(a), &w(b), x, y),
                        double_coset_member_bounded(&w(a), &w(b), x, y),
                        "{a} / {b} / ({x},{y})"
                    );
                }
            }
        }
    }

    #[test]
    fn square_loop_word_and_winding() {
        let plane = PuncturedPlane::new(vec![p(0, 0)], p(-1, 0)).unwrap();
        let ccw = square(1, true);
        assert_eq!(winding_number(&ccw, &p(0, 0)).unwrap(), 1);
        assert_eq!(curve_word(&ccw, &plane).unwrap(), w("g1^-1"));
        assert_eq!(curve_word(&square(1, false), &plane).unwrap(), w("g1"));
        assert!(loops_homotopic(&ccw, &square(1, false), &plane, false).unwrap());
        assert!(!loops_homotopic(&ccw, &square(1, false), &plane, true).unwrap());
        assert_eq!(winding_number(&ccw, &p(5, 0)).unwrap(), 0);
    }

    #[test]
    fn word_order_follows_the_curve() {
        // passes above a2 rightward, then back above a1 leftward
        let plane = PuncturedPlane::new(vec![p(0, 0), p(2, 0)], p(-1, 0)).unwrap();
        let c = PolyCurve::closed(vec![p(-1, 0), p(-1, -1), p(3, -1), p(3, 1), p(1, 1), p(1, 2), p(-1, 2)]).unwrap();
        assert_eq!(curve_word(&c, &plane).unwrap(), w("g2^-1 g1^-1"));
    }

    #[test]
    fn degenerate_contacts_are_rejected() {
        let plane = PuncturedPlane::new(vec![p(0, 0)], p(-1, 0)).unwrap();
        let through = PolyCurve::closed(vec![p(-1, 0), p(0, 1), p(1, 1), p(1, -1)]).unwrap();
        assert!(matches!(curve_word(&through, &plane), Err(HomotopyError::DegenerateRayContact { .. })));
        let on = PolyCurve::closed(vec![p(-1, 0), p(1, 0), p(1, 1)]).unwrap();
        assert!(curve_word(&on, &plane).is_err());
        let open = PolyCurve::open(vec![p(-1, 0), p(1, 1)]).unwrap();
        assert_eq!(curve_word(&open, &plane), Err(HomotopyError::NotALoop));
    }

    fn graph(edges: Vec<(usize, usize, Vec<Point>)>) -> DrawnMultigraph {
        let vertices = vec![
            Vertex { label: "a".into(), point: p(0, 0) },
            Vertex { label: "b".into(), point: p(4, 0) },
            Vertex { label: "c".into(), point: p(2, 0) },
        ];
        let edges = edges
            .into_iter()
            .map(|(u, v, pts)| {
                let curve = if u == v { PolyCurve::closed(pts) } else { PolyCurve::open(pts) }.unwrap();
                Edge { u, v, curve }
            })
            .collect();
        DrawnMultigraph::new(vertices, edges).unwrap()
    }

    #[test]
    fn parallel_edges_and_loops() {
        let half = rat(1, 2);
        let above = vec![p(0, 0), Point::new(half.clone(), int(1)), Point::new(rat(7, 2), int(1)), p(4, 0)];
        let below = vec![p(0, 0), Point::new(half.clone(), int(-1)), Point::new(rat(7, 2), int(-1)), p(4, 0)];
        let above2 = vec![p(4, 0), Point::new(rat(7, 2), int(2)), Point::new(half.clone(), int(2)), p(0, 0)];
        // loop at a around c: nontrivial; a small loop at a: trivial
        let around_c = vec![p(0, 0), Point::new(half.clone(), int(-1)), p(3, -1), p(3, 1), Point::new(half.clone(), int(1))];
        let small = vec![p(0, 0), Point::new(half.clone(), int(-1)), Point::new(half, int(1))];
        let g = graph(vec![(0, 1, above), (0, 1, below), (1, 0, above2), (0, 0, around_c), (0, 0, small)]);
        assert!(!edges_homotopic(0, 1, &g).unwrap());
        assert!(edges_homotopic(0, 2, &g).unwrap());
        assert!(!is_trivial_loop(3, &g).unwrap());
        assert!(is_trivial_loop(4, &g).unwrap());
        assert_eq!(edges_homotopic(0, 3, &g), Err(HomotopyError::NotParallel(0, 3)));
        let r = validate_nonhomotopic(&g).unwrap();
        assert_eq!(r.trivial_loops, vec![4]);
        assert_eq!(r.homotopic_pairs, vec![(0, 2)]);
    }
}
