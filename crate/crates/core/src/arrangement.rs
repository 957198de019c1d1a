//! Planar arrangements of polygonal curves and the combinatorics built on
//! them: faces, face windings, puncture census, balanced pairs, L-circles,
//! crossing blocks and loop signatures.
//!
//! Faces are traced on a half-edge structure whose nodes are curve endpoints
//! and crossing points. Each connected component contributes one outer cycle
//! (non-positive area) that is merged into the face enclosing it, found by a
//! leftward ray from the component's leftmost vertex.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::geometry::{
    curve_contact_violations, curve_pair_crossings, curve_self_crossings, family_crossing_counts,
    family_crossings, int, orient, CurveParam, GeometryError, Point, PolyCurve, Rational,
};
use crate::homotopy::{winding_number, PuncturedPlane};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArrangementError {
    #[error("general position violated: {0}")]
    GeneralPosition(String),
    #[error("point {0} lies on a curve")]
    PointOnCurve(Point),
    #[error("puncture {0} lies on a curve")]
    PunctureOnCurve(usize),
    #[error("point {0} lies on the circle")]
    PointOnCircle(Point),
    #[error("block has {found} crossings, needs at least {needed}")]
    InsufficientCrossings { needed: usize, found: usize },
    #[error("loop does not start at the arrangement node {0}")]
    NotAtNode(Point),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn param_cmp(a: &CurveParam, b: &CurveParam) -> Ordering {
    a.segment.cmp(&b.segment).then_with(|| a.t.cmp(&b.t))
}

fn point_at(c: &PolyCurve, p: &CurveParam) -> Point {
    let (a, b) = c.segment(p.segment);
    a.lerp(b, &p.t)
}

/// Points of `c` from parameter `from` to `to` (`from < to`), including the
/// two end points and every curve vertex strictly between.
fn sub_chain(c: &PolyCurve, from: &CurveParam, to: &CurveParam) -> Vec<Point> {
    let n = c.vertices().len();
    let mut pts = vec![point_at(c, from)];
    for i in from.segment + 1..=to.segment {
        let v = &c.vertices()[i % n];
        if pts.last() != Some(v) {
            pts.push(v.clone());
        }
    }
    let end = point_at(c, to);
    if pts.last() != Some(&end) {
        pts.push(end);
    }
    pts
}

// ---------------------------------------------------------------------------
// Direction order.

type Dir = (Rational, Rational);

fn dir(a: &Point, b: &Point) -> Dir {
    (&b.x - &a.x, &b.y - &a.y)
}

fn upper_half(d: &Dir) -> bool {
    d.1.is_positive() || (d.1.is_zero() && d.0.is_positive())
}

/// Counterclockwise angle order starting from the positive x axis.
fn angle_cmp(a: &Dir, b: &Dir) -> Ordering {
    match (upper_half(a), upper_half(b)) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        _ => {
            let cross = &a.0 * &b.1 - &a.1 * &b.0;
            if cross.is_positive() {
                Ordering::Less
            } else if cross.is_negative() {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Arrangement.

/// A crossing-free piece of one curve between two nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    pub curve: usize,
    pub start: CurveParam,
    pub end: CurveParam,
    pub points: Vec<Point>,
    pub start_node: usize,
    pub end_node: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    /// Bounded boundary cycle; `None` for the unbounded face.
    pub boundary: Option<usize>,
    /// Outer cycles of components lying inside this face.
    pub holes: Vec<usize>,
    pub sample: Point,
}

#[derive(Clone, Debug)]
pub struct Arrangement {
    pub curves: Vec<PolyCurve>,
    pub nodes: Vec<Point>,
    pub fragments: Vec<Fragment>,
    /// Outgoing half-edges at each node in counterclockwise order. Half-edge
    /// `2f` runs along fragment `f`, `2f + 1` against it.
    pub rotation: Vec<Vec<usize>>,
    /// Half-edge cycles, each bounding a face on its left.
    pub cycles: Vec<Vec<usize>>,
    pub faces: Vec<Face>,
    /// Component of each node.
    pub node_component: Vec<usize>,
    cycle_face: Vec<usize>,
    half_edge_cycle: Vec<usize>,
}

impl Arrangement {
    pub fn half_edge_points(&self, h: usize) -> Vec<Point> {
        let f = &self.fragments[h / 2];
        if h % 2 == 0 {
            f.points.clone()
        } else {
            f.points.iter().rev().cloned().collect()
        }
    }

    pub fn origin(&self, h: usize) -> usize {
        let f = &self.fragments[h / 2];
        if h % 2 == 0 {
            f.start_node
        } else {
            f.end_node
        }
    }

    /// Face on the left of half-edge `h`.
    pub fn face_left(&self, h: usize) -> usize {
        self.cycle_face[self.half_edge_cycle[h]]
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn component_count(&self) -> usize {
        self.node_component.iter().max().map_or(0, |m| m + 1)
    }

    /// `(V, E, F)` of every connected component, `F` counting the
    /// component's own outer face once.
    pub fn component_euler(&self) -> Vec<(usize, usize, usize)> {
        let mut out = vec![(0, 0, 0); self.component_count()];
        for c in &self.node_component {
            out[*c].0 += 1;
        }
        for f in &self.fragments {
            out[self.node_component[f.start_node]].1 += 1;
        }
        for cyc in &self.cycles {
            out[self.node_component[self.origin(cyc[0])]].2 += 1;
        }
        out
    }

    /// True when `V - E + F = 2` for every component.
    pub fn euler_holds(&self) -> bool {
        self.component_euler().iter().all(|&(v, e, f)| v as i64 - e as i64 + f as i64 == 2)
    }

    fn segments(&self) -> impl Iterator<Item = (usize, &Point, &Point)> + '_ {
        self.fragments
            .iter()
            .enumerate()
            .flat_map(|(fi, f)| f.points.windows(2).map(move |w| (fi, &w[0], &w[1])))
    }

    /// Half-edge whose left side contains `p`, found by a horizontal ray
    /// (to the right, or to the left) at height `p.y + ε`. Segments from
    /// fragments in components `skip` are ignored.
    fn ray_hit(&self, p: &Point, rightward: bool, skip: Option<usize>) -> Result<Option<usize>, ArrangementError> {
        let mut best: Option<(Rational, Rational, usize)> = None;
        for (fi, a, b) in self.segments() {
            if skip == Some(self.node_component[self.fragments[fi].start_node]) {
                continue;
            }
            let (lo, hi) = if a.y < b.y { (a, b) } else { (b, a) };
            if lo.y > p.y || hi.y <= p.y {
                if lo.y == p.y && hi.y == p.y && crate::geometry::on_segment(p, a, b) {
                    return Err(ArrangementError::PointOnCurve(p.clone()));
                }
                continue;
            }
            let slope = (&hi.x - &lo.x) / (&hi.y - &lo.y);
            let x = &lo.x + (&p.y - &lo.y) * &slope;
            if x == p.x {
                return Err(ArrangementError::PointOnCurve(p.clone()));
            }
            if (x > p.x) != rightward {
                continue;
            }
            let better = match &best {
                None => true,
                Some((bx, bs, _)) => {
                    if rightward {
                        x < *bx || (x == *bx && slope < *bs)
                    } else {
                        x > *bx || (x == *bx && slope > *bs)
                    }
                }
            };
            if better {
                let h = if orient(a, b, p) > 0 { 2 * fi } else { 2 * fi + 1 };
                best = Some((x, slope, h));
            }
        }
        Ok(best.map(|(_, _, h)| h))
    }

    /// Face containing `p`.
    pub fn locate(&self, p: &Point) -> Result<usize, ArrangementError> {
        if self.curves.iter().any(|c| c.contains_point(p)) {
            return Err(ArrangementError::PointOnCurve(p.clone()));
        }
        Ok(match self.ray_hit(p, true, None)? {
            Some(h) => self.face_left(h),
            None => 0,
        })
    }

    /// The fragment of `curve` containing parameter `at` in its interior.
    pub fn fragment_at(&self, curve: usize, at: &CurveParam) -> Option<usize> {
        self.fragments.iter().position(|f| {
            f.curve == curve
                && param_cmp(&f.start, at) == Ordering::Less
                && (param_cmp(at, &f.end) == Ordering::Less)
        })
    }

    pub fn node_index(&self, p: &Point) -> Option<usize> {
        self.nodes.iter().position(|q| q == p)
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Splits the family at its crossings and endpoints and traces all faces.
pub fn planarize(family: &[PolyCurve]) -> Result<Arrangement, ArrangementError> {
    let violations = curve_contact_violations(family);
    if let Some(v) = violations.first() {
        return Err(ArrangementError::GeneralPosition(v.to_string()));
    }
    let crossings = family_crossings(family)?;

    let mut nodes: Vec<Point> = Vec::new();
    let mut node_of: HashMap<Point, usize> = HashMap::new();
    let mut node_id = |p: &Point, nodes: &mut Vec<Point>| -> usize {
        *node_of.entry(p.clone()).or_insert_with(|| {
            nodes.push(p.clone());
            nodes.len() - 1
        })
    };

    // events along each curve: (param, node)
    let mut events: Vec<Vec<(CurveParam, usize)>> = vec![Vec::new(); family.len()];
    for (ci, c) in family.iter().enumerate() {
        let s = node_id(c.start(), &mut nodes);
        events[ci].push((CurveParam { segment: 0, t: Rational::zero() }, s));
        if !c.is_closed() {
            let e = node_id(c.end(), &mut nodes);
            events[ci].push((CurveParam { segment: c.segment_count() - 1, t: int(1) }, e));
        }
    }
    for r in &crossings {
        let n = node_id(&r.location, &mut nodes);
        events[r.curve_a].push((r.param_a.clone(), n));
        events[r.curve_b].push((r.param_b.clone(), n));
    }

    let mut fragments = Vec::new();
    for (ci, c) in family.iter().enumerate() {
        let ev = &mut events[ci];
        ev.sort_by(|a, b| param_cmp(&a.0, &b.0));
        let mut stops = ev.clone();
        if c.is_closed() {
            stops.push((CurveParam { segment: c.segment_count() - 1, t: int(1) }, ev[0].1));
        }
        for w in stops.windows(2) {
            let (from, a) = &w[0];
            let (to, b) = &w[1];
            fragments.push(Fragment {
                curve: ci,
                start: from.clone(),
                end: to.clone(),
                points: sub_chain(c, from, to),
                start_node: *a,
                end_node: *b,
            });
        }
    }

    // rotation system
    let nh = 2 * fragments.len();
    let origin = |h: usize| if h % 2 == 0 { fragments[h / 2].start_node } else { fragments[h / 2].end_node };
    let out_dir = |h: usize| {
        let p = &fragments[h / 2].points;
        if h % 2 == 0 {
            dir(&p[0], &p[1])
        } else {
            dir(&p[p.len() - 1], &p[p.len() - 2])
        }
    };
    let mut rotation: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for h in 0..nh {
        rotation[origin(h)].push(h);
    }
    let dirs: Vec<Dir> = (0..nh).map(out_dir).collect();
    let mut pos = vec![0; nh];
    for rot in rotation.iter_mut() {
        rot.sort_by(|&a, &b| angle_cmp(&dirs[a], &dirs[b]));
        for (i, &h) in rot.iter().enumerate() {
            pos[h] = i;
        }
    }
    let next = |h: usize| {
        let twin = h ^ 1;
        let rot = &rotation[origin(twin)];
        rot[(pos[twin] + rot.len() - 1) % rot.len()]
    };

    let mut half_edge_cycle = vec![usize::MAX; nh];
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for h0 in 0..nh {
        if half_edge_cycle[h0] != usize::MAX {
            continue;
        }
        let mut cyc = Vec::new();
        let mut h = h0;
        while half_edge_cycle[h] == usize::MAX {
            half_edge_cycle[h] = cycles.len();
            cyc.push(h);
            h = next(h);
        }
        cycles.push(cyc);
    }

    // components
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    for f in &fragments {
        let (a, b) = (find(&mut parent, f.start_node), find(&mut parent, f.end_node));
        parent[a] = b;
    }
    let mut comp_id = HashMap::new();
    let node_component: Vec<usize> = (0..nodes.len())
        .map(|i| {
            let r = find(&mut parent, i);
            let next_id = comp_id.len();
            *comp_id.entry(r).or_insert(next_id)
        })
        .collect();

    let mut arr = Arrangement {
        curves: family.to_vec(),
        nodes,
        fragments,
        rotation,
        cycles,
        faces: Vec::new(),
        node_component,
        cycle_face: Vec::new(),
        half_edge_cycle,
    };

    // classify cycles by signed area
    let area2 = |cyc: &Vec<usize>| -> Rational {
        let mut s = Rational::zero();
        for &h in cyc {
            let pts = arr.half_edge_points(h);
            for w in pts.windows(2) {
                s += &w[0].x * &w[1].y - &w[1].x * &w[0].y;
            }
        }
        s
    };
    let bounded: Vec<bool> = arr.cycles.iter().map(|c| area2(c).is_positive()).collect();
    let index = SegmentIndex::new(&arr);

    let mut min_pt: Option<Point> = None;
    for c in &arr.curves {
        let (lo, _) = c.bounding_box();
        min_pt = Some(match min_pt {
            None => lo,
            Some(m) => Point::new(m.x.min(lo.x), m.y.min(lo.y)),
        });
    }
    let far = min_pt.map_or(Point::from_ints(0, 0), |m| m.offset(&int(-1), &int(-1)));
    let mut faces = vec![Face { boundary: None, holes: Vec::new(), sample: far }];
    let mut cycle_face = vec![usize::MAX; arr.cycles.len()];
    for (ci, &b) in bounded.iter().enumerate() {
        if b {
            cycle_face[ci] = faces.len();
            let sample = face_sample(&arr, &index, &arr.cycles[ci]);
            faces.push(Face { boundary: Some(ci), holes: Vec::new(), sample });
        }
    }
    // outer cycles: leftward ray from the component's leftmost node
    let ncomp = arr.component_count();
    let mut leftmost: Vec<Option<Point>> = vec![None; ncomp];
    for f in &arr.fragments {
        let c = arr.node_component[f.start_node];
        for p in &f.points {
            let better = match &leftmost[c] {
                None => true,
                Some(q) => p.x < q.x || (p.x == q.x && p.y < q.y),
            };
            if better {
                leftmost[c] = Some(p.clone());
            }
        }
    }
    let mut outer_of_comp = vec![usize::MAX; ncomp];
    for (ci, cyc) in arr.cycles.iter().enumerate() {
        if !bounded[ci] {
            outer_of_comp[arr.node_component[arr.origin(cyc[0])]] = ci;
        }
    }
    let mut enclosing: Vec<Option<usize>> = vec![None; ncomp];
    for c in 0..ncomp {
        let q = leftmost[c].clone().expect("component has points");
        enclosing[c] = arr.ray_hit(&q, false, Some(c))?;
    }
    // resolve chains; leftmost x strictly decreases along them
    fn resolve(
        c: usize,
        arr: &Arrangement,
        enclosing: &[Option<usize>],
        bounded: &[bool],
        cycle_face: &[usize],
    ) -> usize {
        match enclosing[c] {
            None => 0,
            Some(h) => {
                let cyc = arr.half_edge_cycle[h];
                if bounded[cyc] {
                    cycle_face[cyc]
                } else {
                    resolve(arr.node_component[arr.origin(h)], arr, enclosing, bounded, cycle_face)
                }
            }
        }
    }
    for c in 0..ncomp {
        let f = resolve(c, &arr, &enclosing, &bounded, &cycle_face);
        let oc = outer_of_comp[c];
        cycle_face[oc] = f;
        faces[f].holes.push(oc);
    }
    arr.faces = faces;
    arr.cycle_face = cycle_face;
    Ok(arr)
}

/// Arrangement segments with floating-point shadows of their endpoints,
/// sorted by a padded lower bound on their lowest y. The floats only ever
/// rule segments out; every answer is decided in exact arithmetic.
struct SegmentIndex<'a> {
    segs: Vec<IndexedSegment<'a>>,
}

struct IndexedSegment<'a> {
    y_lo: f64,
    y_hi: f64,
    f: [f64; 4],
    a: &'a Point,
    b: &'a Point,
}

fn pad(y: f64) -> f64 {
    1e-9 * (1.0 + y.abs())
}

fn approx(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl IndexedSegment<'_> {
    /// Approximate x where the segment meets height `y`, with an error
    /// bound; `None` when the float evaluation is not trustworthy.
    fn x_at(&self, y: f64) -> Option<(f64, f64)> {
        let [ax, ay, bx, by] = self.f;
        let dy = by - ay;
        if !(dy.abs() > 1e-6 * (1.0 + ay.abs() + by.abs())) {
            return None;
        }
        let x = ax + (y - ay) * (bx - ax) / dy;
        x.is_finite().then(|| (x, 1e-8 * (1.0 + ax.abs() + bx.abs())))
    }

    fn exact_xs(&self, y: &Rational) -> Vec<Rational> {
        let (p, q) = (self.a, self.b);
        if p.y == q.y {
            return if p.y == *y { vec![p.x.clone(), q.x.clone()] } else { vec![] };
        }
        let (lo, hi) = if p.y < q.y { (p, q) } else { (q, p) };
        if lo.y <= *y && *y <= hi.y {
            vec![&lo.x + (y - &lo.y) * (&hi.x - &lo.x) / (&hi.y - &lo.y)]
        } else {
            vec![]
        }
    }
}

impl<'a> SegmentIndex<'a> {
    fn new(arr: &'a Arrangement) -> SegmentIndex<'a> {
        let mut segs: Vec<IndexedSegment> = arr
            .segments()
            .map(|(_, a, b)| {
                let f = [approx(&a.x), approx(&a.y), approx(&b.x), approx(&b.y)];
                let (lo, hi) = (f[1].min(f[3]), f[1].max(f[3]));
                let (y_lo, y_hi) = if f.iter().all(|v| v.is_finite()) {
                    (lo - pad(lo), hi + pad(hi))
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                };
                IndexedSegment { y_lo, y_hi, f, a, b }
            })
            .collect();
        segs.sort_by(|x, y| x.y_lo.total_cmp(&y.y_lo));
        SegmentIndex { segs }
    }

    /// The curve point nearest to `m` on the horizontal line through it,
    /// strictly to the left (`west`) or right of `m`.
    fn nearest_beyond(&self, m: &Point, west: bool) -> Option<Rational> {
        let (mx, my) = (approx(&m.x), approx(&m.y));
        let floats = mx.is_finite() && my.is_finite();
        let end = if floats { self.segs.partition_point(|s| s.y_lo <= my) } else { self.segs.len() };
        let spanning: Vec<&IndexedSegment> =
            self.segs[..end].iter().filter(|s| !floats || s.y_hi >= my).collect();
        let em = 1e-8 * (1.0 + mx.abs());
        let approxs: Vec<Option<(f64, f64)>> =
            spanning.iter().map(|s| if floats { s.x_at(my) } else { None }).collect();
        // the crossing nearest to m is at least as near as this bound
        let mut bound: Option<f64> = None;
        for &(x, e) in approxs.iter().flatten() {
            if west && x + e + em < mx {
                bound = Some(bound.map_or(x - e, |b: f64| b.max(x - e)));
            } else if !west && x - e - em > mx {
                bound = Some(bound.map_or(x + e, |b: f64| b.min(x + e)));
            }
        }
        let mut nearest: Option<Rational> = None;
        for (s, ap) in spanning.iter().zip(&approxs) {
            if let Some((x, e)) = *ap {
                let wrong_side = if west { x - e - em > mx } else { x + e + em < mx };
                let too_far = bound.is_some_and(|b| if west { x + e < b } else { x - e > b });
                if wrong_side || too_far {
                    continue;
                }
            }
            for x in s.exact_xs(&m.y) {
                let beyond = if west { x < m.x } else { x > m.x };
                let closer = match &nearest {
                    None => true,
                    Some(n) => (west && x > *n) || (!west && x < *n),
                };
                if beyond && closer {
                    nearest = Some(x);
                }
            }
        }
        nearest
    }
}

/// A rational point inside the face left of `cyc`: from the midpoint of a
/// non-horizontal boundary segment, halfway to the nearest curve along the
/// horizontal line on the face side.
fn face_sample(arr: &Arrangement, index: &SegmentIndex, cyc: &[usize]) -> Point {
    for &h in cyc {
        let pts = arr.half_edge_points(h);
        for w in pts.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.y == b.y {
                continue;
            }
            let m = a.lerp(b, &crate::geometry::rat(1, 2));
            let west = b.y > a.y;
            let x = match index.nearest_beyond(&m, west) {
                Some(x) => (&m.x + x) / int(2),
                None if west => &m.x - int(1),
                None => &m.x + int(1),
            };
            return Point::new(x, m.y);
        }
    }
    unreachable!("a bounded cycle has a non-horizontal segment")
}

// ---------------------------------------------------------------------------
// Face windings and puncture census.

/// Winding number of curve `curve` around each face, by breadth-first search
/// from the unbounded face: crossing a fragment of the curve from its right
/// to its left adds one.
pub fn face_windings(arr: &Arrangement, curve: usize) -> Vec<i64> {
    let mut w: Vec<Option<i64>> = vec![None; arr.faces.len()];
    w[0] = Some(0);
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); arr.faces.len()];
    for (fi, f) in arr.fragments.iter().enumerate() {
        let left = arr.face_left(2 * fi);
        let right = arr.face_left(2 * fi + 1);
        let d = if f.curve == curve { 1 } else { 0 };
        adj[right].push((left, d));
        adj[left].push((right, -d));
    }
    while let Some(f) = queue.pop_front() {
        let base = w[f].unwrap();
        for &(g, d) in &adj[f] {
            if w[g].is_none() {
                w[g] = Some(base + d);
                queue.push_back(g);
            }
        }
    }
    w.into_iter().map(|x| x.unwrap_or(0)).collect()
}

/// Punctures of `plane` in each face. Index `plane.len()` stands for the
/// ideal point, which always sits in the unbounded face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Census {
    pub faces: Vec<Vec<usize>>,
    pub n: usize,
}

impl Census {
    /// No face holds `n` or `n + 1` of the `n + 1` special points.
    pub fn balanced(&self) -> bool {
        self.faces.iter().all(|f| f.len() < self.n)
    }
}

pub fn face_puncture_census(arr: &Arrangement, plane: &PuncturedPlane) -> Result<Census, ArrangementError> {
    let mut faces = vec![Vec::new(); arr.faces.len()];
    for (i, p) in plane.punctures().iter().enumerate() {
        let f = arr.locate(p).map_err(|_| ArrangementError::PunctureOnCurve(i))?;
        faces[f].push(i);
    }
    faces[0].push(plane.len());
    Ok(Census { faces, n: plane.len() })
}

pub fn is_balanced(family: &[PolyCurve], plane: &PuncturedPlane) -> Result<bool, ArrangementError> {
    Ok(face_puncture_census(&planarize(family)?, plane)?.balanced())
}

/// The special point a single loop separates: the one point outside the
/// face holding the other `n`. `None` when the loop is balanced alone.
pub fn separated_point(l: &PolyCurve, plane: &PuncturedPlane) -> Result<Option<usize>, ArrangementError> {
    let census = face_puncture_census(&planarize(std::slice::from_ref(l))?, plane)?;
    let n = plane.len();
    for f in &census.faces {
        if f.len() >= n {
            return Ok((0..=n).find(|t| !f.contains(t)));
        }
    }
    Ok(None)
}

/// A balanced pair of loops, searched the way the existence proof goes: a
/// loop balanced on its own; two loops separating different points; two
/// loops with equal winding around the common separated point. Candidates
/// are confirmed by census, and if the proof's preconditions fail the
/// search falls back to all pairs.
pub fn find_balanced_pair(
    h: &[PolyCurve],
    plane: &PuncturedPlane,
    _k: usize,
) -> Result<Option<(usize, usize)>, ArrangementError> {
    if h.len() < 2 || plane.len() < 2 {
        return Ok(None);
    }
    let confirm = |a: usize, b: usize| -> Result<bool, ArrangementError> {
        is_balanced(&[h[a].clone(), h[b].clone()], plane)
    };
    let mut separated = Vec::with_capacity(h.len());
    for (i, l) in h.iter().enumerate() {
        match separated_point(l, plane)? {
            None => {
                let j = if i == 0 { 1 } else { 0 };
                if confirm(i.min(j), i.max(j))? {
                    return Ok(Some((i.min(j), i.max(j))));
                }
                separated.push(None);
            }
            Some(t) => separated.push(Some(t)),
        }
    }
    for i in 0..h.len() {
        for j in i + 1..h.len() {
            if let (Some(a), Some(b)) = (separated[i], separated[j]) {
                if a != b && confirm(i, j)? {
                    return Ok(Some((i, j)));
                }
            }
        }
    }
    // all separate the same point t: pigeonhole on winding around t, or
    // around a finite puncture when t is the ideal point
    let n = plane.len();
    let mut by_winding: HashMap<(usize, i64), Vec<usize>> = HashMap::new();
    for (i, l) in h.iter().enumerate() {
        if let Some(t) = separated[i] {
            let centre = if t == n { &plane.punctures()[0] } else { &plane.punctures()[t] };
            let w = winding_number(l, centre).map_err(|_| ArrangementError::PunctureOnCurve(t))?;
            by_winding.entry((t, w)).or_default().push(i);
        }
    }
    let mut groups: Vec<&Vec<usize>> = by_winding.values().filter(|g| g.len() > 1).collect();
    groups.sort();
    for g in groups {
        for (x, &i) in g.iter().enumerate() {
            for &j in &g[x + 1..] {
                if confirm(i, j)? {
                    return Ok(Some((i, j)));
                }
            }
        }
    }
    for i in 0..h.len() {
        for j in i + 1..h.len() {
            if confirm(i, j)? {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Monotone subsequences and L-circles.

/// Indices of a longest strictly increasing subsequence.
fn longest_increasing<T: Ord>(seq: &[T]) -> Vec<usize> {
    let mut tails: Vec<usize> = Vec::new();
    let mut prev = vec![usize::MAX; seq.len()];
    for i in 0..seq.len() {
        let k = tails.partition_point(|&t| seq[t] < seq[i]);
        if k > 0 {
            prev[i] = tails[k - 1];
        }
        if k == tails.len() {
            tails.push(i);
        } else {
            tails[k] = i;
        }
    }
    let mut out = Vec::with_capacity(tails.len());
    let mut cur = tails.last().copied();
    while let Some(i) = cur {
        out.push(i);
        cur = (prev[i] != usize::MAX).then_some(prev[i]);
    }
    out.reverse();
    out
}

/// Indices of a longest monotone (increasing or decreasing) subsequence.
pub fn monotone_indices<T: Ord>(seq: &[T]) -> Vec<usize> {
    let inc = longest_increasing(seq);
    let rev: Vec<std::cmp::Reverse<&T>> = seq.iter().map(std::cmp::Reverse).collect();
    let dec = longest_increasing(&rev);
    if dec.len() > inc.len() {
        dec
    } else {
        inc
    }
}

pub fn monotone_subsequence(seq: &[i64]) -> Vec<i64> {
    monotone_indices(seq).into_iter().map(|i| seq[i]).collect()
}

/// A piece of block curve `curve` between two parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub curve: usize,
    pub from: CurveParam,
    pub to: CurveParam,
    pub points: Vec<Point>,
}

/// A closed curve made of one chain (from a self-crossing back to itself)
/// or two chains joining the same pair of crossings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LCircle {
    pub chains: Vec<Chain>,
    /// The crossing points the chains run between.
    pub ends: (Point, Point),
}

impl LCircle {
    /// Vertex cycle of the circle: the first chain, then the second chain
    /// traversed back to the start.
    pub fn polygon(&self) -> Vec<Point> {
        let mut pts = self.chains[0].points.clone();
        let end = pts.pop();
        if let Some(c) = self.chains.get(1) {
            let mut back = c.points.clone();
            if back.first() != end.as_ref() {
                back.reverse();
            }
            pts.extend(back[..back.len() - 1].iter().cloned());
        }
        pts
    }

    pub fn is_closed(&self) -> bool {
        let c0 = &self.chains[0];
        let ends = |c: &Chain| {
            let (a, b) = (c.points.first().cloned(), c.points.last().cloned());
            if a <= b {
                (a, b)
            } else {
                (b, a)
            }
        };
        match self.chains.get(1) {
            None => c0.points.first() == c0.points.last(),
            Some(c1) => ends(c0) == ends(c1),
        }
    }

    pub fn to_curve(&self) -> Result<PolyCurve, GeometryError> {
        PolyCurve::closed(self.polygon())
    }
}

/// Two circles overlap when they share a piece of the same curve.
pub fn circles_overlap(a: &LCircle, b: &LCircle) -> bool {
    a.chains.iter().any(|x| {
        b.chains.iter().any(|y| {
            x.curve == y.curve
                && param_cmp(&x.from, &y.to) == Ordering::Less
                && param_cmp(&y.from, &x.to) == Ordering::Less
        })
    })
}

pub fn non_overlapping(circles: &[LCircle]) -> bool {
    circles.iter().enumerate().all(|(i, a)| circles[i + 1..].iter().all(|b| !circles_overlap(a, b)))
}

fn chain(block: &[PolyCurve], curve: usize, a: &CurveParam, b: &CurveParam) -> Chain {
    let (from, to) = if param_cmp(a, b) == Ordering::Less { (a, b) } else { (b, a) };
    Chain { curve, from: from.clone(), to: to.clone(), points: sub_chain(&block[curve], from, to) }
}

/// Circles through consecutive entries of `crossings`, each given as its
/// parameters on the two strands.
fn ladder_circles(
    block: &[PolyCurve],
    strands: (usize, usize),
    crossings: &[(CurveParam, CurveParam, Point)],
) -> Vec<LCircle> {
    let mut order: Vec<usize> = (0..crossings.len()).collect();
    order.sort_by(|&i, &j| param_cmp(&crossings[i].0, &crossings[j].0));
    let mut rank_on_second: Vec<usize> = (0..crossings.len()).collect();
    rank_on_second.sort_by(|&i, &j| param_cmp(&crossings[i].1, &crossings[j].1));
    let mut rank = vec![0; crossings.len()];
    for (r, &i) in rank_on_second.iter().enumerate() {
        rank[i] = r;
    }
    let seq: Vec<usize> = order.iter().map(|&i| rank[i]).collect();
    let picked: Vec<usize> = monotone_indices(&seq).into_iter().map(|p| order[p]).collect();
    picked
        .windows(2)
        .map(|w| {
            let (a, b) = (&crossings[w[0]], &crossings[w[1]]);
            LCircle {
                chains: vec![chain(block, strands.0, &a.0, &b.0), chain(block, strands.1, &a.1, &b.1)],
                ends: (a.2.clone(), b.2.clone()),
            }
        })
        .collect()
}

/// A non-overlapping family of L-circles of a block (one loop with at least
/// `k` self-crossings, or two loops crossing each other at least `k`
/// times) with at least `ceil(k^(1/3)) - 1` members.
///
/// For a single loop both routes of the existence argument are tried: a
/// maximum set of disjoint single-chain circles, and for each split point
/// between consecutive crossing parameters the two-strand ladder through the
/// crossings that straddle it. The largest family wins.
pub fn extract_l_circles(block: &[PolyCurve], k: usize) -> Result<Vec<LCircle>, ArrangementError> {
    match block.len() {
        2 => {
            let xs = curve_pair_crossings(&block[0], &block[1])?;
            if xs.len() < k {
                return Err(ArrangementError::InsufficientCrossings { needed: k, found: xs.len() });
            }
            let cr: Vec<_> = xs.into_iter().map(|r| (r.param_a, r.param_b, r.location)).collect();
            Ok(ladder_circles(block, (0, 1), &cr))
        }
        1 => {
            let xs = curve_self_crossings(&block[0])?;
            if xs.len() < k {
                return Err(ArrangementError::InsufficientCrossings { needed: k, found: xs.len() });
            }
            let cr: Vec<(CurveParam, CurveParam, Point)> = xs
                .into_iter()
                .map(|r| {
                    if param_cmp(&r.param_a, &r.param_b) == Ordering::Less {
                        (r.param_a, r.param_b, r.location)
                    } else {
                        (r.param_b, r.param_a, r.location)
                    }
                })
                .collect();
            // disjoint single-chain circles, greedy by right end
            let mut by_end: Vec<usize> = (0..cr.len()).collect();
            by_end.sort_by(|&i, &j| param_cmp(&cr[i].1, &cr[j].1));
            let mut singles = Vec::new();
            let mut last_end: Option<&CurveParam> = None;
            for i in by_end {
                if last_end.map_or(true, |e| param_cmp(e, &cr[i].0) == Ordering::Less) {
                    singles.push(LCircle {
                        chains: vec![chain(block, 0, &cr[i].0, &cr[i].1)],
                        ends: (cr[i].2.clone(), cr[i].2.clone()),
                    });
                    last_end = Some(&cr[i].1);
                }
            }
            let mut best = singles;
            let mut params: Vec<&CurveParam> = cr.iter().flat_map(|c| [&c.0, &c.1]).collect();
            params.sort_by(|a, b| param_cmp(a, b));
            for w in params.windows(2) {
                // split between w[0] and w[1]: crossings with one parameter on
                // each side
                let straddle: Vec<(CurveParam, CurveParam, Point)> = cr
                    .iter()
                    .filter(|c| param_cmp(&c.0, w[0]) != Ordering::Greater && param_cmp(&c.1, w[1]) != Ordering::Less)
                    .cloned()
                    .collect();
                if straddle.len() < 2 || straddle.len() <= best.len() {
                    continue;
                }
                let fam = ladder_circles(block, (0, 0), &straddle);
                if fam.len() > best.len() {
                    best = fam;
                }
            }
            Ok(best)
        }
        _ => Err(ArrangementError::GeneralPosition("a block has one or two loops".into())),
    }
}

/// Whether `x` and `p` lie in different faces of the circle.
pub fn separates(circle: &LCircle, x: &Point, p: &Point) -> Result<bool, ArrangementError> {
    let c = circle.to_curve()?;
    for q in [x, p] {
        if c.contains_point(q) {
            return Err(ArrangementError::PointOnCircle(q.clone()));
        }
    }
    let arr = planarize(&[c])?;
    Ok(arr.locate(x)? != arr.locate(p)?)
}

// ---------------------------------------------------------------------------
// Blocks and signatures.

/// Greedy blocks in input order: a loop with at least `k` self-crossings
/// alone, else paired with the first unused later loop it crosses at least
/// `k` times.
pub fn greedy_blocks(family: &[PolyCurve], k: usize) -> Result<Vec<Vec<usize>>, ArrangementError> {
    let counts = family_crossing_counts(family)?;
    let mut used = vec![false; family.len()];
    let mut blocks = Vec::new();
    for i in 0..family.len() {
        if used[i] {
            continue;
        }
        if counts.self_counts[i] >= k {
            used[i] = true;
            blocks.push(vec![i]);
            continue;
        }
        if let Some(j) = (i + 1..family.len()).find(|&j| !used[j] && counts.pair(i, j) >= k) {
            used[i] = true;
            used[j] = true;
            blocks.push(vec![i, j]);
        }
    }
    Ok(blocks)
}

/// Where a loop leaves and re-enters the basepoint relative to the
/// arrangement's half-edges there, and the fragments it crosses in order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    pub crossed: Vec<usize>,
    /// Sector of the initial portion among the `d` half-edges at the node.
    pub start: usize,
    /// Gap of the final portion among the `d` half-edges plus the initial
    /// portion, so one of `d + 1`.
    pub end: usize,
}

fn sector(rot: &[Dir], d: &Dir) -> usize {
    // number of rotation directions strictly before d in angle order
    rot.iter().filter(|r| angle_cmp(r, d) == Ordering::Less).count() % rot.len().max(1)
}

pub fn signature(l: &PolyCurve, arr: &Arrangement) -> Result<Signature, ArrangementError> {
    let x = l.start();
    let node = arr.node_index(x).ok_or_else(|| ArrangementError::NotAtNode(x.clone()))?;
    let mut hits: Vec<(CurveParam, usize)> = Vec::new();
    for (ci, c) in arr.curves.iter().enumerate() {
        for r in curve_pair_crossings(l, c)? {
            if arr.node_index(&r.location).is_some() {
                return Err(ArrangementError::GeneralPosition(format!("loop passes through node {}", r.location)));
            }
            let f = arr
                .fragment_at(ci, &r.param_b)
                .ok_or_else(|| ArrangementError::GeneralPosition("crossing outside every fragment".into()))?;
            hits.push((r.param_a, f));
        }
    }
    hits.sort_by(|a, b| param_cmp(&a.0, &b.0));
    let rot: Vec<Dir> = arr.rotation[node]
        .iter()
        .map(|&h| {
            let p = arr.half_edge_points(h);
            dir(&p[0], &p[1])
        })
        .collect();
    let v = l.vertices();
    let first = dir(x, &v[1]);
    let last = dir(x, &v[v.len() - 1]);
    let start = sector(&rot, &first);
    let mut with_first = rot.clone();
    with_first.push(first);
    with_first.sort_by(angle_cmp);
    let end = sector(&with_first, &last);
    Ok(Signature { crossed: hits.into_iter().map(|h| h.1).collect(), start, end })
}
