//! Deterministic generators for loop families and drawn multigraphs.
//!
//! All coordinates are exact rationals. Families that need perturbation are
//! emitted already perturbed; the offsets are chosen per column so that
//! curves only cross where their combinatorics force them to.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::bounds::case_a_k;
use crate::geometry::{family_crossing_counts, int, rat, GeometryError, Point, PolyCurve, Rational};
use crate::homotopy::{DrawnMultigraph, Edge, HomotopyError, PuncturedPlane, ReducedWord, Vertex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("construction produced too few usable curves: {0}")]
    Exhausted(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
}

/// Closed curves based at the plane's basepoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopFamily {
    pub plane: PuncturedPlane,
    pub curves: Vec<PolyCurve>,
}

impl LoopFamily {
    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }
}

fn inv_pow2(e: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << e as usize)
}

// ---------------------------------------------------------------------------
// Square spirals.

/// A square "polar" frame: angle `θ` in turns walks the boundary of the
/// square of half-width `radius` counterclockwise, starting at the midpoint
/// of its left side, and `r` scales the square about `center`.
#[derive(Clone, Debug)]
pub struct SquareFrame {
    pub center: Point,
    pub radius: Rational,
}

impl SquareFrame {
    /// Point on the unit square boundary at angle `theta` (any real, taken
    /// mod 1).
    fn direction(theta: &Rational) -> (Rational, Rational) {
        let t = theta - theta.floor();
        let e = int(8);
        if t <= rat(1, 8) {
            (int(-1), -&e * &t)
        } else if t <= rat(3, 8) {
            (int(-1) + &e * (&t - rat(1, 8)), int(-1))
        } else if t <= rat(5, 8) {
            (int(1), int(-1) + &e * (&t - rat(3, 8)))
        } else if t <= rat(7, 8) {
            (int(1) - &e * (&t - rat(5, 8)), int(1))
        } else {
            (int(-1), int(1) - &e * (&t - rat(7, 8)))
        }
    }

    pub fn point(&self, theta: &Rational, r: &Rational) -> Point {
        let (dx, dy) = SquareFrame::direction(theta);
        let s = &self.radius * r;
        self.center.offset(&(&s * dx), &(&s * dy))
    }

    /// The frame point at angle 0 and scale 1, where every spiral starts.
    pub fn base(&self) -> Point {
        self.point(&Rational::zero(), &Rational::one())
    }

    /// A closed spiral that turns `turns` times around the center
    /// (counterclockwise when positive) and returns to [`Self::base`].
    /// Its scale is `1 ± mu t (s - t)` after `t` turns, `+` when `outer`.
    /// Vertices sit on the angles `q/8 + 2^-e`, which every spiral of the
    /// frame shares.
    pub fn spiral(&self, turns: i64, outer: bool, mu: &Rational, e: u32) -> PolyCurve {
        assert!(turns != 0);
        let s = turns.unsigned_abs() as i64;
        let shift = inv_pow2(e);
        let mut pts = vec![self.base()];
        for q in 0..8 * s {
            // clockwise spirals walk the same angle set backwards
            let t = if turns > 0 { rat(q, 8) + &shift } else { rat(q + 1, 8) - &shift };
            let bend = mu * &t * (int(s) - &t);
            let r = if outer { Rational::one() + bend } else { Rational::one() - bend };
            let theta = if turns > 0 { t } else { -t };
            pts.push(self.point(&theta, &r));
        }
        PolyCurve::closed(pts).expect("spiral vertices are distinct")
    }
}

/// Largest dyadic `mu` with `mu * s^2 < 2`, so inner spirals of up to `s`
/// turns keep more than half the frame radius.
fn spiral_mu(s: u64) -> Rational {
    let mut a = 0;
    while (1u128 << a) * 2 <= (s as u128) * (s as u128) {
        a += 1;
    }
    inv_pow2(a + 1)
}

/// Smallest `e >= 4` with `2^e > 2s`.
fn spiral_shift(s: u64) -> u32 {
    let mut e = 4;
    while (1u64 << e) <= 2 * s {
        e += 1;
    }
    e
}

/// `2k+1` loops around one puncture with winding numbers `-k..=k`.
/// Positive windings spiral outside the unit frame, negative ones inside,
/// and the winding-0 loop is a small triangle left of the basepoint. A loop
/// of winding `w` has `|w| - 1` self-crossings; loops on the same side cross
/// `2(min - 1)` times and loops on opposite sides never cross.
pub fn gen_winding_loops(k: u64) -> Result<LoopFamily, ConstructionError> {
    if k == 0 {
        return Err(ConstructionError::ParameterOutOfRange("k must be positive".into()));
    }
    let frame = SquareFrame { center: Point::from_ints(0, 0), radius: int(1) };
    let x = frame.base();
    let plane = PuncturedPlane::new(vec![frame.center.clone()], x.clone())?;
    let mu = spiral_mu(k);
    let e = spiral_shift(k);
    let mut curves = Vec::with_capacity(2 * k as usize + 1);
    for w in -(k as i64)..=(k as i64) {
        if w == 0 {
            let (dx, dy) = (&mu / int(4), inv_pow2(e));
            let tri = vec![x.clone(), x.offset(&-&dx, &dy), x.offset(&-&dx, &-&dy)];
            curves.push(PolyCurve::closed(tri)?);
        } else {
            curves.push(frame.spiral(w, w > 0, &mu, e));
        }
    }
    Ok(LoopFamily { plane, curves })
}

// ---------------------------------------------------------------------------
// Elementary and concatenated loops.

/// Number of adjacent sign changes in a sign vector.
pub fn sign_changes(sigma: &[bool]) -> usize {
    sigma.windows(2).filter(|w| w[0] != w[1]).count()
}

/// All sign vectors of length `n` (`true` = above) in lexicographic order
/// with below before above.
fn sign_vectors(n: usize) -> Vec<Vec<bool>> {
    (0..1u64 << n)
        .map(|bits| (0..n).map(|i| bits >> (n - 1 - i) & 1 == 1).collect())
        .collect()
}

/// Order key of a sign vector at column `i` (0-based): its own sign, then
/// the signs to the right, then the signs to the left read outward. Loops
/// sorted by this key are nested consistently with their shared runs.
fn column_key(sigma: &[bool], i: usize) -> Vec<bool> {
    let mut key = vec![sigma[i]];
    key.extend(sigma[i + 1..].iter().copied());
    key.extend(sigma[..i].iter().rev().copied());
    key
}

/// `ranks[i][a]` = position (0-based) of vector `a` in the column-`i` order.
fn column_ranks(sigmas: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = sigmas.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            let mut order: Vec<usize> = (0..sigmas.len()).collect();
            order.sort_by_key(|&a| column_key(&sigmas[a], i));
            let mut rank = vec![0; sigmas.len()];
            for (pos, a) in order.into_iter().enumerate() {
                rank[a] = pos;
            }
            rank
        })
        .collect()
}

const EPS: (i64, i64) = (1, 16);

fn eps() -> Rational {
    rat(EPS.0, EPS.1)
}

/// The plane used by elementary and concatenated loops: punctures at
/// `(i, 0)` for `i = 1..=n`, basepoint `(0, -1)`.
pub fn column_plane(n: usize) -> PuncturedPlane {
    let punctures = (1..=n as i64).map(|i| Point::from_ints(i, 0)).collect();
    PuncturedPlane::new(punctures, Point::from_ints(0, -1)).expect("columns are distinct")
}

/// The pass of a loop through the columns: one vertex just right of each
/// puncture at height `±1/2`, then the corner below and right of all
/// punctures. `t` is the loop's offset at each column.
fn column_pass(sigma: &[bool], t: impl Fn(usize) -> Rational) -> Vec<Point> {
    let n = sigma.len();
    let mut pts = Vec::with_capacity(n + 1);
    for (i, &up) in sigma.iter().enumerate() {
        let t = t(i);
        let y = if up { rat(1, 2) } else { rat(-1, 2) };
        pts.push(Point::new(int(i as i64 + 1) + &t / int(2), y + &t));
    }
    let t = t(n - 1);
    pts.push(Point::new(int(n as i64 + 1) + &t, int(-1) - &t / int(4)));
    pts
}

/// Elementary loops with at most `k - 1` sign changes.
pub fn gen_elementary_loops(n: usize, k: usize) -> Result<LoopFamily, ConstructionError> {
    if n < 2 || k == 0 || k > n {
        return Err(ConstructionError::ParameterOutOfRange(format!(
            "need n >= 2 and 1 <= k <= n, got n = {n}, k = {k}"
        )));
    }
    let sigmas: Vec<Vec<bool>> = sign_vectors(n).into_iter().filter(|s| sign_changes(s) < k).collect();
    let ranks = column_ranks(&sigmas);
    let size = int(sigmas.len() as i64);
    let plane = column_plane(n);
    let x = plane.basepoint().clone();
    let curves = sigmas
        .iter()
        .enumerate()
        .map(|(a, sigma)| {
            let mut pts = vec![x.clone()];
            pts.extend(column_pass(sigma, |i| eps() * int(ranks[i][a] as i64 + 1) / &size));
            PolyCurve::closed(pts)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LoopFamily { plane, curves })
}

/// Raw layout of the concatenated loops: for every word of `j` pieces the
/// open chain of points from the first piece to the last corner, with the
/// interior basepoint copies already in place. Pieces are the elementary
/// loops that pass above the first puncture.
struct ConcatLayout {
    chains: Vec<Vec<Point>>,
    /// ladder parameter spacing: interior copies use `u` in `(0, 1)`
    count: usize,
    j: usize,
}

/// Copy of the basepoint at ladder parameter `u`, on a short diagonal
/// running down and to the left of `(0, -1)`.
fn ladder(u: &Rational) -> Point {
    let eta = eps() * int(2);
    Point::new(-(&eta * u), int(-1) - &eta * u / int(2))
}

fn concat_layout(n: usize, j: usize) -> ConcatLayout {
    let pieces: Vec<Vec<bool>> = sign_vectors(n).into_iter().filter(|s| s[0]).collect();
    let p = pieces.len();
    let ranks = column_ranks(&pieces);
    let count = p.pow(j as u32);
    let scale = eps() / int(p as i64);
    let denom = (count * j + 1) as i64;
    let chains = (0..count)
        .map(|li| {
            let mut digits = vec![0; j];
            let mut rest = li;
            for d in digits.iter_mut().rev() {
                *d = rest % p;
                rest /= p;
            }
            let mut pts = Vec::new();
            for (r, &pi) in digits.iter().enumerate() {
                let u = rat((r * count + li + 1) as i64, denom);
                pts.extend(column_pass(&pieces[pi], |i| &scale * (int(ranks[i][pi] as i64) + &u)));
                if r + 1 < j {
                    pts.push(ladder(&u));
                }
            }
            pts
        })
        .collect();
    ConcatLayout { chains, count, j }
}

/// All `2^(j(n-1))` products of `j` elementary loops passing above the first
/// puncture, drawn through distinct copies of the basepoint.
pub fn gen_concatenated_loops(n: usize, j: usize) -> Result<LoopFamily, ConstructionError> {
    if n < 2 || j < 3 {
        return Err(ConstructionError::ParameterOutOfRange(format!("need n >= 2 and j >= 3, got n = {n}, j = {j}")));
    }
    if j * (n - 1) > 20 {
        return Err(ConstructionError::ParameterOutOfRange(format!("2^(j(n-1)) = 2^{} loops is too many", j * (n - 1))));
    }
    let plane = column_plane(n);
    let x = plane.basepoint().clone();
    let layout = concat_layout(n, j);
    let curves = layout
        .chains
        .into_iter()
        .map(|chain| {
            let mut pts = vec![x.clone()];
            pts.extend(chain);
            PolyCurve::closed(pts)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LoopFamily { plane, curves })
}

// ---------------------------------------------------------------------------
// Dense non-homotopic multigraphs.

fn vertex(label: String, p: Point) -> Vertex {
    Vertex { label, point: p }
}

/// `(k, j)` for the three-vertex construction with `m` edges: `k` is the
/// crossing budget per pair and `j` the number of pieces per loop.
pub fn case_a_parameters(m: u64) -> (u64, usize) {
    let k = case_a_k(m);
    let mut j = ((k - 1) / 2).sqrt() as usize;
    while (1u64 << j) < m {
        j += 1;
    }
    (k, j.max(3))
}

/// Three vertices `a1 = (1,0)`, `a2 = (2,0)`, `x = (0,-1)` and `m` pairwise
/// non-homotopic loop edges at `x`, each a concatenation of `j` elementary
/// loops around `a1, a2`.
fn case_a(m: usize, label_suffix: &str) -> Result<DrawnMultigraph, ConstructionError> {
    let (_, mut j) = case_a_parameters(m as u64);
    loop {
        let vertices = vec![
            vertex(format!("a1{label_suffix}"), Point::from_ints(1, 0)),
            vertex(format!("a2{label_suffix}"), Point::from_ints(2, 0)),
            vertex(format!("x{label_suffix}"), Point::from_ints(0, -1)),
        ];
        let x = vertices[2].point.clone();
        let layout = concat_layout(2, j);
        let candidates = layout
            .chains
            .into_iter()
            .map(|chain| {
                let mut pts = vec![x.clone()];
                pts.extend(chain);
                Ok(Edge { u: 2, v: 2, curve: PolyCurve::closed(pts)? })
            })
            .collect::<Result<Vec<_>, GeometryError>>()?;
        let all = DrawnMultigraph::new(vertices.clone(), candidates)?;
        let chosen = select_distinct(&all, m)?;
        if chosen.len() == m {
            let edges = chosen.into_iter().map(|e| all.edges()[e].clone()).collect();
            return Ok(DrawnMultigraph::new(vertices, edges)?);
        }
        j += 1;
        if j > 16 {
            return Err(ConstructionError::Exhausted(format!("fewer than {m} distinct classes")));
        }
    }
}

/// Greedy in edge order: the first `limit` edges that are not trivial loops
/// and not homotopic to an earlier pick.
fn select_distinct(g: &DrawnMultigraph, limit: usize) -> Result<Vec<usize>, HomotopyError> {
    let mut seen: HashSet<(usize, usize, ReducedWord)> = HashSet::new();
    let mut out = Vec::new();
    for e in 0..g.edge_count() {
        if out.len() == limit {
            break;
        }
        let key = g.homotopy_key(e)?;
        if key.0 == key.1 && key.2.is_empty() {
            continue;
        }
        if seen.insert(key) {
            out.push(e);
        }
    }
    Ok(out)
}

/// Loops at `a1 = (1,0)` with `a2 = (2,0)` the only other vertex. Each loop
/// runs from `a1` to its own start copy of the basepoint, through a
/// concatenated loop, and back from its own end copy.
fn case_c_candidates(j: usize) -> Result<DrawnMultigraph, ConstructionError> {
    let vertices = vec![vertex("a1".into(), Point::from_ints(1, 0)), vertex("a2".into(), Point::from_ints(2, 0))];
    let a1 = vertices[0].point.clone();
    let layout = concat_layout(2, j);
    let l = layout.count as i64;
    let jj = layout.j as i64;
    let edges = layout
        .chains
        .into_iter()
        .enumerate()
        .map(|(li, chain)| {
            let li = li as i64;
            let us = rat(li + 1, (l + 1) * (l * jj + 1));
            let ue = int(1) + rat(li + 1, l + 1);
            let mut pts = vec![a1.clone(), ladder(&us)];
            pts.extend(chain);
            pts.push(ladder(&ue));
            Ok(Edge { u: 0, v: 0, curve: PolyCurve::closed(pts)? })
        })
        .collect::<Result<Vec<_>, GeometryError>>()?;
    Ok(DrawnMultigraph::new(vertices, edges)?)
}

/// Case C candidates for `j` pieces and the greedy survivors.
pub fn case_c_survivors(j: usize) -> Result<(DrawnMultigraph, Vec<usize>), ConstructionError> {
    let g = case_c_candidates(j)?;
    let keep = select_distinct(&g, usize::MAX)?;
    Ok((g, keep))
}

fn case_c(m: usize) -> Result<DrawnMultigraph, ConstructionError> {
    for j in 3..=16 {
        let (g, keep) = case_c_survivors(j)?;
        if keep.len() < 1 << (j - 2) {
            return Err(ConstructionError::Exhausted(format!(
                "{} survivors for j = {j}, expected at least {}",
                keep.len(),
                1 << (j - 2)
            )));
        }
        if keep.len() >= m {
            let edges = keep[..m].iter().map(|&e| g.edges()[e].clone()).collect();
            return Ok(DrawnMultigraph::new(g.vertices().to_vec(), edges)?);
        }
    }
    Err(ConstructionError::Exhausted(format!("fewer than {m} survivors")))
}

/// A non-homotopic multigraph with `n` vertices and `m` edges whose
/// crossing number is `O((m^2/n) log^2(m/n))`.
pub fn gen_upperbound_multigraph(n: usize, m: usize) -> Result<DrawnMultigraph, ConstructionError> {
    if n < 2 || m <= 4 * n {
        return Err(ConstructionError::ParameterOutOfRange(format!("need n >= 2 and m > 4n, got n = {n}, m = {m}")));
    }
    match n {
        2 => case_c(m),
        3 => case_a(m, ""),
        _ => {
            let copies = n / 3;
            let m0 = m.div_ceil(copies);
            let mut vertices = Vec::new();
            let mut edges = Vec::new();
            for c in 0..copies {
                let g = case_a(m0, &format!("_{c}"))?;
                let dx = int(8 * c as i64);
                let base = vertices.len();
                vertices.extend(
                    g.vertices().iter().map(|v| vertex(v.label.clone(), v.point.offset(&dx, &Rational::zero()))),
                );
                for e in g.edges() {
                    if edges.len() < m {
                        edges.push(Edge { u: e.u + base, v: e.v + base, curve: e.curve.translated(&dx, &Rational::zero()) });
                    }
                }
            }
            for i in 0..n - 3 * copies {
                let p = Point::from_ints(8 * copies as i64 + 1 + i as i64, 0);
                vertices.push(vertex(format!("z{i}"), p));
            }
            Ok(DrawnMultigraph::new(vertices, edges)?)
        }
    }
}

// ---------------------------------------------------------------------------
// Sparse extremal examples.

/// A loose non-homotopic multigraph with the maximum `3n - 3` edges: no two
/// distinct edges cross.
pub fn gen_loose_extremal(n: usize) -> Result<DrawnMultigraph, ConstructionError> {
    if n == 0 {
        return Err(ConstructionError::ParameterOutOfRange("n must be positive".into()));
    }
    if n == 1 {
        return Ok(DrawnMultigraph::new(vec![vertex("u".into(), Point::from_ints(0, 0))], vec![])?);
    }
    let r = n.saturating_sub(3) as i64;
    let s = r.max(1);
    let u = Point::from_ints(-5 * s, 0);
    let v = Point::from_ints(5 * s, 0);
    let mut vertices = vec![vertex("u".into(), u.clone()), vertex("v".into(), v.clone())];
    let mut edges = Vec::new();
    let seg = |a: &Point, b: &Point| PolyCurve::open(vec![a.clone(), b.clone()]);
    edges.push(Edge { u: 0, v: 1, curve: seg(&u, &v)? });
    if n >= 3 {
        let w = Point::from_ints(0, 8 * s);
        vertices.push(vertex("w".into(), w.clone()));
        edges.push(Edge { u: 1, v: 2, curve: seg(&v, &w)? });
        edges.push(Edge { u: 2, v: 0, curve: seg(&w, &u)? });
        let cs: Vec<Point> = (1..=r).map(|i| Point::from_ints(i, 3 * i)).collect();
        for (i, c) in cs.iter().enumerate() {
            vertices.push(vertex(format!("c{}", i + 1), c.clone()));
        }
        let ci = |i: usize| 3 + i;
        for i in 0..cs.len() {
            if i + 1 < cs.len() {
                edges.push(Edge { u: ci(i), v: ci(i + 1), curve: seg(&cs[i], &cs[i + 1])? });
            }
            edges.push(Edge { u: 0, v: ci(i), curve: seg(&u, &cs[i])? });
            edges.push(Edge { u: 1, v: ci(i), curve: seg(&v, &cs[i])? });
        }
        if let Some(last) = cs.last() {
            edges.push(Edge { u: ci(cs.len() - 1), v: 2, curve: seg(last, &w)? });
        }
        // a second uv edge over the top of everything
        let h = int(8 * s + 1);
        let inset = &h / int(4);
        let over = vec![
            u.clone(),
            Point::new(int(-5 * s) + &inset, h.clone()),
            Point::new(int(5 * s) - &inset, h),
            v.clone(),
        ];
        edges.push(Edge { u: 0, v: 1, curve: PolyCurve::open(over)? });
    }
    // a loop at u around everything, and one going around it twice; the
    // vertex shift must be fine enough that the polygon's corner cuts stay
    // clear of the top edge
    let frame = SquareFrame { center: Point::from_ints(4 * s + 2, 0), radius: int(9 * s + 2) };
    debug_assert_eq!(frame.base(), u);
    for e in 8..24 {
        let mut all = edges.clone();
        all.push(Edge { u: 0, v: 0, curve: frame.spiral(1, false, &rat(1, 16), e) });
        all.push(Edge { u: 0, v: 0, curve: frame.spiral(2, true, &rat(1, 16), e) });
        let g = DrawnMultigraph::new(vertices.clone(), all)?;
        if g.general_position_violations().is_empty() {
            return Ok(g);
        }
    }
    Err(ConstructionError::Exhausted("no general-position spiral found".into()))
}

/// `n/2` disjoint two-vertex components, each a bouquet of `2m/n` loops at
/// one vertex winding `1, 2, ...` times around the other.
pub fn gen_disjoint_bouquets(n: usize, m: usize) -> Result<DrawnMultigraph, ConstructionError> {
    if n == 0 || n % 2 != 0 || m % n != 0 {
        return Err(ConstructionError::ParameterOutOfRange(format!("need n even and n | m, got n = {n}, m = {m}")));
    }
    let per = 2 * m / n;
    let mu = spiral_mu(per as u64);
    let e = spiral_shift(per as u64);
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    for c in 0..n / 2 {
        let frame = SquareFrame { center: Point::from_ints(4 * c as i64, 0), radius: int(1) };
        let a = vertices.len();
        vertices.push(vertex(format!("a{c}"), frame.base()));
        vertices.push(vertex(format!("b{c}"), frame.center.clone()));
        for w in 1..=per as i64 {
            edges.push(Edge { u: a, v: a, curve: frame.spiral(w, w % 2 == 1, &mu, e) });
        }
    }
    Ok(DrawnMultigraph::new(vertices, edges)?)
}

/// Sum of crossings over all edge pairs and self-crossings.
pub fn crossing_number(g: &DrawnMultigraph) -> Result<usize, GeometryError> {
    Ok(family_crossing_counts(&g.curves())?.total())
}
