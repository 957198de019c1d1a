//! Independent oracles and random instances shared by the integration tests.
//! The oracles use their own orientation predicate and brute force, so they
//! share no code path with the library's counting and winding routines.

#![allow(dead_code)]

use nhcross::geometry::{curve_contact_violations, Point, PolyCurve, Rational};
use num_bigint::BigInt;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn pt(x: i64, y: i64) -> Point {
    Point::from_ints(x, y)
}

fn side(a: &Point, b: &Point, c: &Point) -> i32 {
    let v = (&b.x - &a.x) * (&c.y - &a.y) - (&b.y - &a.y) * (&c.x - &a.x);
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

fn proper_cross(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let (o1, o2) = (side(a, b, c), side(a, b, d));
    let (o3, o4) = (side(c, d, a), side(c, d, b));
    o1 * o2 < 0 && o3 * o4 < 0
}

fn segs(c: &PolyCurve) -> Vec<(Point, Point)> {
    let v = c.vertices();
    let mut out: Vec<(Point, Point)> = v.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    if c.is_closed() {
        out.push((v[v.len() - 1].clone(), v[0].clone()));
    }
    out
}

/// Proper crossings between two curves in general position.
pub fn oracle_pair_crossings(a: &PolyCurve, b: &PolyCurve) -> usize {
    let (sa, sb) = (segs(a), segs(b));
    sa.iter().map(|(p, q)| sb.iter().filter(|(r, s)| proper_cross(p, q, r, s)).count()).sum()
}

pub fn oracle_self_crossings(c: &PolyCurve) -> usize {
    let s = segs(c);
    let mut n = 0;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            if proper_cross(&s[i].0, &s[i].1, &s[j].0, &s[j].1) {
                n += 1;
            }
        }
    }
    n
}

/// Winding number from an upward vertical ray, half-open in x.
pub fn oracle_winding(c: &PolyCurve, p: &Point) -> i64 {
    let mut w = 0;
    for (a, b) in segs(c) {
        if a.x <= p.x && p.x < b.x && side(&a, &b, p) < 0 {
            w -= 1;
        } else if b.x <= p.x && p.x < a.x && side(&a, &b, p) > 0 {
            w += 1;
        }
    }
    w
}

/// Closed polygon with `n` vertices at random coordinates in
/// `[-range, range]`, starting at `start` when given.
pub fn random_polygon(r: &mut ChaCha8Rng, n: usize, range: i64, start: Option<&Point>) -> Option<PolyCurve> {
    let mut v = Vec::with_capacity(n);
    if let Some(s) = start {
        v.push(s.clone());
    }
    while v.len() < n {
        v.push(pt(r.gen_range(-range..=range), r.gen_range(-range..=range)));
    }
    PolyCurve::closed(v).ok()
}

/// A random closed polygon in general position with at most `max_vertices`
/// vertices.
pub fn random_general_polygon(r: &mut ChaCha8Rng, max_vertices: usize) -> PolyCurve {
    loop {
        let n = r.gen_range(3..=max_vertices);
        if let Some(c) = random_polygon(r, n, 1000, None) {
            if curve_contact_violations(std::slice::from_ref(&c)).is_empty() {
                return c;
            }
        }
    }
}

/// A family of random closed polygons in general position as a whole.
pub fn random_general_family(r: &mut ChaCha8Rng, curves: usize, max_vertices: usize) -> Vec<PolyCurve> {
    loop {
        let fam: Vec<PolyCurve> = (0..curves).map(|_| random_general_polygon(r, max_vertices)).collect();
        if curve_contact_violations(&fam).is_empty() {
            return fam;
        }
    }
}

/// Whether `p` lies on `c`.
pub fn on_curve(c: &PolyCurve, p: &Point) -> bool {
    segs(c).iter().any(|(a, b)| {
        side(a, b, p) == 0
            && p.x >= a.x.clone().min(b.x.clone())
            && p.x <= a.x.clone().max(b.x.clone())
            && p.y >= a.y.clone().min(b.y.clone())
            && p.y <= a.y.clone().max(b.y.clone())
    })
}
