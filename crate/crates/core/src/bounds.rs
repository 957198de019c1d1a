//! Exact evaluators for the crossing and loop-count bounds, and an auditor
//! that compares measured instances against them.
//!
//! Logarithms are never taken in floating point: `log2` of a rational is
//! enclosed between two rationals by fixed-point repeated squaring with
//! directed rounding, and every inequality is checked on the conservative
//! side of that enclosure.

use num_bigint::{BigInt, BigUint};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{family_crossing_counts, GeometryError, Rational};
use crate::homotopy::{validate_nonhomotopic, DrawnMultigraph, HomotopyError};

/// Values wider than this many bits are only kept in log2 form.
pub const DEFAULT_BIT_BUDGET: u64 = 1 << 20;

const LOG2_BITS: u32 = 96;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
}

fn ratio(n: u64, d: u64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

// ---------------------------------------------------------------------------
// log2 enclosures.

/// Rationals `(lo, hi)` with `lo <= log2(q) <= hi` and `hi - lo <= 2^-bits`.
/// Exact (`lo == hi`) when `q` is a power of two.
pub fn log2_enclosure(q: &Rational, bits: u32) -> (Rational, Rational) {
    assert!(q.is_positive(), "log2 of a non-positive number");
    let (num, den) = (q.numer().magnitude().clone(), q.denom().magnitude().clone());
    // integer part e with 2^e <= q < 2^(e+1)
    let mut e = num.bits() as i64 - den.bits() as i64;
    let two_pow = |k: i64| -> Rational {
        if k >= 0 {
            Rational::from_integer(BigInt::one() << k as usize)
        } else {
            Rational::new(BigInt::one(), BigInt::one() << (-k) as usize)
        }
    };
    if q < &two_pow(e) {
        e -= 1;
    }
    let x = q / two_pow(e);
    let base = Rational::from_integer(BigInt::from(e));
    if x.is_one() {
        return (base.clone(), base);
    }
    // fixed point with p fractional bits; x in (1, 2)
    let p = bits as usize + 64;
    let one = BigUint::one() << p;
    let two = &one << 1usize;
    let scaled = |r: &Rational, up: bool| -> BigUint {
        let v = r.numer().magnitude() << p;
        let (d, m) = v.div_rem(r.denom().magnitude());
        if up && !m.is_zero() {
            d + 1u32
        } else {
            d
        }
    };
    let mut lo_x = scaled(&x, false);
    let mut hi_x = scaled(&x, true);
    let mut lo_bits = BigUint::zero();
    let mut hi_bits = BigUint::zero();
    for _ in 0..bits {
        lo_x = (&lo_x * &lo_x) >> p;
        let sq = &hi_x * &hi_x;
        hi_x = if (&sq % &one).is_zero() { sq >> p } else { (sq >> p) + 1u32 };
        lo_bits <<= 1usize;
        hi_bits <<= 1usize;
        if lo_x >= two {
            lo_bits += 1u32;
            lo_x >>= 1usize;
        }
        if hi_x >= two {
            hi_bits += 1u32;
            hi_x = (&hi_x + 1u32) >> 1usize;
        }
    }
    let denom = BigInt::one() << bits as usize;
    let lo = &base + Rational::new(BigInt::from(lo_bits), denom.clone());
    let hi = &base + Rational::new(BigInt::from(hi_bits) + 1, denom);
    (lo, hi)
}

/// `log2(q)` when `q` is an exact power of two.
pub fn exact_log2(q: &Rational) -> Option<i64> {
    let (lo, hi) = log2_enclosure(q, 1);
    (lo == hi).then(|| lo.to_integer().to_i64().unwrap())
}

/// `ceil(2 * log2(2m)^2)`, the loop budget of the three-vertex construction.
pub fn case_a_k(m: u64) -> u64 {
    let q = Rational::from_integer(BigInt::from(2 * m));
    let two = Rational::from_integer(BigInt::from(2));
    let mut bits = 32;
    loop {
        let (lo, hi) = log2_enclosure(&q, bits);
        let a = (&two * &lo * &lo).ceil();
        let b = (&two * &hi * &hi).ceil();
        if a == b || lo == hi {
            return b.to_integer().to_u64().unwrap();
        }
        bits *= 2;
    }
}

// ---------------------------------------------------------------------------
// Crossing-number bounds.

/// `m^2 / (24 n)`, valid for `n > 1` and `m > 4n`.
pub fn cr_lower_thm1(n: u64, m: u64) -> Result<Rational, BoundsError> {
    if n <= 1 || m <= 4 * n {
        return Err(BoundsError::ParameterOutOfRange(format!(
            "need n > 1 and m > 4n, got n = {n}, m = {m}"
        )));
    }
    Ok(ratio(m * m, 24 * n))
}

/// `C(m,2) - (m^2/2)(1 - 1/(3n-3))`: the fewest crossing edge pairs a
/// non-homotopic multigraph can have. May be negative (vacuous).
pub fn crossing_pair_lower(n: u64, m: u64) -> Result<Rational, BoundsError> {
    if n < 2 {
        return Err(BoundsError::ParameterOutOfRange(format!("need n >= 2, got {n}")));
    }
    let pairs = ratio(m * m.saturating_sub(1), 2);
    let keep = Rational::one() - ratio(1, 3 * n - 3);
    Ok(pairs - ratio(m * m, 2) * keep)
}

/// A rational upper bound on a real quantity, exact when flagged.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UpperBound {
    #[serde(serialize_with = "crate::interface::ser_rational")]
    pub value: Rational,
    pub exact: bool,
}

/// `30 (m^2/n) log2^2(m/n)`, exact when `m/n` is a power of two.
pub fn cr_upper_thm2(n: u64, m: u64) -> Result<UpperBound, BoundsError> {
    if n < 2 || m <= 4 * n {
        return Err(BoundsError::ParameterOutOfRange(format!(
            "need n >= 2 and m > 4n, got n = {n}, m = {m}"
        )));
    }
    let (_, hi) = log2_enclosure(&ratio(m, n), LOG2_BITS);
    let exact = exact_log2(&ratio(m, n)).is_some();
    let value = ratio(30 * m * m, n) * &hi * &hi;
    Ok(UpperBound { value, exact })
}

// ---------------------------------------------------------------------------
// f(n, k) bounds.

/// A possibly astronomical non-negative integer: exact below the bit budget,
/// always with a rational upper bound on its log2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundValue {
    #[serde(serialize_with = "crate::interface::ser_opt_biguint")]
    pub exact: Option<BigUint>,
    #[serde(serialize_with = "crate::interface::ser_rational")]
    pub log2_upper: Rational,
    pub provenance: String,
}

impl BoundValue {
    fn from_exact(v: BigUint, provenance: &str) -> BoundValue {
        let log2_upper = if v.is_zero() {
            Rational::zero()
        } else {
            log2_enclosure(&Rational::from_integer(BigInt::from(v.clone())), LOG2_BITS).1
        };
        BoundValue { exact: Some(v), log2_upper, provenance: provenance.into() }
    }

    /// Compares by the exact value when both are exact, else by log2 bound.
    fn no_larger_than(&self, other: &BoundValue) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a <= b,
            _ => self.log2_upper <= other.log2_upper,
        }
    }
}

/// `log2` of the closed form `2^((2k)^(2n))`, i.e. `(2k)^(2n)`.
pub fn f_upper_closed_log2(n: u64, k: u64) -> BigUint {
    Pow::pow(BigUint::from(2 * k), (2 * n) as u32)
}

/// The recursion `F(1) = 2k+1`, `F(n) = (6k F(n-1))^(2k)`, exact while its
/// values fit the bit budget.
pub fn f_upper_recursion(n: u64, k: u64, bit_budget: u64) -> BoundValue {
    let mut exact = Some(BigUint::from(2 * k + 1));
    let mut log2 = log2_enclosure(&Rational::from_integer(BigInt::from(2 * k + 1)), LOG2_BITS).1;
    let log6k = log2_enclosure(&Rational::from_integer(BigInt::from(6 * k)), LOG2_BITS).1;
    let two_k = Rational::from_integer(BigInt::from(2 * k));
    for _ in 1..n {
        log2 = &two_k * (&log6k + &log2);
        exact = match exact {
            Some(v) if log2 <= Rational::from_integer(BigInt::from(bit_budget)) => {
                Some(Pow::pow(v * (6 * k), (2 * k) as u32))
            }
            _ => None,
        };
    }
    match exact {
        Some(v) => BoundValue::from_exact(v, "recursion"),
        None => BoundValue { exact: None, log2_upper: log2, provenance: "recursion".into() },
    }
}

pub fn f_upper(n: u64, k: u64) -> Result<BoundValue, BoundsError> {
    f_upper_with_budget(n, k, DEFAULT_BIT_BUDGET)
}

/// Smallest of the applicable upper bounds on f(n, k).
pub fn f_upper_with_budget(n: u64, k: u64, bit_budget: u64) -> Result<BoundValue, BoundsError> {
    if n == 0 || k == 0 {
        return Err(BoundsError::ParameterOutOfRange(format!("need n, k >= 1, got n = {n}, k = {k}")));
    }
    if n == 1 {
        return Ok(BoundValue::from_exact(BigUint::from(2 * k + 1), "winding"));
    }
    let rec = f_upper_recursion(n, k, bit_budget);
    let closed_log2 = f_upper_closed_log2(n, k);
    let closed = if closed_log2 <= BigUint::from(bit_budget) {
        let shift = closed_log2.to_usize().unwrap();
        BoundValue::from_exact(BigUint::one() << shift, "closed form")
    } else {
        BoundValue {
            exact: None,
            log2_upper: Rational::from_integer(BigInt::from(closed_log2)),
            provenance: "closed form".into(),
        }
    };
    Ok(if rec.no_larger_than(&closed) { rec } else { closed })
}

/// Largest of the applicable lower bounds on f(n, k), n >= 2.
pub fn f_lower(n: u64, k: u64) -> Result<BigUint, BoundsError> {
    if n < 2 || k == 0 {
        return Err(BoundsError::ParameterOutOfRange(format!("need n >= 2, k >= 1, got n = {n}, k = {k}")));
    }
    let mut best = BigUint::zero();
    // elementary loops with few sign changes; f is monotone in k
    let kk = k.min(n);
    let sum: BigUint = (0..kk).map(|j| binomial(n - 1, j)).sum();
    best = best.max(sum * 2u32);
    if n >= 2 * k {
        // ceil((n/k)^(k-1))
        let num = Pow::pow(BigUint::from(n), (k - 1) as u32);
        let den = Pow::pow(BigUint::from(k), (k - 1) as u32);
        best = best.max(num.div_ceil(&den));
    } else {
        // 2^(sqrt(nk)/3), rounded down in the exponent
        let e = (n * k).sqrt() / 3;
        best = best.max(BigUint::one() << e as usize);
    }
    if k > 9 * n {
        let j = ((k - 1) / n).sqrt();
        if j >= 3 {
            best = best.max(BigUint::one() << (j * (n - 1)) as usize);
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Audits.

/// One asserted comparison in a report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub measured: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, expected: impl Into<String>, measured: impl Into<String>, pass: bool) -> Check {
        Check { name: name.into(), expected: expected.into(), measured: measured.into(), pass }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub n: u64,
    pub m: u64,
    pub cr: u64,
    pub crossing_pairs: u64,
    pub checks: Vec<Check>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn fmt_rat(r: &Rational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Measures `g` and checks it against the lower bounds, plus the
/// construction upper bound when `construction_bound` is set.
pub fn audit_instance(g: &DrawnMultigraph, construction_bound: bool) -> Result<AuditReport, BoundsError> {
    let report = validate_nonhomotopic(g)?;
    if !report.is_empty() {
        return Err(BoundsError::InvalidInstance(format!(
            "{} trivial loops, {} homotopic pairs",
            report.trivial_loops.len(),
            report.homotopic_pairs.len()
        )));
    }
    let counts = family_crossing_counts(&g.curves())?;
    let (n, m) = (g.vertex_count() as u64, g.edge_count() as u64);
    let cr = counts.total() as u64;
    let pairs = counts.crossing_pairs() as u64;
    let mut checks = Vec::new();
    if n >= 2 {
        let lower = crossing_pair_lower(n, m)?;
        checks.push(Check::new(
            "crossing pairs >= C(m,2) - (m^2/2)(1 - 1/(3n-3))",
            fmt_rat(&lower),
            pairs.to_string(),
            Rational::from_integer(BigInt::from(pairs)) >= lower,
        ));
    }
    if n > 1 && m > 4 * n {
        let lower = cr_lower_thm1(n, m)?;
        checks.push(Check::new(
            "cr >= m^2/(24n)",
            fmt_rat(&lower),
            cr.to_string(),
            Rational::from_integer(BigInt::from(cr)) >= lower,
        ));
        if construction_bound {
            let upper = cr_upper_thm2(n, m)?;
            checks.push(Check::new(
                "cr <= 30 (m^2/n) log2^2(m/n)",
                fmt_rat(&upper.value),
                cr.to_string(),
                Rational::from_integer(BigInt::from(cr)) <= upper.value,
            ));
        }
    }
    Ok(AuditReport { n, m, cr, crossing_pairs: pairs, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        crate::geometry::rat(n, d)
    }

    #[test]
    fn thm1_values() {
        assert_eq!(cr_lower_thm1(2, 9).unwrap(), r(27, 16));
        assert_eq!(cr_lower_thm1(3, 13).unwrap(), r(169, 72));
        assert!(cr_lower_thm1(3, 13).is_ok());
        assert!(cr_lower_thm1(3, 12).is_err());
        assert!(cr_lower_thm1(1, 100).is_err());
    }

    #[test]
    fn crossing_pair_values() {
        assert_eq!(crossing_pair_lower(2, 9).unwrap(), r(9, 1));
        assert_eq!(crossing_pair_lower(2, 2).unwrap(), r(-1, 3));
        for n in 2..8u64 {
            for m in 4 * n + 1..4 * n + 40 {
                let v = crossing_pair_lower(n, m).unwrap();
                let w = cr_lower_thm1(n, m).unwrap() - r(m as i64, 2);
                assert!(v >= w, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn thm2_values() {
        let b = cr_upper_thm2(4, 32).unwrap();
        assert_eq!((b.value, b.exact), (r(69120, 1), true));
        assert_eq!(cr_upper_thm2(2, 16).unwrap().value, r(34560, 1));
        let b = cr_upper_thm2(3, 13).unwrap();
        assert!(!b.exact);
        let truth = 30.0 * 169.0 / 3.0 * (13.0f64 / 3.0).log2().powi(2);
        assert!(b.value.to_f64().unwrap() >= truth);
        assert!(b.value.to_f64().unwrap() - truth < 1e-9);
    }

    #[test]
    fn log2_enclosures_bracket_the_float_value() {
        for (n, d) in [(3, 1), (13, 3), (1, 3), (1000, 7), (5, 4), (1023, 1024)] {
            let (lo, hi) = log2_enclosure(&r(n, d), 40);
            let f = (n as f64 / d as f64).log2();
            assert!(lo.to_f64().unwrap() <= f + 1e-12 && f - 1e-12 <= hi.to_f64().unwrap());
            assert!(&hi - &lo <= r(1, 1 << 40));
        }
        assert_eq!(exact_log2(&r(8, 1)), Some(3));
        assert_eq!(exact_log2(&r(1, 4)), Some(-2));
        assert_eq!(exact_log2(&r(6, 1)), None);
    }

    #[test]
    fn case_a_k_matches_float_formula() {
        for m in 5..300u64 {
            let f = 2.0 * ((2 * m) as f64).log2().powi(2);
            assert_eq!(case_a_k(m), f.ceil() as u64, "m={m}");
        }
    }

    #[test]
    fn f_upper_values() {
        assert_eq!(f_upper(1, 3).unwrap().exact, Some(BigUint::from(7u32)));
        let v = f_upper(2, 1).unwrap();
        assert_eq!(v.exact, Some(BigUint::from(324u32)));
        assert_eq!(v.provenance, "recursion");
        assert_eq!(f_upper_closed_log2(2, 2), BigUint::from(256u32));
        let f2 = Pow::pow(BigUint::from(126u32), 6u32);
        let f3 = Pow::pow(f2 * 18u32, 6u32);
        assert_eq!(f_upper(3, 3).unwrap().exact, Some(f3));
        let big = f_upper(6, 40).unwrap();
        assert!(big.exact.is_none());
        assert!(big.log2_upper > Rational::from_integer(BigInt::from(1u64 << 20)));
    }

    #[test]
    fn f_lower_values() {
        assert_eq!(f_lower(8, 2).unwrap(), BigUint::from(16u32));
        for n in 2..12 {
            assert!(f_lower(n, n).unwrap() >= BigUint::one() << n as usize);
        }
        assert!(f_lower(2, 18).unwrap() >= BigUint::from(4u32));
    }

    #[test]
    fn monotone_and_consistent() {
        for n in 1..=3u64 {
            for k in 1..=3u64 {
                let u = f_upper(n, k).unwrap();
                if n < 3 {
                    assert!(u.no_larger_than(&f_upper(n + 1, k).unwrap()));
                }
                if k < 3 {
                    assert!(u.no_larger_than(&f_upper(n, k + 1).unwrap()));
                }
                if n >= 2 {
                    let l = f_lower(n, k).unwrap();
                    if let Some(e) = &u.exact {
                        assert!(&l <= e);
                    }
                }
            }
        }
    }
}
