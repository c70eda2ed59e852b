//! Exact rationals and outward-rounded rational intervals.
//!
//! Nothing in here touches floating point except [`to_f64`], which exists
//! for plotting and human-readable summaries only.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub type Exact = BigRational;

pub const DEFAULT_PRECISION: u32 = 128;

pub fn rat(n: i64, d: i64) -> Exact {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Exact {
    BigRational::from_integer(BigInt::from(n))
}

pub fn pow2(e: i64) -> Exact {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

pub fn powi(x: &Exact, n: u32) -> Exact {
    num_traits::pow(x.clone(), n as usize)
}

/// floor(log2 |x|) for nonzero x.
pub fn log2_floor(x: &Exact) -> i64 {
    let a = x.abs();
    let e = a.numer().bits() as i64 - a.denom().bits() as i64;
    if a >= pow2(e) {
        e
    } else {
        e - 1
    }
}

pub fn floor_dyadic(x: &Exact, k: i64) -> Exact {
    let s = pow2(k);
    (x * &s).floor() / s
}

pub fn ceil_dyadic(x: &Exact, k: i64) -> Exact {
    let s = pow2(k);
    (x * &s).ceil() / s
}

pub fn to_f64(x: &Exact) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_positive() {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    })
}

pub fn min_exact<'a>(a: &'a Exact, b: &'a Exact) -> &'a Exact {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn max_exact<'a>(a: &'a Exact, b: &'a Exact) -> &'a Exact {
    if a >= b {
        a
    } else {
        b
    }
}

/// Parse `"3/10"`, `"-7"`, `"0.095"`, `".5"` or `"1.5e-3"` into an exact rational.
pub fn parse_exact(s: &str) -> Result<Exact> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = t[i + 1..].parse().map_err(|_| bad())?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (neg, body) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (ip, fp) = body.split_once('.').unwrap_or((body, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    if !ip.bytes().chain(fp.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{ip}{fp}").parse().map_err(|_| bad())?;
    let scale = exp - fp.len() as i64;
    let ten = BigInt::from(10u32);
    let mut v = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        v = -v;
    }
    Ok(v)
}

/// `p/q`, or `p` for integers.
pub fn exact_string(x: &Exact) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Round to `digits` places after the point, ties away from zero.
pub fn format_decimal(x: &Exact, digits: usize) -> String {
    let ten = BigInt::from(10u32);
    let scale = num_traits::pow(ten, digits);
    let a = x.abs() * BigRational::from_integer(scale.clone());
    let n = (a + rat(1, 2)).floor().to_integer();
    let (ip, fp) = n.div_rem(&scale);
    let sign = if x.is_negative() && !n.is_zero() {
        "-"
    } else {
        ""
    };
    if digits == 0 {
        format!("{sign}{ip}")
    } else {
        format!("{sign}{ip}.{:0>width$}", fp.to_string(), width = digits)
    }
}

/// Three-valued truth for certified predicates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Certainty {
    True,
    False,
    Unknown,
}

impl Certainty {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Certainty::True
        } else {
            Certainty::False
        }
    }

    pub fn and(self, other: Certainty) -> Certainty {
        match (self, other) {
            (Certainty::False, _) | (_, Certainty::False) => Certainty::False,
            (Certainty::True, Certainty::True) => Certainty::True,
            _ => Certainty::Unknown,
        }
    }

    pub fn is_true(self) -> bool {
        self == Certainty::True
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Comparison {
    Less,
    Greater,
    Overlapping,
}

/// Closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Exact,
    hi: Exact,
}

impl Interval {
    pub fn new(lo: Exact, hi: Exact) -> Result<Self> {
        if lo > hi {
            return Err(Error::Domain(format!(
                "inverted interval [{}, {}]",
                exact_string(&lo),
                exact_string(&hi)
            )));
        }
        Ok(Interval { lo, hi })
    }

    /// Builds `[min(a,b), max(a,b)]`.
    pub fn spanning(a: Exact, b: Exact) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn point(x: Exact) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn zero() -> Self {
        Interval::point(Exact::zero())
    }

    pub fn from_rat(n: i64, d: i64) -> Self {
        Interval::point(rat(n, d))
    }

    pub fn lo(&self) -> &Exact {
        &self.lo
    }

    pub fn hi(&self) -> &Exact {
        &self.hi
    }

    pub fn into_bounds(self) -> (Exact, Exact) {
        (self.lo, self.hi)
    }

    pub fn width(&self) -> Exact {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Exact {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Exact) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersection(&self, other: &Interval) -> Option<Interval> {
        let lo = max_exact(&self.lo, &other.lo);
        let hi = min_exact(&self.hi, &other.hi);
        (lo <= hi).then(|| Interval {
            lo: lo.clone(),
            hi: hi.clone(),
        })
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: min_exact(&self.lo, &other.lo).clone(),
            hi: max_exact(&self.hi, &other.hi).clone(),
        }
    }

    pub fn scale(&self, k: &Exact) -> Interval {
        Interval::spanning(&self.lo * k, &self.hi * k)
    }

    pub fn shift(&self, k: &Exact) -> Interval {
        Interval {
            lo: &self.lo + k,
            hi: &self.hi + k,
        }
    }

    pub fn recip(&self) -> Result<Interval> {
        if self.contains(&Exact::zero()) {
            return Err(Error::Domain(
                "reciprocal of an interval containing 0".into(),
            ));
        }
        Ok(Interval {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        })
    }

    pub fn div(&self, other: &Interval) -> Result<Interval> {
        Ok(self * &other.recip()?)
    }

    pub fn sqr(&self) -> Interval {
        let a = &self.lo * &self.lo;
        let b = &self.hi * &self.hi;
        if self.lo.is_negative() && self.hi.is_positive() {
            Interval {
                lo: Exact::zero(),
                hi: if a >= b { a } else { b },
            }
        } else {
            Interval::spanning(a, b)
        }
    }

    pub fn abs(&self) -> Interval {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            -self
        } else {
            Interval {
                lo: Exact::zero(),
                hi: max_exact(&-&self.lo, &self.hi).clone(),
            }
        }
    }

    pub fn min(&self, other: &Interval) -> Interval {
        Interval {
            lo: min_exact(&self.lo, &other.lo).clone(),
            hi: min_exact(&self.hi, &other.hi).clone(),
        }
    }

    pub fn max(&self, other: &Interval) -> Interval {
        Interval {
            lo: max_exact(&self.lo, &other.lo).clone(),
            hi: max_exact(&self.hi, &other.hi).clone(),
        }
    }

    pub fn compare(&self, other: &Interval) -> Comparison {
        if self.hi < other.lo {
            Comparison::Less
        } else if self.lo > other.hi {
            Comparison::Greater
        } else {
            Comparison::Overlapping
        }
    }

    /// Certified `self ≤ other` for every pair of members.
    pub fn le(&self, other: &Interval) -> Certainty {
        if self.hi <= other.lo {
            Certainty::True
        } else if self.lo > other.hi {
            Certainty::False
        } else {
            Certainty::Unknown
        }
    }

    pub fn lt(&self, other: &Interval) -> Certainty {
        if self.hi < other.lo {
            Certainty::True
        } else if self.lo >= other.hi {
            Certainty::False
        } else {
            Certainty::Unknown
        }
    }

    pub fn ge(&self, other: &Interval) -> Certainty {
        other.le(self)
    }

    pub fn gt(&self, other: &Interval) -> Certainty {
        other.lt(self)
    }

    /// Widen to dyadic endpoints carrying about `bits` significant bits.
    pub fn round_outward(&self, bits: u32) -> Interval {
        let mag = max_exact(&self.lo.abs(), &self.hi.abs()).clone();
        if mag.is_zero() {
            return self.clone();
        }
        let k = bits as i64 - log2_floor(&mag);
        let budget = bits as u64 + 64;
        let small = |x: &Exact| x.numer().bits() + x.denom().bits() <= budget;
        // Endpoints that are already compact stay exact.
        let lo = if small(&self.lo) {
            self.lo.clone()
        } else {
            floor_dyadic(&self.lo, k)
        };
        let hi = if small(&self.hi) {
            self.hi.clone()
        } else {
            ceil_dyadic(&self.hi, k)
        };
        Interval { lo, hi }
    }

    pub fn sqrt(&self, bits: u32) -> Result<Interval> {
        if self.lo.is_negative() {
            return Err(Error::Domain(format!(
                "square root of interval with negative lower end {}",
                exact_string(&self.lo)
            )));
        }
        let lo = sqrt_bound(&self.lo, bits, false);
        let hi = sqrt_bound(&self.hi, bits, true);
        Ok(Interval { lo, hi })
    }

    pub fn to_f64_mid(&self) -> f64 {
        to_f64(&self.mid())
    }

    /// Midpoint printed to `digits` places, with the half-width as a bound.
    pub fn describe(&self, digits: usize) -> String {
        let r = self.width() / int(2);
        if r.is_zero() {
            format_decimal(&self.lo, digits)
        } else {
            format!(
                "{} ± {:.3e}",
                format_decimal(&self.mid(), digits),
                to_f64(&r)
            )
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            exact_string(&self.lo),
            exact_string(&self.hi)
        )
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Interval", 3)?;
        st.serialize_field("lo", &exact_string(&self.lo))?;
        st.serialize_field("hi", &exact_string(&self.hi))?;
        st.serialize_field("approx", &self.describe(15))?;
        st.end()
    }
}

/// Serde adapter writing an [`Exact`] as its `p/q` string.
pub mod serde_exact {
    use super::{exact_string, Exact};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &Exact, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&exact_string(x))
    }
}

pub mod serde_exact_vec {
    use super::{exact_string, Exact};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(xs: &[Exact], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(exact_string))
    }
}

pub mod serde_opt_exact_vec {
    use super::{exact_string, Exact};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(xs: &Option<Vec<Exact>>, s: S) -> Result<S::Ok, S::Error> {
        match xs {
            Some(v) => s.collect_seq(v.iter().map(exact_string)),
            None => s.serialize_none(),
        }
    }
}

macro_rules! interval_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Interval> for &Interval {
            type Output = Interval;
            fn $m(self, rhs: &Interval) -> Interval {
                let f: fn(&Interval, &Interval) -> Interval = $body;
                f(self, rhs)
            }
        }
        impl $tr<Interval> for Interval {
            type Output = Interval;
            fn $m(self, rhs: Interval) -> Interval {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Interval> for Interval {
            type Output = Interval;
            fn $m(self, rhs: &Interval) -> Interval {
                (&self).$m(rhs)
            }
        }
        impl $tr<Interval> for &Interval {
            type Output = Interval;
            fn $m(self, rhs: Interval) -> Interval {
                self.$m(&rhs)
            }
        }
    };
}

interval_binop!(Add, add, |a, b| Interval {
    lo: &a.lo + &b.lo,
    hi: &a.hi + &b.hi,
});
interval_binop!(Sub, sub, |a, b| Interval {
    lo: &a.lo - &b.hi,
    hi: &a.hi - &b.lo,
});
interval_binop!(Mul, mul, |a, b| {
    if a.is_point() {
        return b.scale(&a.lo);
    }
    if b.is_point() {
        return a.scale(&b.lo);
    }
    let ps = [&a.lo * &b.lo, &a.lo * &b.hi, &a.hi * &b.lo, &a.hi * &b.hi];
    let mut lo = &ps[0];
    let mut hi = &ps[0];
    for p in &ps[1..] {
        if p < lo {
            lo = p;
        }
        if p > hi {
            hi = p;
        }
    }
    Interval {
        lo: lo.clone(),
        hi: hi.clone(),
    }
});

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        -&self
    }
}

fn perfect_square_root(x: &Exact) -> Option<Exact> {
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    (&n * &n == *x.numer() && &d * &d == *x.denom()).then(|| BigRational::new(n, d))
}

/// Dyadic bound on √x with `bits + 2` fractional bits, or √x itself when rational.
fn sqrt_bound(x: &Exact, bits: u32, upper: bool) -> Exact {
    if let Some(r) = perfect_square_root(x) {
        return r;
    }
    let p = bits as i64 + 2;
    let scaled = x * pow2(2 * p);
    let denom = pow2(p);
    if upper {
        let m = scaled.ceil().to_integer();
        let mut t = m.sqrt();
        if &t * &t < m {
            t += 1;
        }
        BigRational::from_integer(t) / denom
    } else {
        let n = scaled.floor().to_integer();
        BigRational::from_integer(n.sqrt()) / denom
    }
}

pub fn sqrt_exact(x: &Exact, bits: u32) -> Result<Interval> {
    Interval::point(x.clone()).sqrt(bits)
}

/// Σ y^(2j+1)/(2j+1) for 0 ≤ y < 1/2, tail included.
fn atanh_series(y: &Exact, bits: u32) -> Interval {
    let work = bits + 24;
    if y.is_zero() {
        return Interval::zero();
    }
    let tol = pow2(-(work as i64));
    let y = Interval::point(y.clone());
    let y2 = y.sqr().round_outward(work);
    let mut pw = y.round_outward(work);
    let mut sum = Interval::zero();
    let mut j: i64 = 0;
    loop {
        sum = (&sum + pw.scale(&rat(1, 2 * j + 1))).round_outward(work);
        pw = (&pw * &y2).round_outward(work);
        j += 1;
        if pw.hi() < &tol {
            break;
        }
    }
    // Remaining terms: at most pw/(2j+1) · 1/(1−y²) ≤ pw·(4/3)/(2j+1).
    let tail = pw.hi() * rat(4, 3) / int(2 * j + 1);
    Interval {
        lo: sum.lo,
        hi: sum.hi + tail,
    }
}

/// Σ (−1)^j u^(2j+1)/(2j+1) for 0 ≤ u ≤ 1/4, tail included.
fn atan_series(u: &Interval, bits: u32) -> Interval {
    let work = bits + 24;
    let tol = pow2(-(work as i64));
    let u2 = u.sqr().round_outward(work);
    let mut pw = u.round_outward(work);
    let mut sum = Interval::zero();
    let mut j: i64 = 0;
    loop {
        let term = pw.scale(&rat(1, 2 * j + 1));
        sum = if j % 2 == 0 {
            &sum + &term
        } else {
            &sum - &term
        }
        .round_outward(work);
        pw = (&pw * &u2).round_outward(work);
        j += 1;
        if pw.hi() < &tol {
            break;
        }
    }
    let tail = pw.hi() / int(2 * j + 1);
    Interval {
        lo: sum.lo - &tail,
        hi: sum.hi + tail,
    }
}

fn cached(
    table: &'static OnceLock<Mutex<HashMap<u32, Interval>>>,
    bits: u32,
    make: impl FnOnce(u32) -> Interval,
) -> Interval {
    let map = table.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = map.lock().expect("constant cache poisoned").get(&bits) {
        return v.clone();
    }
    let v = make(bits);
    map.lock()
        .expect("constant cache poisoned")
        .insert(bits, v.clone());
    v
}

static LN2: OnceLock<Mutex<HashMap<u32, Interval>>> = OnceLock::new();
static PI: OnceLock<Mutex<HashMap<u32, Interval>>> = OnceLock::new();
static SQRT3: OnceLock<Mutex<HashMap<u32, Interval>>> = OnceLock::new();

pub fn ln2(bits: u32) -> Interval {
    cached(&LN2, bits, |b| atanh_series(&rat(1, 3), b).scale(&int(2)))
}

/// Machin: π = 16·atan(1/5) − 4·atan(1/239).
pub fn pi(bits: u32) -> Interval {
    cached(&PI, bits, |b| {
        let a = atan_series(&Interval::from_rat(1, 5), b + 8).scale(&int(16));
        let c = atan_series(&Interval::from_rat(1, 239), b + 8).scale(&int(4));
        (a - c).round_outward(b + 4)
    })
}

pub fn sqrt3(bits: u32) -> Interval {
    cached(&SQRT3, bits, |b| {
        sqrt_exact(&int(3), b).expect("3 is positive")
    })
}

fn ln_point(x: &Exact, bits: u32) -> Interval {
    if x.is_one() {
        return Interval::zero();
    }
    let k = log2_floor(x);
    let m = x / pow2(k);
    let y = (&m - int(1)) / (&m + int(1));
    let s = atanh_series(&y, bits).scale(&int(2));
    (s + ln2(bits + 8).scale(&int(k))).round_outward(bits + 8)
}

/// Natural logarithm; requires `x.lo > 0`.
pub fn ln(x: &Interval, bits: u32) -> Result<Interval> {
    if !x.lo().is_positive() {
        return Err(Error::Domain("logarithm of a nonpositive interval".into()));
    }
    let lo = ln_point(x.lo(), bits).lo;
    let hi = if x.is_point() {
        ln_point(x.lo(), bits).hi
    } else {
        ln_point(x.hi(), bits).hi
    };
    Ok(Interval { lo, hi })
}

fn atan_point(x: &Exact, bits: u32) -> Interval {
    if x.is_zero() {
        return Interval::zero();
    }
    if x.is_negative() {
        return -atan_point(&-x, bits);
    }
    if x > &int(1) {
        let half_pi = pi(bits + 8).scale(&rat(1, 2));
        return (half_pi - atan_point(&x.recip(), bits)).round_outward(bits + 8);
    }
    // Two half-angle reductions land in [0, tan(π/16)].
    let work = bits + 24;
    let mut u = Interval::point(x.clone());
    for _ in 0..2 {
        let root = (Interval::point(int(1)) + u.sqr())
            .sqrt(work)
            .expect("1 + u² is positive");
        let den = Interval::point(int(1)) + root;
        u = u.div(&den).expect("denominator ≥ 2").round_outward(work);
    }
    atan_series(&u, bits).scale(&int(4)).round_outward(bits + 8)
}

/// Arctangent, monotone so endpoints suffice.
pub fn atan(x: &Interval, bits: u32) -> Interval {
    let lo = atan_point(x.lo(), bits).lo;
    let hi = if x.is_point() {
        atan_point(x.lo(), bits).hi
    } else {
        atan_point(x.hi(), bits).hi
    };
    Interval { lo, hi }
}
