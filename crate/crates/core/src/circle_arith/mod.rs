//! Exact arithmetic on real quadratic surds `(a + b√d)/c` and on points of
//! the circle `T = [0, 1)`.
//!
//! Every rotation number, shift and discontinuity point handled by this crate
//! lives in a single field `Q(√d)`, so all comparisons are decided by integer
//! arithmetic. Values from two different non-rational fields are never mixed;
//! such operations fail with [`Error::IncomparableRepresentations`].

pub(crate) mod fixed;
mod parse;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub use parse::{parse_real, ParsedReal};

/// Number of decimal digits used when rendering values for humans.
pub const DEFAULT_DIGITS: usize = 50;

/// An exact real number `(a + b·√d) / c`.
///
/// The representation is canonical: `c > 0`, `gcd(a, b, c) = 1`, `d` is
/// squarefree, and `b = 0` exactly when `d = 0`. Structural equality is
/// therefore numeric equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RealValue {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: u64,
}

/// Splits `d` into `s² · d'` with `d'` squarefree.
fn squarefree_part(mut d: u64) -> (u64, u64) {
    let mut s = 1u64;
    let mut p = 2u64;
    while p.saturating_mul(p) <= d {
        let pp = p * p;
        while d.is_multiple_of(pp) {
            d /= pp;
            s *= p;
        }
        p += 1;
    }
    (s, d)
}

/// Sign of `a + b·√d` for squarefree `d`, decided without floating point.
pub(crate) fn surd_sign(a: &BigInt, b: &BigInt, d: u64) -> Ordering {
    if b.is_zero() || d == 0 {
        return a.sign().cmp_zero();
    }
    match (a.sign().cmp_zero(), b.sign().cmp_zero()) {
        (Ordering::Equal, sb) => sb,
        (sa, sb) if sa == sb => sa,
        (sa, _) => {
            let lhs = a * a;
            let rhs = b * b * BigInt::from(d);
            match sa {
                Ordering::Greater => lhs.cmp(&rhs),
                _ => rhs.cmp(&lhs),
            }
        }
    }
}

trait SignExt {
    fn cmp_zero(self) -> Ordering;
}

impl SignExt for num_bigint::Sign {
    fn cmp_zero(self) -> Ordering {
        match self {
            num_bigint::Sign::Minus => Ordering::Less,
            num_bigint::Sign::NoSign => Ordering::Equal,
            num_bigint::Sign::Plus => Ordering::Greater,
        }
    }
}

/// `⌊b·√d⌋` for squarefree `d > 1` (never a perfect square unless `b = 0`).
fn floor_surd_part(b: &BigInt, d: u64) -> BigInt {
    if b.is_zero() || d == 0 {
        return BigInt::zero();
    }
    let root = (b * b * BigInt::from(d)).sqrt();
    if b.is_negative() {
        -root - 1
    } else {
        root
    }
}

impl RealValue {
    /// Builds `(a + b√d)/c`, normalizing to the canonical form.
    pub fn new(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: u64,
    ) -> Result<Self> {
        let (mut a, mut b, mut c) = (a.into(), b.into(), c.into());
        if c.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        let (s, d) = squarefree_part(d);
        b *= BigInt::from(s);
        Ok(Self::normalized(a, b, c, d))
    }

    fn normalized(mut a: BigInt, mut b: BigInt, mut c: BigInt, mut d: u64) -> Self {
        debug_assert!(c.is_positive());
        if d == 1 {
            a += &b;
            b = BigInt::zero();
        }
        if d <= 1 || b.is_zero() {
            b = BigInt::zero();
            d = 0;
        }
        let g = a.gcd(&b).gcd(&c);
        if !g.is_one() && !g.is_zero() {
            a /= &g;
            b /= &g;
            c /= &g;
        }
        RealValue { a, b, c, d }
    }

    pub fn integer(n: impl Into<BigInt>) -> Self {
        RealValue {
            a: n.into(),
            b: BigInt::zero(),
            c: BigInt::one(),
            d: 0,
        }
    }

    pub fn rational(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self> {
        Self::new(p, 0, q, 0)
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    pub fn half() -> Self {
        RealValue {
            a: BigInt::one(),
            b: BigInt::zero(),
            c: BigInt::from(2),
            d: 0,
        }
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn c(&self) -> &BigInt {
        &self.c
    }

    /// Radicand; `0` for rationals.
    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.d == 0
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// The common radicand of two values, or an error when both are
    /// irrational over different fields.
    pub fn common_field(&self, other: &RealValue) -> Result<u64> {
        match (self.d, other.d) {
            (0, d) | (d, 0) => Ok(d),
            (d1, d2) if d1 == d2 => Ok(d1),
            (d1, d2) => Err(Error::IncomparableRepresentations(d1, d2)),
        }
    }

    pub fn checked_add(&self, other: &RealValue) -> Result<Self> {
        let d = self.common_field(other)?;
        let a = &self.a * &other.c + &other.a * &self.c;
        let b = &self.b * &other.c + &other.b * &self.c;
        Ok(Self::normalized(a, b, &self.c * &other.c, d))
    }

    pub fn checked_sub(&self, other: &RealValue) -> Result<Self> {
        self.checked_add(&other.neg_ref())
    }

    pub fn checked_mul(&self, other: &RealValue) -> Result<Self> {
        let d = self.common_field(other)?;
        let dd = BigInt::from(d);
        let a = &self.a * &other.a + &self.b * &other.b * dd;
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(Self::normalized(a, b, &self.c * &other.c, d))
    }

    pub fn checked_div(&self, other: &RealValue) -> Result<Self> {
        self.checked_mul(&other.recip()?)
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // c / (a + b√d) = c(a - b√d) / (a² - b²d)
        let norm = &self.a * &self.a - &self.b * &self.b * BigInt::from(self.d);
        let a = &self.c * &self.a;
        let b = -(&self.c * &self.b);
        Self::new(a, b, norm, self.d)
    }

    fn neg_ref(&self) -> Self {
        RealValue {
            a: -&self.a,
            b: -&self.b,
            c: self.c.clone(),
            d: self.d,
        }
    }

    pub fn mul_int(&self, k: impl Into<BigInt>) -> Self {
        let k = k.into();
        Self::normalized(&self.a * &k, &self.b * &k, self.c.clone(), self.d)
    }

    pub fn div_int(&self, k: impl Into<BigInt>) -> Result<Self> {
        let k = k.into();
        if k.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Self::new(self.a.clone(), self.b.clone(), &self.c * k, self.d)
    }

    pub fn signum(&self) -> Ordering {
        surd_sign(&self.a, &self.b, self.d)
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            self.neg_ref()
        } else {
            self.clone()
        }
    }

    /// Exact trichotomy. Fails only when both sides are irrational over
    /// different fields.
    pub fn compare(&self, other: &RealValue) -> Result<Ordering> {
        self.common_field(other)?;
        Ok(self.checked_sub(other)?.signum())
    }

    /// `⌊x⌋`, found by bracketing `b√d` between consecutive integers.
    pub fn floor(&self) -> BigInt {
        let numerator_floor = &self.a + floor_surd_part(&self.b, self.d);
        numerator_floor.div_floor(&self.c)
    }

    /// The closest integer `[x]`; exact half-integers round to the even neighbour.
    pub fn nearest_integer(&self) -> BigInt {
        let n = self.floor();
        let frac = self.checked_sub(&RealValue::integer(n.clone())).expect("same field");
        match frac.compare(&RealValue::half()).expect("rational half") {
            Ordering::Less => n,
            Ordering::Greater => n + 1,
            Ordering::Equal => {
                if n.is_even() {
                    n
                } else {
                    n + 1
                }
            }
        }
    }

    /// `‖x‖ = |x − [x]|`, the distance to the nearest integer.
    pub fn distance_to_integers(&self) -> RealValue {
        let n = RealValue::integer(self.nearest_integer());
        self.checked_sub(&n).expect("same field").abs()
    }

    /// `⟨x⟩` in the sense of `x − [x]`, a value in `[-1/2, 1/2]`.
    pub fn signed_fractional(&self) -> RealValue {
        let n = RealValue::integer(self.nearest_integer());
        self.checked_sub(&n).expect("same field")
    }

    pub fn reduce_mod_1(&self) -> CirclePoint {
        let n = RealValue::integer(self.floor());
        CirclePoint(self.checked_sub(&n).expect("same field"))
    }

    /// Diagnostic decimal rendering, truncated toward zero after `digits`
    /// fractional digits. Not used for any decision.
    pub fn to_decimal(&self, digits: usize) -> String {
        let negative = self.signum() == Ordering::Less;
        let magnitude = self.abs();
        let scale = num_traits::pow(BigInt::from(10), digits);
        let scaled = magnitude.mul_int(scale).floor();
        let mut text = scaled.to_string();
        if digits > 0 {
            if text.len() <= digits {
                text = format!("{}{}", "0".repeat(digits + 1 - text.len()), text);
            }
            text.insert(text.len() - digits, '.');
        }
        if negative {
            text.insert(0, '-');
        }
        text
    }

    /// Lossy conversion for plotting and logging.
    pub fn to_f64(&self) -> f64 {
        self.to_decimal(20).parse().unwrap_or(f64::NAN)
    }

    pub(crate) fn parts(&self) -> (&BigInt, &BigInt, &BigInt, u64) {
        (&self.a, &self.b, &self.c, self.d)
    }

}

impl PartialOrd for RealValue {
    /// `None` exactly when the two values come from different irrational fields.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.compare(other).ok()
    }
}

impl fmt::Display for RealValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            if self.c.is_one() {
                write!(f, "{}", self.a)
            } else {
                write!(f, "{}/{}", self.a, self.c)
            }
        } else {
            let sign = if self.b.is_negative() { '-' } else { '+' };
            write!(
                f,
                "({}{}{}*sqrt({}))/{}",
                self.a,
                sign,
                self.b.abs(),
                self.d,
                self.c
            )
        }
    }
}

impl std::str::FromStr for RealValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(parse_real(s, None)?.value)
    }
}

impl Serialize for RealValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("RealValue", 2)?;
        st.serialize_field("exact", &self.to_string())?;
        st.serialize_field("decimal", &self.to_decimal(DEFAULT_DIGITS))?;
        st.end()
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl<'a> $tr<&'a RealValue> for &'a RealValue {
            type Output = RealValue;
            /// Panics when the operands live in different irrational fields.
            fn $method(self, rhs: &'a RealValue) -> RealValue {
                self.$checked(rhs).expect("mixed quadratic fields")
            }
        }

        impl $tr for RealValue {
            type Output = RealValue;
            fn $method(self, rhs: RealValue) -> RealValue {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for RealValue {
    type Output = RealValue;
    fn neg(self) -> RealValue {
        self.neg_ref()
    }
}

impl Neg for &RealValue {
    type Output = RealValue;
    fn neg(self) -> RealValue {
        self.neg_ref()
    }
}

/// A point of the circle `T = [0, 1)`; the wrapped value always satisfies
/// `0 ≤ value < 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CirclePoint(RealValue);

impl CirclePoint {
    pub fn new(value: &RealValue) -> Self {
        value.reduce_mod_1()
    }

    pub fn zero() -> Self {
        CirclePoint(RealValue::zero())
    }

    pub fn value(&self) -> &RealValue {
        &self.0
    }

    pub fn into_value(self) -> RealValue {
        self.0
    }

    pub fn checked_add(&self, other: &CirclePoint) -> Result<CirclePoint> {
        Ok(self.0.checked_add(&other.0)?.reduce_mod_1())
    }

    pub fn checked_sub(&self, other: &CirclePoint) -> Result<CirclePoint> {
        Ok(self.0.checked_sub(&other.0)?.reduce_mod_1())
    }

    /// Translate by an arbitrary real value, wrapping modulo 1.
    pub fn translate(&self, by: &RealValue) -> Result<CirclePoint> {
        Ok(self.0.checked_add(by)?.reduce_mod_1())
    }
}

impl fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for CirclePoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

/// `[x]`, the closest integer to `x` (ties to even).
pub fn nearest_integer(x: &RealValue) -> BigInt {
    x.nearest_integer()
}

/// `‖x‖`, the distance from `x` to the nearest integer.
pub fn distance_to_integers(x: &RealValue) -> RealValue {
    x.distance_to_integers()
}

pub fn reduce_mod_1(x: &RealValue) -> CirclePoint {
    x.reduce_mod_1()
}

pub fn compare(x: &RealValue, y: &RealValue) -> Result<Ordering> {
    x.compare(y)
}
