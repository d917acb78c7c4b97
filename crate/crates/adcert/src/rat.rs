//! Exact rational arithmetic.
//!
//! `Rat` is an arbitrary-precision rational kept in lowest terms with a
//! positive denominator. Values whose numerator and denominator fit in an
//! `i64` are stored inline; everything else is boxed as a `BigRational`.
//! The inline representation is canonical: a boxed value never holds a
//! number that would fit inline, so `Eq`/`Ord` can compare representations
//! directly. Grid censuses spend almost all of their time in the inline
//! path.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Debug)]
enum Repr {
    /// `d > 0`, `gcd(|n|, d) == 1`.
    Small { n: i64, d: i64 },
    /// Lowest terms, positive denominator, does not fit `Small`.
    Big(Box<BigRational>),
}

/// An exact rational number.
#[derive(Clone, Debug)]
pub struct Rat(Repr);

// Binary GCDs: the reduction step of every arithmetic op, so division-free
// matters (128-bit hardware division is slow).
fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    if a <= u64::MAX as u128 && b <= u64::MAX as u128 {
        return gcd_u64(a as u64, b as u64) as u128;
    }
    let (mut a, mut b) = (a, b);
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

impl Rat {
    pub fn zero() -> Self {
        Rat(Repr::Small { n: 0, d: 1 })
    }

    pub fn one() -> Self {
        Rat(Repr::Small { n: 1, d: 1 })
    }

    /// `n/d` in lowest terms. Panics if `d == 0`.
    pub fn new(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Self::from_i128_frac(n as i128, d as i128)
    }

    pub fn from_int(n: i64) -> Self {
        Rat(Repr::Small { n, d: 1 })
    }

    fn from_i128_frac(mut n: i128, mut d: i128) -> Self {
        debug_assert!(d != 0);
        if d < 0 {
            n = -n;
            d = -d;
        }
        if n == 0 {
            return Rat::zero();
        }
        if d != 1 {
            let g = gcd_u128(n.unsigned_abs(), d as u128) as i128;
            if g != 1 {
                n /= g;
                d /= g;
            }
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Rat(Repr::Small { n, d }),
            _ => Rat(Repr::Big(Box::new(BigRational::new(
                BigInt::from(n),
                BigInt::from(d),
            )))),
        }
    }

    pub fn from_big(r: BigRational) -> Self {
        // BigRational::new keeps lowest terms and a positive denominator.
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Rat(Repr::Small { n, d }),
            _ => Rat(Repr::Big(Box::new(r))),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small { n, d } => BigRational::new(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => (**b).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small { n, .. } => BigInt::from(*n),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small { d, .. } => BigInt::from(*d),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small { n: 0, .. })
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small { n: 1, d: 1 })
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small { n, .. } => *n < 0,
            Repr::Big(b) => b.numer().sign() == Sign::Minus,
        }
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small { n, .. } => *n > 0,
            Repr::Big(b) => b.numer().sign() == Sign::Plus,
        }
    }

    /// -1, 0, or 1.
    pub fn signum(&self) -> i32 {
        match &self.0 {
            Repr::Small { n, .. } => (*n).signum() as i32,
            Repr::Big(b) => match b.numer().sign() {
                Sign::Minus => -1,
                Sign::NoSign => 0,
                Sign::Plus => 1,
            },
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small { d, .. } => *d == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    pub fn abs(&self) -> Rat {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Rat {
        assert!(!self.is_zero(), "division by zero");
        match &self.0 {
            Repr::Small { n, d } => Self::from_i128_frac(*d as i128, *n as i128),
            Repr::Big(b) => Self::from_big(b.recip()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small { n, d } => *n as f64 / *d as f64,
            Repr::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn min(self, other: Rat) -> Rat {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Rat) -> Rat {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Default for Rat {
    fn default() -> Self {
        Rat::zero()
    }
}

impl PartialEq for Rat {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small { n: a, d: b }, Repr::Small { n: c, d: e }) => a == c && b == e,
            (Repr::Big(a), Repr::Big(b)) => a == b,
            // Canonical representation: a Big never equals a Small in value.
            _ => false,
        }
    }
}

impl Eq for Rat {}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small { n: a, d: b }, Repr::Small { n: c, d: e }) => {
                let lhs = (*a as i128) * (*e as i128);
                let rhs = (*c as i128) * (*b as i128);
                lhs.cmp(&rhs)
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

macro_rules! small_binop {
    ($a:ident, $b:ident, $nsmall:expr) => {
        if let (Repr::Small { n: an, d: ad }, Repr::Small { n: bn, d: bd }) = (&$a.0, &$b.0) {
            let (an, ad, bn, bd) = (*an as i128, *ad as i128, *bn as i128, *bd as i128);
            return $nsmall(an, ad, bn, bd);
        }
    };
}

impl Add for &Rat {
    type Output = Rat;
    fn add(self, rhs: &Rat) -> Rat {
        small_binop!(self, rhs, |an: i128, ad: i128, bn: i128, bd: i128| {
            Rat::from_i128_frac(an * bd + bn * ad, ad * bd)
        });
        Rat::from_big(self.to_big() + rhs.to_big())
    }
}

impl Sub for &Rat {
    type Output = Rat;
    fn sub(self, rhs: &Rat) -> Rat {
        small_binop!(self, rhs, |an: i128, ad: i128, bn: i128, bd: i128| {
            Rat::from_i128_frac(an * bd - bn * ad, ad * bd)
        });
        Rat::from_big(self.to_big() - rhs.to_big())
    }
}

impl Mul for &Rat {
    type Output = Rat;
    fn mul(self, rhs: &Rat) -> Rat {
        small_binop!(self, rhs, |an: i128, ad: i128, bn: i128, bd: i128| {
            Rat::from_i128_frac(an * bn, ad * bd)
        });
        Rat::from_big(self.to_big() * rhs.to_big())
    }
}

impl Div for &Rat {
    type Output = Rat;
    fn div(self, rhs: &Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero");
        small_binop!(self, rhs, |an: i128, ad: i128, bn: i128, bd: i128| {
            Rat::from_i128_frac(an * bd, ad * bn)
        });
        Rat::from_big(self.to_big() / rhs.to_big())
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        match &self.0 {
            Repr::Small { n, d } => Rat::from_i128_frac(-(*n as i128), *d as i128),
            Repr::Big(b) => Rat::from_big(-(**b).clone()),
        }
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                (&self).$method(rhs)
            }
        }
        impl $trait<Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        -&self
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        *self = &*self * rhs;
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Rat {
    /// Always renders as `p/q`, including integers (`0` prints as `0/1`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small { n, d } => write!(f, "{}/{}", n, d),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

/// Error type for parsing rationals from text.
#[derive(Debug, thiserror::Error)]
#[error("invalid rational literal {0:?}")]
pub struct ParseRatError(pub String);

impl FromStr for Rat {
    type Err = ParseRatError;

    /// Accepts `p/q` or a bare integer `p`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || ParseRatError(s.to_string());
        let (ns, ds) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s, "1"),
        };
        let n: BigInt = ns.parse().map_err(|_| bad())?;
        let d: BigInt = ds.parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Rat::from_big(BigRational::new(n, d)))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// Convenience for tests and fixtures: `rat(1, 2)` is `1/2`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalization() {
        assert_eq!(Rat::new(2, 4), Rat::new(1, 2));
        assert_eq!(Rat::new(-2, -4), Rat::new(1, 2));
        assert_eq!(Rat::new(2, -4), Rat::new(-1, 2));
        assert_eq!(Rat::new(0, -7), Rat::zero());
        assert_eq!(Rat::new(0, 5).to_string(), "0/1");
    }

    #[test]
    fn display_parse_roundtrip() {
        for s in ["3/4", "-3/4", "0/1", "17/1"] {
            let r: Rat = s.parse().unwrap();
            assert_eq!(r.to_string(), s);
        }
        let r: Rat = "5".parse().unwrap();
        assert_eq!(r, Rat::from_int(5));
        assert!("1/0".parse::<Rat>().is_err());
        assert!("a/b".parse::<Rat>().is_err());
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Rat::from_int(i64::MAX);
        let sq = &big * &big; // exceeds i64
        assert_eq!(sq.to_big(), {
            let b = BigInt::from(i64::MAX);
            BigRational::from_integer(&b * &b)
        });
        // Dividing back demotes to the canonical small representation.
        let back = &sq / &big;
        assert_eq!(back, big);
        assert_eq!(&back - &big, Rat::zero());
    }

    fn arb_rat() -> impl Strategy<Value = Rat> {
        (any::<i32>(), 1..10_000i32).prop_map(|(n, d)| Rat::new(n as i64, d as i64))
    }

    proptest! {
        #[test]
        fn matches_bigrational(a in arb_rat(), b in arb_rat()) {
            let (ba, bb) = (a.to_big(), b.to_big());
            prop_assert_eq!((&a + &b).to_big(), &ba + &bb);
            prop_assert_eq!((&a - &b).to_big(), &ba - &bb);
            prop_assert_eq!((&a * &b).to_big(), &ba * &bb);
            if !b.is_zero() {
                prop_assert_eq!((&a / &b).to_big(), &ba / &bb);
            }
            prop_assert_eq!(a.cmp(&b), ba.cmp(&bb));
        }

        #[test]
        fn field_axioms_spot(a in arb_rat(), b in arb_rat(), c in arb_rat()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &(-&a), Rat::zero());
        }
    }
}
