use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational number, always in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Rat(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn int(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_big(n: BigInt, d: BigInt) -> Result<Self> {
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rat(BigRational::new(n, d)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rat(BigRational::from_integer(n))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            Err(Error::DivisionByZero)
        } else {
            Ok(Rat(self.0.recip()))
        }
    }

    pub fn checked_div(&self, o: &Rat) -> Result<Self> {
        if o.is_zero() {
            Err(Error::DivisionByZero)
        } else {
            Ok(Rat(&self.0 / &o.0))
        }
    }

    /// Integer power; negative exponents invert.
    pub fn pow(&self, e: i32) -> Self {
        if e < 0 {
            let r = self.recip().expect("power of zero with negative exponent");
            return r.pow(-e);
        }
        let mut acc = Rat::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.numer().to_i64()
        } else {
            None
        }
    }

    /// Floor as an integer.
    pub fn floor_int(&self) -> BigInt {
        self.numer().div_floor(self.denom())
    }

    /// Canonical `p/q` form used by every serializer.
    pub fn to_pq(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    /// Height: max of |numerator| and denominator.
    pub fn height(&self) -> BigInt {
        let n = self.numer().abs();
        let d = self.denom().clone();
        if n > d {
            n
        } else {
            d
        }
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn binomial(e: &Rat, n: u32) -> Rat {
        let mut c = Rat::one();
        for k in 0..n {
            c = &c * &(e - &Rat::int(k as i64));
            c = &c * &Rat::new(1, k as i64 + 1);
        }
        c
    }

    pub fn factorial(n: u32) -> Rat {
        let mut c = BigInt::one();
        for k in 2..=n {
            c *= k;
        }
        Rat::from_bigint(c)
    }

    /// Rising factorial (a)_n.
    pub fn poch(a: &Rat, n: u32) -> Rat {
        let mut c = Rat::one();
        for l in 0..n {
            c = &c * &(a + &Rat::int(l as i64));
        }
        c
    }
}

impl Default for Rat {
    fn default() -> Self {
        Rat::zero()
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::int(n)
    }
}

impl From<BigRational> for Rat {
    fn from(r: BigRational) -> Self {
        Rat(r)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a rational literal: {s:?}"));
        let parse_int = |t: &str| t.trim().parse::<BigInt>().map_err(|_| bad());
        match s.split_once('/') {
            Some((n, d)) => Rat::from_big(parse_int(n)?, parse_int(d)?),
            None => Ok(Rat::from_bigint(parse_int(s)?)),
        }
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_pq())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&Rat> for &Rat {
            type Output = Rat;
            fn $m(self, o: &Rat) -> Rat {
                Rat(&self.0 $op &o.0)
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, o: Rat) -> Rat {
                Rat(self.0 $op o.0)
            }
        }
        impl $tr<&Rat> for Rat {
            type Output = Rat;
            fn $m(self, o: &Rat) -> Rat {
                Rat(self.0 $op &o.0)
            }
        }
        impl $tr<Rat> for &Rat {
            type Output = Rat;
            fn $m(self, o: Rat) -> Rat {
                Rat(&self.0 $op o.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, o: &Rat) {
        self.0 += &o.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, o: &Rat) {
        self.0 -= &o.0;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, o: &Rat) {
        self.0 *= &o.0;
    }
}

impl std::iter::Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(it: I) -> Rat {
        it.fold(Rat::zero(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms() {
        let r = Rat::new(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
    }

    #[test]
    fn parse_and_print() {
        let r: Rat = "-10/4".parse().unwrap();
        assert_eq!(r.to_pq(), "-5/2");
        assert_eq!(Rat::int(3).to_string(), "3");
        assert!("1/0".parse::<Rat>().is_err());
        assert!("x".parse::<Rat>().is_err());
    }

    #[test]
    fn serde_roundtrip() {
        let r = Rat::new(-173, 210);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, "\"-173/210\"");
        let back: Rat = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn binomial_half() {
        assert_eq!(Rat::binomial(&Rat::new(1, 2), 2), Rat::new(-1, 8));
        assert_eq!(Rat::poch(&Rat::int(1), 4), Rat::int(24));
    }
}
