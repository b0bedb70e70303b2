use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, RoundingMode, Sign, Word};
use num_bigint::BigInt;

use super::{Rat, Ring};
use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;

/// Binary float with a fixed working precision in bits.
///
/// Binary operations use the larger precision of the two operands, so a
/// computation seeded from one precision stays at that precision.
#[derive(Clone)]
pub struct BigF {
    v: BigFloat,
    prec: usize,
}

fn bigint_to_float(n: &BigInt, prec: usize) -> BigFloat {
    let (sign, digits) = n.to_u64_digits();
    let work = prec.max(64 * digits.len() + 64);
    let base = BigFloat::from_u128(1u128 << 64, work);
    let mut acc = BigFloat::from_u64(0, work);
    for d in digits.iter().rev() {
        acc = acc.mul(&base, work, RM).add(&BigFloat::from_u64(*d, work), work, RM);
    }
    if sign == num_bigint::Sign::Minus {
        acc = acc.neg();
    }
    acc
}

impl BigF {
    pub fn from_rat(r: &Rat, prec: usize) -> Self {
        let n = bigint_to_float(r.numer(), prec);
        let d = bigint_to_float(r.denom(), prec);
        BigF { v: n.div(&d, prec, RM), prec }
    }

    pub fn from_i64(i: i64, prec: usize) -> Self {
        BigF { v: BigFloat::from_i64(i, prec), prec }
    }

    pub fn zero(prec: usize) -> Self {
        BigF::from_i64(0, prec)
    }

    pub fn one(prec: usize) -> Self {
        BigF::from_i64(1, prec)
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn inner(&self) -> &BigFloat {
        &self.v
    }

    fn p(&self, o: &BigF) -> usize {
        self.prec.max(o.prec)
    }

    pub fn add(&self, o: &BigF) -> BigF {
        let p = self.p(o);
        BigF { v: self.v.add(&o.v, p, RM), prec: p }
    }

    pub fn sub(&self, o: &BigF) -> BigF {
        let p = self.p(o);
        BigF { v: self.v.sub(&o.v, p, RM), prec: p }
    }

    pub fn mul(&self, o: &BigF) -> BigF {
        let p = self.p(o);
        BigF { v: self.v.mul(&o.v, p, RM), prec: p }
    }

    pub fn div(&self, o: &BigF) -> Result<BigF> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let p = self.p(o);
        Ok(BigF { v: self.v.div(&o.v, p, RM), prec: p })
    }

    pub fn neg(&self) -> BigF {
        BigF { v: self.v.neg(), prec: self.prec }
    }

    pub fn abs(&self) -> BigF {
        BigF { v: self.v.abs(), prec: self.prec }
    }

    pub fn sqrt(&self) -> Result<BigF> {
        if self.is_negative() {
            return Err(Error::Invalid("square root of a negative number".into()));
        }
        Ok(BigF { v: self.v.sqrt(self.prec, RM), prec: self.prec })
    }

    pub fn powi(&self, n: usize) -> BigF {
        BigF { v: self.v.powi(n, self.prec, RM), prec: self.prec }
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.v.is_zero() && self.v.is_negative()
    }

    pub fn is_finite(&self) -> bool {
        self.v.as_raw_parts().is_some() || self.v.is_zero()
    }

    /// Base-2 logarithm of |self| rounded down; `None` for zero.
    pub fn log2_abs(&self) -> Option<i64> {
        if self.v.is_zero() {
            return None;
        }
        self.v.exponent().map(|e| e as i64 - 1)
    }

    /// True when |self| < 2^k.
    pub fn below_pow2(&self, k: i64) -> bool {
        match self.log2_abs() {
            None => true,
            Some(l) => l < k,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self.v.as_raw_parts() {
            Some((m, _, s, e, _)) => {
                let top = *m.last().unwrap_or(&0) as f64 / 2f64.powi(64);
                let v = top * 2f64.powi(e);
                if s == Sign::Neg {
                    -v
                } else {
                    v
                }
            }
            None => {
                if self.v.is_zero() {
                    0.0
                } else {
                    f64::NAN
                }
            }
        }
    }

    /// Hex-float text: sign, mantissa words (most significant first),
    /// binary exponent and working precision.
    pub fn to_hex(&self) -> String {
        match self.v.as_raw_parts() {
            Some((m, _, s, e, _)) if !self.v.is_zero() => {
                let sign = if s == Sign::Neg { "-" } else { "" };
                let words: Vec<String> = m.iter().rev().map(|w| format!("{w:016x}")).collect();
                format!("{sign}0x0.{}p{}@{}", words.join(""), e, self.prec)
            }
            _ => format!("0x0p0@{}", self.prec),
        }
    }

    pub fn from_hex(s: &str) -> Result<BigF> {
        let bad = || Error::Parse(format!("bad hex float {s:?}"));
        let (body, prec) = s.rsplit_once('@').ok_or_else(bad)?;
        let prec: usize = prec.parse().map_err(|_| bad())?;
        let (neg, body) = match body.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, body),
        };
        if body == "0x0p0" {
            return Ok(BigF::zero(prec));
        }
        let body = body.strip_prefix("0x0.").ok_or_else(bad)?;
        let (mant, exp) = body.split_once('p').ok_or_else(bad)?;
        let e: i32 = exp.parse().map_err(|_| bad())?;
        if mant.is_empty() || mant.len() % 16 != 0 {
            return Err(bad());
        }
        let mut words: Vec<Word> = Vec::new();
        for i in (0..mant.len()).step_by(16) {
            words.push(u64::from_str_radix(&mant[i..i + 16], 16).map_err(|_| bad())?);
        }
        words.reverse();
        let sign = if neg { Sign::Neg } else { Sign::Pos };
        let v = BigFloat::from_raw_parts(&words, words.len() * 64, sign, e, false);
        if v.is_nan() {
            return Err(bad());
        }
        Ok(BigF { v, prec })
    }
}

impl PartialEq for BigF {
    fn eq(&self, o: &Self) -> bool {
        self.v.cmp(&o.v) == Some(0)
    }
}

impl PartialOrd for BigF {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        self.v.cmp(&o.v).map(|c| c.cmp(&0))
    }
}

impl fmt::Debug for BigF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigF({:e} @{})", self.to_f64(), self.prec)
    }
}

impl fmt::Display for BigF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_hex())
    }
}

impl serde::Serialize for BigF {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> serde::Deserialize<'de> for BigF {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BigF::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

impl Ring for BigF {
    fn plus(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn negate(&self) -> Self {
        self.neg()
    }
    fn scale(&self, c: &Rat) -> Self {
        self.mul(&BigF::from_rat(c, self.prec))
    }
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }
    fn const_like(&self, c: &Rat) -> Self {
        BigF::from_rat(c, self.prec)
    }
    fn try_inv(&self) -> Option<Self> {
        BigF::one(self.prec).div(self).ok()
    }
}

/// |a - b| as a BigF, for residual reporting.
pub fn residual(a: &BigF, b: &BigF) -> BigF {
    a.sub(b).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip_in_f64() {
        let x = BigF::from_rat(&Rat::new(-7, 3), 200);
        assert!((x.to_f64() + 7.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn big_integer_conversion() {
        let r: Rat = "123456789012345678901234567890/7".parse().unwrap();
        let x = BigF::from_rat(&r, 256);
        let back = x.mul(&BigF::from_i64(7, 256));
        let exact = BigF::from_rat(&"123456789012345678901234567890".parse().unwrap(), 256);
        assert!(residual(&back, &exact).below_pow2(-150));
    }

    #[test]
    fn sqrt_two_squared() {
        let two = BigF::from_i64(2, 200);
        let s = two.sqrt().unwrap();
        assert!(residual(&s.mul(&s), &two).below_pow2(-190));
        assert!(BigF::from_i64(-1, 64).sqrt().is_err());
    }

    #[test]
    fn hex_round_trip() {
        let x = BigF::from_rat(&Rat::new(-22, 7), 200).sqrt().err();
        assert!(x.is_some());
        let y = BigF::from_rat(&Rat::new(22, 7), 200).sqrt().unwrap();
        let h = y.to_hex();
        let z = BigF::from_hex(&h).unwrap();
        assert_eq!(y, z);
        assert_eq!(z.precision(), 200);
        assert_eq!(BigF::from_hex(&BigF::zero(64).to_hex()).unwrap(), BigF::zero(64));
    }

    #[test]
    fn ordering() {
        let a = BigF::from_rat(&Rat::new(1, 3), 128);
        let b = BigF::from_rat(&Rat::new(1, 2), 128);
        assert!(a < b);
        assert!(b.neg() < a);
    }
}
