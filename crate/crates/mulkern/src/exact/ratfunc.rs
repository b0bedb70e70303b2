use std::collections::BTreeMap;
use std::fmt;

use super::{Poly, Rat, Ring};
use crate::error::{Error, Result};

/// Quotient of polynomials, normalized so the leading denominator
/// coefficient is 1. No polynomial gcd is taken.
#[derive(Clone)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let vars = merge(num.vars(), den.vars());
        let num = num.to_vars(&vars)?;
        let den = den.to_vars(&vars)?;
        Ok(RatFunc { num, den }.normalized())
    }

    pub fn from_poly(p: Poly) -> Self {
        let den = Poly::constant_in(p.vars().to_vec(), Rat::one());
        RatFunc { num: p, den }
    }

    pub fn constant_in(vars: Vec<String>, c: Rat) -> Self {
        RatFunc::from_poly(Poly::constant_in(vars, c))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn vars(&self) -> &[String] {
        self.num.vars()
    }

    fn normalized(mut self) -> Self {
        if self.num.is_zero() {
            self.den = Poly::constant_in(self.num.vars().to_vec(), Rat::one());
            return self;
        }
        let lead = self.den.terms().values().next_back().cloned().expect("nonzero den");
        if !lead.is_one() {
            let inv = lead.recip().expect("nonzero");
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
        self
    }

    fn aligned(&self, o: &RatFunc) -> (RatFunc, RatFunc) {
        if self.vars() == o.vars() {
            return (self.clone(), o.clone());
        }
        let vs = merge(self.vars(), o.vars());
        let f = |r: &RatFunc| RatFunc { num: r.num.to_vars(&vs).unwrap(), den: r.den.to_vars(&vs).unwrap() };
        (f(self), f(o))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        let (a, b) = self.aligned(o);
        if a.den == b.den {
            return RatFunc { num: a.num.add(&b.num), den: a.den }.normalized();
        }
        RatFunc { num: a.num.mul(&b.den).add(&b.num.mul(&a.den)), den: a.den.mul(&b.den) }.normalized()
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        let (a, b) = self.aligned(o);
        RatFunc { num: a.num.mul(&b.num), den: a.den.mul(&b.den) }.normalized()
    }

    pub fn div(&self, o: &RatFunc) -> Result<RatFunc> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (a, b) = self.aligned(o);
        Ok(RatFunc { num: a.num.mul(&b.den), den: a.den.mul(&b.num) }.normalized())
    }

    pub fn scale(&self, c: &Rat) -> RatFunc {
        RatFunc { num: self.num.scale(c), den: self.den.clone() }.normalized()
    }

    pub fn pow(&self, e: i32) -> Result<RatFunc> {
        if e < 0 {
            let inv = RatFunc::from_poly(self.den.clone()).div(&RatFunc::from_poly(self.num.clone()))?;
            return inv.pow(-e);
        }
        Ok(RatFunc { num: self.num.pow(e as u32), den: self.den.pow(e as u32) }.normalized())
    }

    /// Partial derivative by the quotient rule.
    pub fn deriv_var(&self, name: &str) -> RatFunc {
        let dn = self.num.deriv_var(name);
        let dd = self.den.deriv_var(name);
        RatFunc { num: dn.mul(&self.den).sub(&self.num.mul(&dd)), den: self.den.mul(&self.den) }.normalized()
    }

    pub fn eval(&self, point: &[Rat]) -> Result<Rat> {
        let d = self.den.eval(point);
        self.num.eval(point).checked_div(&d)
    }

    pub fn eval_named(&self, at: &BTreeMap<String, Rat>) -> Result<Rat> {
        let d = self.den.eval_named(at)?;
        self.num.eval_named(at)?.checked_div(&d)
    }

    /// Evaluates in a ring with inverses; fails when the denominator is not
    /// invertible there.
    pub fn eval_in<R: Ring>(&self, args: &[R], proto: &R) -> Result<R> {
        let n = self.num.eval_in(args, proto);
        let d = self.den.eval_in(args, proto);
        let inv = d.try_inv().ok_or(Error::DivisionByZero)?;
        Ok(n.times(&inv))
    }

    /// Substitutes rational functions for every variable.
    pub fn compose(&self, args: &[RatFunc]) -> Result<RatFunc> {
        let proto = args.first().cloned().unwrap_or_else(|| RatFunc::constant_in(vec![], Rat::zero()));
        self.eval_in(args, &proto)
    }

    /// Equality by cross-multiplication.
    pub fn equals(&self, o: &RatFunc) -> bool {
        let (a, b) = self.aligned(o);
        a.num.mul(&b.den) == b.num.mul(&a.den)
    }

    /// Total degree bound of the numerator of `self - o` after cross-multiplication.
    pub fn identity_degree(&self, o: &RatFunc) -> u32 {
        let (a, b) = self.aligned(o);
        a.num.mul(&b.den).sub(&b.num.mul(&a.den)).total_degree().unwrap_or(0)
    }
}

fn merge(a: &[String], b: &[String]) -> Vec<String> {
    let mut vs = a.to_vec();
    for v in b {
        if !vs.contains(v) {
            vs.push(v.clone());
        }
    }
    vs
}

impl PartialEq for RatFunc {
    fn eq(&self, o: &Self) -> bool {
        self.equals(o)
    }
}

impl Ring for RatFunc {
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
        RatFunc::scale(self, c)
    }
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }
    fn const_like(&self, c: &Rat) -> Self {
        RatFunc::constant_in(self.vars().to_vec(), c.clone())
    }
    fn try_inv(&self) -> Option<Self> {
        self.one_like().div(self).ok()
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant().map(|c| c.is_one()).unwrap_or(false) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc[{}]({})", self.vars().join(","), self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> RatFunc {
        RatFunc::from_poly(Poly::var(&["x", "y"], name))
    }

    #[test]
    fn cross_multiplied_equality() {
        let a = v("x").div(&v("y")).unwrap();
        let b = v("x").mul(&v("x")).div(&v("x").mul(&v("y"))).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quotient_rule() {
        let f = v("x").div(&v("y")).unwrap();
        let d = f.deriv_var("y");
        let at = [Rat::int(3), Rat::int(2)];
        assert_eq!(d.eval(&at).unwrap(), Rat::new(-3, 4));
    }

    #[test]
    fn pole_reported() {
        let f = v("x").div(&v("y")).unwrap();
        assert!(f.eval(&[Rat::one(), Rat::zero()]).is_err());
    }
}
