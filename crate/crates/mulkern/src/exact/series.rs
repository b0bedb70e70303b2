use std::collections::BTreeMap;

use super::{Exps, Poly, Rat, Ring};
use crate::error::{Error, Result};

/// Power series in several x-variables truncated at total degree `trunc`.
///
/// Absent keys are exact zeros. `proto` is an exact zero of the coefficient
/// domain and carries its shape.
#[derive(Clone, Debug, PartialEq)]
pub struct XSeries<C: Ring> {
    vars: Vec<String>,
    trunc: u32,
    coeffs: BTreeMap<Exps, C>,
    proto: C,
}

impl<C: Ring> XSeries<C> {
    pub fn zero(vars: &[String], trunc: u32, proto: C) -> Self {
        XSeries { vars: vars.to_vec(), trunc, coeffs: BTreeMap::new(), proto: proto.zero_like() }
    }

    pub fn constant(vars: &[String], trunc: u32, c: C) -> Self {
        let mut s = XSeries::zero(vars, trunc, c.clone());
        s.add_term(vec![0; vars.len()], c);
        s
    }

    pub fn monomial(vars: &[String], trunc: u32, e: Exps, c: C) -> Self {
        let mut s = XSeries::zero(vars, trunc, c.clone());
        s.add_term(e, c);
        s
    }

    /// The series of a single variable.
    pub fn var(vars: &[String], trunc: u32, name: &str, proto: &C) -> Self {
        let i = vars.iter().position(|v| v == name).expect("unknown variable");
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        XSeries::monomial(vars, trunc, e, proto.one_like())
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn proto(&self) -> &C {
        &self.proto
    }

    pub fn coeffs(&self) -> &BTreeMap<Exps, C> {
        &self.coeffs
    }

    pub fn get(&self, e: &[u32]) -> Option<&C> {
        self.coeffs.get(e)
    }

    /// Coefficient, with an exact zero for absent keys.
    pub fn coeff(&self, e: &[u32]) -> C {
        self.coeffs.get(e).cloned().unwrap_or_else(|| self.proto.clone())
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, e: Exps, c: C) {
        if e.iter().sum::<u32>() > self.trunc {
            return;
        }
        let merged = match self.coeffs.remove(&e) {
            Some(old) => old.plus(&c),
            None => c,
        };
        if !merged.is_exact_zero() {
            self.coeffs.insert(e, merged);
        }
    }

    pub fn truncate(&self, n: u32) -> Self {
        let mut s = XSeries::zero(&self.vars, n, self.proto.clone());
        for (e, c) in &self.coeffs {
            if e.iter().sum::<u32>() <= n {
                s.coeffs.insert(e.clone(), c.clone());
            }
        }
        s
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.vars != o.vars {
            return Err(Error::Incompatible(format!("x-variables {:?} vs {:?}", self.vars, o.vars)));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut s = self.truncate(self.trunc.min(o.trunc));
        for (e, c) in &o.coeffs {
            s.add_term(e.clone(), c.clone());
        }
        Ok(s)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.negate())
    }

    pub fn scale(&self, k: &Rat) -> Self {
        self.map(|c| c.scale(k))
    }

    pub fn mul_coeff(&self, k: &C) -> Self {
        self.map(|c| c.times(k))
    }

    pub fn map(&self, f: impl Fn(&C) -> C) -> Self {
        let mut s = XSeries::zero(&self.vars, self.trunc, self.proto.clone());
        for (e, c) in &self.coeffs {
            s.add_term(e.clone(), f(c));
        }
        s
    }

    /// Exact truncated product; the result keeps the smaller truncation.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let n = self.trunc.min(o.trunc);
        let mut acc: BTreeMap<Exps, C> = BTreeMap::new();
        for (ea, ca) in &self.coeffs {
            let da: u32 = ea.iter().sum();
            if da > n {
                continue;
            }
            for (eb, cb) in &o.coeffs {
                if da + eb.iter().sum::<u32>() > n {
                    continue;
                }
                let e: Exps = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let p = ca.times(cb);
                match acc.get_mut(&e) {
                    Some(v) => *v = v.plus(&p),
                    None => {
                        acc.insert(e, p);
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_exact_zero());
        Ok(XSeries { vars: self.vars.clone(), trunc: n, coeffs: acc, proto: self.proto.clone() })
    }

    /// Multiplies by a polynomial over the same x-variables.
    pub fn mul_poly(&self, p: &Poly) -> Result<Self> {
        let p = p.to_vars(&self.vars)?;
        let mut s = XSeries::zero(&self.vars, self.trunc, self.proto.clone());
        for (ep, cp) in p.terms() {
            for (e, c) in &self.coeffs {
                let ne: Exps = e.iter().zip(ep).map(|(a, b)| a + b).collect();
                s.add_term(ne, c.scale(cp));
            }
        }
        Ok(s)
    }

    /// Embeds a polynomial with rational coefficients.
    pub fn from_poly(p: &Poly, vars: &[String], trunc: u32, proto: &C) -> Result<Self> {
        let p = p.to_vars(vars)?;
        let mut s = XSeries::zero(vars, trunc, proto.clone());
        for (e, c) in p.terms() {
            s.add_term(e.clone(), proto.const_like(c));
        }
        Ok(s)
    }

    /// Raw partial derivative; the caller decides the faithful truncation.
    pub fn deriv(&self, i: usize) -> Self {
        let mut s = XSeries::zero(&self.vars, self.trunc, self.proto.clone());
        for (e, c) in &self.coeffs {
            if e[i] > 0 {
                let mut ne = e.clone();
                ne[i] -= 1;
                s.add_term(ne, c.scale(&Rat::int(e[i] as i64)));
            }
        }
        s
    }

    pub fn constant_term(&self) -> C {
        self.coeff(&vec![0; self.vars.len()])
    }

    /// Lowest total degree present.
    pub fn order(&self) -> Option<u32> {
        self.coeffs.keys().map(|e| e.iter().sum()).min()
    }

    /// Σ c_n · self^n for a series without constant term.
    pub fn compose_univariate(&self, c: &[Rat]) -> Result<Self> {
        if !self.constant_term().is_exact_zero() {
            return Err(Error::Invalid("composition argument has a constant term".into()));
        }
        let mut acc = XSeries::zero(&self.vars, self.trunc, self.proto.clone());
        let mut p = XSeries::constant(&self.vars, self.trunc, self.proto.one_like());
        for (n, cn) in c.iter().enumerate() {
            if n as u32 > self.trunc {
                break;
            }
            if n > 0 {
                p = p.mul(self)?;
            }
            acc = acc.add(&p.scale(cn))?;
        }
        Ok(acc)
    }

    fn unit_tail(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0 != self.proto.one_like() {
            return Err(Error::NotUnit(format!("{c0:?}")));
        }
        self.sub(&XSeries::constant(&self.vars, self.trunc, c0))
    }

    /// Binomial expansion of self^e; the constant term must be exactly 1.
    pub fn pow_rat(&self, e: &Rat) -> Result<Self> {
        let h = self.unit_tail()?;
        let coeffs: Vec<Rat> = (0..=self.trunc).map(|n| Rat::binomial(e, n)).collect();
        h.compose_univariate(&coeffs)
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.pow_rat(&Rat::new(1, 2))
    }

    /// Multiplicative inverse; the constant term must be invertible.
    pub fn inv(&self) -> Result<Self> {
        let c0 = self.constant_term();
        let i0 = c0.try_inv().ok_or(Error::DivisionByZero)?;
        let h = self.sub(&XSeries::constant(&self.vars, self.trunc, c0))?.mul_coeff(&i0);
        let coeffs: Vec<Rat> = (0..=self.trunc).map(|n| if n % 2 == 0 { Rat::one() } else { -Rat::one() }).collect();
        Ok(h.compose_univariate(&coeffs)?.mul_coeff(&i0))
    }

    /// Substitutes a rational value for variable `i` in a polynomial-like
    /// series (only valid when the result is exact, i.e. always for finite sums).
    pub fn restrict(&self, i: usize, v: &Rat) -> Self {
        let mut s = XSeries::zero(&self.vars, self.trunc, self.proto.clone());
        for (e, c) in &self.coeffs {
            let mut ne = e.clone();
            let k = ne[i];
            ne[i] = 0;
            s.add_term(ne, c.scale(&v.pow(k as i32)));
        }
        s
    }

    /// Permutes the x-variables: new position `j` takes old variable `perm[j]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let mut s = XSeries::zero(&self.vars, self.trunc, self.proto.clone());
        for (e, c) in &self.coeffs {
            let mut ne = vec![0; e.len()];
            for (old, &k) in e.iter().enumerate() {
                let new = perm.iter().position(|&p| p == old).unwrap();
                ne[new] = k;
            }
            s.add_term(ne, c.clone());
        }
        s
    }
}

impl<C: Ring> Ring for XSeries<C> {
    fn plus(&self, o: &Self) -> Self {
        self.add(o).expect("compatible series")
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o).expect("compatible series")
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o).expect("compatible series")
    }
    fn negate(&self) -> Self {
        self.neg()
    }
    fn scale(&self, c: &Rat) -> Self {
        XSeries::scale(self, c)
    }
    fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    fn const_like(&self, c: &Rat) -> Self {
        XSeries::constant(&self.vars, self.trunc, self.proto.const_like(c))
    }
    fn try_inv(&self) -> Option<Self> {
        self.inv().ok()
    }
}

/// Convenience: names `x1..xn` style lists.
pub fn var_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(trunc: u32) -> XSeries<Rat> {
        XSeries::var(&["x".to_string()], trunc, "x", &Rat::zero())
    }

    fn one(trunc: u32) -> XSeries<Rat> {
        XSeries::constant(&["x".to_string()], trunc, Rat::one())
    }

    #[test]
    fn product_of_conjugates() {
        let a = one(2).add(&x(2)).unwrap();
        let b = one(2).sub(&x(2)).unwrap();
        let p = a.mul(&b).unwrap();
        assert_eq!(p.coeff(&[0]), Rat::one());
        assert_eq!(p.coeff(&[1]), Rat::zero());
        assert_eq!(p.coeff(&[2]), Rat::int(-1));
    }

    #[test]
    fn geometric_inverse() {
        let g = one(3).sub(&x(3)).unwrap().inv().unwrap();
        for k in 0..=3 {
            assert_eq!(g.coeff(&[k]), Rat::one());
        }
        let back = g.mul(&one(3).sub(&x(3)).unwrap()).unwrap();
        assert_eq!(back, one(3));
    }

    #[test]
    fn degree_overflow_vanishes() {
        let x3 = x(2).mul(&x(5)).unwrap().mul(&x(5)).unwrap();
        assert!(x3.is_empty());
    }

    #[test]
    fn binomial_square_root() {
        let s = one(2).add(&x(2)).unwrap().sqrt().unwrap();
        assert_eq!(s.coeff(&[1]), Rat::new(1, 2));
        assert_eq!(s.coeff(&[2]), Rat::new(-1, 8));
        let sq = one(4).add(&x(4).scale(&Rat::int(2))).unwrap().add(&x(4).mul(&x(4)).unwrap()).unwrap();
        let r = sq.sqrt().unwrap();
        assert_eq!(r, one(4).add(&x(4)).unwrap());
    }

    #[test]
    fn zero_exponent_and_cube_root() {
        let a = one(3).add(&x(3)).unwrap();
        assert_eq!(a.pow_rat(&Rat::zero()).unwrap(), one(3));
        let c = a.pow_rat(&Rat::new(1, 3)).unwrap();
        assert_eq!(c.mul(&c).unwrap().mul(&c).unwrap(), a);
    }

    #[test]
    fn non_unit_rejected() {
        let a = one(2).scale(&Rat::int(2));
        assert!(matches!(a.sqrt(), Err(Error::NotUnit(_))));
    }
}
