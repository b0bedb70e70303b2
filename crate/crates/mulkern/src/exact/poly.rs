use std::collections::BTreeMap;
use std::fmt;

use super::{Rat, Ring};
use crate::error::{Error, Result};

pub type Exps = Vec<u32>;

/// Sparse multivariate polynomial over the rationals.
///
/// Exponent vectors are positional against `vars`. Binary operations on
/// polynomials with different variable lists first merge the lists.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    vars: Vec<String>,
    terms: BTreeMap<Exps, Rat>,
}

fn names(vs: &[&str]) -> Vec<String> {
    vs.iter().map(|s| s.to_string()).collect()
}

impl Poly {
    pub fn zero(vars: &[&str]) -> Self {
        Poly { vars: names(vars), terms: BTreeMap::new() }
    }

    pub fn zero_in(vars: Vec<String>) -> Self {
        Poly { vars, terms: BTreeMap::new() }
    }

    pub fn constant_in(vars: Vec<String>, c: Rat) -> Self {
        let mut p = Poly::zero_in(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; p.vars.len()], c);
        }
        p
    }

    pub fn constant(vars: &[&str], c: Rat) -> Self {
        Poly::constant_in(names(vars), c)
    }

    pub fn var(vars: &[&str], name: &str) -> Self {
        Poly::var_in(names(vars), name)
    }

    pub fn var_in(vars: Vec<String>, name: &str) -> Self {
        let i = vars.iter().position(|v| v == name).expect("unknown variable");
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Poly::monomial_in(vars, e, Rat::one())
    }

    pub fn monomial_in(vars: Vec<String>, e: Exps, c: Rat) -> Self {
        assert_eq!(e.len(), vars.len());
        let mut p = Poly::zero_in(vars);
        if !c.is_zero() {
            p.terms.insert(e, c);
        }
        p
    }

    /// Builds from raw terms, dropping zeros.
    pub fn from_terms(vars: Vec<String>, terms: impl IntoIterator<Item = (Exps, Rat)>) -> Self {
        let mut p = Poly::zero_in(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), p.vars.len());
            p.add_term(e, &c);
        }
        p
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn terms(&self) -> &BTreeMap<Exps, Rat> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[u32]) -> Rat {
        self.terms.get(e).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, e: Exps, c: &Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// The value when the polynomial is constant.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&k| k == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Re-expresses over `vars`, which must contain every variable in use.
    pub fn to_vars(&self, vars: &[String]) -> Result<Poly> {
        if vars == self.vars.as_slice() {
            return Ok(self.clone());
        }
        let mut map = Vec::with_capacity(self.vars.len());
        for (i, v) in self.vars.iter().enumerate() {
            let used = self.terms.keys().any(|e| e[i] > 0);
            match vars.iter().position(|w| w == v) {
                Some(j) => map.push(Some(j)),
                None if !used => map.push(None),
                None => return Err(Error::Incompatible(format!("variable {v} missing"))),
            }
        }
        let mut out = Poly::zero_in(vars.to_vec());
        for (e, c) in &self.terms {
            let mut ne = vec![0; vars.len()];
            for (i, &k) in e.iter().enumerate() {
                if let Some(j) = map[i] {
                    ne[j] += k;
                }
            }
            out.add_term(ne, c);
        }
        Ok(out)
    }

    fn union_vars(&self, o: &Poly) -> Vec<String> {
        let mut vs = self.vars.clone();
        for v in &o.vars {
            if !vs.contains(v) {
                vs.push(v.clone());
            }
        }
        vs
    }

    fn aligned(&self, o: &Poly) -> (Poly, Poly) {
        if self.vars == o.vars {
            return (self.clone(), o.clone());
        }
        let vs = self.union_vars(o);
        (self.to_vars(&vs).unwrap(), o.to_vars(&vs).unwrap())
    }

    pub fn add(&self, o: &Poly) -> Poly {
        if self.vars != o.vars {
            let (a, b) = self.aligned(o);
            return a.add(&b);
        }
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c);
        }
        r
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly { vars: self.vars.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn scale(&self, k: &Rat) -> Poly {
        if k.is_zero() {
            return Poly::zero_in(self.vars.clone());
        }
        Poly { vars: self.vars.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect() }
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.vars != o.vars {
            let (a, b) = self.aligned(o);
            return a.mul(&b);
        }
        let mut acc: BTreeMap<Exps, Rat> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: Exps = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let v = ca * cb;
                *acc.entry(e).or_default() += &v;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Poly { vars: self.vars.clone(), terms: acc }
    }

    pub fn pow(&self, n: u32) -> Poly {
        self.pow_u(n)
    }

    /// Multiplies by the monomial with exponent vector `e`.
    pub fn shift(&self, e: &[u32]) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(k, c)| (k.iter().zip(e).map(|(a, b)| a + b).collect(), c.clone())).collect(),
        }
    }

    pub fn deriv(&self, i: usize) -> Poly {
        let mut out = Poly::zero_in(self.vars.clone());
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut ne = e.clone();
                ne[i] -= 1;
                out.add_term(ne, &(c * &Rat::int(e[i] as i64)));
            }
        }
        out
    }

    pub fn deriv_var(&self, name: &str) -> Poly {
        match self.var_index(name) {
            Some(i) => self.deriv(i),
            None => Poly::zero_in(self.vars.clone()),
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn min_total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).min()
    }

    pub fn degree_in(&self, i: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[i]).max()
    }

    pub fn weighted_degree(&self, w: &[u32]) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().zip(w).map(|(a, b)| a * b).sum()).max()
    }

    /// Coefficient of `var^k` as a polynomial in the remaining variables
    /// (the variable stays in the list with exponent 0).
    pub fn coeff_of(&self, i: usize, k: u32) -> Poly {
        let mut out = Poly::zero_in(self.vars.clone());
        for (e, c) in &self.terms {
            if e[i] == k {
                let mut ne = e.clone();
                ne[i] = 0;
                out.add_term(ne, c);
            }
        }
        out
    }

    /// Substitutes a rational value for one variable.
    pub fn subst(&self, i: usize, v: &Rat) -> Poly {
        let mut out = Poly::zero_in(self.vars.clone());
        for (e, c) in &self.terms {
            let mut ne = e.clone();
            let k = ne[i];
            ne[i] = 0;
            out.add_term(ne, &(c * &v.pow(k as i32)));
        }
        out
    }

    pub fn eval(&self, point: &[Rat]) -> Rat {
        assert_eq!(point.len(), self.vars.len());
        let mut pows: Vec<Vec<Rat>> = vec![vec![Rat::one()]; point.len()];
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                while pows[i].len() <= k as usize {
                    let nxt = pows[i].last().unwrap() * &point[i];
                    pows[i].push(nxt);
                }
                if k > 0 {
                    t *= &pows[i][k as usize];
                }
            }
            acc += &t;
        }
        acc
    }

    /// Evaluates against a name-keyed assignment.
    pub fn eval_named(&self, at: &BTreeMap<String, Rat>) -> Result<Rat> {
        let mut pt = Vec::with_capacity(self.vars.len());
        for (i, v) in self.vars.iter().enumerate() {
            match at.get(v) {
                Some(r) => pt.push(r.clone()),
                None if self.terms.keys().all(|e| e[i] == 0) => pt.push(Rat::zero()),
                None => return Err(Error::Invalid(format!("no value for {v}"))),
            }
        }
        Ok(self.eval(&pt))
    }

    /// Evaluates with arguments in an arbitrary ring; `proto` supplies shape.
    pub fn eval_in<R: Ring>(&self, args: &[R], proto: &R) -> R {
        assert_eq!(args.len(), self.vars.len());
        let mut pows: Vec<Vec<R>> = args.iter().map(|a| vec![a.one_like()]).collect();
        let mut acc = proto.zero_like();
        for (e, c) in &self.terms {
            let mut t = proto.const_like(c);
            for (i, &k) in e.iter().enumerate() {
                while pows[i].len() <= k as usize {
                    let nxt = pows[i].last().unwrap().times(&args[i]);
                    pows[i].push(nxt);
                }
                if k > 0 {
                    t = t.times(&pows[i][k as usize]);
                }
            }
            acc = acc.plus(&t);
        }
        acc
    }

    /// Substitutes polynomials for every variable.
    pub fn compose(&self, args: &[Poly]) -> Poly {
        let proto = args.first().cloned().unwrap_or_else(|| Poly::zero_in(vec![]));
        self.eval_in(args, &proto)
    }

    /// Renames variables positionally.
    pub fn renamed(&self, vars: &[&str]) -> Poly {
        assert_eq!(vars.len(), self.vars.len());
        Poly { vars: names(vars), terms: self.terms.clone() }
    }
}

impl Ring for Poly {
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
        Poly::scale(self, c)
    }
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }
    fn const_like(&self, c: &Rat) -> Self {
        Poly::constant_in(self.vars.clone(), c.clone())
    }
    fn try_inv(&self) -> Option<Self> {
        let c = self.as_constant()?;
        Some(self.const_like(&c.recip().ok()?))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { self.vars[i].clone() } else { format!("{}^{}", self.vars[i], k) })
                .collect();
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            if mono.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{a}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.vars.join(","), self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_product() {
        let l = Poly::var(&["l"], "l");
        assert_eq!(l.mul(&l), Poly::monomial_in(vec!["l".into()], vec![2], Rat::one()));
    }

    #[test]
    fn difference_of_squares() {
        let v = ["x1", "x2"];
        let a = Poly::var(&v, "x1").add(&Poly::var(&v, "x2"));
        let b = Poly::var(&v, "x1").sub(&Poly::var(&v, "x2"));
        let expect = Poly::var(&v, "x1").pow(2).sub(&Poly::var(&v, "x2").pow(2));
        assert_eq!(a.mul(&b), expect);
    }

    #[test]
    fn exponential_basis_square() {
        // P1 = l, P2 = l^2/2, so P1*P1 = 2*P2
        let l = Poly::var(&["l"], "l");
        let p2 = l.pow(2).scale(&Rat::new(1, 2));
        let sq = l.mul(&l);
        assert_eq!(sq, p2.scale(&Rat::int(2)));
        assert_eq!(sq.coeff(&[2]), Rat::one());
    }

    #[test]
    fn auto_union_of_variables() {
        let x = Poly::var(&["x"], "x");
        let y = Poly::var(&["y"], "y");
        let p = x.mul(&y).add(&x);
        assert_eq!(p.vars(), &["x".to_string(), "y".to_string()]);
        assert_eq!(p.eval(&[Rat::int(2), Rat::int(3)]), Rat::int(8));
    }

    #[test]
    fn derivative_and_degrees() {
        let v = ["x", "l"];
        let p = Poly::var(&v, "x").pow(3).mul(&Poly::var(&v, "l"));
        assert_eq!(p.deriv(0).coeff(&[2, 1]), Rat::int(3));
        assert_eq!(p.total_degree(), Some(4));
        assert_eq!(p.weighted_degree(&[0, 2]), Some(2));
    }
}
