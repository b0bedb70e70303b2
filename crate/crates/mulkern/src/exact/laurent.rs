use std::collections::BTreeMap;

use super::{Rat, Ring};
use crate::error::{Error, Result};

pub type YExps = Vec<i32>;

/// Laurent polynomial in y-variables with an explicit faithful window.
///
/// `lo[k] = Some(m)` means coefficients with exponent of `y_k` below `m`
/// are unknown (truncated away); `None` means the variable is exact.
/// Every stored exponent lies inside the window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct YLaurent {
    vars: Vec<String>,
    terms: BTreeMap<YExps, Rat>,
    lo: Vec<Option<i32>>,
}

fn max_lo(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

impl YLaurent {
    pub fn zero(vars: &[String]) -> Self {
        YLaurent { vars: vars.to_vec(), terms: BTreeMap::new(), lo: vec![None; vars.len()] }
    }

    pub fn constant(vars: &[String], c: Rat) -> Self {
        YLaurent::monomial(vars, vec![0; vars.len()], c)
    }

    pub fn monomial(vars: &[String], e: YExps, c: Rat) -> Self {
        let mut s = YLaurent::zero(vars);
        s.add_term(e, &c);
        s
    }

    pub fn from_terms(vars: &[String], terms: impl IntoIterator<Item = (YExps, Rat)>) -> Self {
        let mut s = YLaurent::zero(vars);
        for (e, c) in terms {
            s.add_term(e, &c);
        }
        s
    }

    /// Declares everything below `lo` unknown and drops those terms.
    pub fn with_floor(mut self, lo: &[Option<i32>]) -> Self {
        for (k, l) in lo.iter().enumerate() {
            self.lo[k] = max_lo(self.lo[k], *l);
        }
        self.prune();
        self
    }

    fn prune(&mut self) {
        let lo = self.lo.clone();
        self.terms.retain(|e, _| e.iter().zip(&lo).all(|(x, l)| l.is_none_or(|m| *x >= m)));
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn terms(&self) -> &BTreeMap<YExps, Rat> {
        &self.terms
    }

    pub fn lo(&self) -> &[Option<i32>] {
        &self.lo
    }

    pub fn is_exact(&self) -> bool {
        self.lo.iter().all(|l| l.is_none())
    }

    pub fn in_window(&self, e: &[i32]) -> bool {
        e.iter().zip(&self.lo).all(|(x, l)| l.is_none_or(|m| *x >= m))
    }

    /// Coefficient if it lies in the faithful window.
    pub fn coeff(&self, e: &[i32]) -> Option<Rat> {
        self.in_window(e).then(|| self.terms.get(e).cloned().unwrap_or_default())
    }

    pub fn add_term(&mut self, e: YExps, c: &Rat) {
        if c.is_zero() || !self.in_window(&e) {
            return;
        }
        let v = self.terms.entry(e.clone()).or_default();
        *v += c;
        if v.is_zero() {
            self.terms.remove(&e);
        }
    }

    /// Largest exponent of variable `k` in the support, or the window floor
    /// when the support is empty.
    fn hi(&self, k: usize) -> Option<i32> {
        self.terms.keys().map(|e| e[k]).max().or(self.lo[k])
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.vars != o.vars {
            return Err(Error::Incompatible(format!("y-variables {:?} vs {:?}", self.vars, o.vars)));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let lo: Vec<Option<i32>> = self.lo.iter().zip(&o.lo).map(|(a, b)| max_lo(*a, *b)).collect();
        let mut s = self.clone().with_floor(&lo);
        for (e, c) in &o.terms {
            s.add_term(e.clone(), c);
        }
        Ok(s)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        YLaurent { vars: self.vars.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(), lo: self.lo.clone() }
    }

    pub fn scale(&self, k: &Rat) -> Self {
        if k.is_zero() {
            let mut z = self.clone();
            z.terms.clear();
            return z;
        }
        YLaurent { vars: self.vars.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(), lo: self.lo.clone() }
    }

    /// Product with window propagation: exponent `e_k` is faithful when
    /// `e_k >= max(lo_a + hi_b, lo_b + hi_a)`.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        if (self.terms.is_empty() && self.is_exact()) || (o.terms.is_empty() && o.is_exact()) {
            return Ok(YLaurent::zero(&self.vars));
        }
        let mut lo = Vec::with_capacity(self.vars.len());
        for k in 0..self.vars.len() {
            let a = match (self.lo[k], o.hi(k)) {
                (Some(l), Some(h)) => Some(l + h),
                _ => None,
            };
            let b = match (o.lo[k], self.hi(k)) {
                (Some(l), Some(h)) => Some(l + h),
                _ => None,
            };
            lo.push(max_lo(a, b));
        }
        let mut s = YLaurent { vars: self.vars.clone(), terms: BTreeMap::new(), lo };
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e: YExps = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                if s.in_window(&e) {
                    let v = s.terms.entry(e).or_default();
                    *v += &(ca * cb);
                }
            }
        }
        s.terms.retain(|_, c| !c.is_zero());
        Ok(s)
    }

    /// Multiplies by the monomial `y^m`; the window shifts with it.
    pub fn shift(&self, m: &[i32]) -> Self {
        YLaurent {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.iter().zip(m).map(|(a, b)| a + b).collect(), c.clone())).collect(),
            lo: self.lo.iter().zip(m).map(|(l, d)| l.map(|v| v + d)).collect(),
        }
    }

    /// Partial derivative in `y_k`; the window floor drops by one.
    pub fn deriv(&self, k: usize) -> Self {
        let mut lo = self.lo.clone();
        lo[k] = lo[k].map(|v| v - 1);
        let mut s = YLaurent { vars: self.vars.clone(), terms: BTreeMap::new(), lo };
        for (e, c) in &self.terms {
            if e[k] != 0 {
                let mut ne = e.clone();
                ne[k] -= 1;
                s.add_term(ne, &(c * &Rat::int(e[k] as i64)));
            }
        }
        s
    }

    /// Coefficient of `y^{-1}` in every variable (the iterated formal residue).
    pub fn residue(&self) -> Result<Rat> {
        for l in self.lo.iter().flatten() {
            if *l > -1 {
                return Err(Error::ResidueWindow(*l));
            }
        }
        Ok(self.terms.get(&vec![-1; self.vars.len()]).cloned().unwrap_or_default())
    }

    /// Residue in variable `k` only: the coefficient of `y_k^{-1}` as a
    /// Laurent polynomial in the remaining variables (the slot is set to 0).
    pub fn residue_in(&self, k: usize) -> Result<YLaurent> {
        if let Some(l) = self.lo[k] {
            if l > -1 {
                return Err(Error::ResidueWindow(l));
            }
        }
        let mut lo = self.lo.clone();
        lo[k] = None;
        let mut s = YLaurent { vars: self.vars.clone(), terms: BTreeMap::new(), lo };
        for (e, c) in &self.terms {
            if e[k] == -1 {
                let mut ne = e.clone();
                ne[k] = 0;
                s.add_term(ne, c);
            }
        }
        Ok(s)
    }

    /// Swaps y-variables by a permutation (new slot `j` gets old `perm[j]`).
    pub fn permute(&self, perm: &[usize]) -> Self {
        let terms = self.terms.iter().map(|(e, c)| (perm.iter().map(|&p| e[p]).collect(), c.clone())).collect();
        YLaurent { vars: self.vars.clone(), terms, lo: perm.iter().map(|&p| self.lo[p]).collect() }
    }

    /// Exponents where both operands are faithful and differ.
    pub fn faithful_diff(&self, o: &Self) -> Vec<(YExps, Rat, Rat)> {
        let mut keys: Vec<&YExps> = self.terms.keys().chain(o.terms.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .filter(|e| self.in_window(e) && o.in_window(e))
            .filter_map(|e| {
                let a = self.terms.get(e).cloned().unwrap_or_default();
                let b = o.terms.get(e).cloned().unwrap_or_default();
                (a != b).then(|| (e.clone(), a, b))
            })
            .collect()
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.terms.keys().flat_map(|e| e.iter().copied()).max()
    }
}

impl Ring for YLaurent {
    fn plus(&self, o: &Self) -> Self {
        self.add(o).expect("compatible y-variables")
    }
    fn minus(&self, o: &Self) -> Self {
        self.sub(o).expect("compatible y-variables")
    }
    fn times(&self, o: &Self) -> Self {
        self.mul(o).expect("compatible y-variables")
    }
    fn negate(&self) -> Self {
        self.neg()
    }
    fn scale(&self, c: &Rat) -> Self {
        YLaurent::scale(self, c)
    }
    fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.is_exact()
    }
    fn const_like(&self, c: &Rat) -> Self {
        YLaurent::constant(&self.vars, c.clone())
    }
    fn try_inv(&self) -> Option<Self> {
        if !self.is_exact() || self.terms.len() != 1 {
            return None;
        }
        let (e, c) = self.terms.iter().next().unwrap();
        let inv = c.recip().ok()?;
        Some(YLaurent::monomial(&self.vars, e.iter().map(|x| -x).collect(), inv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y() -> Vec<String> {
        vec!["y".to_string()]
    }

    #[test]
    fn residue_picks_inverse_power() {
        let f = YLaurent::monomial(&y(), vec![-1], Rat::one());
        assert_eq!(f.residue().unwrap(), Rat::one());
        let g = YLaurent::from_terms(&y(), [(vec![-2], Rat::one()), (vec![-1], Rat::int(3)), (vec![0], Rat::int(5))]);
        assert_eq!(g.residue().unwrap(), Rat::int(3));
    }

    #[test]
    fn residue_rejects_bad_window() {
        let f = YLaurent::constant(&y(), Rat::one()).with_floor(&[Some(0)]);
        assert!(matches!(f.residue(), Err(Error::ResidueWindow(0))));
    }

    #[test]
    fn window_propagates_through_product() {
        // 1/(y-1) truncated at y^-4, squared
        let g = YLaurent::from_terms(&y(), (1..=4).map(|k| (vec![-k], Rat::one()))).with_floor(&[Some(-4)]);
        let sq = g.mul(&g).unwrap();
        assert_eq!(sq.lo(), &[Some(-5)]);
        // 1/(y-1)^2 = sum (k-1) y^-k
        for k in 2..=5 {
            assert_eq!(sq.coeff(&[-k]), Some(Rat::int(k as i64 - 1)));
        }
        assert_eq!(sq.coeff(&[-6]), None);
    }

    #[test]
    fn derivative_moves_window() {
        let g = YLaurent::from_terms(&y(), (1..=3).map(|k| (vec![-k], Rat::one()))).with_floor(&[Some(-3)]);
        let d = g.deriv(0);
        assert_eq!(d.lo(), &[Some(-4)]);
        assert_eq!(d.coeff(&[-2]), Some(Rat::int(-1)));
        assert_eq!(d.coeff(&[-4]), Some(Rat::int(-3)));
    }

    #[test]
    fn truncated_zero_is_not_exact_zero() {
        let z = YLaurent::zero(&y()).with_floor(&[Some(-3)]);
        assert!(!z.is_exact_zero());
        assert!(YLaurent::zero(&y()).is_exact_zero());
    }
}
