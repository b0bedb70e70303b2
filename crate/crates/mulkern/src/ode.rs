//! Linear differential operators with polynomial coefficients and the
//! normalized analytic solution `f(x) = Σ P_i(λ) x^i`, `P_0 = 1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{parse_poly, Exps, Poly, Rat, Ring, XSeries, YLaurent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    FirstOrderG,
    Heun4,
    HeunN,
    ThirdOrder3,
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::FirstOrderG => "first_order_g",
            Family::Heun4 => "heun4",
            Family::HeunN => "heun_n",
            Family::ThirdOrder3 => "third_order3",
            Family::Custom => "custom",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "first_order_g" => Family::FirstOrderG,
            "heun4" => Family::Heun4,
            "heun_n" => Family::HeunN,
            "third_order3" => Family::ThirdOrder3,
            "custom" => Family::Custom,
            _ => return Err(Error::Parse(format!("unknown operator family {s:?}"))),
        })
    }
}

/// Names `l1..lg` of the spectral variables.
pub fn lambda_vars(g: usize) -> Vec<String> {
    (1..=g).map(|k| format!("l{k}")).collect()
}

/// One monomial piece `x^m · c(λ) · (d/dx)^k` of an operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OpTerm {
    pub k: usize,
    pub m: u32,
    pub c: Poly,
}

impl OpTerm {
    /// Degree shift `k - m`.
    pub fn shift(&self) -> i64 {
        self.k as i64 - self.m as i64
    }
}

/// `Σ_k p_k(x, λ) (d/dx)^k`, with `p_k` over the variables `x, l1..lg`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffOp {
    family: Family,
    g: usize,
    terms: BTreeMap<usize, Poly>,
    params: BTreeMap<String, Rat>,
}

fn op_vars(g: usize) -> Vec<String> {
    let mut v = vec!["x".to_string()];
    v.extend(lambda_vars(g));
    v
}

impl DiffOp {
    pub fn new(family: Family, g: usize, terms: BTreeMap<usize, Poly>, params: BTreeMap<String, Rat>) -> Result<Self> {
        let vars = op_vars(g);
        let mut clean = BTreeMap::new();
        for (k, p) in terms {
            let p = p.to_vars(&vars).map_err(|_| Error::Invalid(format!("coefficient of order {k} uses variables outside {vars:?}")))?;
            if !p.is_zero() {
                clean.insert(k, p);
            }
        }
        if clean.is_empty() {
            return Err(Error::Invalid("zero operator".into()));
        }
        Ok(DiffOp { family, g, terms: clean, params })
    }

    /// Operator from `(k, coefficient string)` pairs over `x, l1..lg`.
    pub fn from_strings(g: usize, terms: &[(usize, String)]) -> Result<Self> {
        let vars = op_vars(g);
        let vr: Vec<&str> = vars.iter().map(String::as_str).collect();
        let mut t = BTreeMap::new();
        for (k, s) in terms {
            let p = parse_poly(s, &vr)?;
            let e: &mut Poly = t.entry(*k).or_insert_with(|| Poly::zero_in(vars.clone()));
            *e = e.add(&p);
        }
        DiffOp::new(Family::Custom, g, t, BTreeMap::new())
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn order(&self) -> usize {
        *self.terms.keys().next_back().unwrap()
    }

    pub fn terms(&self) -> &BTreeMap<usize, Poly> {
        &self.terms
    }

    pub fn params(&self) -> &BTreeMap<String, Rat> {
        &self.params
    }

    pub fn param(&self, name: &str) -> Result<Rat> {
        self.params.get(name).cloned().ok_or_else(|| Error::Invalid(format!("operator has no parameter {name}")))
    }

    /// Coefficients `c_{k,m}(λ)` as polynomials in `l1..lg`.
    pub fn op_terms(&self) -> Vec<OpTerm> {
        let lv = lambda_vars(self.g);
        let mut out: BTreeMap<(usize, u32), Poly> = BTreeMap::new();
        for (&k, p) in &self.terms {
            for (e, c) in p.terms() {
                let le: Exps = e[1..].to_vec();
                out.entry((k, e[0])).or_insert_with(|| Poly::zero_in(lv.clone())).add_term(le, c);
            }
        }
        out.into_iter().filter(|(_, c)| !c.is_zero()).map(|((k, m), c)| OpTerm { k, m, c }).collect()
    }

    /// The operator with every `λ` set to zero; its terms carry constants.
    pub fn lambda_free(&self) -> Vec<(usize, u32, Rat)> {
        self.op_terms()
            .into_iter()
            .filter_map(|t| {
                let c = t.c.coeff(&vec![0; self.g]);
                (!c.is_zero()).then_some((t.k, t.m, c))
            })
            .collect()
    }

    /// `max(0, max (k - m))` over the λ-free part; the faithful-window loss.
    pub fn window_shift(&self) -> u32 {
        self.lambda_free().iter().map(|(k, m, _)| *k as i64 - *m as i64).max().unwrap_or(0).max(0) as u32
    }

    /// Stable text identifying the operator.
    pub fn fingerprint(&self) -> String {
        let mut s = format!("{}|g={}", self.family.name(), self.g);
        for (k, p) in &self.terms {
            s.push_str(&format!("|{k}:{p}"));
        }
        s
    }
}

fn rat_params(pairs: &[(&str, &Rat)]) -> BTreeMap<String, Rat> {
    pairs.iter().map(|(n, v)| (n.to_string(), (*v).clone())).collect()
}

fn xpoly(g: usize, coeffs: &[Rat]) -> Poly {
    let vars = op_vars(g);
    Poly::from_terms(
        vars.clone(),
        coeffs.iter().enumerate().map(|(m, c)| {
            let mut e = vec![0; vars.len()];
            e[0] = m as u32;
            (e, c.clone())
        }),
    )
}

fn x_minus(g: usize, a: &Rat) -> Poly {
    xpoly(g, &[-a, Rat::one()])
}

fn lam(g: usize, k: usize) -> Poly {
    Poly::var_in(op_vars(g), &format!("l{k}"))
}

fn distinct_from_01(name: &str, t: &Rat) -> Result<()> {
    if t.is_zero() || t.is_one() {
        return Err(Error::Constraint(format!("{name} = {t} collides with a singular point 0 or 1")));
    }
    Ok(())
}

/// `d/dx - (λ1 + 2λ2 x + ... + gλ_g x^{g-1})`.
pub fn first_order_g(g: usize) -> Result<DiffOp> {
    if g == 0 {
        return Err(Error::Invalid("g must be at least 1".into()));
    }
    let mut p0 = Poly::zero_in(op_vars(g));
    for k in 1..=g {
        let mut e = vec![0u32; g + 1];
        e[0] = (k - 1) as u32;
        e[k] = 1;
        p0.add_term(e, &Rat::int(-(k as i64)));
    }
    let mut t = BTreeMap::new();
    t.insert(1, xpoly(g, &[Rat::one()]));
    t.insert(0, p0);
    DiffOp::new(Family::FirstOrderG, g, t, BTreeMap::new())
}

/// Second-order operator with singular points `0, 1, t, ∞`; `r2` is forced
/// by `r1 + r2 = s1 + s2 + s3 - 1` and, when given, must agree.
pub fn heun4(t: &Rat, s: [&Rat; 3], r1: &Rat, r2: Option<&Rat>) -> Result<DiffOp> {
    distinct_from_01("t", t)?;
    let forced = s[0] + s[1] + s[2] - Rat::one() - r1;
    if let Some(r) = r2 {
        if *r != forced {
            return Err(Error::Constraint(format!("r1 + r2 = {} but s1 + s2 + s3 - 1 = {}", r1 + r, &forced + r1)));
        }
    }
    let r2 = forced;
    let g = 1;
    let x = xpoly(g, &[Rat::zero(), Rat::one()]);
    let x1 = x_minus(g, &Rat::one());
    let xt = x_minus(g, t);
    let p2 = x.mul(&x1).mul(&xt);
    let p1 = x1.mul(&xt).scale(s[0]).add(&x.mul(&xt).scale(s[1])).add(&x.mul(&x1).scale(s[2]));
    let p0 = x.scale(&(r1 * &r2)).add(&lam(g, 1));
    let terms = BTreeMap::from([(2, p2), (1, p1), (0, p0)]);
    let params = rat_params(&[("t", t), ("s1", s[0]), ("s2", s[1]), ("s3", s[2]), ("r1", r1), ("r2", &r2)]);
    DiffOp::new(Family::Heun4, g, terms, params)
}

/// Second-order operator with singular points `0, 1, t_1..t_n, ∞` and
/// spectral terms `λ1 + λ2 x + ... + λn x^{n-1}`; `s` has `n + 2` entries.
pub fn heun_n(ts: &[Rat], s: &[Rat], r1: &Rat, r2: Option<&Rat>) -> Result<DiffOp> {
    let n = ts.len();
    if n == 0 {
        return Err(Error::Invalid("heun_n needs at least one point t_i".into()));
    }
    if s.len() != n + 2 {
        return Err(Error::Invalid(format!("heun_n with {n} points needs {} exponents s_i, got {}", n + 2, s.len())));
    }
    for (i, t) in ts.iter().enumerate() {
        distinct_from_01(&format!("t{}", i + 1), t)?;
        if ts[..i].contains(t) {
            return Err(Error::Constraint(format!("t{} = {t} repeats an earlier point", i + 1)));
        }
    }
    let total: Rat = s.iter().cloned().sum();
    let forced = &total - Rat::one() - r1;
    if let Some(r) = r2 {
        if *r != forced {
            return Err(Error::Constraint(format!("s1 + ... + s{} = {total} but r1 + r2 + 1 = {}", n + 2, r1 + r + Rat::one())));
        }
    }
    let r2 = forced;
    let g = n;
    let mut points = vec![Rat::zero(), Rat::one()];
    points.extend(ts.iter().cloned());
    let lin: Vec<Poly> = points.iter().map(|a| x_minus(g, a)).collect();
    let p2 = lin.iter().fold(xpoly(g, &[Rat::one()]), |acc, l| acc.mul(l));
    let mut p1 = Poly::zero_in(op_vars(g));
    for (i, si) in s.iter().enumerate() {
        let others = lin.iter().enumerate().filter(|(j, _)| *j != i).fold(xpoly(g, &[Rat::one()]), |acc, (_, l)| acc.mul(l));
        p1 = p1.add(&others.scale(si));
    }
    let mut xn = vec![Rat::zero(); n + 1];
    xn[n] = r1 * &r2;
    let mut p0 = xpoly(g, &xn);
    for k in 1..=n {
        let mut e = vec![0u32; g + 1];
        e[0] = (k - 1) as u32;
        e[k] = 1;
        p0.add_term(e, &Rat::one());
    }
    let terms = BTreeMap::from([(2, p2), (1, p1), (0, p0)]);
    let mut params = BTreeMap::new();
    for (i, t) in ts.iter().enumerate() {
        params.insert(format!("t{}", i + 1), t.clone());
    }
    for (i, si) in s.iter().enumerate() {
        params.insert(format!("s{}", i + 1), si.clone());
    }
    params.insert("r1".into(), r1.clone());
    params.insert("r2".into(), r2);
    DiffOp::new(Family::HeunN, g, terms, params)
}

/// Third-order operator with singular points `0, 1, ∞`.
pub fn third_order3(a: &[Rat; 6]) -> Result<DiffOp> {
    let g = 1;
    let x = xpoly(g, &[Rat::zero(), Rat::one()]);
    let x1 = x_minus(g, &Rat::one());
    let p3 = x.mul(&x).mul(&x1).mul(&x1);
    let p2 = x.mul(&x1).mul(&xpoly(g, &[a[0].clone(), a[1].clone()]));
    let p1 = xpoly(g, &[a[2].clone(), a[3].clone(), a[4].clone()]);
    let p0 = xpoly(g, &[Rat::zero(), a[5].clone()]).add(&lam(g, 1));
    let terms = BTreeMap::from([(3, p3), (2, p2), (1, p1), (0, p0)]);
    let params = (0..6).map(|i| (format!("a{}", i + 1), a[i].clone())).collect();
    DiffOp::new(Family::ThirdOrder3, g, terms, params)
}

/// Coefficients `P_0..P_N` of the normalized analytic solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTable {
    g: usize,
    p: Vec<Poly>,
}

impl SolutionTable {
    pub fn new(g: usize, p: Vec<Poly>) -> Self {
        SolutionTable { g, p }
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn upto(&self) -> usize {
        self.p.len() - 1
    }

    pub fn p(&self, i: usize) -> &Poly {
        &self.p[i]
    }

    pub fn polys(&self) -> &[Poly] {
        &self.p
    }

    /// `λ_k` carries weight `k`.
    pub fn weights(&self) -> Vec<u32> {
        (1..=self.g as u32).collect()
    }

    /// Observed weighted degree of every `P_i`.
    pub fn weighted_degrees(&self) -> Vec<Option<u32>> {
        let w = self.weights();
        self.p.iter().map(|p| p.weighted_degree(&w)).collect()
    }

    /// `Σ P_i x^i` over the given x-variable name.
    pub fn series(&self, var: &str) -> XSeries<Poly> {
        let proto = Poly::zero_in(lambda_vars(self.g));
        let mut s = XSeries::zero(&[var.to_string()], self.upto() as u32, proto);
        for (i, p) in self.p.iter().enumerate() {
            s.add_term(vec![i as u32], p.clone());
        }
        s
    }

    /// Table with `P_i` replaced, for uniqueness probes.
    pub fn with_replaced(&self, i: usize, p: Poly) -> Self {
        let mut t = self.clone();
        t.p[i] = p;
        t
    }
}

fn falling(i: i64, k: usize) -> i64 {
    (0..k as i64).map(|q| i - q).product()
}

/// Solves `D f = 0`, `f(0) = 1`, by coefficient matching.
///
/// With `s = k - m` for each piece `x^m c (d/dx)^k`, matching the
/// coefficient of `x^{i-1}` involves `a_i` only through pieces with
/// `s = 1`, whose sum is the pivot.
pub fn expand_solution(op: &DiffOp, n: usize) -> Result<SolutionTable> {
    let terms = op.op_terms();
    let smax = terms.iter().map(OpTerm::shift).max().unwrap();
    if smax != 1 {
        return Err(Error::NotNormalizable(format!("maximal degree shift is {smax}, expected 1")));
    }
    let lv = lambda_vars(op.g());
    let mut a: Vec<Poly> = vec![Poly::constant_in(lv.clone(), Rat::one())];
    for i in 1..=n {
        let mut piv = Poly::zero_in(lv.clone());
        for t in terms.iter().filter(|t| t.shift() == 1) {
            piv = piv.add(&t.c.scale(&Rat::int(falling(i as i64, t.k))));
        }
        let piv = piv.as_constant().ok_or_else(|| Error::NotNormalizable(format!("pivot at index {i} depends on λ: {piv}")))?;
        if piv.is_zero() {
            return Err(Error::Resonance(i));
        }
        let mut rest = Poly::zero_in(lv.clone());
        for t in terms.iter().filter(|t| t.shift() < 1) {
            let j = i as i64 - 1 + t.shift();
            if j < 0 {
                continue;
            }
            let ff = falling(j, t.k);
            if ff == 0 {
                continue;
            }
            rest = rest.add(&t.c.mul(&a[j as usize]).scale(&Rat::int(ff)));
        }
        a.push(rest.scale(&(-piv.recip()?)));
    }
    Ok(SolutionTable { g: op.g(), p: a })
}

/// Applies `Σ x_i^m c (∂/∂x_i)^k` to a series in x-variable `var`.
///
/// The result is truncated to the faithful window `N - max(0, max(k - m))`.
pub fn apply_x<C: Ring>(terms: &[(usize, u32, C)], f: &XSeries<C>, var: usize) -> Result<XSeries<C>> {
    let n = f.trunc();
    let shift = terms.iter().map(|(k, m, _)| *k as i64 - *m as i64).max().unwrap_or(0).max(0) as u32;
    if shift > n {
        return Err(Error::WindowCollapse { trunc: n, shift });
    }
    let w = n - shift;
    let mut out = XSeries::zero(f.vars(), w, f.proto().clone());
    let mut derivs = vec![f.clone()];
    for (k, m, c) in terms {
        while derivs.len() <= *k {
            let d = derivs.last().unwrap().deriv(var);
            derivs.push(d);
        }
        for (e, v) in derivs[*k].coeffs() {
            let mut ne = e.clone();
            ne[var] += m;
            out.add_term(ne, v.times(c));
        }
    }
    Ok(out)
}

/// Operator application to a single-variable solution series; the λ-terms
/// act through polynomial coefficients.
pub fn apply_op(op: &DiffOp, f: &XSeries<Poly>, var: usize) -> Result<XSeries<Poly>> {
    let terms: Vec<(usize, u32, Poly)> = op.op_terms().into_iter().map(|t| (t.k, t.m, t.c)).collect();
    apply_x(&terms, f, var)
}

/// Multiplies each Laurent coefficient by `y_k^m`.
fn shift_y(f: &XSeries<YLaurent>, k: usize, m: i32) -> XSeries<YLaurent> {
    f.map(|c| {
        let mut s = vec![0; c.vars().len()];
        s[k] = m;
        c.shift(&s)
    })
}

/// `Σ p_k(y) (∂/∂y_k)^j` on a kernel, λ-free terms.
pub fn apply_y(terms: &[(usize, u32, Rat)], f: &XSeries<YLaurent>, yk: usize) -> Result<XSeries<YLaurent>> {
    let mut out = XSeries::zero(f.vars(), f.trunc(), f.proto().clone());
    let mut derivs = vec![f.clone()];
    for (k, m, c) in terms {
        while derivs.len() <= *k {
            let d = derivs.last().unwrap().map(|v| v.deriv(yk));
            derivs.push(d);
        }
        out = out.add(&shift_y(&derivs[*k], yk, *m as i32).scale(c))?;
    }
    Ok(out)
}

/// Formal adjoint `Σ (-1)^k (∂/∂y_k)^k ∘ p_k(y)` on a kernel, λ-free terms.
pub fn apply_y_adjoint(terms: &[(usize, u32, Rat)], f: &XSeries<YLaurent>, yk: usize) -> Result<XSeries<YLaurent>> {
    let mut out = XSeries::zero(f.vars(), f.trunc(), f.proto().clone());
    for (k, m, c) in terms {
        let mut g = shift_y(f, yk, *m as i32).scale(c);
        for _ in 0..*k {
            g = g.map(|v| v.deriv(yk));
        }
        if k % 2 == 1 {
            g = g.neg();
        }
        out = out.add(&g)?;
    }
    Ok(out)
}

/// Nonzero coefficients of `D(Σ P_i x^i)` on the faithful window.
pub fn substitution_residual(op: &DiffOp, sol: &SolutionTable) -> Result<Vec<(u32, Poly)>> {
    let r = apply_op(op, &sol.series("x"), 0)?;
    Ok(r.coeffs().iter().map(|(e, c)| (e[0], c.clone())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn heun4_std() -> DiffOp {
        heun4(&r("2"), [&r("1/3"), &r("1/5"), &r("1/7")], &r("1/2"), None).unwrap()
    }

    #[test]
    fn first_order_is_derivative_minus_lambda() {
        let op = first_order_g(1).unwrap();
        let t = op.op_terms();
        assert_eq!(t.len(), 2);
        assert_eq!((t[0].k, t[0].m), (0, 0));
        assert_eq!(t[0].c, Poly::var(&["l1"], "l1").scale(&Rat::int(-1)));
        assert_eq!((t[1].k, t[1].m), (1, 0));
    }

    #[test]
    fn heun4_forces_r2() {
        let op = heun4_std();
        assert_eq!(op.param("r2").unwrap(), r("-173/210"));
        let bad = heun4(&r("2"), [&r("1/3"), &r("1/5"), &r("1/7")], &r("1/2"), Some(&r("1")));
        assert!(matches!(bad, Err(Error::Constraint(_))));
        assert!(heun4(&r("1"), [&r("1/3"), &r("1/5"), &r("1/7")], &r("1/2"), None).is_err());
    }

    #[test]
    fn exponential_coefficients() {
        let sol = expand_solution(&first_order_g(1).unwrap(), 4).unwrap();
        let l = Poly::var(&["l1"], "l1");
        for i in 0..=4 {
            assert_eq!(*sol.p(i), l.pow(i as u32).scale(&Rat::factorial(i as u32).recip().unwrap()));
        }
    }

    #[test]
    fn two_variable_exponential() {
        let sol = expand_solution(&first_order_g(2).unwrap(), 3).unwrap();
        let v = ["l1", "l2"];
        let l1 = Poly::var(&v, "l1");
        let l2 = Poly::var(&v, "l2");
        assert_eq!(*sol.p(1), l1);
        assert_eq!(*sol.p(2), l2.add(&l1.pow(2).scale(&Rat::new(1, 2))));
        assert_eq!(*sol.p(3), l1.mul(&l2).add(&l1.pow(3).scale(&Rat::new(1, 6))));
    }

    #[test]
    fn heun4_substitution_identity() {
        let op = heun4_std();
        let sol = expand_solution(&op, 6).unwrap();
        assert!(substitution_residual(&op, &sol).unwrap().is_empty());
        assert_eq!(op.window_shift(), 1);
    }

    #[test]
    fn perturbation_breaks_identity() {
        let op = heun4_std();
        let sol = expand_solution(&op, 6).unwrap();
        for i in [1, 2] {
            let bumped = sol.with_replaced(i, sol.p(i).add(&Poly::constant(&["l1"], Rat::one())));
            assert!(!substitution_residual(&op, &bumped).unwrap().is_empty());
        }
    }

    #[test]
    fn resonance_reported() {
        // x d/dx + d/dx ... pivot i(i - 1 + s1) vanishes at i = 2 when s1 = -1
        let op = heun4(&r("2"), [&r("-1"), &r("1/5"), &r("1/7")], &r("1/2"), None).unwrap();
        assert!(matches!(expand_solution(&op, 4), Err(Error::Resonance(2))));
    }

    #[test]
    fn apply_examples() {
        let vars = vec!["x".to_string()];
        let f = XSeries::from_poly(&parse_poly("1 + x + x^2/2", &["x"]).unwrap(), &vars, 2, &Rat::zero()).unwrap();
        let d = apply_x(&[(1, 0, Rat::one())], &f, 0).unwrap();
        assert_eq!(d.trunc(), 1);
        assert_eq!(d.coeff(&[0]), Rat::one());
        assert_eq!(d.coeff(&[1]), Rat::one());
        let g = XSeries::monomial(&vars, 3, vec![3], Rat::one());
        let e = apply_x(&[(1, 1, Rat::one())], &g, 0).unwrap();
        assert_eq!(e.trunc(), 3);
        assert_eq!(e.coeff(&[3]), Rat::int(3));
        let tiny = XSeries::monomial(&vars, 0, vec![0], Rat::one());
        assert!(matches!(apply_x(&[(2, 0, Rat::one())], &tiny, 0), Err(Error::WindowCollapse { .. })));
    }

    #[test]
    fn custom_operator_from_strings() {
        let op = DiffOp::from_strings(1, &[(1, "1".into()), (0, "-l1".into())]).unwrap();
        let sol = expand_solution(&op, 3).unwrap();
        assert_eq!(*sol.p(3), Poly::var(&["l1"], "l1").pow(3).scale(&Rat::new(1, 6)));
        assert!(DiffOp::from_strings(1, &[(1, "q".into())]).is_err());
    }

    #[test]
    fn presets_have_degree_i() {
        let ops = [first_order_g(1).unwrap(), heun4_std(), third_order3(&["1/2", "1/3", "1/5", "1/7", "1/11", "1/13"].map(r)).unwrap()];
        for op in &ops {
            let sol = expand_solution(op, 8).unwrap();
            for i in 0..=8 {
                assert_eq!(sol.p(i).degree_in(0), Some(i as u32));
            }
            assert!(substitution_residual(op, &sol).unwrap().is_empty());
        }
        let hn = heun_n(&["2", "3"].map(r), &["1/3", "1/5", "1/7", "1/11"].map(r), &r("1/2"), None).unwrap();
        let sol = expand_solution(&hn, 8).unwrap();
        assert!(substitution_residual(&hn, &sol).unwrap().is_empty());
        for (i, d) in sol.weighted_degrees().iter().enumerate() {
            assert_eq!(*d, Some(i as u32));
        }
    }
}
