//! Closed-form kernels expanded as exact truncated series, and the
//! inhomogeneous differential equations they satisfy.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::combinat::{permutations, tuples};
use crate::error::{Error, Result};
use crate::exact::linalg::Echelon;
use crate::exact::{parse_poly, var_names, Exps, Poly, Rat, Ring, XSeries, YExps, YLaurent};
use crate::kernel::{
    adjoint_defect, boundary_check, build_gen_kernel, first_mismatch, kernel_diffeq_check, negative_powers_check, symmetry_check, Check,
    KernelSeries, Mismatch,
};
use crate::ode::{expand_solution, DiffOp, Family};
use crate::sc::gen_structure_constants;

#[derive(Debug, Clone, PartialEq)]
pub struct HypergeomSpec {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
    pub trunc: u32,
}

/// `(a)_n (b)_n / ((c)_n n!)` for `n ≤ trunc`.
pub fn hypergeom_coeffs(a: &Rat, b: &Rat, c: &Rat, trunc: u32) -> Result<Vec<Rat>> {
    let mut out = vec![Rat::one()];
    let mut cur = Rat::one();
    for n in 0..trunc {
        let nr = Rat::int(n as i64);
        let den = (c + &nr) * (&nr + Rat::one());
        if den.is_zero() {
            return Err(Error::PochhammerPole(format!("c = {c} at n = {n}")));
        }
        cur = (cur * (a + &nr) * (b + &nr)).checked_div(&den)?;
        out.push(cur.clone());
    }
    Ok(out)
}

/// `F(a, b, c, u)` as a series in the single variable `u`.
pub fn hypergeom_series(spec: &HypergeomSpec) -> Result<XSeries<Rat>> {
    let cs = hypergeom_coeffs(&spec.a, &spec.b, &spec.c, spec.trunc)?;
    let mut s = XSeries::zero(&["u".to_string()], spec.trunc, Rat::zero());
    for (n, c) in cs.into_iter().enumerate() {
        s.add_term(vec![n as u32], c);
    }
    Ok(s)
}

/// `Σ c_n arg^n` by Horner's rule.
pub fn horner<R: Ring>(c: &[Rat], arg: &R) -> R {
    let mut acc = arg.zero_like();
    for ck in c.iter().rev() {
        acc = acc.times(arg).plus(&arg.const_like(ck));
    }
    acc
}

/// `F(a, b, c, arg)` for any argument ring element.
pub fn hypergeom_at<R: Ring>(a: &Rat, b: &Rat, c: &Rat, trunc: u32, arg: &R) -> Result<R> {
    Ok(horner(&hypergeom_coeffs(a, b, c, trunc)?, arg))
}

/// Drops everything below `y^{-m}` in each slot and marks it unknown.
fn clamp(s: XSeries<YLaurent>, m: u32) -> KernelSeries {
    let lo = vec![Some(-(m as i32)); s.proto().vars().len()];
    KernelSeries::new(s.map(|c| c.clone().with_floor(&lo)), m)
}

/// `x`-part times `y`-part.
fn outer(x: &XSeries<Rat>, y: &YLaurent) -> XSeries<YLaurent> {
    let mut s = XSeries::zero(x.vars(), x.trunc(), y.zero_like());
    for (e, c) in x.coeffs() {
        s.add_term(e.clone(), y.scale(c));
    }
    s
}

fn lift(x: &XSeries<Rat>, yv: &[String]) -> XSeries<YLaurent> {
    outer(x, &YLaurent::constant(yv, Rat::one()))
}

/// `1/(y - 1) = Σ_{k=1..m} y^{-k}`, faithful down to `y^{-m}`.
fn inv_y_minus_one(yv: &[String], m: u32) -> YLaurent {
    YLaurent::from_terms(yv, (1..=m as i32).map(|k| (vec![-k], Rat::one()))).with_floor(&[Some(-(m as i32))])
}

fn x_series(vars: &[String], n: u32) -> Vec<XSeries<Rat>> {
    vars.iter().map(|v| XSeries::var(vars, n, v, &Rat::zero())).collect()
}

/// Parses an expression in `x1, x2, y, v` (with `v = 1/y`) plus named
/// parameters into a one-variable kernel-shaped series.
fn xyv(expr: &str, params: &[(&str, &Rat)], n: u32) -> Result<XSeries<YLaurent>> {
    let mut names = vec!["x1", "x2", "y", "v"];
    names.extend(params.iter().map(|(p, _)| *p));
    let p = parse_poly(expr, &names)?;
    let xv = var_names("x", 2);
    let yv = var_names("y", 1);
    let proto = XSeries::zero(&xv, n, YLaurent::zero(&yv));
    let mut args: Vec<XSeries<YLaurent>> = x_series(&xv, n).iter().map(|s| lift(s, &yv)).collect();
    args.push(XSeries::constant(&xv, n, YLaurent::monomial(&yv, vec![1], Rat::one())));
    args.push(XSeries::constant(&xv, n, YLaurent::monomial(&yv, vec![-1], Rat::one())));
    for (_, v) in params {
        args.push(proto.const_like(v));
    }
    Ok(p.eval_in(&args, &proto))
}

fn require(op: &DiffOp, fam: Family) -> Result<()> {
    if op.family() != fam {
        return Err(Error::Invalid(format!("expected a {} operator, got {}", fam.name(), op.family().name())));
    }
    Ok(())
}

/// Result of comparing an oracle with a constructed kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub pass: bool,
    pub x_trunc: u32,
    pub y_window: u32,
    pub compared: usize,
    pub failure: Option<Mismatch>,
}

/// Compares on coefficients faithful in both series with x-degree `≤ n`.
pub fn compare_kernels(oracle: &KernelSeries, k: &KernelSeries, n: u32) -> OracleReport {
    let mut compared = 0;
    let (a, b) = (oracle.series(), k.series());
    let keys: BTreeSet<&Exps> = a.coeffs().keys().chain(b.coeffs().keys()).collect();
    for x in keys {
        if x.iter().sum::<u32>() > n {
            continue;
        }
        let (ca, cb) = (a.coeff(x), b.coeff(x));
        let ys: BTreeSet<&YExps> = ca.terms().keys().chain(cb.terms().keys()).collect();
        compared += ys.into_iter().filter(|y| ca.in_window(y) && cb.in_window(y)).count();
    }
    let failure = first_mismatch(a, b, n);
    OracleReport { pass: failure.is_none(), x_trunc: n, y_window: oracle.y_window().min(k.y_window()), compared, failure }
}

/// Monomial-symmetric polynomial rewritten in elementary symmetric ones.
fn to_elementary(f: &Poly, e: &[Poly]) -> Result<Poly> {
    let g = e.len();
    let evars = var_names("e", g);
    let mut rest = f.clone();
    let mut out = Poly::zero_in(evars.clone());
    while let Some((lead, c)) = rest.terms().iter().next_back().map(|(a, c)| (a.clone(), c.clone())) {
        if lead.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Invalid(format!("not symmetric: leading exponent {lead:?}")));
        }
        let d: Exps = (0..g).map(|k| lead[k] - lead.get(k + 1).copied().unwrap_or(0)).collect();
        let mut p = Poly::constant_in(f.vars().to_vec(), c.clone());
        for (k, &dk) in d.iter().enumerate() {
            p = p.mul(&e[k].pow(dk));
        }
        rest = rest.sub(&p);
        out.add_term(d, &c);
    }
    Ok(out)
}

fn elementary(vars: &[String], k: usize) -> Poly {
    let mut p = Poly::zero_in(vars.to_vec());
    for t in tuples(vars.len(), k) {
        if t.iter().sum::<usize>() == k && t.iter().all(|&a| a <= 1) {
            p.add_term(t.iter().map(|&a| a as u32).collect(), &Rat::one());
        }
    }
    p
}

/// `(1/g!) Σ_σ Π 1/(y_{σ_k} - q_k)` with `e_k(q) = e_k(x_1..x_{g+1})`,
/// expanded without extracting roots.
pub fn oracle_first_order(g: usize, n: u32, m: u32) -> Result<KernelSeries> {
    if g == 0 {
        return Err(Error::Invalid("g must be at least 1".into()));
    }
    let qv = var_names("q", g);
    let xv = var_names("x", g + 1);
    let yv = var_names("y", g);
    let eq: Vec<Poly> = (1..=g).map(|k| elementary(&qv, k)).collect();
    let ex: Vec<Poly> = (1..=g).map(|k| elementary(&xv, k)).collect();
    let perms = permutations(g);
    let inv_fact = Rat::factorial(g as u32).recip()?;
    let mut s = XSeries::zero(&xv, n, YLaurent::zero(&yv));
    for mm in tuples(g, n as usize) {
        if mm.iter().any(|&a| a as u32 >= m) {
            continue;
        }
        let mut f = Poly::zero_in(qv.clone());
        for sigma in &perms {
            f.add_term(sigma.iter().map(|&j| mm[j] as u32).collect(), &inv_fact);
        }
        let px = to_elementary(&f, &eq)?.compose(&ex);
        let ye: YExps = mm.iter().map(|&a| -(a as i32) - 1).collect();
        for (e, c) in px.terms() {
            s.add_term(e.clone(), YLaurent::monomial(&yv, ye.clone(), c.clone()));
        }
    }
    Ok(KernelSeries::new(s, m))
}

struct Heun4Params {
    t: Rat,
    s: [Rat; 3],
    r1: Rat,
    r2: Rat,
}

fn heun4_params(op: &DiffOp) -> Result<Heun4Params> {
    require(op, Family::Heun4)?;
    Ok(Heun4Params { t: op.param("t")?, s: [op.param("s1")?, op.param("s2")?, op.param("s3")?], r1: op.param("r1")?, r2: op.param("r2")? })
}

/// Sum over `i < M` of the hypergeometric series representation.
pub fn oracle_heun_hypergeometric(op: &DiffOp, n: u32, m: u32) -> Result<KernelSeries> {
    let Heun4Params { t, s: [s1, _, s3], r1, r2 } = heun4_params(op)?;
    let one = Rat::one();
    let al = &r1 + &r2 - &s1 - &s3;
    let be = &r1 + &r2 - &s1;
    let xv = var_names("x", 2);
    let yv = var_names("y", 1);
    let [x1, x2]: [XSeries<Rat>; 2] = x_series(&xv, n).try_into().expect("two variables");
    let x12 = x1.mul(&x2)?;
    let c = |v: &Rat| XSeries::constant(&xv, n, v.clone());
    let den = x12.sub(&c(&t))?.inv()?;
    let u = x1.sub(&c(&one))?.mul(&x2.sub(&c(&one))?)?.mul(&den)?.scale(&t.checked_div(&(&t - &one))?);
    let z = x12.scale(&t.recip()?);
    let zm1 = z.sub(&c(&one))?;
    let yinv = inv_y_minus_one(&yv, m);
    let w = yinv.scale(&(&t - &one));
    let mut total = XSeries::zero(&xv, n, YLaurent::zero(&yv));
    for i in 0..m {
        let ir = Rat::int(i as i64);
        let pden = Rat::poch(&(&be + &ir), i);
        if pden.is_zero() {
            return Err(Error::PochhammerPole(format!("(r1+r2-s1+{i})_{i}")));
        }
        let a = Rat::poch(&(&al + &one), i).checked_div(&pden)?;
        let f1 = hypergeom_at(&(&ir + &one), &(&al + &ir + &one), &(&be + &ir * Rat::int(2) + &one), m, &w)?;
        let f2 = hypergeom_at(&-&ir, &(&be + &ir), &(&al + &one), i, &u)?;
        let f3 = hypergeom_at(&(&r1 + &ir), &(&r2 + &ir), &s1, n, &z)?;
        let xpart = f2.mul(&f3)?.mul(&zm1.pow_u(i))?;
        let ypart = yinv.mul(&f1)?.mul(&w.pow_u(i))?.scale(&a);
        total = total.add(&outer(&xpart, &ypart))?;
    }
    Ok(clamp(total, m))
}

/// Algebraic kernel for `s1 = r1 = 1`.
pub fn oracle_heun_algebraic(op: &DiffOp, n: u32) -> Result<KernelSeries> {
    let Heun4Params { t, s: [s1, s2, s3], r1, .. } = heun4_params(op)?;
    if !s1.is_one() || !r1.is_one() {
        return Err(Error::Constraint(format!("needs s1 = r1 = 1, got s1 = {s1}, r1 = {r1}")));
    }
    let ti = t.recip()?;
    let p = xyv(
        "1 - 2*x1*v - 2*x2*v + x1^2*v^2 + x2^2*v^2 - 2*a*x1^2*x2*v - 2*a*x1*x2^2*v + a^2*x1^2*x2^2 \
         + 2*a*x1*x2*(2*t*v - 1 - t*v^2 + 2*v)",
        &[("t", &t), ("a", &ti)],
        n,
    )?;
    let sq = p.sqrt()?;
    let lin = xyv("x1 + x2 + y", &[], n)?;
    let x12y = xyv("x1*x2*y", &[], n)?;
    let y = xyv("y", &[], n)?;
    let num = |k: &Rat| -> Result<XSeries<YLaurent>> { lin.scale(&-&t).add(&x12y)?.add(&y.mul(&sq)?.scale(&t))?.add(&p.const_like(k)) };
    let d1 = xyv("(1 - x1)*(1 - x2)", &[], n)?.inv()?;
    let d2 = xyv("(t - x1)*(t - x2)", &[("t", &t)], n)?.inv()?;
    let two = Rat::int(2);
    let b1 = num(&(&two * &t))?.mul(&d1)?.scale(&(&two * &t).recip()?);
    let b2 = num(&(&two * &t * &t))?.mul(&d2)?.scale(&two.recip()?);
    let v = xyv("v", &[], n)?;
    let k = b1.pow_rat(&(&s2 - Rat::one()))?.mul(&b2.pow_rat(&(&s3 - Rat::one()))?)?.mul(&v)?.mul(&p.pow_rat(&Rat::new(-1, 2))?)?;
    if let Some((x, c)) = k.coeffs().iter().find(|(_, c)| c.max_exponent().is_some_and(|e| e >= 0)) {
        return Err(Error::Inconsistent(format!("non-negative y-exponent at x^{x:?}: {c:?}")));
    }
    let m = k.coeffs().values().flat_map(|c| c.terms().keys().map(|e| -e[0])).max().unwrap_or(1) as u32;
    Ok(KernelSeries::new(k, m))
}

struct Third {
    sb: Rat,
    pb: Rat,
    e: [Rat; 3],
    a4: Rat,
}

impl Third {
    fn new(op: &DiffOp) -> Result<Self> {
        require(op, Family::ThirdOrder3)?;
        let a: Vec<Rat> = (1..=6).map(|i| op.param(&format!("a{i}"))).collect::<Result<_>>()?;
        let three = Rat::int(3);
        Ok(Third {
            sb: -&a[0] - Rat::one(),
            pb: a[2].clone(),
            e: [&a[1] - &three, &a[4] - &a[1] + Rat::int(2), a[5].clone()],
            a4: a[3].clone(),
        })
    }

    /// `Π_k (l + c_k)`.
    fn c(&self, l: i64) -> Rat {
        let l = Rat::int(l);
        &l * &l * &l + &self.e[0] * &l * &l + &self.e[1] * &l + &self.e[2]
    }

    /// `Π_k (l + b_k)`.
    fn b(&self, l: i64) -> Rat {
        let l = Rat::int(l);
        &l * &l + &self.sb * &l + &self.pb
    }

    fn big_e(&self, l: i64) -> Rat {
        let lr = Rat::int(l);
        &self.pb + &self.e[1] + &self.a4 + &lr * &self.e[0] + (Rat::one() - &lr) * &self.sb + &lr * &lr - &lr + Rat::one()
    }
}

/// Triple sum representation of the third-order kernel.
pub fn oracle_third_order(op: &DiffOp, n: u32, m: u32) -> Result<KernelSeries> {
    let p = Third::new(op)?;
    let xv = var_names("x", 2);
    let yv = var_names("y", 1);
    let [x1, x2]: [XSeries<Rat>; 2] = x_series(&xv, n).try_into().expect("two variables");
    let one = XSeries::constant(&xv, n, Rat::one());
    let x12 = x1.mul(&x2)?;
    let w = x1.sub(&one)?.mul(&x2.sub(&one)?)?;
    let yinv = inv_y_minus_one(&yv, m);
    let mut total = XSeries::zero(&xv, n, YLaurent::zero(&yv));
    for i in 0..=(n / 2) as i64 {
        let mut bprod = Rat::one();
        for l in 0..i {
            let b = p.b(l);
            if b.is_zero() {
                return Err(Error::PochhammerPole(format!("b-product vanishes at l = {l}")));
            }
            bprod *= &b;
        }
        for j in 0..m as i64 {
            for k in j..=(i + j).min(m as i64 - 1) {
                let mut c = Rat::factorial(k as u32)
                    .checked_div(&(Rat::factorial(j as u32) * Rat::factorial((k - j) as u32) * Rat::factorial((i + j - k) as u32)))?;
                if j % 2 == 1 {
                    c = -c;
                }
                for l in j + 1..=k {
                    c *= &p.big_e(l);
                }
                for l in k..i + j {
                    c *= &p.c(l);
                }
                let c = c.checked_div(&bprod)?;
                if c.is_zero() {
                    continue;
                }
                let xpart = x12.pow_u(i as u32).mul(&w.pow_u(j as u32))?;
                let ypart = yinv.pow_u(k as u32 + 1).scale(&c);
                total = total.add(&outer(&xpart, &ypart))?;
            }
        }
    }
    Ok(clamp(total, m))
}

/// Outcome of the three-equation check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquationReport {
    pub pass: bool,
    pub window: u32,
    /// `D_{x1}K - D_{x2}K = 0`.
    pub symmetric: Check,
    /// `D*_y K - D_{x1}K` equals the stated series.
    pub adjoint: Check,
    /// The difference carries no y-dependence.
    pub adjoint_y_free: bool,
    /// Cleared first-order equation (only for the Heun case).
    pub first_order: Option<Check>,
}

fn y_free(s: &XSeries<YLaurent>) -> bool {
    s.coeffs().values().all(|c| c.terms().keys().all(|e| e.iter().all(|&v| v == 0)))
}

fn finish(symmetric: Check, adjoint: Check, y_free: bool, first_order: Option<Check>, window: u32) -> EquationReport {
    let pass = symmetric.pass && adjoint.pass && y_free && first_order.as_ref().is_none_or(|c| c.pass);
    EquationReport { pass, window, symmetric, adjoint, adjoint_y_free: y_free, first_order }
}

/// The three differential equations of the four-point Heun kernel.
pub fn check_heun_equations(k: &KernelSeries, op: &DiffOp) -> Result<EquationReport> {
    let Heun4Params { t, s: [s1, s2, _], r1, r2 } = heun4_params(op)?;
    let n = k.trunc();
    let one = Rat::one();
    let sym = kernel_diffeq_check(k, op)?.symmetric;
    let defect = adjoint_defect(k, op)?;
    let window = defect.trunc();
    let yv = k.y_vars().to_vec();
    let xv = k.x_vars().to_vec();
    let [x1, x2]: [XSeries<Rat>; 2] = x_series(&xv, n).try_into().expect("two variables");
    let z = x1.mul(&x2)?.scale(&t.recip()?);
    let rhs_b = lift(&hypergeom_at(&r1, &r2, &s1, n, &z)?, &yv).scale(&((&r1 - &one) * (&r2 - &one)));
    let adj = Check::from_failure(first_mismatch(&defect, &rhs_b, window));

    let pr = [("t", &t), ("r1", &r1), ("r2", &r2), ("s1", &s1), ("s2", &s2)];
    let a1 = xyv("x1*x2*(x2 - y)*(x1 - 1)*(x1 - t)", &pr, n)?;
    let a2 = xyv("x1*x2*(x1 - y)*(x2 - 1)*(x2 - t)", &pr, n)?;
    let a3 = xyv("x1*x2*(x1 - x2)*(y - 1)*(y - t)", &pr, n)?;
    let a4 =
        xyv("(x1 - x2)*((r1 + r2 - 2)*x1*x2*y + (s2 + 1 - r1 - r2)*x1*x2 - (s1 + s2 - 2)*t*x1*x2 + (s1 - 1)*t*(x1 + x2 - y))", &pr, n)?;
    let ks = k.series();
    let lhs = a1.mul(&ks.deriv(0))?.sub(&a2.mul(&ks.deriv(1))?)?.add(&a3.mul(&ks.map(|c| c.deriv(0)))?)?.sub(&a4.mul(ks)?)?;
    let f = hypergeom_at(&(&r1 - &one), &(&r2 - &one), &(&s1 - &one), n, &z)?;
    let rhs_c = lift(&x1.sub(&x2)?.mul(&f)?, &yv).scale(&((&s1 - &one) * &t));
    let first = Check::from_failure(first_mismatch(&lhs, &rhs_c, n.saturating_sub(1)));
    Ok(finish(sym, adj, y_free(&defect), Some(first), window))
}

/// `c(-1) Σ_i Π_{l<i} c(l)/b(l) (x1 x2)^i / i!`.
pub fn third_order_defect_rhs(op: &DiffOp, n: u32) -> Result<XSeries<Rat>> {
    let p = Third::new(op)?;
    let xv = var_names("x", 2);
    let [x1, x2]: [XSeries<Rat>; 2] = x_series(&xv, n).try_into().expect("two variables");
    let x12 = x1.mul(&x2)?;
    let mut coeffs = Vec::new();
    let mut c = Rat::one();
    for i in 0..=(n / 2) as i64 {
        coeffs.push(c.checked_div(&Rat::factorial(i as u32))?);
        let b = p.b(i);
        if b.is_zero() {
            return Err(Error::PochhammerPole(format!("b-product vanishes at l = {i}")));
        }
        c = (c * p.c(i)).checked_div(&b)?;
    }
    Ok(horner(&coeffs, &x12).scale(&p.c(-1)))
}

/// The two differential equations of the third-order kernel.
pub fn check_third_order_equations(k: &KernelSeries, op: &DiffOp) -> Result<EquationReport> {
    let sym = kernel_diffeq_check(k, op)?.symmetric;
    let defect = adjoint_defect(k, op)?;
    let window = defect.trunc();
    let rhs = lift(&third_order_defect_rhs(op, k.trunc())?, k.y_vars());
    let adj = Check::from_failure(first_mismatch(&defect, &rhs, window));
    Ok(finish(sym, adj, y_free(&defect), None, window))
}

/// Characterizing properties and the series formula for the multi-point kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultipointReport {
    pub pass: bool,
    pub symmetry: Check,
    pub negative_powers: Check,
    pub differential_equation: Check,
    pub boundary: Check,
    /// Number of nonzero `Q` coefficients solved.
    pub q_coefficients: usize,
    pub x_trunc: u32,
    pub y_degree: u32,
    pub compared: usize,
    pub formula: Check,
}

struct HeunNParams {
    ts: Vec<Rat>,
    s: Vec<Rat>,
    r1: Rat,
    r2: Rat,
}

fn heun_n_params(op: &DiffOp) -> Result<HeunNParams> {
    require(op, Family::HeunN)?;
    let n = op.g();
    Ok(HeunNParams {
        ts: (1..=n).map(|i| op.param(&format!("t{i}"))).collect::<Result<_>>()?,
        s: (1..=n + 2).map(|i| op.param(&format!("s{i}"))).collect::<Result<_>>()?,
        r1: op.param("r1")?,
        r2: op.param("r2")?,
    })
}

/// `u_0, u_1..u_n` as elements of a ring generated by the x-variables.
fn u_values<R: Ring>(p: &HeunNParams, xs: &[R]) -> Result<Vec<R>> {
    let one = Rat::one();
    let prod = |a: &Rat| xs.iter().fold(xs[0].one_like(), |acc, x| acc.times(&x.minus(&x.const_like(a))));
    let d0: Rat = p.ts.iter().fold(Rat::one(), |acc, t| acc * (t - &one));
    let mut out = vec![prod(&one).scale(&d0.recip()?)];
    for (i, ti) in p.ts.iter().enumerate() {
        let mut d = ti * (ti - &one);
        for (j, tj) in p.ts.iter().enumerate() {
            if j != i {
                d *= &(tj - ti);
            }
        }
        out.push(prod(ti).scale(&d.recip()?));
    }
    Ok(out)
}

/// `u_0^I P_i(u_1/u_0, ..)` as a polynomial in the `u`'s.
fn r_value<R: Ring>(p: &HeunNParams, i: &[usize], pw: &[Vec<R>]) -> Result<R> {
    let n = i.len();
    let big: usize = i.iter().sum();
    let mut acc = pw[0][0].zero_like();
    for j in tuples(n, big) {
        if j.iter().zip(i).any(|(a, b)| a > b) {
            continue;
        }
        let jt: usize = j.iter().sum();
        let mut c = Rat::one();
        for l in 1..=jt {
            c *= &(&p.s[1] + Rat::int((big - l) as i64));
        }
        for (k, (&jk, &ik)) in j.iter().zip(i).enumerate() {
            for l in 1..=jk {
                c *= &Rat::int((ik - l + 1) as i64);
                let d = &p.s[k + 2] + Rat::int(l as i64 - 1);
                c = c.checked_div(&d)?;
            }
            c = c.checked_div(&Rat::factorial(jk as u32))?;
        }
        if c.is_zero() {
            continue;
        }
        let mut term = pw[0][big - jt].clone();
        for (k, &jk) in j.iter().enumerate() {
            term = term.times(&pw[k + 1][jk]);
        }
        acc = acc.plus(&term.scale(&c));
    }
    Ok(acc)
}

fn power_table<R: Ring>(us: &[R], upto: usize) -> Vec<Vec<R>> {
    us.iter()
        .map(|u| {
            let mut v = vec![u.one_like()];
            for _ in 0..upto {
                let nxt = v.last().unwrap().times(u);
                v.push(nxt);
            }
            v
        })
        .collect()
}

/// `Q` coefficients keyed by index tuple, then by y-exponents.
pub type QTable = BTreeMap<Vec<usize>, BTreeMap<Vec<u32>, Rat>>;

/// Solves the `Q_i` Laurent coefficients up to total y-degree `dmax` from
/// the boundary slice `x_{n+1} = 0`.
pub fn solve_q(op: &DiffOp, dmax: u32) -> Result<QTable> {
    let p = heun_n_params(op)?;
    let n = p.ts.len();
    let dmax = dmax as usize;
    if dmax < n {
        return Ok(BTreeMap::new());
    }
    let xv = var_names("x", n);
    let mut xs: Vec<Poly> = xv.iter().map(|v| Poly::var_in(xv.clone(), v)).collect();
    xs.push(Poly::zero_in(xv.clone()));
    let us = u_values(&p, &xs)?;
    let pw = power_table(&us, dmax - n);
    let mut r0: BTreeMap<Vec<usize>, Poly> = BTreeMap::new();
    for i in tuples(n, dmax - n) {
        r0.insert(i.clone(), r_value(&p, &i, &pw)?);
    }
    let perms = permutations(n);
    let inv_fact = Rat::factorial(n as u32).recip()?;
    let mut q: BTreeMap<Vec<usize>, BTreeMap<Vec<u32>, Rat>> = BTreeMap::new();
    for d in n..=dmax {
        let unknowns: Vec<&Vec<usize>> = r0.keys().filter(|i| i.iter().sum::<usize>() <= d - n).collect();
        let targets: Vec<Vec<u32>> = tuples(n, d - n)
            .into_iter()
            .filter(|b| b.iter().sum::<usize>() == d - n)
            .map(|b| b.iter().map(|&v| v as u32 + 1).collect())
            .collect();
        let mut mons: BTreeSet<Exps> = unknowns.iter().flat_map(|i| r0[*i].terms().keys().cloned()).collect();
        for a in &targets {
            mons.extend(perms.iter().map(|s| s.iter().map(|&k| a[k] - 1).collect::<Exps>()));
        }
        let mons: Vec<Exps> = mons.into_iter().collect();
        let rows: Vec<Vec<Rat>> = mons.iter().map(|mo| unknowns.iter().map(|i| r0[*i].coeff(mo)).collect()).collect();
        let rhs: Vec<Vec<Rat>> = mons
            .iter()
            .map(|mo| {
                targets
                    .iter()
                    .map(|a| {
                        let hits = perms.iter().filter(|s| s.iter().enumerate().all(|(k, &sk)| mo[k] + 1 == a[sk])).count();
                        &inv_fact * Rat::int(hits as i64)
                    })
                    .collect()
            })
            .collect();
        let e = Echelon::new(&rows, &rhs, unknowns.len(), targets.len());
        if let Some((k, _)) = e.inconsistency() {
            return Err(Error::Inconsistent(format!("Q system at y-exponents {:?}", targets[k])));
        }
        if !e.free_columns().is_empty() {
            return Err(Error::Inconsistent(format!("Q system underdetermined at total y-degree {d}")));
        }
        for (a, sol) in targets.iter().zip(e.back_substitute()?) {
            for (i, v) in unknowns.iter().zip(sol) {
                if !v.is_zero() {
                    q.entry((*i).clone()).or_default().insert(a.clone(), v);
                }
            }
        }
    }
    Ok(q)
}

/// Characterizing properties on the constructed kernel, then the series formula
/// compared for x-degree `≤ n` and total y-degree `≤ dmax`.
pub fn check_multipoint(op: &DiffOp, n: u32, dmax: u32) -> Result<MultipointReport> {
    let p = heun_n_params(op)?;
    let sol = expand_solution(op, n as usize)?;
    let k = build_gen_kernel(&gen_structure_constants(&sol, n as usize)?);
    let symmetry = symmetry_check(&k);
    let negative_powers = negative_powers_check(&k);
    let differential_equation = kernel_diffeq_check(&k, op)?.symmetric;
    let boundary = boundary_check(&k);

    let q = solve_q(op, dmax)?;
    let xv = k.x_vars().to_vec();
    let yv = k.y_vars().to_vec();
    let xs = x_series(&xv, n);
    let us = u_values(&p, &xs)?;
    let pw = power_table(&us, dmax as usize);
    let tprod: Rat = p.ts.iter().fold(Rat::one(), |acc, t| acc * t);
    let z = xs.iter().skip(1).fold(xs[0].clone(), |acc, x| acc.times(x)).scale(&tprod.recip()?);
    let mut oracle = XSeries::zero(&xv, n, YLaurent::zero(&yv));
    for (i, qi) in &q {
        let big = Rat::int(i.iter().sum::<usize>() as i64);
        let f = hypergeom_at(&(&p.r1 + &big), &(&p.r2 + &big), &p.s[0], n, &z)?;
        let xpart = f.mul(&r_value(&p, i, &pw)?)?;
        let ypart = YLaurent::from_terms(&yv, qi.iter().map(|(a, v)| (a.iter().map(|&e| -(e as i32)).collect(), v.clone())));
        oracle = oracle.add(&outer(&xpart, &ypart))?;
    }
    let in_range = |y: &YExps| y.iter().map(|e| -e).sum::<i32>() <= dmax as i32;
    let mut compared = 0;
    let mut failure = None;
    let keys: BTreeSet<&Exps> = oracle.coeffs().keys().chain(k.series().coeffs().keys()).collect();
    'outer: for x in keys {
        let (a, b) = (oracle.coeff(x), k.series().coeff(x));
        let ys: BTreeSet<&YExps> = a.terms().keys().chain(b.terms().keys()).collect();
        for y in ys.into_iter().filter(|y| in_range(y)) {
            compared += 1;
            let (va, vb) = (a.terms().get(y).cloned().unwrap_or_default(), b.terms().get(y).cloned().unwrap_or_default());
            if va != vb {
                failure = Some(Mismatch { x: x.clone(), y: y.clone(), found: vb, expected: va });
                break 'outer;
            }
        }
    }
    let formula = Check::from_failure(failure);
    let pass = symmetry.pass && negative_powers.pass && differential_equation.pass && boundary.pass && formula.pass;
    Ok(MultipointReport {
        pass,
        symmetry,
        negative_powers,
        differential_equation,
        boundary,
        q_coefficients: q.values().map(|m| m.len()).sum(),
        x_trunc: n,
        y_degree: dmax,
        compared,
        formula,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::build_kernel;
    use crate::ode::{first_order_g, heun4, heun_n, third_order3};
    use crate::sc::structure_constants;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn heun4_op() -> DiffOp {
        heun4(&r("2"), [&r("1/3"), &r("1/5"), &r("1/7")], &r("1/2"), None).unwrap()
    }

    fn kernel_of(op: &DiffOp, n: usize) -> KernelSeries {
        build_kernel(&structure_constants(&expand_solution(op, 2 * n).unwrap(), n).unwrap())
    }

    #[test]
    fn hypergeom_basics() {
        let s = hypergeom_series(&HypergeomSpec { a: r("1/2"), b: r("1/3"), c: r("1/5"), trunc: 6 }).unwrap();
        assert_eq!(s.coeff(&[0]), Rat::one());
        assert_eq!(s.coeff(&[1]), r("1/2") * r("1/3") / r("1/5"));
        let g = hypergeom_series(&HypergeomSpec { a: Rat::one(), b: Rat::one(), c: Rat::one(), trunc: 8 }).unwrap();
        assert!((0..=8).all(|n| g.coeff(&[n]).is_one()));
        assert!(matches!(hypergeom_coeffs(&Rat::one(), &Rat::one(), &Rat::int(-2), 5), Err(Error::PochhammerPole(_))));
    }

    #[test]
    fn hypergeom_derivative_identity() {
        let (a, b, c) = (r("1/2"), r("-3/7"), r("5/3"));
        let f = hypergeom_series(&HypergeomSpec { a: a.clone(), b: b.clone(), c: c.clone(), trunc: 10 }).unwrap();
        let one = Rat::one();
        let g = hypergeom_series(&HypergeomSpec { a: &a + &one, b: &b + &one, c: &c + &one, trunc: 9 }).unwrap();
        let k = &a * &b / &c;
        for n in 0..9 {
            assert_eq!(f.deriv(0).coeff(&[n]), &k * &g.coeff(&[n]));
        }
    }

    #[test]
    fn first_order_oracle() {
        let o = oracle_first_order(2, 4, 6).unwrap();
        assert_eq!(o.coeff(&[0, 0, 0], &[-1, -1]), Rat::one());
        for x in [[1, 0, 0], [0, 1, 0], [0, 0, 1]] {
            assert_eq!(o.coeff(&x, &[-2, -1]), Rat::new(1, 2));
        }
        let op = first_order_g(2).unwrap();
        let k = build_gen_kernel(&gen_structure_constants(&expand_solution(&op, 4).unwrap(), 4).unwrap());
        assert!(compare_kernels(&o, &k, 4).pass);
        let o1 = oracle_first_order(1, 6, 8).unwrap();
        assert!(compare_kernels(&o1, &kernel_of(&first_order_g(1).unwrap(), 6), 6).pass);
    }

    #[test]
    fn heun_hypergeometric_oracle() {
        let op = heun4_op();
        let o = oracle_heun_hypergeometric(&op, 6, 8).unwrap();
        assert_eq!(o.coeff(&[0, 0], &[-1]), Rat::one());
        let rep = compare_kernels(&o, &kernel_of(&op, 6), 6);
        assert!(rep.pass, "{:?}", rep.failure);
        assert!(rep.compared > 50);
        assert!(boundary_check(&o).pass);
        assert!(symmetry_check(&o).pass);
    }

    #[test]
    fn heun_algebraic_oracle() {
        let op = heun4(&r("2"), [&Rat::one(), &r("1/5"), &r("1/7")], &Rat::one(), None).unwrap();
        let o = oracle_heun_algebraic(&op, 6).unwrap();
        let c0 = o.series().coeff(&[0, 0]);
        assert_eq!(c0.terms().len(), 1);
        assert_eq!(c0.terms()[&vec![-1]], Rat::one());
        assert!(symmetry_check(&o).pass);
        let rep = compare_kernels(&o, &kernel_of(&op, 6), 6);
        assert!(rep.pass, "{:?}", rep.failure);
        assert!(matches!(oracle_heun_algebraic(&heun4_op(), 4), Err(Error::Constraint(_))));
    }

    fn third() -> DiffOp {
        third_order3(&["1/2", "1/3", "1/5", "1/7", "1/11", "1/13"].map(r)).unwrap()
    }

    #[test]
    fn third_order_oracle() {
        let op = third();
        let o = oracle_third_order(&op, 6, 8).unwrap();
        assert!(negative_powers_check(&o).pass);
        assert!(boundary_check(&o).pass);
        let rep = compare_kernels(&o, &kernel_of(&op, 6), 6);
        assert!(rep.pass, "{:?}", rep.failure);
    }

    #[test]
    fn heun_equations() {
        let op = heun4_op();
        let rep = check_heun_equations(&kernel_of(&op, 8), &op).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.window, 7);
        // r1 = 1 makes the adjoint equation homogeneous
        let op = heun4(&r("2"), [&r("1/3"), &r("1/5"), &r("1/7")], &Rat::one(), None).unwrap();
        let k = kernel_of(&op, 6);
        assert!(adjoint_defect(&k, &op).unwrap().is_empty());
        assert!(check_heun_equations(&k, &op).unwrap().pass);
    }

    #[test]
    fn third_order_equations() {
        let op = third();
        let rep = check_third_order_equations(&kernel_of(&op, 6), &op).unwrap();
        assert!(rep.pass, "{rep:?}");
        let p = Third::new(&op).unwrap();
        assert_eq!(third_order_defect_rhs(&op, 6).unwrap().coeff(&[0, 0]), p.c(-1));
        // a6 = 6 - 2 a2 + a5 puts -1 among the roots of c
        let a6 = Rat::int(6) - r("2/3") + r("1/11");
        let op = third_order3(&[r("1/2"), r("1/3"), r("1/5"), r("1/7"), r("1/11"), a6]).unwrap();
        assert!(third_order_defect_rhs(&op, 6).unwrap().is_empty());
        assert!(check_third_order_equations(&kernel_of(&op, 6), &op).unwrap().pass);
    }

    #[test]
    fn multipoint_formula() {
        let op = heun_n(&["2", "3"].map(r), &["1/3", "1/5", "1/7", "1/11"].map(r), &r("1/2"), None).unwrap();
        let rep = check_multipoint(&op, 4, 10).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.compared > 100);
    }
}
