//! Residue pairings of kernels: multiplication, associativity and the
//! generalized-product symmetry.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::combinat::{count_distinct_permutations, distinct_permutations, sorted_tuples, tuples};
use crate::error::{Error, Result};
use crate::exact::{var_names, Exps, Poly, Rat, XSeries, YLaurent};
use crate::kernel::KernelSeries;
use crate::ode::SolutionTable;
use crate::sc::{GenSCTable, SCTable};

/// Contraction of the `y` block of `left` against x-slots `1..=g` of `right`.
#[derive(Debug, Clone)]
pub struct ConvolutionPlan<'a> {
    left: &'a KernelSeries,
    right: &'a KernelSeries,
    out_trunc: u32,
}

impl<'a> ConvolutionPlan<'a> {
    /// Checks that every pairing coefficient needed up to `out_trunc` is
    /// present in `right`.
    pub fn new(left: &'a KernelSeries, right: &'a KernelSeries, out_trunc: u32) -> Result<Self> {
        if left.g() != right.g() {
            return Err(Error::Incompatible(format!("g = {} vs {}", left.g(), right.g())));
        }
        if left.trunc() < out_trunc {
            return Err(Error::Depth { need: out_trunc as usize, have: left.trunc() as usize });
        }
        let mut need = 0;
        for (x, y, _) in left.entries() {
            let dx: u32 = x.iter().sum();
            if dx > out_trunc {
                continue;
            }
            let dj: u32 = y.iter().map(|&b| (-b - 1) as u32).sum();
            need = need.max(dj + out_trunc - dx);
        }
        if need > right.trunc() {
            return Err(Error::Depth { need: need as usize, have: right.trunc() as usize });
        }
        Ok(ConvolutionPlan { left, right, out_trunc })
    }

    pub fn contracted(&self) -> &[String] {
        self.left.y_vars()
    }

    pub fn outputs(&self) -> Vec<String> {
        let g = self.left.g();
        let mut v = var_names("x", g + 2);
        v.extend(var_names("z", g));
        v
    }

    pub fn out_trunc(&self) -> u32 {
        self.out_trunc
    }
}

/// Composite series in `x_1..x_{g+2}` with Laurent coefficients in `z`.
pub fn convolve(plan: &ConvolutionPlan) -> Result<XSeries<YLaurent>> {
    let g = plan.left.g();
    let zv = var_names("z", g);
    let mut out = XSeries::zero(&var_names("x", g + 2), plan.out_trunc, YLaurent::zero(&zv));
    for (x, lc) in plan.left.series().coeffs() {
        let dx: u32 = x.iter().sum();
        if dx > plan.out_trunc {
            continue;
        }
        for (y, c) in lc.terms() {
            let j: Vec<u32> = y.iter().map(|&b| (-b - 1) as u32).collect();
            for i_last in 0..=plan.out_trunc - dx {
                let mut rx = vec![i_last];
                rx.extend(&j);
                let Some(rc) = plan.right.series().get(&rx) else { continue };
                let renamed = YLaurent::from_terms(&zv, rc.terms().iter().map(|(e, v)| (e.clone(), v * c)));
                let mut ox = x.clone();
                ox.push(i_last);
                out.add_term(ox, renamed);
            }
        }
    }
    Ok(out)
}

/// `Σ_m C_{a,b}^m C_{m,c}^k` as a map over `k`.
fn composite(t: &SCTable, a: usize, b: usize, c: usize) -> BTreeMap<usize, Rat> {
    let mut out: BTreeMap<usize, Rat> = BTreeMap::new();
    for (&m, v) in t.row(a, b).into_iter().flatten() {
        for (&k, w) in t.row(m, c).into_iter().flatten() {
            *out.entry(k).or_default() += &(v * w);
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssocFailure {
    pub upper: Vec<usize>,
    pub lower: Vec<usize>,
    pub left: Rat,
    pub right: Rat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssocReport {
    pub pass: bool,
    pub checked: usize,
    pub failure: Option<AssocFailure>,
}

impl AssocReport {
    fn new(checked: usize, failure: Option<AssocFailure>) -> Self {
        AssocReport { pass: failure.is_none(), checked, failure }
    }
}

fn first_diff(a: &BTreeMap<usize, Rat>, b: &BTreeMap<usize, Rat>) -> Option<(usize, Rat, Rat)> {
    a.keys().chain(b.keys()).find_map(|k| {
        let (x, y) = (a.get(k).cloned().unwrap_or_default(), b.get(k).cloned().unwrap_or_default());
        (x != y).then_some((*k, x, y))
    })
}

/// `Σ_m C_{i1,i2}^m C_{m,i3}^k = Σ_m C_{i1,i3}^m C_{m,i2}^k` for all
/// `i1, i2, i3 ≤ N`; the table must reach index `2N`.
pub fn assoc_check(table: &SCTable, n: usize) -> Result<AssocReport> {
    if table.upto() < 2 * n {
        return Err(Error::Depth { need: 2 * n, have: table.upto() });
    }
    let mut checked = 0;
    for i1 in 0..=n {
        for i2 in 0..=n {
            for i3 in i2 + 1..=n {
                let l = composite(table, i1, i2, i3);
                let r = composite(table, i1, i3, i2);
                checked += 1;
                if let Some((k, a, b)) = first_diff(&l, &r) {
                    let f = AssocFailure { upper: vec![i1, i2, i3], lower: vec![k], left: a, right: b };
                    return Ok(AssocReport::new(checked, Some(f)));
                }
            }
        }
    }
    Ok(AssocReport::new(checked, None))
}

/// Composite constants of `μ∘(μ⊗id)` at upper indices `(i_1..i_{g+2})`,
/// keyed by sorted lower indices.
pub fn gen_composite(table: &GenSCTable, upper: &[usize]) -> Result<BTreeMap<Vec<usize>, Rat>> {
    let g = table.g();
    if upper.len() != g + 2 {
        return Err(Error::Invalid(format!("composite needs {} upper indices", g + 2)));
    }
    let first = &upper[..=g];
    let last = upper[g + 1];
    let Some(row) = table.row(first) else {
        return Err(Error::Depth { need: first.iter().sum(), have: table.upto() });
    };
    let mut out: BTreeMap<Vec<usize>, Rat> = BTreeMap::new();
    for (j, v) in row {
        let mut up = j.clone();
        up.push(last);
        let Some(r2) = table.row(&up) else {
            return Err(Error::Depth { need: up.iter().sum(), have: table.upto() });
        };
        let mult = Rat::int(count_distinct_permutations(j) as i64);
        for (k, w) in r2 {
            *out.entry(k.clone()).or_default() += &(v * w * &mult);
        }
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

fn first_diff_vec(a: &BTreeMap<Vec<usize>, Rat>, b: &BTreeMap<Vec<usize>, Rat>) -> Option<(Vec<usize>, Rat, Rat)> {
    a.keys().chain(b.keys()).find_map(|k| {
        let (x, y) = (a.get(k).cloned().unwrap_or_default(), b.get(k).cloned().unwrap_or_default());
        (x != y).then(|| (k.clone(), x, y))
    })
}

/// Full `S_{g+2}` symmetry of the composite constants over upper index
/// sums `≤ N`.
pub fn gen_assoc_check(table: &GenSCTable, n: usize) -> Result<AssocReport> {
    let g = table.g();
    let mut checked = 0;
    for u in sorted_tuples(g + 2, n) {
        let base = gen_composite(table, &u)?;
        for p in distinct_permutations(&u).into_iter().skip(1) {
            let other = gen_composite(table, &p)?;
            checked += 1;
            if let Some((k, a, b)) = first_diff_vec(&other, &base) {
                return Ok(AssocReport::new(checked, Some(AssocFailure { upper: p, lower: k, left: a, right: b })));
            }
        }
    }
    Ok(AssocReport::new(checked, None))
}

/// Induced product on index tuples of length `g` (with `g + 2 = 2g`, so
/// `g = 2`): `a·b = Σ_k C(a, b; k) k`. Checks commutativity and
/// associativity on index sums `≤ N`.
pub fn symmetric_power_probe(table: &GenSCTable, n: usize) -> Result<AssocReport> {
    let g = table.g();
    if g != 2 {
        return Err(Error::Invalid(format!("symmetric power probe needs g = 2, got {g}")));
    }
    let mul = |a: &[usize], b: &[usize]| -> Result<BTreeMap<Vec<usize>, Rat>> {
        let mut u = a.to_vec();
        u.extend(b);
        gen_composite(table, &u)
    };
    // expand a sorted-keyed symmetric element over all ordered tuples
    let ordered = |m: &BTreeMap<Vec<usize>, Rat>| -> Vec<(Vec<usize>, Rat)> {
        m.iter().flat_map(|(k, v)| distinct_permutations(k).into_iter().map(move |p| (p, v.clone()))).collect()
    };
    let pairs = sorted_tuples(g, n);
    let mut checked = 0;
    for a in &pairs {
        for b in &pairs {
            if a.iter().sum::<usize>() + b.iter().sum::<usize>() > n {
                continue;
            }
            checked += 1;
            if let Some((k, x, y)) = first_diff_vec(&mul(a, b)?, &mul(b, a)?) {
                let mut upper = a.clone();
                upper.extend(b);
                return Ok(AssocReport::new(checked, Some(AssocFailure { upper, lower: k, left: x, right: y })));
            }
            for c in &pairs {
                if a.iter().chain(b).chain(c).sum::<usize>() > n {
                    continue;
                }
                let mut lhs: BTreeMap<Vec<usize>, Rat> = BTreeMap::new();
                for (m, v) in ordered(&mul(a, b)?) {
                    for (k, w) in mul(&m, c)? {
                        *lhs.entry(k).or_default() += &(&v * &w);
                    }
                }
                let mut rhs: BTreeMap<Vec<usize>, Rat> = BTreeMap::new();
                for (m, v) in ordered(&mul(b, c)?) {
                    for (k, w) in mul(a, &m)? {
                        *rhs.entry(k).or_default() += &(&v * &w);
                    }
                }
                lhs.retain(|_, v| !v.is_zero());
                rhs.retain(|_, v| !v.is_zero());
                checked += 1;
                if let Some((k, x, y)) = first_diff_vec(&lhs, &rhs) {
                    let upper = a.iter().chain(b).chain(c).copied().collect();
                    return Ok(AssocReport::new(checked, Some(AssocFailure { upper, lower: k, left: x, right: y })));
                }
            }
        }
    }
    Ok(AssocReport::new(checked, None))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductFailure {
    pub x: Exps,
    pub residual: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductReport {
    pub pass: bool,
    pub checked: usize,
    pub failure: Option<ProductFailure>,
}

/// Pairs `K` against `Π_k f_λ(y_k)` by residues and compares with
/// `Π_a f_λ(x_a)` coefficientwise, as polynomials in `λ`, up to degree `N`.
pub fn product_identity_check(k: &KernelSeries, sol: &SolutionTable, n: u32) -> Result<ProductReport> {
    if k.g() != sol.g() {
        return Err(Error::Incompatible(format!("kernel g = {}, solution g = {}", k.g(), sol.g())));
    }
    if k.trunc() < n {
        return Err(Error::Depth { need: n as usize, have: k.trunc() as usize });
    }
    let need = (k.y_window() as usize).saturating_sub(1).max(n as usize);
    if sol.upto() < need {
        return Err(Error::Depth { need, have: sol.upto() });
    }
    let one = Poly::constant_in(sol.p(0).vars().to_vec(), Rat::one());
    let prod = |idx: &mut dyn Iterator<Item = usize>| idx.fold(one.clone(), |acc, i| acc.mul(sol.p(i)));
    let mut checked = 0;
    for x in tuples(k.g() + 1, n as usize) {
        let xe: Exps = x.iter().map(|&a| a as u32).collect();
        let lhs = prod(&mut x.iter().copied());
        let mut rhs = Poly::zero_in(one.vars().to_vec());
        for (y, c) in k.series().coeff(&xe).terms() {
            rhs = rhs.add(&prod(&mut y.iter().map(|&b| (-b - 1) as usize)).scale(c));
        }
        checked += 1;
        let diff = lhs.sub(&rhs);
        if !diff.is_zero() {
            return Ok(ProductReport { pass: false, checked, failure: Some(ProductFailure { x: xe, residual: diff.to_string() }) });
        }
    }
    Ok(ProductReport { pass: true, checked, failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{build_gen_kernel, build_kernel};
    use crate::ode::{expand_solution, first_order_g, heun4, heun_n, third_order3, DiffOp};
    use crate::sc::{gen_structure_constants, structure_constants};

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn table(op: &DiffOp, n: usize) -> SCTable {
        structure_constants(&expand_solution(op, 2 * n).unwrap(), n).unwrap()
    }

    fn heun4_op() -> DiffOp {
        heun4(&r("2"), [&r("1/3"), &r("1/5"), &r("1/7")], &r("1/2"), None).unwrap()
    }

    fn multinomial(a: &[u32]) -> Rat {
        let s: u32 = a.iter().sum();
        a.iter().fold(Rat::factorial(s), |acc, &x| acc.checked_div(&Rat::factorial(x)).unwrap())
    }

    #[test]
    fn exponential_convolution_is_geometric() {
        let k = build_kernel(&table(&first_order_g(1).unwrap(), 5));
        let plan = ConvolutionPlan::new(&k, &k, 5).unwrap();
        assert_eq!(plan.outputs(), vec!["x1", "x2", "x3", "z1"]);
        let c = convolve(&plan).unwrap();
        for x in tuples(3, 5) {
            let xe: Exps = x.iter().map(|&a| a as u32).collect();
            let s: i32 = x.iter().sum::<usize>() as i32;
            let want = YLaurent::monomial(&["z1".to_string()], vec![-s - 1], multinomial(&xe));
            assert_eq!(c.coeff(&xe), want);
        }
    }

    #[test]
    fn boundary_left_factor_reindexes() {
        let k = build_kernel(&table(&heun4_op(), 5));
        let mut b = XSeries::zero(k.x_vars(), 5, YLaurent::zero(k.y_vars()));
        for i in 0..=5u32 {
            b.add_term(vec![i, 0], YLaurent::monomial(k.y_vars(), vec![-(i as i32) - 1], Rat::one()));
        }
        let left = KernelSeries::new(b, 6);
        let c = convolve(&ConvolutionPlan::new(&left, &k, 5).unwrap()).unwrap();
        for (x, v) in c.coeffs() {
            assert_eq!(x[1], 0);
            let want = k.series().coeff(&[x[0], x[2]]);
            assert_eq!(v.terms(), want.terms());
        }
        assert!(!c.is_empty());
    }

    #[test]
    fn plan_rejects_shallow_right_factor() {
        let deep = build_kernel(&table(&heun4_op(), 5));
        let shallow = build_kernel(&table(&heun4_op(), 3));
        assert!(matches!(ConvolutionPlan::new(&deep, &shallow, 5), Err(Error::Depth { .. })));
    }

    #[test]
    fn associativity_g1() {
        for op in [first_order_g(1).unwrap(), heun4_op()] {
            let t = table(&op, 10);
            let rep = assoc_check(&t, 5).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
        let op = third_order3(&["1/3", "1/5", "1/7", "2/11", "3/13", "5/17"].map(r)).unwrap();
        assert!(assoc_check(&table(&op, 10), 5).unwrap().pass);
        assert!(matches!(assoc_check(&table(&heun4_op(), 6), 5), Err(Error::Depth { .. })));
    }

    #[test]
    fn corrupted_table_breaks_associativity() {
        let mut t = table(&heun4_op(), 6);
        let v = t.get(1, 2, 2) + Rat::one();
        t.set(1, 2, 2, v.clone());
        t.set(2, 1, 2, v);
        assert!(!assoc_check(&t, 3).unwrap().pass);
    }

    #[test]
    fn generalized_symmetry() {
        let op = first_order_g(2).unwrap();
        let t = gen_structure_constants(&expand_solution(&op, 4).unwrap(), 4).unwrap();
        assert!(gen_assoc_check(&t, 4).unwrap().pass);
        let zero = gen_composite(&t, &[0, 0, 0, 0]).unwrap();
        assert_eq!(zero.len(), 1);
        assert_eq!(zero[&vec![0, 0]], Rat::one());
        assert!(symmetric_power_probe(&t, 3).unwrap().pass);

        let op = heun_n(&["2", "3"].map(r), &["1/3", "1/5", "1/7", "1/11"].map(r), &r("1/2"), None).unwrap();
        let t = gen_structure_constants(&expand_solution(&op, 3).unwrap(), 3).unwrap();
        assert!(gen_assoc_check(&t, 3).unwrap().pass);
    }

    #[test]
    fn product_identity() {
        let op = heun4_op();
        let sol = expand_solution(&op, 12).unwrap();
        let k = build_kernel(&structure_constants(&sol, 6).unwrap());
        assert!(product_identity_check(&k, &sol, 6).unwrap().pass);

        let op = first_order_g(2).unwrap();
        let sol = expand_solution(&op, 4).unwrap();
        let k = build_gen_kernel(&gen_structure_constants(&sol, 4).unwrap());
        assert!(product_identity_check(&k, &sol, 4).unwrap().pass);
    }
}
