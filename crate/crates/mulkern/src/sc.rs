//! Structure constants of polynomial multiplication in the solution basis.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::combinat::{count_distinct_permutations, sorted, sorted_tuples, tuples};
use crate::error::{Error, Result};
use crate::exact::linalg::{self, Echelon};
use crate::exact::{Exps, Poly, Rat, Sampler};
use crate::ode::SolutionTable;

/// `C_{i,j}^k` with `P_i P_j = Σ_k C_{i,j}^k P_k`, for `i, j ≤ N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SCTable {
    upto: usize,
    entries: BTreeMap<(usize, usize), BTreeMap<usize, Rat>>,
}

impl SCTable {
    pub fn from_entries(upto: usize, entries: BTreeMap<(usize, usize), BTreeMap<usize, Rat>>) -> Self {
        SCTable { upto, entries }
    }

    pub fn upto(&self) -> usize {
        self.upto
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), BTreeMap<usize, Rat>> {
        &self.entries
    }

    pub fn row(&self, i: usize, j: usize) -> Option<&BTreeMap<usize, Rat>> {
        self.entries.get(&(i, j))
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Rat {
        self.entries.get(&(i, j)).and_then(|r| r.get(&k)).cloned().unwrap_or_default()
    }

    /// Overwrites a single entry (fault injection and cache import).
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: Rat) {
        let row = self.entries.entry((i, j)).or_default();
        if v.is_zero() {
            row.remove(&k);
        } else {
            row.insert(k, v);
        }
    }

    /// First `(i, j, k)` with `C_{i,j}^k ≠ C_{j,i}^k`.
    pub fn asymmetry(&self) -> Option<(usize, usize, usize)> {
        for (&(i, j), row) in &self.entries {
            let other = self.entries.get(&(j, i));
            let keys = row.keys().chain(other.into_iter().flat_map(|r| r.keys()));
            for &k in keys {
                if self.get(i, j, k) != self.get(j, i, k) {
                    return Some((i, j, k));
                }
            }
        }
        None
    }

    /// First `(i, j, k)` with `k > i + j` and a nonzero entry.
    pub fn triangular_violation(&self) -> Option<(usize, usize, usize)> {
        for (&(i, j), row) in &self.entries {
            if let Some((&k, _)) = row.iter().find(|(&k, v)| k > i + j && !v.is_zero()) {
                return Some((i, j, k));
            }
        }
        None
    }

    /// Largest `k` with a nonzero entry.
    pub fn max_k(&self) -> usize {
        self.entries.values().flat_map(|r| r.keys().copied()).max().unwrap_or(0)
    }
}

fn lead(p: &Poly) -> Option<(u32, Rat)> {
    let d = p.degree_in(0)?;
    Some((d, p.coeff_of(0, d).as_constant().expect("single variable")))
}

/// Back-substitution through the triangular change of basis; needs `P_k`
/// up to `2N`.
pub fn structure_constants(sol: &SolutionTable, n: usize) -> Result<SCTable> {
    if sol.g() != 1 {
        return Err(Error::Invalid(format!("structure_constants needs g = 1, got {}", sol.g())));
    }
    if sol.upto() < 2 * n {
        return Err(Error::Depth { need: 2 * n, have: sol.upto() });
    }
    let mut leads = Vec::with_capacity(2 * n + 1);
    for k in 0..=2 * n {
        match lead(sol.p(k)) {
            Some((d, c)) if d as usize == k && !c.is_zero() => leads.push(c),
            _ => return Err(Error::DegenerateBasis(k)),
        }
    }
    let mut entries = BTreeMap::new();
    for i in 0..=n {
        for j in 0..=n {
            if j < i {
                let row: BTreeMap<usize, Rat> = entries.get(&(j, i)).cloned().unwrap_or_default();
                entries.insert((i, j), row);
                continue;
            }
            let mut q = sol.p(i).mul(sol.p(j));
            let mut row = BTreeMap::new();
            while !q.is_zero() {
                let (d, c) = lead(&q).unwrap();
                let coef = c.checked_div(&leads[d as usize])?;
                q = q.sub(&sol.p(d as usize).scale(&coef));
                row.insert(d as usize, coef);
            }
            entries.insert((i, j), row);
        }
    }
    Ok(SCTable { upto: n, entries })
}

/// Recomputes `C_{i,j}^·` by solving from `i + j + 1` sample values of `λ`.
pub fn interpolate_entry(sol: &SolutionTable, i: usize, j: usize) -> Result<BTreeMap<usize, Rat>> {
    let d = i + j;
    let pts: Vec<Rat> = (0..=d as i64).map(|v| Rat::int(v - (d as i64) / 2)).collect();
    let a: Vec<Vec<Rat>> = pts.iter().map(|l| (0..=d).map(|k| sol.p(k).eval(std::slice::from_ref(l))).collect()).collect();
    let b: Vec<Vec<Rat>> =
        pts.iter().map(|l| vec![sol.p(i).eval(std::slice::from_ref(l)) * sol.p(j).eval(std::slice::from_ref(l))]).collect();
    let x = linalg::solve_unique(&a, &b, d + 1, 1)?;
    Ok(x[0].iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(k, v)| (k, v.clone())).collect())
}

/// Rank data for one weight bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockReport {
    pub weight: usize,
    pub products: usize,
    pub monomials: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisReport {
    pub independent: bool,
    pub spanning: bool,
    pub blocks: Vec<BlockReport>,
    /// Weights where the products fail to span.
    pub span_defect: Vec<usize>,
}

/// Monomials `λ^e` with `Σ k e_k ≤ w`.
pub fn weighted_monomials(g: usize, w: usize) -> Vec<Exps> {
    tuples(g, w)
        .into_iter()
        .filter(|e| e.iter().enumerate().map(|(k, x)| (k + 1) * x).sum::<usize>() <= w)
        .map(|e| e.into_iter().map(|x| x as u32).collect())
        .collect()
}

fn product(sol: &SolutionTable, idx: &[usize]) -> Poly {
    idx.iter().fold(Poly::constant_in(sol.p(0).vars().to_vec(), Rat::one()), |acc, &i| acc.mul(sol.p(i)))
}

fn coords(p: &Poly, index: &BTreeMap<Exps, usize>, n: usize) -> Result<Vec<Rat>> {
    let mut v = vec![Rat::zero(); n];
    for (e, c) in p.terms() {
        let Some(&r) = index.get(e) else {
            return Err(Error::Inconsistent(format!("monomial {e:?} outside the weight bound")));
        };
        v[r] = c.clone();
    }
    Ok(v)
}

/// Rank of `{P_{j_1}···P_{j_g} : Σ j ≤ w}` against monomials of weighted
/// degree ≤ w, for every `w ≤ W`.
pub fn check_basis(sol: &SolutionTable, wmax: usize) -> Result<BasisReport> {
    if sol.upto() < wmax {
        return Err(Error::Depth { need: wmax, have: sol.upto() });
    }
    let g = sol.g();
    let mut blocks = Vec::new();
    let mut independent = true;
    let mut span_defect = Vec::new();
    for w in 0..=wmax {
        let mons = weighted_monomials(g, w);
        let index: BTreeMap<Exps, usize> = mons.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let basis = sorted_tuples(g, w);
        let mut cols = Vec::new();
        let mut outside = false;
        for b in &basis {
            match coords(&product(sol, b), &index, mons.len()) {
                Ok(c) => cols.push(c),
                Err(_) => outside = true,
            }
        }
        // rows = products, so rank is the same as for the transposed system
        let rank = if outside { 0 } else { linalg::rank(&cols, mons.len()) };
        if outside || rank < basis.len() {
            independent = false;
        }
        if outside || rank < mons.len() {
            span_defect.push(w);
        }
        blocks.push(BlockReport { weight: w, products: basis.len(), monomials: mons.len(), rank });
    }
    Ok(BasisReport { independent, spanning: span_defect.is_empty(), blocks, span_defect })
}

/// `C_{i_1..i_{g+1}}^{j_1..j_g}` stored on sorted representatives; the value
/// is the same for every rearrangement of either index block.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSCTable {
    g: usize,
    upto: usize,
    entries: BTreeMap<Vec<usize>, BTreeMap<Vec<usize>, Rat>>,
}

impl GenSCTable {
    pub fn from_entries(g: usize, upto: usize, entries: BTreeMap<Vec<usize>, BTreeMap<Vec<usize>, Rat>>) -> Self {
        GenSCTable { g, upto, entries }
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn upto(&self) -> usize {
        self.upto
    }

    pub fn entries(&self) -> &BTreeMap<Vec<usize>, BTreeMap<Vec<usize>, Rat>> {
        &self.entries
    }

    /// Value at arbitrary (unsorted) index tuples.
    pub fn get(&self, upper: &[usize], lower: &[usize]) -> Rat {
        self.entries.get(&sorted(upper)).and_then(|r| r.get(&sorted(lower))).cloned().unwrap_or_default()
    }

    pub fn row(&self, upper: &[usize]) -> Option<&BTreeMap<Vec<usize>, Rat>> {
        self.entries.get(&sorted(upper))
    }

    pub fn set(&mut self, upper: &[usize], lower: &[usize], v: Rat) {
        let row = self.entries.entry(sorted(upper)).or_default();
        if v.is_zero() {
            row.remove(&sorted(lower));
        } else {
            row.insert(sorted(lower), v);
        }
    }

    /// Detected support bound: the largest `Σ j` with a nonzero entry.
    pub fn support_bound(&self) -> usize {
        self.entries.values().flat_map(|r| r.keys().map(|j| j.iter().sum::<usize>())).max().unwrap_or(0)
    }

    /// Largest `Σ j - Σ i` over nonzero entries (negative values clamp to 0).
    pub fn support_excess(&self) -> usize {
        self.entries
            .iter()
            .flat_map(|(i, r)| {
                let si: usize = i.iter().sum();
                r.keys().map(move |j| j.iter().sum::<usize>().saturating_sub(si))
            })
            .max()
            .unwrap_or(0)
    }
}

/// Solves each product `P_{i_1}···P_{i_{g+1}}` (with `Σ i ≤ N`) in the
/// product basis by one fraction-free elimination.
pub fn gen_structure_constants(sol: &SolutionTable, n: usize) -> Result<GenSCTable> {
    if sol.upto() < n {
        return Err(Error::Depth { need: n, have: sol.upto() });
    }
    let g = sol.g();
    let mons = weighted_monomials(g, n);
    let index: BTreeMap<Exps, usize> = mons.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
    let basis = sorted_tuples(g, n);
    let bcols: Vec<Vec<Rat>> = basis.iter().map(|b| coords(&product(sol, b), &index, mons.len())).collect::<Result<_>>()?;
    let uppers = sorted_tuples(g + 1, n);
    let rhs_cols: Vec<Vec<Rat>> = uppers
        .iter()
        .map(|u| coords(&product(sol, u), &index, mons.len()).map_err(|_| Error::Inconsistent(format!("{u:?}"))))
        .collect::<Result<_>>()?;
    let a: Vec<Vec<Rat>> = (0..mons.len()).map(|r| bcols.iter().map(|c| c[r].clone()).collect()).collect();
    let b: Vec<Vec<Rat>> = (0..mons.len()).map(|r| rhs_cols.iter().map(|c| c[r].clone()).collect()).collect();
    let e = Echelon::new(&a, &b, basis.len(), uppers.len());
    if let Some((k, _)) = e.inconsistency() {
        return Err(Error::Inconsistent(format!("product {:?} is not in the span", uppers[k])));
    }
    if !e.free_columns().is_empty() {
        return Err(Error::Inconsistent(format!("products are dependent at weight ≤ {n}")));
    }
    let sols = e.back_substitute()?;
    let mut entries = BTreeMap::new();
    for (u, x) in uppers.iter().zip(sols) {
        let mut row = BTreeMap::new();
        for (bj, v) in basis.iter().zip(x) {
            if !v.is_zero() {
                let np = Rat::int(count_distinct_permutations(bj) as i64);
                row.insert(bj.clone(), v.checked_div(&np)?);
            }
        }
        entries.insert(u.clone(), row);
    }
    Ok(GenSCTable { g, upto: n, entries })
}

/// Outcome of a sampled product identity test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductCheck {
    pub pass: bool,
    pub points: usize,
    /// First failing index tuple and sample point.
    pub failure: Option<(Vec<usize>, Vec<Rat>)>,
}

fn sample_points(g: usize, samples: usize, seed: u64) -> Result<Vec<Vec<Rat>>> {
    let mut s = Sampler::new(seed, 10_000)?;
    Ok((0..samples).map(|_| (0..g).map(|_| s.signed_rat()).collect()).collect())
}

/// `P_i(λ) P_j(λ) = Σ_k C_{i,j}^k P_k(λ)` at seeded random points.
pub fn evaluate_product_identity(table: &SCTable, sol: &SolutionTable, samples: usize, seed: u64) -> Result<ProductCheck> {
    let need = table.max_k().max(table.upto());
    if sol.upto() < need {
        return Err(Error::Depth { need, have: sol.upto() });
    }
    for pt in sample_points(1, samples, seed)? {
        let vals: Vec<Rat> = (0..=need).map(|k| sol.p(k).eval(&pt)).collect();
        for (&(i, j), row) in table.entries() {
            let rhs: Rat = row.iter().map(|(&k, c)| c * &vals[k]).sum();
            if &vals[i] * &vals[j] != rhs {
                return Ok(ProductCheck { pass: false, points: samples, failure: Some((vec![i, j], pt)) });
            }
        }
    }
    Ok(ProductCheck { pass: true, points: samples, failure: None })
}

/// `Π P_{i_a} = Σ_{all j tuples} C_i^j Π P_{j_b}` at seeded random points.
pub fn evaluate_gen_product_identity(table: &GenSCTable, sol: &SolutionTable, samples: usize, seed: u64) -> Result<ProductCheck> {
    let need = table.support_bound().max(table.upto());
    if sol.upto() < need {
        return Err(Error::Depth { need, have: sol.upto() });
    }
    for pt in sample_points(table.g(), samples, seed)? {
        let vals: Vec<Rat> = (0..=need).map(|k| sol.p(k).eval(&pt)).collect();
        let prod = |idx: &[usize]| idx.iter().fold(Rat::one(), |acc, &i| acc * &vals[i]);
        for (u, row) in table.entries() {
            let rhs: Rat = row.iter().map(|(j, c)| c * &prod(j) * Rat::int(count_distinct_permutations(j) as i64)).sum();
            if prod(u) != rhs {
                return Ok(ProductCheck { pass: false, points: samples, failure: Some((u.clone(), pt)) });
            }
        }
    }
    Ok(ProductCheck { pass: true, points: samples, failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{expand_solution, first_order_g, heun4, heun_n};

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn heun4_sol(n: usize) -> SolutionTable {
        let op = heun4(&r("2"), [&r("1/3"), &r("1/5"), &r("1/7")], &r("1/2"), None).unwrap();
        expand_solution(&op, n).unwrap()
    }

    #[test]
    fn exponential_binomials() {
        let sol = expand_solution(&first_order_g(1).unwrap(), 12).unwrap();
        let t = structure_constants(&sol, 6).unwrap();
        for i in 0..=6 {
            for j in 0..=6 {
                let row = t.row(i, j).unwrap();
                assert_eq!(row.len(), 1);
                assert_eq!(t.get(i, j, i + j), Rat::binomial(&Rat::int((i + j) as i64), i as u32));
            }
        }
    }

    #[test]
    fn identity_row_and_invariants() {
        let t = structure_constants(&heun4_sol(12), 6).unwrap();
        for i in 0..=6 {
            for k in 0..=12 {
                assert_eq!(t.get(i, 0, k), if i == k { Rat::one() } else { Rat::zero() });
            }
        }
        assert_eq!(t.asymmetry(), None);
        assert_eq!(t.triangular_violation(), None);
    }

    #[test]
    fn interpolation_agrees_with_back_substitution() {
        let sol = heun4_sol(12);
        let t = structure_constants(&sol, 6).unwrap();
        for (i, j) in [(1, 1), (2, 3), (4, 2)] {
            assert_eq!(&interpolate_entry(&sol, i, j).unwrap(), t.row(i, j).unwrap());
        }
    }

    #[test]
    fn heun4_square_of_p1_pointwise() {
        let sol = heun4_sol(12);
        let t = structure_constants(&sol, 6).unwrap();
        for l in [0, 1, -1, 2, 5] {
            let pt = [Rat::int(l)];
            let lhs = sol.p(1).eval(&pt) * sol.p(1).eval(&pt);
            let rhs: Rat = t.row(1, 1).unwrap().iter().map(|(&k, c)| c * &sol.p(k).eval(&pt)).sum();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn product_identity_and_fault_injection() {
        let sol = heun4_sol(12);
        let mut t = structure_constants(&sol, 6).unwrap();
        assert!(evaluate_product_identity(&t, &sol, 10, 3).unwrap().pass);
        let v = t.get(2, 3, 4) + Rat::one();
        t.set(2, 3, 4, v);
        let bad = evaluate_product_identity(&t, &sol, 10, 3).unwrap();
        assert!(!bad.pass);
        assert_eq!(bad.failure.unwrap().0, vec![2, 3]);
    }

    #[test]
    fn two_variable_basis() {
        let sol = expand_solution(&first_order_g(2).unwrap(), 4).unwrap();
        let rep = check_basis(&sol, 4).unwrap();
        assert!(rep.independent && rep.spanning);
        let t = gen_structure_constants(&sol, 4).unwrap();
        // λ1^2 = P1 P1
        assert_eq!(t.get(&[1, 1, 0], &[1, 1]), Rat::one());
        assert_eq!(t.row(&[1, 1, 0]).unwrap().len(), 1);
        assert_eq!(t.get(&[0, 0, 0], &[0, 0]), Rat::one());
        assert_eq!(t.row(&[0, 0, 0]).unwrap().len(), 1);
        assert!(evaluate_gen_product_identity(&t, &sol, 5, 11).unwrap().pass);
    }

    #[test]
    fn heun_n_reproduces_basis_element() {
        let op = heun_n(&["2", "3"].map(r), &["1/3", "1/5", "1/7", "1/11"].map(r), &r("1/2"), None).unwrap();
        let sol = expand_solution(&op, 4).unwrap();
        assert!(check_basis(&sol, 4).unwrap().spanning);
        let t = gen_structure_constants(&sol, 4).unwrap();
        // P1 = P1 P0 splits over the two orderings of (0, 1)
        assert_eq!(t.get(&[1, 0, 0], &[0, 1]), Rat::new(1, 2));
        assert_eq!(t.get(&[1, 0, 0], &[1, 0]), Rat::new(1, 2));
        assert_eq!(t.row(&[1, 0, 0]).unwrap().len(), 1);
        assert!(t.support_excess() == 0);
        assert!(evaluate_gen_product_identity(&t, &sol, 5, 2).unwrap().pass);
    }
}
