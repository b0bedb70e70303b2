//! Kernels as generating functions of structure constants.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinat::{distinct_permutations, permutations, sorted, tuples};
use crate::error::{Error, Result};
use crate::exact::{var_names, Exps, Poly, Rat, XSeries, YExps, YLaurent};
use crate::ode::{apply_x, apply_y_adjoint, DiffOp};
use crate::sc::{GenSCTable, SCTable};

/// `K(x_1..x_{g+1}, y_1..y_g)` truncated at total x-degree `N`; each
/// x-coefficient is an exact Laurent polynomial in `y` with exponents in
/// `[-M, -1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSeries {
    series: XSeries<YLaurent>,
    y_window: u32,
}

/// Location and values of the first failing coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub x: Vec<u32>,
    pub y: Vec<i32>,
    pub found: Rat,
    pub expected: Rat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub pass: bool,
    pub failure: Option<Mismatch>,
}

impl Check {
    pub fn from_failure(failure: Option<Mismatch>) -> Self {
        Check { pass: failure.is_none(), failure }
    }
}

impl KernelSeries {
    pub fn new(series: XSeries<YLaurent>, y_window: u32) -> Self {
        KernelSeries { series, y_window }
    }

    pub fn g(&self) -> usize {
        self.series.proto().vars().len()
    }

    pub fn x_vars(&self) -> &[String] {
        self.series.vars()
    }

    pub fn y_vars(&self) -> &[String] {
        self.series.proto().vars()
    }

    pub fn trunc(&self) -> u32 {
        self.series.trunc()
    }

    pub fn y_window(&self) -> u32 {
        self.y_window
    }

    pub fn series(&self) -> &XSeries<YLaurent> {
        &self.series
    }

    pub fn coeff(&self, x: &[u32], y: &[i32]) -> Rat {
        self.series.get(x).and_then(|c| c.terms().get(y).cloned()).unwrap_or_default()
    }

    /// Replaces one coefficient.
    pub fn set_coeff(&mut self, x: &[u32], y: &[i32], v: Rat) {
        let old = self.coeff(x, y);
        let delta = YLaurent::monomial(self.y_vars(), y.to_vec(), v - old);
        self.series.add_term(x.to_vec(), delta);
    }

    /// Every stored `(x, y, c)` in key order.
    pub fn entries(&self) -> Vec<(Exps, YExps, Rat)> {
        self.series.coeffs().iter().flat_map(|(x, c)| c.terms().iter().map(move |(y, v)| (x.clone(), y.clone(), v.clone()))).collect()
    }

    pub fn to_export(&self) -> KernelExport {
        KernelExport {
            x_trunc: self.trunc(),
            y_window: [-(self.y_window as i32), -1],
            x_vars: self.x_vars().to_vec(),
            y_vars: self.y_vars().to_vec(),
            entries: self.entries(),
        }
    }

    /// Rebuilds a kernel, rejecting entries outside the declared windows.
    pub fn from_export(e: &KernelExport) -> Result<Self> {
        if e.x_vars.len() != e.y_vars.len() + 1 || e.y_vars.is_empty() {
            return Err(Error::Invalid(format!("{} x-variables with {} y-variables", e.x_vars.len(), e.y_vars.len())));
        }
        if e.y_window[1] != -1 || e.y_window[0] > -1 {
            return Err(Error::Invalid(format!("y window {:?}", e.y_window)));
        }
        let proto = YLaurent::zero(&e.y_vars);
        let mut s = XSeries::zero(&e.x_vars, e.x_trunc, proto);
        let mut seen = BTreeSet::new();
        for (x, y, c) in &e.entries {
            if x.len() != e.x_vars.len() || y.len() != e.y_vars.len() {
                return Err(Error::Invalid(format!("entry arity {x:?} {y:?}")));
            }
            if x.iter().sum::<u32>() > e.x_trunc {
                return Err(Error::Invalid(format!("x exponent {x:?} beyond truncation {}", e.x_trunc)));
            }
            if y.iter().any(|&v| v > -1 || v < e.y_window[0]) {
                return Err(Error::Invalid(format!("y exponent {y:?} outside window {:?}", e.y_window)));
            }
            if !seen.insert((x.clone(), y.clone())) {
                return Err(Error::Invalid(format!("duplicate entry {x:?} {y:?}")));
            }
            s.add_term(x.clone(), YLaurent::monomial(&e.y_vars, y.clone(), c.clone()));
        }
        Ok(KernelSeries { series: s, y_window: (-e.y_window[0]) as u32 })
    }
}

/// Serialized kernel: entries are `(x-exponents, y-exponents, value)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelExport {
    pub x_trunc: u32,
    pub y_window: [i32; 2],
    pub x_vars: Vec<String>,
    pub y_vars: Vec<String>,
    pub entries: Vec<(Exps, YExps, Rat)>,
}

fn empty_kernel(g: usize, n: u32) -> XSeries<YLaurent> {
    XSeries::zero(&var_names("x", g + 1), n, YLaurent::zero(&var_names("y", g)))
}

/// `K = Σ C_{i,j}^k x_1^i x_2^j y^{-k-1}` over `i + j ≤ N`.
pub fn build_kernel(table: &SCTable) -> KernelSeries {
    let n = table.upto();
    let mut s = empty_kernel(1, n as u32);
    let yv = s.proto().vars().to_vec();
    for (&(i, j), row) in table.entries() {
        if i + j > n {
            continue;
        }
        let terms = row.iter().map(|(&k, c)| (vec![-(k as i32) - 1], c.clone()));
        s.add_term(vec![i as u32, j as u32], YLaurent::from_terms(&yv, terms));
    }
    KernelSeries { series: s, y_window: n as u32 + 1 }
}

/// Multivariate kernel; every sorted entry is emitted at all rearrangements
/// of both index blocks.
pub fn build_gen_kernel(table: &GenSCTable) -> KernelSeries {
    let (g, n) = (table.g(), table.upto());
    let mut s = empty_kernel(g, n as u32);
    let yv = s.proto().vars().to_vec();
    for i in tuples(g + 1, n) {
        let Some(row) = table.row(&i) else { continue };
        let mut c = YLaurent::zero(&yv);
        for (j, v) in row {
            for jj in distinct_permutations(j) {
                c.add_term(jj.iter().map(|&a| -(a as i32) - 1).collect(), v);
            }
        }
        s.add_term(i.iter().map(|&a| a as u32).collect(), c);
    }
    KernelSeries { series: s, y_window: table.support_bound() as u32 + 1 }
}

/// Reads `C_{i,j}^k` back from a one-variable kernel.
pub fn extract_sc_table(k: &KernelSeries) -> Result<SCTable> {
    if k.g() != 1 {
        return Err(Error::Invalid(format!("extract_sc_table needs g = 1, got {}", k.g())));
    }
    let mut entries: BTreeMap<(usize, usize), BTreeMap<usize, Rat>> = BTreeMap::new();
    for (x, y, c) in k.entries() {
        entries.entry((x[0] as usize, x[1] as usize)).or_default().insert((-y[0] - 1) as usize, c);
    }
    Ok(SCTable::from_entries(k.trunc() as usize, entries))
}

/// Reads the sorted-representative table back from a kernel.
pub fn extract_gen_table(k: &KernelSeries) -> GenSCTable {
    let mut entries: BTreeMap<Vec<usize>, BTreeMap<Vec<usize>, Rat>> = BTreeMap::new();
    for (x, y, c) in k.entries() {
        let i: Vec<usize> = x.iter().map(|&a| a as usize).collect();
        if i != sorted(&i) {
            continue;
        }
        let j: Vec<usize> = y.iter().map(|&b| (-b - 1) as usize).collect();
        entries.entry(i).or_default().insert(sorted(&j), c);
    }
    GenSCTable::from_entries(k.g(), k.trunc() as usize, entries)
}

/// First coefficient where both series are faithful and differ, up to x-degree `upto`.
pub fn first_mismatch(a: &XSeries<YLaurent>, b: &XSeries<YLaurent>, upto: u32) -> Option<Mismatch> {
    let keys: BTreeSet<&Exps> = a.coeffs().keys().chain(b.coeffs().keys()).collect();
    for x in keys {
        if x.iter().sum::<u32>() > upto {
            continue;
        }
        let (ca, cb) = (a.coeff(x), b.coeff(x));
        if let Some((y, f, e)) = ca.faithful_diff(&cb).into_iter().next() {
            return Some(Mismatch { x: x.clone(), y, found: f, expected: e });
        }
    }
    None
}

/// All exponents lie in `[-M, -1]` and x-degrees within the truncation.
pub fn negative_powers_check(k: &KernelSeries) -> Check {
    let m = -(k.y_window as i32);
    Check::from_failure(k.entries().into_iter().find(|(_, y, _)| y.iter().any(|&v| v > -1 || v < m)).map(|(x, y, c)| Mismatch {
        x,
        y,
        found: c,
        expected: Rat::zero(),
    }))
}

/// `(1/n!) Σ_σ Π 1/(y_{σ_a} - x_a)` placed in the x-slots other than `skip`.
fn symmetrized_geometric(k: &KernelSeries, skip: usize) -> XSeries<YLaurent> {
    let (g, n) = (k.g(), k.trunc());
    let yv = k.y_vars().to_vec();
    let mut s = empty_kernel(g, n);
    let perms = permutations(g);
    let inv_fact = Rat::factorial(g as u32).recip().expect("nonzero factorial");
    for a in tuples(g, n as usize) {
        let mut c = YLaurent::zero(&yv);
        for sigma in &perms {
            let mut e = vec![0; g];
            for (slot, &target) in sigma.iter().enumerate() {
                e[target] = -(a[slot] as i32) - 1;
            }
            c.add_term(e, &inv_fact);
        }
        let mut x: Exps = a.iter().map(|&v| v as u32).collect();
        x.insert(skip, 0);
        s.add_term(x, c);
    }
    s
}

/// `K` with any single x set to 0 equals the symmetrized geometric kernel.
pub fn boundary_check(k: &KernelSeries) -> Check {
    for p in 0..=k.g() {
        let want = symmetrized_geometric(k, p);
        let got = k.series.restrict(p, &Rat::zero());
        if let Some(m) = first_mismatch(&got, &want, k.trunc()) {
            return Check::from_failure(Some(m));
        }
    }
    Check::from_failure(None)
}

/// Exhaustive comparison under adjacent transpositions of x and of y.
pub fn symmetry_check(k: &KernelSeries) -> Check {
    let nx = k.g() + 1;
    for a in 0..nx - 1 {
        let mut perm: Vec<usize> = (0..nx).collect();
        perm.swap(a, a + 1);
        if let Some(m) = first_mismatch(&k.series.permute(&perm), &k.series, k.trunc()) {
            return Check::from_failure(Some(m));
        }
    }
    for a in 0..k.g().saturating_sub(1) {
        let mut perm: Vec<usize> = (0..k.g()).collect();
        perm.swap(a, a + 1);
        let swapped = k.series.map(|c| c.permute(&perm));
        if let Some(m) = first_mismatch(&swapped, &k.series, k.trunc()) {
            return Check::from_failure(Some(m));
        }
    }
    Check::from_failure(None)
}

fn check_g(k: &KernelSeries, op: &DiffOp) -> Result<()> {
    if k.g() != op.g() {
        return Err(Error::Incompatible(format!("kernel g = {}, operator g = {}", k.g(), op.g())));
    }
    Ok(())
}

/// λ-free operator applied in x-variable `i`, on its faithful window.
pub fn apply_in_x(k: &KernelSeries, op: &DiffOp, i: usize) -> Result<XSeries<YLaurent>> {
    let yv = k.y_vars().to_vec();
    let terms: Vec<(usize, u32, YLaurent)> = op.lambda_free().into_iter().map(|(a, m, c)| (a, m, YLaurent::constant(&yv, c))).collect();
    apply_x(&terms, &k.series, i)
}

/// Polynomial multiplying `D_{x_i}K` once the Vandermonde product clears
/// the denominators `Π_{j≠i}(x_j - x_i)`.
pub fn vandermonde_cofactor(xv: &[String], i: usize) -> Poly {
    let mut p = Poly::constant_in(xv.to_vec(), Rat::one());
    for a in 0..xv.len() {
        for b in a + 1..xv.len() {
            if a != i && b != i {
                p = p.mul(&Poly::var_in(xv.to_vec(), &xv[a]).sub(&Poly::var_in(xv.to_vec(), &xv[b])));
            }
        }
    }
    if (xv.len() - 1 - i) % 2 == 1 {
        p = p.neg();
    }
    p
}

/// `Σ_i cof_i D_{x_i} K`; for `g = 1` this is `D_{x_2}K - D_{x_1}K`.
pub fn cleared_symmetric_sum(k: &KernelSeries, op: &DiffOp) -> Result<XSeries<YLaurent>> {
    check_g(k, op)?;
    let xv = k.x_vars().to_vec();
    let mut acc: Option<XSeries<YLaurent>> = None;
    for i in 0..xv.len() {
        let term = apply_in_x(k, op, i)?.mul_poly(&vandermonde_cofactor(&xv, i))?;
        acc = Some(match acc {
            Some(a) => a.add(&term)?,
            None => term,
        });
    }
    Ok(acc.expect("at least two x-variables"))
}

/// `D*_y K - D_{x_1} K` with the formal adjoint in `y`, on the faithful window.
pub fn adjoint_defect(k: &KernelSeries, op: &DiffOp) -> Result<XSeries<YLaurent>> {
    check_g(k, op)?;
    if k.g() != 1 {
        return Err(Error::Invalid("adjoint defect is defined for g = 1".into()));
    }
    let dy = apply_y_adjoint(&op.lambda_free(), &k.series, 0)?;
    dy.sub(&apply_in_x(k, op, 0)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffeqReport {
    pub window: u32,
    /// Symmetric (cleared for g ≥ 2) equation in the x-variables.
    pub symmetric: Check,
    /// `D_{x_1}K - D*_y K` free of negative y-powers (g = 1 only).
    pub regular: Option<Check>,
}

pub fn kernel_diffeq_check(k: &KernelSeries, op: &DiffOp) -> Result<DiffeqReport> {
    let sym = cleared_symmetric_sum(k, op)?;
    let window = sym.trunc();
    let fail = sym.coeffs().iter().find_map(|(x, c)| {
        c.terms().iter().next().map(|(y, v)| Mismatch { x: x.clone(), y: y.clone(), found: v.clone(), expected: Rat::zero() })
    });
    let regular = if k.g() == 1 {
        let d = adjoint_defect(k, op)?;
        let bad = d.coeffs().iter().find_map(|(x, c)| {
            c.terms().iter().find(|(y, _)| y[0] < 0).map(|(y, v)| Mismatch {
                x: x.clone(),
                y: y.clone(),
                found: v.clone(),
                expected: Rat::zero(),
            })
        });
        Some(Check::from_failure(bad))
    } else {
        None
    };
    Ok(DiffeqReport { window, symmetric: Check::from_failure(fail), regular })
}

/// Result of perturbing one kernel coefficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeOutcome {
    pub x: Vec<u32>,
    pub y: Vec<i32>,
    /// Names of the characterizing properties that failed.
    pub broken: Vec<String>,
}

/// Perturbs `trials` seeded coefficients (x-degree inside the faithful
/// window) by `+1`, one at a time, and records which properties break.
pub fn uniqueness_probe(k: &KernelSeries, op: &DiffOp, trials: usize, seed: u64) -> Result<Vec<ProbeOutcome>> {
    let window = k.trunc().saturating_sub(op.window_shift());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cands: Vec<(Exps, YExps)> = Vec::new();
    for x in tuples(k.g() + 1, window as usize) {
        for j in tuples(k.g(), k.y_window as usize - 1).into_iter().filter(|j| j.iter().all(|&a| a < k.y_window as usize)) {
            cands.push((x.iter().map(|&a| a as u32).collect(), j.iter().map(|&a| -(a as i32) - 1).collect()));
        }
    }
    let picks: Vec<&(Exps, YExps)> = cands.choose_multiple(&mut rng, trials).collect();
    let mut out = Vec::new();
    for (x, y) in picks {
        let mut bad = k.clone();
        let v = bad.coeff(x, y) + Rat::one();
        bad.set_coeff(x, y, v);
        let mut broken = Vec::new();
        if !symmetry_check(&bad).pass {
            broken.push("symmetry".to_string());
        }
        if !negative_powers_check(&bad).pass {
            broken.push("negative_powers".to_string());
        }
        if !kernel_diffeq_check(&bad, op)?.symmetric.pass {
            broken.push("differential_equation".to_string());
        }
        if !boundary_check(&bad).pass {
            broken.push("boundary".to_string());
        }
        out.push(ProbeOutcome { x: x.clone(), y: y.clone(), broken });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{expand_solution, first_order_g, heun4, heun_n};
    use crate::sc::{gen_structure_constants, structure_constants};

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn heun4_op() -> DiffOp {
        heun4(&r("2"), [&r("1/3"), &r("1/5"), &r("1/7")], &r("1/2"), None).unwrap()
    }

    fn kernel_of(op: &DiffOp, n: usize) -> KernelSeries {
        build_kernel(&structure_constants(&expand_solution(op, 2 * n).unwrap(), n).unwrap())
    }

    fn heun_n_op() -> DiffOp {
        heun_n(&["2", "3"].map(r), &["1/3", "1/5", "1/7", "1/11"].map(r), &r("1/2"), None).unwrap()
    }

    #[test]
    fn exponential_kernel_is_geometric() {
        let k = kernel_of(&first_order_g(1).unwrap(), 6);
        // 1/(y - s) = Σ s^k y^{-k-1}, s = x1 + x2
        for i in 0..=6u32 {
            for j in 0..=6 - i {
                let want = Rat::binomial(&Rat::int((i + j) as i64), i);
                assert_eq!(k.coeff(&[i, j], &[-(i as i32 + j as i32) - 1]), want);
                assert_eq!(k.series().coeff(&[i, j]).terms().len(), 1);
            }
        }
        assert_eq!(k.y_window(), 7);
        assert!(negative_powers_check(&k).pass);
    }

    #[test]
    fn constant_block_is_inverse_y() {
        let k = kernel_of(&heun4_op(), 4);
        let c = k.series().coeff(&[0, 0]);
        assert_eq!(c.terms().len(), 1);
        assert_eq!(c.terms()[&vec![-1]], Rat::one());
    }

    #[test]
    fn boundary_symmetry_diffeq_heun4() {
        let op = heun4_op();
        let k = kernel_of(&op, 8);
        assert!(boundary_check(&k).pass);
        assert!(symmetry_check(&k).pass);
        let rep = kernel_diffeq_check(&k, &op).unwrap();
        assert_eq!(rep.window, 7);
        assert!(rep.symmetric.pass);
        assert!(rep.regular.unwrap().pass);
    }

    #[test]
    fn exponential_diffeq_is_exact() {
        let op = first_order_g(1).unwrap();
        let k = kernel_of(&op, 6);
        let rep = kernel_diffeq_check(&k, &op).unwrap();
        assert!(rep.symmetric.pass);
        assert!(adjoint_defect(&k, &op).unwrap().is_empty());
    }

    #[test]
    fn fault_injection_detected() {
        let mut k = kernel_of(&heun4_op(), 6);
        let v = k.coeff(&[1, 2], &[-3]) + Rat::one();
        k.set_coeff(&[1, 2], &[-3], v);
        let c = symmetry_check(&k);
        assert!(!c.pass);
        assert_eq!(c.failure.unwrap().x, vec![1, 2]);
    }

    #[test]
    fn round_trip_table() {
        let sol = expand_solution(&heun4_op(), 12).unwrap();
        let t = structure_constants(&sol, 6).unwrap();
        let back = extract_sc_table(&build_kernel(&t)).unwrap();
        for (&(i, j), row) in t.entries() {
            if i + j <= 6 {
                assert_eq!(back.row(i, j), Some(row));
            }
        }
    }

    #[test]
    fn export_round_trip_and_validation() {
        let k = kernel_of(&heun4_op(), 4);
        let e = k.to_export();
        assert_eq!(KernelSeries::from_export(&e).unwrap(), k);
        let mut bad = e.clone();
        bad.entries.push((vec![0, 1], vec![0], Rat::one()));
        assert!(KernelSeries::from_export(&bad).is_err());
        let mut dup = e;
        let first = dup.entries[0].clone();
        dup.entries.push(first);
        assert!(KernelSeries::from_export(&dup).is_err());
    }

    #[test]
    fn two_variable_kernels() {
        let op = first_order_g(2).unwrap();
        let t = gen_structure_constants(&expand_solution(&op, 4).unwrap(), 4).unwrap();
        let k = build_gen_kernel(&t);
        assert!(boundary_check(&k).pass);
        assert!(symmetry_check(&k).pass);
        assert!(kernel_diffeq_check(&k, &op).unwrap().symmetric.pass);
        assert_eq!(extract_gen_table(&k), t);

        let op = heun_n_op();
        let t = gen_structure_constants(&expand_solution(&op, 5).unwrap(), 5).unwrap();
        let k = build_gen_kernel(&t);
        assert!(boundary_check(&k).pass);
        assert!(symmetry_check(&k).pass);
        let rep = kernel_diffeq_check(&k, &op).unwrap();
        assert_eq!(rep.window, 4);
        assert!(rep.symmetric.pass);
    }

    #[test]
    fn perturbations_break_a_property() {
        let op = heun4_op();
        let k = kernel_of(&op, 6);
        let out = uniqueness_probe(&k, &op, 5, 9).unwrap();
        assert_eq!(out.len(), 5);
        assert!(out.iter().all(|o| !o.broken.is_empty()));
    }
}
