//! Piecewise-linear tetrahedron kernel, its grid algebras, and the fiber
//! comparison of the two composed polytopes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{Rat, Sampler};

/// Indicator of the closed tetrahedron `x ≤ y+z, y ≤ x+z, z ≤ x+y, x+y+z ≤ 1`.
pub fn tetra_kernel(x: &Rat, y: &Rat, z: &Rat) -> Result<bool> {
    for v in [x, y, z] {
        if v.is_negative() || *v > Rat::one() {
            return Err(Error::Invalid(format!("argument {v} outside [0, 1]")));
        }
    }
    Ok(*x <= y + z && *y <= x + z && *z <= x + y && x + y + z <= Rat::one())
}

fn grid_kernel(n: usize, i: usize, j: usize, k: usize) -> bool {
    i <= j + k && j <= i + k && k <= i + j && i + j + k <= n
}

/// Algebra on the basis `e_{i/n}`, `i = 0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridAlgebra {
    n: usize,
    /// `tensor[i][j][k]` is the coefficient of `e_k` in `e_i · e_j`.
    tensor: Vec<Vec<Vec<u8>>>,
}

impl GridAlgebra {
    pub fn level(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    pub fn coeff(&self, i: usize, j: usize, k: usize) -> u8 {
        self.tensor[i][j][k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: u8) {
        self.tensor[i][j][k] = v;
    }

    /// `e_i · e_j` as coefficients.
    pub fn product(&self, i: usize, j: usize) -> Vec<u64> {
        self.tensor[i][j].iter().map(|&v| v as u64).collect()
    }

    fn mul_vec(&self, v: &[u64], j: usize) -> Vec<u64> {
        let mut out = vec![0; self.dim()];
        for (i, &c) in v.iter().enumerate().filter(|(_, &c)| c != 0) {
            for (k, &t) in self.tensor[i][j].iter().enumerate() {
                out[k] += c * t as u64;
            }
        }
        out
    }

    fn left_mul_vec(&self, i: usize, v: &[u64]) -> Vec<u64> {
        let mut out = vec![0; self.dim()];
        for (j, &c) in v.iter().enumerate().filter(|(_, &c)| c != 0) {
            for (k, &t) in self.tensor[i][j].iter().enumerate() {
                out[k] += c * t as u64;
            }
        }
        out
    }

    pub fn is_commutative(&self) -> bool {
        (0..self.dim()).all(|i| (0..self.dim()).all(|j| self.tensor[i][j] == self.tensor[j][i]))
    }
}

pub fn build_algebra(n: usize) -> Result<GridAlgebra> {
    if n == 0 {
        return Err(Error::Invalid("level must be at least 1".into()));
    }
    let tensor = (0..=n).map(|i| (0..=n).map(|j| (0..=n).map(|k| grid_kernel(n, i, j, k) as u8).collect()).collect()).collect();
    Ok(GridAlgebra { n, tensor })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssocOutcome {
    pub level: usize,
    pub pass: bool,
    pub triples: usize,
    /// First `(a, b, c)` with `(e_a e_b) e_c ≠ e_a (e_b e_c)`.
    pub failure: Option<[usize; 3]>,
}

/// Exhaustive associativity over all basis triples.
pub fn assoc_test_algebra(alg: &GridAlgebra) -> AssocOutcome {
    let d = alg.dim();
    let mut triples = 0;
    for a in 0..d {
        for b in 0..d {
            let ab = alg.product(a, b);
            for c in 0..d {
                triples += 1;
                let left = alg.mul_vec(&ab, c);
                let right = alg.left_mul_vec(a, &alg.product(b, c));
                if left != right {
                    return AssocOutcome { level: alg.n, pass: false, triples, failure: Some([a, b, c]) };
                }
            }
        }
    }
    AssocOutcome { level: alg.n, pass: true, triples, failure: None }
}

pub fn assoc_test(n: usize) -> Result<AssocOutcome> {
    Ok(assoc_test_algebra(&build_algebra(n)?))
}

/// Closed interval `[lo, hi]`; `None` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub lo: Rat,
    pub hi: Rat,
}

impl Interval {
    pub fn length(&self) -> Rat {
        &self.hi - &self.lo
    }
}

/// `{y : (a, b, y) ∈ K, (y, c, d) ∈ K}`.
fn fiber(a: &Rat, b: &Rat, c: &Rat, d: &Rat) -> Option<Interval> {
    let one = Rat::one();
    let lo = [(a - b).abs(), (c - d).abs(), Rat::zero()].into_iter().max().expect("nonempty");
    let hi = [a + b, c + d, &one - a - b, &one - c - d, one.clone()].into_iter().min().expect("nonempty");
    (lo <= hi).then_some(Interval { lo, hi })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiberReport {
    pub x: [Rat; 4],
    pub first: Option<Interval>,
    pub second: Option<Interval>,
    pub equal_length: bool,
    /// `lo₂ - lo₁` when both are nonempty.
    pub shift: Option<Rat>,
}

/// Fibers of the two polytopes over `(x1, x2, x3, x4)`.
pub fn fiber_compare(x: &[Rat; 4]) -> Result<FiberReport> {
    for v in x {
        if v.is_negative() || *v > Rat::one() {
            return Err(Error::Invalid(format!("argument {v} outside [0, 1]")));
        }
    }
    let first = fiber(&x[0], &x[1], &x[2], &x[3]);
    let second = fiber(&x[0], &x[2], &x[1], &x[3]);
    let (equal_length, shift) = match (&first, &second) {
        (Some(p), Some(q)) => (p.length() == q.length(), Some(&q.lo - &p.lo)),
        (None, None) => (true, None),
        _ => (false, None),
    };
    Ok(FiberReport { x: x.clone(), first, second, equal_length, shift })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiberSummary {
    pub pass: bool,
    pub checked: usize,
    pub nonempty: usize,
    pub failure: Option<FiberReport>,
}

fn summarize(reports: impl Iterator<Item = Result<FiberReport>>) -> Result<FiberSummary> {
    let (mut checked, mut nonempty) = (0, 0);
    for r in reports {
        let r = r?;
        checked += 1;
        nonempty += r.first.is_some() as usize;
        if !r.equal_length {
            return Ok(FiberSummary { pass: false, checked, nonempty, failure: Some(r) });
        }
    }
    Ok(FiberSummary { pass: true, checked, nonempty, failure: None })
}

/// Seeded rationals in `[0, 1]` with denominators up to `bound`.
pub fn fiber_samples(count: usize, seed: u64, bound: u64) -> Result<FiberSummary> {
    let mut s = Sampler::new(seed, bound)?;
    let mut draw = move || {
        let q = s.int_in(1, bound as i64);
        Rat::new(s.int_in(0, q), q)
    };
    let pts: Vec<[Rat; 4]> = (0..count).map(|_| [draw(), draw(), draw(), draw()]).collect();
    summarize(pts.iter().map(fiber_compare))
}

/// Every point of the `1/n` grid in `[0, 1]^4`.
pub fn fiber_grid(n: usize) -> Result<FiberSummary> {
    let g = |i: usize| Rat::new(i as i64, n as i64);
    let pts = (0..(n + 1).pow(4)).map(move |m| {
        let i = [m % (n + 1), m / (n + 1) % (n + 1), m / (n + 1).pow(2) % (n + 1), m / (n + 1).pow(3)];
        [g(i[0]), g(i[1]), g(i[2]), g(i[3])]
    });
    summarize(pts.map(|p| fiber_compare(&p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rat {
        Rat::new(p, q)
    }

    #[test]
    fn kernel_vertices() {
        let (z, o) = (Rat::zero(), Rat::one());
        assert!(tetra_kernel(&z, &z, &z).unwrap());
        let h = r(1, 2);
        assert!(tetra_kernel(&h, &h, &z).unwrap());
        assert!(!tetra_kernel(&o, &o, &z).unwrap());
        assert!(!tetra_kernel(&o, &o, &o).unwrap());
        assert!(tetra_kernel(&r(3, 2), &z, &z).is_err());
    }

    #[test]
    fn small_products() {
        let a1 = build_algebra(1).unwrap();
        assert_eq!(a1.product(0, 0), vec![1, 0]);
        let a2 = build_algebra(2).unwrap();
        assert_eq!(a2.product(1, 1), vec![1, 0, 0]);
        assert_eq!(a2.product(0, 1), vec![0, 1, 0]);
        assert!(build_algebra(5).unwrap().is_commutative());
        assert!(build_algebra(0).is_err());
    }

    #[test]
    fn grid_support_matches_kernel() {
        let n = 6;
        let a = build_algebra(n).unwrap();
        let g = |i: usize| r(i as i64, n as i64);
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    assert_eq!(a.coeff(i, j, k) == 1, tetra_kernel(&g(i), &g(j), &g(k)).unwrap());
                }
            }
        }
    }

    #[test]
    fn associative_up_to_level_20() {
        for n in 1..=20 {
            let o = assoc_test(n).unwrap();
            assert!(o.pass, "level {n}: {:?}", o.failure);
        }
        assert_eq!(assoc_test(1).unwrap().triples, 8);
    }

    #[test]
    fn fault_injection_breaks_associativity() {
        let mut a = build_algebra(4).unwrap();
        assert_eq!(a.coeff(1, 1, 3), 0);
        a.set(1, 1, 3, 1);
        assert!(!assoc_test_algebra(&a).pass);
    }

    #[test]
    fn fibers() {
        let z = Rat::zero();
        let f = fiber_compare(&[z.clone(), z.clone(), z.clone(), z.clone()]).unwrap();
        assert_eq!(f.first, Some(Interval { lo: z.clone(), hi: z.clone() }));
        assert_eq!(f.shift, Some(z.clone()));
        let f = fiber_compare(&[r(1, 5), r(1, 3), r(1, 3), r(1, 7)]).unwrap();
        assert_eq!(f.first, f.second);
        assert!(fiber_samples(500, 11, 60).unwrap().pass);
        let g = fiber_grid(6).unwrap();
        assert!(g.pass);
        assert_eq!(g.checked, 7usize.pow(4));
        assert!(g.nonempty > 0);
    }
}
