//! Fraction-free (Bareiss) elimination over the integers after clearing
//! row denominators, with rational back-substitution.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::Rat;
use crate::error::{Error, Result};

/// Row echelon form of an augmented system `[A | B]`.
#[derive(Debug, Clone)]
pub struct Echelon {
    rows: Vec<Vec<BigInt>>,
    ncols: usize,
    nrhs: usize,
    pivots: Vec<usize>,
    swaps: usize,
}

fn clear_row(row: &[Rat]) -> Vec<BigInt> {
    let l = row.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    row.iter().map(|r| r.numer() * (&l / r.denom())).collect()
}

impl Echelon {
    /// Eliminates `[a | b]`; `a` is row-major with `ncols` columns and every
    /// row of `b` holds `nrhs` right-hand sides.
    pub fn new(a: &[Vec<Rat>], b: &[Vec<Rat>], ncols: usize, nrhs: usize) -> Self {
        let mut rows: Vec<Vec<BigInt>> = a
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut full = r.clone();
                full.resize(ncols, Rat::zero());
                match b.get(i) {
                    Some(br) => full.extend(br.iter().cloned()),
                    None => full.extend(std::iter::repeat_n(Rat::zero(), nrhs)),
                }
                clear_row(&full)
            })
            .collect();
        let width = ncols + nrhs;
        let mut pivots = Vec::new();
        let mut prev = BigInt::one();
        let mut r = 0;
        let mut swaps = 0;
        for c in 0..ncols {
            if r == rows.len() {
                break;
            }
            let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
                continue;
            };
            if p != r {
                rows.swap(r, p);
                swaps += 1;
            }
            for i in r + 1..rows.len() {
                if rows[i][c].is_zero() {
                    for j in c + 1..width {
                        rows[i][j] = &rows[r][c] * &rows[i][j] / &prev;
                    }
                    continue;
                }
                for j in c + 1..width {
                    let v = &rows[r][c] * &rows[i][j] - &rows[i][c] * &rows[r][j];
                    rows[i][j] = v / &prev;
                }
                rows[i][c] = BigInt::zero();
            }
            prev = rows[r][c].clone();
            pivots.push(c);
            r += 1;
        }
        Echelon { rows, ncols, nrhs, pivots, swaps }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Columns without a pivot.
    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.ncols).filter(|c| !self.pivots.contains(c)).collect()
    }

    /// First right-hand side index that is inconsistent, with its row.
    pub fn inconsistency(&self) -> Option<(usize, usize)> {
        for (i, row) in self.rows.iter().enumerate().skip(self.rank()) {
            for k in 0..self.nrhs {
                if !row[self.ncols + k].is_zero() {
                    return Some((k, i));
                }
            }
        }
        None
    }

    /// Particular solution per right-hand side, free variables set to 0.
    pub fn back_substitute(&self) -> Result<Vec<Vec<Rat>>> {
        if let Some((k, i)) = self.inconsistency() {
            return Err(Error::Inconsistent(format!("right-hand side {k}, row {i}")));
        }
        let mut sols = vec![vec![Rat::zero(); self.ncols]; self.nrhs];
        for (k, x) in sols.iter_mut().enumerate() {
            for (r, &c) in self.pivots.iter().enumerate().rev() {
                let row = &self.rows[r];
                let mut acc = Rat::from_bigint(row[self.ncols + k].clone());
                for j in c + 1..self.ncols {
                    if !row[j].is_zero() && !x[j].is_zero() {
                        acc -= &(Rat::from_bigint(row[j].clone()) * &x[j]);
                    }
                }
                x[c] = acc.checked_div(&Rat::from_bigint(row[c].clone()))?;
            }
        }
        Ok(sols)
    }
}

pub fn rank(a: &[Vec<Rat>], ncols: usize) -> usize {
    Echelon::new(a, &[], ncols, 0).rank()
}

/// Solves `A X = B` requiring consistency and a unique solution.
pub fn solve_unique(a: &[Vec<Rat>], b: &[Vec<Rat>], ncols: usize, nrhs: usize) -> Result<Vec<Vec<Rat>>> {
    let e = Echelon::new(a, b, ncols, nrhs);
    let free = e.free_columns();
    if !free.is_empty() {
        return Err(Error::Inconsistent(format!("underdetermined, free columns {free:?}")));
    }
    e.back_substitute()
}

/// Determinant of a square matrix.
pub fn det(a: &[Vec<Rat>]) -> Rat {
    let n = a.len();
    let scale = a.iter().fold(Rat::one(), |acc, r| {
        let l = r.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
        acc * Rat::from_bigint(l)
    });
    let e = Echelon::new(a, &[], n, 0);
    if e.rank() < n {
        return Rat::zero();
    }
    let sign = if e.swaps.is_multiple_of(2) { 1 } else { -1 };
    let last = Rat::from_bigint(e.rows[n - 1][n - 1].clone()) * Rat::int(sign);
    last.checked_div(&scale).expect("nonzero scale")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: &[&[i64]]) -> Vec<Vec<Rat>> {
        v.iter().map(|r| r.iter().map(|&x| Rat::int(x)).collect()).collect()
    }

    #[test]
    fn solves_small_system() {
        let a = m(&[&[2, 1, -1], &[-3, -1, 2], &[-2, 1, 2]]);
        let b = m(&[&[8], &[-11], &[-3]]);
        let x = solve_unique(&a, &b, 3, 1).unwrap();
        assert_eq!(x[0], vec![Rat::int(2), Rat::int(3), Rat::int(-1)]);
    }

    #[test]
    fn rational_entries_and_multiple_rhs() {
        let a = vec![vec![Rat::new(1, 2), Rat::new(1, 3)], vec![Rat::new(1, 5), Rat::new(-1, 7)]];
        let b = vec![vec![Rat::one(), Rat::zero()], vec![Rat::zero(), Rat::one()]];
        let x = solve_unique(&a, &b, 2, 2).unwrap();
        for k in 0..2 {
            for i in 0..2 {
                let lhs: Rat = (0..2).map(|j| &a[i][j] * &x[k][j]).sum();
                assert_eq!(lhs, b[i][k]);
            }
        }
    }

    #[test]
    fn overdetermined_consistent_and_inconsistent() {
        let a = m(&[&[1, 0], &[0, 1], &[1, 1]]);
        assert!(solve_unique(&a, &m(&[&[1], &[2], &[3]]), 2, 1).is_ok());
        assert!(matches!(solve_unique(&a, &m(&[&[1], &[2], &[4]]), 2, 1), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn rank_and_determinant() {
        let a = m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]);
        assert_eq!(rank(&a, 3), 2);
        assert_eq!(det(&a), Rat::zero());
        let b = m(&[&[0, 2], &[3, 1]]);
        assert_eq!(det(&b), Rat::int(-6));
        let c = vec![vec![Rat::new(1, 2), Rat::one()], vec![Rat::one(), Rat::new(1, 3)]];
        assert_eq!(det(&c), Rat::new(1, 6) - Rat::one());
    }
}
