//! Index enumeration helpers.

/// All tuples of length `len` with non-negative entries summing to at most `max_sum`,
/// in lexicographic order.
pub fn tuples(len: usize, max_sum: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn go(len: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur.push(v);
            go(len, left - v, cur, out);
            cur.pop();
        }
    }
    go(len, max_sum, &mut cur, &mut out);
    out
}

/// Non-decreasing tuples of length `len` with sum at most `max_sum`.
pub fn sorted_tuples(len: usize, max_sum: usize) -> Vec<Vec<usize>> {
    tuples(len, max_sum).into_iter().filter(|t| t.windows(2).all(|w| w[0] <= w[1])).collect()
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// Distinct rearrangements of `v`, sorted.
pub fn distinct_permutations(v: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = permutations(v.len()).into_iter().map(|p| p.iter().map(|&i| v[i]).collect()).collect();
    out.sort();
    out.dedup();
    out
}

/// Number of distinct rearrangements of `v`.
pub fn count_distinct_permutations(v: &[usize]) -> u64 {
    let mut s = v.to_vec();
    s.sort_unstable();
    let fact = |n: usize| (1..=n as u64).product::<u64>();
    let mut denom = 1;
    let mut i = 0;
    while i < s.len() {
        let j = (i..s.len()).find(|&j| s[j] != s[i]).unwrap_or(s.len());
        denom *= fact(j - i);
        i = j;
    }
    fact(s.len()) / denom
}

pub fn sorted(v: &[usize]) -> Vec<usize> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(tuples(2, 2).len(), 6);
        assert_eq!(sorted_tuples(2, 2), vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 1]]);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(distinct_permutations(&[1, 1, 0]).len(), 3);
        assert_eq!(count_distinct_permutations(&[2, 0, 2, 1]), 12);
    }
}
