use std::fmt::Debug;

use super::Rat;

/// Commutative ring operations shared by every coefficient domain.
///
/// `const_like` builds a constant with the same shape as `self` (variable
/// list, truncation) so generic code never needs a global zero.
pub trait Ring: Clone + PartialEq + Debug {
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    fn scale(&self, c: &Rat) -> Self;
    /// True only when the value is exactly zero with nothing truncated.
    fn is_exact_zero(&self) -> bool;
    fn const_like(&self, c: &Rat) -> Self;
    fn try_inv(&self) -> Option<Self> {
        None
    }

    fn zero_like(&self) -> Self {
        self.const_like(&Rat::zero())
    }

    fn one_like(&self) -> Self {
        self.const_like(&Rat::one())
    }

    fn pow_u(&self, n: u32) -> Self {
        let mut acc = self.one_like();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.times(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.times(&base);
            }
        }
        acc
    }
}

impl Ring for Rat {
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn scale(&self, c: &Rat) -> Self {
        self * c
    }
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }
    fn const_like(&self, c: &Rat) -> Self {
        c.clone()
    }
    fn try_inv(&self) -> Option<Self> {
        self.recip().ok()
    }
}
