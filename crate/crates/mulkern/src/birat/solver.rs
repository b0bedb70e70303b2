//! Order-by-order solution for the tilde map in powers of `e = x2 - x3`.

use serde::Serialize;

use super::KernelKind;
use crate::error::{Error, Result};
use crate::exact::{parse_ratfunc, Poly, Rat, RatFunc, XSeries};

const COORDS: [&str; 4] = ["x1", "x2", "y", "z"];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SolverStatus {
    Solved,
    /// The linearized φ-equation is identically zero and so is the residual.
    Underdetermined {
        order: u32,
    },
    /// Linear part vanishes but the residual does not.
    Obstruction {
        order: u32,
        residual: String,
    },
}

#[derive(Debug, Clone)]
pub struct SolverOutcome {
    /// `q_1, q_2, ...` over `x1, x2, y, z`.
    pub q: Vec<RatFunc>,
    pub status: SolverStatus,
    /// First order at which the measure equation fails, if any.
    pub measure_failure: Option<u32>,
}

fn coords() -> Vec<String> {
    COORDS.iter().map(|s| s.to_string()).collect()
}

fn rf_var(name: &str) -> RatFunc {
    RatFunc::from_poly(Poly::var_in(coords(), name))
}

fn rf_const(c: Rat) -> RatFunc {
    RatFunc::constant_in(coords(), c)
}

struct Ctx {
    trunc: u32,
}

impl Ctx {
    fn constant(&self, f: RatFunc) -> XSeries<RatFunc> {
        XSeries::constant(&["e".to_string()], self.trunc, f)
    }

    fn e(&self) -> XSeries<RatFunc> {
        XSeries::var(&["e".to_string()], self.trunc, "e", &rf_const(Rat::zero()))
    }

    fn eval(&self, f: &RatFunc, args: &[XSeries<RatFunc>]) -> Result<XSeries<RatFunc>> {
        f.eval_in(args, &self.constant(rf_const(Rat::zero())))
    }

    fn series(&self, c0: RatFunc, q: &[RatFunc]) -> Result<XSeries<RatFunc>> {
        let mut s = self.constant(c0);
        for (k, qk) in q.iter().enumerate() {
            s.add_term(vec![k as u32 + 1], qk.clone());
        }
        Ok(s)
    }
}

fn combine(kind: KernelKind, a: &XSeries<RatFunc>, b: &XSeries<RatFunc>) -> Result<XSeries<RatFunc>> {
    match kind {
        KernelKind::Exponential => a.add(b),
        KernelKind::Power => a.mul(b),
    }
}

/// Solves the φ-equation for `q_1..q_order` and then tests the measure
/// equation with the result. `phi` and `psi` are over slots `a, b, y`.
pub fn solve_ybar_perturbative(kind: KernelKind, phi: &str, psi: &str, order: u32) -> Result<SolverOutcome> {
    let slots = ["a", "b", "y"];
    let phi = parse_ratfunc(phi, &slots)?;
    let psi = parse_ratfunc(psi, &slots)?;
    let cx = Ctx { trunc: order };
    let (x1, x2, y, z) = (cx.constant(rf_var("x1")), cx.constant(rf_var("x2")), cx.constant(rf_var("y")), cx.constant(rf_var("z")));
    let x3 = x2.sub(&cx.e())?;
    let lhs = combine(kind, &cx.eval(&phi, &[x1.clone(), x2.clone(), y.clone()])?, &cx.eval(&phi, &[y.clone(), x3.clone(), z.clone()])?)?;

    // derivative in ỹ of the right side at e = 0
    let (x1r, x2r, zr) = (rf_var("x1"), rf_var("x2"), rf_var("z"));
    let proto = rf_const(Rat::zero());
    let rhs0 = |yt: RatFunc| -> Result<RatFunc> {
        let a = phi.eval_in(&[x1r.clone(), x2r.clone(), yt.clone()], &proto)?;
        let b = phi.eval_in(&[yt, x2r.clone(), zr.clone()], &proto)?;
        Ok(match kind {
            KernelKind::Exponential => a.add(&b),
            KernelKind::Power => a.mul(&b),
        })
    };
    let lin = rhs0(rf_var("y"))?.deriv_var("y");

    let mut q: Vec<RatFunc> = Vec::new();
    let mut status = SolverStatus::Solved;
    for k in 1..=order {
        let yt = cx.series(rf_var("y"), &q)?;
        let rhs = combine(kind, &cx.eval(&phi, &[x1.clone(), x3.clone(), yt.clone()])?, &cx.eval(&phi, &[yt, x2.clone(), z.clone()])?)?;
        let d = lhs.sub(&rhs)?;
        for j in 0..k {
            if !d.coeff(&[j]).is_zero() {
                return Err(Error::Inconsistent(format!("order {j} residual survives: {}", d.coeff(&[j]))));
            }
        }
        let dk = d.coeff(&[k]);
        if lin.is_zero() {
            status = if dk.is_zero() {
                SolverStatus::Underdetermined { order: k }
            } else {
                SolverStatus::Obstruction { order: k, residual: dk.to_string() }
            };
            break;
        }
        q.push(dk.div(&lin)?);
    }

    let measure_failure = if status == SolverStatus::Solved {
        let yt = cx.series(rf_var("y"), &q)?;
        let dyt = cx.series(rf_const(Rat::one()), &q.iter().map(|qk| qk.deriv_var("y")).collect::<Vec<_>>())?;
        let l = cx.eval(&psi, &[x1.clone(), x2.clone(), y.clone()])?.mul(&cx.eval(&psi, &[y, x3.clone(), z.clone()])?)?;
        let r = cx.eval(&psi, &[x1, x3, yt.clone()])?.mul(&cx.eval(&psi, &[yt, x2, z])?)?.mul(&dyt)?;
        let diff = l.sub(&r)?;
        (0..=order).find(|&k| !diff.coeff(&[k]).is_zero())
    } else {
        None
    };
    Ok(SolverOutcome { q, status, measure_failure })
}

/// Taylor coefficients of a map `ỹ(x1, x2, x3, y, z)` in `e` at `x3 = x2 - e`.
pub fn taylor_in_gap(map: &str, order: u32) -> Result<Vec<RatFunc>> {
    let f = parse_ratfunc(map, &["x1", "x2", "x3", "y", "z"])?;
    let cx = Ctx { trunc: order };
    let x2 = cx.constant(rf_var("x2"));
    let args = [cx.constant(rf_var("x1")), x2.clone(), x2.sub(&cx.e())?, cx.constant(rf_var("y")), cx.constant(rf_var("z"))];
    let s = cx.eval(&f, &args)?;
    Ok((0..=order).map(|k| s.coeff(&[k])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_ratfunc;

    const MAP: &str = "(x1*x2 + x3*z + 1)/(x1*x3 + x2*z + 1)*y";

    #[test]
    fn recovers_first_order_of_linear_exponent_map() {
        let out = solve_ybar_perturbative(KernelKind::Exponential, "a*b*y + y", "1/y", 2).unwrap();
        assert_eq!(out.status, SolverStatus::Solved);
        assert_eq!(out.measure_failure, None);
        let t = taylor_in_gap(MAP, 2).unwrap();
        assert_eq!(t[0], rf_var("y"));
        let want = parse_ratfunc("y*(x1 - z)/(x1*x2 + 1 + x2*z)", &COORDS).unwrap();
        assert_eq!(out.q[0], want);
        assert_eq!(t[1], want);
        assert_eq!(out.q[1], t[2]);
    }

    #[test]
    fn pure_measure_is_underdetermined() {
        let out = solve_ybar_perturbative(KernelKind::Power, "1", "1/y", 2).unwrap();
        assert_eq!(out.status, SolverStatus::Underdetermined { order: 1 });
        assert!(out.q.is_empty());
    }

    #[test]
    fn laurent_exponent_matches_its_map() {
        let out = solve_ybar_perturbative(KernelKind::Exponential, "a*b*y + a/(b*y) + b/(a*y) + y/(a*b)", "1/y", 1).unwrap();
        let t = taylor_in_gap("(x1*x2 + x3*z)/(x1*x3 + x2*z)*y", 1).unwrap();
        assert_eq!(out.q[0], t[1]);
        assert_eq!(out.measure_failure, None);
    }
}
