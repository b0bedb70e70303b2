//! Exact arithmetic: rationals, polynomials, rational functions, truncated
//! series, Laurent polynomials with windows, and a binary float fallback.

mod bigf;
mod laurent;
pub mod linalg;
mod parse;
mod poly;
mod rat;
mod ratfunc;
mod ring;
pub mod sample;
mod series;

pub use bigf::{residual, BigF};
pub use laurent::{YExps, YLaurent};
pub use parse::{parse_poly, parse_ratfunc};
pub use poly::{Exps, Poly};
pub use rat::Rat;
pub use ratfunc::RatFunc;
pub use ring::Ring;
pub use sample::{rand_rat_point, Assignment, Sampler};
pub use series::{var_names, XSeries};
