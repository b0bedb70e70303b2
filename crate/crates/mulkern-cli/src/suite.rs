//! The acceptance suite behind `all`.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use mulkern::birat::{self, aux_fixed_default, auxiliary_point_check, default_map_points, elliptic_map_check, elliptic_points_check};
use mulkern::closed::{
    check_heun_equations, check_multipoint, check_third_order_equations, oracle_first_order, oracle_heun_algebraic,
    oracle_heun_hypergeometric, oracle_third_order,
};
use mulkern::exact::Rat;
use mulkern::ode::{expand_solution, first_order_g, heun4, heun_n, third_order3, DiffOp};
use mulkern::sc::check_basis;
use mulkern::{assoc, verlinde};
use serde_json::json;

use crate::commands::{anchor, gen_table, kernel_of, oracle_compare, product_check, sc_table, solver_outcome, verlinde_assoc};
use crate::error::Result;
use crate::report::{Outcome, Recorder, Status};

/// Sizes, sample counts and thresholds used by the suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub first_order_degree: u32,
    pub generalized_degree: u32,
    pub generalized_g: Vec<usize>,
    pub heun_n: u32,
    pub heun_m: u32,
    pub heun_equations_n: usize,
    pub algebraic_n: u32,
    pub third_n: u32,
    pub third_m: u32,
    pub multipoint_n: u32,
    pub multipoint_q_degree: u32,
    pub assoc_n: usize,
    pub gen_assoc_first_order_n: usize,
    pub gen_assoc_heun_n: usize,
    pub product_n_one: usize,
    pub product_n_two: usize,
    pub birat_points: usize,
    pub map_precision_bits: usize,
    pub map_steps: usize,
    pub map_residual_log2: i64,
    pub map_points: usize,
    pub solver_order: u32,
    pub verlinde_max_n: usize,
    pub fiber_samples: usize,
    pub fiber_denominator: u64,
    pub fiber_grid: usize,
    pub basis_weight: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            first_order_degree: 8,
            generalized_degree: 6,
            generalized_g: vec![2, 3],
            heun_n: 6,
            heun_m: 8,
            heun_equations_n: 8,
            algebraic_n: 6,
            third_n: 6,
            third_m: 8,
            multipoint_n: 4,
            multipoint_q_degree: 10,
            assoc_n: 5,
            gen_assoc_first_order_n: 4,
            gen_assoc_heun_n: 3,
            product_n_one: 6,
            product_n_two: 4,
            birat_points: 20,
            map_precision_bits: 200,
            map_steps: 200,
            map_residual_log2: -150,
            map_points: 5,
            solver_order: 1,
            verlinde_max_n: 20,
            fiber_samples: 500,
            fiber_denominator: 60,
            fiber_grid: 6,
            basis_weight: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub anchor: &'static str,
    /// Wall-clock budget, when one is set.
    pub budget: Option<Duration>,
}

const fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

pub const CRITERIA: [Criterion; 13] = [
    Criterion { id: 1, name: "first_order_kernel", anchor: anchor::FIRST_ORDER, budget: secs(1) },
    Criterion { id: 2, name: "generalized_first_order_kernel", anchor: anchor::FIRST_ORDER, budget: secs(30) },
    Criterion { id: 3, name: "heun_hypergeometric_oracle", anchor: anchor::HEUN_HYPERGEOMETRIC, budget: secs(120) },
    Criterion { id: 4, name: "heun_differential_equations", anchor: anchor::HEUN_EQUATIONS, budget: secs(120) },
    Criterion { id: 5, name: "heun_algebraic_oracle", anchor: anchor::HEUN_ALGEBRAIC, budget: secs(60) },
    Criterion { id: 6, name: "third_order_kernel", anchor: anchor::THIRD_ORDER, budget: secs(120) },
    Criterion { id: 7, name: "multipoint_kernel", anchor: anchor::MULTIPOINT, budget: secs(300) },
    Criterion { id: 8, name: "associativity", anchor: anchor::ASSOC, budget: secs(300) },
    Criterion { id: 9, name: "product_identity", anchor: anchor::PRODUCT, budget: None },
    Criterion { id: 10, name: "birational_fixtures", anchor: anchor::BIRATIONAL, budget: None },
    Criterion { id: 11, name: "perturbative_solver", anchor: anchor::SOLVER, budget: None },
    Criterion { id: 12, name: "tetrahedron_kernel", anchor: anchor::VERLINDE, budget: secs(30) },
    Criterion { id: 13, name: "product_basis", anchor: anchor::BASIS, budget: None },
];

impl Criterion {
    pub fn check_name(&self) -> String {
        format!("criterion_{:02}_{}", self.id, self.name)
    }
}

fn r(p: i64, q: i64) -> Rat {
    Rat::new(p, q)
}

pub fn heun4_preset() -> Result<DiffOp> {
    Ok(heun4(&Rat::int(2), [&r(1, 3), &r(1, 5), &r(1, 7)], &r(1, 2), None)?)
}

pub fn heun4_algebraic_preset() -> Result<DiffOp> {
    Ok(heun4(&Rat::int(2), [&Rat::one(), &r(1, 5), &r(1, 7)], &Rat::one(), None)?)
}

pub fn third_order_preset() -> Result<DiffOp> {
    Ok(third_order3(&[r(1, 2), r(1, 3), r(1, 5), r(1, 7), r(1, 11), r(1, 13)])?)
}

pub fn heun_n_preset() -> Result<DiffOp> {
    Ok(heun_n(&[Rat::int(2), Rat::int(3)], &[r(1, 3), r(1, 5), r(1, 7), r(1, 11)], &r(1, 2), None)?)
}

pub fn one_variable_presets() -> Result<Vec<DiffOp>> {
    Ok(vec![first_order_g(1)?, heun4_preset()?, third_order_preset()?])
}

pub fn two_variable_presets() -> Result<Vec<DiffOp>> {
    Ok(vec![first_order_g(2)?, heun_n_preset()?])
}

/// Runs each part and passes only if all parts pass.
fn parts(items: Vec<(String, Result<Outcome>)>) -> Result<Outcome> {
    let mut pass = true;
    let mut w = BTreeMap::new();
    for (name, o) in items {
        let o = o?;
        pass &= o.status != Status::Fail;
        w.insert(name, json!({ "status": o.status, "witness": o.witness }));
    }
    Outcome::new(pass, w)
}

fn label(op: &DiffOp) -> String {
    format!("{}_g{}", op.family().name(), op.g())
}

pub fn run_criterion(id: u8, tol: &Tolerances, seed: u64) -> Result<Outcome> {
    match id {
        1 => {
            let n = tol.first_order_degree;
            oracle_compare(&oracle_first_order(1, n, n + 2)?, &first_order_g(1)?, n)
        }
        2 => {
            let n = tol.generalized_degree;
            parts(
                tol.generalized_g
                    .iter()
                    .map(|&g| {
                        (
                            format!("g{g}"),
                            first_order_g(g).map_err(Into::into).and_then(|op| oracle_compare(&oracle_first_order(g, n, n + 2)?, &op, n)),
                        )
                    })
                    .collect(),
            )
        }
        3 => {
            let op = heun4_preset()?;
            oracle_compare(&oracle_heun_hypergeometric(&op, tol.heun_n, tol.heun_m)?, &op, tol.heun_n)
        }
        4 => {
            let op = heun4_preset()?;
            let rep = check_heun_equations(&kernel_of(None, &op, tol.heun_equations_n)?, &op)?;
            Outcome::new(rep.pass, rep)
        }
        5 => {
            let op = heun4_algebraic_preset()?;
            oracle_compare(&oracle_heun_algebraic(&op, tol.algebraic_n)?, &op, tol.algebraic_n)
        }
        6 => {
            let op = third_order_preset()?;
            let eq = || -> Result<Outcome> {
                let rep = check_third_order_equations(&kernel_of(None, &op, tol.third_n as usize)?, &op)?;
                Outcome::new(rep.pass, rep)
            };
            parts(vec![
                (
                    "oracle".into(),
                    oracle_third_order(&op, tol.third_n, tol.third_m)
                        .map_err(Into::into)
                        .and_then(|o| oracle_compare(&o, &op, tol.third_n)),
                ),
                ("equations".into(), eq()),
            ])
        }
        7 => {
            let rep = check_multipoint(&heun_n_preset()?, tol.multipoint_n, tol.multipoint_q_degree)?;
            Outcome::new(rep.pass, rep)
        }
        8 => {
            let mut items = Vec::new();
            for op in one_variable_presets()? {
                let out = sc_table(None, &op, 2 * tol.assoc_n)
                    .and_then(|t| Ok(assoc::assoc_check(&t, tol.assoc_n)?))
                    .and_then(|r| Outcome::new(r.pass, r));
                items.push((label(&op), out));
            }
            for (op, n) in [(first_order_g(2)?, tol.gen_assoc_first_order_n), (heun_n_preset()?, tol.gen_assoc_heun_n)] {
                let out = gen_table(None, &op, n).and_then(|t| Ok(assoc::gen_assoc_check(&t, n)?)).and_then(|r| Outcome::new(r.pass, r));
                items.push((label(&op), out));
            }
            parts(items)
        }
        9 => {
            let mut items = Vec::new();
            for (ops, n) in [(one_variable_presets()?, tol.product_n_one), (two_variable_presets()?, tol.product_n_two)] {
                for op in ops {
                    items.push((label(&op), product_check(None, &op, n).and_then(|r| Outcome::new(r.pass, r))));
                }
            }
            parts(items)
        }
        10 => {
            let mut items = Vec::new();
            for name in birat::FIXTURES {
                let out = birat::fixture(name).and_then(|s| birat::verify_identity(&s, tol.birat_points, seed));
                items.push((name.to_string(), out.map_err(Into::into).and_then(|r| Outcome::new(r.pass, r))));
            }
            items.push((
                "curve_points".into(),
                elliptic_points_check(tol.birat_points, seed).map_err(Into::into).and_then(|r| Outcome::new(r.pass, r)),
            ));
            items.push((
                "auxiliary_point".into(),
                auxiliary_point_check(&aux_fixed_default(), tol.birat_points, seed)
                    .map_err(Into::into)
                    .and_then(|r| Outcome::new(r.pass, r)),
            ));
            let pts: Vec<_> = default_map_points().into_iter().take(tol.map_points).collect();
            let map = elliptic_map_check(&pts, tol.map_precision_bits, tol.map_steps, tol.map_residual_log2);
            items.push((
                "curve_map".into(),
                map.map_err(Into::into).and_then(|r| Outcome::new(r.pass && r.points.len() == tol.map_points, r)),
            ));
            parts(items)
        }
        11 => solver_outcome(tol.solver_order),
        12 => parts(vec![
            ("assoc".into(), verlinde_assoc(1..=tol.verlinde_max_n)),
            (
                "fibers_sampled".into(),
                verlinde::fiber_samples(tol.fiber_samples, seed, tol.fiber_denominator)
                    .map_err(Into::into)
                    .and_then(|r| Outcome::new(r.pass && r.checked == tol.fiber_samples, r)),
            ),
            ("fibers_grid".into(), verlinde::fiber_grid(tol.fiber_grid).map_err(Into::into).and_then(|r| Outcome::new(r.pass, r))),
        ]),
        13 => {
            let mut items = Vec::new();
            for op in two_variable_presets()? {
                let out = expand_solution(&op, tol.basis_weight).and_then(|s| check_basis(&s, tol.basis_weight));
                items.push((label(&op), out.map_err(Into::into).and_then(|r| Outcome::new(r.independent && r.spanning, r))));
            }
            parts(items)
        }
        _ => Outcome::skipped("unknown criterion"),
    }
}

/// Result of one criterion with its wall-clock time.
pub struct Timed {
    pub criterion: Criterion,
    pub outcome: Result<Outcome>,
    pub elapsed: Duration,
}

impl Timed {
    pub fn within_budget(&self) -> bool {
        self.criterion.budget.is_none_or(|b| self.elapsed <= b)
    }
}

pub fn run_timed(c: Criterion, tol: &Tolerances, seed: u64) -> Timed {
    let start = Instant::now();
    let outcome = run_criterion(c.id, tol, seed);
    Timed { criterion: c, outcome, elapsed: start.elapsed() }
}

/// All criteria concurrently, merged in criterion order.
pub fn run_all(tol: &Tolerances, seed: u64) -> Vec<Timed> {
    std::thread::scope(|s| {
        let handles: Vec<_> = CRITERIA.iter().map(|&c| s.spawn(move || run_timed(c, tol, seed))).collect();
        handles.into_iter().map(|h| h.join().expect("criterion thread panicked")).collect()
    })
}

pub fn record_all(rec: &mut Recorder, tol: &Tolerances, seed: u64) -> Result<()> {
    for t in run_all(tol, seed) {
        rec.push(&t.criterion.check_name(), t.criterion.anchor, t.outcome, t.elapsed.as_millis() as u64)?;
    }
    Ok(())
}
