//! Acceptance suite: one test and one printed line per criterion.

use std::time::Duration;

use mulkern_cli::report::Status;
use mulkern_cli::suite::{run_timed, Tolerances, CRITERIA};

const SEED: u64 = 1;

/// Budgets in seconds, by criterion id.
const BUDGETS: [(u8, Option<u64>); 13] = [
    (1, Some(1)),
    (2, Some(30)),
    (3, Some(120)),
    (4, Some(120)),
    (5, Some(60)),
    (6, Some(120)),
    (7, Some(300)),
    (8, Some(300)),
    (9, None),
    (10, None),
    (11, None),
    (12, Some(30)),
    (13, None),
];

fn pinned() -> Tolerances {
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

fn criterion(id: u8) {
    let c = CRITERIA.iter().copied().find(|c| c.id == id).expect("known criterion");
    let budget = BUDGETS.iter().find(|(i, _)| *i == id).and_then(|(_, b)| b.map(Duration::from_secs));
    assert_eq!(c.budget, budget, "budget drift for criterion {id}");
    let t = run_timed(c, &pinned(), SEED);
    let ms = t.elapsed.as_millis();
    let (status, detail) = match &t.outcome {
        Ok(o) => (o.status, o.witness.to_string()),
        Err(e) => (Status::Fail, e.to_string()),
    };
    let timely = budget.is_none_or(|b| t.elapsed <= b);
    let verdict = if status == Status::Pass && timely { "PASS" } else { "FAIL" };
    let budget_text = budget.map_or("none".to_string(), |b| format!("{} s", b.as_secs()));
    println!("criterion {id:02} {:<32} {verdict} ({ms} ms, budget {budget_text})", c.name);
    assert_eq!(status, Status::Pass, "criterion {id}: {}", &detail[..detail.len().min(2000)]);
    assert!(timely, "criterion {id} took {ms} ms");
}

#[test]
fn tolerances_are_pinned() {
    assert_eq!(pinned(), Tolerances::default());
    assert_eq!(CRITERIA.len(), BUDGETS.len());
}

#[test]
fn c01_first_order_kernel_is_geometric() {
    criterion(1);
}

#[test]
fn c02_generalized_first_order_kernels_match_closed_form() {
    criterion(2);
}

#[test]
fn c03_heun_kernel_matches_hypergeometric_form() {
    criterion(3);
}

#[test]
fn c04_heun_kernel_satisfies_three_equations() {
    criterion(4);
}

#[test]
fn c05_heun_kernel_matches_algebraic_form() {
    criterion(5);
}

#[test]
fn c06_third_order_kernel_and_equations() {
    criterion(6);
}

#[test]
fn c07_multipoint_kernel_properties_and_formula() {
    criterion(7);
}

#[test]
fn c08_associativity_of_all_presets() {
    criterion(8);
}

#[test]
fn c09_residue_pairing_reproduces_products() {
    criterion(9);
}

#[test]
fn c10_birational_and_curve_identities() {
    criterion(10);
}

#[test]
fn c11_perturbative_solver_recovers_taylor_coefficient() {
    criterion(11);
}

#[test]
fn c12_tetrahedron_algebras_and_fibers() {
    criterion(12);
}

#[test]
fn c13_products_form_a_basis() {
    criterion(13);
}
