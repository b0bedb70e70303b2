//! Values computed independently with a computer algebra system and frozen.

use mulkern::exact::{parse_poly, Rat};
use mulkern::kernel::build_kernel;
use mulkern::ode::{expand_solution, heun4, heun_n, third_order3};
use mulkern::sc::structure_constants;

fn r(s: &str) -> Rat {
    s.parse().unwrap()
}

fn heun4_preset() -> mulkern::ode::DiffOp {
    heun4(&r("2"), [&r("1/3"), &r("1/5"), &r("1/7")], &r("1/2"), None).unwrap()
}

#[test]
fn heun4_forced_exponent() {
    assert_eq!(heun4_preset().param("r2").unwrap(), r("-173/210"));
}

#[test]
fn heun4_solution_coefficients() {
    let sol = expand_solution(&heun4_preset(), 3).unwrap();
    let want = ["1", "-3/2*l1", "9/32*l1^2 - 243/560*l1 + 173/2240", "-9/448*l1^3 + 837/3920*l1^2 - 284071/1097600*l1 + 27507/548800"];
    for (i, w) in want.iter().enumerate() {
        assert_eq!(*sol.p(i), parse_poly(w, &["l1"]).unwrap(), "P_{i}");
    }
}

#[test]
fn heun4_structure_constants_and_kernel() {
    let t = structure_constants(&expand_solution(&heun4_preset(), 6).unwrap(), 3).unwrap();
    for (k, v) in [(2, "8"), (1, "-81/35"), (0, "-173/280")] {
        assert_eq!(t.get(1, 1, k), r(v));
    }
    for (k, v) in [(3, "21"), (2, "-477/35"), (1, "111/280"), (0, "0")] {
        assert_eq!(t.get(1, 2, k), r(v));
        assert_eq!(t.get(2, 1, k), r(v));
    }
    let k = build_kernel(&t);
    assert_eq!(k.coeff(&[1, 1], &[-3]), r("8"));
    assert_eq!(k.coeff(&[1, 1], &[-1]), r("-173/280"));
}

#[test]
fn third_order_solution_coefficients() {
    let op = third_order3(&["1/2", "1/3", "1/5", "1/7", "1/11", "1/13"].map(r)).unwrap();
    let sol = expand_solution(&op, 3).unwrap();
    let want = ["-5*l1", "-25/3*l1^2 - 25/21*l1 + 5/39", "125/54*l1^3 + 1000/567*l1^2 + 228275/567567*l1 - 25/1134"];
    for (i, w) in want.iter().enumerate() {
        assert_eq!(*sol.p(i + 1), parse_poly(w, &["l1"]).unwrap(), "P_{}", i + 1);
    }
}

#[test]
fn two_point_heun_solution_coefficients() {
    let op = heun_n(&["2", "3"].map(r), &["1/3", "1/5", "1/7", "1/11"].map(r), &r("1/2"), None).unwrap();
    let sol = expand_solution(&op, 3).unwrap();
    let want = [
        "1/2*l1",
        "1/32*l1^2 + 3163/18480*l1 + 1/16*l2",
        "1/1344*l1^3 + 1233/43120*l1^2 + 3/224*l1*l2 + 39682253/448232400*l1 + 19031/388080*l2 - 1693/194040",
    ];
    for (i, w) in want.iter().enumerate() {
        assert_eq!(*sol.p(i + 1), parse_poly(w, &["l1", "l2"]).unwrap(), "P_{}", i + 1);
    }
}
