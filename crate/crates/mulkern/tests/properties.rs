use mulkern::exact::{Rat, Sampler, XSeries, YLaurent};
use mulkern::ode::{expand_solution, heun4};
use mulkern::sc::structure_constants;
use mulkern::verlinde::{assoc_test, fiber_compare, tetra_kernel};
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = Rat> {
    (-50i64..=50, 1i64..=30).prop_map(|(p, q)| Rat::new(p, q))
}

fn unit_rat() -> impl Strategy<Value = Rat> {
    (1i64..=24).prop_flat_map(|q| (0..=q).prop_map(move |p| Rat::new(p, q)))
}

fn series(coeffs: Vec<Rat>, trunc: u32) -> XSeries<Rat> {
    let vars = vec!["x".to_string()];
    let mut s = XSeries::zero(&vars, trunc, Rat::zero());
    for (i, c) in coeffs.into_iter().enumerate() {
        s.add_term(vec![i as u32], c);
    }
    s
}

fn series_strategy(trunc: u32) -> impl Strategy<Value = XSeries<Rat>> {
    prop::collection::vec(rat(), (trunc + 1) as usize).prop_map(move |c| series(c, trunc))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rational_text_roundtrip(a in rat(), b in rat()) {
        prop_assert_eq!(a.to_pq().parse::<Rat>().unwrap(), a.clone());
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        if !b.is_zero() {
            prop_assert_eq!((&a * &b).checked_div(&b).unwrap(), a);
        }
    }

    #[test]
    fn series_product_is_associative(f in series_strategy(5), g in series_strategy(5), h in series_strategy(5)) {
        let l = f.mul(&g).unwrap().mul(&h).unwrap();
        let r = f.mul(&g.mul(&h).unwrap()).unwrap();
        prop_assert_eq!(l, r);
        prop_assert_eq!(f.mul(&g).unwrap(), g.mul(&f).unwrap());
    }

    #[test]
    fn series_inverse_and_root(mut c in prop::collection::vec(rat(), 6)) {
        c[0] = Rat::one();
        let f = series(c, 5);
        let one = series(vec![Rat::one()], 5);
        prop_assert_eq!(f.mul(&f.inv().unwrap()).unwrap(), one);
        let s = f.sqrt().unwrap();
        prop_assert_eq!(s.mul(&s).unwrap(), f.clone());
        let cube = f.pow_rat(&Rat::new(1, 3)).unwrap();
        prop_assert_eq!(cube.mul(&cube).unwrap().mul(&cube).unwrap(), f);
    }

    #[test]
    fn residue_is_linear(a in rat(), b in rat(), c in rat()) {
        let v = vec!["y".to_string()];
        let l = YLaurent::from_terms(&v, [(vec![-2], a), (vec![-1], b.clone()), (vec![0], c.clone())]);
        prop_assert_eq!(l.residue().unwrap(), b.clone());
        prop_assert_eq!(l.scale(&c).residue().unwrap(), &b * &c);
    }

    #[test]
    fn sampler_is_deterministic(seed in any::<u64>()) {
        let mut a = Sampler::new(seed, 10).unwrap();
        let mut b = Sampler::new(seed, 10).unwrap();
        for _ in 0..5 {
            let x = a.rat();
            prop_assert_eq!(&x, &b.rat());
            prop_assert!(x.numer() >= &1.into() && x.numer() <= &10.into() && x.denom() <= &10.into());
        }
    }

    #[test]
    fn tetrahedron_is_permutation_invariant(x in unit_rat(), y in unit_rat(), z in unit_rat()) {
        let k = tetra_kernel(&x, &y, &z).unwrap();
        prop_assert_eq!(k, tetra_kernel(&y, &z, &x).unwrap());
        prop_assert_eq!(k, tetra_kernel(&y, &x, &z).unwrap());
    }

    #[test]
    fn fibers_have_equal_length(x in [unit_rat(), unit_rat(), unit_rat(), unit_rat()]) {
        let f = fiber_compare(&x).unwrap();
        prop_assert!(f.equal_length, "{:?}", f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn grid_algebras_are_associative(n in 1usize..=12) {
        prop_assert!(assoc_test(n).unwrap().pass);
    }

    #[test]
    fn heun_tables_are_symmetric(t in 3i64..40, s in [1i64..9, 1i64..9, 1i64..9], q in 2i64..9) {
        let op = heun4(&Rat::int(t), [&Rat::new(1, s[0] + 1), &Rat::new(1, s[1] + 2), &Rat::new(1, s[2] + 3)], &Rat::new(1, q), None).unwrap();
        match expand_solution(&op, 6) {
            Ok(sol) => {
                let tab = structure_constants(&sol, 3).unwrap();
                prop_assert_eq!(tab.asymmetry(), None);
                prop_assert_eq!(tab.triangular_violation(), None);
            }
            Err(e) => prop_assert!(matches!(e, mulkern::Error::Resonance(_)), "{e}"),
        }
    }
}
