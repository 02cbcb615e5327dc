mod common;

use std::cmp::Ordering;

use common::{form_value, power, value};
use fockrat::arithmetic::{add, conjugate, invert_pos_real, mul, negate, sqrt_ell, sub, Accuracy};
use fockrat::reduction::{
    applicable_rewrites, apply_rewrite, normalize_naive, normalize_state, normalize_traced,
};
use fockrat::superposition::{apply_q, apply_t, apply_w};
use fockrat::valuation::{cmp_component, eval_n, unit_value};
use fockrat::{
    fermion_reorder_sign, n_equal, normalize, Family, FermionOp, NumberState, Part, Radix, Sign,
    StandardForm, Statistics, SystemKind,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

const R2: Radix = Radix::BINARY;

fn kind() -> impl Strategy<Value = SystemKind> {
    (0usize..4).prop_map(|i| SystemKind::ALL[i])
}

fn statistics() -> impl Strategy<Value = Statistics> {
    prop_oneof![Just(Statistics::Boson), Just(Statistics::Fermion)]
}

fn entries(
    sites: i64,
    count: u64,
    len: usize,
) -> impl Strategy<Value = Vec<(SystemKind, i64, u64)>> {
    prop::collection::vec((kind(), -sites..=sites, 1..=count), 0..len)
}

fn state_with(stats: Statistics) -> impl Strategy<Value = NumberState> {
    entries(12, 9, 10).prop_map(move |e| NumberState::from_systems(&e, stats).unwrap())
}

fn state() -> impl Strategy<Value = NumberState> {
    (entries(12, 9, 10), statistics()).prop_map(|(e, s)| NumberState::from_systems(&e, s).unwrap())
}

fn boson() -> impl Strategy<Value = NumberState> {
    state_with(Statistics::Boson)
}

fn radix() -> impl Strategy<Value = Radix> {
    (2u32..=7).prop_map(|k| Radix::new(k).unwrap())
}

fn positive_real() -> impl Strategy<Value = StandardForm> {
    prop::collection::btree_set(-10i64..=10, 1..8)
        .prop_map(|s| StandardForm::new(Part::from_exponents(Sign::Plus, s), None))
}

fn binary_literal() -> impl Strategy<Value = String> {
    ("-?", "[01]{1,12}", prop::option::of("[01]{1,8}")).prop_map(|(sign, int, frac)| match frac {
        Some(f) => format!("{sign}{int}.{f}"),
        None => format!("{sign}{int}"),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn from_systems_counts_read_back(e in entries(6, 5, 12)) {
        let s = NumberState::from_systems(&e, Statistics::Boson).unwrap();
        for kind in SystemKind::ALL {
            for j in -6..=6 {
                let expected: u64 = e.iter().filter(|(k, jj, _)| *k == kind && *jj == j).map(|e| e.2).sum();
                prop_assert_eq!(s.count(kind, j), expected);
            }
        }
    }

    #[test]
    fn text_round_trip(s in state(), flip in any::<bool>()) {
        let s = if flip { s.with_phase(Sign::Minus) } else { s };
        let back: NumberState = s.to_string().parse().unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn binary_literals_are_standard(text in binary_literal(), imaginary in any::<bool>()) {
        let family = if imaginary { Family::Imaginary } else { Family::Real };
        let s = NumberState::from_binary_literal(&text, family, R2).unwrap();
        prop_assert!(s.is_standard(R2));
    }

    #[test]
    fn reorder_sign_is_multiplicative(
        a in prop::collection::btree_set((kind(), 1u64..4, -4i64..4), 0..6),
        b in prop::collection::btree_set((kind(), 4u64..8, -4i64..4), 0..6),
    ) {
        let ops = |set: &std::collections::BTreeSet<(SystemKind, u64, i64)>| -> Vec<FermionOp> {
            set.iter().map(|&(kind, h, j)| FermionOp { kind, h, j }).collect()
        };
        let (a, b) = (ops(&a), ops(&b));
        let mut sorted_a = a.clone();
        sorted_a.sort_by_key(|o| o.canonical_key());
        let mut sorted_b = b.clone();
        sorted_b.sort_by_key(|o| o.canonical_key());
        let whole: Vec<FermionOp> = a.iter().chain(&b).copied().collect();
        let parts: Vec<FermionOp> = sorted_a.iter().chain(&sorted_b).copied().collect();
        prop_assert_eq!(
            fermion_reorder_sign(&whole).unwrap(),
            fermion_reorder_sign(&a).unwrap() * fermion_reorder_sign(&b).unwrap()
                * fermion_reorder_sign(&parts).unwrap()
        );
    }

    #[test]
    fn normalize_preserves_value_and_is_standard(s in state(), k in radix()) {
        let (form, _) = normalize(&s, k);
        prop_assert_eq!(form_value(&form, k), value(&s, k));
        prop_assert!(form.to_state(Statistics::Boson, Sign::Plus).is_standard(k));
    }

    #[test]
    fn normalize_is_idempotent(s in state(), k in radix()) {
        let once = normalize_state(&s, k);
        let twice = normalize_state(&once, k);
        prop_assert_eq!(&twice, &once);
        prop_assert_eq!(normalize_traced(&once, k).step_count, 0);
    }

    #[test]
    fn normalize_stays_within_step_budget(s in state(), k in radix()) {
        let n = normalize_traced(&s, k);
        prop_assert!(n.step_count <= 64 * (s.total_count() + s.support_span()));
    }

    #[test]
    fn statistics_do_not_change_the_form(s in boson(), k in radix()) {
        let f = s.with_statistics(Statistics::Fermion);
        prop_assert_eq!(normalize(&s, k).0, normalize(&f, k).0);
    }

    #[test]
    fn every_rewrite_preserves_value(s in state(), k in radix()) {
        for rule in applicable_rewrites(&s, k) {
            let (next, step) = apply_rewrite(&s, rule, k).unwrap();
            prop_assert_eq!(value(&next, k), value(&s, k), "{}", rule);
            if !s.is_fermion() {
                prop_assert_eq!(step.phase_flip, Sign::Plus);
            }
            prop_assert_eq!(next.phase(), s.phase() * step.phase_flip);
        }
    }

    #[test]
    fn naive_strategy_agrees_with_normalize(s in state_with(Statistics::Boson)) {
        let naive = normalize_naive(&s, R2, 1_000_000).expect("within budget");
        prop_assert_eq!(naive.form, normalize(&s, R2).0);
    }

    #[test]
    fn n_equal_matches_values(a in boson(), b in boson()) {
        prop_assert_eq!(n_equal(&a, &b, R2), value(&a, R2) == value(&b, R2));
        let shuffled = add(&a, &add(&b, &negate(&b)).unwrap()).unwrap();
        prop_assert!(n_equal(&a, &shuffled, R2));
    }

    #[test]
    fn cmp_component_matches_values(a in state(), b in state(), k in radix()) {
        let b = b.with_statistics(a.statistics());
        for family in Family::BOTH {
            let expected = value(&a, k).part(family).cmp(value(&b, k).part(family));
            prop_assert_eq!(cmp_component(&a, &b, family, k), expected);
        }
    }

    #[test]
    fn eval_matches_oracle(s in state(), k in radix()) {
        let f = eval_n(&s, k).to_fraction();
        let v = value(&s, k);
        prop_assert_eq!((f.re, f.im), (v.re, v.im));
    }

    #[test]
    fn one_more_system_adds_its_unit(s in boson(), kind in kind(), j in -12i64..12) {
        let one = NumberState::from_systems(&[(kind, j, 1)], Statistics::Boson).unwrap();
        let grown = add(&s, &one).unwrap();
        let expected = &eval_n(&s, R2) + &unit_value(kind, j, R2);
        prop_assert_eq!(eval_n(&grown, R2), expected);
    }

    #[test]
    fn add_and_mul_commute_and_associate(a in boson(), b in boson(), c in boson()) {
        prop_assert!(n_equal(&add(&a, &b).unwrap(), &add(&b, &a).unwrap(), R2));
        prop_assert!(n_equal(&mul(&a, &b).unwrap(), &mul(&b, &a).unwrap(), R2));
        let l = add(&add(&a, &b).unwrap(), &c).unwrap();
        let r = add(&a, &add(&b, &c).unwrap()).unwrap();
        prop_assert!(n_equal(&l, &r, R2));
        let l = mul(&mul(&a, &b).unwrap(), &c).unwrap();
        let r = mul(&a, &mul(&b, &c).unwrap()).unwrap();
        prop_assert!(n_equal(&l, &r, R2));
    }

    #[test]
    fn mul_distributes_over_add(a in boson(), b in boson(), c in boson()) {
        let l = mul(&a, &add(&b, &c).unwrap()).unwrap();
        let r = add(&mul(&a, &b).unwrap(), &mul(&a, &c).unwrap()).unwrap();
        prop_assert!(n_equal(&l, &r, R2));
    }

    #[test]
    fn negation_and_conjugation_values(s in state()) {
        prop_assert_eq!(value(&negate(&s), R2), value(&s, R2).neg());
        let c = value(&conjugate(&s), R2);
        let v = value(&s, R2);
        prop_assert_eq!((c.re, c.im), (v.re.clone(), -v.im));
        prop_assert!(normalize(&sub(&s, &s).unwrap(), R2).0.is_zero());
    }

    #[test]
    fn fermion_add_and_mul_keep_values(a in state_with(Statistics::Fermion), b in state_with(Statistics::Fermion)) {
        prop_assert_eq!(value(&add(&a, &b).unwrap(), R2), value(&a, R2).add(&value(&b, R2)));
        prop_assert_eq!(value(&mul(&a, &b).unwrap(), R2), value(&a, R2).mul(&value(&b, R2)));
    }

    #[test]
    fn transforms_commute(s in state(), n in -5i64..5) {
        prop_assert_eq!(apply_w(&apply_q(&s)), apply_q(&apply_w(&s)));
        prop_assert_eq!(apply_w(&apply_t(&s, n)), apply_t(&apply_w(&s), n));
        prop_assert_eq!(apply_q(&apply_t(&s, n)), apply_t(&apply_q(&s), n));
        let scaled = value(&apply_t(&s, n), R2);
        let v = value(&s, R2);
        let f = power(R2, n);
        prop_assert_eq!((scaled.re, scaled.im), (v.re * &f, v.im * &f));
    }

    #[test]
    fn inverse_lands_in_the_unit_window(x in positive_real(), ell in 1u32..24) {
        let t = invert_pos_real(&x, Accuracy::new(ell).unwrap(), R2).unwrap();
        let p = form_value(&x, R2).mul(&form_value(&t, R2)).re;
        let one = BigRational::from_integer(BigInt::from(1));
        prop_assert!(p < one);
        prop_assert!(p >= one - power(R2, -i64::from(ell)));
    }

    #[test]
    fn sqrt_brackets_the_root(x in positive_real(), ell in 1u32..12) {
        let r = sqrt_ell(&x, Accuracy::new(ell).unwrap(), R2).unwrap();
        let (rv, xv) = (form_value(&r, R2).re, form_value(&x, R2).re);
        let next = &rv + power(R2, -i64::from(ell));
        prop_assert!(&rv * &rv <= xv);
        prop_assert_eq!((&next * &next).cmp(&xv), Ordering::Greater);
    }
}
