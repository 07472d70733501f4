use burnside::cosets::{element_order_finite, enumerate_cosets, realize};
use burnside::dihedral::{build_dihedral, direct_product, exponent, FiniteGroupTable};
use burnside::oracle::{element_order, OracleBudget};
use burnside::presentation::parse_presentation;
use burnside::rewrite::{knuth_bendix, rules_from_presentation, KbBudget};
use burnside::subgrp::{abelian_quotient, infinite_order_certificate, verify_certificate, Certificate};
use burnside::tower::{final_realization, run_tower, TowerConfig, TowerReport};
use burnside::Word;
use proptest::prelude::*;

fn w(s: &str) -> Word {
    s.parse().unwrap()
}

#[test]
fn tower_report_round_trips_through_json() {
    let report = run_tower(TowerConfig::new(2, 2), 1).unwrap();
    let text = report.to_json();
    let back = TowerReport::from_json(&text).unwrap();
    assert_eq!(back, report);
    assert_eq!(back.to_json(), text);
}

#[test]
fn tower_group_matches_its_presentation() {
    let report = run_tower(TowerConfig::new(2, 3), 1).unwrap();
    let r = final_realization(&report).unwrap();
    let p = parse_presentation("gens 2\nrel aaa\nrel bbb\nrel ababab\nrel aBaBaB\n").unwrap();
    assert!(r.is_quotient_of(&p));
    assert_eq!(r.order(), enumerate_cosets(&p, &[], 1000).index().unwrap());
}

#[test]
fn certificate_survives_serialization() {
    let p = parse_presentation("gens 2\nrel aaa\nrel bbb\nrel ababab\n").unwrap();
    let q = abelian_quotient(&p, 3, 100).unwrap();
    let cert = infinite_order_certificate(&p, &w("aB"), &q).unwrap();
    let back = Certificate::from_json(&cert.to_json()).unwrap();
    assert_eq!(back, cert);
    verify_certificate(&back).unwrap();
}

#[test]
fn oracle_agrees_with_realization_on_finite_group() {
    let p = parse_presentation("gens 2\nrel aaa\nrel bbb\nrel ababab\nrel aBaBaB\n").unwrap();
    let r = realize(&p, &enumerate_cosets(&p, &[], 1000)).unwrap();
    for word in ["a", "ab", "abAB", "aabb", "abaB"] {
        let verdict = element_order(&p, &w(word), 3, OracleBudget::default());
        assert_eq!(verdict.finite_order(), Some(element_order_finite(&r, &w(word))), "{word}");
    }
}

#[test]
fn csv_tables_round_trip() {
    let g = direct_product(&[build_dihedral(4), FiniteGroupTable::cyclic(3)]).unwrap();
    let back = FiniteGroupTable::from_csv(&g.to_csv()).unwrap();
    assert_eq!(back.order(), 24);
    assert_eq!(exponent(&back), 12);
    assert_eq!(back.to_csv(), g.to_csv());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rewriting_and_cosets_agree_on_equality(
        u in prop::collection::vec(0usize..4, 0..10),
        v in prop::collection::vec(0usize..4, 0..10),
    ) {
        let p = parse_presentation("gens 2\nrel aa\nrel bbb\nrel ababab\n").unwrap();
        let sys = knuth_bendix(&rules_from_presentation(&p), KbBudget::default());
        let t = enumerate_cosets(&p, &[], 1000);
        let (u, v) = (Word::from_codes(u), Word::from_codes(v));
        prop_assert_eq!(sys.reduce(&u) == sys.reduce(&v), t.trace(0, &u) == t.trace(0, &v));
    }
}
