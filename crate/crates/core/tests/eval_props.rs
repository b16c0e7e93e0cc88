mod common;

use proptest::prelude::*;

use common::gen;
use elevate_core::elaborate::elaborate_term;
use elevate_core::eval::{eval, is_value, step, Outcome, Step};
use elevate_core::syntax::{parse_term, Term};

fn core(src: &str) -> Term {
    elaborate_term(&parse_term(src).unwrap()).unwrap().term.erase_tags()
}

fn stuck(src: &str) -> bool {
    matches!(eval(&core(src), 100), Outcome::Stuck { .. })
}

#[test]
fn misuse_of_records_gets_stuck() {
    assert!(stuck("{}.A"));
    assert!(stuck("{A: {}}.B"));
    assert!(stuck("{A: {}}.-B"));
    assert!(stuck("{A: {}}.{B: {}}"));
    assert!(stuck("{A: {}}.+{A: {}}"));
    assert!(stuck("(A {}).A"));
}

#[test]
fn misuse_of_functions_and_matches_gets_stuck() {
    assert!(stuck("{} {}"));
    assert!(stuck("(A) B"));
    assert!(stuck("match {} with < A x => x | y => y >"));
    assert!(stuck("match A with < >"));
    assert!(stuck("match A with < {} => B >"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn values_do_not_step_and_steps_change_the_term(p in gen::program(30)) {
        let Ok(e) = elaborate_term(&p) else { return Ok(()) };
        let mut cur = e.term.erase_tags();
        for _ in 0..500 {
            match step(&cur) {
                Step::Value => {
                    prop_assert!(is_value(&cur));
                    break;
                }
                Step::Stuck(..) => {
                    prop_assert!(!is_value(&cur));
                    break;
                }
                Step::Stepped(next, _) => {
                    prop_assert!(!is_value(&cur));
                    prop_assert_eq!(step(&cur), Step::Stepped(next.clone(), step_rule(&cur)));
                    cur = next;
                }
            }
        }
    }

    #[test]
    fn fuel_only_truncates(p in gen::program(30), split in 0..50u64) {
        let Ok(e) = elaborate_term(&p) else { return Ok(()) };
        let t = e.term.erase_tags();
        let whole = eval(&t, 1_000);
        let resumed = match eval(&t, split) {
            Outcome::FuelExhausted(mid) => eval(&mid, 1_000 - split),
            done => done,
        };
        prop_assert_eq!(whole, resumed);
    }
}

fn step_rule(t: &Term) -> elevate_core::eval::Rule {
    match step(t) {
        Step::Stepped(_, r) => r,
        other => panic!("{other:?}"),
    }
}
