mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use common::gen;
use elevate_core::elaborate::{chain::tag_counts, elaborate_term, ElabError};
use elevate_core::eval::{eval, Outcome};
use elevate_core::subst::pattern_vars;
use elevate_core::syntax::{Name, Term, TermKind};

fn binders(t: &Term, out: &mut BTreeSet<Name>) {
    match &t.kind {
        TermKind::Lam(x, _) | TermKind::Let(x, _, _) => {
            out.insert(x.clone());
        }
        TermKind::Case { bind, rest_var, .. } => {
            out.insert(bind.clone());
            out.insert(rest_var.clone());
        }
        _ => {}
    }
    t.for_each_child(&mut |c| binders(c, out));
}

fn only_simple_matches(t: &Term) -> bool {
    let mut ok = !matches!(t.kind, TermKind::Match(..));
    t.for_each_child(&mut |c| ok &= only_simple_matches(c));
    ok
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn elaboration_agrees_with_reference_matcher((patterns, values) in gen::match_case()) {
        for v in values {
            let t = gen::match_term(v.clone(), &patterns);
            let want = gen::first_match(&patterns, &v);
            match elaborate_term(&t) {
                Ok(e) => {
                    let got = eval(&e.term.erase_tags(), 10_000);
                    match (want, got) {
                        (Some((i, binds)), Outcome::Value(r)) => {
                            prop_assert_eq!(gen::canonical(&r), gen::canonical(&gen::expected_report(i, binds)));
                        }
                        (None, Outcome::Stuck { .. }) => {}
                        (w, g) => prop_assert!(false, "reference {:?}, evaluation {:?}", w, g),
                    }
                }
                Err(ElabError::Redundant { branches }) => {
                    // a branch reported redundant must never be the first match
                    if let Some((i, _)) = want {
                        prop_assert!(!branches.contains(&gen::branch_span(i)));
                    }
                }
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }
    }

    #[test]
    fn output_has_only_simple_patterns_and_reserved_fresh_names((patterns, values) in gen::match_case()) {
        let t = gen::match_term(values[0].clone(), &patterns);
        if let Ok(e) = elaborate_term(&t) {
            prop_assert!(only_simple_matches(&e.term));
            let mut user = BTreeSet::new();
            for p in &patterns {
                let mut vs = Vec::new();
                pattern_vars(p, &mut vs);
                user.extend(vs);
            }
            let mut bound = BTreeSet::new();
            binders(&e.term, &mut bound);
            for b in bound {
                prop_assert!(b.starts_with('#') || user.contains(&b), "binder {b} escapes the reserved namespace");
            }
        }
    }

    #[test]
    fn ledger_counts_match_copies((patterns, values) in gen::match_case()) {
        let t = gen::match_term(values[0].clone(), &patterns);
        if let Ok(e) = elaborate_term(&t) {
            let mut counts = BTreeMap::new();
            tag_counts(&e.term, &mut counts);
            for (id, info) in &e.rhs {
                prop_assert_eq!(counts.get(id).copied().unwrap_or(0), info.count);
            }
        }
    }
}
