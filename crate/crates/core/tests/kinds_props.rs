use std::collections::BTreeSet;

use proptest::prelude::*;

use elevate_core::kinds::{admits, denote, extend, intersect, subset};
use elevate_core::syntax::{Label, LabelSet, RowKind};

const LABELS: [&str; 4] = ["A", "B", "C", "D"];

/// Every positive and negative kind over four labels.
fn all_kinds() -> Vec<RowKind> {
    let mut out = Vec::new();
    for mask in 0..16u32 {
        let set: LabelSet = (0..4)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| Label::name(LABELS[i]))
            .collect();
        out.push(RowKind::Pos(set.clone()));
        out.push(RowKind::Neg(set));
    }
    out
}

/// The four labels plus one the kinds never mention, standing for the rest.
fn universe() -> LabelSet {
    LABELS.iter().chain(["Other"].iter()).map(|l| Label::name(l)).collect()
}

#[test]
fn subset_is_a_preorder() {
    let ks = all_kinds();
    for a in &ks {
        assert!(subset(a, a), "{a}");
        for b in &ks {
            for c in &ks {
                if subset(a, b) && subset(b, c) {
                    assert!(subset(a, c), "{a} {b} {c}");
                }
            }
        }
    }
}

#[test]
fn kinds_mean_label_sets() {
    let u = universe();
    let ks = all_kinds();
    for a in &ks {
        let da = denote(a, &u);
        for l in &u {
            assert_eq!(admits(a, l), da.contains(l), "{a} {l}");
            match extend(a, l) {
                Ok(e) => {
                    assert!(!da.contains(l));
                    let mut want = da.clone();
                    want.insert(l.clone());
                    assert_eq!(denote(&e, &u), want, "{a} + {l}");
                }
                Err(_) => assert!(da.contains(l), "{a} + {l} should be defined"),
            }
        }
        for b in &ks {
            let db = denote(b, &u);
            assert_eq!(subset(a, b), da.is_subset(&db), "{a} <= {b}");
            let both: BTreeSet<_> = da.intersection(&db).cloned().collect();
            assert_eq!(denote(&intersect(a, b), &u), both, "{a} & {b}");
        }
    }
}

#[test]
fn extension_is_monotone() {
    let ks = all_kinds();
    for a in &ks {
        for b in &ks {
            if !subset(a, b) {
                continue;
            }
            for l in LABELS.iter().map(|l| Label::name(l)) {
                if let (Ok(x), Ok(y)) = (extend(a, &l), extend(b, &l)) {
                    assert!(subset(&x, &y), "{a} <= {b} but {x} !<= {y}");
                }
            }
        }
    }
}

fn kind() -> impl Strategy<Value = RowKind> {
    let set = prop::collection::btree_set((0..8u8).prop_map(|i| Label::name(&format!("L{i}"))), 0..6);
    (any::<bool>(), set).prop_map(|(pos, s)| if pos { RowKind::Pos(s) } else { RowKind::Neg(s) })
}

proptest! {
    #[test]
    fn intersection_is_the_greatest_lower_bound(a in kind(), b in kind(), c in kind()) {
        let m = intersect(&a, &b);
        prop_assert!(subset(&m, &a) && subset(&m, &b));
        if subset(&c, &a) && subset(&c, &b) {
            prop_assert!(subset(&c, &m));
        }
    }

    #[test]
    fn extension_adds_exactly_one_label(a in kind(), i in 0..8u8) {
        let l = Label::name(&format!("L{i}"));
        match extend(&a, &l) {
            Ok(e) => {
                prop_assert!(admits(&e, &l) && !admits(&a, &l));
                prop_assert!(subset(&a, &e));
            }
            Err(_) => prop_assert!(admits(&a, &l)),
        }
    }
}
