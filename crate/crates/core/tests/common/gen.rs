//! Generators shared by the property suites: pattern/value pairs that follow one fixed
//! payload schema, and small closed programs built around introduction/elimination pairs.

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use elevate_core::syntax::{Branch, Label, Name, Pattern, Pos, Row, RowTail, Span, Term, TermKind, TypeExpr};

pub const TAGS: [&str; 5] = ["A", "B", "C", "D", "E"];
/// Nesting depth of generated values and patterns, counted in labels.
pub const MAX_DEPTH: usize = 4;

#[derive(Clone, Copy, Debug)]
enum Payload {
    Unit,
    Sub,
    Pair,
    Single,
}

fn payload(tag: usize, depth: usize) -> Payload {
    if depth + 1 >= MAX_DEPTH {
        return Payload::Unit;
    }
    match tag {
        0 | 1 => Payload::Unit,
        2 => Payload::Sub,
        3 => Payload::Pair,
        _ => Payload::Single,
    }
}

fn lab(s: &str) -> Label {
    Label::name(s)
}

fn sp() -> Span {
    Span::default()
}

pub fn value(depth: usize) -> BoxedStrategy<Term> {
    (0..TAGS.len())
        .prop_flat_map(move |i| {
            let inner: BoxedStrategy<Term> = match payload(i, depth) {
                Payload::Unit => Just(Term::unit()).boxed(),
                Payload::Sub => value(depth + 1),
                Payload::Pair => (value(depth + 1), value(depth + 1))
                    .prop_map(|(a, b)| Term::record(vec![(lab("F"), a), (lab("G"), b)]))
                    .boxed(),
                Payload::Single => value(depth + 1).prop_map(|a| Term::record(vec![(lab("F"), a)])).boxed(),
            };
            inner.prop_map(move |p| Term::label(lab(TAGS[i]), p))
        })
        .boxed()
}

/// Patterns over the same schema; variables are named `v` and numbered afterwards.
fn raw_pattern(depth: usize) -> BoxedStrategy<Pattern> {
    pattern_at(depth, 1)
}

fn pattern_at(depth: usize, var_weight: u32) -> BoxedStrategy<Pattern> {
    let var = prop_oneof![Just("v"), Just("_")].prop_map(|x| Pattern::Var(x.into(), sp()));
    let label = (0..TAGS.len()).prop_flat_map(move |i| {
        let var_inner = prop_oneof![Just("v"), Just("_")].prop_map(|x| Some(Pattern::Var(x.into(), sp())));
        let inner: BoxedStrategy<Option<Pattern>> = match payload(i, depth) {
            Payload::Unit => prop_oneof![
                2 => Just(None),
                1 => Just(Some(Pattern::Record(Vec::new(), sp()))),
                1 => var_inner,
            ]
            .boxed(),
            Payload::Sub => prop_oneof![3 => raw_pattern(depth + 1).prop_map(Some), 1 => var_inner].boxed(),
            Payload::Pair => prop_oneof![
                3 => (raw_pattern(depth + 1), raw_pattern(depth + 1), 0..4usize).prop_map(|(a, b, shape)| {
                    let fs = match shape {
                        0 => vec![(lab("F"), a), (lab("G"), b)],
                        1 => vec![(lab("G"), b), (lab("F"), a)],
                        2 => vec![(lab("F"), a)],
                        _ => vec![(lab("G"), b)],
                    };
                    Some(Pattern::Record(fs, sp()))
                }),
                1 => var_inner,
            ]
            .boxed(),
            Payload::Single => prop_oneof![
                3 => raw_pattern(depth + 1).prop_map(|a| Some(Pattern::Record(vec![(lab("F"), a)], sp()))),
                1 => var_inner,
            ]
            .boxed(),
        };
        inner.prop_map(move |p| Pattern::Label(lab(TAGS[i]), p.map(Box::new), sp()))
    });
    prop_oneof![var_weight => var, 4 => label].boxed()
}

fn number_vars(p: &Pattern, next: &mut usize) -> Pattern {
    match p {
        Pattern::Var(x, s) if x == "v" => {
            *next += 1;
            Pattern::Var(format!("x{next}"), *s)
        }
        Pattern::Var(..) | Pattern::Label(_, None, _) => p.clone(),
        Pattern::Label(l, Some(q), s) => Pattern::Label(l.clone(), Some(Box::new(number_vars(q, next))), *s),
        Pattern::Record(fs, s) => {
            Pattern::Record(fs.iter().map(|(l, q)| (l.clone(), number_vars(q, next))).collect(), *s)
        }
    }
}

/// A branch pattern; the head is always a label.
pub fn pattern() -> BoxedStrategy<Pattern> {
    pattern_at(0, 0).prop_map(|p| number_vars(&p, &mut 0)).boxed()
}

/// Reference semantics of one complex pattern.
pub fn matches(p: &Pattern, v: &Term, out: &mut Vec<(Name, Term)>) -> bool {
    match (p, &v.kind) {
        (Pattern::Var(x, _), _) => {
            if x != "_" {
                out.push((x.clone(), v.clone()));
            }
            true
        }
        (Pattern::Label(l, q, _), TermKind::Label(m, payload)) => {
            l == m
                && match q {
                    None => true,
                    Some(q) => matches(q, payload, out),
                }
        }
        (Pattern::Record(fs, _), TermKind::Record(vs)) => fs
            .iter()
            .all(|(l, q)| vs.iter().find(|(m, _)| m == l).is_some_and(|(_, w)| matches(q, w, out))),
        _ => false,
    }
}

/// `v` with record fields in label order; records are unordered.
pub fn canonical(v: &Term) -> Term {
    match &v.kind {
        TermKind::Record(fs) => {
            let mut fs: Vec<_> = fs.iter().map(|(l, w)| (l.clone(), canonical(w))).collect();
            fs.sort_by(|a, b| a.0.cmp(&b.0));
            Term::record(fs)
        }
        _ => v.map_children(&canonical),
    }
}

/// Index and bindings of the first branch that matches.
pub fn first_match(patterns: &[Pattern], v: &Term) -> Option<(usize, Vec<(Name, Term)>)> {
    patterns.iter().enumerate().find_map(|(i, p)| {
        let mut out = Vec::new();
        matches(p, v, &mut out).then_some((i, out))
    })
}

fn hit_label(i: usize) -> Label {
    Label::name(&format!("Hit{i}"))
}

fn var_field(x: &str) -> Label {
    Label::name(&x.to_uppercase())
}

/// `Hit<i> {X1: x1 | ...}`, reporting which branch ran and what it bound.
pub fn report(i: usize, p: &Pattern) -> Term {
    let mut vars = Vec::new();
    elevate_core::subst::pattern_vars(p, &mut vars);
    vars.retain(|x| x != "_");
    vars.sort();
    Term::label(
        hit_label(i),
        Term::record(vars.iter().map(|x| (var_field(x), Term::var(x))).collect()),
    )
}

/// What `report` evaluates to for the given bindings.
pub fn expected_report(i: usize, mut binds: Vec<(Name, Term)>) -> Term {
    binds.sort_by(|a, b| a.0.cmp(&b.0));
    Term::label(
        hit_label(i),
        Term::record(binds.into_iter().map(|(x, v)| (var_field(&x), v)).collect()),
    )
}

/// Span given to the pattern of branch `i`, so diagnostics can name it.
pub fn branch_span(i: usize) -> Span {
    let at = Pos {
        line: i as u32 + 1,
        col: 1,
    };
    Span::new(at, at)
}

fn with_span(p: &Pattern, s: Span) -> Pattern {
    match p {
        Pattern::Var(x, _) => Pattern::Var(x.clone(), s),
        Pattern::Label(l, q, _) => Pattern::Label(l.clone(), q.clone(), s),
        Pattern::Record(fs, _) => Pattern::Record(fs.clone(), s),
    }
}

pub fn match_term(subject: Term, patterns: &[Pattern]) -> Term {
    let branches = patterns
        .iter()
        .enumerate()
        .map(|(i, p)| Branch {
            pattern: with_span(p, branch_span(i)),
            body: report(i, p),
        })
        .collect();
    Term::synth(TermKind::Match(Box::new(subject), branches))
}

/// One match case: branch patterns plus values of the subject type.
pub fn match_case() -> BoxedStrategy<(Vec<Pattern>, Vec<Term>)> {
    let catch_all = prop_oneof![Just(None), Just(Some("x0")), Just(Some("_"))];
    (
        prop::collection::vec(pattern(), 1..=5),
        catch_all,
        prop::collection::vec(value(0), 1..=4),
    )
        .prop_map(|(mut ps, last, vs)| {
            ps.extend(last.map(|x| Pattern::Var(x.into(), sp())));
            (ps, vs)
        })
        .boxed()
}

// ---- programs ----

const HOLE_BINDER: &str = "";

fn lam(body: Term) -> Term {
    Term::lam(HOLE_BINDER, body)
}

fn hole(k: usize) -> Term {
    Term::var(&format!("?{k}"))
}

fn tag(i: usize, e: Term) -> Term {
    Term::label(lab(TAGS[i % 3]), e)
}

fn ext(e: Term, kind: fn(Box<Term>, Vec<(Label, Term)>) -> TermKind, l: &str, v: Term) -> Term {
    Term::synth(kind(Box::new(e), vec![(lab(l), v)]))
}

fn leaf() -> BoxedStrategy<Term> {
    prop_oneof![
        3 => (0..4usize).prop_map(hole),
        2 => Just(Term::unit()),
        2 => (0..3usize).prop_map(|i| tag(i, Term::unit())),
    ]
    .boxed()
}

/// `fix (lam f = lam n = match n with < S m => f m | Z => Z >)` applied to a numeral.
fn countdown(n: usize, base: Term) -> Term {
    let body = Term::synth(TermKind::Match(
        Box::new(Term::var("n")),
        vec![
            Branch {
                pattern: Pattern::Label(lab("S"), Some(Box::new(Pattern::Var("m".into(), sp()))), sp()),
                body: Term::app(Term::var("f"), Term::var("m")),
            },
            Branch {
                pattern: Pattern::Label(lab("Z"), None, sp()),
                body: base,
            },
        ],
    ));
    let mut arg = Term::tag("Z");
    for _ in 0..n {
        arg = Term::label(lab("S"), arg);
    }
    Term::app(
        Term::app(Term::synth(TermKind::Fix), Term::lam("f", Term::lam("n", body))),
        arg,
    )
}

fn simple_match(subject: Term, i: usize, hit: Term, rest: Option<Term>, bare: bool) -> Term {
    let pat = if bare {
        Pattern::Label(lab(TAGS[i % 3]), None, sp())
    } else {
        Pattern::Label(
            lab(TAGS[i % 3]),
            Some(Box::new(Pattern::Var(HOLE_BINDER.into(), sp()))),
            sp(),
        )
    };
    let mut bs = vec![Branch {
        pattern: pat,
        body: hit,
    }];
    if let Some(r) = rest {
        bs.push(Branch {
            pattern: Pattern::Var(HOLE_BINDER.into(), sp()),
            body: r,
        });
    }
    Term::synth(TermKind::Match(Box::new(subject), bs))
}

fn raw_program() -> BoxedStrategy<Term> {
    leaf()
        .prop_recursive(5, 30, 3, |inner| {
            let e = || inner.clone();
            prop_oneof![
                2 => e().prop_map(lam),
                2 => (e(), e()).prop_map(|(f, a)| Term::app(f, a)),
                3 => (e(), e()).prop_map(|(b, a)| Term::app(lam(b), a)),
                2 => (e(), e()).prop_map(|(a, b)| Term::let_in(HOLE_BINDER, a, b)),
                1 => (0..3usize, e()).prop_map(|(i, a)| tag(i, a)),
                1 => (e(), e()).prop_map(|(a, b)| Term::record(vec![(lab("F"), a), (lab("G"), b)])),
                2 => (e(), e(), any::<bool>()).prop_map(|(a, b, f)| Term::synth(TermKind::Access(
                    Box::new(Term::record(vec![(lab("F"), a), (lab("G"), b)])),
                    lab(if f { "F" } else { "G" }),
                ))),
                1 => (e(), e()).prop_map(|(a, b)| Term::synth(TermKind::Access(
                    Box::new(Term::synth(TermKind::Remove(
                        Box::new(Term::record(vec![(lab("F"), a), (lab("G"), b)])),
                        lab("F"),
                    ))),
                    lab("G"),
                ))),
                1 => (e(), e(), e()).prop_map(|(a, b, c)| Term::synth(TermKind::Access(
                    Box::new(ext(Term::record(vec![(lab("F"), a), (lab("G"), b)]), TermKind::Modify, "F", c)),
                    lab("F"),
                ))),
                1 => (e(), e()).prop_map(|(a, b)| ext(Term::record(vec![(lab("F"), a)]), TermKind::Extend, "H", b)),
                3 => (0..3usize, 0..3usize, e(), e(), e(), any::<bool>()).prop_map(|(i, j, p, h, r, lit)| {
                    let subject = tag(i, p);
                    if lit {
                        simple_match(subject, j, h, Some(r), false)
                    } else {
                        Term::app(lam(simple_match(hole(0), j, h, Some(r), false)), subject)
                    }
                }),
                1 => (0..3usize, e(), e()).prop_map(|(i, h, r)| {
                    Term::app(lam(simple_match(hole(0), i, h, Some(r), true)), tag(i, Term::unit()))
                }),
                1 => e().prop_map(|b| Term::synth(TermKind::Match(
                    Box::new(Term::unit()),
                    vec![Branch { pattern: Pattern::Record(Vec::new(), sp()), body: b }],
                ))),
                1 => (0..4usize, e()).prop_map(|(n, b)| countdown(n, b)),
            ]
        })
        .boxed()
}

/// Gives binders names and points every hole at a variable in scope (or `{}` if none).
fn resolve(t: &Term, scope: &mut Vec<Name>, next: &mut usize) -> Term {
    let bind = |x: &str, scope: &mut Vec<Name>, next: &mut usize| -> Name {
        if x.is_empty() {
            *next += 1;
            let n = format!("v{next}");
            scope.push(n.clone());
            n
        } else {
            scope.push(x.to_string());
            x.to_string()
        }
    };
    match &t.kind {
        TermKind::Var(x) if x.starts_with('?') => {
            let k: usize = x[1..].parse().unwrap();
            if scope.is_empty() {
                Term::unit()
            } else {
                Term::var(&scope[scope.len() - 1 - k % scope.len()])
            }
        }
        TermKind::Lam(x, b) => {
            let n = bind(x, scope, next);
            let b = resolve(b, scope, next);
            scope.pop();
            Term::lam(&n, b)
        }
        TermKind::Let(x, a, b) => {
            let a = resolve(a, scope, next);
            let n = bind(x, scope, next);
            let b = resolve(b, scope, next);
            scope.pop();
            Term::let_in(&n, a, b)
        }
        TermKind::Match(s, bs) => {
            let s = resolve(s, scope, next);
            let bs = bs
                .iter()
                .map(|b| {
                    let (pattern, bound) = match &b.pattern {
                        Pattern::Var(x, sp) => {
                            let n = bind(x, scope, next);
                            (Pattern::Var(n, *sp), 1)
                        }
                        Pattern::Label(l, Some(q), sp) => match &**q {
                            Pattern::Var(x, sq) => {
                                let n = bind(x, scope, next);
                                (Pattern::Label(l.clone(), Some(Box::new(Pattern::Var(n, *sq))), *sp), 1)
                            }
                            _ => (b.pattern.clone(), 0),
                        },
                        _ => (b.pattern.clone(), 0),
                    };
                    let body = resolve(&b.body, scope, next);
                    for _ in 0..bound {
                        scope.pop();
                    }
                    Branch { pattern, body }
                })
                .collect();
            Term::synth(TermKind::Match(Box::new(s), bs))
        }
        _ => t
            .try_map_children::<()>(&mut |c| Ok(resolve(c, scope, next)))
            .expect("infallible"),
    }
}

/// Closed surface programs of at most `max_size` nodes; most are well typed.
pub fn program(max_size: usize) -> BoxedStrategy<Term> {
    raw_program()
        .prop_map(|t| resolve(&t, &mut Vec::new(), &mut 0))
        .prop_filter("too large", move |t| t.size() <= max_size)
        .boxed()
}

/// Draws `n` samples from `s` with a fixed seed.
pub fn sample<T: std::fmt::Debug>(s: &BoxedStrategy<T>, n: usize, seed: u64) -> Vec<T> {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &bytes);
    let mut runner = TestRunner::new_with_rng(Config::default(), rng);
    (0..n)
        .map(|_| s.new_tree(&mut runner).expect("generator gave up").current())
        .collect()
}

// ---- types ----

fn row(field: BoxedStrategy<TypeExpr>) -> BoxedStrategy<Row> {
    let tail = prop_oneof![
        Just(RowTail::Empty),
        Just(RowTail::Fresh),
        Just(RowTail::Var("r".into())),
        Just(RowTail::Var("s".into())),
    ];
    (
        prop::sample::subsequence(vec!["A", "B", "C"], 0..=3),
        prop::collection::vec(field, 3),
        tail,
    )
        .prop_map(|(labels, fields, tail)| {
            // an implicit tail needs a field before its `|`
            let tail = if labels.is_empty() && tail == RowTail::Fresh {
                RowTail::Empty
            } else {
                tail
            };
            Row {
                fields: labels.into_iter().zip(fields).map(|(l, t)| (lab(l), t)).collect(),
                tail,
            }
        })
        .boxed()
}

/// Small types over type variables `a`, `b` and row variables `r`, `s`.
pub fn type_expr() -> BoxedStrategy<TypeExpr> {
    prop_oneof![Just(TypeExpr::var("a")), Just(TypeExpr::var("b"))]
        .prop_recursive(3, 16, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| TypeExpr::arrow(a, b)),
                row(inner.clone()).prop_map(TypeExpr::Record),
                row(inner).prop_map(TypeExpr::Variant),
            ]
        })
        .boxed()
}
