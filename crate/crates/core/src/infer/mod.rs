//! Type inference over elaborated terms, with dead-branch removal.

pub mod scheme;
pub mod store;

use std::collections::{BTreeMap, HashMap};

pub use scheme::{annot_scheme, instance_of, scheme_equal_alpha, Aliases, Resolved};
pub use store::{Namer, Node, Store, Ty, UnifyError, GENERIC};

use crate::elaborate::RhsInfo;
use crate::kinds::{admits, KindError};
use crate::syntax::{
    type_to_string, Kind, Label, LabelSet, Name, RhsId, RowKind, Scheme, Span, Term, TermKind, TypeAnnot,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeErrorKind {
    Mismatch {
        expected: String,
        found: String,
    },
    MissingLabel {
        label: Label,
        row: String,
    },
    KindViolation {
        expected: String,
        found: String,
    },
    RecursiveRow(String),
    Unbound(Name),
    Kind(KindError),
    /// The annotation claims more polymorphism than the definition has.
    TooGeneral(String),
    Redundant,
    Internal(String),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{}", self.message())]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub span: Span,
}

impl TypeError {
    pub fn code(&self) -> &'static str {
        match &self.kind {
            TypeErrorKind::Mismatch { .. }
            | TypeErrorKind::MissingLabel { .. }
            | TypeErrorKind::RecursiveRow(_)
            | TypeErrorKind::TooGeneral(_)
            | TypeErrorKind::Internal(_) => "E-UNIFY",
            TypeErrorKind::KindViolation { .. } | TypeErrorKind::Kind(_) => "E-KIND",
            TypeErrorKind::Unbound(_) => "E-UNBOUND",
            TypeErrorKind::Redundant => "E-REDUNDANT",
        }
    }

    pub fn message(&self) -> String {
        match &self.kind {
            TypeErrorKind::Mismatch { expected, found } => format!("expected `{expected}`, found `{found}`"),
            TypeErrorKind::MissingLabel { label, row } => format!("label `{label}` cannot occur in `{row}`"),
            TypeErrorKind::KindViolation { expected, found } => {
                format!("row of kind {found} does not fit kind {expected}")
            }
            TypeErrorKind::RecursiveRow(r) => format!("row `{r}` would contain itself"),
            TypeErrorKind::Unbound(x) => format!("unbound variable `{x}`"),
            TypeErrorKind::Kind(k) => k.to_string(),
            TypeErrorKind::TooGeneral(m) => m.clone(),
            TypeErrorKind::Redundant => "pattern can never match: every copy of its branch is dead".into(),
            TypeErrorKind::Internal(m) => m.clone(),
        }
    }
}

/// A branch copy removed because its label cannot occur.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeadBranch {
    pub span: Span,
    pub label: Label,
}

struct Binding {
    name: Name,
    ty: Ty,
    poly: bool,
}

/// One inference session. Schemes of earlier declarations stay in the environment.
pub struct Infer {
    pub store: Store,
    env: Vec<Binding>,
    pub aliases: Aliases,
    pub ledger: BTreeMap<RhsId, RhsInfo>,
    pub dead: Vec<DeadBranch>,
}

impl Default for Infer {
    fn default() -> Self {
        Infer::new()
    }
}

impl Infer {
    pub fn new() -> Infer {
        Infer {
            store: Store::new(),
            env: Vec::new(),
            aliases: Aliases::new(),
            ledger: BTreeMap::new(),
            dead: Vec::new(),
        }
    }

    /// Binds `name` to a closed type in the environment.
    pub fn bind_global(&mut self, name: &str, ty: Ty) {
        self.env.push(Binding {
            name: name.to_string(),
            ty,
            poly: true,
        });
    }

    /// `name : ∀a. a`, used after a failed declaration.
    pub fn bind_any(&mut self, name: &str) {
        let t = self.store.fresh_at(Kind::Type, GENERIC);
        self.bind_global(name, t);
    }

    /// Infers and generalizes a top-level definition, optionally against an annotation.
    pub fn declaration(&mut self, body: &Term, annot: Option<&TypeAnnot>) -> Result<Ty, TypeError> {
        let base = self.store.level;
        self.store.level = base + 1;
        let r = self.declaration_inner(body, annot);
        self.store.level = base;
        let t = r?;
        self.store.generalize(t);
        Ok(t)
    }

    fn declaration_inner(&mut self, body: &Term, annot: Option<&TypeAnnot>) -> Result<Ty, TypeError> {
        let Some(a) = annot else {
            return self.infer(body);
        };
        let resolved = self.aliases.resolve(a).map_err(|k| TypeError {
            kind: TypeErrorKind::Kind(k),
            span: a.span,
        })?;
        let mut vars = HashMap::new();
        let before = self.store.len();
        let t = self.store.import(&resolved.ty, &mut vars, &resolved.kinds, false);
        let declared: Vec<(Ty, Kind)> = (before..self.store.len())
            .filter_map(|v| match self.store.node(v) {
                Node::Var { kind, .. } if self.store.find(v) == v => Some((v, kind)),
                _ => None,
            })
            .collect();
        self.check(body, t)?;
        // the definition must be at least as polymorphic as the annotation
        let mut seen = HashMap::new();
        for (v, kind) in declared {
            let r = self.store.find(v);
            let ok = match self.store.node(r) {
                Node::Var { kind: k2, .. } => k2 == kind && seen.insert(r, v).is_none(),
                _ => false,
            };
            if !ok {
                let shown = self.show(t);
                return Err(TypeError {
                    kind: TypeErrorKind::TooGeneral(format!(
                        "the annotation is more general than the definition, which only has `{shown}`"
                    )),
                    span: a.span,
                });
            }
        }
        Ok(t)
    }

    pub fn show(&mut self, t: Ty) -> String {
        let mut n = Namer::default();
        let e = self.store.export(t, &mut n);
        type_to_string(&e)
    }

    fn unify_at(&mut self, expected: Ty, found: Ty, span: Span) -> Result<(), TypeError> {
        self.store.unify(expected, found).map_err(|e| {
            let mut n = Namer::default();
            let kind = match e {
                UnifyError::Mismatch(..) => {
                    let a = self.store.export(expected, &mut n);
                    let b = self.store.export(found, &mut n);
                    TypeErrorKind::Mismatch {
                        expected: type_to_string(&a),
                        found: type_to_string(&b),
                    }
                }
                UnifyError::MissingLabel(label, row) => {
                    let r = self.store.export(row, &mut n);
                    TypeErrorKind::MissingLabel {
                        label,
                        row: row_text(&r),
                    }
                }
                UnifyError::Kind { found, expected } => TypeErrorKind::KindViolation {
                    expected: expected.to_string(),
                    found: found.to_string(),
                },
                UnifyError::RecursiveRow(r) => {
                    let r = self.store.export(r, &mut n);
                    TypeErrorKind::RecursiveRow(type_to_string(&r))
                }
            };
            TypeError { kind, span }
        })
    }

    fn push(&mut self, name: &str, ty: Ty, poly: bool) {
        self.env.push(Binding {
            name: name.to_string(),
            ty,
            poly,
        });
    }

    fn pop(&mut self) {
        self.env.pop();
    }

    fn lookup(&mut self, x: &str) -> Option<Ty> {
        let b = self.env.iter().rev().find(|b| b.name == x)?;
        let (ty, poly) = (b.ty, b.poly);
        Some(if poly { self.store.instantiate(ty) } else { ty })
    }

    /// Checks `t` against `expected`, pushing arrow types into lambdas.
    pub fn check(&mut self, t: &Term, expected: Ty) -> Result<(), TypeError> {
        match &t.kind {
            TermKind::Lam(x, body) => {
                if let Node::Arrow(a, b) = self.store.node(expected) {
                    self.push(x, a, false);
                    let r = self.check(body, b);
                    self.pop();
                    return r;
                }
            }
            TermKind::Tagged(_, e) => return self.check(e, expected),
            TermKind::Let(x, e1, e2) => {
                let t1 = self.infer_poly(e1)?;
                self.push(x, t1, true);
                let r = self.check(e2, expected);
                self.pop();
                return r;
            }
            _ => {}
        }
        let found = self.infer(t)?;
        self.unify_at(expected, found, t.span)
    }

    /// Infers `t` one level deeper and quantifies what did not escape.
    fn infer_poly(&mut self, t: &Term) -> Result<Ty, TypeError> {
        self.store.level += 1;
        let r = self.infer(t);
        self.store.level -= 1;
        let t = r?;
        self.store.generalize(t);
        Ok(t)
    }

    pub fn infer(&mut self, t: &Term) -> Result<Ty, TypeError> {
        let span = t.span;
        match &t.kind {
            TermKind::Var(x) => self.lookup(x).ok_or_else(|| TypeError {
                kind: TypeErrorKind::Unbound(x.clone()),
                span,
            }),
            TermKind::App(f, a) => {
                let tf = self.infer(f)?;
                let ta = self.infer(a)?;
                let res = self.store.fresh(Kind::Type);
                if let Node::Arrow(dom, cod) = self.store.node(tf) {
                    self.unify_at(dom, ta, a.span)?;
                    self.unify_at(cod, res, span)?;
                } else {
                    let want = self.store.arrow(ta, res);
                    self.unify_at(want, tf, f.span)?;
                }
                Ok(res)
            }
            TermKind::Lam(x, body) => {
                let tx = self.store.fresh(Kind::Type);
                self.push(x, tx, false);
                let r = self.infer(body);
                self.pop();
                let tb = r?;
                Ok(self.store.arrow(tx, tb))
            }
            TermKind::Let(x, e1, e2) => {
                let t1 = self.infer_poly(e1)?;
                self.push(x, t1, true);
                let r = self.infer(e2);
                self.pop();
                r
            }
            TermKind::Fix => {
                let a = self.store.fresh(Kind::Type);
                let b = self.store.fresh(Kind::Type);
                let ab = self.store.arrow(a, b);
                let f = self.store.arrow(ab, ab);
                Ok(self.store.arrow(f, ab))
            }
            TermKind::Label(l, e) => {
                let te = self.infer(e)?;
                let rest = self.store.fresh_row(RowKind::Neg(LabelSet::from([l.clone()])));
                let row = self.store.ext(l.clone(), te, rest);
                Ok(self.store.variant(row))
            }
            TermKind::Record(fs) => {
                let mut fields = Vec::with_capacity(fs.len());
                for (l, e) in fs {
                    fields.push((l.clone(), self.infer(e)?));
                }
                let empty = self.store.empty();
                let row = self.store.row(fields, empty);
                Ok(self.store.record(row))
            }
            TermKind::Access(e, l) | TermKind::Remove(e, l) => {
                let te = self.infer(e)?;
                let p = self.store.fresh(Kind::Type);
                let rest = self.store.fresh_row(RowKind::Neg(LabelSet::from([l.clone()])));
                let row = self.store.ext(l.clone(), p, rest);
                let want = self.store.record(row);
                self.unify_at(want, te, e.span)?;
                Ok(match &t.kind {
                    TermKind::Access(..) => p,
                    _ => self.store.record(rest),
                })
            }
            TermKind::Modify(e, fs) => {
                let te = self.infer(e)?;
                let labels: LabelSet = fs.iter().map(|(l, _)| l.clone()).collect();
                let mut fields = Vec::with_capacity(fs.len());
                for (l, x) in fs {
                    fields.push((l.clone(), self.infer(x)?));
                }
                let rest = self.store.fresh_row(RowKind::Neg(labels));
                let row = self.store.row(fields, rest);
                let want = self.store.record(row);
                self.unify_at(want, te, e.span)?;
                Ok(te)
            }
            TermKind::Extend(e, fs) => {
                let te = self.infer(e)?;
                let labels: LabelSet = fs.iter().map(|(l, _)| l.clone()).collect();
                let rest = self.store.fresh_row(RowKind::Neg(labels));
                let want = self.store.record(rest);
                self.unify_at(want, te, e.span)?;
                let mut fields = Vec::with_capacity(fs.len());
                for (l, x) in fs {
                    fields.push((l.clone(), self.infer(x)?));
                }
                let row = self.store.row(fields, rest);
                Ok(self.store.record(row))
            }
            TermKind::Void(e) => {
                let te = self.infer(e)?;
                let empty = self.store.empty();
                let want = self.store.variant(empty);
                self.unify_at(want, te, e.span)?;
                Ok(self.store.fresh(Kind::Type))
            }
            TermKind::Unit(e, body) => {
                let te = self.infer(e)?;
                let empty = self.store.empty();
                let want = self.store.record(empty);
                self.unify_at(want, te, e.span)?;
                self.infer(body)
            }
            TermKind::Case {
                subject,
                label,
                bind,
                hit,
                rest_var,
                rest,
            } => self.case(span, subject, label, bind, hit, rest_var, rest),
            TermKind::Tagged(_, e) => self.infer(e),
            TermKind::Match(..) => Err(TypeError {
                kind: TypeErrorKind::Internal("match must be elaborated before inference".into()),
                span,
            }),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn case(
        &mut self,
        span: Span,
        subject: &Term,
        label: &Label,
        bind: &str,
        hit: &Term,
        rest_var: &str,
        rest: &Term,
    ) -> Result<Ty, TypeError> {
        let level = self.store.level;
        self.store.level += 1;
        let r = self.infer(subject);
        self.store.level -= 1;
        let ts = r?;

        // `Some((payload, remainder row))` when the branch can be taken
        let live = match self.store.node(ts) {
            Node::Var { kind: Kind::Type, .. } => {
                let p = self.store.fresh_at(Kind::Type, level + 1);
                let rho = self
                    .store
                    .fresh_at(Kind::Row(RowKind::Neg(LabelSet::from([label.clone()]))), level + 1);
                let row = self.store.ext(label.clone(), p, rho);
                let v = self.store.variant(row);
                self.unify_at(v, ts, subject.span)?;
                Some((p, rho))
            }
            Node::Variant(row) => {
                let (fields, tail) = self.store.row_parts(row);
                let open = if fields.iter().any(|(l, _)| l == label) {
                    true
                } else {
                    match self.store.node(tail) {
                        Node::Var {
                            kind: Kind::Row(k),
                            level: lv,
                        } => {
                            if !admits(&k, label) {
                                false
                            } else {
                                // a tail not reachable from the environment only exists for
                                // compatibility and stands for the empty row
                                lv <= level
                            }
                        }
                        _ => false,
                    }
                };
                if open {
                    let parts = self.store.rewrite(row, label).map_err(|_| TypeError {
                        kind: TypeErrorKind::Internal("label lookup failed".into()),
                        span,
                    })?;
                    Some(parts)
                } else {
                    None
                }
            }
            _ => {
                let p = self.store.fresh(Kind::Type);
                let rho = self.store.fresh_row(RowKind::Neg(LabelSet::from([label.clone()])));
                let row = self.store.ext(label.clone(), p, rho);
                let v = self.store.variant(row);
                return Err(self.unify_at(v, ts, subject.span).expect_err("non-variant subject"));
            }
        };

        let Some((payload, remainder)) = live else {
            self.remove(hit, label, span)?;
            self.store.generalize(ts);
            self.push(rest_var, ts, true);
            let r = self.infer(rest);
            self.pop();
            return r;
        };

        // a remainder tail that did not escape is quantified: `∀ρ. <ρ>` has no values,
        // and any later match on it finds its labels dead
        let rem = self.store.variant(remainder);
        self.store.generalize(payload);
        self.store.generalize(rem);

        self.push(bind, payload, true);
        let th = self.infer(hit);
        self.pop();
        let th = th?;
        self.push(rest_var, rem, true);
        let tr = self.infer(rest);
        self.pop();
        let tr = tr?;
        self.unify_at(th, tr, rest.span)?;
        Ok(th)
    }

    /// Drops a dead branch, counting down the copies of every right-hand side inside it.
    fn remove(&mut self, hit: &Term, label: &Label, span: Span) -> Result<(), TypeError> {
        let mut counts = BTreeMap::new();
        crate::elaborate::chain::tag_counts(hit, &mut counts);
        let mut first = None;
        for (id, n) in counts {
            if let Some(info) = self.ledger.get_mut(&id) {
                info.count -= n;
                first.get_or_insert(info.span);
                if info.count <= 0 {
                    return Err(TypeError {
                        kind: TypeErrorKind::Redundant,
                        span: info.span,
                    });
                }
            }
        }
        self.dead.push(DeadBranch {
            span: first.unwrap_or(span),
            label: label.clone(),
        });
        Ok(())
    }
}

fn row_text(t: &crate::syntax::TypeExpr) -> String {
    match t {
        crate::syntax::TypeExpr::Record(r) => {
            let s = type_to_string(&crate::syntax::TypeExpr::Variant(r.clone()));
            s.trim_start_matches('<').trim_end_matches('>').trim().to_string()
        }
        _ => type_to_string(t),
    }
}

/// Infers a closed term from scratch, returning its generalized scheme.
pub fn infer_closed(t: &Term) -> Result<Scheme, TypeError> {
    let mut inf = Infer::new();
    let ty = inf.declaration(t, None)?;
    Ok(inf.store.export_scheme(ty))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elaborate::elaborate_term;
    use crate::syntax::{parse_term, parse_type, scheme_to_string};

    fn infer_src(src: &str) -> Result<Scheme, TypeError> {
        let e = elaborate_term(&parse_term(src).unwrap()).unwrap();
        let mut inf = Infer::new();
        inf.ledger = e.rhs;
        let t = inf.declaration(&e.term, None)?;
        Ok(inf.store.export_scheme(t))
    }

    fn expect(src: &str, ty: &str) {
        let got = infer_src(src).unwrap_or_else(|e| panic!("{src}: {e}"));
        let want = annot_scheme(&Aliases::new(), &parse_type(ty).unwrap()).unwrap();
        assert!(
            scheme_equal_alpha(&got, &want),
            "{src}\n got: {}\nwant: {}",
            scheme_to_string(&got),
            scheme_to_string(&want)
        );
    }

    #[test]
    fn identity_strategy() {
        expect("lam expr = Success expr", "p -> <Success: p | >");
    }

    #[test]
    fn failure_constant() {
        expect("Failure", "<Failure: {*} | >");
    }

    #[test]
    fn records() {
        expect("lam r = r.A", "{A: p | } -> p");
        expect("lam r = r.-A", "{A: p | r} -> {r}");
        expect("lam r = r.+{B: {}}", "{r: ~{B}} -> {B: {*} | r}");
        expect("{A: {} | B: {}}", "{A: {*} | B: {*} | *}");
    }

    #[test]
    fn let_generalizes() {
        expect(
            "let f = lam x = x in {A: f {} | B: f (C {})}",
            "{A: {*} | B: <C: {*} | > | *}",
        );
    }

    #[test]
    fn match_closes_variant() {
        expect(
            "lam x = match x with < A => B | C y => y >",
            "<A: {*} | C: <B: {*} | r> | *> -> <B: {*} | r>",
        );
    }

    #[test]
    fn self_application_is_recursive() {
        let s = infer_src("lam x = x x").unwrap();
        assert!(scheme_to_string(&s).contains(" as "), "{}", scheme_to_string(&s));
    }

    #[test]
    fn unbound_variable() {
        assert_eq!(infer_src("y").unwrap_err().code(), "E-UNBOUND");
    }

    #[test]
    fn label_missing_from_closed_row() {
        let e = infer_src("(lam x = match x with < A => {} >) B").unwrap_err();
        assert_eq!(e.code(), "E-UNIFY");
    }

    #[test]
    fn true_against_false_is_redundant() {
        let e = infer_src("match True with < False => A | y => B >").unwrap_err();
        assert_eq!(e.kind, TypeErrorKind::Redundant);
    }

    #[test]
    fn repeated_label_is_redundant() {
        let e = infer_src("lam x = match x with < A => B | y => match y with < A => C | z => z > >").unwrap_err();
        assert_eq!(e.kind, TypeErrorKind::Redundant);
    }

    #[test]
    fn remainder_of_constant_is_empty() {
        expect("match True with < True => A | y => match y with < > >", "<A: {*} | r>");
        expect("match True with < True => A | y => y >", "<A: {*} | r: ~{A, True}>");
    }
}
