//! Match chains: expansion, ordering, merging, refinement and desugaring.

use std::collections::BTreeMap;
use std::fmt;

use crate::subst::subst;
use crate::syntax::{Label, Name, Pattern, RhsId, Span, Term, TermKind};

/// Position of a node inside the complex pattern it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchId(pub Vec<u32>);

impl MatchId {
    fn child(&self, n: u32) -> MatchId {
        let mut v = self.0.clone();
        v.push(n);
        MatchId(v)
    }

    fn bump_last(&self) -> MatchId {
        let mut v = self.0.clone();
        if let Some(last) = v.last_mut() {
            *last += 1;
        }
        MatchId(v)
    }
}

/// Field access form: `x`, `x.l`, `x.{}` or `x.l.{}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Access {
    pub root: Name,
    pub field: Option<Label>,
    pub unit: bool,
}

impl Access {
    pub fn var(x: &str) -> Access {
        Access {
            root: x.to_string(),
            field: None,
            unit: false,
        }
    }

    fn is_var(&self, x: &str) -> bool {
        self.root == x && self.field.is_none() && !self.unit
    }

    fn dot(&self, l: &Label) -> Access {
        Access {
            root: self.root.clone(),
            field: Some(l.clone()),
            unit: false,
        }
    }

    fn unit(&self) -> Access {
        Access {
            unit: true,
            ..self.clone()
        }
    }

    pub fn to_term(&self, span: Span) -> Term {
        let mut t = Term::new(TermKind::Var(self.root.clone()), span);
        if let Some(l) = &self.field {
            t = Term::new(TermKind::Access(Box::new(t), l.clone()), span);
        }
        if self.unit {
            t = Term::new(TermKind::Modify(Box::new(t), Vec::new()), span);
        }
        t
    }
}

impl fmt::Display for Access {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.root)?;
        if let Some(l) = &self.field {
            write!(f, ".{l}")?;
        }
        if self.unit {
            f.write_str(".{}")?;
        }
        Ok(())
    }
}

/// `x`, `l` (payload must be `{}`), or `l x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Simple {
    Var(Name),
    Label {
        label: Label,
        var: Option<Name>,
        unit: bool,
    },
}

impl Simple {
    fn binds(&self, x: &str) -> bool {
        match self {
            Simple::Var(y) => y == x,
            Simple::Label { var, .. } => var.as_deref() == Some(x),
        }
    }

    fn label(&self) -> Option<&Label> {
        match self {
            Simple::Var(_) => None,
            Simple::Label { label, .. } => Some(label),
        }
    }

    /// The expression a value matching this pattern is equal to.
    pub fn to_term(&self) -> Term {
        match self {
            Simple::Var(x) => Term::var(x),
            Simple::Label { label, var, .. } => Term::label(
                label.clone(),
                match var {
                    Some(x) => Term::var(x),
                    None => Term::unit(),
                },
            ),
        }
    }
}

impl fmt::Display for Simple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Simple::Var(x) => f.write_str(x),
            Simple::Label { label, var, unit } => {
                write!(f, "{label}")?;
                if let Some(x) = var {
                    write!(f, " {x}")?;
                }
                if *unit && var.is_some() {
                    f.write_str(" {}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Chain {
    Leaf(RhsId, Term),
    Node {
        id: MatchId,
        subject: Access,
        branches: Vec<(Simple, Chain)>,
    },
}

impl Chain {
    fn node(id: MatchId, subject: Access, pat: Simple, next: Chain) -> Chain {
        Chain::Node {
            id,
            subject,
            branches: vec![(pat, next)],
        }
    }

    /// Leaf occurrences per RHS.
    pub fn leaf_counts(&self, out: &mut BTreeMap<RhsId, i64>) {
        match self {
            Chain::Leaf(id, e) => {
                *out.entry(*id).or_default() += 1;
                tag_counts(e, out);
            }
            Chain::Node { branches, .. } => branches.iter().for_each(|(_, c)| c.leaf_counts(out)),
        }
    }
}

/// Counts the elaboration tags inside an already elaborated term.
pub fn tag_counts(t: &Term, out: &mut BTreeMap<RhsId, i64>) {
    if let TermKind::Tagged(id, _) = &t.kind {
        *out.entry(*id).or_default() += 1;
    }
    t.for_each_child(&mut |c| tag_counts(c, out));
}

/// Compact single-line rendering for debugging and tests.
impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chain::Leaf(id, _) => write!(f, "e{}", id.0),
            Chain::Node { subject, branches, .. } => {
                write!(f, "match {subject} <")?;
                for (i, (p, c)) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" |")?;
                    }
                    write!(f, " {p} => {c}")?;
                }
                f.write_str(" >")
            }
        }
    }
}

const HOLE: RhsId = RhsId(u32::MAX);

fn plug(c: Chain, with: Chain) -> Chain {
    match c {
        Chain::Leaf(HOLE, _) => with,
        Chain::Leaf(..) => c,
        Chain::Node {
            id,
            subject,
            mut branches,
        } => {
            let (p, next) = branches.pop().expect("single branch");
            Chain::node(id, subject, p, plug(next, with))
        }
    }
}

/// Per-RHS occurrence counts, kept up to date by `merge`.
pub type Ledger = BTreeMap<RhsId, i64>;

pub struct Builder<'a> {
    pub fresh: &'a mut u32,
    pub ledger: &'a mut Ledger,
}

impl Builder<'_> {
    pub fn fresh(&mut self, prefix: &str) -> Name {
        *self.fresh += 1;
        format!("#{prefix}{}", self.fresh)
    }

    // ---- expansion ----

    /// Expands one branch. `u` is the variable whose record pattern is being taken apart.
    pub fn expand(&mut self, id: &MatchId, subject: Access, u: Option<&str>, pat: &Pattern, leaf: Chain) -> Chain {
        match pat {
            Pattern::Var(x, _) => Chain::node(id.clone(), subject, Simple::Var(x.clone()), leaf),
            Pattern::Label(l, None, _) => Chain::node(
                id.clone(),
                subject,
                Simple::Label {
                    label: l.clone(),
                    var: None,
                    unit: true,
                },
                leaf,
            ),
            Pattern::Label(l, Some(inner), _) => {
                if let Pattern::Var(x, _) = &**inner {
                    return Chain::node(
                        id.clone(),
                        subject,
                        Simple::Label {
                            label: l.clone(),
                            var: Some(x.clone()),
                            unit: false,
                        },
                        leaf,
                    );
                }
                let x = self.fresh("x");
                let next = self.expand(&id.child(0), Access::var(&x), Some(&x), inner, leaf);
                Chain::node(
                    id.clone(),
                    subject,
                    Simple::Label {
                        label: l.clone(),
                        var: Some(x),
                        unit: false,
                    },
                    next,
                )
            }
            Pattern::Record(fs, _) if fs.is_empty() => {
                let x = self.fresh("x");
                Chain::node(id.clone(), subject.unit(), Simple::Var(x), leaf)
            }
            Pattern::Record(fs, sp) => match u {
                Some(x) if subject.is_var(x) => {
                    let (l, first) = &fs[0];
                    if fs.len() == 1 {
                        return self.expand(id, subject.dot(l), Some(x), first, leaf);
                    }
                    // expand the first field around a hole, then fill it with the rest
                    let head = self.expand(id, subject.dot(l), Some(x), first, Chain::Leaf(HOLE, Term::unit()));
                    let rest = Pattern::Record(fs[1..].to_vec(), *sp);
                    let tail = self.expand(&id.bump_last(), subject.clone(), u, &rest, leaf);
                    plug(head, tail)
                }
                _ => {
                    let x = self.fresh("x");
                    let next = self.expand(&id.child(0), Access::var(&x), Some(&x), pat, leaf);
                    Chain::node(id.clone(), subject.unit(), Simple::Var(x), next)
                }
            },
        }
    }

    // ---- merging ----

    fn adjust(&mut self, c: &Chain, by: i64) {
        let mut counts = BTreeMap::new();
        c.leaf_counts(&mut counts);
        for (id, n) in counts {
            *self.ledger.entry(id).or_default() += n * by;
        }
    }

    pub fn merge(&mut self, a: Chain, b: Chain) -> Chain {
        let Chain::Node {
            id: ida,
            subject: da,
            branches: mut bra,
        } = a
        else {
            self.adjust(&b, -1);
            return a;
        };
        let aligned = match &b {
            Chain::Node {
                id: idb,
                subject: db,
                branches: brb,
            } => ida.0.len() == idb.0.len() && *db == da && brb.len() == 1,
            Chain::Leaf(..) => false,
        };
        if !aligned {
            // different subjects: put b under a catch-all on a's subject
            let x = self.fresh("x");
            let wrapped = Chain::node(ida.clone(), da.clone(), Simple::Var(x), b);
            return self.merge(
                Chain::Node {
                    id: ida,
                    subject: da,
                    branches: bra,
                },
                wrapped,
            );
        }
        let Chain::Node {
            id: idb,
            branches: mut brb,
            ..
        } = b
        else {
            unreachable!()
        };
        let (pb, cb) = brb.pop().expect("single branch");
        let a_var = match bra.last() {
            Some((Simple::Var(x), _)) => Some(x.clone()),
            _ => None,
        };
        match pb {
            Simple::Var(xb) => {
                let tail = if a_var.is_some() { bra.pop() } else { None };
                let mut out = Vec::new();
                for (pi, ci) in bra {
                    let copy = subst_chain(&cb, &xb, &pi);
                    self.adjust(&copy, 1);
                    let merged = self.merge(ci, copy);
                    out.push((pi, merged));
                }
                match tail {
                    Some((Simple::Var(xa), ca)) => {
                        let renamed = subst_chain(&cb, &xb, &Simple::Var(xa.clone()));
                        let merged = self.merge(ca, renamed);
                        out.push((Simple::Var(xa), merged));
                    }
                    _ => out.push((Simple::Var(xb), cb)),
                }
                Chain::Node {
                    id: ida,
                    subject: da,
                    branches: out,
                }
            }
            Simple::Label {
                label,
                var: vb,
                unit: ub,
            } => {
                if let Some(i) = bra.iter().position(|(p, _)| p.label() == Some(&label)) {
                    let (pa, ca) = bra.remove(i);
                    let Simple::Label { var: va, unit: ua, .. } = pa else {
                        unreachable!()
                    };
                    let var = va.clone().or(vb.clone());
                    let cb = match (&va, &vb) {
                        (Some(xa), Some(xb)) => subst_chain(&cb, xb, &Simple::Var(xa.clone())),
                        _ => cb,
                    };
                    let merged = self.merge(ca, cb);
                    bra.insert(
                        i,
                        (
                            Simple::Label {
                                label,
                                var,
                                unit: ua || ub,
                            },
                            merged,
                        ),
                    );
                } else if let Some(xa) = a_var {
                    let (pa, ca) = bra.pop().expect("variable branch");
                    let pushed = Chain::node(
                        idb,
                        Access::var(&xa),
                        Simple::Label {
                            label,
                            var: vb,
                            unit: ub,
                        },
                        cb,
                    );
                    let merged = self.merge(ca, pushed);
                    bra.push((pa, merged));
                } else {
                    bra.push((
                        Simple::Label {
                            label,
                            var: vb,
                            unit: ub,
                        },
                        cb,
                    ));
                }
                Chain::Node {
                    id: ida,
                    subject: da,
                    branches: bra,
                }
            }
        }
    }

    // ---- desugaring ----

    pub fn desugar(&mut self, c: Chain, span: Span) -> Term {
        match c {
            Chain::Leaf(id, e) => {
                let sp = e.span;
                Term::new(TermKind::Tagged(id, Box::new(e)), sp)
            }
            Chain::Node {
                id,
                subject,
                mut branches,
            } => {
                let subj = subject.to_term(span);
                if branches.is_empty() {
                    return Term::new(TermKind::Void(Box::new(subj)), span);
                }
                let (p, next) = branches.remove(0);
                match p {
                    Simple::Var(x) => {
                        debug_assert!(branches.is_empty(), "variable branch must be last");
                        let body = self.desugar(next, span);
                        Term::new(TermKind::Let(x, Box::new(subj), Box::new(body)), span)
                    }
                    Simple::Label { label, var, unit } => {
                        let bind = match var {
                            Some(x) => x,
                            None => self.fresh("u"),
                        };
                        let mut hit = self.desugar(next, span);
                        if unit {
                            hit = Term::new(
                                TermKind::Unit(Box::new(Term::new(TermKind::Var(bind.clone()), span)), Box::new(hit)),
                                span,
                            );
                        }
                        let r = self.fresh("r");
                        let rest = self.desugar(
                            Chain::Node {
                                id,
                                subject: Access::var(&r),
                                branches,
                            },
                            span,
                        );
                        Term::new(
                            TermKind::Case {
                                subject: Box::new(subj),
                                label,
                                bind,
                                hit: Box::new(hit),
                                rest_var: r,
                                rest: Box::new(rest),
                            },
                            span,
                        )
                    }
                }
            }
        }
    }
}

/// Moves nodes that only bind a variable after the nodes that test something.
pub fn sort(c: Chain) -> Chain {
    let mut tests = Vec::new();
    let mut binds = Vec::new();
    let mut cur = c;
    loop {
        match cur {
            Chain::Node {
                id,
                subject,
                mut branches,
            } if branches.len() == 1 => {
                let (p, next) = branches.pop().unwrap();
                let binding = matches!(p, Simple::Var(_)) && !subject.unit;
                let entry = (id, subject, p);
                if binding {
                    binds.push(entry);
                } else {
                    tests.push(entry);
                }
                cur = next;
            }
            other => {
                cur = other;
                break;
            }
        }
    }
    tests
        .into_iter()
        .chain(binds)
        .rev()
        .fold(cur, |acc, (id, subject, p)| Chain::node(id, subject, p, acc))
}

/// `c[x ↦ p]`: renames subject roots when `p` is a variable and rewrites leaves.
pub fn subst_chain(c: &Chain, x: &str, p: &Simple) -> Chain {
    match c {
        Chain::Leaf(id, e) => Chain::Leaf(*id, subst(e, x, &p.to_term())),
        Chain::Node { id, subject, branches } => {
            let mut subject = subject.clone();
            if subject.root == x {
                if let Simple::Var(y) = p {
                    subject.root = y.clone();
                }
            }
            let branches = branches
                .iter()
                .map(|(q, next)| {
                    if q.binds(x) {
                        (q.clone(), next.clone())
                    } else {
                        (q.clone(), subst_chain(next, x, p))
                    }
                })
                .collect();
            Chain::Node {
                id: id.clone(),
                subject,
                branches,
            }
        }
    }
}

/// Rewrites each leaf with what the enclosing matches reveal about the subjects.
pub fn refine(s: &[(Name, Term)], c: Chain) -> Chain {
    match c {
        Chain::Leaf(id, e) => Chain::Leaf(id, crate::subst::subst_all(&e, s)),
        Chain::Node { id, subject, branches } => {
            let branches = branches
                .into_iter()
                .map(|(p, next)| {
                    let x = subject.root.clone();
                    let pt = p.to_term();
                    let img = match &subject.field {
                        None => pt,
                        Some(l) => Term::synth(TermKind::Extend(
                            Box::new(Term::synth(TermKind::Remove(Box::new(Term::var(&x)), l.clone()))),
                            vec![(l.clone(), pt)],
                        )),
                    };
                    let mut s2 = s.to_vec();
                    s2.push((x, img));
                    (p, refine(&s2, next))
                })
                .collect();
            Chain::Node { id, subject, branches }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_pattern;

    fn expand(p: &str, rhs: u32) -> Chain {
        let mut fresh = 0;
        let mut ledger = Ledger::new();
        let mut b = Builder {
            fresh: &mut fresh,
            ledger: &mut ledger,
        };
        b.expand(
            &MatchId(vec![0]),
            Access::var("s"),
            None,
            &parse_pattern(p).unwrap(),
            Chain::Leaf(RhsId(rhs), Term::unit()),
        )
    }

    #[test]
    fn variable_pattern_is_one_node() {
        assert_eq!(expand("y", 0).to_string(), "match s < y => e0 >");
    }

    #[test]
    fn bare_label_and_label_variable() {
        assert_eq!(expand("A", 0).to_string(), "match s < A => e0 >");
        assert_eq!(expand("A y", 0).to_string(), "match s < A y => e0 >");
    }

    #[test]
    fn nested_label_introduces_fresh_variable() {
        assert_eq!(
            expand("A (B y)", 0).to_string(),
            "match s < A #x1 => match #x1 < B y => e0 > >"
        );
    }

    #[test]
    fn unit_pattern() {
        assert_eq!(expand("{}", 0).to_string(), "match s.{} < #x1 => e0 >");
    }

    #[test]
    fn record_pattern_visits_fields_in_order() {
        assert_eq!(
            expand("{F: A | G: y}", 0).to_string(),
            "match s.{} < #x1 => match #x1.F < A => match #x1.G < y => e0 > > >"
        );
    }

    #[test]
    fn sort_moves_bindings_last() {
        let c = sort(expand("{F: y | G: A}", 0));
        assert_eq!(
            c.to_string(),
            "match s.{} < #x1 => match #x1.G < A => match #x1.F < y => e0 > > >"
        );
    }

    #[test]
    fn merge_appends_new_labels_and_counts_copies() {
        let mut fresh = 10;
        let mut ledger = Ledger::from([(RhsId(0), 1), (RhsId(1), 1), (RhsId(2), 1)]);
        let mut b = Builder {
            fresh: &mut fresh,
            ledger: &mut ledger,
        };
        let a = expand("A", 0);
        let m = b.merge(a, expand("B", 1));
        let m = b.merge(m, expand("y", 2));
        assert_eq!(m.to_string(), "match s < A => e0 | B => e1 | y => e2 >");
        // the catch-all is copied under both labels but they are leaves, so the copies are dropped
        assert_eq!(ledger[&RhsId(2)], 1);
    }

    #[test]
    fn variable_first_absorbs_later_branches() {
        let mut fresh = 10;
        let mut ledger = Ledger::from([(RhsId(0), 1), (RhsId(1), 1)]);
        let mut b = Builder {
            fresh: &mut fresh,
            ledger: &mut ledger,
        };
        let m = b.merge(expand("y", 0), expand("A", 1));
        assert_eq!(m.to_string(), "match s < y => e0 >");
        assert_eq!(ledger[&RhsId(1)], 0);
    }
}
