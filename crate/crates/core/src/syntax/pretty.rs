use std::collections::{BTreeMap, HashSet};

use super::ast::*;

// ---- terms ----

const EXPR: u8 = 0;
const APP: u8 = 1;
const ARG: u8 = 2;
const ATOM: u8 = 3;

/// Single-line rendering.
pub fn term_to_string(t: &Term) -> String {
    let mut out = String::new();
    TermPrinter { block: false }.term(t, EXPR, 0, &mut out);
    out
}

/// Multi-line rendering that puts each match branch on its own line.
pub fn term_to_block(t: &Term) -> String {
    let mut out = String::new();
    TermPrinter { block: true }.term(t, EXPR, 0, &mut out);
    out
}

pub fn pattern_to_string(p: &Pattern) -> String {
    let mut out = String::new();
    pattern(p, &mut out);
    out
}

fn pattern(p: &Pattern, out: &mut String) {
    match p {
        Pattern::Var(x, _) => out.push_str(x),
        Pattern::Label(l, None, _) => out.push_str(&l.to_string()),
        Pattern::Label(l, Some(q), _) => {
            out.push_str(&l.to_string());
            out.push(' ');
            pattern(q, out);
        }
        Pattern::Record(fs, _) => {
            out.push('{');
            for (i, (l, q)) in fs.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                out.push_str(&format!("{l}: "));
                pattern(q, out);
            }
            out.push('}');
        }
    }
}

fn prec(t: &Term) -> u8 {
    match &t.kind {
        TermKind::Tagged(_, e) => prec(e),
        TermKind::Var(_) | TermKind::Fix | TermKind::Record(_) => ATOM,
        TermKind::Match(..) | TermKind::Void(_) | TermKind::Unit(..) | TermKind::Case { .. } => ATOM,
        TermKind::Access(..) | TermKind::Remove(..) | TermKind::Modify(..) | TermKind::Extend(..) => ATOM,
        // a label swallows the next argument, so it never counts as closed
        TermKind::Label(..) => ARG,
        TermKind::App(..) => APP,
        TermKind::Lam(..) | TermKind::Let(..) => EXPR,
    }
}

fn is_unit(t: &Term) -> bool {
    matches!(&t.kind, TermKind::Record(fs) if fs.is_empty())
}

struct TermPrinter {
    block: bool,
}

impl TermPrinter {
    fn term(&self, t: &Term, ctx: u8, ind: usize, out: &mut String) {
        if prec(t) < ctx {
            out.push('(');
            self.term(t, EXPR, ind, out);
            out.push(')');
            return;
        }
        match &t.kind {
            TermKind::Tagged(_, e) => self.term(e, ctx, ind, out),
            TermKind::Var(x) => out.push_str(x),
            TermKind::Fix => out.push_str("fix"),
            TermKind::App(f, a) => {
                let fctx = if matches!(prec(f), ARG) { ATOM } else { APP };
                self.term(f, fctx, ind, out);
                out.push(' ');
                let actx = if matches!(prec(a), ARG) { ATOM } else { ARG };
                self.term(a, actx, ind, out);
            }
            TermKind::Lam(x, b) => {
                out.push_str(&format!("lam {x} = "));
                self.term(b, EXPR, ind, out);
            }
            TermKind::Let(x, a, b) => {
                out.push_str(&format!("let {x} = "));
                self.term(a, EXPR, ind, out);
                out.push_str(" in");
                if self.block {
                    self.newline(ind, out);
                } else {
                    out.push(' ');
                }
                self.term(b, EXPR, ind, out);
            }
            TermKind::Label(l, e) => {
                out.push_str(&l.to_string());
                if !is_unit(e) {
                    out.push(' ');
                    let actx = if matches!(prec(e), ARG) { ARG } else { ATOM };
                    self.term(e, actx, ind, out);
                }
            }
            TermKind::Record(fs) => self.fields(fs, ind, out),
            TermKind::Access(e, l) => {
                self.term(e, ATOM, ind, out);
                out.push_str(&format!(".{l}"));
            }
            TermKind::Remove(e, l) => {
                self.term(e, ATOM, ind, out);
                out.push_str(&format!(".-{l}"));
            }
            TermKind::Modify(e, fs) => {
                self.term(e, ATOM, ind, out);
                out.push('.');
                self.fields(fs, ind, out);
            }
            TermKind::Extend(e, fs) => {
                self.term(e, ATOM, ind, out);
                out.push_str(".+");
                self.fields(fs, ind, out);
            }
            TermKind::Match(e, bs) => {
                let arms: Vec<(String, &Term)> = bs.iter().map(|b| (pattern_to_string(&b.pattern), &b.body)).collect();
                self.matcher(e, &arms, ind, out);
            }
            TermKind::Void(e) => self.matcher(e, &[], ind, out),
            TermKind::Unit(e, r) => self.matcher(e, &[("{}".to_string(), r.as_ref())], ind, out),
            TermKind::Case {
                subject,
                label,
                bind,
                hit,
                rest_var,
                rest,
            } => self.matcher(
                subject,
                &[
                    (format!("{label} {bind}"), hit.as_ref()),
                    (rest_var.clone(), rest.as_ref()),
                ],
                ind,
                out,
            ),
        }
    }

    fn newline(&self, ind: usize, out: &mut String) {
        out.push('\n');
        out.push_str(&" ".repeat(ind));
    }

    fn fields(&self, fs: &[(Label, Term)], ind: usize, out: &mut String) {
        out.push('{');
        for (i, (l, e)) in fs.iter().enumerate() {
            if i > 0 {
                out.push_str(" | ");
            }
            out.push_str(&format!("{l}: "));
            self.term(e, EXPR, ind, out);
        }
        out.push('}');
    }

    fn matcher(&self, e: &Term, arms: &[(String, &Term)], ind: usize, out: &mut String) {
        out.push_str("match ");
        self.term(e, EXPR, ind, out);
        out.push_str(" with <");
        if arms.is_empty() {
            out.push_str(" >");
            return;
        }
        for (i, (p, body)) in arms.iter().enumerate() {
            if self.block {
                self.newline(ind + 2, out);
                if i > 0 {
                    out.push_str("| ");
                }
            } else {
                out.push_str(if i > 0 { " | " } else { " " });
            }
            out.push_str(p);
            out.push_str(" =>");
            if self.block {
                self.newline(ind + 4, out);
                self.term(body, EXPR, ind + 4, out);
            } else {
                out.push(' ');
                self.term(body, EXPR, ind, out);
            }
        }
        if self.block {
            self.newline(ind, out);
            out.push('>');
        } else {
            out.push_str(" >");
        }
    }
}

// ---- types ----

pub fn type_to_string(t: &TypeExpr) -> String {
    let mut p = TypePrinter {
        kinds: BTreeMap::new(),
        done: HashSet::new(),
    };
    let mut out = String::new();
    p.ty(t, 0, &mut out);
    out
}

/// Renders `forall` prefix and `r: ~{..}` annotations at the first occurrence of each variable.
pub fn annot_to_string(a: &TypeAnnot) -> String {
    let mut p = TypePrinter {
        kinds: a.kinds.iter().cloned().collect(),
        done: HashSet::new(),
    };
    let mut out = String::new();
    if !a.forall.is_empty() {
        out.push_str(&format!("forall {}. ", a.forall.join(" ")));
    }
    p.ty(&a.ty, 0, &mut out);
    out
}

struct TypePrinter {
    kinds: BTreeMap<Name, RowKind>,
    done: HashSet<Name>,
}

impl TypePrinter {
    // ctx: 0 = anywhere, 1 = arrow lhs, 2 = alias argument
    fn ty(&mut self, t: &TypeExpr, ctx: u8, out: &mut String) {
        match t {
            TypeExpr::Var(a) => out.push_str(a),
            TypeExpr::Arrow(a, b) => {
                if ctx > 0 {
                    out.push('(');
                }
                self.ty(a, 1, out);
                out.push_str(" -> ");
                self.ty(b, 0, out);
                if ctx > 0 {
                    out.push(')');
                }
            }
            TypeExpr::Rec(a, b) => {
                if ctx > 0 {
                    out.push('(');
                }
                out.push_str(&format!("{a} as "));
                self.ty(b, 0, out);
                if ctx > 0 {
                    out.push(')');
                }
            }
            TypeExpr::Record(r) => {
                out.push('{');
                self.row(r, out);
                out.push('}');
            }
            TypeExpr::Variant(r) => {
                out.push('<');
                self.row(r, out);
                out.push('>');
            }
            TypeExpr::Alias(n, args) => {
                let paren = ctx == 2 && !args.is_empty();
                if paren {
                    out.push('(');
                }
                out.push_str(n);
                for a in args {
                    out.push(' ');
                    self.ty(a, 2, out);
                }
                if paren {
                    out.push(')');
                }
            }
        }
    }

    fn row(&mut self, r: &Row, out: &mut String) {
        let mut fields: Vec<&(Label, TypeExpr)> = r.fields.iter().collect();
        fields.sort_by(|a, b| a.0.cmp(&b.0));
        for (l, t) in fields {
            out.push_str(&format!("{l}: "));
            self.ty(t, 0, out);
            out.push_str(" | ");
        }
        match &r.tail {
            RowTail::Empty => out.push('*'),
            RowTail::Fresh => {
                out.pop();
            }
            RowTail::Var(v) => {
                out.push_str(v);
                if let Some(k) = self.kinds.get(v) {
                    if self.done.insert(v.clone()) {
                        out.push_str(&format!(": {k}"));
                    }
                }
            }
        }
    }
}

// ---- schemes ----

/// For each row variable: how often it ends a row, and the union of labels of those rows.
pub fn tail_uses(t: &TypeExpr) -> BTreeMap<Name, (usize, LabelSet)> {
    fn go(t: &TypeExpr, acc: &mut BTreeMap<Name, (usize, LabelSet)>) {
        match t {
            TypeExpr::Var(_) => {}
            TypeExpr::Arrow(a, b) => {
                go(a, acc);
                go(b, acc)
            }
            TypeExpr::Rec(_, b) => go(b, acc),
            TypeExpr::Alias(_, args) => args.iter().for_each(|a| go(a, acc)),
            TypeExpr::Record(r) | TypeExpr::Variant(r) => {
                for (_, f) in &r.fields {
                    go(f, acc);
                }
                if let RowTail::Var(v) = &r.tail {
                    let e = acc.entry(v.clone()).or_default();
                    e.0 += 1;
                    e.1.extend(r.labels());
                }
            }
        }
    }
    let mut acc = BTreeMap::new();
    go(t, &mut acc);
    acc
}

/// The kind an unannotated row variable receives: every label of every row it ends is excluded.
pub fn default_row_kind(uses: &(usize, LabelSet)) -> RowKind {
    RowKind::Neg(uses.1.clone())
}

/// Converts a scheme to annotation syntax. With `implicit`, single-use tails of default kind become `|`.
pub fn scheme_to_annot(s: &Scheme, implicit: bool) -> TypeAnnot {
    let uses = tail_uses(&s.body);
    let mut hide = HashSet::new();
    let mut kinds = Vec::new();
    for (v, k) in &s.vars {
        if let (Kind::Row(rk), Some(u)) = (k, uses.get(v)) {
            let default = default_row_kind(u);
            if *rk == default {
                if implicit && u.0 == 1 {
                    hide.insert(v.clone());
                }
            } else {
                kinds.push((v.clone(), rk.clone()));
            }
        }
    }
    fn strip(t: &TypeExpr, hide: &HashSet<Name>) -> TypeExpr {
        let row = |r: &Row| Row {
            fields: r.fields.iter().map(|(l, f)| (l.clone(), strip(f, hide))).collect(),
            tail: match &r.tail {
                RowTail::Var(v) if hide.contains(v) => RowTail::Fresh,
                other => other.clone(),
            },
        };
        match t {
            TypeExpr::Var(_) => t.clone(),
            TypeExpr::Arrow(a, b) => TypeExpr::arrow(strip(a, hide), strip(b, hide)),
            TypeExpr::Rec(a, b) => TypeExpr::Rec(a.clone(), Box::new(strip(b, hide))),
            TypeExpr::Alias(n, args) => TypeExpr::Alias(n.clone(), args.iter().map(|a| strip(a, hide)).collect()),
            TypeExpr::Record(r) => TypeExpr::Record(row(r)),
            TypeExpr::Variant(r) => TypeExpr::Variant(row(r)),
        }
    }
    TypeAnnot {
        forall: Vec::new(),
        kinds,
        ty: strip(&s.body, &hide),
        span: Span::default(),
    }
}

/// Compact rendering: implicit tails where possible, kinds only where they differ from the default.
pub fn scheme_to_string(s: &Scheme) -> String {
    annot_to_string(&scheme_to_annot(s, true))
}

/// Every variable named; kinds still shown only where non-default.
pub fn scheme_to_string_explicit(s: &Scheme) -> String {
    annot_to_string(&scheme_to_annot(s, false))
}

/// Kinds of all quantified row variables.
pub fn scheme_legend(s: &Scheme) -> Vec<(Name, RowKind)> {
    s.vars
        .iter()
        .filter_map(|(v, k)| match k {
            Kind::Row(rk) => Some((v.clone(), rk.clone())),
            Kind::Type => None,
        })
        .collect()
}

// ---- programs ----

pub fn program_to_string(p: &Program) -> String {
    let mut out = String::new();
    for d in &p.decls {
        match d {
            Decl::Type { name, annot, .. } => {
                out.push_str(&format!("type {name} = {}\n\n", annot_to_string(annot)));
            }
            Decl::Let { name, annot, body, .. } => {
                out.push_str(&format!("let {name}"));
                if let Some(a) = annot {
                    out.push_str(&format!(": {}", annot_to_string(a)));
                }
                out.push_str(" =\n  ");
                let mut s = String::new();
                TermPrinter { block: true }.term(body, EXPR, 2, &mut s);
                out.push_str(&s);
                out.push_str("\n\n");
            }
        }
    }
    if let Some(m) = &p.main {
        out.push_str(&term_to_block(m));
        out.push('\n');
    }
    out
}
