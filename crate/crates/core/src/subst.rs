//! Free variables and capture-avoiding substitution on terms.

use std::collections::BTreeSet;

use crate::syntax::{Branch, Name, Pattern, Term, TermKind};

pub fn pattern_vars(p: &Pattern, out: &mut Vec<Name>) {
    match p {
        Pattern::Var(x, _) => out.push(x.clone()),
        Pattern::Label(_, Some(q), _) => pattern_vars(q, out),
        Pattern::Label(_, None, _) => {}
        Pattern::Record(fs, _) => fs.iter().for_each(|(_, q)| pattern_vars(q, out)),
    }
}

pub fn free_vars(t: &Term) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    collect(t, &mut Vec::new(), &mut out);
    out
}

fn collect(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    let under = |names: &[Name], e: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>| {
        let n = bound.len();
        bound.extend(names.iter().cloned());
        collect(e, bound, out);
        bound.truncate(n);
    };
    match &t.kind {
        TermKind::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        TermKind::Lam(x, b) => under(std::slice::from_ref(x), b, bound, out),
        TermKind::Let(x, a, b) => {
            collect(a, bound, out);
            under(std::slice::from_ref(x), b, bound, out)
        }
        TermKind::Case {
            subject,
            bind,
            hit,
            rest_var,
            rest,
            ..
        } => {
            collect(subject, bound, out);
            under(std::slice::from_ref(bind), hit, bound, out);
            under(std::slice::from_ref(rest_var), rest, bound, out);
        }
        TermKind::Match(e, bs) => {
            collect(e, bound, out);
            for b in bs {
                let mut vs = Vec::new();
                pattern_vars(&b.pattern, &mut vs);
                under(&vs, &b.body, bound, out);
            }
        }
        _ => t.for_each_child(&mut |c| collect(c, bound, out)),
    }
}

/// A name based on `x` that is in neither set.
pub fn fresh_like(x: &str, avoid: &BTreeSet<Name>) -> Name {
    let base = x.trim_end_matches(|c: char| c.is_ascii_digit() || c == '\'');
    let base = if base.is_empty() { "v" } else { base };
    (1..)
        .map(|i| format!("{base}{i}'"))
        .find(|n| !avoid.contains(n))
        .expect("fresh name")
}

/// `t[x ↦ v]`, renaming binders that would capture free variables of `v`.
pub fn subst(t: &Term, x: &str, v: &Term) -> Term {
    let fv = free_vars(v);
    go(t, x, v, &fv)
}

/// Applies each substitution in turn, first element first.
pub fn subst_all(t: &Term, s: &[(Name, Term)]) -> Term {
    s.iter().fold(t.clone(), |acc, (x, v)| subst(&acc, x, v))
}

fn go(t: &Term, x: &str, v: &Term, fv: &BTreeSet<Name>) -> Term {
    let span = t.span;
    match &t.kind {
        TermKind::Var(y) if y == x => {
            let mut r = v.clone();
            if r.span == Default::default() {
                r.span = span;
            }
            r
        }
        TermKind::Lam(y, b) => {
            if y == x {
                return t.clone();
            }
            let (y2, b2) = binder(y, b, x, v, fv);
            Term::new(TermKind::Lam(y2, Box::new(b2)), span)
        }
        TermKind::Let(y, a, b) => {
            let a2 = go(a, x, v, fv);
            if y == x {
                return Term::new(TermKind::Let(y.clone(), Box::new(a2), b.clone()), span);
            }
            let (y2, b2) = binder(y, b, x, v, fv);
            Term::new(TermKind::Let(y2, Box::new(a2), Box::new(b2)), span)
        }
        TermKind::Case {
            subject,
            label,
            bind,
            hit,
            rest_var,
            rest,
        } => {
            let s2 = go(subject, x, v, fv);
            let (b2, h2) = if bind == x {
                (bind.clone(), (**hit).clone())
            } else {
                binder(bind, hit, x, v, fv)
            };
            let (r2, e2) = if rest_var == x {
                (rest_var.clone(), (**rest).clone())
            } else {
                binder(rest_var, rest, x, v, fv)
            };
            Term::new(
                TermKind::Case {
                    subject: Box::new(s2),
                    label: label.clone(),
                    bind: b2,
                    hit: Box::new(h2),
                    rest_var: r2,
                    rest: Box::new(e2),
                },
                span,
            )
        }
        TermKind::Match(e, bs) => {
            let e2 = go(e, x, v, fv);
            let bs2 = bs
                .iter()
                .map(|b| {
                    let mut vs = Vec::new();
                    pattern_vars(&b.pattern, &mut vs);
                    if vs.iter().any(|y| y == x) {
                        return b.clone();
                    }
                    let mut pattern = b.pattern.clone();
                    let mut body = b.body.clone();
                    let clash: Vec<&Name> = vs.iter().filter(|y| fv.contains(*y)).collect();
                    if !clash.is_empty() && free_vars(&body).contains(x) {
                        let mut avoid = fv.clone();
                        avoid.extend(free_vars(&body));
                        avoid.extend(vs.iter().cloned());
                        for y in clash {
                            let y2 = fresh_like(y, &avoid);
                            avoid.insert(y2.clone());
                            body = subst(&body, y, &Term::var(&y2));
                            pattern = rename_pattern(&pattern, y, &y2);
                        }
                    }
                    Branch {
                        pattern,
                        body: go(&body, x, v, fv),
                    }
                })
                .collect();
            Term::new(TermKind::Match(Box::new(e2), bs2), span)
        }
        _ => t.map_children(&|c| go(c, x, v, fv)),
    }
}

fn binder(y: &Name, body: &Term, x: &str, v: &Term, fv: &BTreeSet<Name>) -> (Name, Term) {
    if fv.contains(y) && free_vars(body).contains(x) {
        let mut avoid = fv.clone();
        avoid.extend(free_vars(body));
        avoid.insert(x.to_string());
        let y2 = fresh_like(y, &avoid);
        let renamed = subst(body, y, &Term::var(&y2));
        (y2, go(&renamed, x, v, fv))
    } else {
        (y.clone(), go(body, x, v, fv))
    }
}

fn rename_pattern(p: &Pattern, from: &str, to: &str) -> Pattern {
    match p {
        Pattern::Var(y, s) if y == from => Pattern::Var(to.to_string(), *s),
        Pattern::Var(..) | Pattern::Label(_, None, _) => p.clone(),
        Pattern::Label(l, Some(q), s) => Pattern::Label(l.clone(), Some(Box::new(rename_pattern(q, from, to))), *s),
        Pattern::Record(fs, s) => Pattern::Record(
            fs.iter()
                .map(|(l, q)| (l.clone(), rename_pattern(q, from, to)))
                .collect(),
            *s,
        ),
    }
}

/// Equality up to renaming of bound variables. Elaboration tags are ignored.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    alpha(a, b, &mut Vec::new())
}

fn lookup(env: &[(Name, Name)], x: &str, y: &str) -> bool {
    for (l, r) in env.iter().rev() {
        if l == x || r == y {
            return l == x && r == y;
        }
    }
    x == y
}

fn alpha_pattern(p: &Pattern, q: &Pattern, env: &mut Vec<(Name, Name)>) -> bool {
    match (p, q) {
        (Pattern::Var(x, _), Pattern::Var(y, _)) => {
            env.push((x.clone(), y.clone()));
            true
        }
        (Pattern::Label(l, None, _), Pattern::Label(m, None, _)) => l == m,
        (Pattern::Label(l, Some(p1), _), Pattern::Label(m, Some(q1), _)) => l == m && alpha_pattern(p1, q1, env),
        (Pattern::Record(fs, _), Pattern::Record(gs, _)) => {
            fs.len() == gs.len()
                && fs
                    .iter()
                    .zip(gs)
                    .all(|((l, p1), (m, q1))| l == m && alpha_pattern(p1, q1, env))
        }
        _ => false,
    }
}

fn under(env: &mut Vec<(Name, Name)>, x: &Name, y: &Name, a: &Term, b: &Term) -> bool {
    env.push((x.clone(), y.clone()));
    let r = alpha(a, b, env);
    env.pop();
    r
}

fn alpha(a: &Term, b: &Term, env: &mut Vec<(Name, Name)>) -> bool {
    use TermKind as K;
    let fields =
        |fs: &[(crate::syntax::Label, Term)], gs: &[(crate::syntax::Label, Term)], env: &mut Vec<(Name, Name)>| {
            fs.len() == gs.len() && fs.iter().zip(gs).all(|((l, x), (m, y))| l == m && alpha(x, y, env))
        };
    match (&a.kind, &b.kind) {
        (K::Tagged(_, x), _) => alpha(x, b, env),
        (_, K::Tagged(_, y)) => alpha(a, y, env),
        (K::Var(x), K::Var(y)) => lookup(env, x, y),
        (K::Fix, K::Fix) => true,
        (K::App(f, x), K::App(g, y)) | (K::Unit(f, x), K::Unit(g, y)) => alpha(f, g, env) && alpha(x, y, env),
        (K::Lam(x, e), K::Lam(y, f)) => under(env, x, y, e, f),
        (K::Let(x, e1, e2), K::Let(y, f1, f2)) => alpha(e1, f1, env) && under(env, x, y, e2, f2),
        (K::Label(l, e), K::Label(m, f)) => l == m && alpha(e, f, env),
        (K::Record(fs), K::Record(gs)) => fields(fs, gs, env),
        (K::Access(e, l), K::Access(f, m)) | (K::Remove(e, l), K::Remove(f, m)) => l == m && alpha(e, f, env),
        (K::Modify(e, fs), K::Modify(f, gs)) | (K::Extend(e, fs), K::Extend(f, gs)) => {
            alpha(e, f, env) && fields(fs, gs, env)
        }
        (K::Void(e), K::Void(f)) => alpha(e, f, env),
        (K::Match(e, bs), K::Match(f, cs)) => {
            alpha(e, f, env)
                && bs.len() == cs.len()
                && bs.iter().zip(cs).all(|(b, c)| {
                    let n = env.len();
                    let ok = alpha_pattern(&b.pattern, &c.pattern, env) && alpha(&b.body, &c.body, env);
                    env.truncate(n);
                    ok
                })
        }
        (
            K::Case {
                subject: s1,
                label: l1,
                bind: x1,
                hit: h1,
                rest_var: r1,
                rest: e1,
            },
            K::Case {
                subject: s2,
                label: l2,
                bind: x2,
                hit: h2,
                rest_var: r2,
                rest: e2,
            },
        ) => l1 == l2 && alpha(s1, s2, env) && under(env, x1, x2, h1, h2) && under(env, r1, r2, e1, e2),
        _ => false,
    }
}
