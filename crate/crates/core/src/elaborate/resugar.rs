//! Turns elaborated core terms back into cascades of simple surface matches.

use crate::subst::free_vars;
use crate::syntax::{Branch, Pattern, Span, Term, TermKind};

/// Rewrites `Case`/`Unit`/`Void` and elaboration lets into `match` with simple patterns.
pub fn resugar(t: &Term) -> Term {
    go(t, false)
}

fn is_access(t: &Term) -> bool {
    match &t.kind {
        TermKind::Var(_) => true,
        TermKind::Access(e, _) => is_access(e),
        TermKind::Modify(e, fs) => fs.is_empty() && is_access(e),
        _ => false,
    }
}

fn simple_match(subject: Term, branches: Vec<Branch>, span: Span) -> Term {
    Term::new(TermKind::Match(Box::new(subject), branches), span)
}

fn go(t: &Term, elab: bool) -> Term {
    let span = t.span;
    match &t.kind {
        TermKind::Tagged(_, e) => go(e, false),
        TermKind::Void(e) => simple_match(go(e, elab), Vec::new(), span),
        TermKind::Unit(e, body) => simple_match(
            go(e, elab),
            vec![Branch {
                pattern: Pattern::Record(Vec::new(), Span::default()),
                body: go(body, true),
            }],
            span,
        ),
        TermKind::Let(x, e, body) if elab && is_access(e) => simple_match(
            go(e, elab),
            vec![Branch {
                pattern: Pattern::Var(x.clone(), Span::default()),
                body: go(body, true),
            }],
            span,
        ),
        TermKind::Case {
            subject,
            label,
            bind,
            hit,
            rest_var,
            rest,
        } => {
            let first = match &hit.kind {
                TermKind::Unit(u, h)
                    if matches!(&u.kind, TermKind::Var(b) if b == bind) && !free_vars(h).contains(bind) =>
                {
                    Branch {
                        pattern: Pattern::Label(label.clone(), None, Span::default()),
                        body: go(h, true),
                    }
                }
                _ => Branch {
                    pattern: Pattern::Label(
                        label.clone(),
                        Some(Box::new(Pattern::Var(bind.clone(), Span::default()))),
                        Span::default(),
                    ),
                    body: go(hit, true),
                },
            };
            let mut branches = vec![first];
            let is_void_rest = matches!(&rest.kind, TermKind::Void(v)
                if matches!(&v.kind, TermKind::Var(r) if r == rest_var));
            if !is_void_rest {
                let r = go(rest, true);
                match r.kind {
                    TermKind::Match(s, bs)
                        if matches!(&s.kind, TermKind::Var(v) if v == rest_var)
                            && bs.iter().all(|b| !free_vars(&b.body).contains(rest_var)) =>
                    {
                        branches.extend(bs)
                    }
                    kind => branches.push(Branch {
                        pattern: Pattern::Var(rest_var.clone(), Span::default()),
                        body: Term::new(kind, r.span),
                    }),
                }
            }
            simple_match(go(subject, elab), branches, span)
        }
        _ => t.map_children(&|c| go(c, elab)),
    }
}
