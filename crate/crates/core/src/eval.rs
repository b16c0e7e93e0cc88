//! Small-step call-by-value evaluation of core terms.

use std::fmt;

use crate::subst::subst;
use crate::syntax::{Label, Span, Term, TermKind};

pub const DEFAULT_FUEL: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    App,
    Let,
    Fix,
    FieldAccess,
    FieldDel,
    RecordMod,
    RecordExt,
    MatchUnit,
    MatchMatch,
    MatchSkip,
}

impl Rule {
    pub const ALL: [Rule; 10] = [
        Rule::App,
        Rule::Let,
        Rule::Fix,
        Rule::FieldAccess,
        Rule::FieldDel,
        Rule::RecordMod,
        Rule::RecordExt,
        Rule::MatchUnit,
        Rule::MatchMatch,
        Rule::MatchSkip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::App => "ST-App",
            Rule::Let => "ST-Let",
            Rule::Fix => "ST-Fix",
            Rule::FieldAccess => "ST-FieldAccess",
            Rule::FieldDel => "ST-FieldDel",
            Rule::RecordMod => "ST-RecordMod",
            Rule::RecordExt => "ST-RecordExt",
            Rule::MatchUnit => "ST-Match-Unit",
            Rule::MatchMatch => "ST-Match-Match",
            Rule::MatchSkip => "ST-Match-Skip",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Stepped(Term, Rule),
    Value,
    Stuck(String, Span),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Value(Term),
    FuelExhausted(Term),
    Stuck { term: Term, reason: String, span: Span },
}

pub fn is_value(t: &Term) -> bool {
    match &t.kind {
        TermKind::Lam(..) | TermKind::Fix => true,
        TermKind::Label(_, e) => is_value(e),
        TermKind::Record(fs) => fs.iter().all(|(_, e)| is_value(e)),
        _ => false,
    }
}

/// One reduction step at the position chosen by the evaluation contexts.
pub fn step(t: &Term) -> Step {
    if is_value(t) {
        return Step::Value;
    }
    match reduce(t) {
        Ok((t2, r)) => Step::Stepped(t2, r),
        Err((msg, span)) => Step::Stuck(msg, span),
    }
}

type Reduced = Result<(Term, Rule), (String, Span)>;

fn stuck<T>(t: &Term, msg: impl Into<String>) -> Result<T, (String, Span)> {
    Err((msg.into(), t.span))
}

/// Steps the first non-value in `fields`, rebuilding the list.
fn step_fields(fields: &[(Label, Term)]) -> Option<Reduced> {
    let i = fields.iter().position(|(_, e)| !is_value(e))?;
    Some(reduce(&fields[i].1).map(|(e2, r)| {
        let mut fs = fields.to_vec();
        fs[i].1 = e2;
        (Term::new(TermKind::Record(fs), Span::default()), r)
    }))
}

fn record_fields(t: &Term) -> Option<&Vec<(Label, Term)>> {
    match &t.kind {
        TermKind::Record(fs) => Some(fs),
        _ => None,
    }
}

fn reduce(t: &Term) -> Reduced {
    let sp = t.span;
    let wrap = |k: TermKind| Term::new(k, sp);
    let bx = Box::new;
    match &t.kind {
        TermKind::App(f, a) => {
            if !is_value(f) {
                let (f2, r) = reduce(f)?;
                return Ok((wrap(TermKind::App(bx(f2), a.clone())), r));
            }
            if !is_value(a) {
                let (a2, r) = reduce(a)?;
                return Ok((wrap(TermKind::App(f.clone(), bx(a2))), r));
            }
            match &f.kind {
                TermKind::Lam(x, body) => Ok((subst(body, x, a), Rule::App)),
                TermKind::Fix => {
                    // fix v ~> v (lam x = fix v x)
                    let avoid = crate::subst::free_vars(a);
                    let x = crate::subst::fresh_like("x", &avoid);
                    let eta = Term::lam(
                        &x,
                        Term::app(Term::app(Term::synth(TermKind::Fix), (**a).clone()), Term::var(&x)),
                    );
                    Ok((wrap(TermKind::App(a.clone(), bx(eta))), Rule::Fix))
                }
                _ => stuck(t, "application of a non-function"),
            }
        }
        TermKind::Let(x, a, b) => {
            if !is_value(a) {
                let (a2, r) = reduce(a)?;
                return Ok((wrap(TermKind::Let(x.clone(), bx(a2), b.clone())), r));
            }
            Ok((subst(b, x, a), Rule::Let))
        }
        TermKind::Label(l, e) => {
            let (e2, r) = reduce(e)?;
            Ok((wrap(TermKind::Label(l.clone(), bx(e2))), r))
        }
        TermKind::Record(fs) => match step_fields(fs) {
            Some(res) => res.map(|(r2, rule)| (Term::new(r2.kind, sp), rule)),
            None => stuck(t, "record is already a value"),
        },
        TermKind::Access(e, l) => {
            if !is_value(e) {
                let (e2, r) = reduce(e)?;
                return Ok((wrap(TermKind::Access(bx(e2), l.clone())), r));
            }
            match record_fields(e).and_then(|fs| fs.iter().find(|(m, _)| m == l)) {
                Some((_, v)) => Ok((v.clone(), Rule::FieldAccess)),
                None => stuck(t, format!("field `{l}` is missing")),
            }
        }
        TermKind::Remove(e, l) => {
            if !is_value(e) {
                let (e2, r) = reduce(e)?;
                return Ok((wrap(TermKind::Remove(bx(e2), l.clone())), r));
            }
            match record_fields(e) {
                Some(fs) if fs.iter().any(|(m, _)| m == l) => {
                    let rest = fs.iter().filter(|(m, _)| m != l).cloned().collect();
                    Ok((wrap(TermKind::Record(rest)), Rule::FieldDel))
                }
                _ => stuck(t, format!("cannot remove field `{l}`")),
            }
        }
        TermKind::Modify(e, upd) | TermKind::Extend(e, upd) => {
            let extend = matches!(t.kind, TermKind::Extend(..));
            let rebuild = |e: Box<Term>, upd: Vec<(Label, Term)>| {
                if extend {
                    TermKind::Extend(e, upd)
                } else {
                    TermKind::Modify(e, upd)
                }
            };
            if !is_value(e) {
                let (e2, r) = reduce(e)?;
                return Ok((wrap(rebuild(bx(e2), upd.clone())), r));
            }
            if let Some(res) = step_fields(upd) {
                let (fs, r) = res?;
                let fs = record_fields(&fs).cloned().unwrap_or_default();
                return Ok((wrap(rebuild(e.clone(), fs)), r));
            }
            let Some(base) = record_fields(e) else {
                return stuck(t, "record operation on a non-record");
            };
            if extend {
                if let Some((l, _)) = upd.iter().find(|(l, _)| base.iter().any(|(m, _)| m == l)) {
                    return stuck(t, format!("extension with existing field `{l}`"));
                }
                let mut out = base.clone();
                out.extend(upd.iter().cloned());
                Ok((wrap(TermKind::Record(out)), Rule::RecordExt))
            } else {
                if let Some((l, _)) = upd.iter().find(|(l, _)| !base.iter().any(|(m, _)| m == l)) {
                    return stuck(t, format!("modification of missing field `{l}`"));
                }
                let out = base
                    .iter()
                    .map(|(m, v)| match upd.iter().find(|(l, _)| l == m) {
                        Some((_, v2)) => (m.clone(), v2.clone()),
                        None => (m.clone(), v.clone()),
                    })
                    .collect();
                Ok((wrap(TermKind::Record(out)), Rule::RecordMod))
            }
        }
        TermKind::Void(e) => {
            if !is_value(e) {
                let (e2, r) = reduce(e)?;
                return Ok((wrap(TermKind::Void(bx(e2))), r));
            }
            stuck(t, "no branch matches")
        }
        TermKind::Unit(e, body) => {
            if !is_value(e) {
                let (e2, r) = reduce(e)?;
                return Ok((wrap(TermKind::Unit(bx(e2), body.clone())), r));
            }
            match record_fields(e) {
                Some(fs) if fs.is_empty() => Ok(((**body).clone(), Rule::MatchUnit)),
                _ => stuck(t, "unit match on a non-empty value"),
            }
        }
        TermKind::Case {
            subject,
            label,
            bind,
            hit,
            rest_var,
            rest,
        } => {
            if !is_value(subject) {
                let (s2, r) = reduce(subject)?;
                return Ok((
                    wrap(TermKind::Case {
                        subject: bx(s2),
                        label: label.clone(),
                        bind: bind.clone(),
                        hit: hit.clone(),
                        rest_var: rest_var.clone(),
                        rest: rest.clone(),
                    }),
                    r,
                ));
            }
            match &subject.kind {
                TermKind::Label(l, v) if l == label => Ok((subst(hit, bind, v), Rule::MatchMatch)),
                TermKind::Label(..) => Ok((subst(rest, rest_var, subject), Rule::MatchSkip)),
                _ => stuck(t, "match on a non-variant"),
            }
        }
        TermKind::Tagged(id, e) => {
            let (e2, r) = reduce(e)?;
            Ok((wrap(TermKind::Tagged(*id, bx(e2))), r))
        }
        TermKind::Var(x) => stuck(t, format!("unbound variable `{x}`")),
        TermKind::Match(..) => stuck(t, "match was not elaborated"),
        TermKind::Lam(..) | TermKind::Fix => stuck(t, "already a value"),
    }
}

/// Runs `step` until a value, a stuck term, or `fuel` steps.
pub fn eval(t: &Term, fuel: u64) -> Outcome {
    eval_traced(t, fuel, &mut |_, _, _| {})
}

/// Like [`eval`], calling `on_step(before, rule, after)` for every step taken.
pub fn eval_traced(t: &Term, fuel: u64, on_step: &mut dyn FnMut(&Term, Rule, &Term)) -> Outcome {
    let mut cur = t.clone();
    for _ in 0..fuel {
        match step(&cur) {
            Step::Value => return Outcome::Value(cur),
            Step::Stuck(reason, span) => {
                return Outcome::Stuck {
                    term: cur,
                    reason,
                    span,
                }
            }
            Step::Stepped(next, rule) => {
                on_step(&cur, rule, &next);
                cur = next;
            }
        }
    }
    if is_value(&cur) {
        Outcome::Value(cur)
    } else {
        Outcome::FuelExhausted(cur)
    }
}
