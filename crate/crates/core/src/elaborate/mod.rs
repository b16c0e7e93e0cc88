//! Compiles complex patterns into nested simple matches.

pub mod chain;
mod resugar;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chain::{refine, sort, Builder};
pub use chain::{Access, Chain, Ledger, MatchId, Simple};
pub use resugar::resugar;

use crate::subst::{free_vars, pattern_vars, subst};
use crate::syntax::{Branch, Name, Pattern, RhsId, Span, Term, TermKind};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ElabError {
    #[error("variable `{name}` is bound twice in one pattern")]
    NonLinear { name: Name, first: Span, second: Span },
    #[error("{} pattern(s) can never match", branches.len())]
    Redundant { branches: Vec<Span> },
}

impl ElabError {
    pub fn span(&self) -> Span {
        match self {
            ElabError::NonLinear { second, .. } => *second,
            ElabError::Redundant { branches } => branches.first().copied().unwrap_or_default(),
        }
    }
}

/// A surface branch right-hand side and how many copies of it the elaborated term holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhsInfo {
    pub span: Span,
    pub count: i64,
}

#[derive(Clone, Debug)]
pub struct Elaborated {
    pub term: Term,
    pub rhs: BTreeMap<RhsId, RhsInfo>,
}

/// Elaborates terms while handing out program-wide fresh names and RHS ids.
#[derive(Default)]
pub struct Elaborator {
    fresh: u32,
    next_rhs: u32,
    pub rhs: BTreeMap<RhsId, RhsInfo>,
}

pub fn elaborate_term(t: &Term) -> Result<Elaborated, ElabError> {
    let mut e = Elaborator::default();
    let term = e.term(t)?;
    Ok(Elaborated { term, rhs: e.rhs })
}

/// Every variable in `p` bound at most once; `_` is exempt.
pub fn linearity_check(p: &Pattern) -> Result<(), ElabError> {
    fn walk(p: &Pattern, seen: &mut HashMap<Name, Span>) -> Result<(), ElabError> {
        match p {
            Pattern::Var(x, sp) => {
                if x == "_" {
                    return Ok(());
                }
                if let Some(first) = seen.insert(x.clone(), *sp) {
                    return Err(ElabError::NonLinear {
                        name: x.clone(),
                        first,
                        second: *sp,
                    });
                }
                Ok(())
            }
            Pattern::Label(_, Some(q), _) => walk(q, seen),
            Pattern::Label(_, None, _) => Ok(()),
            Pattern::Record(fs, _) => fs.iter().try_for_each(|(_, q)| walk(q, seen)),
        }
    }
    walk(p, &mut HashMap::new())
}

impl Elaborator {
    fn fresh(&mut self, prefix: &str) -> Name {
        self.fresh += 1;
        format!("#{prefix}{}", self.fresh)
    }

    /// Elaborates every match in `t`, innermost first.
    pub fn term(&mut self, t: &Term) -> Result<Term, ElabError> {
        match &t.kind {
            TermKind::Match(e, bs) => {
                let e = self.term(e)?;
                let mut branches = Vec::with_capacity(bs.len());
                for b in bs {
                    linearity_check(&b.pattern)?;
                    branches.push(Branch {
                        pattern: b.pattern.clone(),
                        body: self.term(&b.body)?,
                    });
                }
                self.match_(e, branches, t.span)
            }
            _ => t.try_map_children(&mut |c| self.term(c)),
        }
    }

    fn match_(&mut self, subject: Term, mut branches: Vec<Branch>, span: Span) -> Result<Term, ElabError> {
        if branches.is_empty() {
            return Ok(Term::new(TermKind::Void(Box::new(subject)), span));
        }
        let (x, wrap) = match &subject.kind {
            TermKind::Var(x) => (x.clone(), None),
            _ => {
                let s = self.fresh("s");
                (s.clone(), Some((s, subject.clone())))
            }
        };
        self.hygiene(&x, &mut branches);

        let mut ledger = Ledger::new();
        let mut chains = Vec::with_capacity(branches.len());
        let mut ids = Vec::with_capacity(branches.len());
        for b in &branches {
            let id = RhsId(self.next_rhs);
            self.next_rhs += 1;
            ledger.insert(id, 1);
            ids.push((id, b.pattern.span()));
            let mut builder = Builder {
                fresh: &mut self.fresh,
                ledger: &mut ledger,
            };
            let c = builder.expand(
                &MatchId(vec![0]),
                Access::var(&x),
                None,
                &b.pattern,
                Chain::Leaf(id, b.body.clone()),
            );
            chains.push(sort(c));
        }
        let mut builder = Builder {
            fresh: &mut self.fresh,
            ledger: &mut ledger,
        };
        let mut it = chains.into_iter();
        let first = it.next().expect("non-empty");
        let merged = it.fold(first, |a, b| builder.merge(a, b));
        let refined = refine(&[(x.clone(), Term::var(&x))], merged);
        debug_assert!({
            let mut counts = Ledger::new();
            refined.leaf_counts(&mut counts);
            ids.iter()
                .all(|(id, _)| counts.get(id).copied().unwrap_or(0) == builder.ledger[id])
        });
        let mut out = builder.desugar(refined, span);

        // copies of inner right-hand sides only carry deltas here
        for (id, delta) in &ledger {
            if let Some(info) = self.rhs.get_mut(id) {
                info.count += delta;
            }
        }
        let mut dead = Vec::new();
        for (id, sp) in ids {
            let count = ledger.get(&id).copied().unwrap_or(0);
            if count <= 0 {
                dead.push(sp);
            }
            self.rhs.insert(id, RhsInfo { span: sp, count });
        }
        if !dead.is_empty() {
            return Err(ElabError::Redundant { branches: dead });
        }
        if let Some((s, e)) = wrap {
            out = Term::new(TermKind::Let(s, Box::new(e), Box::new(out)), span);
        }
        Ok(out)
    }

    /// Renames pattern variables that would capture names used by other branches or the subject,
    /// and gives every `_` its own name.
    fn hygiene(&mut self, subject: &str, branches: &mut [Branch]) {
        let frees: Vec<BTreeSet<Name>> = branches.iter().map(|b| free_vars(&b.body)).collect();
        for (i, b) in branches.iter_mut().enumerate() {
            let mut vars = Vec::new();
            pattern_vars(&b.pattern, &mut vars);
            for v in vars {
                let clash = v == "_" || v == subject || frees.iter().enumerate().any(|(j, f)| j != i && f.contains(&v));
                if !clash {
                    continue;
                }
                let name = if v == "_" { self.fresh("w") } else { self.fresh(&v) };
                b.pattern = rename_once(&b.pattern, &v, &name, &mut false);
                if v != "_" {
                    b.body = subst(&b.body, &v, &Term::var(&name));
                }
            }
        }
    }
}

/// Renames the first binding occurrence of `from`.
fn rename_once(p: &Pattern, from: &str, to: &str, done: &mut bool) -> Pattern {
    match p {
        Pattern::Var(x, s) if x == from && !*done => {
            *done = true;
            Pattern::Var(to.to_string(), *s)
        }
        Pattern::Var(..) | Pattern::Label(_, None, _) => p.clone(),
        Pattern::Label(l, Some(q), s) => Pattern::Label(l.clone(), Some(Box::new(rename_once(q, from, to, done))), *s),
        Pattern::Record(fs, s) => Pattern::Record(
            fs.iter()
                .map(|(l, q)| (l.clone(), rename_once(q, from, to, done)))
                .collect(),
            *s,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subst::alpha_eq;
    use crate::syntax::{parse_term, term_to_block};

    const MAP_FUSION: &str = "lam expr = match expr with <
      App {Fun: App {Fun: Primitive Map | Arg: g} |
           Arg: App {Fun: App {Fun: Primitive Map | Arg: f} | Arg: xs}} =>
      Success (App {Fun: App {Fun: Primitive Map |
        Arg: Lam {Param: 0 | Body: App {Fun: g | Arg: App {Fun: f | Arg: Id {Name: 0}}}}} |
        Arg: xs}) >";

    #[test]
    fn map_fusion_cascade() {
        let got = resugar(&elaborate_term(&parse_term(MAP_FUSION).unwrap()).unwrap().term);
        let want = parse_term(
            "lam expr = match expr with <
              App #x1 => match #x1.Fun with <
                App #x2 => match #x2.Fun with <
                  Primitive #x3 => match #x3 with <
                    Map => match #x1.Arg with <
                      App #x4 => match #x4.Fun with <
                        App #x5 => match #x5.Fun with <
                          Primitive #x6 => match #x6 with <
                            Map => match #x2.Arg with <
                              g => match #x5.Arg with <
                                f => match #x4.Arg with <
                                  xs => Success (App {Fun: App {Fun: Primitive Map |
                                    Arg: Lam {Param: 0 | Body: App {Fun: g | Arg: App {Fun: f | Arg: Id {Name: 0}}}}} |
                                    Arg: xs}) >>>>>>>>>>>",
        )
        .unwrap();
        assert!(alpha_eq(&got, &want), "{}", term_to_block(&got));
    }

    #[test]
    fn nonlinear_pattern_is_rejected() {
        let t = parse_term("match s with < {A: x | B: x} => x >").unwrap();
        assert!(matches!(elaborate_term(&t), Err(ElabError::NonLinear { .. })));
    }

    #[test]
    fn shadowed_branch_is_redundant() {
        let t = parse_term("match s with < y => y | A => s >").unwrap();
        assert!(matches!(elaborate_term(&t), Err(ElabError::Redundant { .. })));
    }

    #[test]
    fn wildcards_may_repeat() {
        let t = parse_term("match s with < {A: _ | B: _} => s >").unwrap();
        assert!(elaborate_term(&t).is_ok());
    }
}
