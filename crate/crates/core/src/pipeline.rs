//! Whole-program checking: parse, elaborate and infer each declaration in order.

use std::fmt;

use crate::elaborate::{ElabError, Elaborator};
use crate::infer::{Infer, TypeError};
use crate::syntax::{parse, scheme_legend, Decl, Name, ParseError, Program, RowKind, Scheme, Span, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub span: Span,
    pub message: String,
    pub notes: Vec<String>,
}

impl Diagnostic {
    pub fn error(code: &'static str, span: Span, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            code,
            span,
            message: message.into(),
            notes: Vec::new(),
        }
    }

    pub fn warning(code: &'static str, span: Span, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(code, span, message)
        }
    }

    /// `CODE file:line:col-line:col message`
    pub fn render(&self, file: &str) -> String {
        let mut s = format!("{} {}:{} {}", self.code, file, self.span, self.message);
        for n in &self.notes {
            s.push_str("\n  note: ");
            s.push_str(n);
        }
        s
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.code, self.span, self.message)
    }
}

impl From<&ParseError> for Diagnostic {
    fn from(e: &ParseError) -> Diagnostic {
        let mut d = Diagnostic::error("E-PARSE", e.span, e.message.clone());
        if !e.expected.is_empty() {
            d.notes.push(format!("expected one of: {}", e.expected.join(", ")));
        }
        d
    }
}

impl From<&ElabError> for Diagnostic {
    fn from(e: &ElabError) -> Diagnostic {
        match e {
            ElabError::NonLinear { first, .. } => {
                let mut d = Diagnostic::error("E-NONLINEAR", e.span(), e.to_string());
                d.notes.push(format!("first bound at {first}"));
                d
            }
            ElabError::Redundant { branches } => {
                let mut d = Diagnostic::error("E-REDUNDANT", e.span(), e.to_string());
                d.notes.extend(branches.iter().skip(1).map(|s| format!("also at {s}")));
                d
            }
        }
    }
}

impl From<&TypeError> for Diagnostic {
    fn from(e: &TypeError) -> Diagnostic {
        Diagnostic::error(e.code(), e.span, e.message())
    }
}

/// Outcome for one `let` declaration or the trailing expression (named `it`).
#[derive(Clone, Debug)]
pub struct Binding {
    pub name: Name,
    pub span: Span,
    pub scheme: Option<Scheme>,
    /// The elaborated core term, tags still in place.
    pub core: Option<Term>,
}

impl Binding {
    pub fn kinds(&self) -> Vec<(Name, RowKind)> {
        self.scheme.as_ref().map(scheme_legend).unwrap_or_default()
    }
}

#[derive(Clone, Debug)]
pub struct Checked {
    pub program: Program,
    pub bindings: Vec<Binding>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Checked {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn get(&self, name: &str) -> Option<&Binding> {
        self.bindings.iter().rev().find(|b| b.name == name)
    }

    pub fn scheme(&self, name: &str) -> Option<&Scheme> {
        self.get(name)?.scheme.as_ref()
    }

    /// The program as one closed, tag-free term ending in the trailing expression.
    pub fn runnable(&self) -> Option<Term> {
        if self.has_errors() {
            return None;
        }
        let (main, decls) = self.bindings.split_last()?;
        if main.name != MAIN || self.program.main.is_none() {
            return None;
        }
        let mut t = main.core.as_ref()?.erase_tags();
        for b in decls.iter().rev() {
            t = Term::let_in(&b.name, b.core.as_ref()?.erase_tags(), t);
        }
        Some(t)
    }
}

pub const MAIN: &str = "it";

pub fn check_source(src: &str) -> Result<Checked, ParseError> {
    Ok(check_program(parse(src)?))
}

pub fn check_program(program: Program) -> Checked {
    let mut el = Elaborator::default();
    let mut inf = Infer::new();
    let mut bindings = Vec::new();
    let mut diagnostics = Vec::new();

    let mains = program.main.iter().map(|m| (MAIN.to_string(), None, m, m.span));
    let lets: Vec<_> = program
        .decls
        .iter()
        .filter_map(|d| match d {
            Decl::Type { name, annot, span } => {
                if let Err(e) = inf.aliases.define(name, annot.clone()) {
                    diagnostics.push(Diagnostic::error("E-KIND", *span, e.to_string()));
                }
                None
            }
            Decl::Let {
                name,
                annot,
                body,
                span,
            } => Some((name.clone(), annot.as_ref(), body, *span)),
        })
        .collect();

    for (name, annot, body, span) in lets.into_iter().chain(mains) {
        let mut binding = Binding {
            name: name.clone(),
            span,
            scheme: None,
            core: None,
        };
        let core = match el.term(body) {
            Ok(t) => t,
            Err(e) => {
                diagnostics.push((&e).into());
                inf.bind_any(&name);
                bindings.push(binding);
                continue;
            }
        };
        for (id, info) in &el.rhs {
            inf.ledger.entry(*id).or_insert_with(|| info.clone());
        }
        let dead_before = inf.dead.len();
        match inf.declaration(&core, annot) {
            Ok(t) => {
                for d in &inf.dead[dead_before..] {
                    diagnostics.push(Diagnostic::warning(
                        "E-DEAD-BRANCH",
                        d.span,
                        format!(
                            "a copy of this branch can never match label `{}` and was removed",
                            d.label
                        ),
                    ));
                }
                binding.scheme = Some(inf.store.export_scheme(t));
                binding.core = Some(core);
                inf.bind_global(&name, t);
            }
            Err(e) => {
                diagnostics.push((&e).into());
                inf.bind_any(&name);
            }
        }
        bindings.push(binding);
    }

    Checked {
        program,
        bindings,
        diagnostics,
    }
}
