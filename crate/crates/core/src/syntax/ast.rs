use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

/// Source region, 1-based, end inclusive. The default span (all zeros) marks synthesized nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl Span {
    pub fn new(start: Pos, end: Pos) -> Span {
        Span { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        if self == Span::default() {
            return other;
        }
        if other == Span::default() {
            return self;
        }
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}-{}:{}",
            self.start.line, self.start.col, self.end.line, self.end.col
        )
    }
}

/// Variant tags and record fields. Numbers sort before names.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Num(u64),
    Name(String),
}

impl Label {
    pub fn name(s: &str) -> Label {
        Label::Name(s.to_string())
    }

    /// Accepts an uppercase-initial identifier or a decimal numeral (leading zeros dropped).
    pub fn parse(s: &str) -> Option<Label> {
        let first = s.chars().next()?;
        if first.is_ascii_digit() {
            if !s.chars().all(|c| c.is_ascii_digit()) {
                return None;
            }
            s.parse::<u64>().ok().map(Label::Num)
        } else if first.is_uppercase() && s.chars().all(|c| c.is_alphanumeric() || c == '_') {
            Some(Label::Name(s.to_string()))
        } else {
            None
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Num(n) => write!(f, "{n}"),
            Label::Name(s) => f.write_str(s),
        }
    }
}

pub type Name = String;

pub type LabelSet = BTreeSet<Label>;

/// Label-set descriptions for rows: `Pos(L)` allows exactly L, `Neg(L)` allows everything but L.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RowKind {
    Pos(LabelSet),
    Neg(LabelSet),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Type,
    Row(RowKind),
}

impl fmt::Display for RowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (neg, set) = match self {
            RowKind::Pos(s) => (false, s),
            RowKind::Neg(s) => (true, s),
        };
        if neg {
            f.write_str("~")?;
        }
        f.write_str("{")?;
        for (i, l) in set.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Type => f.write_str("*type*"),
            Kind::Row(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Pattern {
    Var(Name, Span),
    Label(Label, Option<Box<Pattern>>, Span),
    Record(Vec<(Label, Pattern)>, Span),
}

impl PartialEq for Pattern {
    fn eq(&self, other: &Pattern) -> bool {
        match (self, other) {
            (Pattern::Var(a, _), Pattern::Var(b, _)) => a == b,
            (Pattern::Label(a, p, _), Pattern::Label(b, q, _)) => a == b && p == q,
            (Pattern::Record(a, _), Pattern::Record(b, _)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Pattern {}

impl Pattern {
    pub fn span(&self) -> Span {
        match self {
            Pattern::Var(_, s) | Pattern::Label(_, _, s) | Pattern::Record(_, s) => *s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub pattern: Pattern,
    pub body: Term,
}

/// Identifies one right-hand side of a surface match across elaboration and inference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RhsId(pub u32);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermKind {
    Var(Name),
    App(Box<Term>, Box<Term>),
    Lam(Name, Box<Term>),
    Let(Name, Box<Term>, Box<Term>),
    Fix,
    Label(Label, Box<Term>),
    Record(Vec<(Label, Term)>),
    Access(Box<Term>, Label),
    Remove(Box<Term>, Label),
    Modify(Box<Term>, Vec<(Label, Term)>),
    Extend(Box<Term>, Vec<(Label, Term)>),
    /// Surface match over complex patterns; removed by elaboration.
    Match(Box<Term>, Vec<Branch>),
    /// `match e with < >`
    Void(Box<Term>),
    /// `match e with < {} => e1 >`, subject must be the empty record.
    Unit(Box<Term>, Box<Term>),
    /// `match e with < l x1 => e1 | x2 => e2 >`
    Case {
        subject: Box<Term>,
        label: Label,
        bind: Name,
        hit: Box<Term>,
        rest_var: Name,
        rest: Box<Term>,
    },
    /// Marks a right-hand side produced by elaboration; transparent to typing and printing.
    Tagged(RhsId, Box<Term>),
}

#[derive(Clone, Debug)]
pub struct Term {
    pub kind: TermKind,
    pub span: Span,
}

/// Structural equality ignores spans.
impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Term {}

impl Term {
    pub fn new(kind: TermKind, span: Span) -> Term {
        Term { kind, span }
    }

    pub fn synth(kind: TermKind) -> Term {
        Term {
            kind,
            span: Span::default(),
        }
    }

    pub fn var(name: &str) -> Term {
        Term::synth(TermKind::Var(name.to_string()))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::synth(TermKind::App(Box::new(f), Box::new(a)))
    }

    pub fn lam(x: &str, body: Term) -> Term {
        Term::synth(TermKind::Lam(x.to_string(), Box::new(body)))
    }

    pub fn let_in(x: &str, e1: Term, e2: Term) -> Term {
        Term::synth(TermKind::Let(x.to_string(), Box::new(e1), Box::new(e2)))
    }

    pub fn label(l: Label, e: Term) -> Term {
        Term::synth(TermKind::Label(l, Box::new(e)))
    }

    pub fn unit() -> Term {
        Term::synth(TermKind::Record(Vec::new()))
    }

    /// `L {}`
    pub fn tag(l: &str) -> Term {
        Term::label(Label::parse(l).expect("label"), Term::unit())
    }

    pub fn record(fields: Vec<(Label, Term)>) -> Term {
        Term::synth(TermKind::Record(fields))
    }

    pub fn case(subject: Term, label: Label, bind: &str, hit: Term, rest_var: &str, rest: Term) -> Term {
        Term::synth(TermKind::Case {
            subject: Box::new(subject),
            label,
            bind: bind.to_string(),
            hit: Box::new(hit),
            rest_var: rest_var.to_string(),
            rest: Box::new(rest),
        })
    }

    /// Drops elaboration tags, leaving a plain core term.
    pub fn erase_tags(&self) -> Term {
        self.map_children(&|t| t.erase_tags()).unwrap_tag()
    }

    fn unwrap_tag(self) -> Term {
        match self.kind {
            TermKind::Tagged(_, inner) => *inner,
            _ => self,
        }
    }

    /// Rebuilds the node with `f` applied to each immediate subterm.
    pub fn map_children(&self, f: &dyn Fn(&Term) -> Term) -> Term {
        let fields = |fs: &Vec<(Label, Term)>| fs.iter().map(|(l, e)| (l.clone(), f(e))).collect();
        let kind = match &self.kind {
            TermKind::Var(_) | TermKind::Fix => self.kind.clone(),
            TermKind::App(a, b) => TermKind::App(Box::new(f(a)), Box::new(f(b))),
            TermKind::Lam(x, b) => TermKind::Lam(x.clone(), Box::new(f(b))),
            TermKind::Let(x, a, b) => TermKind::Let(x.clone(), Box::new(f(a)), Box::new(f(b))),
            TermKind::Label(l, e) => TermKind::Label(l.clone(), Box::new(f(e))),
            TermKind::Record(fs) => TermKind::Record(fields(fs)),
            TermKind::Access(e, l) => TermKind::Access(Box::new(f(e)), l.clone()),
            TermKind::Remove(e, l) => TermKind::Remove(Box::new(f(e)), l.clone()),
            TermKind::Modify(e, fs) => TermKind::Modify(Box::new(f(e)), fields(fs)),
            TermKind::Extend(e, fs) => TermKind::Extend(Box::new(f(e)), fields(fs)),
            TermKind::Match(e, bs) => TermKind::Match(
                Box::new(f(e)),
                bs.iter()
                    .map(|b| Branch {
                        pattern: b.pattern.clone(),
                        body: f(&b.body),
                    })
                    .collect(),
            ),
            TermKind::Void(e) => TermKind::Void(Box::new(f(e))),
            TermKind::Unit(e, r) => TermKind::Unit(Box::new(f(e)), Box::new(f(r))),
            TermKind::Case {
                subject,
                label,
                bind,
                hit,
                rest_var,
                rest,
            } => TermKind::Case {
                subject: Box::new(f(subject)),
                label: label.clone(),
                bind: bind.clone(),
                hit: Box::new(f(hit)),
                rest_var: rest_var.clone(),
                rest: Box::new(f(rest)),
            },
            TermKind::Tagged(id, e) => TermKind::Tagged(*id, Box::new(f(e))),
        };
        Term::new(kind, self.span)
    }

    /// Like `map_children` but stops at the first error.
    pub fn try_map_children<E>(&self, f: &mut dyn FnMut(&Term) -> Result<Term, E>) -> Result<Term, E> {
        let fields = |fs: &Vec<(Label, Term)>, f: &mut dyn FnMut(&Term) -> Result<Term, E>| {
            fs.iter()
                .map(|(l, e)| Ok((l.clone(), f(e)?)))
                .collect::<Result<Vec<_>, E>>()
        };
        let kind = match &self.kind {
            TermKind::Var(_) | TermKind::Fix => self.kind.clone(),
            TermKind::App(a, b) => TermKind::App(Box::new(f(a)?), Box::new(f(b)?)),
            TermKind::Lam(x, b) => TermKind::Lam(x.clone(), Box::new(f(b)?)),
            TermKind::Let(x, a, b) => TermKind::Let(x.clone(), Box::new(f(a)?), Box::new(f(b)?)),
            TermKind::Label(l, e) => TermKind::Label(l.clone(), Box::new(f(e)?)),
            TermKind::Record(fs) => TermKind::Record(fields(fs, f)?),
            TermKind::Access(e, l) => TermKind::Access(Box::new(f(e)?), l.clone()),
            TermKind::Remove(e, l) => TermKind::Remove(Box::new(f(e)?), l.clone()),
            TermKind::Modify(e, fs) => TermKind::Modify(Box::new(f(e)?), fields(fs, f)?),
            TermKind::Extend(e, fs) => TermKind::Extend(Box::new(f(e)?), fields(fs, f)?),
            TermKind::Match(e, bs) => {
                let e = f(e)?;
                let mut out = Vec::with_capacity(bs.len());
                for b in bs {
                    out.push(Branch {
                        pattern: b.pattern.clone(),
                        body: f(&b.body)?,
                    });
                }
                TermKind::Match(Box::new(e), out)
            }
            TermKind::Void(e) => TermKind::Void(Box::new(f(e)?)),
            TermKind::Unit(e, r) => TermKind::Unit(Box::new(f(e)?), Box::new(f(r)?)),
            TermKind::Case {
                subject,
                label,
                bind,
                hit,
                rest_var,
                rest,
            } => TermKind::Case {
                subject: Box::new(f(subject)?),
                label: label.clone(),
                bind: bind.clone(),
                hit: Box::new(f(hit)?),
                rest_var: rest_var.clone(),
                rest: Box::new(f(rest)?),
            },
            TermKind::Tagged(id, e) => TermKind::Tagged(*id, Box::new(f(e)?)),
        };
        Ok(Term::new(kind, self.span))
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        let mut n = 1;
        self.for_each_child(&mut |c| n += c.size());
        n
    }

    pub fn for_each_child(&self, f: &mut dyn FnMut(&Term)) {
        match &self.kind {
            TermKind::Var(_) | TermKind::Fix => {}
            TermKind::App(a, b) | TermKind::Let(_, a, b) | TermKind::Unit(a, b) => {
                f(a);
                f(b)
            }
            TermKind::Lam(_, e)
            | TermKind::Label(_, e)
            | TermKind::Access(e, _)
            | TermKind::Remove(e, _)
            | TermKind::Void(e)
            | TermKind::Tagged(_, e) => f(e),
            TermKind::Record(fs) => fs.iter().for_each(|(_, e)| f(e)),
            TermKind::Modify(e, fs) | TermKind::Extend(e, fs) => {
                f(e);
                fs.iter().for_each(|(_, x)| f(x))
            }
            TermKind::Match(e, bs) => {
                f(e);
                bs.iter().for_each(|b| f(&b.body))
            }
            TermKind::Case { subject, hit, rest, .. } => {
                f(subject);
                f(hit);
                f(rest)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RowTail {
    /// `*`
    Empty,
    Var(Name),
    /// `|` with nothing after it: a fresh variable excluding the row's own labels.
    Fresh,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub fields: Vec<(Label, TypeExpr)>,
    pub tail: RowTail,
}

/// Field order is not significant.
impl PartialEq for Row {
    fn eq(&self, other: &Row) -> bool {
        self.tail == other.tail
            && self.fields.len() == other.fields.len()
            && self
                .fields
                .iter()
                .all(|(l, t)| other.fields.iter().any(|(m, u)| l == m && t == u))
    }
}

impl Eq for Row {}

impl Row {
    pub fn labels(&self) -> LabelSet {
        self.fields.iter().map(|(l, _)| l.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeExpr {
    Var(Name),
    Arrow(Box<TypeExpr>, Box<TypeExpr>),
    Record(Row),
    Variant(Row),
    /// `a as t`
    Rec(Name, Box<TypeExpr>),
    /// Reference to a declared alias, with arguments for its `forall` parameters.
    Alias(Name, Vec<TypeExpr>),
}

impl TypeExpr {
    pub fn arrow(a: TypeExpr, b: TypeExpr) -> TypeExpr {
        TypeExpr::Arrow(Box::new(a), Box::new(b))
    }

    pub fn var(s: &str) -> TypeExpr {
        TypeExpr::Var(s.to_string())
    }
}

/// A type as written in an annotation: explicit quantifiers plus `r: ~{...}` kind annotations.
#[derive(Clone, Debug)]
pub struct TypeAnnot {
    pub forall: Vec<Name>,
    pub kinds: Vec<(Name, RowKind)>,
    pub ty: TypeExpr,
    pub span: Span,
}

impl PartialEq for TypeAnnot {
    fn eq(&self, other: &TypeAnnot) -> bool {
        let mut a = self.kinds.clone();
        let mut b = other.kinds.clone();
        a.sort_by(|x, y| x.0.cmp(&y.0));
        b.sort_by(|x, y| x.0.cmp(&y.0));
        self.forall == other.forall && a == b && self.ty == other.ty
    }
}

impl Eq for TypeAnnot {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheme {
    pub vars: Vec<(Name, Kind)>,
    pub body: TypeExpr,
}

#[derive(Clone, Debug)]
pub enum Decl {
    Type {
        name: Name,
        annot: TypeAnnot,
        span: Span,
    },
    Let {
        name: Name,
        annot: Option<TypeAnnot>,
        body: Term,
        span: Span,
    },
}

impl PartialEq for Decl {
    fn eq(&self, other: &Decl) -> bool {
        match (self, other) {
            (Decl::Type { name: a, annot: x, .. }, Decl::Type { name: b, annot: y, .. }) => a == b && x == y,
            (
                Decl::Let {
                    name: a,
                    annot: x,
                    body: e,
                    ..
                },
                Decl::Let {
                    name: b,
                    annot: y,
                    body: f,
                    ..
                },
            ) => a == b && x == y && e == f,
            _ => false,
        }
    }
}

impl Eq for Decl {}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Type { name, .. } | Decl::Let { name, .. } => name,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Decl::Type { span, .. } | Decl::Let { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Program {
    pub decls: Vec<Decl>,
    pub main: Option<Term>,
}
