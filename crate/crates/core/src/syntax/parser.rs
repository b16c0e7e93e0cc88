use std::collections::BTreeSet;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::ParseError;

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    allow_reserved: bool,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    pub fn new(src: &str, allow_reserved: bool) -> PResult<Parser> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            allow_reserved,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_end(&self) -> Pos {
        if self.pos == 0 {
            self.toks[0].span.start
        } else {
            self.toks[self.pos - 1].span.end
        }
    }

    fn since(&self, start: Pos) -> Span {
        Span::new(start, self.prev_end())
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err<T>(&self, expected: &[&str]) -> PResult<T> {
        let found = self.peek().describe();
        let msg = if expected.is_empty() {
            format!("unexpected {found}")
        } else {
            format!("expected {}, found {found}", expected.join(" or "))
        };
        Err(ParseError::new(
            self.span(),
            msg,
            expected.iter().map(|s| s.to_string()).collect(),
        ))
    }

    fn expect(&mut self, t: Tok) -> PResult<Token> {
        if self.peek() == &t {
            Ok(self.bump())
        } else {
            self.err(&[&format!("`{}`", t.text())])
        }
    }

    fn ident(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                if s.starts_with('#') && !self.allow_reserved {
                    return Err(ParseError::new(
                        self.span(),
                        format!("`{s}`: names starting with `#` are reserved"),
                        vec![],
                    ));
                }
                self.bump();
                Ok(s)
            }
            _ => self.err(&["identifier"]),
        }
    }

    fn label(&mut self) -> PResult<Label> {
        match self.peek().clone() {
            Tok::Upper(s) | Tok::Num(s) => {
                let sp = self.span();
                self.bump();
                Label::parse(&s).ok_or_else(|| ParseError::new(sp, format!("`{s}` is not a valid label"), vec![]))
            }
            _ => self.err(&["label"]),
        }
    }

    fn at_label(&self) -> bool {
        matches!(self.peek(), Tok::Upper(_) | Tok::Num(_))
    }

    // ---- programs ----

    pub fn program(&mut self) -> PResult<Program> {
        let mut prog = Program::default();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Type => prog.decls.push(self.type_decl()?),
                Tok::Let => {
                    let start = self.span().start;
                    self.bump();
                    let name = self.ident()?;
                    let annot = if self.eat(&Tok::Colon) {
                        Some(self.annot()?)
                    } else {
                        None
                    };
                    self.expect(Tok::Eq)?;
                    let body = self.expr()?;
                    if self.peek() == &Tok::In {
                        if annot.is_some() {
                            return self.err(&["a new declaration"]);
                        }
                        self.bump();
                        let rest = self.expr()?;
                        let sp = self.since(start);
                        prog.main = Some(Term::new(TermKind::Let(name, Box::new(body), Box::new(rest)), sp));
                        if self.peek() != &Tok::Eof {
                            return self.err(&["end of input"]);
                        }
                        break;
                    }
                    let span = self.since(start);
                    prog.decls.push(Decl::Let {
                        name,
                        annot,
                        body,
                        span,
                    });
                }
                _ => {
                    prog.main = Some(self.expr()?);
                    if self.peek() != &Tok::Eof {
                        return self.err(&["`let`", "`type`", "end of input"]);
                    }
                    break;
                }
            }
        }
        Ok(prog)
    }

    fn type_decl(&mut self) -> PResult<Decl> {
        let start = self.span().start;
        self.expect(Tok::Type)?;
        let name = match self.peek().clone() {
            Tok::Upper(s) => {
                self.bump();
                s
            }
            _ => return self.err(&["type name"]),
        };
        self.expect(Tok::Eq)?;
        let annot = self.annot()?;
        Ok(Decl::Type {
            name,
            annot,
            span: self.since(start),
        })
    }

    // ---- terms ----

    pub fn expr(&mut self) -> PResult<Term> {
        let start = self.span().start;
        match self.peek() {
            Tok::Lam => {
                self.bump();
                let x = self.ident()?;
                self.expect(Tok::Eq)?;
                let body = self.expr()?;
                Ok(Term::new(TermKind::Lam(x, Box::new(body)), self.since(start)))
            }
            Tok::Let => {
                self.bump();
                let x = self.ident()?;
                self.expect(Tok::Eq)?;
                let e1 = self.expr()?;
                self.expect(Tok::In)?;
                let e2 = self.expr()?;
                Ok(Term::new(
                    TermKind::Let(x, Box::new(e1), Box::new(e2)),
                    self.since(start),
                ))
            }
            _ => self.app(),
        }
    }

    fn starts_arg(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::Upper(_) | Tok::Num(_) | Tok::LParen | Tok::LBrace | Tok::Fix | Tok::Match
        )
    }

    /// A token in the first column starts a new declaration, never an argument.
    fn continues_arg(&self) -> bool {
        self.starts_arg() && self.span().start.col != 1
    }

    fn app(&mut self) -> PResult<Term> {
        let start = self.span().start;
        if !self.starts_arg() {
            return self.err(&["expression"]);
        }
        let mut f = self.arg()?;
        while self.continues_arg() {
            let a = self.arg()?;
            f = Term::new(TermKind::App(Box::new(f), Box::new(a)), self.since(start));
        }
        Ok(f)
    }

    /// Application argument: a postfix expression, or a label applied to one.
    fn arg(&mut self) -> PResult<Term> {
        if self.at_label() {
            let start = self.span().start;
            let l = self.label()?;
            let payload = if self.continues_arg() {
                self.arg()?
            } else {
                Term::new(TermKind::Record(Vec::new()), self.since(start))
            };
            return Ok(Term::new(TermKind::Label(l, Box::new(payload)), self.since(start)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Term> {
        let start = self.span().start;
        let mut e = self.atom()?;
        while self.peek() == &Tok::Dot {
            self.bump();
            let kind = match self.peek() {
                Tok::Minus => {
                    self.bump();
                    TermKind::Remove(Box::new(e), self.label()?)
                }
                Tok::Plus => {
                    self.bump();
                    let fs = self.fields()?;
                    TermKind::Extend(Box::new(e), fs)
                }
                Tok::LBrace => {
                    let fs = self.fields()?;
                    TermKind::Modify(Box::new(e), fs)
                }
                _ if self.at_label() => TermKind::Access(Box::new(e), self.label()?),
                _ => return self.err(&["label", "`-`", "`+`", "`{`"]),
            };
            e = Term::new(kind, self.since(start));
        }
        Ok(e)
    }

    fn atom(&mut self) -> PResult<Term> {
        let start = self.span().start;
        match self.peek().clone() {
            Tok::Ident(_) => {
                let x = self.ident()?;
                Ok(Term::new(TermKind::Var(x), self.since(start)))
            }
            Tok::Fix => {
                self.bump();
                Ok(Term::new(TermKind::Fix, self.since(start)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::LBrace => {
                let fs = self.fields()?;
                Ok(Term::new(TermKind::Record(fs), self.since(start)))
            }
            Tok::Match => {
                self.bump();
                let subject = self.expr()?;
                self.expect(Tok::With)?;
                self.expect(Tok::LAngle)?;
                let mut branches = Vec::new();
                if self.peek() != &Tok::RAngle {
                    loop {
                        let pattern = self.pattern()?;
                        self.expect(Tok::FatArrow)?;
                        let body = self.expr()?;
                        branches.push(Branch { pattern, body });
                        if !self.eat(&Tok::Bar) {
                            break;
                        }
                    }
                }
                self.expect(Tok::RAngle)?;
                Ok(Term::new(
                    TermKind::Match(Box::new(subject), branches),
                    self.since(start),
                ))
            }
            _ => self.err(&["expression"]),
        }
    }

    /// `{ l: e | ... }` with distinct labels.
    fn fields(&mut self) -> PResult<Vec<(Label, Term)>> {
        self.expect(Tok::LBrace)?;
        let mut out: Vec<(Label, Term)> = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Ok(out);
        }
        loop {
            let sp = self.span();
            let l = self.label()?;
            if out.iter().any(|(m, _)| *m == l) {
                return Err(ParseError::new(sp, format!("duplicate label `{l}` in record"), vec![]));
            }
            self.expect(Tok::Colon)?;
            let e = self.expr()?;
            out.push((l, e));
            if !self.eat(&Tok::Bar) {
                break;
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(out)
    }

    // ---- patterns ----

    pub fn pattern(&mut self) -> PResult<Pattern> {
        let start = self.span().start;
        if self.at_label() {
            let l = self.label()?;
            let arg = if matches!(
                self.peek(),
                Tok::Ident(_) | Tok::Upper(_) | Tok::Num(_) | Tok::LBrace | Tok::LParen
            ) {
                Some(Box::new(self.pattern()?))
            } else {
                None
            };
            return Ok(Pattern::Label(l, arg, self.since(start)));
        }
        match self.peek() {
            Tok::Ident(_) => {
                let x = self.ident()?;
                Ok(Pattern::Var(x, self.since(start)))
            }
            Tok::LParen => {
                self.bump();
                let p = self.pattern()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::LBrace => {
                self.bump();
                let mut fs: Vec<(Label, Pattern)> = Vec::new();
                if !self.eat(&Tok::RBrace) {
                    loop {
                        let sp = self.span();
                        let l = self.label()?;
                        if fs.iter().any(|(m, _)| *m == l) {
                            return Err(ParseError::new(
                                sp,
                                format!("duplicate label `{l}` in record pattern"),
                                vec![],
                            ));
                        }
                        self.expect(Tok::Colon)?;
                        let p = self.pattern()?;
                        fs.push((l, p));
                        if !self.eat(&Tok::Bar) {
                            break;
                        }
                    }
                    self.expect(Tok::RBrace)?;
                }
                Ok(Pattern::Record(fs, self.since(start)))
            }
            _ => self.err(&["pattern"]),
        }
    }

    // ---- types ----

    pub fn annot(&mut self) -> PResult<TypeAnnot> {
        let start = self.span().start;
        let mut forall = Vec::new();
        if self.eat(&Tok::Forall) {
            while let Tok::Ident(_) = self.peek() {
                forall.push(self.ident()?);
            }
            if forall.is_empty() {
                return self.err(&["type variable"]);
            }
            self.expect(Tok::Dot)?;
        }
        let mut kinds = Vec::new();
        let ty = self.ty(&mut kinds)?;
        Ok(TypeAnnot {
            forall,
            kinds,
            ty,
            span: self.since(start),
        })
    }

    fn ty(&mut self, kinds: &mut Vec<(Name, RowKind)>) -> PResult<TypeExpr> {
        if matches!(self.peek(), Tok::Ident(_)) && self.peek_at(1) == &Tok::As {
            let a = self.ident()?;
            self.bump();
            let body = self.ty(kinds)?;
            return Ok(TypeExpr::Rec(a, Box::new(body)));
        }
        let lhs = self.ty_app(kinds)?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.ty(kinds)?;
            return Ok(TypeExpr::arrow(lhs, rhs));
        }
        Ok(lhs)
    }

    fn ty_app(&mut self, kinds: &mut Vec<(Name, RowKind)>) -> PResult<TypeExpr> {
        if let Tok::Upper(n) = self.peek().clone() {
            self.bump();
            let mut args = Vec::new();
            loop {
                match self.peek().clone() {
                    Tok::Upper(m) => {
                        self.bump();
                        args.push(TypeExpr::Alias(m, Vec::new()));
                    }
                    Tok::Ident(_) | Tok::LParen | Tok::LBrace | Tok::LAngle => args.push(self.ty_atom(kinds)?),
                    _ => break,
                }
            }
            return Ok(TypeExpr::Alias(n, args));
        }
        self.ty_atom(kinds)
    }

    fn ty_atom(&mut self, kinds: &mut Vec<(Name, RowKind)>) -> PResult<TypeExpr> {
        match self.peek().clone() {
            Tok::Ident(_) => Ok(TypeExpr::Var(self.ident()?)),
            Tok::Upper(n) => {
                self.bump();
                Ok(TypeExpr::Alias(n, Vec::new()))
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty(kinds)?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LBrace => {
                self.bump();
                let r = self.row(kinds, Tok::RBrace)?;
                Ok(TypeExpr::Record(r))
            }
            Tok::LAngle => {
                self.bump();
                let r = self.row(kinds, Tok::RAngle)?;
                Ok(TypeExpr::Variant(r))
            }
            _ => self.err(&["type"]),
        }
    }

    fn row(&mut self, kinds: &mut Vec<(Name, RowKind)>, close: Tok) -> PResult<Row> {
        let mut fields: Vec<(Label, TypeExpr)> = Vec::new();
        let tail;
        loop {
            if self.peek() == &close {
                // `{}` and `<>` are closed; a trailing `|` before the bracket is the implicit tail.
                tail = if self.toks[self.pos - 1].tok == Tok::Bar {
                    RowTail::Fresh
                } else {
                    RowTail::Empty
                };
                break;
            }
            if self.eat(&Tok::Star) {
                tail = RowTail::Empty;
                break;
            }
            if let Tok::Ident(_) = self.peek() {
                let r = self.ident()?;
                if self.eat(&Tok::Colon) {
                    let sp = self.span();
                    let k = self.row_kind()?;
                    match kinds.iter().find(|(n, _)| *n == r) {
                        Some((_, old)) if *old != k => {
                            return Err(ParseError::new(
                                sp,
                                format!("conflicting kind annotations for `{r}`"),
                                vec![],
                            ))
                        }
                        Some(_) => {}
                        None => kinds.push((r.clone(), k)),
                    }
                }
                tail = RowTail::Var(r);
                break;
            }
            let sp = self.span();
            let l = self.label()?;
            if fields.iter().any(|(m, _)| *m == l) {
                return Err(ParseError::new(sp, format!("duplicate label `{l}` in row"), vec![]));
            }
            self.expect(Tok::Colon)?;
            let t = self.ty(kinds)?;
            fields.push((l, t));
            if !self.eat(&Tok::Bar) {
                tail = RowTail::Empty;
                break;
            }
        }
        self.expect(close)?;
        Ok(Row { fields, tail })
    }

    fn row_kind(&mut self) -> PResult<RowKind> {
        let neg = self.eat(&Tok::Tilde);
        self.expect(Tok::LBrace)?;
        let mut set = BTreeSet::new();
        if !self.eat(&Tok::RBrace) {
            loop {
                set.insert(self.label()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RBrace)?;
        }
        Ok(if neg { RowKind::Neg(set) } else { RowKind::Pos(set) })
    }

    pub fn finish(&self) -> PResult<()> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            self.err(&["end of input"])
        }
    }
}
