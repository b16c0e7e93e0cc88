//! Surface syntax: lexer, parser and printers.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;

pub use ast::*;
pub use pretty::*;

use parser::Parser;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: Span,
    pub message: String,
    /// Token descriptions that would have been accepted.
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn new(span: Span, message: impl Into<String>, expected: Vec<String>) -> ParseError {
        ParseError {
            span,
            message: message.into(),
            expected,
        }
    }
}

pub fn parse(src: &str) -> Result<Program, ParseError> {
    Parser::new(src, false)?.program()
}

/// Like [`parse`] but accepts `#`-prefixed names, as printed by elaboration.
pub fn parse_elaborated(src: &str) -> Result<Program, ParseError> {
    Parser::new(src, true)?.program()
}

pub fn parse_type(src: &str) -> Result<TypeAnnot, ParseError> {
    let mut p = Parser::new(src, false)?;
    let t = p.annot()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src, true)?;
    let t = p.expr()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_pattern(src: &str) -> Result<Pattern, ParseError> {
    let mut p = Parser::new(src, false)?;
    let t = p.pattern()?;
    p.finish()?;
    Ok(t)
}
