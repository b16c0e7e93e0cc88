use super::ast::{Pos, Span};
use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    /// Lowercase-initial identifier, or a reserved `#name`.
    Ident(String),
    /// Uppercase-initial identifier.
    Upper(String),
    Num(String),
    Lam,
    Let,
    In,
    Match,
    With,
    Fix,
    Type,
    Forall,
    As,
    Eq,
    FatArrow,
    Arrow,
    Colon,
    Bar,
    LAngle,
    RAngle,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Dot,
    Minus,
    Plus,
    Tilde,
    Star,
    Comma,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Upper(s) | Tok::Num(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    pub fn text(&self) -> &'static str {
        match self {
            Tok::Lam => "lam",
            Tok::Let => "let",
            Tok::In => "in",
            Tok::Match => "match",
            Tok::With => "with",
            Tok::Fix => "fix",
            Tok::Type => "type",
            Tok::Forall => "forall",
            Tok::As => "as",
            Tok::Eq => "=",
            Tok::FatArrow => "=>",
            Tok::Arrow => "->",
            Tok::Colon => ":",
            Tok::Bar => "|",
            Tok::LAngle => "<",
            Tok::RAngle => ">",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Dot => ".",
            Tok::Minus => "-",
            Tok::Plus => "+",
            Tok::Tilde => "~",
            Tok::Star => "*",
            Tok::Comma => ",",
            Tok::Ident(_) => "identifier",
            Tok::Upper(_) => "label",
            Tok::Num(_) => "number",
            Tok::Eof => "end of input",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let (mut line, mut col) = (1u32, 1u32);
    let advance = |i: &mut usize, line: &mut u32, col: &mut u32| {
        let c = chars[*i];
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col);
            }
            continue;
        }
        let start = Pos { line, col };
        let mut last = start;
        let tok = if c.is_alphabetic() || c == '_' || c == '#' {
            let mut s = String::new();
            s.push(c);
            advance(&mut i, &mut line, &mut col);
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                s.push(chars[i]);
                last = Pos { line, col };
                advance(&mut i, &mut line, &mut col);
            }
            if c == '#' && s.len() == 1 {
                return Err(ParseError::new(
                    Span::new(start, start),
                    "expected a name after `#`",
                    vec![],
                ));
            }
            match s.as_str() {
                "lam" => Tok::Lam,
                "let" => Tok::Let,
                "in" => Tok::In,
                "match" => Tok::Match,
                "with" => Tok::With,
                "fix" => Tok::Fix,
                "type" => Tok::Type,
                "forall" => Tok::Forall,
                "as" => Tok::As,
                _ if c.is_uppercase() => Tok::Upper(s),
                _ => Tok::Ident(s),
            }
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                last = Pos { line, col };
                advance(&mut i, &mut line, &mut col);
            }
            Tok::Num(s)
        } else {
            let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let (tok, len) = match two.as_str() {
                "=>" => (Tok::FatArrow, 2),
                "->" => (Tok::Arrow, 2),
                _ => (
                    match c {
                        '=' => Tok::Eq,
                        ':' => Tok::Colon,
                        '|' => Tok::Bar,
                        '<' => Tok::LAngle,
                        '>' => Tok::RAngle,
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        '.' => Tok::Dot,
                        '-' => Tok::Minus,
                        '+' => Tok::Plus,
                        '~' => Tok::Tilde,
                        '*' => Tok::Star,
                        ',' => Tok::Comma,
                        '\u{ac}' => Tok::Tilde,
                        _ => {
                            return Err(ParseError::new(
                                Span::new(start, start),
                                format!("unexpected character `{c}`"),
                                vec![],
                            ))
                        }
                    },
                    1,
                ),
            };
            for _ in 0..len {
                last = Pos { line, col };
                advance(&mut i, &mut line, &mut col);
            }
            tok
        };
        out.push(Token {
            tok,
            span: Span::new(start, last),
        });
    }
    let end = Pos { line, col };
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(end, end),
    });
    Ok(out)
}
