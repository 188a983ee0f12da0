//! Concrete syntax for formulas.
//!
//! ```text
//! formula := disj
//! disj    := conj ("|" conj)*
//! conj    := unit ("&" unit)*
//! unit    := "tt" | "ff" | PROP | "~" PROP | VAR
//!          | "->" "{" [disj ("," disj)*] "}"
//!          | ("mu" | "nu") VAR "." disj
//!          | "(" disj ")"
//! ```
//!
//! Propositions start with a lowercase letter, variables with an uppercase
//! one. A fixpoint body extends as far right as possible. `#` starts a comment.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::formula::Formula;

/// 1-based position of a token in the input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
}

impl ParseError {
    pub fn new(message: impl Into<String>, span: SourceSpan) -> Self {
        ParseError { message: message.into(), span }
    }

    pub fn at_line(message: impl Into<String>, line: usize, column: usize, length: usize) -> Self {
        ParseError::new(
            message,
            SourceSpan { line, column: column.max(1), length: length.max(1) },
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Prop(String),
    Var(String),
    Mu,
    Nu,
    True,
    False,
    Arrow,
    LBrace,
    RBrace,
    Comma,
    LParen,
    RParen,
    And,
    Or,
    Tilde,
    Dot,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Prop(p) => format!("proposition `{p}`"),
            Tok::Var(x) => format!("variable `{x}`"),
            Tok::Mu => "`mu`".into(),
            Tok::Nu => "`nu`".into(),
            Tok::True => "`tt`".into(),
            Tok::False => "`ff`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let span = |len: usize| SourceSpan { line: li + 1, column: i + 1, length: len };
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '#' {
                break;
            }
            if c.is_ascii_alphabetic() {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let sp = SourceSpan { line: li + 1, column: start + 1, length: i - start };
                let tok = match word.as_str() {
                    "mu" => Tok::Mu,
                    "nu" => Tok::Nu,
                    "tt" => Tok::True,
                    "ff" => Tok::False,
                    _ if c.is_ascii_uppercase() => Tok::Var(word),
                    _ => Tok::Prop(word),
                };
                out.push((tok, sp));
                continue;
            }
            let (tok, len) = match c {
                '-' if chars.get(i + 1) == Some(&'>') => (Tok::Arrow, 2),
                '{' => (Tok::LBrace, 1),
                '}' => (Tok::RBrace, 1),
                ',' => (Tok::Comma, 1),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '&' => (Tok::And, 1),
                '|' => (Tok::Or, 1),
                '~' => (Tok::Tilde, 1),
                '.' => (Tok::Dot, 1),
                other => return Err(ParseError::new(format!("unexpected character `{other}`"), span(1))),
            };
            out.push((tok, span(len)));
            i += len;
        }
    }
    let end = match out.last() {
        Some((_, sp)) => SourceSpan { line: sp.line, column: sp.column + sp.length, length: 1 },
        None => SourceSpan { line: 1, column: 1, length: 1 },
    };
    out.push((Tok::Eof, end));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected {}", want.describe())))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        ParseError::new(format!("{what}, found {}", self.peek().describe()), self.span())
    }

    fn disj(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.conj()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let r = self.conj()?;
            f = Formula::or(f, r);
        }
        Ok(f)
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unit()?;
        while *self.peek() == Tok::And {
            self.bump();
            let r = self.unit()?;
            f = Formula::and(f, r);
        }
        Ok(f)
    }

    fn unit(&mut self) -> Result<Formula, ParseError> {
        let start = self.pos;
        match self.bump() {
            Tok::True => Ok(Formula::Top),
            Tok::False => Ok(Formula::Bottom),
            Tok::Prop(p) => Ok(Formula::Prop(p)),
            Tok::Var(x) => Ok(Formula::Var(x)),
            Tok::Tilde => match self.bump() {
                Tok::Prop(p) => Ok(Formula::NegProp(p)),
                _ => {
                    self.pos = start + 1;
                    Err(self.unexpected("negation applies to propositions only; expected a proposition"))
                }
            },
            Tok::Arrow => {
                self.expect(Tok::LBrace)?;
                let mut members = BTreeSet::new();
                if *self.peek() != Tok::RBrace {
                    members.insert(self.disj()?);
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        members.insert(self.disj()?);
                    }
                }
                self.expect(Tok::RBrace)?;
                Ok(Formula::Modal(members))
            }
            t @ (Tok::Mu | Tok::Nu) => {
                let x = match self.peek().clone() {
                    Tok::Var(x) => {
                        self.bump();
                        x
                    }
                    _ => return Err(self.unexpected("expected an uppercase fixpoint variable")),
                };
                self.expect(Tok::Dot)?;
                let body = self.disj()?;
                Ok(if t == Tok::Mu { Formula::mu(&x, body) } else { Formula::nu(&x, body) })
            }
            Tok::LParen => {
                let f = self.disj()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            _ => {
                self.pos = start;
                Err(self.unexpected("expected a formula"))
            }
        }
    }
}

/// Parses a formula and alpha-renames clashing binders.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.disj()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("expected `&`, `|` or end of input"));
    }
    Ok(f.alpha_normalize())
}

const LVL_BINDER: u8 = 0;
const LVL_OR: u8 = 1;
const LVL_AND: u8 = 2;
const LVL_ATOM: u8 = 3;

fn level(f: &Formula) -> u8 {
    match f {
        Formula::Mu(..) | Formula::Nu(..) => LVL_BINDER,
        Formula::Or(..) => LVL_OR,
        Formula::And(..) => LVL_AND,
        _ => LVL_ATOM,
    }
}

fn write_at(out: &mut String, f: &Formula, min: u8) {
    let paren = level(f) < min;
    if paren {
        out.push('(');
    }
    match f {
        Formula::Top => out.push_str("tt"),
        Formula::Bottom => out.push_str("ff"),
        Formula::Prop(p) => out.push_str(p),
        Formula::NegProp(p) => {
            out.push('~');
            out.push_str(p);
        }
        Formula::Var(x) => out.push_str(x),
        Formula::Or(a, b) => {
            write_at(out, a, LVL_OR);
            out.push_str(" | ");
            write_at(out, b, LVL_AND);
        }
        Formula::And(a, b) => {
            write_at(out, a, LVL_AND);
            out.push_str(" & ");
            write_at(out, b, LVL_ATOM);
        }
        Formula::Modal(bs) => {
            out.push_str("->{");
            for (i, m) in bs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_at(out, m, LVL_BINDER);
            }
            out.push('}');
        }
        Formula::Mu(x, b) | Formula::Nu(x, b) => {
            out.push_str(if matches!(f, Formula::Mu(..)) { "mu " } else { "nu " });
            out.push_str(x);
            out.push_str(". ");
            write_at(out, b, LVL_BINDER);
        }
    }
    if paren {
        out.push(')');
    }
}

pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_at(&mut out, f, LVL_BINDER);
    out
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_reading() {
        let f = parse_formula("mu X. nu Y. (a & ->{X}) | (~a & ->{Y})").unwrap();
        let want = Formula::mu(
            "X",
            Formula::nu(
                "Y",
                Formula::or(
                    Formula::and(Formula::prop("a"), Formula::modal([Formula::var("X")])),
                    Formula::and(Formula::neg("a"), Formula::modal([Formula::var("Y")])),
                ),
            ),
        );
        assert_eq!(f, want);
    }

    #[test]
    fn binder_scope_swallows_trailing_disjunct() {
        let f = parse_formula("nu Y. ->{Y} & mu X. (~a & ->{X}) | a").unwrap();
        let want = Formula::nu(
            "Y",
            Formula::and(
                Formula::modal([Formula::var("Y")]),
                Formula::mu(
                    "X",
                    Formula::or(
                        Formula::and(Formula::neg("a"), Formula::modal([Formula::var("X")])),
                        Formula::prop("a"),
                    ),
                ),
            ),
        );
        assert_eq!(f, want);
    }

    #[test]
    fn empty_modality() {
        assert_eq!(parse_formula("->{}").unwrap(), Formula::Modal(BTreeSet::new()));
        assert_eq!(print_formula(&Formula::Modal(BTreeSet::new())), "->{}");
    }

    #[test]
    fn prints_binder() {
        assert_eq!(print_formula(&Formula::mu("X", Formula::modal([Formula::var("X")]))), "mu X. ->{X}");
    }

    #[test]
    fn errors_carry_spans() {
        let e = parse_formula("a &\n  | b").unwrap_err();
        assert_eq!((e.span.line, e.span.column), (2, 3));
        let e = parse_formula("mu x. ->{x}").unwrap_err();
        assert_eq!(e.span.column, 4);
        let e = parse_formula("~mu").unwrap_err();
        assert_eq!(e.span.column, 2);
        let e = parse_formula("a $ b").unwrap_err();
        assert_eq!(e.span.column, 3);
        assert!(parse_formula("(a").is_err());
        assert!(parse_formula("").is_err());
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(parse_formula("# header\na # trailing").unwrap(), Formula::prop("a"));
    }

    #[test]
    fn nested_precedence_round_trips() {
        for s in [
            "a | (b | c)",
            "(a | b) & c",
            "(mu X. ->{X}) & b",
            "a & (b & c)",
            "->{a | b, mu X. ->{X, tt}}",
        ] {
            let f = parse_formula(s).unwrap();
            assert_eq!(parse_formula(&print_formula(&f)).unwrap(), f, "{s}");
        }
    }
}
