//! Line-oriented text format for knowledge bases.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::concept::{AsPrimary, ConceptExpr};
use crate::kb::{is_reserved_individual, Assertion, KnowledgeBase, RigidInclusion, TypicalityInclusion};
use crate::number::{Degree, NumberError, Probability};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub snippet: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}\n  {}", self.line, self.column, self.message, self.snippet)
    }
}

const KEYWORDS: [&str; 7] = ["and", "or", "not", "some", "all", "top", "bot"];

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Le,
    DColon,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Number(s) => write!(f, "`{}`", s),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::DColon => f.write_str("`::`"),
            Tok::End => f.write_str("end of line"),
        }
    }
}

struct Failure {
    column: usize,
    message: String,
}

type Res<T> = Result<T, Failure>;

fn fail<T>(column: usize, message: impl Into<String>) -> Res<T> {
    Err(Failure { column, message: message.into() })
}

fn lex(line: &str) -> Res<Vec<(Tok, usize)>> {
    let bytes = line.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let col = i + 1;
        match c {
            b'#' => break,
            b' ' | b'\t' | b'\r' => i += 1,
            b'(' => {
                out.push((Tok::LParen, col));
                i += 1;
            }
            b')' => {
                out.push((Tok::RParen, col));
                i += 1;
            }
            b',' => {
                out.push((Tok::Comma, col));
                i += 1;
            }
            b'.' => {
                out.push((Tok::Dot, col));
                i += 1;
            }
            b'<' if bytes.get(i + 1) == Some(&b'=') => {
                out.push((Tok::Le, col));
                i += 2;
            }
            b':' if bytes.get(i + 1) == Some(&b':') => {
                out.push((Tok::DColon, col));
                i += 2;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'.' || bytes[i] == b'/')
                {
                    i += 1;
                }
                out.push((Tok::Number(line[start..i].into()), col));
            }
            c if c == b'_' || c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() && (bytes[i] == b'_' || bytes[i].is_ascii_alphanumeric()) {
                    i += 1;
                }
                out.push((Tok::Ident(line[start..i].into()), col));
            }
            _ => {
                let ch = line[i..].chars().next().unwrap_or('?');
                return fail(col, format!("unexpected character `{}`", ch));
            }
        }
    }
    out.push((Tok::End, line.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok) -> Res<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            fail(self.col(), format!("expected {}, found {}", t, self.peek()))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn name(&mut self, what: &str) -> Res<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            other => fail(self.col(), format!("expected {}, found {}", what, other)),
        }
    }

    fn concept(&mut self) -> Res<ConceptExpr> {
        let mut c = self.conj()?;
        while self.is_kw("or") {
            self.bump();
            c = ConceptExpr::or(c, self.conj()?);
        }
        Ok(c)
    }

    fn conj(&mut self) -> Res<ConceptExpr> {
        let mut c = self.unary()?;
        while self.is_kw("and") {
            self.bump();
            c = ConceptExpr::and(c, self.unary()?);
        }
        Ok(c)
    }

    fn unary(&mut self) -> Res<ConceptExpr> {
        if self.is_kw("not") {
            self.bump();
            return Ok(ConceptExpr::not(self.unary()?));
        }
        for (kw, universal) in [("some", false), ("all", true)] {
            if self.is_kw(kw) {
                self.bump();
                let role = self.name("role name")?;
                self.expect(Tok::Dot)?;
                let filler = self.unary()?;
                return Ok(if universal {
                    ConceptExpr::forall(&role, filler)
                } else {
                    ConceptExpr::exists(&role, filler)
                });
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Res<ConceptExpr> {
        if self.is_kw("top") {
            self.bump();
            return Ok(ConceptExpr::Top);
        }
        if self.is_kw("bot") {
            self.bump();
            return Ok(ConceptExpr::Bottom);
        }
        if *self.peek() == Tok::LParen {
            self.bump();
            let c = self.concept()?;
            self.expect(Tok::RParen)?;
            return Ok(c);
        }
        Ok(ConceptExpr::Atom(self.name("concept")?))
    }

    fn individual(&mut self) -> Res<String> {
        let col = self.col();
        let n = self.name("individual name")?;
        if is_reserved_individual(&n) {
            return fail(col, format!("individual name `{}` is reserved", n));
        }
        Ok(n)
    }

    fn end(&mut self) -> Res<()> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            fail(self.col(), format!("unexpected {}", self.peek()))
        }
    }

    fn degree(&mut self) -> Res<Degree> {
        let col = self.col();
        match self.bump() {
            Tok::Number(s) => Degree::parse(&s).map_err(|e| number_failure(col, &s, e)),
            other => fail(col, format!("expected degree, found {}", other)),
        }
    }

    fn statement(&mut self) -> Res<Statement> {
        if matches!(self.peek(), Tok::Number(_)) {
            let degree = self.degree()?;
            self.expect(Tok::DColon)?;
            self.typicality_tail(degree)
        } else if matches!(self.peek(), Tok::Ident(_))
            && *self.peek_at(1) == Tok::LParen
            && matches!(self.peek_at(2), Tok::Ident(_))
            && *self.peek_at(3) == Tok::Comma
        {
            let role = self.name("role name")?;
            self.expect(Tok::LParen)?;
            let s = self.individual()?;
            self.expect(Tok::Comma)?;
            let o = self.individual()?;
            self.expect(Tok::RParen)?;
            self.end()?;
            Ok(Statement::Assertion(Assertion::role(&role, &s, &o)))
        } else {
            let start = self.pos;
            let head = self.primary();
            if let (Ok(head), Tok::LParen) = (head, self.peek().clone()) {
                self.bump();
                let a = self.individual()?;
                if *self.peek() == Tok::Comma {
                    return fail(self.col(), "role assertions take a role name and two individuals");
                }
                self.expect(Tok::RParen)?;
                self.end()?;
                return Ok(Statement::Assertion(Assertion::concept(head, &a)));
            }
            self.pos = start;
            let lhs = self.concept()?;
            self.expect(Tok::Le)?;
            let rhs = self.concept()?;
            self.end()?;
            Ok(Statement::Rigid(RigidInclusion::new(lhs, rhs)))
        }
    }

    fn typicality_tail(&mut self, degree: Degree) -> Res<Statement> {
        match self.peek() {
            Tok::Ident(s) if s == "T" => {
                self.bump();
            }
            other => return fail(self.col(), format!("expected `T(`, found {}", other)),
        }
        self.expect(Tok::LParen)?;
        let subject = self.concept()?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::Le)?;
        let predicate = self.concept()?;
        self.end()?;
        Ok(Statement::Typical(TypicalityInclusion::new(degree, subject, predicate)))
    }
}

fn number_failure(col: usize, s: &str, e: NumberError) -> Failure {
    match e {
        NumberError::Syntax => Failure { column: col, message: format!("malformed number `{}`", s) },
        other => Failure { column: col, message: other.to_string() },
    }
}

enum Statement {
    Rigid(RigidInclusion),
    Typical(TypicalityInclusion),
    Assertion(Assertion),
}

fn parse_line(line: &str) -> Res<Option<Statement>> {
    let toks = lex(line)?;
    if toks.len() == 1 {
        return Ok(None);
    }
    Parser { toks, pos: 0 }.statement().map(Some)
}

fn error_at(lineno: usize, line: &str, f: Failure) -> ParseError {
    ParseError { line: lineno, column: f.column, message: f.message, snippet: line.trim_end().into() }
}

/// Parses a whole KB. Typicality ids follow textual order.
pub fn parse_kb(source: &str) -> Result<KnowledgeBase, ParseError> {
    let mut kb = KnowledgeBase::default();
    for (i, line) in source.lines().enumerate() {
        let lineno = i + 1;
        let stmt = parse_line(line).map_err(|f| error_at(lineno, line, f))?;
        let dup = |msg: &str| error_at(lineno, line, Failure { column: 1, message: msg.into() });
        match stmt {
            None => {}
            Some(Statement::Rigid(r)) => {
                if kb.rigid.contains(&r) {
                    return Err(dup("duplicate rigid inclusion"));
                }
                kb.rigid.push(r);
            }
            Some(Statement::Typical(t)) => {
                if kb.typical.iter().any(|x| x.subject == t.subject && x.predicate == t.predicate) {
                    return Err(dup("duplicate typicality inclusion"));
                }
                kb.typical.push(t);
            }
            Some(Statement::Assertion(a)) => kb.abox.push(a),
        }
    }
    kb.normalize();
    Ok(kb)
}

fn single<T>(source: &str, f: impl FnOnce(&mut Parser) -> Res<T>) -> Result<T, ParseError> {
    let run = || -> Res<T> {
        let mut p = Parser { toks: lex(source)?, pos: 0 };
        let v = f(&mut p)?;
        p.end()?;
        Ok(v)
    };
    run().map_err(|e| error_at(1, source, e))
}

pub fn parse_concept(source: &str) -> Result<ConceptExpr, ParseError> {
    single(source, |p| p.concept())
}

/// Parses `T(C) <= D`.
pub fn parse_typicality_query(source: &str) -> Result<(ConceptExpr, ConceptExpr), ParseError> {
    single(source, |p| {
        match p.peek() {
            Tok::Ident(s) if s == "T" => {
                p.bump();
            }
            other => return fail(p.col(), format!("expected `T(`, found {}", other)),
        }
        p.expect(Tok::LParen)?;
        let c = p.concept()?;
        p.expect(Tok::RParen)?;
        p.expect(Tok::Le)?;
        let d = p.concept()?;
        Ok((c, d))
    })
}

/// Parses `C(a)` into the concept and individual.
pub fn parse_concept_assertion(source: &str) -> Result<(ConceptExpr, String), ParseError> {
    single(source, |p| {
        let c = p.primary()?;
        p.expect(Tok::LParen)?;
        let a = p.individual()?;
        p.expect(Tok::RParen)?;
        Ok((c, a))
    })
}

/// Parses a facts file: one `p :: C(a)` or bare `C(a)` per line.
pub fn parse_facts(source: &str) -> Result<Vec<(Option<Probability>, ConceptExpr, String)>, ParseError> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let lineno = i + 1;
        let toks = lex(line).map_err(|f| error_at(lineno, line, f))?;
        if toks.len() == 1 {
            continue;
        }
        let mut p = Parser { toks, pos: 0 };
        let item = (|| -> Res<_> {
            let prior = if let Tok::Number(s) = p.peek().clone() {
                let col = p.col();
                p.bump();
                p.expect(Tok::DColon)?;
                Some(Probability::parse(&s).map_err(|e| number_failure(col, &s, e))?)
            } else {
                None
            };
            let c = p.primary()?;
            p.expect(Tok::LParen)?;
            let a = p.individual()?;
            p.expect(Tok::RParen)?;
            p.end()?;
            Ok((prior, c, a))
        })()
        .map_err(|f| error_at(lineno, line, f))?;
        out.push(item);
    }
    Ok(out)
}

pub fn format_rigid(r: &RigidInclusion) -> String {
    format!("{} <= {}", r.lhs, r.rhs)
}

pub fn format_typical(t: &TypicalityInclusion) -> String {
    format!("{} :: T({}) <= {}", t.degree, t.subject, t.predicate)
}

pub fn format_assertion(a: &Assertion) -> String {
    match a {
        Assertion::Concept { concept, individual } => format!("{}({})", AsPrimary(concept), individual),
        Assertion::Role { role, subject, object } => format!("{}({}, {})", role, subject, object),
    }
}

/// Canonical text: rigid inclusions, then typicality inclusions, then assertions.
pub fn serialize_kb(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    let lines = kb
        .rigid
        .iter()
        .map(format_rigid)
        .chain(kb.typical.iter().map(format_typical))
        .chain(kb.abox.iter().map(format_assertion));
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}
