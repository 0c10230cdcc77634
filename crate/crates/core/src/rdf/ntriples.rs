//! Line-oriented N-Triples reading and canonical writing.
//!
//! The grammar is deliberately small: one statement per line, `#` comments,
//! blank lines allowed. Canonical output is the statement lines sorted
//! bytewise ascending, each terminated with LF, which makes graph
//! fingerprints stable across runs and platforms.

use thiserror::Error;

use super::graph::Graph;
use super::term::{Term, Triple};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

/// Parse an N-Triples document. Triples come back in document order and
/// duplicate lines yield duplicate entries; dedup happens at graph insert.
pub fn parse_ntriples(text: &str) -> Result<Vec<Triple>, ParseError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_statement(line, line_no)?);
    }
    Ok(out)
}

fn parse_statement(line: &str, line_no: usize) -> Result<Triple, ParseError> {
    let mut cur = Cursor {
        chars: line.chars().collect(),
        pos: 0,
        line: line_no,
    };
    cur.skip_ws();
    let subject = cur.parse_term()?;
    if subject.is_literal() {
        return Err(ParseError::new(line_no, "literal in subject position"));
    }
    cur.skip_ws();
    let predicate = cur.parse_term()?;
    match &predicate {
        Term::Iri(_) => {}
        Term::Literal { .. } => {
            return Err(ParseError::new(line_no, "literal in predicate position"))
        }
        Term::Blank(_) => {
            return Err(ParseError::new(line_no, "blank node in predicate position"))
        }
    }
    cur.skip_ws();
    let object = cur.parse_term()?;
    cur.skip_ws();
    if cur.next() != Some('.') {
        return Err(ParseError::new(line_no, "expected '.' after object"));
    }
    cur.skip_ws();
    match cur.peek() {
        None => {}
        Some('#') => {} // trailing comment
        Some(c) => {
            return Err(ParseError::new(
                line_no,
                format!("unexpected {c:?} after statement terminator"),
            ))
        }
    }
    Triple::new(subject, predicate, object)
        .map_err(|e| ParseError::new(line_no, e.to_string()))
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c == ' ' || c == '\t') {
            self.pos += 1;
        }
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, message)
    }

    fn parse_term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some('<') => self.parse_iri(),
            Some('"') => self.parse_literal(),
            Some('_') => self.parse_blank(),
            Some(c) => Err(self.err(format!(
                "expected IRI, literal, or blank node, found {c:?}"
            ))),
            None => Err(self.err("unexpected end of statement")),
        }
    }

    fn parse_iri(&mut self) -> Result<Term, ParseError> {
        self.next(); // consume '<'
        let mut iri = String::new();
        loop {
            match self.next() {
                Some('>') => break,
                Some(c) => iri.push(c),
                None => return Err(self.err("unterminated IRI (missing '>')")),
            }
        }
        Term::iri(iri).map_err(|e| self.err(e.to_string()))
    }

    fn parse_blank(&mut self) -> Result<Term, ParseError> {
        self.next(); // consume '_'
        if self.next() != Some(':') {
            return Err(self.err("expected ':' after '_' in blank node"));
        }
        let mut label = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            label.push(self.next().unwrap());
        }
        Term::blank(label).map_err(|e| self.err(e.to_string()))
    }

    fn parse_literal(&mut self) -> Result<Term, ParseError> {
        self.next(); // consume '"'
        let mut lexical = String::new();
        loop {
            match self.next() {
                Some('"') => break,
                Some('\\') => lexical.push(self.parse_escape()?),
                Some(c) => lexical.push(c),
                None => return Err(self.err("unterminated literal (missing '\"')")),
            }
        }
        match self.peek() {
            Some('@') => {
                self.next();
                let mut lang = String::new();
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                    lang.push(self.next().unwrap());
                }
                if lang.is_empty() {
                    return Err(self.err("empty language tag"));
                }
                Ok(Term::literal_lang(lexical, lang))
            }
            Some('^') => {
                self.next();
                if self.next() != Some('^') {
                    return Err(self.err("expected '^^' before datatype IRI"));
                }
                if self.peek() != Some('<') {
                    return Err(self.err("expected '<' to open datatype IRI"));
                }
                let dt = self.parse_iri()?;
                let Term::Iri(dt) = dt else { unreachable!() };
                Term::literal_typed(lexical, dt).map_err(|e| self.err(e.to_string()))
            }
            _ => Ok(Term::literal(lexical)),
        }
    }

    fn parse_escape(&mut self) -> Result<char, ParseError> {
        match self.next() {
            Some('t') => Ok('\t'),
            Some('b') => Ok('\u{0008}'),
            Some('n') => Ok('\n'),
            Some('r') => Ok('\r'),
            Some('f') => Ok('\u{000C}'),
            Some('"') => Ok('"'),
            Some('\'') => Ok('\''),
            Some('\\') => Ok('\\'),
            Some('u') => self.parse_hex_escape(4),
            Some('U') => self.parse_hex_escape(8),
            Some(c) => Err(self.err(format!("unknown escape \\{c}"))),
            None => Err(self.err("dangling escape at end of line")),
        }
    }

    fn parse_hex_escape(&mut self, digits: usize) -> Result<char, ParseError> {
        let mut value: u32 = 0;
        for _ in 0..digits {
            let c = self
                .next()
                .ok_or_else(|| self.err("truncated \\u escape"))?;
            let d = c
                .to_digit(16)
                .ok_or_else(|| self.err(format!("bad hex digit {c:?} in \\u escape")))?;
            value = value
                .checked_mul(16)
                .and_then(|v| v.checked_add(d))
                .ok_or_else(|| self.err("\\U escape out of range"))?;
        }
        char::from_u32(value).ok_or_else(|| self.err(format!("\\u escape U+{value:X} is not a scalar value")))
    }
}

/// Serialize one triple as an N-Triples statement line (without newline).
pub fn serialize_triple(t: &Triple) -> String {
    t.to_string()
}

/// Canonical N-Triples: one line per triple, sorted bytewise ascending,
/// LF-terminated. The empty graph serializes to the empty document.
/// `parse_ntriples(canonical_serialize(g))` reproduces exactly g's triple set.
pub fn canonical_serialize(graph: &Graph) -> String {
    let mut lines: Vec<String> = graph.iter().iter().map(serialize_triple).collect();
    lines.sort_unstable();
    let mut out = String::new();
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}
