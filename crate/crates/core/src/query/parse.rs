//! Parser for the SPARQL subset: `PREFIX` declarations, then
//! `SELECT (DISTINCT)? (?vars | *) WHERE { patterns FILTER(...)...}`.
//! Filters are equality/inequality between a variable and a constant term.
//! `#` comments run to end of line. Keywords are case-insensitive.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::rdf::{Slot, Term, TriplePattern};

use super::{Filter, FilterOp, Projection, Query};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {col}: {message}")]
pub struct QueryParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl QueryParseError {
    fn at(pos: Pos, message: impl Into<String>) -> QueryParseError {
        QueryParseError {
            line: pos.line,
            col: pos.col,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),            // keyword or bare identifier
    Var(String),             // ?name, stored without '?'
    Iri(String),             // <...>, raw
    Pname(String, String),   // prefix, local
    Literal {
        lexical: String,
        lang: Option<String>,
        // datatype as written: either raw IRI or prefixed name
        dt_iri: Option<String>,
        dt_pname: Option<(String, String)>,
    },
    Star,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Dot,
    Eq,
    Ne,
}

struct Lexer {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
}

impl Lexer {
    fn new(src: &str) -> Lexer {
        Lexer {
            chars: src.chars().collect(),
            i: 0,
            line: 1,
            col: 1,
        }
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.i).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
    }

    fn err(&self, message: impl Into<String>) -> QueryParseError {
        QueryParseError::at(self.pos(), message)
    }

    fn tokens(mut self) -> Result<Vec<(Tok, Pos)>, QueryParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let pos = self.pos();
            let Some(c) = self.peek() else { break };
            let tok = match c {
                '{' => {
                    self.bump();
                    Tok::LBrace
                }
                '}' => {
                    self.bump();
                    Tok::RBrace
                }
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                '.' => {
                    self.bump();
                    Tok::Dot
                }
                '*' => {
                    self.bump();
                    Tok::Star
                }
                '=' => {
                    self.bump();
                    Tok::Eq
                }
                '!' => {
                    self.bump();
                    if self.peek() == Some('=') {
                        self.bump();
                        Tok::Ne
                    } else {
                        return Err(QueryParseError::at(pos, "expected '=' after '!'"));
                    }
                }
                '?' => {
                    self.bump();
                    let name = self.take_name()?;
                    Tok::Var(name)
                }
                '<' => {
                    self.bump();
                    let mut iri = String::new();
                    loop {
                        match self.bump() {
                            Some('>') => break,
                            Some(c) => iri.push(c),
                            None => return Err(QueryParseError::at(pos, "unterminated IRI")),
                        }
                    }
                    Tok::Iri(iri)
                }
                '"' => self.lex_literal(pos)?,
                c if c.is_ascii_alphabetic() || c == '_' || c == ':' => self.lex_word_or_pname()?,
                c => return Err(QueryParseError::at(pos, format!("unexpected character {c:?}"))),
            };
            out.push((tok, pos));
        }
        Ok(out)
    }

    fn take_name(&mut self) -> Result<String, QueryParseError> {
        let mut name = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            name.push(self.bump().unwrap());
        }
        if name.is_empty() {
            return Err(self.err("expected a name"));
        }
        Ok(name)
    }

    /// A bare word (`SELECT`, `WHERE`, ...) or a prefixed name (`rdfs:label`,
    /// `:BiologicalProperty`). Local names use `[A-Za-z0-9_-]`, no dots.
    fn lex_word_or_pname(&mut self) -> Result<Tok, QueryParseError> {
        let mut head = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            head.push(self.bump().unwrap());
        }
        if self.peek() == Some(':') {
            self.bump();
            let mut local = String::new();
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                local.push(self.bump().unwrap());
            }
            Ok(Tok::Pname(head, local))
        } else if head.is_empty() {
            Err(self.err("expected a word"))
        } else {
            Ok(Tok::Word(head))
        }
    }

    fn lex_literal(&mut self, pos: Pos) -> Result<Tok, QueryParseError> {
        self.bump(); // opening quote
        let mut lexical = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('t') => lexical.push('\t'),
                    Some('n') => lexical.push('\n'),
                    Some('r') => lexical.push('\r'),
                    Some('"') => lexical.push('"'),
                    Some('\\') => lexical.push('\\'),
                    Some(c) => {
                        return Err(QueryParseError::at(pos, format!("unknown escape \\{c}")))
                    }
                    None => return Err(QueryParseError::at(pos, "unterminated literal")),
                },
                Some(c) => lexical.push(c),
                None => return Err(QueryParseError::at(pos, "unterminated literal")),
            }
        }
        let mut lang = None;
        let mut dt_iri = None;
        let mut dt_pname = None;
        match self.peek() {
            Some('@') => {
                self.bump();
                let mut tag = String::new();
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                    tag.push(self.bump().unwrap());
                }
                if tag.is_empty() {
                    return Err(QueryParseError::at(pos, "empty language tag"));
                }
                lang = Some(tag);
            }
            Some('^') => {
                self.bump();
                if self.bump() != Some('^') {
                    return Err(QueryParseError::at(pos, "expected '^^' before datatype"));
                }
                match self.peek() {
                    Some('<') => {
                        self.bump();
                        let mut iri = String::new();
                        loop {
                            match self.bump() {
                                Some('>') => break,
                                Some(c) => iri.push(c),
                                None => {
                                    return Err(QueryParseError::at(pos, "unterminated datatype IRI"))
                                }
                            }
                        }
                        dt_iri = Some(iri);
                    }
                    _ => match self.lex_word_or_pname()? {
                        Tok::Pname(p, l) => dt_pname = Some((p, l)),
                        _ => {
                            return Err(QueryParseError::at(
                                pos,
                                "expected datatype IRI or prefixed name after '^^'",
                            ))
                        }
                    },
                }
            }
            _ => {}
        }
        Ok(Tok::Literal {
            lexical,
            lang,
            dt_iri,
            dt_pname,
        })
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    prefixes: BTreeMap<String, String>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks
            .get(self.i)
            .or_else(|| self.toks.last())
            .map(|(_, p)| *p)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    fn bump(&mut self) -> Option<(Tok, Pos)> {
        let t = self.toks.get(self.i).cloned();
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>) -> QueryParseError {
        QueryParseError::at(self.pos(), message)
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), QueryParseError> {
        match self.bump() {
            Some((Tok::Word(w), _)) if w.eq_ignore_ascii_case(kw) => Ok(()),
            Some((_, pos)) => Err(QueryParseError::at(pos, format!("expected {kw}"))),
            None => Err(self.err(format!("expected {kw}, found end of input"))),
        }
    }

    fn keyword_is(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn expand(&self, prefix: &str, local: &str, pos: Pos) -> Result<Term, QueryParseError> {
        let ns = self.prefixes.get(prefix).ok_or_else(|| {
            QueryParseError::at(pos, format!("undeclared prefix: {prefix}:"))
        })?;
        Term::iri(format!("{ns}{local}")).map_err(|e| QueryParseError::at(pos, e.to_string()))
    }

    fn term_from(&self, tok: Tok, pos: Pos) -> Result<Term, QueryParseError> {
        match tok {
            Tok::Iri(iri) => Term::iri(iri).map_err(|e| QueryParseError::at(pos, e.to_string())),
            Tok::Pname(p, l) => self.expand(&p, &l, pos),
            Tok::Literal {
                lexical,
                lang,
                dt_iri,
                dt_pname,
            } => {
                if let Some(lang) = lang {
                    Ok(Term::literal_lang(lexical, lang))
                } else if let Some(iri) = dt_iri {
                    Term::literal_typed(lexical, iri)
                        .map_err(|e| QueryParseError::at(pos, e.to_string()))
                } else if let Some((p, l)) = dt_pname {
                    let dt = self.expand(&p, &l, pos)?;
                    let Term::Iri(dt) = dt else { unreachable!() };
                    Term::literal_typed(lexical, dt)
                        .map_err(|e| QueryParseError::at(pos, e.to_string()))
                } else {
                    Ok(Term::literal(lexical))
                }
            }
            Tok::Word(w) => Err(QueryParseError::at(
                pos,
                format!("expected a term, found {w:?}"),
            )),
            other => Err(QueryParseError::at(
                pos,
                format!("expected a term, found {other:?}"),
            )),
        }
    }

    /// One slot of a triple pattern: variable or constant term.
    fn slot(&mut self) -> Result<(Slot, Pos), QueryParseError> {
        match self.bump() {
            Some((Tok::Var(v), pos)) => Ok((Slot::Var(v), pos)),
            Some((tok, pos)) => Ok((Slot::Term(self.term_from(tok, pos)?), pos)),
            None => Err(self.err("expected a pattern slot, found end of input")),
        }
    }

    fn parse_prologue(&mut self) -> Result<(), QueryParseError> {
        while self.keyword_is("PREFIX") {
            self.bump();
            let (prefix, pos) = match self.bump() {
                Some((Tok::Pname(p, l), pos)) if l.is_empty() => (p, pos),
                Some((_, pos)) => {
                    return Err(QueryParseError::at(pos, "expected prefix name ending in ':'"))
                }
                None => return Err(self.err("expected prefix name")),
            };
            match self.bump() {
                Some((Tok::Iri(iri), ipos)) => {
                    Term::iri(&iri).map_err(|e| QueryParseError::at(ipos, e.to_string()))?;
                    self.prefixes.insert(prefix, iri);
                }
                Some((_, pos)) => return Err(QueryParseError::at(pos, "expected IRI after prefix")),
                None => return Err(QueryParseError::at(pos, "expected IRI after prefix")),
            }
        }
        Ok(())
    }

    fn parse_filter(&mut self) -> Result<Filter, QueryParseError> {
        // FILTER already consumed
        match self.bump() {
            Some((Tok::LParen, _)) => {}
            Some((_, pos)) => return Err(QueryParseError::at(pos, "expected '(' after FILTER")),
            None => return Err(self.err("expected '(' after FILTER")),
        }
        let (var, _) = match self.bump() {
            Some((Tok::Var(v), pos)) => (v, pos),
            Some((_, pos)) => {
                return Err(QueryParseError::at(pos, "expected variable in FILTER"))
            }
            None => return Err(self.err("expected variable in FILTER")),
        };
        let op = match self.bump() {
            Some((Tok::Eq, _)) => FilterOp::Eq,
            Some((Tok::Ne, _)) => FilterOp::Ne,
            Some((tok, pos)) => {
                return Err(QueryParseError::at(
                    pos,
                    format!("unknown filter operator {tok:?} (expected = or !=)"),
                ))
            }
            None => return Err(self.err("expected filter operator")),
        };
        let value = match self.bump() {
            Some((Tok::Var(_), pos)) => {
                return Err(QueryParseError::at(
                    pos,
                    "filter compares a variable with a constant term",
                ))
            }
            Some((tok, pos)) => self.term_from(tok, pos)?,
            None => return Err(self.err("expected constant term in FILTER")),
        };
        match self.bump() {
            Some((Tok::RParen, _)) => {}
            Some((_, pos)) => return Err(QueryParseError::at(pos, "expected ')' to close FILTER")),
            None => return Err(self.err("expected ')' to close FILTER")),
        }
        Ok(Filter { var, op, value })
    }

    fn parse_query(&mut self) -> Result<Query, QueryParseError> {
        self.parse_prologue()?;
        self.expect_keyword("SELECT")?;
        let distinct = if self.keyword_is("DISTINCT") {
            self.bump();
            true
        } else {
            false
        };

        let mut select_vars: Vec<(String, Pos)> = Vec::new();
        let projection = if matches!(self.peek(), Some(Tok::Star)) {
            self.bump();
            Projection::All
        } else {
            while let Some(Tok::Var(_)) = self.peek() {
                let Some((Tok::Var(v), pos)) = self.bump() else {
                    unreachable!()
                };
                if select_vars.iter().any(|(seen, _)| seen == &v) {
                    return Err(QueryParseError::at(pos, format!("duplicate select variable ?{v}")));
                }
                select_vars.push((v, pos));
            }
            if select_vars.is_empty() {
                return Err(self.err("expected '*' or at least one ?variable after SELECT"));
            }
            Projection::Vars(select_vars.iter().map(|(v, _)| v.clone()).collect())
        };

        self.expect_keyword("WHERE")?;
        match self.bump() {
            Some((Tok::LBrace, _)) => {}
            Some((_, pos)) => return Err(QueryParseError::at(pos, "expected '{' after WHERE")),
            None => return Err(self.err("expected '{' after WHERE")),
        }

        let mut bgp = Vec::new();
        let mut filters = Vec::new();
        let brace_pos = self.pos();
        loop {
            match self.peek() {
                Some(Tok::RBrace) => {
                    self.bump();
                    break;
                }
                Some(Tok::Dot) => {
                    self.bump(); // pattern separators, optional trailing dot
                }
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("FILTER") => {
                    self.bump();
                    filters.push(self.parse_filter()?);
                }
                Some(_) => {
                    let (s, _) = self.slot()?;
                    let (p, _) = self.slot()?;
                    let (o, _) = self.slot()?;
                    bgp.push(TriplePattern::new(s, p, o));
                }
                None => return Err(self.err("expected '}' to close WHERE")),
            }
        }

        if bgp.is_empty() {
            return Err(QueryParseError::at(brace_pos, "empty basic graph pattern"));
        }

        if self.peek().is_some() {
            return Err(self.err("unexpected input after query"));
        }

        let query = Query {
            distinct,
            projection,
            bgp,
            filters,
        };

        // Scope checks: select and filter variables must occur in the BGP.
        let in_scope = query.bgp_vars();
        if let Projection::Vars(vars) = &query.projection {
            for v in vars {
                if !in_scope.iter().any(|s| s == v) {
                    let pos = select_vars
                        .iter()
                        .find(|(name, _)| name == v)
                        .map(|(_, p)| *p)
                        .unwrap_or(Pos { line: 1, col: 1 });
                    return Err(QueryParseError::at(
                        pos,
                        format!("select variable ?{v} does not occur in the graph pattern"),
                    ));
                }
            }
        }
        for f in &query.filters {
            if !in_scope.iter().any(|s| s == &f.var) {
                return Err(QueryParseError::at(
                    Pos { line: 1, col: 1 },
                    format!("filter variable ?{} does not occur in the graph pattern", f.var),
                ));
            }
        }
        Ok(query)
    }
}

/// Parse a query; prefixes must all be declared in the text.
pub fn parse_query(text: &str) -> Result<Query, QueryParseError> {
    parse_query_with_prefixes(text, &BTreeMap::new())
}

/// Parse a query with a table of pre-declared prefixes (the gateway seeds
/// its fixed table here). In-text PREFIX declarations override entries.
pub fn parse_query_with_prefixes(
    text: &str,
    base: &BTreeMap<String, String>,
) -> Result<Query, QueryParseError> {
    let toks = Lexer::new(text).tokens()?;
    let mut parser = Parser {
        toks,
        i: 0,
        prefixes: base.clone(),
    };
    parser.parse_query()
}
