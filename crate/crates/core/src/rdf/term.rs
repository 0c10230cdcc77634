use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TermError {
    #[error("IRI is empty")]
    EmptyIri,
    #[error("IRI contains a forbidden character: {0:?}")]
    ForbiddenIriChar(char),
    #[error("IRI is not absolute (no scheme): {0}")]
    NonAbsoluteIri(String),
    #[error("blank node label must match [A-Za-z0-9_]+: {0:?}")]
    BadBlankLabel(String),
    #[error("literal in {0} position")]
    LiteralPosition(&'static str),
    #[error("blank node in predicate position")]
    BlankPredicate,
}

/// An RDF term: IRI, literal, or blank node.
///
/// Literals carry at most one of a datatype IRI or a language tag; the
/// constructors make any other combination unrepresentable. Comparison is
/// bytewise on all components ("1" and "01" are distinct literals).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(String),
    Literal {
        lexical: String,
        datatype: Option<String>,
        lang: Option<String>,
    },
    Blank(String),
}

impl Term {
    /// Build an IRI term. The IRI must be absolute (have a scheme), non-empty,
    /// and free of whitespace and N-Triples delimiter characters.
    pub fn iri(iri: impl Into<String>) -> Result<Term, TermError> {
        let iri = iri.into();
        validate_iri(&iri)?;
        Ok(Term::Iri(iri))
    }

    pub fn literal(lexical: impl Into<String>) -> Term {
        Term::Literal {
            lexical: lexical.into(),
            datatype: None,
            lang: None,
        }
    }

    pub fn literal_typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Result<Term, TermError> {
        let datatype = datatype.into();
        validate_iri(&datatype)?;
        Ok(Term::Literal {
            lexical: lexical.into(),
            datatype: Some(datatype),
            lang: None,
        })
    }

    pub fn literal_lang(lexical: impl Into<String>, lang: impl Into<String>) -> Term {
        Term::Literal {
            lexical: lexical.into(),
            datatype: None,
            lang: Some(lang.into()),
        }
    }

    /// Build a blank node term; labels are scoped to one document load.
    pub fn blank(label: impl Into<String>) -> Result<Term, TermError> {
        let label = label.into();
        if label.is_empty() || !label.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
            return Err(TermError::BadBlankLabel(label));
        }
        Ok(Term::Blank(label))
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal { .. })
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::Blank(_))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }
}

fn validate_iri(iri: &str) -> Result<(), TermError> {
    if iri.is_empty() {
        return Err(TermError::EmptyIri);
    }
    for c in iri.chars() {
        if c.is_whitespace() || c.is_control() || matches!(c, '<' | '>' | '"' | '\\') {
            return Err(TermError::ForbiddenIriChar(c));
        }
    }
    if !has_scheme(iri) {
        return Err(TermError::NonAbsoluteIri(iri.to_string()));
    }
    Ok(())
}

/// Absolute IRIs start with `scheme:` where scheme is ALPHA (ALPHA/DIGIT/+/-/.)*.
fn has_scheme(iri: &str) -> bool {
    let Some(colon) = iri.find(':') else {
        return false;
    };
    let scheme = &iri[..colon];
    let mut bytes = scheme.bytes();
    match bytes.next() {
        Some(b) if b.is_ascii_alphabetic() => {}
        _ => return false,
    }
    bytes.all(|b| b.is_ascii_alphanumeric() || matches!(b, b'+' | b'-' | b'.'))
}

fn escape_literal(lexical: &str, out: &mut String) {
    for c in lexical.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                out.push_str(&format!("\\u{:04X}", c as u32));
            }
            c => out.push(c),
        }
    }
}

impl fmt::Display for Term {
    /// The N-Triples token form: `<iri>`, `"literal"`, or `_:label`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Literal {
                lexical,
                datatype,
                lang,
            } => {
                let mut buf = String::with_capacity(lexical.len() + 2);
                escape_literal(lexical, &mut buf);
                write!(f, "\"{buf}\"")?;
                if let Some(lang) = lang {
                    write!(f, "@{lang}")?;
                } else if let Some(dt) = datatype {
                    write!(f, "^^<{dt}>")?;
                }
                Ok(())
            }
            Term::Blank(label) => write!(f, "_:{label}"),
        }
    }
}

/// An RDF statement. Subject is an IRI or blank node, predicate an IRI,
/// object any term; `new` rejects everything else.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Result<Triple, TermError> {
        if subject.is_literal() {
            return Err(TermError::LiteralPosition("subject"));
        }
        match &predicate {
            Term::Iri(_) => {}
            Term::Literal { .. } => return Err(TermError::LiteralPosition("predicate")),
            Term::Blank(_) => return Err(TermError::BlankPredicate),
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// One slot of a triple pattern: a concrete term or a named variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Term(Term),
    Var(String),
}

impl Slot {
    pub fn term(&self) -> Option<&Term> {
        match self {
            Slot::Term(t) => Some(t),
            Slot::Var(_) => None,
        }
    }

    pub fn var(&self) -> Option<&str> {
        match self {
            Slot::Var(v) => Some(v),
            Slot::Term(_) => None,
        }
    }
}

/// A triple pattern; variables act as wildcards when matched against a graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub subject: Slot,
    pub predicate: Slot,
    pub object: Slot,
}

impl TriplePattern {
    pub fn new(subject: Slot, predicate: Slot, object: Slot) -> TriplePattern {
        TriplePattern {
            subject,
            predicate,
            object,
        }
    }

    pub fn slots(&self) -> [&Slot; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    /// Variable names in slot order, deduplicated, first occurrence wins.
    pub fn vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for slot in self.slots() {
            if let Slot::Var(v) = slot {
                if !out.contains(&v.as_str()) {
                    out.push(v.as_str());
                }
            }
        }
        out
    }
}
