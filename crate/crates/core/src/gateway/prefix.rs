//! Prefix handling for ingestion and queries.
//!
//! The gateway ships a fixed prefix table (rdf, rdfs, owl, xsd plus the
//! default `:` namespace) and runs a preprocessing pass over N-Triples input
//! that rewrites bare prefixed names like `rdfs:subClassOf` or
//! `:GeneticResistance` into absolute `<...>` IRIs. Text inside `<...>` and
//! string literals is never touched; `_:` blank nodes pass through; `#`
//! starts a comment for the rest of the line.

use std::collections::BTreeMap;

use thiserror::Error;

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL_NS: &str = "http://www.w3.org/2002/07/owl#";
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";

/// Namespace bound to the bare `:` prefix unless the config overrides it.
pub const DEFAULT_NAMESPACE: &str = "http://example.org/arabidopsis#";

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct PrefixError {
    pub line: usize,
    pub message: String,
}

/// The fixed table: rdf, rdfs, owl, xsd, and `""` for the default namespace.
pub fn base_prefixes(default_namespace: &str) -> BTreeMap<String, String> {
    BTreeMap::from([
        (String::new(), default_namespace.to_string()),
        ("rdf".to_string(), RDF_NS.to_string()),
        ("rdfs".to_string(), RDFS_NS.to_string()),
        ("owl".to_string(), OWL_NS.to_string()),
        ("xsd".to_string(), XSD_NS.to_string()),
    ])
}

fn is_pname_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

/// `prefix:local` -> `<ns+local>`, or None when the token is not a prefixed
/// name (no colon, or a blank node).
fn expand_token(
    token: &str,
    prefixes: &BTreeMap<String, String>,
    line: usize,
) -> Result<Option<String>, PrefixError> {
    if token.starts_with("_:") {
        return Ok(None);
    }
    let Some(colon) = token.find(':') else {
        return Ok(None);
    };
    let (prefix, local) = (&token[..colon], &token[colon + 1..]);
    if !prefix.chars().all(is_pname_char) || !local.chars().all(is_pname_char) {
        return Ok(None);
    }
    let Some(ns) = prefixes.get(prefix) else {
        return Err(PrefixError {
            line,
            message: format!("undeclared prefix: {prefix}:"),
        });
    };
    Ok(Some(format!("<{ns}{local}>")))
}

/// Rewrite one bare token, allowing a `^^` datatype marker and one trailing
/// statement dot.
fn rewrite_bare(
    token: &str,
    prefixes: &BTreeMap<String, String>,
    line: usize,
) -> Result<String, PrefixError> {
    let (dt_marker, token) = match token.strip_prefix("^^") {
        Some(rest) => ("^^", rest),
        None => ("", token),
    };
    let (token, trailing_dot) = match token.strip_suffix('.') {
        Some(rest) if !rest.is_empty() => (rest, "."),
        _ => (token, ""),
    };
    match expand_token(token, prefixes, line)? {
        Some(expanded) => Ok(format!("{dt_marker}{expanded}{trailing_dot}")),
        None => Ok(format!("{dt_marker}{token}{trailing_dot}")),
    }
}

/// The preprocessing pass: expand prefixed names everywhere outside IRIs,
/// literals, and comments. Lines keep their shape otherwise.
pub fn expand_prefixed_names(
    text: &str,
    prefixes: &BTreeMap<String, String>,
) -> Result<String, PrefixError> {
    let mut out = String::with_capacity(text.len());
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let mut chars = line.chars().peekable();
        let mut bare = String::new();
        let flush_bare =
            |out: &mut String, bare: &mut String| -> Result<(), PrefixError> {
                if !bare.is_empty() {
                    out.push_str(&rewrite_bare(bare, prefixes, line_no)?);
                    bare.clear();
                }
                Ok(())
            };
        while let Some(c) = chars.next() {
            match c {
                '<' => {
                    flush_bare(&mut out, &mut bare)?;
                    out.push('<');
                    for c in chars.by_ref() {
                        out.push(c);
                        if c == '>' {
                            break;
                        }
                    }
                }
                '"' => {
                    flush_bare(&mut out, &mut bare)?;
                    out.push('"');
                    let mut escaped = false;
                    for c in chars.by_ref() {
                        out.push(c);
                        if escaped {
                            escaped = false;
                        } else if c == '\\' {
                            escaped = true;
                        } else if c == '"' {
                            break;
                        }
                    }
                }
                '#' => {
                    flush_bare(&mut out, &mut bare)?;
                    out.push('#');
                    out.extend(chars.by_ref());
                }
                c if c.is_whitespace() => {
                    flush_bare(&mut out, &mut bare)?;
                    out.push(c);
                }
                c => bare.push(c),
            }
        }
        flush_bare(&mut out, &mut bare)?;
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> BTreeMap<String, String> {
        base_prefixes(DEFAULT_NAMESPACE)
    }

    #[test]
    fn expands_prefixed_names() {
        let got = expand_prefixed_names(
            ":GeneticResistance rdfs:subClassOf :BiologicalProperty .\n",
            &table(),
        )
        .unwrap();
        assert_eq!(
            got,
            "<http://example.org/arabidopsis#GeneticResistance> \
             <http://www.w3.org/2000/01/rdf-schema#subClassOf> \
             <http://example.org/arabidopsis#BiologicalProperty> .\n"
        );
    }

    #[test]
    fn leaves_iris_literals_comments_alone() {
        let input = "<urn:a:x> <urn:p> \"a:b # not-a-comment\" . # rdfs:ignored\n";
        assert_eq!(expand_prefixed_names(input, &table()).unwrap(), input);
    }

    #[test]
    fn blank_nodes_pass_through() {
        let input = "_:b1 rdf:type :Plant .\n";
        let got = expand_prefixed_names(input, &table()).unwrap();
        assert!(got.starts_with("_:b1 <"));
    }

    #[test]
    fn datatype_suffix_expands() {
        let got =
            expand_prefixed_names("<urn:a> <urn:p> \"5\"^^xsd:integer .\n", &table()).unwrap();
        assert!(got.contains("\"5\"^^<http://www.w3.org/2001/XMLSchema#integer>"));
    }

    #[test]
    fn trailing_dot_without_space() {
        let got = expand_prefixed_names(":a :p :o.\n", &table()).unwrap();
        assert!(got.trim_end().ends_with("o>."));
    }

    #[test]
    fn undeclared_prefix_errors_with_line() {
        let err = expand_prefixed_names("<urn:a> <urn:p> <urn:o> .\n:x nope:y :z .", &table())
            .unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("undeclared prefix: nope:"));
    }
}
