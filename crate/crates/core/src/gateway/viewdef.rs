//! View catalog file parser.
//!
//! One record per view:
//!
//! ```text
//! VIEW subclass-edges "Subclass edges"
//! FROM arabidopsis
//! TEMPLATE { ?c rdfs:subClassOf ?d }
//! WHERE { ?c rdfs:subClassOf ?d }
//! END
//! ```
//!
//! `FROM` lists one or more source graph ids. `TEMPLATE` and `WHERE` hold
//! triple patterns in the SPARQL-subset syntax ('.'-separated, prefixed names
//! resolved against the gateway prefix table, no FILTER). Blank lines and
//! `#` comments are allowed between records and sections. View ids use
//! `[A-Za-z0-9_-]+`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::query::{parse_query_with_prefixes, Query};
use crate::rdf::TriplePattern;
use crate::view::ViewDefinition;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("view catalog line {line}: {message}")]
pub struct ViewDefError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ViewDefError {
    ViewDefError {
        line,
        message: message.into(),
    }
}

fn valid_view_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

/// Patterns inside `{ ... }` parse by wrapping them into a SELECT * query.
fn parse_pattern_block(
    block: &str,
    prefixes: &BTreeMap<String, String>,
    line: usize,
) -> Result<Vec<TriplePattern>, ViewDefError> {
    let query: Query = parse_query_with_prefixes(&format!("SELECT * WHERE {{ {block} }}"), prefixes)
        .map_err(|e| err(line, format!("bad pattern block: {}", e.message)))?;
    if !query.filters.is_empty() {
        return Err(err(line, "FILTER is not allowed in view patterns"));
    }
    Ok(query.bgp)
}

struct RecordBuilder {
    start_line: usize,
    view_id: String,
    name: String,
    sources: Option<Vec<String>>,
    template: Option<(Vec<TriplePattern>, usize)>,
    where_bgp: Option<(Vec<TriplePattern>, usize)>,
}

impl RecordBuilder {
    fn finish(self) -> Result<ViewDefinition, ViewDefError> {
        let sources = self
            .sources
            .ok_or_else(|| err(self.start_line, format!("view {} lacks FROM", self.view_id)))?;
        let template = self
            .template
            .ok_or_else(|| err(self.start_line, format!("view {} lacks TEMPLATE", self.view_id)))?;
        let where_bgp = self
            .where_bgp
            .ok_or_else(|| err(self.start_line, format!("view {} lacks WHERE", self.view_id)))?;
        Ok(ViewDefinition {
            view_id: self.view_id,
            name: self.name,
            source_graph_ids: sources,
            construct_template: template.0,
            where_bgp: where_bgp.0,
        })
    }
}

/// Collect a `{ ... }` block that may span lines. Returns the inner text and
/// the index just past the closing brace line.
fn collect_block(
    lines: &[(usize, &str)],
    mut i: usize,
    after_keyword: &str,
) -> Result<(String, usize, usize), ViewDefError> {
    let (line_no, _) = lines[i];
    let mut text = after_keyword.to_string();
    while !text.contains('}') {
        i += 1;
        if i >= lines.len() {
            return Err(err(line_no, "unterminated '{' block"));
        }
        text.push(' ');
        text.push_str(lines[i].1);
    }
    let open = text
        .find('{')
        .ok_or_else(|| err(line_no, "expected '{' to open the pattern block"))?;
    let close = text.rfind('}').expect("checked above");
    if close < open {
        return Err(err(line_no, "mismatched braces in pattern block"));
    }
    let inner = text[open + 1..close].to_string();
    let rest = text[close + 1..].trim();
    if !rest.is_empty() && !rest.starts_with('#') {
        return Err(err(line_no, format!("unexpected input after '}}': {rest}")));
    }
    Ok((inner, line_no, i + 1))
}

pub fn parse_view_catalog(
    text: &str,
    prefixes: &BTreeMap<String, String>,
) -> Result<Vec<ViewDefinition>, ViewDefError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();

    let mut defs = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let (line_no, line) = lines[i];
        let Some(head) = line.strip_prefix("VIEW ") else {
            return Err(err(line_no, format!("expected VIEW, found: {line}")));
        };
        let head = head.trim();
        let (view_id, name_part) = match head.split_once(char::is_whitespace) {
            Some((id, rest)) => (id.trim(), rest.trim()),
            None => (head, ""),
        };
        if !valid_view_id(view_id) {
            return Err(err(line_no, format!("bad view id: {view_id:?}")));
        }
        if !(name_part.starts_with('"') && name_part.ends_with('"') && name_part.len() >= 2) {
            return Err(err(line_no, "expected a quoted display name after the view id"));
        }
        let mut rec = RecordBuilder {
            start_line: line_no,
            view_id: view_id.to_string(),
            name: name_part[1..name_part.len() - 1].to_string(),
            sources: None,
            template: None,
            where_bgp: None,
        };
        i += 1;
        loop {
            if i >= lines.len() {
                return Err(err(rec.start_line, format!("view {} lacks END", rec.view_id)));
            }
            let (section_line, section) = lines[i];
            if section == "END" {
                i += 1;
                break;
            } else if let Some(rest) = section.strip_prefix("FROM ") {
                if rec.sources.is_some() {
                    return Err(err(section_line, "duplicate FROM"));
                }
                let ids: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                if ids.is_empty() {
                    return Err(err(section_line, "FROM needs at least one graph id"));
                }
                rec.sources = Some(ids);
                i += 1;
            } else if let Some(rest) = section.strip_prefix("TEMPLATE") {
                if rec.template.is_some() {
                    return Err(err(section_line, "duplicate TEMPLATE"));
                }
                let (inner, at, next) = collect_block(&lines, i, rest)?;
                rec.template = Some((parse_pattern_block(&inner, prefixes, at)?, at));
                i = next;
            } else if let Some(rest) = section.strip_prefix("WHERE") {
                if rec.where_bgp.is_some() {
                    return Err(err(section_line, "duplicate WHERE"));
                }
                let (inner, at, next) = collect_block(&lines, i, rest)?;
                rec.where_bgp = Some((parse_pattern_block(&inner, prefixes, at)?, at));
                i = next;
            } else {
                return Err(err(
                    section_line,
                    format!("expected FROM, TEMPLATE, WHERE, or END, found: {section}"),
                ));
            }
        }
        defs.push(rec.finish()?);
    }
    Ok(defs)
}
