//! Result documents: CSV and the SPARQL 1.1 Query Results JSON shape.

use std::str::FromStr;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::rdf::Term;

use super::ResultSet;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unsupported result format: {0} (expected csv or sparql-json)")]
pub struct UnsupportedFormat(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResultFormat {
    Csv,
    SparqlJson,
}

impl FromStr for ResultFormat {
    type Err = UnsupportedFormat;

    fn from_str(s: &str) -> Result<ResultFormat, UnsupportedFormat> {
        match s {
            "csv" => Ok(ResultFormat::Csv),
            "sparql-json" => Ok(ResultFormat::SparqlJson),
            other => Err(UnsupportedFormat(other.to_string())),
        }
    }
}

/// Serialize a result set. CSV: header row of variables, then one line per
/// row, LF-terminated. SPARQL-JSON: `head.vars` + `results.bindings` with
/// `type`/`value` entries per the W3C results-JSON layout.
pub fn serialize_results(rs: &ResultSet, format: ResultFormat) -> String {
    match format {
        ResultFormat::Csv => to_csv(rs),
        ResultFormat::SparqlJson => to_sparql_json(rs).to_string(),
    }
}

fn csv_field(value: &str) -> String {
    if value.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

fn csv_value(term: &Term) -> String {
    match term {
        Term::Iri(iri) => csv_field(iri),
        Term::Literal { lexical, .. } => csv_field(lexical),
        Term::Blank(label) => csv_field(&format!("_:{label}")),
    }
}

fn to_csv(rs: &ResultSet) -> String {
    let mut out = String::new();
    out.push_str(
        &rs.vars
            .iter()
            .map(|v| csv_field(v))
            .collect::<Vec<_>>()
            .join(","),
    );
    out.push('\n');
    for row in &rs.rows {
        out.push_str(&row.iter().map(csv_value).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

fn term_json(term: &Term) -> Value {
    match term {
        Term::Iri(iri) => json!({ "type": "uri", "value": iri }),
        Term::Blank(label) => json!({ "type": "bnode", "value": label }),
        Term::Literal {
            lexical,
            datatype,
            lang,
        } => {
            let mut obj = Map::new();
            obj.insert("type".to_string(), json!("literal"));
            obj.insert("value".to_string(), json!(lexical));
            if let Some(lang) = lang {
                obj.insert("xml:lang".to_string(), json!(lang));
            }
            if let Some(dt) = datatype {
                obj.insert("datatype".to_string(), json!(dt));
            }
            Value::Object(obj)
        }
    }
}

/// The results-JSON document as a `serde_json::Value`.
pub fn to_sparql_json(rs: &ResultSet) -> Value {
    let bindings: Vec<Value> = rs
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (var, term) in rs.vars.iter().zip(row) {
                obj.insert(var.clone(), term_json(term));
            }
            Value::Object(obj)
        })
        .collect();
    json!({
        "head": { "vars": rs.vars },
        "results": { "bindings": bindings }
    })
}
