//! SPARQL-subset query engine: SELECT over basic graph patterns with
//! equality/inequality filters. The evaluator is a nested-loop join over
//! the planned pattern order and always applies set semantics at projection,
//! which keeps it checkable against a brute-force binding enumerator.

mod eval;
mod parse;
mod results;

pub use eval::{evaluate, plan};
pub use parse::{parse_query, parse_query_with_prefixes, QueryParseError};
pub use results::{serialize_results, to_sparql_json, ResultFormat, UnsupportedFormat};

use crate::rdf::{Slot, Term, TriplePattern};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    /// `SELECT *`: all BGP variables in first-occurrence order.
    All,
    Vars(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterOp {
    Eq,
    Ne,
}

/// `FILTER(?var = term)` / `FILTER(?var != term)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filter {
    pub var: String,
    pub op: FilterOp,
    pub value: Term,
}

/// A parsed query. Invariants: the BGP is non-empty and every select/filter
/// variable occurs in it (enforced by the parser).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub distinct: bool,
    pub projection: Projection,
    pub bgp: Vec<TriplePattern>,
    pub filters: Vec<Filter>,
}

impl Query {
    /// All BGP variables in first-occurrence order.
    pub fn bgp_vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for pattern in &self.bgp {
            for slot in pattern.slots() {
                if let Slot::Var(v) = slot {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
        }
        out
    }
}

/// A solution table: each row binds exactly `vars`, no duplicate rows,
/// rows in canonical serialization order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultSet {
    pub vars: Vec<String>,
    pub rows: Vec<Vec<Term>>,
}

impl ResultSet {
    pub fn empty(vars: Vec<String>) -> ResultSet {
        ResultSet { vars, rows: Vec::new() }
    }
}
