//! Taxonomy derivation and ontology quality checks.

mod lint;
mod taxonomy;

pub use lint::{
    consistency_report, validate_domain_range, Finding, LintCode, LintReport, Severity,
};
pub use taxonomy::{
    build_property_schema, build_taxonomy, instances_of, OntologyError, PropertyConstraint,
    PropertySchema, Taxonomy,
};
