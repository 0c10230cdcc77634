//! RDF data model: terms, triples, named graphs with permutation indexes,
//! and the N-Triples reader/canonical writer.

mod graph;
mod ntriples;
mod term;

pub use graph::{Graph, PatternSource, Store, StoreError, UnionSource};
pub use ntriples::{canonical_serialize, parse_ntriples, serialize_triple, ParseError};
pub use term::{Slot, Term, TermError, Triple, TriplePattern};

/// Common vocabulary IRIs used by the ontology layer and fixtures.
pub mod vocab {
    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
    pub const RDFS_LABEL: &str = "http://www.w3.org/2000/01/rdf-schema#label";
    pub const RDFS_DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
    pub const RDFS_RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
    pub const OWL_THING: &str = "http://www.w3.org/2002/07/owl#Thing";
    pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
    pub const OWL_OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";
    pub const OWL_DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";
}
