//! Core library of the viewgate gateway: an RDF store with a SPARQL-subset
//! query engine, ontology consistency checks, materialized views, and a
//! hash-chained role-based access-control ledger, coordinated by a gateway
//! that only ever exposes views to users.

pub mod gateway;
pub mod hash;
pub mod ledger;
pub mod ontology;
pub mod query;
pub mod rdf;
pub mod view;
