use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::rdf::{vocab, Graph, Slot, Term, TriplePattern};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OntologyError {
    #[error("unknown class: {0}")]
    UnknownClass(String),
}

/// The class taxonomy of a graph: every subject/object of `rdfs:subClassOf`
/// plus everything declared `owl:Class`, rooted at `owl:Thing` (always an
/// implicit member). `closure` is the reflexive-transitive closure of the
/// subclass edges; cycles are representable and handled by the lint checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    pub classes: BTreeSet<String>,
    pub root: String,
    /// child class -> direct parents
    pub edges: BTreeMap<String, BTreeSet<String>>,
    /// class -> every class reachable via subclass edges (including itself)
    pub closure: BTreeMap<String, BTreeSet<String>>,
}

fn iri_of(term: &Term) -> Option<&str> {
    term.as_iri()
}

fn pattern(p: &str) -> TriplePattern {
    TriplePattern::new(
        Slot::Var("s".into()),
        Slot::Term(Term::Iri(p.to_string())),
        Slot::Var("o".into()),
    )
}

pub fn build_taxonomy(graph: &Graph) -> Taxonomy {
    let mut classes: BTreeSet<String> = BTreeSet::new();
    let mut edges: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    classes.insert(vocab::OWL_THING.to_string());

    for t in graph.match_pattern(&pattern(vocab::RDFS_SUBCLASS_OF)) {
        let (Some(child), Some(parent)) = (iri_of(&t.subject), iri_of(&t.object)) else {
            continue; // blank-node classes are out of scope
        };
        classes.insert(child.to_string());
        classes.insert(parent.to_string());
        edges
            .entry(child.to_string())
            .or_default()
            .insert(parent.to_string());
    }
    for t in graph.match_pattern(&pattern(vocab::RDF_TYPE)) {
        if t.object == Term::Iri(vocab::OWL_CLASS.to_string()) {
            if let Some(class) = iri_of(&t.subject) {
                classes.insert(class.to_string());
            }
        }
    }

    let closure = reflexive_transitive_closure(&classes, &edges);
    Taxonomy {
        classes,
        root: vocab::OWL_THING.to_string(),
        edges,
        closure,
    }
}

fn reflexive_transitive_closure(
    classes: &BTreeSet<String>,
    edges: &BTreeMap<String, BTreeSet<String>>,
) -> BTreeMap<String, BTreeSet<String>> {
    let mut closure = BTreeMap::new();
    for start in classes {
        let mut reach: BTreeSet<String> = BTreeSet::new();
        let mut queue: VecDeque<&str> = VecDeque::new();
        reach.insert(start.clone());
        queue.push_back(start);
        while let Some(cur) = queue.pop_front() {
            if let Some(parents) = edges.get(cur) {
                for p in parents {
                    if reach.insert(p.clone()) {
                        queue.push_back(p);
                    }
                }
            }
        }
        closure.insert(start.clone(), reach);
    }
    closure
}

impl Taxonomy {
    /// True iff `a` reaches `b` in the closure; reflexive by construction.
    pub fn is_subclass_of(&self, a: &str, b: &str) -> Result<bool, OntologyError> {
        if !self.classes.contains(a) {
            return Err(OntologyError::UnknownClass(a.to_string()));
        }
        if !self.classes.contains(b) {
            return Err(OntologyError::UnknownClass(b.to_string()));
        }
        Ok(self.closure[a].contains(b))
    }
}

/// All individuals typed (directly or via a subclass) as `class`.
pub fn instances_of(
    graph: &Graph,
    tax: &Taxonomy,
    class: &str,
) -> Result<BTreeSet<Term>, OntologyError> {
    if !tax.classes.contains(class) {
        return Err(OntologyError::UnknownClass(class.to_string()));
    }
    let mut out = BTreeSet::new();
    for t in graph.match_pattern(&pattern(vocab::RDF_TYPE)) {
        let Some(declared) = iri_of(&t.object) else {
            continue;
        };
        if tax.classes.contains(declared) && tax.closure[declared].contains(class) {
            out.insert(t.subject.clone());
        }
    }
    Ok(out)
}

/// Per-property domain/range constraints declared in the graph.
///
/// Domains and ranges are single-valued here; if a property declares several,
/// the bytewise-smallest IRI wins so the schema is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PropertySchema {
    pub properties: BTreeMap<String, PropertyConstraint>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PropertyConstraint {
    pub domain: Option<String>,
    pub range: Option<String>,
}

pub fn build_property_schema(graph: &Graph) -> PropertySchema {
    let mut domains: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut ranges: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut declared: BTreeSet<String> = BTreeSet::new();

    for t in graph.match_pattern(&pattern(vocab::RDFS_DOMAIN)) {
        if let (Some(p), Some(c)) = (iri_of(&t.subject), iri_of(&t.object)) {
            domains.entry(p.to_string()).or_default().insert(c.to_string());
        }
    }
    for t in graph.match_pattern(&pattern(vocab::RDFS_RANGE)) {
        if let (Some(p), Some(c)) = (iri_of(&t.subject), iri_of(&t.object)) {
            ranges.entry(p.to_string()).or_default().insert(c.to_string());
        }
    }
    for t in graph.match_pattern(&pattern(vocab::RDF_TYPE)) {
        let is_property = t.object == Term::Iri(vocab::OWL_OBJECT_PROPERTY.to_string())
            || t.object == Term::Iri(vocab::OWL_DATATYPE_PROPERTY.to_string());
        if is_property {
            if let Some(p) = iri_of(&t.subject) {
                declared.insert(p.to_string());
            }
        }
    }

    let mut properties: BTreeMap<String, PropertyConstraint> = BTreeMap::new();
    for p in declared
        .iter()
        .chain(domains.keys())
        .chain(ranges.keys())
    {
        properties.entry(p.clone()).or_default();
    }
    for (p, ds) in &domains {
        properties.get_mut(p).unwrap().domain = ds.iter().next().cloned();
    }
    for (p, rs) in &ranges {
        properties.get_mut(p).unwrap().range = rs.iter().next().cloned();
    }
    PropertySchema { properties }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Triple;

    fn iri(s: &str) -> Term {
        Term::iri(s).unwrap()
    }

    fn sub(child: &str, parent: &str) -> Triple {
        Triple::new(iri(child), iri(vocab::RDFS_SUBCLASS_OF), iri(parent)).unwrap()
    }

    #[test]
    fn empty_graph_has_only_the_root() {
        let tax = build_taxonomy(&Graph::new("g"));
        assert_eq!(tax.classes.len(), 1);
        assert!(tax.classes.contains(vocab::OWL_THING));
        assert!(tax.edges.is_empty());
    }

    #[test]
    fn chain_closure_is_transitive() {
        let mut g = Graph::new("g");
        g.insert(sub("urn:a", "urn:b"));
        g.insert(sub("urn:b", "urn:c"));
        let tax = build_taxonomy(&g);
        assert!(tax.is_subclass_of("urn:a", "urn:c").unwrap());
        assert!(tax.is_subclass_of("urn:a", "urn:a").unwrap());
        assert!(!tax.is_subclass_of("urn:c", "urn:a").unwrap());
    }

    #[test]
    fn unknown_class_is_an_error() {
        let tax = build_taxonomy(&Graph::new("g"));
        assert_eq!(
            tax.is_subclass_of("urn:nope", vocab::OWL_THING),
            Err(OntologyError::UnknownClass("urn:nope".to_string()))
        );
    }

    #[test]
    fn closure_is_well_defined_on_cycles() {
        let mut g = Graph::new("g");
        g.insert(sub("urn:a", "urn:b"));
        g.insert(sub("urn:b", "urn:a"));
        let tax = build_taxonomy(&g);
        assert!(tax.is_subclass_of("urn:a", "urn:b").unwrap());
        assert!(tax.is_subclass_of("urn:b", "urn:a").unwrap());
    }

    #[test]
    fn instances_include_subclass_members() {
        let mut g = Graph::new("g");
        g.insert(sub("urn:Genetic", "urn:BioProp"));
        g.insert(Triple::new(iri("urn:x"), iri(vocab::RDF_TYPE), iri("urn:Genetic")).unwrap());
        let tax = build_taxonomy(&g);
        let got = instances_of(&g, &tax, "urn:BioProp").unwrap();
        assert_eq!(got, [iri("urn:x")].into_iter().collect());
        assert!(instances_of(&g, &tax, "urn:Genetic")
            .unwrap()
            .contains(&iri("urn:x")));
    }

    #[test]
    fn class_with_no_instances_is_empty() {
        let mut g = Graph::new("g");
        g.insert(sub("urn:a", "urn:b"));
        let tax = build_taxonomy(&g);
        assert!(instances_of(&g, &tax, "urn:a").unwrap().is_empty());
    }

    #[test]
    fn schema_collects_domain_range_and_declared_properties() {
        let mut g = Graph::new("g");
        g.insert(Triple::new(iri("urn:growsIn"), iri(vocab::RDFS_DOMAIN), iri("urn:Plant")).unwrap());
        g.insert(Triple::new(iri("urn:growsIn"), iri(vocab::RDFS_RANGE), iri("urn:Habitat")).unwrap());
        g.insert(
            Triple::new(
                iri("urn:hasPart"),
                iri(vocab::RDF_TYPE),
                iri(vocab::OWL_OBJECT_PROPERTY),
            )
            .unwrap(),
        );
        let schema = build_property_schema(&g);
        assert_eq!(
            schema.properties["urn:growsIn"].domain.as_deref(),
            Some("urn:Plant")
        );
        assert_eq!(
            schema.properties["urn:growsIn"].range.as_deref(),
            Some("urn:Habitat")
        );
        assert_eq!(schema.properties["urn:hasPart"], PropertyConstraint::default());
    }
}
