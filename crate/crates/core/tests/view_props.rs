//! Materialization against a binding-enumeration oracle, isolation with
//! poison triples, and fingerprints cross-checked by an independent SHA-256.

mod common;

use std::collections::BTreeSet;

use common::{oracle_evaluate, ref_sha256_hex, CaseGen};
use rand::Rng;
use viewgate_core::query::{Projection, Query};
use viewgate_core::rdf::{canonical_serialize, Slot, Store, Term, Triple, TriplePattern};
use viewgate_core::view::{materialize, ViewCatalog, ViewDefinition};

fn oracle_materialize(
    def: &ViewDefinition,
    triples: &BTreeSet<Triple>,
    universe: &[Term],
) -> BTreeSet<Triple> {
    let query = Query {
        distinct: true,
        projection: Projection::All,
        bgp: def.where_bgp.clone(),
        filters: vec![],
    };
    let vars = query.bgp_vars();
    let rows = oracle_evaluate(&query, triples, universe);
    let mut out = BTreeSet::new();
    for row in rows {
        let lookup = |slot: &Slot| -> Term {
            match slot {
                Slot::Term(t) => t.clone(),
                Slot::Var(v) => {
                    let idx = vars.iter().position(|x| x == v).unwrap();
                    row[idx].clone()
                }
            }
        };
        for pattern in &def.construct_template {
            if let Ok(t) = Triple::new(
                lookup(&pattern.subject),
                lookup(&pattern.predicate),
                lookup(&pattern.object),
            ) {
                out.insert(t);
            }
        }
    }
    out
}

fn random_def(gen: &mut CaseGen, id: &str) -> ViewDefinition {
    let n_where = gen.rng.random_range(1..=3);
    let mut where_bgp = Vec::new();
    for _ in 0..n_where {
        where_bgp.push(TriplePattern::new(gen_slot(gen), gen_slot(gen), gen_slot(gen)));
    }
    let bound: Vec<String> = {
        let mut seen = Vec::new();
        for p in &where_bgp {
            for v in p.vars() {
                if !seen.contains(&v.to_string()) {
                    seen.push(v.to_string());
                }
            }
        }
        seen
    };
    let n_template = gen.rng.random_range(1..=2);
    let mut construct_template = Vec::new();
    for _ in 0..n_template {
        construct_template.push(TriplePattern::new(
            template_slot(gen, &bound),
            template_slot(gen, &bound),
            template_slot(gen, &bound),
        ));
    }
    ViewDefinition {
        view_id: id.to_string(),
        name: id.to_string(),
        source_graph_ids: vec!["src".to_string()],
        construct_template,
        where_bgp,
    }
}

fn gen_slot(gen: &mut CaseGen) -> Slot {
    if gen.rng.random_bool(0.4) {
        let i = gen.rng.random_range(0..gen.universe.len());
        Slot::Term(gen.universe[i].clone())
    } else {
        let names = ["a", "b", "c", "d"];
        Slot::Var(names[gen.rng.random_range(0..names.len())].to_string())
    }
}

fn template_slot(gen: &mut CaseGen, bound: &[String]) -> Slot {
    if bound.is_empty() || gen.rng.random_bool(0.4) {
        let i = gen.rng.random_range(0..gen.universe.len());
        Slot::Term(gen.universe[i].clone())
    } else {
        Slot::Var(bound[gen.rng.random_range(0..bound.len())].clone())
    }
}

fn store_of(triples: &BTreeSet<Triple>) -> Store {
    let mut store = Store::new();
    let g = store.create_graph("src");
    for t in triples {
        g.insert(t.clone());
    }
    store
}

#[test]
fn materialization_matches_bruteforce_oracle_on_random_instances() {
    let mut gen = CaseGen::new(314);
    for case in 0..120 {
        let triples = gen.store(100);
        let def = random_def(&mut gen, "v");
        let store = store_of(&triples);
        let (graph, _skipped) = materialize(&def, &store).unwrap();
        let got: BTreeSet<Triple> = graph.iter().into_iter().collect();
        let want = oracle_materialize(&def, &triples, &gen.universe.clone());
        assert_eq!(got, want, "case {case}: {def:?}");
    }
}

#[test]
fn fingerprint_is_sha256_of_the_canonical_serialization() {
    let mut gen = CaseGen::new(1);
    let triples = gen.store(40);
    let store = store_of(&triples);
    let mut catalog = ViewCatalog::new();
    let def = ViewDefinition {
        view_id: "v".into(),
        name: "v".into(),
        source_graph_ids: vec!["src".into()],
        construct_template: vec![TriplePattern::new(
            Slot::Var("s".into()),
            Slot::Var("p".into()),
            Slot::Var("o".into()),
        )],
        where_bgp: vec![TriplePattern::new(
            Slot::Var("s".into()),
            Slot::Var("p".into()),
            Slot::Var("o".into()),
        )],
    };
    catalog.define_view(def, &store).unwrap();
    let snap = catalog.get_view_snapshot("v", &store).unwrap();
    // independent recomputation
    let expected = ref_sha256_hex(canonical_serialize(&snap.graph).as_bytes());
    assert_eq!(snap.fingerprint, expected);
}

#[test]
fn equal_triple_sets_have_equal_fingerprints_regardless_of_order() {
    let mut gen = CaseGen::new(8);
    let triples: Vec<Triple> = gen.store(30).into_iter().collect();
    let mut reversed = triples.clone();
    reversed.reverse();

    let fingerprint_of = |ts: &[Triple]| {
        let mut store = Store::new();
        let g = store.create_graph("src");
        for t in ts {
            g.insert(t.clone());
        }
        let mut catalog = ViewCatalog::new();
        catalog
            .define_view(
                ViewDefinition {
                    view_id: "v".into(),
                    name: "v".into(),
                    source_graph_ids: vec!["src".into()],
                    construct_template: vec![TriplePattern::new(
                        Slot::Var("s".into()),
                        Slot::Var("p".into()),
                        Slot::Var("o".into()),
                    )],
                    where_bgp: vec![TriplePattern::new(
                        Slot::Var("s".into()),
                        Slot::Var("p".into()),
                        Slot::Var("o".into()),
                    )],
                },
                &store,
            )
            .unwrap();
        catalog.get_view_snapshot("v", &store).unwrap().fingerprint
    };
    assert_eq!(fingerprint_of(&triples), fingerprint_of(&reversed));
}

#[test]
fn poison_triples_outside_the_template_never_leak() {
    // Poison predicate urn:poison:p appears in the source but no template can
    // emit it; across random configurations no materialization contains it.
    let mut gen = CaseGen::new(555);
    let poison_p = Term::iri("urn:poison:p").unwrap();
    for _ in 0..100 {
        let mut triples = gen.store(60);
        let poison = Triple::new(
            Term::iri("urn:poison:s").unwrap(),
            poison_p.clone(),
            Term::iri("urn:poison:o").unwrap(),
        )
        .unwrap();
        triples.insert(poison.clone());
        let store = store_of(&triples);

        // templates whose predicate slot is a constant non-poison IRI
        let mut def = random_def(&mut gen, "v");
        for pattern in &mut def.construct_template {
            pattern.predicate = Slot::Term(Term::iri("urn:v:i0").unwrap());
        }
        let (graph, _) = materialize(&def, &store).unwrap();
        for t in graph.iter() {
            assert_ne!(t.predicate, poison_p);
            assert_ne!(t, poison);
        }
    }
}

#[test]
fn refresh_is_lazy_and_idempotent() {
    let mut gen = CaseGen::new(2);
    let triples = gen.store(20);
    let mut store = store_of(&triples);
    let mut catalog = ViewCatalog::new();
    catalog
        .define_view(
            ViewDefinition {
                view_id: "v".into(),
                name: "v".into(),
                source_graph_ids: vec!["src".into()],
                construct_template: vec![TriplePattern::new(
                    Slot::Var("s".into()),
                    Slot::Var("p".into()),
                    Slot::Var("o".into()),
                )],
                where_bgp: vec![TriplePattern::new(
                    Slot::Var("s".into()),
                    Slot::Var("p".into()),
                    Slot::Var("o".into()),
                )],
            },
            &store,
        )
        .unwrap();

    for round in 0..5 {
        let v1 = catalog.get_view_snapshot("v", &store).unwrap().version;
        let v2 = catalog.get_view_snapshot("v", &store).unwrap().version;
        assert_eq!(v1, v2, "round {round}: refresh of a fresh view bumped the version");

        store
            .graph_mut("src")
            .unwrap()
            .insert(
                Triple::new(
                    Term::iri(format!("urn:new:{round}")).unwrap(),
                    Term::iri("urn:v:i0").unwrap(),
                    Term::iri("urn:v:i1").unwrap(),
                )
                .unwrap(),
            );
        catalog.mark_stale("src");
        let v3 = catalog.get_view_snapshot("v", &store).unwrap().version;
        assert_eq!(v3, v1 + 1, "round {round}: stale refresh must bump by exactly 1");
    }
}
