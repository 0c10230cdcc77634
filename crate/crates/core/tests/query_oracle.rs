//! The evaluator against the brute-force binding enumerator, on randomized
//! stores and queries, plus the planner/filter/projection properties.

mod common;

use std::collections::BTreeSet;

use common::{graph_of, oracle_evaluate, CaseGen};
use viewgate_core::query::{evaluate, plan, Filter, FilterOp, Projection, Query};
use viewgate_core::rdf::Term;

fn rows_as_set(rows: &[Vec<Term>]) -> BTreeSet<Vec<Term>> {
    rows.iter().cloned().collect()
}

#[test]
fn evaluate_matches_bruteforce_enumeration_on_200_random_cases() {
    let mut gen = CaseGen::new(42);
    for case in 0..200 {
        let triples = gen.store(200);
        let query = gen.query(3);
        let graph = graph_of("g", &triples);
        let got = rows_as_set(&evaluate(&query, &graph).rows);
        let want = oracle_evaluate(&query, &triples, &gen.universe.clone());
        assert_eq!(got, want, "case {case} diverged: {query:?}");
    }
}

#[test]
fn planned_order_never_changes_results() {
    let mut gen = CaseGen::new(7);
    for _ in 0..100 {
        let triples = gen.store(120);
        let query = gen.query(4);
        let graph = graph_of("g", &triples);
        let planned = plan(&query);
        assert_eq!(planned.len(), query.bgp.len());
        // a permutation of the BGP
        let mut a = query.bgp.clone();
        let mut b = planned.clone();
        a.sort();
        b.sort();
        assert_eq!(a, b);

        let reordered = Query {
            bgp: planned,
            ..query.clone()
        };
        let got = rows_as_set(&evaluate(&reordered, &graph).rows);
        let want = rows_as_set(&evaluate(&query, &graph).rows);
        assert_eq!(got, want);
    }
}

#[test]
fn adding_a_filter_never_adds_rows() {
    let mut gen = CaseGen::new(99);
    for _ in 0..100 {
        let triples = gen.store(120);
        let mut query = gen.query(2);
        query.filters.clear();
        let graph = graph_of("g", &triples);
        let unfiltered = rows_as_set(&evaluate(&query, &graph).rows);

        let vars = query.bgp_vars();
        let mut filtered_query = query.clone();
        filtered_query.filters.push(Filter {
            var: vars[0].clone(),
            op: FilterOp::Eq,
            value: gen.universe[0].clone(),
        });
        let filtered = rows_as_set(&evaluate(&filtered_query, &graph).rows);
        assert!(filtered.is_subset(&unfiltered));
    }
}

#[test]
fn projecting_twice_equals_projecting_once() {
    let mut gen = CaseGen::new(5);
    for _ in 0..50 {
        let triples = gen.store(100);
        let query = gen.query(2);
        let graph = graph_of("g", &triples);
        let rs = evaluate(&query, &graph);
        // re-project the already-projected rows: identity (sorted, deduped)
        let again: BTreeSet<Vec<Term>> = rs.rows.iter().cloned().collect();
        assert_eq!(again.len(), rs.rows.len(), "rows were not deduplicated");
        let mut sorted = rs.rows.clone();
        sorted.sort_by_key(|row| row.iter().map(|t| t.to_string()).collect::<Vec<_>>());
        assert_eq!(sorted, rs.rows, "rows were not in canonical order");
    }
}

#[test]
fn disconnected_bgp_evaluates_as_cross_product_in_textual_order() {
    use viewgate_core::rdf::{Slot, TriplePattern};
    let q = Query {
        distinct: true,
        projection: Projection::All,
        bgp: vec![
            TriplePattern::new(
                Slot::Var("a".into()),
                Slot::Term(Term::iri("urn:p").unwrap()),
                Slot::Var("b".into()),
            ),
            TriplePattern::new(
                Slot::Var("c".into()),
                Slot::Term(Term::iri("urn:q").unwrap()),
                Slot::Var("d".into()),
            ),
        ],
        filters: vec![],
    };
    assert_eq!(plan(&q), q.bgp); // nothing shared: textual order preserved

    let mut triples = BTreeSet::new();
    for (s, p, o) in [("x", "p", "y"), ("u", "q", "v"), ("w", "q", "z")] {
        triples.insert(
            viewgate_core::rdf::Triple::new(
                Term::iri(format!("urn:{s}")).unwrap(),
                Term::iri(format!("urn:{p}")).unwrap(),
                Term::iri(format!("urn:{o}")).unwrap(),
            )
            .unwrap(),
        );
    }
    let graph = graph_of("g", &triples);
    let rs = evaluate(&q, &graph);
    assert_eq!(rs.rows.len(), 2); // 1 p-edge x 2 q-edges
}
