use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::term::{Term, Triple, TriplePattern};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StoreError {
    #[error("unknown graph: {0}")]
    UnknownGraph(String),
}

/// Three-level map used for the SPO/POS/OSP permutation indexes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Index3(BTreeMap<Term, BTreeMap<Term, BTreeSet<Term>>>);

impl Index3 {
    fn insert(&mut self, a: Term, b: Term, c: Term) -> bool {
        self.0.entry(a).or_default().entry(b).or_default().insert(c)
    }

    fn remove(&mut self, a: &Term, b: &Term, c: &Term) -> bool {
        let Some(level1) = self.0.get_mut(a) else {
            return false;
        };
        let Some(level2) = level1.get_mut(b) else {
            return false;
        };
        let removed = level2.remove(c);
        if level2.is_empty() {
            level1.remove(b);
        }
        if level1.is_empty() {
            self.0.remove(a);
        }
        removed
    }

    fn contains(&self, a: &Term, b: &Term, c: &Term) -> bool {
        self.0
            .get(a)
            .and_then(|l1| l1.get(b))
            .is_some_and(|l2| l2.contains(c))
    }

    /// Enumerate entries under the given bound prefix, in index key order.
    fn scan(&self, a: Option<&Term>, b: Option<&Term>) -> Vec<(Term, Term, Term)> {
        debug_assert!(b.is_none() || a.is_some(), "prefix must be contiguous");
        let mut out = Vec::new();
        let level1: Vec<_> = match a {
            Some(a) => self.0.get_key_value(a).into_iter().collect(),
            None => self.0.iter().collect(),
        };
        for (ka, l1) in level1 {
            let level2: Vec<_> = match b {
                Some(b) => l1.get_key_value(b).into_iter().collect(),
                None => l1.iter().collect(),
            };
            for (kb, l2) in level2 {
                for kc in l2 {
                    out.push((ka.clone(), kb.clone(), kc.clone()));
                }
            }
        }
        out
    }

    fn all(&self) -> Vec<(Term, Term, Term)> {
        self.scan(None, None)
    }
}

/// A named graph: a set of triples with three permutation indexes
/// (subject-predicate-object, predicate-object-subject, object-subject-predicate).
/// Insertion has set semantics; all lookups go through the index whose bound
/// prefix is longest for the pattern at hand.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    id: String,
    spo: Index3,
    pos: Index3,
    osp: Index3,
    len: usize,
}

impl Graph {
    pub fn new(id: impl Into<String>) -> Graph {
        Graph {
            id: id.into(),
            ..Graph::default()
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Insert a triple. Returns true iff it was absent.
    pub fn insert(&mut self, t: Triple) -> bool {
        let Triple {
            subject: s,
            predicate: p,
            object: o,
        } = t;
        if !self.spo.insert(s.clone(), p.clone(), o.clone()) {
            return false;
        }
        self.pos.insert(p.clone(), o.clone(), s.clone());
        self.osp.insert(o, s, p);
        self.len += 1;
        true
    }

    /// Remove a triple. Returns true iff it was present.
    pub fn remove(&mut self, t: &Triple) -> bool {
        let (s, p, o) = (&t.subject, &t.predicate, &t.object);
        if !self.spo.remove(s, p, o) {
            return false;
        }
        self.pos.remove(p, o, s);
        self.osp.remove(o, s, p);
        self.len -= 1;
        true
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.spo.contains(&t.subject, &t.predicate, &t.object)
    }

    /// All triples in subject-predicate-object key order.
    pub fn iter(&self) -> Vec<Triple> {
        self.spo
            .all()
            .into_iter()
            .map(|(s, p, o)| Triple {
                subject: s,
                predicate: p,
                object: o,
            })
            .collect()
    }

    /// Triples matching every concrete slot of `pattern`; variables are free.
    ///
    /// Dispatches on which slots are bound so the probe always uses the index
    /// with the longest bound prefix: SPO for s/sp/spo, POS for p/po, OSP for
    /// o/os, full enumeration only for the all-wildcard pattern.
    pub fn match_pattern(&self, pattern: &TriplePattern) -> Vec<Triple> {
        let s = pattern.subject.term();
        let p = pattern.predicate.term();
        let o = pattern.object.term();
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                if self.spo.contains(s, p, o) {
                    vec![Triple {
                        subject: s.clone(),
                        predicate: p.clone(),
                        object: o.clone(),
                    }]
                } else {
                    Vec::new()
                }
            }
            (Some(s), p, None) => self
                .spo
                .scan(Some(s), p)
                .into_iter()
                .map(|(s, p, o)| Triple {
                    subject: s,
                    predicate: p,
                    object: o,
                })
                .collect(),
            (None, Some(p), o) => self
                .pos
                .scan(Some(p), o)
                .into_iter()
                .map(|(p, o, s)| Triple {
                    subject: s,
                    predicate: p,
                    object: o,
                })
                .collect(),
            (s, None, Some(o)) => self
                .osp
                .scan(Some(o), s)
                .into_iter()
                .map(|(o, s, p)| Triple {
                    subject: s,
                    predicate: p,
                    object: o,
                })
                .collect(),
            (None, None, None) => self.iter(),
        }
    }

    /// Full-enumeration index check: all three indexes must contain exactly
    /// the triples of the set.
    pub fn indexes_consistent(&self) -> bool {
        let spo: BTreeSet<(Term, Term, Term)> = self.spo.all().into_iter().collect();
        let from_pos: BTreeSet<(Term, Term, Term)> = self
            .pos
            .all()
            .into_iter()
            .map(|(p, o, s)| (s, p, o))
            .collect();
        let from_osp: BTreeSet<(Term, Term, Term)> = self
            .osp
            .all()
            .into_iter()
            .map(|(o, s, p)| (s, p, o))
            .collect();
        spo.len() == self.len && spo == from_pos && spo == from_osp
    }
}

/// A set of named graphs, one per data source.
#[derive(Debug, Clone, Default)]
pub struct Store {
    graphs: BTreeMap<String, Graph>,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }

    /// Register an empty graph under `id`, replacing any existing one.
    pub fn create_graph(&mut self, id: impl Into<String>) -> &mut Graph {
        let id = id.into();
        self.graphs.insert(id.clone(), Graph::new(id.clone()));
        self.graphs.get_mut(&id).expect("just inserted")
    }

    pub fn insert_graph(&mut self, graph: Graph) {
        self.graphs.insert(graph.id().to_string(), graph);
    }

    pub fn graph(&self, id: &str) -> Result<&Graph, StoreError> {
        self.graphs
            .get(id)
            .ok_or_else(|| StoreError::UnknownGraph(id.to_string()))
    }

    pub fn graph_mut(&mut self, id: &str) -> Result<&mut Graph, StoreError> {
        self.graphs
            .get_mut(id)
            .ok_or_else(|| StoreError::UnknownGraph(id.to_string()))
    }

    pub fn contains_graph(&self, id: &str) -> bool {
        self.graphs.contains_key(id)
    }

    pub fn graph_ids(&self) -> impl Iterator<Item = &str> {
        self.graphs.keys().map(String::as_str)
    }

    /// Match `pattern` against the union of the named graphs (set semantics).
    pub fn match_pattern(
        &self,
        graph_ids: &[String],
        pattern: &TriplePattern,
    ) -> Result<Vec<Triple>, StoreError> {
        let mut seen = BTreeSet::new();
        for id in graph_ids {
            for t in self.graph(id)?.match_pattern(pattern) {
                seen.insert(t);
            }
        }
        Ok(seen.into_iter().collect())
    }
}

/// Pattern matching exposed by triple sources the query evaluator can run over.
pub trait PatternSource {
    fn match_pattern(&self, pattern: &TriplePattern) -> Vec<Triple>;
}

impl PatternSource for Graph {
    fn match_pattern(&self, pattern: &TriplePattern) -> Vec<Triple> {
        Graph::match_pattern(self, pattern)
    }
}

/// Union over several graphs with set semantics; used for multi-source views
/// and for queries over a user's authorized view snapshots.
pub struct UnionSource<'a> {
    graphs: Vec<&'a Graph>,
}

impl<'a> UnionSource<'a> {
    pub fn new(graphs: Vec<&'a Graph>) -> UnionSource<'a> {
        UnionSource { graphs }
    }
}

impl PatternSource for UnionSource<'_> {
    fn match_pattern(&self, pattern: &TriplePattern) -> Vec<Triple> {
        if self.graphs.len() == 1 {
            return self.graphs[0].match_pattern(pattern);
        }
        let mut seen = BTreeSet::new();
        for g in &self.graphs {
            for t in g.match_pattern(pattern) {
                seen.insert(t);
            }
        }
        seen.into_iter().collect()
    }
}
