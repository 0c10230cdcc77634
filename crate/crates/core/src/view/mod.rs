//! View catalog and materialization: named CONSTRUCT-style definitions whose
//! cached subgraphs are the only data surface users may query. Refresh is
//! lazy full re-materialization on first access after a dependency changed;
//! snapshots are immutable and cheap to hand out.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::hash::sha256_hex;
use crate::query::{evaluate, Projection, Query};
use crate::rdf::{canonical_serialize, Graph, Slot, Store, Triple, TriplePattern, UnionSource};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ViewError {
    #[error("duplicate view id: {0}")]
    DuplicateViewId(String),
    #[error("unknown source graph: {0}")]
    UnknownSourceGraph(String),
    #[error("template variable ?{var} does not occur in the WHERE pattern of view {view_id}")]
    UnboundTemplateVariable { view_id: String, var: String },
    #[error("unknown view: {0}")]
    UnknownView(String),
    #[error("view {0} has an empty WHERE pattern")]
    EmptyWhere(String),
}

/// A named CONSTRUCT-style view: instantiate every template pattern for every
/// solution of the WHERE pattern over the union of the source graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewDefinition {
    pub view_id: String,
    pub name: String,
    pub source_graph_ids: Vec<String>,
    pub construct_template: Vec<TriplePattern>,
    pub where_bgp: Vec<TriplePattern>,
}

impl ViewDefinition {
    fn validate(&self) -> Result<(), ViewError> {
        if self.where_bgp.is_empty() {
            return Err(ViewError::EmptyWhere(self.view_id.clone()));
        }
        let bound: BTreeSet<&str> = self
            .where_bgp
            .iter()
            .flat_map(|p| p.vars())
            .collect();
        for pattern in &self.construct_template {
            for var in pattern.vars() {
                if !bound.contains(var) {
                    return Err(ViewError::UnboundTemplateVariable {
                        view_id: self.view_id.clone(),
                        var: var.to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// The cached result of materializing a view definition.
#[derive(Debug, Clone)]
pub struct MaterializedView {
    pub view_id: String,
    pub graph: Arc<Graph>,
    pub version: u64,
    /// SHA-256 hex of the canonical serialization; matches `graph` whenever
    /// `stale` is false.
    pub fingerprint: String,
    pub stale: bool,
    /// Instantiations dropped because they would not form a valid triple
    /// (e.g. a literal in subject position). Reported, not fatal.
    pub skipped_instantiations: u64,
}

/// Materialize a definition against the store: evaluate the WHERE pattern
/// over the union of the source graphs, instantiate every template pattern
/// per solution, keep ground well-formed triples with set semantics.
/// Returns the graph and the count of skipped ill-formed instantiations.
pub fn materialize(def: &ViewDefinition, store: &Store) -> Result<(Graph, u64), ViewError> {
    def.validate()?;
    let mut sources = Vec::new();
    for id in &def.source_graph_ids {
        sources.push(
            store
                .graph(id)
                .map_err(|_| ViewError::UnknownSourceGraph(id.clone()))?,
        );
    }
    let union = UnionSource::new(sources);
    let query = Query {
        distinct: true,
        projection: Projection::All,
        bgp: def.where_bgp.clone(),
        filters: Vec::new(),
    };
    let solutions = evaluate(&query, &union);
    let var_index: BTreeMap<&str, usize> = solutions
        .vars
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();

    let mut graph = Graph::new(def.view_id.clone());
    let mut skipped = 0u64;
    for row in &solutions.rows {
        for pattern in &def.construct_template {
            let ground = |slot: &Slot| match slot {
                Slot::Term(t) => t.clone(),
                Slot::Var(v) => row[var_index[v.as_str()]].clone(),
            };
            match Triple::new(
                ground(&pattern.subject),
                ground(&pattern.predicate),
                ground(&pattern.object),
            ) {
                Ok(t) => {
                    graph.insert(t);
                }
                Err(_) => skipped += 1,
            }
        }
    }
    Ok((graph, skipped))
}

fn fingerprint_of(graph: &Graph) -> String {
    sha256_hex(canonical_serialize(graph).as_bytes())
}

#[derive(Debug, Clone)]
struct ViewEntry {
    def: ViewDefinition,
    mat: MaterializedView,
}

/// All registered views plus the graph-id -> dependent-views reverse index.
#[derive(Debug, Clone, Default)]
pub struct ViewCatalog {
    entries: BTreeMap<String, ViewEntry>,
    by_graph: BTreeMap<String, BTreeSet<String>>,
}

impl ViewCatalog {
    pub fn new() -> ViewCatalog {
        ViewCatalog::default()
    }

    /// Register and immediately materialize a view (version 1).
    pub fn define_view(&mut self, def: ViewDefinition, store: &Store) -> Result<String, ViewError> {
        if self.entries.contains_key(&def.view_id) {
            return Err(ViewError::DuplicateViewId(def.view_id.clone()));
        }
        let (graph, skipped) = materialize(&def, store)?;
        let mat = MaterializedView {
            view_id: def.view_id.clone(),
            fingerprint: fingerprint_of(&graph),
            graph: Arc::new(graph),
            version: 1,
            stale: false,
            skipped_instantiations: skipped,
        };
        for gid in &def.source_graph_ids {
            self.by_graph
                .entry(gid.clone())
                .or_default()
                .insert(def.view_id.clone());
        }
        let id = def.view_id.clone();
        self.entries.insert(id.clone(), ViewEntry { def, mat });
        Ok(id)
    }

    /// Flag every view depending on `graph_id` as stale. Returns the affected
    /// view ids in sorted order.
    pub fn mark_stale(&mut self, graph_id: &str) -> Vec<String> {
        let Some(dependents) = self.by_graph.get(graph_id) else {
            return Vec::new();
        };
        let mut affected = Vec::new();
        for vid in dependents {
            if let Some(entry) = self.entries.get_mut(vid) {
                entry.mat.stale = true;
                affected.push(vid.clone());
            }
        }
        affected
    }

    /// Read-only snapshot of a view, refreshing first when stale
    /// (version +1). Refreshing a fresh view is a no-op.
    pub fn get_view_snapshot(
        &mut self,
        view_id: &str,
        store: &Store,
    ) -> Result<MaterializedView, ViewError> {
        let entry = self
            .entries
            .get_mut(view_id)
            .ok_or_else(|| ViewError::UnknownView(view_id.to_string()))?;
        if entry.mat.stale {
            let (graph, skipped) = materialize(&entry.def, store)?;
            entry.mat.fingerprint = fingerprint_of(&graph);
            entry.mat.graph = Arc::new(graph);
            entry.mat.version += 1;
            entry.mat.stale = false;
            entry.mat.skipped_instantiations = skipped;
        }
        Ok(entry.mat.clone())
    }

    pub fn contains(&self, view_id: &str) -> bool {
        self.entries.contains_key(view_id)
    }

    pub fn definition(&self, view_id: &str) -> Result<&ViewDefinition, ViewError> {
        self.entries
            .get(view_id)
            .map(|e| &e.def)
            .ok_or_else(|| ViewError::UnknownView(view_id.to_string()))
    }

    pub fn view_ids(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    /// Public metadata: (id, name) pairs.
    pub fn listing(&self) -> Vec<(String, String)> {
        self.entries
            .iter()
            .map(|(id, e)| (id.clone(), e.def.name.clone()))
            .collect()
    }

    pub fn dependents_of(&self, graph_id: &str) -> Vec<String> {
        self.by_graph
            .get(graph_id)
            .map(|s| s.iter().cloned().collect())
            .unwrap_or_default()
    }

    /// Rebuild the reverse index from definitions and compare; the catalog
    /// invariant check used by tests.
    pub fn reverse_index_consistent(&self) -> bool {
        let mut rebuilt: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (id, entry) in &self.entries {
            for gid in &entry.def.source_graph_ids {
                rebuilt.entry(gid.clone()).or_default().insert(id.clone());
            }
        }
        rebuilt == self.by_graph
    }
}
