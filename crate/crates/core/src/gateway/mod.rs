//! The coordinator: authenticate, consult the access-control state, restrict
//! queries to authorized view snapshots, execute, and record every decision
//! on the ledger. Users never touch source graphs; the only query surface is
//! the union of views their roles may READ.
//!
//! Mutations (ledger appends, store writes, view refreshes) run strictly
//! serialized through `&mut Gateway`; the HTTP layer holds a lock for the
//! decision-and-record phase and evaluates queries outside it on immutable
//! snapshots.

mod auth;
mod config;
mod http;
mod prefix;
mod viewdef;

pub use auth::{validate_token, AuthFailure, CredentialStore};
pub use config::{Config, ConfigError};
pub use http::{serve, ServerHandle, DEFAULT_LISTEN};
pub use prefix::{base_prefixes, expand_prefixed_names, PrefixError, DEFAULT_NAMESPACE};
pub use viewdef::{parse_view_catalog, ViewDefError};

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use thiserror::Error;

use crate::hash::sha256_hex;
use crate::ledger::{
    append_block_record, check_access, export_json, load_chain, save_chain, AccessControlState,
    Chain, ChainFailure, Decision, LedgerError, Privilege, ResourceKind, Ruling, Transaction,
    TxOp, MAX_BLOCK_TXS,
};
use crate::ontology::{consistency_report, LintReport};
use crate::query::{
    evaluate, parse_query_with_prefixes, Projection, Query, ResultSet,
};
use crate::rdf::{canonical_serialize, parse_ntriples, Graph, Store, Triple, UnionSource};
use crate::view::{MaterializedView, ViewCatalog};

#[derive(Debug, Error)]
pub enum GatewayError {
    /// Unknown user or bad token; deliberately carries no detail.
    #[error("authentication failed")]
    Auth,
    #[error("forbidden: {0}")]
    Forbidden(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown resource: {0}")]
    NotFound(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("storage error: {0}")]
    Storage(String),
    #[error("ledger error: {0}")]
    Ledger(String),
}

impl GatewayError {
    /// The fixed status mapping: 401 auth, 403 denied, 400 parse/bad input,
    /// 404 unknown resource, 500 otherwise.
    pub fn http_status(&self) -> u16 {
        match self {
            GatewayError::Auth => 401,
            GatewayError::Forbidden(_) => 403,
            GatewayError::Parse(_) | GatewayError::BadRequest(_) | GatewayError::Config(_) => 400,
            GatewayError::NotFound(_) => 404,
            GatewayError::Storage(_) | GatewayError::Ledger(_) => 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QueryRequest {
    pub user: String,
    pub token: String,
    pub query: String,
    /// Explicit views narrow (never widen) the authorized set.
    pub view_ids: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RequestStatus {
    Ok,
    Denied,
}

#[derive(Debug, Clone)]
pub struct QueryResponse {
    pub status: RequestStatus,
    /// Views actually used (allow) or requested (deny).
    pub view_ids: Vec<String>,
    pub results: ResultSet,
    /// The recorded ACCESS_RECORD; denials are recorded too.
    pub tx_id: String,
    pub deny_reason: Option<String>,
}

#[derive(Debug, Clone)]
pub struct WriteResponse {
    pub status: RequestStatus,
    pub inserted: u64,
    pub removed: u64,
    pub tx_id: String,
    pub deny_reason: Option<String>,
}

/// Payload for admin grant/revoke: a role for a user, or a privilege for a
/// role.
#[derive(Debug, Clone)]
pub enum AdminPayload {
    Role { user: String, role: String },
    Privilege { role: String, privilege: Privilege },
}

#[derive(Debug, Clone, Default)]
pub struct TxFilter {
    /// Matches the transaction actor or the payload user.
    pub user: Option<String>,
    pub kind: Option<String>,
    pub from_height: Option<u64>,
    pub to_height: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TxSummary {
    pub height: u64,
    pub tx_id: String,
    pub kind: String,
    pub actor: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub user: Option<String>,
    pub timestamp: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decision: Option<Decision>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditVerifyReport {
    pub ok: bool,
    pub blocks: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_height: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<String>,
}

pub type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

fn system_clock() -> Clock {
    Arc::new(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    })
}

pub struct Gateway {
    config: Config,
    store: Store,
    catalog: ViewCatalog,
    chain: Chain,
    state: AccessControlState,
    pending: Vec<Transaction>,
    credentials: CredentialStore,
    prefixes: BTreeMap<String, String>,
    clock: Clock,
}

impl Gateway {
    pub fn open(config: Config) -> Result<Gateway, GatewayError> {
        Gateway::open_with_clock(config, system_clock())
    }

    /// Like `open`, with an injectable clock for deterministic tests.
    pub fn open_with_clock(config: Config, clock: Clock) -> Result<Gateway, GatewayError> {
        let prefixes = base_prefixes(&config.default_namespace);

        // Source graphs, prefix-expanded and validated at load.
        let mut store = Store::new();
        for (id, path) in &config.graphs {
            let text = std::fs::read_to_string(path).map_err(|e| {
                GatewayError::Storage(format!("graph {id} ({}): {e}", path.display()))
            })?;
            let expanded = expand_prefixed_names(&text, &prefixes)
                .map_err(|e| GatewayError::Parse(format!("graph {id}: {e}")))?;
            let triples = parse_ntriples(&expanded)
                .map_err(|e| GatewayError::Parse(format!("graph {id}: {e}")))?;
            let graph = store.create_graph(id.clone());
            for t in triples {
                graph.insert(t);
            }
        }

        // The chain: load-and-verify, or create genesis.
        let chain = if config.chain_path.exists() {
            let chain = load_chain(&config.chain_path)
                .map_err(|e| GatewayError::Storage(e.to_string()))?;
            chain
                .verify_chain()
                .map_err(|e| GatewayError::Ledger(e.to_string()))?;
            let configured: std::collections::BTreeSet<String> =
                config.super_users.iter().cloned().collect();
            if chain.super_users() != configured {
                return Err(GatewayError::BadRequest(
                    "super-user set in config differs from the genesis block".to_string(),
                ));
            }
            chain
        } else {
            if let Some(dir) = config.chain_path.parent() {
                std::fs::create_dir_all(dir)
                    .map_err(|e| GatewayError::Storage(e.to_string()))?;
            }
            let chain = Chain::genesis(&config.super_users, clock())
                .map_err(|e| GatewayError::Ledger(e.to_string()))?;
            save_chain(&config.chain_path, &chain)
                .map_err(|e| GatewayError::Storage(e.to_string()))?;
            chain
        };

        // Views from the catalog file.
        let mut catalog = ViewCatalog::new();
        if let Some(views_path) = &config.views_path {
            let text = std::fs::read_to_string(views_path).map_err(|e| {
                GatewayError::Storage(format!("views ({}): {e}", views_path.display()))
            })?;
            for def in parse_view_catalog(&text, &prefixes)
                .map_err(|e| GatewayError::Parse(e.to_string()))?
            {
                catalog
                    .define_view(def, &store)
                    .map_err(|e| GatewayError::BadRequest(e.to_string()))?;
            }
        }

        let credentials = CredentialStore::new(config.credentials.clone());
        let mut gateway = Gateway {
            state: chain.fold_state(),
            store,
            catalog,
            chain,
            pending: Vec::new(),
            credentials,
            prefixes,
            clock,
            config,
        };
        gateway.bootstrap_registrations()?;
        Ok(gateway)
    }

    /// Register configured users, graphs, and views that are not on chain
    /// yet ("assign IDs to data"). Idempotent across restarts; the first
    /// configured super-user signs. Super-users themselves are genesis
    /// identities and are never re-registered, so a minimal deployment stays
    /// at one block.
    fn bootstrap_registrations(&mut self) -> Result<(), GatewayError> {
        let actor = self.config.super_users[0].clone();
        let ts = self.now();
        let mut regs: Vec<Transaction> = Vec::new();
        for user in self.config.credentials.keys() {
            if self.state.super_users.contains(user) || self.state.users.contains(user) {
                continue;
            }
            regs.push(Transaction::new(
                actor.clone(),
                TxOp::RegisterUser { user: user.clone() },
                ts,
            ));
        }
        let registered = |state: &AccessControlState, kind: ResourceKind, id: &str| {
            state
                .resources
                .iter()
                .any(|r| r.kind == kind && r.id == id)
        };
        for graph_id in self.config.graphs.keys() {
            if !registered(&self.state, ResourceKind::Graph, graph_id) {
                regs.push(Transaction::new(
                    actor.clone(),
                    TxOp::RegisterResource {
                        resource_kind: ResourceKind::Graph,
                        resource_id: graph_id.clone(),
                    },
                    ts,
                ));
            }
        }
        for view_id in self.catalog.view_ids() {
            if !registered(&self.state, ResourceKind::View, &view_id) {
                regs.push(Transaction::new(
                    actor.clone(),
                    TxOp::RegisterResource {
                        resource_kind: ResourceKind::View,
                        resource_id: view_id,
                    },
                    ts,
                ));
            }
        }
        for chunk in regs.chunks(MAX_BLOCK_TXS) {
            self.append_and_persist(chunk.to_vec())?;
        }
        Ok(())
    }

    fn now(&self) -> u64 {
        (self.clock)()
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn access_state(&self) -> &AccessControlState {
        &self.state
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    /// (id, name) pairs; the public metadata surface.
    pub fn view_listing(&self) -> Vec<(String, String)> {
        self.catalog.listing()
    }

    /// Snapshot of one materialized view (refreshing if stale). Library-level
    /// helper; the HTTP surface never exposes it without access checks.
    pub fn materialized_view(&mut self, view_id: &str) -> Result<MaterializedView, GatewayError> {
        self.catalog
            .get_view_snapshot(view_id, &self.store)
            .map_err(|e| GatewayError::NotFound(e.to_string()))
    }

    /// Validate view definitions against the live store and catalog without
    /// registering them; returns the new view ids. Used by the CLI before it
    /// appends records to the views catalog file.
    pub fn dry_run_view_definitions(&self, text: &str) -> Result<Vec<String>, GatewayError> {
        let defs =
            parse_view_catalog(text, &self.prefixes).map_err(|e| GatewayError::Parse(e.to_string()))?;
        let mut trial = self.catalog.clone();
        let mut ids = Vec::new();
        for def in defs {
            ids.push(
                trial
                    .define_view(def, &self.store)
                    .map_err(|e| GatewayError::BadRequest(e.to_string()))?,
            );
        }
        Ok(ids)
    }

    /// Ontology lint over one named source graph.
    pub fn lint_graph(&self, graph_id: &str) -> Result<LintReport, GatewayError> {
        let graph = self
            .store
            .graph(graph_id)
            .map_err(|e| GatewayError::NotFound(e.to_string()))?;
        Ok(consistency_report(graph))
    }

    fn authenticate(&self, user: &str, token: &str) -> Result<String, GatewayError> {
        self.credentials
            .authenticate(user, token)
            .map_err(|_| GatewayError::Auth)
    }

    /// Parse N-Triples statement lines after prefix expansion.
    pub fn parse_triples(&self, lines: &[String]) -> Result<Vec<Triple>, GatewayError> {
        let text = lines.join("\n");
        let expanded = expand_prefixed_names(&text, &self.prefixes)
            .map_err(|e| GatewayError::Parse(e.to_string()))?;
        parse_ntriples(&expanded).map_err(|e| GatewayError::Parse(e.to_string()))
    }

    fn append_and_persist(&mut self, txs: Vec<Transaction>) -> Result<(), GatewayError> {
        let block = self
            .chain
            .append_block(txs)
            .map_err(|e| match e {
                LedgerError::Unauthorized { reason, .. } => GatewayError::Forbidden(reason),
                other => GatewayError::Ledger(other.to_string()),
            })?
            .clone();
        append_block_record(&self.config.chain_path, &block)
            .map_err(|e| GatewayError::Storage(e.to_string()))?;
        for tx in &block.txs {
            crate::ledger::apply_tx(&mut self.state, tx);
        }
        Ok(())
    }

    /// Queue an audit record; flushes into a block when the configured batch
    /// size is reached. Records always pass the contract rules.
    fn record(&mut self, actor: String, op: TxOp) -> Result<String, GatewayError> {
        let tx = Transaction::new(actor, op, self.now());
        let tx_id = tx.tx_id.clone();
        self.pending.push(tx);
        if self.pending.len() >= self.config.block_flush_size {
            self.flush()?;
        }
        Ok(tx_id)
    }

    /// Flush pending audit records into blocks. Called automatically per the
    /// flush size, before admin/audit operations, and on shutdown.
    pub fn flush(&mut self) -> Result<(), GatewayError> {
        while !self.pending.is_empty() {
            let take = self.pending.len().min(MAX_BLOCK_TXS);
            let batch: Vec<Transaction> = self.pending.drain(..take).collect();
            self.append_and_persist(batch)?;
        }
        Ok(())
    }

    /// The full query pipeline: authenticate, parse, resolve authorized
    /// views, record the decision, evaluate over the union of snapshots.
    pub fn handle_query(&mut self, req: &QueryRequest) -> Result<QueryResponse, GatewayError> {
        Ok(self.prepare_query(req)?.finish())
    }

    /// Decision-and-record phase only; evaluation happens in
    /// `PreparedQuery::finish`, which needs no gateway access and can run
    /// outside any lock.
    pub fn prepare_query(&mut self, req: &QueryRequest) -> Result<PreparedQuery, GatewayError> {
        let principal = self.authenticate(&req.user, &req.token)?;
        let query = parse_query_with_prefixes(&req.query, &self.prefixes)
            .map_err(|e| GatewayError::Parse(e.to_string()))?;
        let query_hash = sha256_hex(req.query.as_bytes());

        let explicit = req
            .view_ids
            .as_ref()
            .filter(|ids| !ids.is_empty())
            .map(|ids| {
                let mut ids: Vec<String> = ids.clone();
                ids.sort();
                ids.dedup();
                ids
            });

        let (authorized, denial) = match explicit {
            Some(requested) => {
                for id in &requested {
                    if !self.catalog.contains(id) {
                        return Err(GatewayError::NotFound(format!("unknown view: {id}")));
                    }
                }
                let unauthorized: Vec<String> = requested
                    .iter()
                    .filter(|id| {
                        !check_access(&self.state, &principal, &Privilege::read(id.as_str()))
                            .is_allow()
                    })
                    .cloned()
                    .collect();
                if unauthorized.is_empty() {
                    (requested, None)
                } else {
                    (
                        requested,
                        Some(format!(
                            "requested views not authorized for user {principal}: {}",
                            unauthorized.join(", ")
                        )),
                    )
                }
            }
            None => {
                let readable: Vec<String> = self
                    .catalog
                    .view_ids()
                    .into_iter()
                    .filter(|id| {
                        check_access(&self.state, &principal, &Privilege::read(id.as_str()))
                            .is_allow()
                    })
                    .collect();
                if readable.is_empty() {
                    (
                        Vec::new(),
                        Some(format!("user {principal} may not read any view")),
                    )
                } else {
                    (readable, None)
                }
            }
        };

        let decision = if denial.is_none() {
            Decision::Allow
        } else {
            Decision::Deny
        };
        let snapshots = if denial.is_none() {
            let mut snaps = Vec::with_capacity(authorized.len());
            for id in &authorized {
                let mat = self
                    .catalog
                    .get_view_snapshot(id, &self.store)
                    .map_err(|e| GatewayError::Ledger(e.to_string()))?;
                snaps.push(mat.graph);
            }
            snaps
        } else {
            Vec::new()
        };

        let tx_id = self.record(
            principal,
            TxOp::AccessRecord {
                user: req.user.clone(),
                query_hash,
                view_ids: authorized.clone(),
                decision,
            },
        )?;

        Ok(PreparedQuery {
            query,
            snapshots,
            view_ids: authorized,
            tx_id,
            deny_reason: denial,
        })
    }

    /// The guarded write path: check WRITE on the graph, apply removes then
    /// inserts, mark dependent views stale, persist, and record the decision.
    /// A denied write changes nothing.
    pub fn handle_write(
        &mut self,
        user: &str,
        token: &str,
        graph_id: &str,
        inserts: &[Triple],
        removes: &[Triple],
    ) -> Result<WriteResponse, GatewayError> {
        let principal = self.authenticate(user, token)?;
        if !self.store.contains_graph(graph_id) {
            return Err(GatewayError::NotFound(format!("unknown graph: {graph_id}")));
        }
        let ruling = check_access(&self.state, &principal, &Privilege::write(graph_id));
        match ruling {
            Ruling::Allow => {
                let graph = self.store.graph_mut(graph_id).expect("checked above");
                let mut removed = 0u64;
                for t in removes {
                    if graph.remove(t) {
                        removed += 1;
                    }
                }
                let mut inserted = 0u64;
                for t in inserts {
                    if graph.insert(t.clone()) {
                        inserted += 1;
                    }
                }
                self.persist_graph(graph_id)?;
                self.catalog.mark_stale(graph_id);
                let tx_id = self.record(
                    principal,
                    TxOp::WriteRecord {
                        user: user.to_string(),
                        graph_id: graph_id.to_string(),
                        inserted_count: inserted,
                        removed_count: removed,
                        decision: Decision::Allow,
                    },
                )?;
                Ok(WriteResponse {
                    status: RequestStatus::Ok,
                    inserted,
                    removed,
                    tx_id,
                    deny_reason: None,
                })
            }
            Ruling::Deny { reason } => {
                let tx_id = self.record(
                    principal,
                    TxOp::WriteRecord {
                        user: user.to_string(),
                        graph_id: graph_id.to_string(),
                        inserted_count: 0,
                        removed_count: 0,
                        decision: Decision::Deny,
                    },
                )?;
                Ok(WriteResponse {
                    status: RequestStatus::Denied,
                    inserted: 0,
                    removed: 0,
                    tx_id,
                    deny_reason: Some(reason),
                })
            }
        }
    }

    fn persist_graph(&self, graph_id: &str) -> Result<(), GatewayError> {
        let Some(path) = self.config.graphs.get(graph_id) else {
            return Ok(()); // graph not backed by a file
        };
        let graph = self.store.graph(graph_id).expect("caller checked");
        write_atomic(path, canonical_serialize(graph).as_bytes())
            .map_err(|e| GatewayError::Storage(format!("persisting graph {graph_id}: {e}")))
    }

    /// Build and append a GRANT_ROLE or ASSIGN_PRIVILEGE transaction; the
    /// contract rules inside `append_block` decide. Pending records flush
    /// first so chain order follows request order.
    pub fn admin_grant(
        &mut self,
        actor: &str,
        token: &str,
        payload: AdminPayload,
    ) -> Result<String, GatewayError> {
        let principal = self.authenticate(actor, token)?;
        let op = match payload {
            AdminPayload::Role { user, role } => TxOp::GrantRole { user, role },
            AdminPayload::Privilege { role, privilege } => {
                TxOp::AssignPrivilege { role, privilege }
            }
        };
        self.admin_append(principal, op)
    }

    /// Mirror of `admin_grant` with REVOKE_ROLE / REVOKE_PRIVILEGE.
    pub fn admin_revoke(
        &mut self,
        actor: &str,
        token: &str,
        payload: AdminPayload,
    ) -> Result<String, GatewayError> {
        let principal = self.authenticate(actor, token)?;
        let op = match payload {
            AdminPayload::Role { user, role } => TxOp::RevokeRole { user, role },
            AdminPayload::Privilege { role, privilege } => {
                TxOp::RevokePrivilege { role, privilege }
            }
        };
        self.admin_append(principal, op)
    }

    fn admin_append(&mut self, principal: String, op: TxOp) -> Result<String, GatewayError> {
        self.flush()?;
        let tx = Transaction::new(principal, op, self.now());
        let tx_id = tx.tx_id.clone();
        self.append_and_persist(vec![tx])?;
        Ok(tx_id)
    }

    fn require_super(&self, user: &str, token: &str) -> Result<String, GatewayError> {
        let principal = self.authenticate(user, token)?;
        if !self.state.is_super_user(&principal) {
            return Err(GatewayError::Forbidden(format!(
                "audit requires a super-user, {principal} is not one"
            )));
        }
        Ok(principal)
    }

    pub fn audit_verify(
        &mut self,
        user: &str,
        token: &str,
    ) -> Result<AuditVerifyReport, GatewayError> {
        self.require_super(user, token)?;
        self.flush()?;
        let report = match self.chain.verify_chain() {
            Ok(()) => AuditVerifyReport {
                ok: true,
                blocks: self.chain.blocks().len() as u64,
                failure_height: None,
                failure_reason: None,
            },
            Err(ChainFailure { height, reason }) => AuditVerifyReport {
                ok: false,
                blocks: self.chain.blocks().len() as u64,
                failure_height: Some(height),
                failure_reason: Some(reason),
            },
        };
        Ok(report)
    }

    pub fn audit_list(
        &mut self,
        user: &str,
        token: &str,
        filter: &TxFilter,
    ) -> Result<Vec<TxSummary>, GatewayError> {
        self.require_super(user, token)?;
        self.flush()?;
        let mut out = Vec::new();
        for block in self.chain.blocks() {
            let height = block.header.height;
            if filter.from_height.is_some_and(|from| height < from)
                || filter.to_height.is_some_and(|to| height > to)
            {
                continue;
            }
            for tx in &block.txs {
                let payload_user = payload_user_of(&tx.op);
                if let Some(want) = &filter.user {
                    let matches_actor = &tx.actor == want;
                    let matches_user = payload_user.as_deref() == Some(want.as_str());
                    if !matches_actor && !matches_user {
                        continue;
                    }
                }
                if let Some(kind) = &filter.kind {
                    if tx.op.kind_str() != kind {
                        continue;
                    }
                }
                out.push(TxSummary {
                    height,
                    tx_id: tx.tx_id.clone(),
                    kind: tx.op.kind_str().to_string(),
                    actor: tx.actor.clone(),
                    user: payload_user,
                    timestamp: tx.timestamp,
                    decision: decision_of_op(&tx.op),
                });
            }
        }
        Ok(out)
    }

    pub fn audit_export(&mut self, user: &str, token: &str) -> Result<String, GatewayError> {
        self.require_super(user, token)?;
        self.flush()?;
        Ok(export_json(&self.chain))
    }
}

impl Drop for Gateway {
    fn drop(&mut self) {
        let _ = self.flush();
    }
}

fn payload_user_of(op: &TxOp) -> Option<String> {
    match op {
        TxOp::RegisterUser { user }
        | TxOp::GrantRole { user, .. }
        | TxOp::RevokeRole { user, .. }
        | TxOp::AccessRecord { user, .. }
        | TxOp::WriteRecord { user, .. } => Some(user.clone()),
        _ => None,
    }
}

fn decision_of_op(op: &TxOp) -> Option<Decision> {
    match op {
        TxOp::AccessRecord { decision, .. } | TxOp::WriteRecord { decision, .. } => {
            Some(*decision)
        }
        _ => None,
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

/// The evaluation half of a query: immutable snapshots plus the parsed
/// query; `finish` is pure.
pub struct PreparedQuery {
    query: Query,
    snapshots: Vec<Arc<Graph>>,
    view_ids: Vec<String>,
    tx_id: String,
    deny_reason: Option<String>,
}

impl PreparedQuery {
    pub fn finish(self) -> QueryResponse {
        if let Some(reason) = self.deny_reason {
            let vars = match &self.query.projection {
                Projection::All => self.query.bgp_vars(),
                Projection::Vars(vs) => vs.clone(),
            };
            return QueryResponse {
                status: RequestStatus::Denied,
                view_ids: self.view_ids,
                results: ResultSet::empty(vars),
                tx_id: self.tx_id,
                deny_reason: Some(reason),
            };
        }
        let graphs: Vec<&Graph> = self.snapshots.iter().map(Arc::as_ref).collect();
        let results = evaluate(&self.query, &UnionSource::new(graphs));
        QueryResponse {
            status: RequestStatus::Ok,
            view_ids: self.view_ids,
            results,
            tx_id: self.tx_id,
            deny_reason: None,
        }
    }

    pub fn is_denied(&self) -> bool {
        self.deny_reason.is_some()
    }
}
