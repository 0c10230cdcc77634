//! Transactions and their canonical byte form.
//!
//! `tx_id` is the SHA-256 of the canonical bytes: the key-sorted minified
//! JSON of every field except `tx_id` itself. Canonicalization goes through
//! `serde_json::Value`, whose object maps are BTree-backed, so keys sort at
//! every nesting level and the bytes are stable across platforms.

use serde::{Deserialize, Serialize};

use crate::hash::sha256_hex;

/// The outcome recorded for an access or write request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Allow,
    Deny,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PrivilegeAction {
    Read,
    Write,
    Delegate,
}

/// An (action, resource) pair: READ on a view, WRITE on a graph, DELEGATE on
/// a role. The constructors keep action and resource kind matched.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Privilege {
    pub action: PrivilegeAction,
    pub resource: String,
}

impl Privilege {
    pub fn read(view_id: impl Into<String>) -> Privilege {
        Privilege {
            action: PrivilegeAction::Read,
            resource: view_id.into(),
        }
    }

    pub fn write(graph_id: impl Into<String>) -> Privilege {
        Privilege {
            action: PrivilegeAction::Write,
            resource: graph_id.into(),
        }
    }

    pub fn delegate(role: impl Into<String>) -> Privilege {
        Privilege {
            action: PrivilegeAction::Delegate,
            resource: role.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceKind {
    View,
    Graph,
}

/// Transaction kind plus its payload, adjacently tagged so the wire form is
/// `{"kind": "...", "payload": {...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum TxOp {
    #[serde(rename = "REGISTER_USER")]
    RegisterUser { user: String },
    #[serde(rename = "REGISTER_RESOURCE")]
    RegisterResource {
        resource_kind: ResourceKind,
        resource_id: String,
    },
    #[serde(rename = "GRANT_ROLE")]
    GrantRole { user: String, role: String },
    #[serde(rename = "REVOKE_ROLE")]
    RevokeRole { user: String, role: String },
    #[serde(rename = "ASSIGN_PRIVILEGE")]
    AssignPrivilege { role: String, privilege: Privilege },
    #[serde(rename = "REVOKE_PRIVILEGE")]
    RevokePrivilege { role: String, privilege: Privilege },
    #[serde(rename = "ACCESS_RECORD")]
    AccessRecord {
        user: String,
        query_hash: String,
        view_ids: Vec<String>,
        decision: Decision,
    },
    #[serde(rename = "WRITE_RECORD")]
    WriteRecord {
        user: String,
        graph_id: String,
        inserted_count: u64,
        removed_count: u64,
        decision: Decision,
    },
}

impl TxOp {
    pub fn kind_str(&self) -> &'static str {
        match self {
            TxOp::RegisterUser { .. } => "REGISTER_USER",
            TxOp::RegisterResource { .. } => "REGISTER_RESOURCE",
            TxOp::GrantRole { .. } => "GRANT_ROLE",
            TxOp::RevokeRole { .. } => "REVOKE_ROLE",
            TxOp::AssignPrivilege { .. } => "ASSIGN_PRIVILEGE",
            TxOp::RevokePrivilege { .. } => "REVOKE_PRIVILEGE",
            TxOp::AccessRecord { .. } => "ACCESS_RECORD",
            TxOp::WriteRecord { .. } => "WRITE_RECORD",
        }
    }

    /// True for the audit-record kinds that never change replayed state.
    pub fn is_record(&self) -> bool {
        matches!(self, TxOp::AccessRecord { .. } | TxOp::WriteRecord { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Transaction {
    pub actor: String,
    pub op: TxOp,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub tx_id: String,
}

#[derive(Serialize)]
struct TxPreimage<'a> {
    actor: &'a str,
    op: &'a TxOp,
    timestamp: u64,
}

/// Key-sorted minified JSON of all fields except `tx_id`.
pub fn canonical_tx_bytes(actor: &str, op: &TxOp, timestamp: u64) -> Vec<u8> {
    let value = serde_json::to_value(TxPreimage {
        actor,
        op,
        timestamp,
    })
    .expect("transaction serialization cannot fail");
    value.to_string().into_bytes()
}

impl Transaction {
    pub fn new(actor: impl Into<String>, op: TxOp, timestamp: u64) -> Transaction {
        let actor = actor.into();
        let tx_id = sha256_hex(&canonical_tx_bytes(&actor, &op, timestamp));
        Transaction {
            actor,
            op,
            timestamp,
            tx_id,
        }
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        canonical_tx_bytes(&self.actor, &self.op, self.timestamp)
    }

    /// The tx_id this transaction's content hashes to; equals `tx_id` unless
    /// the stored record was tampered with.
    pub fn expected_tx_id(&self) -> String {
        sha256_hex(&self.canonical_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grant(actor: &str, user: &str, role: &str, ts: u64) -> Transaction {
        Transaction::new(
            actor,
            TxOp::GrantRole {
                user: user.to_string(),
                role: role.to_string(),
            },
            ts,
        )
    }

    #[test]
    fn same_logical_tx_has_identical_bytes() {
        let a = grant("admin", "alice", "curator", 100);
        let b = grant("admin", "alice", "curator", 100);
        assert_eq!(a.canonical_bytes(), b.canonical_bytes());
        assert_eq!(a.tx_id, b.tx_id);
    }

    #[test]
    fn timestamp_changes_the_bytes() {
        let a = grant("admin", "alice", "curator", 100);
        let b = grant("admin", "alice", "curator", 101);
        assert_ne!(a.canonical_bytes(), b.canonical_bytes());
        assert_ne!(a.tx_id, b.tx_id);
    }

    #[test]
    fn canonical_bytes_are_key_sorted_minified_json() {
        let tx = grant("admin", "alice", "curator", 100);
        let s = String::from_utf8(tx.canonical_bytes()).unwrap();
        assert_eq!(
            s,
            r#"{"actor":"admin","op":{"kind":"GRANT_ROLE","payload":{"role":"curator","user":"alice"}},"timestamp":100}"#
        );
    }

    #[test]
    fn tx_id_matches_recomputation() {
        let tx = grant("admin", "alice", "curator", 100);
        assert_eq!(tx.tx_id, tx.expected_tx_id());
        let mut tampered = tx.clone();
        tampered.actor = "mallory".to_string();
        assert_ne!(tampered.tx_id, tampered.expected_tx_id());
    }

    #[test]
    fn wire_form_round_trips() {
        let tx = Transaction::new(
            "gateway",
            TxOp::AccessRecord {
                user: "alice".into(),
                query_hash: "ab".repeat(32),
                view_ids: vec!["v-1".into(), "v-2".into()],
                decision: Decision::Deny,
            },
            7,
        );
        let json = serde_json::to_string(&serde_json::to_value(&tx).unwrap()).unwrap();
        let back: Transaction = serde_json::from_str(&json).unwrap();
        assert_eq!(tx, back);
        assert!(json.contains("\"decision\":\"deny\""));
        assert!(json.contains("\"kind\":\"ACCESS_RECORD\""));
    }
}
