//! Blocks and the hash-linked chain.
//!
//! Every header byte is covered by a hash somewhere: `prev_hash` links to the
//! previous header's hash, `data_hash` commits to the block body (the
//! concatenated canonical transaction bytes, or the genesis configuration),
//! the height must be sequential, the version fixed, and the header timestamp
//! must equal the last transaction's timestamp (for genesis it is bound into
//! `data_hash`). A single flipped byte anywhere in a persisted chain
//! therefore fails either deserialization or `verify_chain`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hash::sha256_hex;

use super::state::{apply_tx, authorize_tx, AccessControlState, Ruling};
use super::tx::Transaction;

/// prev_hash of the genesis block: 64 zero hex characters.
pub const GENESIS_PREV_HASH: &str =
    "0000000000000000000000000000000000000000000000000000000000000000";

pub const BLOCK_VERSION: u32 = 1;

/// Hard cap on transactions per block.
pub const MAX_BLOCK_TXS: usize = 100;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LedgerError {
    #[error("genesis requires at least one super-user")]
    EmptySuperUsers,
    #[error("cannot append an empty transaction batch")]
    EmptyBatch,
    #[error("batch of {got} transactions exceeds the {MAX_BLOCK_TXS}-tx block cap")]
    BatchTooLarge { got: usize },
    #[error("transaction {index} rejected by contract rules: {reason}")]
    Unauthorized { index: usize, reason: String },
    #[error("chain verification failed: {0}")]
    InvalidChain(ChainFailure),
}

/// First verification failure: where and why.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("block {height}: {reason}")]
pub struct ChainFailure {
    pub height: u64,
    pub reason: String,
}

impl ChainFailure {
    fn new(height: u64, reason: impl Into<String>) -> ChainFailure {
        ChainFailure {
            height,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenesisConfig {
    pub super_users: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockHeader {
    pub version: u32,
    pub height: u64,
    pub prev_hash: String,
    pub timestamp: u64,
    /// SHA-256 over the concatenated canonical tx bytes in order; for the
    /// genesis block, over the canonical genesis preimage instead.
    pub data_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub header: BlockHeader,
    pub txs: Vec<Transaction>,
    /// Present only on the genesis block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genesis: Option<GenesisConfig>,
}

fn canonical_json<T: Serialize>(value: &T) -> Vec<u8> {
    serde_json::to_value(value)
        .expect("ledger types serialize infallibly")
        .to_string()
        .into_bytes()
}

#[derive(Serialize)]
struct GenesisPreimage<'a> {
    super_users: &'a BTreeSet<String>,
    timestamp: u64,
}

fn genesis_data_hash(config: &GenesisConfig, timestamp: u64) -> String {
    sha256_hex(&canonical_json(&GenesisPreimage {
        super_users: &config.super_users,
        timestamp,
    }))
}

fn tx_data_hash(txs: &[Transaction]) -> String {
    let mut bytes = Vec::new();
    for tx in txs {
        bytes.extend_from_slice(&tx.canonical_bytes());
    }
    sha256_hex(&bytes)
}

impl Block {
    /// SHA-256 hex of the header's canonical bytes; what the next block's
    /// `prev_hash` links to.
    pub fn hash(&self) -> String {
        sha256_hex(&canonical_json(&self.header))
    }
}

/// The append-only chain, starting at genesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chain {
    blocks: Vec<Block>,
}

impl Chain {
    /// A one-block chain fixing the super-user set forever.
    pub fn genesis(super_users: &[String], timestamp: u64) -> Result<Chain, LedgerError> {
        if super_users.is_empty() {
            return Err(LedgerError::EmptySuperUsers);
        }
        let config = GenesisConfig {
            super_users: super_users.iter().cloned().collect(),
        };
        let header = BlockHeader {
            version: BLOCK_VERSION,
            height: 0,
            prev_hash: GENESIS_PREV_HASH.to_string(),
            timestamp,
            data_hash: genesis_data_hash(&config, timestamp),
        };
        Ok(Chain {
            blocks: vec![Block {
                header,
                txs: Vec::new(),
                genesis: Some(config),
            }],
        })
    }

    /// Rebuild from deserialized blocks; `verify_chain` decides validity.
    pub fn from_blocks(blocks: Vec<Block>) -> Chain {
        Chain { blocks }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn tip(&self) -> &Block {
        self.blocks.last().expect("chain always has genesis")
    }

    pub fn height(&self) -> u64 {
        self.tip().header.height
    }

    pub fn super_users(&self) -> BTreeSet<String> {
        self.blocks
            .first()
            .and_then(|b| b.genesis.as_ref())
            .map(|g| g.super_users.clone())
            .unwrap_or_default()
    }

    /// All transactions in chain order.
    pub fn transactions(&self) -> impl Iterator<Item = &Transaction> {
        self.blocks.iter().flat_map(|b| b.txs.iter())
    }

    /// Append one block holding `txs`. Every transaction must pass the
    /// contract rules against the state threaded through the batch in order;
    /// one denial rejects the whole batch and nothing is appended.
    pub fn append_block(&mut self, txs: Vec<Transaction>) -> Result<&Block, LedgerError> {
        if txs.is_empty() {
            return Err(LedgerError::EmptyBatch);
        }
        if txs.len() > MAX_BLOCK_TXS {
            return Err(LedgerError::BatchTooLarge { got: txs.len() });
        }
        let mut state = self.fold_state();
        for (index, tx) in txs.iter().enumerate() {
            match authorize_tx(&state, tx) {
                Ruling::Allow => apply_tx(&mut state, tx),
                Ruling::Deny { reason } => {
                    return Err(LedgerError::Unauthorized { index, reason })
                }
            }
        }
        let tip = self.tip();
        let header = BlockHeader {
            version: BLOCK_VERSION,
            height: tip.header.height + 1,
            prev_hash: tip.hash(),
            timestamp: txs.last().expect("non-empty").timestamp,
            data_hash: tx_data_hash(&txs),
        };
        self.blocks.push(Block {
            header,
            txs,
            genesis: None,
        });
        Ok(self.tip())
    }

    /// Fold the chain into the access-control state without verification;
    /// used internally where the in-memory chain is known-good.
    pub(crate) fn fold_state(&self) -> AccessControlState {
        let mut state = AccessControlState::with_super_users(self.super_users());
        for tx in self.transactions() {
            apply_tx(&mut state, tx);
        }
        state
    }

    /// Check, block by block: header linkage, data hash, height sequence,
    /// version, timestamp binding, tx integrity, and rule validity of every
    /// transaction against the replayed state. Returns the first failure.
    pub fn verify_chain(&self) -> Result<(), ChainFailure> {
        let Some(genesis) = self.blocks.first() else {
            return Err(ChainFailure::new(0, "chain has no genesis block"));
        };
        let Some(config) = &genesis.genesis else {
            return Err(ChainFailure::new(0, "genesis block lacks its configuration"));
        };
        if genesis.header.height != 0 {
            return Err(ChainFailure::new(0, "genesis height is not 0"));
        }
        if genesis.header.version != BLOCK_VERSION {
            return Err(ChainFailure::new(0, "unsupported block version"));
        }
        if genesis.header.prev_hash != GENESIS_PREV_HASH {
            return Err(ChainFailure::new(0, "genesis prev_hash is not all zeros"));
        }
        if !genesis.txs.is_empty() {
            return Err(ChainFailure::new(0, "genesis block body is not empty"));
        }
        if config.super_users.is_empty() {
            return Err(ChainFailure::new(0, "genesis has no super-users"));
        }
        if genesis.header.data_hash != genesis_data_hash(config, genesis.header.timestamp) {
            return Err(ChainFailure::new(0, "genesis data_hash mismatch"));
        }

        let mut state = AccessControlState::with_super_users(config.super_users.clone());
        for (i, block) in self.blocks.iter().enumerate().skip(1) {
            let height = block.header.height;
            let declared = i as u64;
            if height != declared {
                return Err(ChainFailure::new(
                    declared,
                    format!("height discontinuity: block at position {i} declares height {height}"),
                ));
            }
            if block.genesis.is_some() {
                return Err(ChainFailure::new(height, "non-genesis block carries genesis data"));
            }
            if block.header.version != BLOCK_VERSION {
                return Err(ChainFailure::new(height, "unsupported block version"));
            }
            let expected_prev = self.blocks[i - 1].hash();
            if block.header.prev_hash != expected_prev {
                return Err(ChainFailure::new(height, "prev_hash does not match parent header hash"));
            }
            if block.txs.is_empty() {
                return Err(ChainFailure::new(height, "non-genesis block body is empty"));
            }
            let last_ts = block.txs.last().expect("non-empty").timestamp;
            if block.header.timestamp != last_ts {
                return Err(ChainFailure::new(
                    height,
                    "header timestamp does not match the last transaction",
                ));
            }
            if block.header.data_hash != tx_data_hash(&block.txs) {
                return Err(ChainFailure::new(height, "data_hash mismatch"));
            }
            for tx in &block.txs {
                if tx.tx_id != tx.expected_tx_id() {
                    return Err(ChainFailure::new(
                        height,
                        format!("tx_id mismatch for transaction {}", tx.tx_id),
                    ));
                }
                match authorize_tx(&state, tx) {
                    Ruling::Allow => apply_tx(&mut state, tx),
                    Ruling::Deny { reason } => {
                        return Err(ChainFailure::new(
                            height,
                            format!("transaction violates contract rules: {reason}"),
                        ))
                    }
                }
            }
        }
        Ok(())
    }

    /// Verify, then fold into the authorization state.
    pub fn replay_state(&self) -> Result<AccessControlState, LedgerError> {
        self.verify_chain().map_err(LedgerError::InvalidChain)?;
        Ok(self.fold_state())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::tx::{Decision, Privilege, Transaction, TxOp};

    fn admin_grant(user: &str, role: &str, ts: u64) -> Transaction {
        Transaction::new(
            "admin",
            TxOp::GrantRole {
                user: user.into(),
                role: role.into(),
            },
            ts,
        )
    }

    fn new_chain() -> Chain {
        Chain::genesis(&["admin".to_string()], 1000).unwrap()
    }

    #[test]
    fn genesis_shape() {
        let chain = new_chain();
        let g = chain.tip();
        assert_eq!(g.header.height, 0);
        assert_eq!(g.header.prev_hash, GENESIS_PREV_HASH);
        assert_eq!(g.header.prev_hash.len(), 64);
        assert!(g.txs.is_empty());
        assert_eq!(chain.replay_state().unwrap().super_users.len(), 1);
    }

    #[test]
    fn genesis_requires_a_super_user() {
        assert_eq!(
            Chain::genesis(&[], 0).unwrap_err(),
            LedgerError::EmptySuperUsers
        );
    }

    #[test]
    fn append_valid_grant_extends_the_chain() {
        let mut chain = new_chain();
        chain.append_block(vec![admin_grant("alice", "curator", 1001)]).unwrap();
        assert_eq!(chain.height(), 1);
        assert_eq!(chain.verify_chain(), Ok(()));
        let state = chain.replay_state().unwrap();
        assert!(state.role_members["curator"].contains("alice"));
    }

    #[test]
    fn batch_with_one_invalid_tx_is_rejected_atomically() {
        let mut chain = new_chain();
        let valid = admin_grant("alice", "curator", 1001);
        let invalid = Transaction::new(
            "alice", // not a super-user, holds no DELEGATE
            TxOp::GrantRole {
                user: "bob".into(),
                role: "curator".into(),
            },
            1002,
        );
        let err = chain.append_block(vec![valid, invalid]).unwrap_err();
        assert!(matches!(err, LedgerError::Unauthorized { index: 1, .. }));
        assert_eq!(chain.height(), 0);
    }

    #[test]
    fn batch_authorization_threads_state_in_order() {
        let mut chain = new_chain();
        // grant DELEGATE(curator) to lead-role, put alice in lead, then alice grants:
        // all in one batch, each step authorized against the threaded state.
        let batch = vec![
            Transaction::new("admin", TxOp::RegisterUser { user: "alice".into() }, 1),
            Transaction::new(
                "admin",
                TxOp::AssignPrivilege {
                    role: "lead".into(),
                    privilege: Privilege::delegate("curator"),
                },
                2,
            ),
            admin_grant("alice", "lead", 3),
            Transaction::new(
                "alice",
                TxOp::GrantRole {
                    user: "bob".into(),
                    role: "curator".into(),
                },
                4,
            ),
        ];
        chain.append_block(batch).unwrap();
        assert_eq!(chain.verify_chain(), Ok(()));
    }

    #[test]
    fn empty_batch_is_rejected() {
        let mut chain = new_chain();
        assert_eq!(chain.append_block(vec![]).unwrap_err(), LedgerError::EmptyBatch);
    }

    #[test]
    fn tampering_with_a_tx_fails_verification() {
        let mut chain = new_chain();
        chain.append_block(vec![admin_grant("alice", "curator", 1001)]).unwrap();
        let mut tampered = chain.clone();
        tampered.blocks[1].txs[0].actor = "mallory".to_string();
        let failure = tampered.verify_chain().unwrap_err();
        assert_eq!(failure.height, 1);
        assert!(failure.reason.contains("tx_id") || failure.reason.contains("data_hash"));
    }

    #[test]
    fn reordering_blocks_fails_verification() {
        let mut chain = new_chain();
        chain.append_block(vec![admin_grant("alice", "curator", 1001)]).unwrap();
        chain.append_block(vec![admin_grant("bob", "curator", 1002)]).unwrap();
        let mut reordered = chain.clone();
        reordered.blocks.swap(1, 2);
        let failure = reordered.verify_chain().unwrap_err();
        assert_eq!(failure.height, 1);
    }

    #[test]
    fn replay_is_deterministic_and_revocation_cancels() {
        let mut chain = new_chain();
        chain.append_block(vec![admin_grant("alice", "curator", 1)]).unwrap();
        chain
            .append_block(vec![Transaction::new(
                "admin",
                TxOp::RevokeRole {
                    user: "alice".into(),
                    role: "curator".into(),
                },
                2,
            )])
            .unwrap();
        let s1 = chain.replay_state().unwrap();
        let s2 = chain.replay_state().unwrap();
        assert_eq!(s1, s2);
        assert!(!s1.role_members.contains_key("curator"));
    }

    #[test]
    fn records_never_change_state() {
        let mut chain = new_chain();
        let before = chain.replay_state().unwrap();
        chain
            .append_block(vec![Transaction::new(
                "whoever",
                TxOp::WriteRecord {
                    user: "whoever".into(),
                    graph_id: "g".into(),
                    inserted_count: 3,
                    removed_count: 0,
                    decision: Decision::Deny,
                },
                5,
            )])
            .unwrap();
        assert_eq!(chain.replay_state().unwrap(), before);
    }
}
