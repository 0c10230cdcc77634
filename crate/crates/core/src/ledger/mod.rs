//! Append-only hash-chained ledger of access-control transactions, the
//! deterministic contract rules that gate block entry, and the replayed
//! authorization state.
//!
//! Single node, no consensus: this process is the sole block producer.
//! Everything checkable lives in the chain structure and the rule functions.

mod chain;
mod file;
mod state;
mod tx;

pub use chain::{
    Block, BlockHeader, Chain, ChainFailure, GenesisConfig, LedgerError, BLOCK_VERSION,
    GENESIS_PREV_HASH, MAX_BLOCK_TXS,
};
pub use file::{
    append_block_record, decode_chain, encode_chain, encode_record, export_json, load_chain,
    save_chain, ChainFileError,
};
pub use state::{
    apply_tx, authorize_tx, check_access, decision_of, AccessControlState, Resource, Ruling,
};
pub use tx::{
    canonical_tx_bytes, Decision, Privilege, PrivilegeAction, ResourceKind, Transaction, TxOp,
};
