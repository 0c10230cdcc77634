//! Persistence: the chain as a file of length-prefixed block records.
//!
//! Byte layout, repeated per block in chain order:
//!
//! ```text
//! +----------------------+---------------------------------------------+
//! | length: u32, big-end | payload: canonical JSON of the block        |
//! +----------------------+---------------------------------------------+
//! ```
//!
//! The payload is the key-sorted minified JSON object
//! `{"genesis":{...}?, "header":{...}, "txs":[...]}` (the `genesis` key only
//! on block 0). Because the JSON is canonical, load followed by save is
//! byte-identical, and any single-byte corruption either breaks decoding or
//! is caught by `verify_chain`.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use super::chain::{Block, Chain};

#[derive(Debug, Error)]
pub enum ChainFileError {
    #[error("chain file I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("truncated length prefix at byte offset {0}")]
    TruncatedPrefix(usize),
    #[error("record at byte offset {offset} declares {declared} bytes but only {available} remain")]
    TruncatedRecord {
        offset: usize,
        declared: usize,
        available: usize,
    },
    #[error("malformed block record at byte offset {offset}: {source}")]
    MalformedRecord {
        offset: usize,
        source: serde_json::Error,
    },
    #[error("chain file is empty")]
    Empty,
}

fn canonical_block_json(block: &Block) -> Vec<u8> {
    serde_json::to_value(block)
        .expect("block serialization cannot fail")
        .to_string()
        .into_bytes()
}

pub fn encode_record(block: &Block) -> Vec<u8> {
    let payload = canonical_block_json(block);
    let mut out = Vec::with_capacity(4 + payload.len());
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    out.extend_from_slice(&payload);
    out
}

/// The whole chain in the on-disk byte layout.
pub fn encode_chain(chain: &Chain) -> Vec<u8> {
    let mut out = Vec::new();
    for block in chain.blocks() {
        out.extend_from_slice(&encode_record(block));
    }
    out
}

/// Decode a chain from its byte layout. Structural validity only; run
/// `verify_chain` for hash and rule checks.
pub fn decode_chain(bytes: &[u8]) -> Result<Chain, ChainFileError> {
    if bytes.is_empty() {
        return Err(ChainFileError::Empty);
    }
    let mut blocks = Vec::new();
    let mut offset = 0usize;
    while offset < bytes.len() {
        if bytes.len() - offset < 4 {
            return Err(ChainFileError::TruncatedPrefix(offset));
        }
        let mut len_buf = [0u8; 4];
        len_buf.copy_from_slice(&bytes[offset..offset + 4]);
        let declared = u32::from_be_bytes(len_buf) as usize;
        let start = offset + 4;
        let available = bytes.len() - start;
        if declared > available {
            return Err(ChainFileError::TruncatedRecord {
                offset,
                declared,
                available,
            });
        }
        let payload = &bytes[start..start + declared];
        let block: Block = serde_json::from_slice(payload)
            .map_err(|source| ChainFileError::MalformedRecord { offset, source })?;
        blocks.push(block);
        offset = start + declared;
    }
    Ok(Chain::from_blocks(blocks))
}

pub fn save_chain(path: &Path, chain: &Chain) -> Result<(), ChainFileError> {
    let mut f = File::create(path)?;
    f.write_all(&encode_chain(chain))?;
    f.sync_all()?;
    Ok(())
}

pub fn load_chain(path: &Path) -> Result<Chain, ChainFileError> {
    let bytes = std::fs::read(path)?;
    decode_chain(&bytes)
}

/// Append one block record to an existing chain file.
pub fn append_block_record(path: &Path, block: &Block) -> Result<(), ChainFileError> {
    let mut f = OpenOptions::new().append(true).open(path)?;
    f.write_all(&encode_record(block))?;
    f.sync_all()?;
    Ok(())
}

/// Canonical JSON array of all blocks, for external verification.
pub fn export_json(chain: &Chain) -> String {
    serde_json::to_value(chain.blocks())
        .expect("block serialization cannot fail")
        .to_string()
}
