//! Gateway configuration file (JSON). Relative paths resolve against the
//! config file's directory. Token rotation is a config reload.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use super::auth::validate_token;
use super::prefix::DEFAULT_NAMESPACE;
use crate::ledger::MAX_BLOCK_TXS;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("config has no super-users")]
    NoSuperUsers,
    #[error("token for user {0} must be at least 32 hex characters")]
    WeakToken(String),
    #[error("block_flush_size must be between 1 and {MAX_BLOCK_TXS}, got {0}")]
    BadFlushSize(usize),
}

fn default_flush_size() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    /// graph id -> N-Triples file path
    graphs: BTreeMap<String, String>,
    /// view catalog file path
    #[serde(default)]
    views: Option<String>,
    /// chain file path
    chain: String,
    /// user id -> shared-secret token (>= 32 hex chars)
    credentials: BTreeMap<String, String>,
    super_users: Vec<String>,
    /// records per block before the pending queue flushes (1..=100)
    #[serde(default = "default_flush_size")]
    block_flush_size: usize,
    /// namespace bound to the bare `:` prefix
    #[serde(default)]
    default_namespace: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub graphs: BTreeMap<String, PathBuf>,
    pub views_path: Option<PathBuf>,
    pub chain_path: PathBuf,
    pub credentials: BTreeMap<String, String>,
    pub super_users: Vec<String>,
    pub block_flush_size: usize,
    pub default_namespace: String,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: ConfigFile = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Config::from_file(file, base)
    }

    fn from_file(file: ConfigFile, base: &Path) -> Result<Config, ConfigError> {
        if file.super_users.is_empty() {
            return Err(ConfigError::NoSuperUsers);
        }
        if file.block_flush_size == 0 || file.block_flush_size > MAX_BLOCK_TXS {
            return Err(ConfigError::BadFlushSize(file.block_flush_size));
        }
        for (user, token) in &file.credentials {
            if !validate_token(token) {
                return Err(ConfigError::WeakToken(user.clone()));
            }
        }
        let resolve = |p: &str| -> PathBuf {
            let p = Path::new(p);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base.join(p)
            }
        };
        Ok(Config {
            graphs: file
                .graphs
                .iter()
                .map(|(id, p)| (id.clone(), resolve(p)))
                .collect(),
            views_path: file.views.as_deref().map(resolve),
            chain_path: resolve(&file.chain),
            credentials: file.credentials,
            super_users: file.super_users,
            block_flush_size: file.block_flush_size,
            default_namespace: file
                .default_namespace
                .unwrap_or_else(|| DEFAULT_NAMESPACE.to_string()),
        })
    }
}
