use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CacheEmbedder, EmbeddingVector, HashEmbedder, ServiceEmbedder};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Hash,
    Cache,
    Service,
}

/// Provider metadata recorded in reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderInfo {
    pub kind: ProviderKind,
    pub model_id: String,
    pub dimension: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

/// Source of text embeddings. Every vector returned by one instance has
/// dimension `info().dimension`.
pub trait Embedder: Send + Sync {
    fn info(&self) -> ProviderInfo;

    fn dimension(&self) -> usize {
        self.info().dimension
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>>;
}

/// Embeds `texts` in order, checking count and dimension of the result.
pub fn embed_texts(provider: &dyn Embedder, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
    if texts.is_empty() {
        return Err(Error::EmptyInput);
    }
    let vectors = provider.embed(texts)?;
    if vectors.len() != texts.len() {
        return Err(Error::LengthMismatch {
            expected: texts.len(),
            found: vectors.len(),
        });
    }
    let dim = provider.dimension();
    if let Some(bad) = vectors.iter().find(|v| v.dimension() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dimension(),
        });
    }
    Ok(vectors)
}

/// Parsed form of `hash`, `cache:PATH` or `service:URL`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderSpec {
    Hash,
    Cache(PathBuf),
    Service(String),
}

impl ProviderSpec {
    /// `dimension` applies to the hash and service kinds; a cache declares
    /// its own dimension in its header.
    pub fn build(&self, dimension: usize, seed: u64) -> Result<Box<dyn Embedder>> {
        Ok(match self {
            ProviderSpec::Hash => Box::new(HashEmbedder::new(dimension, seed)?),
            ProviderSpec::Cache(path) => Box::new(CacheEmbedder::open(path)?),
            ProviderSpec::Service(url) => Box::new(ServiceEmbedder::new(url, dimension)),
        })
    }
}

impl FromStr for ProviderSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "hash" {
            return Ok(ProviderSpec::Hash);
        }
        if let Some(path) = s.strip_prefix("cache:").filter(|p| !p.is_empty()) {
            return Ok(ProviderSpec::Cache(PathBuf::from(path)));
        }
        if let Some(url) = s.strip_prefix("service:").filter(|u| !u.is_empty()) {
            return Ok(ProviderSpec::Service(url.to_string()));
        }
        Err(format!(
            "unknown embedder {s:?}; expected hash, cache:PATH or service:URL"
        ))
    }
}

impl fmt::Display for ProviderSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProviderSpec::Hash => f.write_str("hash"),
            ProviderSpec::Cache(p) => write!(f, "cache:{}", p.display()),
            ProviderSpec::Service(u) => write!(f, "service:{u}"),
        }
    }
}
