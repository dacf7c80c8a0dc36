//! Precomputed embeddings stored as JSON lines.
//!
//! The first line is a header `{"dimension": 384, "model_id": "..."}`; each
//! following line is `{"text": "...", "vector": [...]}`. Keys are exact
//! strings with no normalization.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::provider::{Embedder, ProviderInfo, ProviderKind};
use super::EmbeddingVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingCache {
    dimension: usize,
    model_id: String,
    entries: BTreeMap<String, EmbeddingVector>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    dimension: usize,
    model_id: String,
}

#[derive(Serialize, Deserialize)]
struct Entry<'a> {
    #[serde(borrow)]
    text: std::borrow::Cow<'a, str>,
    vector: Vec<f64>,
}

impl EmbeddingCache {
    pub fn new(dimension: usize, model_id: impl Into<String>) -> Self {
        EmbeddingCache {
            dimension,
            model_id: model_id.into(),
            entries: BTreeMap::new(),
        }
    }

    /// Embeds every text with `provider` and stores the result.
    pub fn from_provider(provider: &dyn Embedder, texts: &[String]) -> Result<Self> {
        let info = provider.info();
        let mut cache = EmbeddingCache::new(info.dimension, info.model_id);
        let vectors = super::embed_texts(provider, texts)?;
        for (text, vector) in texts.iter().zip(vectors) {
            cache.insert(text.clone(), vector)?;
        }
        Ok(cache)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, text: &str) -> Option<&EmbeddingVector> {
        self.entries.get(text)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &EmbeddingVector)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Inserts or replaces the vector for `text`.
    pub fn insert(&mut self, text: String, vector: EmbeddingVector) -> Result<()> {
        if vector.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: vector.dimension(),
            });
        }
        self.entries.insert(text, vector);
        Ok(())
    }
}

pub fn save_cache(cache: &EmbeddingCache, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write_line = |value: String| -> Result<()> {
        out.write_all(value.as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|e| Error::io(path, e))
    };
    let header = Header {
        dimension: cache.dimension,
        model_id: cache.model_id.clone(),
    };
    write_line(serde_json::to_string(&header).expect("header serializes"))?;
    for (text, vector) in &cache.entries {
        let entry = Entry {
            text: text.as_str().into(),
            vector: vector.as_slice().to_vec(),
        };
        write_line(serde_json::to_string(&entry).expect("entry serializes"))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn load_cache(path: impl AsRef<Path>) -> Result<EmbeddingCache> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_cache(BufReader::new(file), path)
}

fn malformed(line: usize, reason: impl Into<String>) -> Error {
    Error::MalformedCacheFile {
        line,
        reason: reason.into(),
    }
}

fn parse_cache(reader: impl BufRead, path: &Path) -> Result<EmbeddingCache> {
    let mut lines = reader.lines().enumerate();
    let header: Header = match lines.next() {
        Some((_, line)) => {
            let line = line.map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&line).map_err(|e| malformed(1, format!("bad header: {e}")))?
        }
        None => return Err(malformed(1, "missing header")),
    };
    if header.dimension == 0 {
        return Err(malformed(1, "dimension must be positive"));
    }
    let mut cache = EmbeddingCache::new(header.dimension, header.model_id);
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: Entry = serde_json::from_str(&line).map_err(|e| malformed(lineno, e.to_string()))?;
        if entry.vector.len() != cache.dimension {
            return Err(malformed(
                lineno,
                format!(
                    "vector has length {}, header declares {}",
                    entry.vector.len(),
                    cache.dimension
                ),
            ));
        }
        let vector = EmbeddingVector::new(entry.vector).map_err(|e| malformed(lineno, e.to_string()))?;
        let text = entry.text.into_owned();
        if cache.entries.contains_key(&text) {
            return Err(malformed(lineno, format!("duplicate text {text:?}")));
        }
        cache.entries.insert(text, vector);
    }
    Ok(cache)
}

/// Provider backed by an [`EmbeddingCache`]; any uncached text is an error.
#[derive(Debug, Clone)]
pub struct CacheEmbedder {
    cache: EmbeddingCache,
}

impl CacheEmbedder {
    pub fn new(cache: EmbeddingCache) -> Self {
        CacheEmbedder { cache }
    }

    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        load_cache(path).map(CacheEmbedder::new)
    }

    pub fn cache(&self) -> &EmbeddingCache {
        &self.cache
    }
}

impl Embedder for CacheEmbedder {
    fn info(&self) -> ProviderInfo {
        ProviderInfo {
            kind: ProviderKind::Cache,
            model_id: self.cache.model_id.clone(),
            dimension: self.cache.dimension,
            seed: None,
        }
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
        texts
            .iter()
            .map(|t| self.cache.get(t).cloned().ok_or_else(|| Error::CacheMiss(t.clone())))
            .collect()
    }
}
