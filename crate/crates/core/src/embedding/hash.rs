use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::provider::{Embedder, ProviderInfo, ProviderKind};
use super::EmbeddingVector;
use crate::error::{Error, Result};

pub const HASH_MODEL_ID: &str = "hash-bag-of-tokens-v1";

/// Deterministic bag-of-tokens embedder.
///
/// Every token maps to a pseudo-random unit vector drawn from a ChaCha8
/// stream keyed by `SHA-256(seed ‖ token)`; a text embeds to the normalized
/// mean of its token vectors. Only IEEE-exact operations (add, mul, div,
/// sqrt) touch the values, so output is identical on every platform.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dimension: usize,
    seed: u64,
}

impl HashEmbedder {
    pub fn new(dimension: usize, seed: u64) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::InvalidConfig(format!(
                "hash embedder dimension must be at least 2, got {dimension}"
            )));
        }
        Ok(HashEmbedder { dimension, seed })
    }
}

impl Embedder for HashEmbedder {
    fn info(&self) -> ProviderInfo {
        ProviderInfo {
            kind: ProviderKind::Hash,
            model_id: HASH_MODEL_ID.to_string(),
            dimension: self.dimension,
            seed: Some(self.seed),
        }
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
        Ok(texts.iter().map(|t| hash_embed(t, self.dimension, self.seed)).collect())
    }
}

/// Lowercased alphanumeric runs; everything else separates tokens.
pub(crate) fn split_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|s| !s.is_empty())
        .map(str::to_lowercase)
}

fn token_vector(token: &str, dimension: usize, seed: u64) -> Vec<f64> {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(token.as_bytes());
    let key: [u8; 32] = hasher.finalize().into();
    let mut rng = ChaCha8Rng::from_seed(key);
    loop {
        let v: Vec<f64> = (0..dimension).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        if let Some(unit) = normalize(v) {
            return unit;
        }
    }
}

fn normalize(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Some(v)
}

/// Embeds `text` as the normalized mean of its token vectors. Texts without
/// tokens embed to the vector of the empty string.
pub fn hash_embed(text: &str, dimension: usize, seed: u64) -> EmbeddingVector {
    let dimension = dimension.max(2);
    let mut sum = vec![0.0; dimension];
    let mut any = false;
    for token in split_tokens(text) {
        any = true;
        for (s, x) in sum.iter_mut().zip(token_vector(&token, dimension, seed)) {
            *s += x;
        }
    }
    let values = if any {
        normalize(sum).unwrap_or_else(|| token_vector("", dimension, seed))
    } else {
        token_vector("", dimension, seed)
    };
    EmbeddingVector(values)
}
