//! Embedding vectors, the similarity primitives built on them, and the
//! providers that turn text into vectors.

mod cache;
pub(crate) mod hash;
mod provider;
mod service;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cache::{load_cache, save_cache, CacheEmbedder, EmbeddingCache};
pub use hash::{hash_embed, HashEmbedder};
pub use provider::{embed_texts, Embedder, ProviderInfo, ProviderKind, ProviderSpec};
pub use service::ServiceEmbedder;

/// Default sentence-encoder dimension.
pub const DEFAULT_DIMENSION: usize = 384;

/// A dense, finite, non-empty real vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(EmbeddingVector(values))
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        EmbeddingVector(self.0.iter().map(|v| v * alpha).collect())
    }

    pub fn squared_distance(&self, other: &EmbeddingVector) -> f64 {
        squared_euclidean(&self.0, &other.0)
    }

    pub fn distance(&self, other: &EmbeddingVector) -> f64 {
        self.squared_distance(other).sqrt()
    }
}

impl TryFrom<Vec<f64>> for EmbeddingVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        EmbeddingVector::new(values)
    }
}

impl From<EmbeddingVector> for Vec<f64> {
    fn from(v: EmbeddingVector) -> Self {
        v.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// `u·v / (‖u‖‖v‖)`, clamped to `[-1, 1]` against rounding.
pub fn cosine_similarity(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64> {
    if u.dimension() != v.dimension() {
        return Err(Error::DimensionMismatch {
            expected: u.dimension(),
            found: v.dimension(),
        });
    }
    let nu2 = dot(&u.0, &u.0);
    let nv2 = dot(&v.0, &v.0);
    if nu2 == 0.0 || nv2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    // sqrt(x * x) == x exactly, so identical inputs give exactly 1.
    Ok((dot(&u.0, &v.0) / (nu2 * nv2).sqrt()).clamp(-1.0, 1.0))
}

/// Elementwise arithmetic mean.
pub fn mean_embedding<'a, I>(vectors: I) -> Result<EmbeddingVector>
where
    I: IntoIterator<Item = &'a EmbeddingVector>,
{
    let mut iter = vectors.into_iter();
    let first = iter.next().ok_or(Error::EmptyInput)?;
    let mut sum = first.0.clone();
    let mut count = 1usize;
    for v in iter {
        if v.dimension() != sum.len() {
            return Err(Error::DimensionMismatch {
                expected: sum.len(),
                found: v.dimension(),
            });
        }
        for (s, x) in sum.iter_mut().zip(&v.0) {
            *s += x;
        }
        count += 1;
    }
    let n = count as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    Ok(EmbeddingVector(sum))
}

pub(crate) fn check_dimensions(vectors: &[EmbeddingVector]) -> Result<usize> {
    let dim = vectors.first().ok_or(Error::EmptyInput)?.dimension();
    for v in vectors {
        if v.dimension() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dimension(),
            });
        }
    }
    Ok(dim)
}
