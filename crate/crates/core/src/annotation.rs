//! Cluster labeling by tokens whose embeddings sit closest to the cluster
//! centroid.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::embedding::{cosine_similarity, embed_texts, mean_embedding, Embedder, EmbeddingVector};
use crate::error::{Error, Result};

/// Bundled English stopword list, one word per line.
pub const STOPWORDS_TXT: &str = include_str!("../data/stopwords.txt");

pub const DEFAULT_TOP_TOKENS: usize = 5;

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS_TXT.lines().map(str::trim).filter(|w| !w.is_empty()).collect())
}

pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessOptions {
    /// Fold a plural "s" form into its stem when the stem also occurs.
    pub light_stemming: bool,
}

/// Unique preprocessed tokens of a cluster with their occurrence counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSet {
    pub cluster_id: usize,
    /// Sorted, unique.
    pub tokens: Vec<String>,
    pub source_counts: BTreeMap<String, usize>,
}

impl TokenSet {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenWeight {
    pub token: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAnnotation {
    pub cluster_id: usize,
    pub prominent: Vec<TokenWeight>,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl ClusterAnnotation {
    pub fn empty(cluster_id: usize, warning: impl Into<String>) -> Self {
        ClusterAnnotation {
            cluster_id,
            prominent: Vec::new(),
            label: String::new(),
            warning: Some(warning.into()),
        }
    }
}

fn keep(token: &str) -> bool {
    token.chars().count() >= 2 && !token.chars().all(|c| c.is_numeric()) && !is_stopword(token)
}

pub fn preprocess_tokens(sentences: &[String]) -> Result<TokenSet> {
    preprocess_tokens_with(0, sentences, PreprocessOptions::default())
}

/// Lowercases, splits on non-alphanumerics, and drops short tokens, pure
/// numbers and stopwords.
pub fn preprocess_tokens_with(cluster_id: usize, sentences: &[String], options: PreprocessOptions) -> Result<TokenSet> {
    if sentences.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for sentence in sentences {
        for token in crate::embedding::hash::split_tokens(sentence) {
            if keep(&token) {
                *counts.entry(token).or_default() += 1;
            }
        }
    }
    if options.light_stemming {
        let plurals: Vec<String> = counts
            .keys()
            .filter(|t| {
                t.strip_suffix('s')
                    .is_some_and(|stem| stem.chars().count() >= 2 && counts.contains_key(stem))
            })
            .cloned()
            .collect();
        for plural in plurals {
            let n = counts.remove(&plural).unwrap_or(0);
            *counts.get_mut(&plural[..plural.len() - 1]).unwrap() += n;
        }
    }
    Ok(TokenSet {
        cluster_id,
        tokens: counts.keys().cloned().collect(),
        source_counts: counts,
    })
}

/// Weight desc, then token asc.
pub fn weight_order(a: &TokenWeight, b: &TokenWeight) -> Ordering {
    b.weight
        .partial_cmp(&a.weight)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.token.cmp(&b.token))
}

/// Cosine similarity of each token's embedding to `centroid`, sorted by
/// [`weight_order`].
pub fn token_weights(
    centroid: &EmbeddingVector,
    token_set: &TokenSet,
    provider: &dyn Embedder,
) -> Result<Vec<TokenWeight>> {
    if token_set.is_empty() {
        return Ok(Vec::new());
    }
    let vectors = embed_texts(provider, &token_set.tokens)?;
    weights_from_vectors(centroid, &token_set.tokens, &vectors)
}

pub(crate) fn weights_from_vectors(
    centroid: &EmbeddingVector,
    tokens: &[String],
    vectors: &[EmbeddingVector],
) -> Result<Vec<TokenWeight>> {
    let mut weights = tokens
        .iter()
        .zip(vectors)
        .map(|(t, v)| {
            Ok(TokenWeight {
                token: t.clone(),
                weight: cosine_similarity(centroid, v)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    weights.sort_by(weight_order);
    Ok(weights)
}

/// Keeps the first `top_n` of an already sorted weight list.
pub fn select_prominent(cluster_id: usize, mut weights: Vec<TokenWeight>, top_n: usize) -> ClusterAnnotation {
    weights.truncate(top_n);
    let label = weights.iter().map(|w| w.token.as_str()).collect::<Vec<_>>().join(", ");
    ClusterAnnotation {
        cluster_id,
        prominent: weights,
        label,
        warning: None,
    }
}

/// Tokenize, embed sentences and tokens, weight tokens against the sentence
/// centroid and keep the `top_n` heaviest.
pub fn annotate_cluster(
    cluster_id: usize,
    sentences: &[String],
    provider: &dyn Embedder,
    top_n: usize,
    options: PreprocessOptions,
) -> Result<ClusterAnnotation> {
    let token_set = preprocess_tokens_with(cluster_id, sentences, options)?;
    if token_set.is_empty() {
        return Err(Error::NoTokens);
    }
    let sentence_vectors = embed_texts(provider, sentences)?;
    let centroid = mean_embedding(&sentence_vectors)?;
    let weights = token_weights(&centroid, &token_set, provider)?;
    Ok(select_prominent(cluster_id, weights, top_n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{hash_embed, HashEmbedder};

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn stopword_list_is_bundled() {
        assert_eq!(stopwords().len(), 179);
        assert!(is_stopword("the"));
        assert!(!is_stopword("last"));
    }

    #[test]
    fn all_stopwords() {
        assert!(preprocess_tokens(&s(&["The the THE"])).unwrap().is_empty());
    }

    #[test]
    fn empty_sentence_is_inert() {
        let t = preprocess_tokens(&s(&["", "acid"])).unwrap();
        assert_eq!(t.tokens, vec!["acid"]);
        assert!(matches!(preprocess_tokens(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn first_fixture_response() {
        let t = preprocess_tokens(&s(&["About acids & bases that we learned in the last lecture."])).unwrap();
        assert_eq!(t.tokens, vec!["acids", "bases", "last", "learned", "lecture"]);
    }

    #[test]
    fn drops_numbers_and_short_tokens() {
        let t = preprocess_tokens(&s(&["a 42 x9 B 2023 pH"])).unwrap();
        assert_eq!(t.tokens, vec!["ph", "x9"]);
    }

    #[test]
    fn counts_and_order_independence() {
        let a = preprocess_tokens(&s(&["ionic bonding", "covalent bonding"])).unwrap();
        let b = preprocess_tokens(&s(&["covalent bonding", "ionic bonding"])).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.source_counts["bonding"], 2);
    }

    #[test]
    fn light_stemming_merges_plurals_with_present_stem() {
        let opts = PreprocessOptions { light_stemming: true };
        let t = preprocess_tokens_with(0, &s(&["acids and acid", "bases"]), opts).unwrap();
        assert_eq!(t.tokens, vec!["acid", "bases"]);
        assert_eq!(t.source_counts["acid"], 2);
    }

    #[test]
    fn identity_and_orthogonal_weights() {
        let centroid = EmbeddingVector::new(vec![1.0, 0.0]).unwrap();
        let tokens = s(&["same", "ortho"]);
        let vectors = vec![
            EmbeddingVector::new(vec![2.0, 0.0]).unwrap(),
            EmbeddingVector::new(vec![0.0, 3.0]).unwrap(),
        ];
        let w = weights_from_vectors(&centroid, &tokens, &vectors).unwrap();
        assert_eq!(
            w[0],
            TokenWeight {
                token: "same".into(),
                weight: 1.0
            }
        );
        assert_eq!(
            w[1],
            TokenWeight {
                token: "ortho".into(),
                weight: 0.0
            }
        );
    }

    #[test]
    fn ties_break_lexicographically() {
        let centroid = EmbeddingVector::new(vec![1.0, 1.0]).unwrap();
        let tokens = s(&["zeta", "alpha"]);
        let v = EmbeddingVector::new(vec![1.0, 0.0]).unwrap();
        let w = weights_from_vectors(&centroid, &tokens, &[v.clone(), v]).unwrap();
        assert_eq!(w[0].token, "alpha");
    }

    #[test]
    fn annotation_is_deterministic() {
        let p = HashEmbedder::new(64, 3).unwrap();
        let a = annotate_cluster(0, &s(&["entropy enthalpy"]), &p, 5, Default::default()).unwrap();
        let b = annotate_cluster(0, &s(&["entropy enthalpy"]), &p, 5, Default::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.prominent.len(), 2);
        let mut toks: Vec<_> = a.prominent.iter().map(|w| w.token.as_str()).collect();
        toks.sort();
        assert_eq!(toks, vec!["enthalpy", "entropy"]);
        // With a bag-of-tokens encoder the centroid is the normalized sum of
        // both token vectors.
        let e = hash_embed("entropy", 64, 3);
        let c = hash_embed("entropy enthalpy", 64, 3);
        let expected = cosine_similarity(&c, &e).unwrap();
        let got = a.prominent.iter().find(|w| w.token == "entropy").unwrap().weight;
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn fewer_than_five_tokens() {
        let p = HashEmbedder::new(32, 1).unwrap();
        let a = annotate_cluster(2, &s(&["acid base salt"]), &p, 5, Default::default()).unwrap();
        assert_eq!(a.prominent.len(), 3);
        assert_eq!(a.cluster_id, 2);
        assert!(matches!(
            annotate_cluster(0, &s(&["the of and"]), &p, 5, Default::default()),
            Err(Error::NoTokens)
        ));
    }
}
