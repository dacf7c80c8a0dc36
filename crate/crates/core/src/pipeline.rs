//! End-to-end cluster and assign runs producing an [`InsightReport`].

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::annotation::{
    preprocess_tokens_with, select_prominent, weights_from_vectors, ClusterAnnotation, PreprocessOptions,
    DEFAULT_TOP_TOKENS,
};
use crate::assignment::{assign_labels, build_assignment_matrix_with, label_similarity_stats, LOW_SIMILARITY_FLAG};
use crate::clustering::{find_optimal_k, ClusteringConfig};
use crate::embedding::{embed_texts, mean_embedding, Embedder, EmbeddingVector};
use crate::error::{Error, Result};
use crate::insights::{
    centroid_correlation, cluster_stats, cluster_wordcloud, density_coefficients, suggest_merges, unified_wordcloud,
    DEFAULT_MERGE_THRESHOLD,
};
use crate::report::{
    AssignedResponse, AssignmentReport, ClusterReport, InsightReport, KScore, KSelectionTrace, LabelReport, Mode,
    ReportSettings, SurveyInput, Wordclouds, SCHEMA_VERSION,
};

pub const GENERATOR: &str = concat!("survey-cluster ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    pub clustering: ClusteringConfig,
    pub top_tokens: usize,
    pub merge_threshold: f64,
    pub preprocess: PreprocessOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            clustering: ClusteringConfig::default(),
            top_tokens: DEFAULT_TOP_TOKENS,
            merge_threshold: DEFAULT_MERGE_THRESHOLD,
            preprocess: PreprocessOptions::default(),
        }
    }
}

impl PipelineOptions {
    fn settings(&self) -> ReportSettings {
        ReportSettings {
            seed: self.clustering.seed,
            top_tokens: self.top_tokens,
            merge_threshold: self.merge_threshold,
            light_stemming: self.preprocess.light_stemming,
        }
    }
}

/// Embed, pick k by silhouette, annotate each cluster and assemble the
/// report. Clusters are numbered largest first.
pub fn run_cluster(survey: &SurveyInput, provider: &dyn Embedder, options: &PipelineOptions) -> Result<InsightReport> {
    let m = survey.len();
    if m < 3 {
        return Err(Error::TooFewSamples { m });
    }
    let texts = survey.texts();
    let vectors = embed_texts(provider, &texts)?;
    let selection = find_optimal_k(&vectors, &options.clustering)?;
    let model = selection.model.canonicalized();
    let members = model.members();

    let token_sets = members
        .iter()
        .enumerate()
        .map(|(c, idx)| {
            let sentences: Vec<String> = idx.iter().map(|&i| texts[i].clone()).collect();
            preprocess_tokens_with(c, &sentences, options.preprocess)
        })
        .collect::<Result<Vec<_>>>()?;

    let vocabulary: Vec<String> = token_sets
        .iter()
        .flat_map(|t| t.tokens.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let token_vectors: HashMap<&str, EmbeddingVector> = if vocabulary.is_empty() {
        HashMap::new()
    } else {
        vocabulary
            .iter()
            .map(String::as_str)
            .zip(embed_texts(provider, &vocabulary)?)
            .collect()
    };

    let mut annotations = Vec::with_capacity(model.k);
    for (c, token_set) in token_sets.iter().enumerate() {
        if token_set.is_empty() {
            annotations.push(ClusterAnnotation::empty(c, "no tokens left after stopword removal"));
            continue;
        }
        let centroid = mean_embedding(members[c].iter().map(|&i| &vectors[i]))?;
        let tvecs: Vec<EmbeddingVector> = token_set
            .tokens
            .iter()
            .map(|t| token_vectors[t.as_str()].clone())
            .collect();
        let weights = weights_from_vectors(&centroid, &token_set.tokens, &tvecs)?;
        annotations.push(select_prominent(c, weights, options.top_tokens));
    }

    let sizes = model.sizes();
    let rho = density_coefficients(&sizes, m)?;
    let unified = unified_wordcloud(&annotations, &rho)?;
    let correlation = centroid_correlation(&model.centroids, options.merge_threshold)?;
    let merges = suggest_merges(&correlation);

    let grouped: BTreeMap<usize, Vec<&str>> = members
        .iter()
        .enumerate()
        .map(|(c, idx)| (c, idx.iter().map(|&i| texts[i].as_str()).collect()))
        .collect();
    let stats = cluster_stats(&grouped)?;

    let clusters = annotations
        .iter()
        .zip(stats)
        .enumerate()
        .map(|(c, (annotation, stats))| ClusterReport {
            cluster_id: c,
            size: sizes[c],
            density: rho.rho[c],
            members: members[c].iter().map(|&i| survey.responses[i].id).collect(),
            annotation: annotation.clone(),
            stats,
        })
        .collect();

    let (k_min, k_max) = options.clustering.k_range(m);
    let trace = KSelectionTrace {
        k_min,
        k_max,
        k_star: selection.k_star,
        silhouette: selection.scores[&selection.k_star],
        scores: selection
            .scores
            .iter()
            .map(|(&k, &s)| KScore { k, silhouette: s })
            .collect(),
        inertia: model.inertia,
    };

    Ok(InsightReport {
        version: SCHEMA_VERSION.to_string(),
        generator: GENERATOR.to_string(),
        mode: Mode::Cluster,
        provider: provider.info(),
        settings: options.settings(),
        response_count: m,
        k_selection: Some(trace),
        clusters,
        centroid_correlation: Some(correlation),
        merge_suggestions: Some(merges),
        assignment: None,
        wordclouds: Wordclouds {
            clusters: annotations
                .iter()
                .map(cluster_wordcloud)
                .filter(|e| !e.is_empty())
                .collect(),
            unified,
        },
    })
}

/// Assign every response to its most similar title.
pub fn run_assign(
    survey: &SurveyInput,
    titles: &[String],
    provider: &dyn Embedder,
    options: &PipelineOptions,
) -> Result<InsightReport> {
    if titles.is_empty() {
        return Err(Error::NoTitles);
    }
    if survey.is_empty() {
        return Err(Error::EmptyInput);
    }
    let texts = survey.texts();
    let response_vectors = embed_texts(provider, &texts)?;
    let title_vectors = embed_texts(provider, titles)?;
    let matrix = build_assignment_matrix_with(&response_vectors, &title_vectors, options.clustering.execution)?;
    let result = assign_labels(&matrix);
    let table = label_similarity_stats(&matrix, &result)?;

    let responses = result
        .assigned
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let similarity = matrix.get(i, j);
            AssignedResponse {
                id: survey.responses[i].id,
                label: j,
                similarity,
                low_similarity: similarity < LOW_SIMILARITY_FLAG,
            }
        })
        .collect();

    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); titles.len()];
    for (i, &j) in result.assigned.iter().enumerate() {
        buckets[j].push(i);
    }
    let labels = table
        .into_iter()
        .map(|stat| {
            let idx = &buckets[stat.label];
            let word_stats = if idx.is_empty() {
                None
            } else {
                let mut one = BTreeMap::new();
                one.insert(stat.label, idx.iter().map(|&i| texts[i].as_str()).collect::<Vec<_>>());
                cluster_stats(&one)?.pop()
            };
            Ok(LabelReport {
                label: stat.label,
                title: titles[stat.label].clone(),
                members: idx.iter().map(|&i| survey.responses[i].id).collect(),
                stat,
                word_stats,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(InsightReport {
        version: SCHEMA_VERSION.to_string(),
        generator: GENERATOR.to_string(),
        mode: Mode::Assign,
        provider: provider.info(),
        settings: options.settings(),
        response_count: survey.len(),
        k_selection: None,
        clusters: Vec::new(),
        centroid_correlation: None,
        merge_suggestions: None,
        assignment: Some(AssignmentReport {
            titles: titles.to_vec(),
            responses,
            labels,
            matrix: matrix.to_rows(),
        }),
        wordclouds: Wordclouds::default(),
    })
}

/// Every text an embedder must know to run both modes on `survey`: the
/// responses, the titles and each candidate token. Light stemming only
/// merges forms, so the unstemmed token set covers it too.
pub fn vocabulary(survey: &SurveyInput, titles: &[String]) -> Result<Vec<String>> {
    let mut out: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    let texts = survey.texts();
    for t in texts.iter().chain(titles) {
        if seen.insert(t.clone()) {
            out.push(t.clone());
        }
    }
    if !texts.is_empty() {
        let tokens = preprocess_tokens_with(0, &texts, PreprocessOptions::default())?;
        for t in tokens.tokens {
            if seen.insert(t.clone()) {
                out.push(t);
            }
        }
    }
    Ok(out)
}
