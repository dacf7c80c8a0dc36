//! Report schema, survey input parsing and SVG rendering.

pub mod survey;
pub mod svg;

use serde::{Deserialize, Serialize};

use crate::annotation::ClusterAnnotation;
use crate::assignment::LabelStat;
use crate::embedding::ProviderInfo;
use crate::insights::{CentroidCorrelation, ClusterStats, MergeSuggestion, WordcloudEntry};

pub use survey::{load_survey, load_titles, parse_survey, parse_titles, InputFormat, Response, SurveyInput};
pub use svg::{layout_wordcloud, render_wordcloud_svg, Palette, PlacedWord};

/// Version of the report layout below.
pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Cluster,
    Assign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsightReport {
    pub version: String,
    pub generator: String,
    pub mode: Mode,
    pub provider: ProviderInfo,
    pub settings: ReportSettings,
    pub response_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_selection: Option<KSelectionTrace>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clusters: Vec<ClusterReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centroid_correlation: Option<CentroidCorrelation>,
    /// Cluster mode only; an empty list means no pair crossed the threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merge_suggestions: Option<Vec<MergeSuggestion>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<AssignmentReport>,
    pub wordclouds: Wordclouds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSettings {
    pub seed: u64,
    pub top_tokens: usize,
    pub merge_threshold: f64,
    pub light_stemming: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KScore {
    pub k: usize,
    pub silhouette: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSelectionTrace {
    pub k_min: usize,
    pub k_max: usize,
    pub k_star: usize,
    pub silhouette: f64,
    pub scores: Vec<KScore>,
    pub inertia: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub cluster_id: usize,
    pub size: usize,
    pub density: f64,
    /// Response ids in input order.
    pub members: Vec<u64>,
    pub annotation: ClusterAnnotation,
    pub stats: ClusterStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignedResponse {
    pub id: u64,
    pub label: usize,
    pub similarity: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub low_similarity: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelReport {
    pub label: usize,
    pub title: String,
    pub stat: LabelStat,
    pub members: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_stats: Option<ClusterStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentReport {
    pub titles: Vec<String>,
    pub responses: Vec<AssignedResponse>,
    pub labels: Vec<LabelReport>,
    /// Full `m × l` similarity matrix, rows in response order.
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Wordclouds {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clusters: Vec<Vec<WordcloudEntry>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unified: Vec<WordcloudEntry>,
}

impl InsightReport {
    /// Pretty JSON with a trailing newline; key order follows the schema.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// SVG documents named `cluster_<id>.svg` and `unified.svg`, rebuilt
    /// purely from the report's wordcloud entries.
    pub fn render_svgs(&self, palette: &Palette) -> crate::Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        for entries in &self.wordclouds.clusters {
            if let Some(first) = entries.first() {
                out.push((
                    format!("cluster_{}.svg", first.cluster_id),
                    render_wordcloud_svg(entries, palette)?,
                ));
            }
        }
        if !self.wordclouds.unified.is_empty() {
            out.push((
                "unified.svg".to_string(),
                render_wordcloud_svg(&self.wordclouds.unified, palette)?,
            ));
        }
        Ok(out)
    }
}
