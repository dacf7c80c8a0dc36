//! Clustering and labeling of open-ended survey responses in embedding space.
//!
//! Responses are embedded by a pluggable [`embedding::Embedder`], clustered
//! with k-means at the k that maximizes the silhouette score, annotated with
//! the tokens nearest each cluster centroid, and summarized as density-scaled
//! wordclouds and descriptive statistics. Alternatively every response can be
//! assigned to the most similar of a list of user-provided titles.

pub mod annotation;
pub mod assignment;
pub mod clustering;
pub mod embedding;
pub mod error;
pub mod exec;
pub mod insights;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
pub use exec::Execution;
