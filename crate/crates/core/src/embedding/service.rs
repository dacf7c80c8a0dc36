use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::provider::{Embedder, ProviderInfo, ProviderKind};
use super::EmbeddingVector;
use crate::error::{Error, Result};

const REQUEST_TIMEOUT: Duration = Duration::from_secs(30);
const MAX_ATTEMPTS: usize = 2;
pub const DEFAULT_BATCH_SIZE: usize = 64;

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    dim: usize,
    embeddings: Vec<Vec<f64>>,
}

/// Client for an HTTP embedding service exposing `POST /embed`.
pub struct ServiceEmbedder {
    endpoint: String,
    dimension: usize,
    batch_size: usize,
    agent: ureq::Agent,
}

impl ServiceEmbedder {
    pub fn new(endpoint: &str, dimension: usize) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(REQUEST_TIMEOUT))
            .build()
            .into();
        ServiceEmbedder {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            dimension,
            batch_size: DEFAULT_BATCH_SIZE,
            agent,
        }
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size.max(1);
        self
    }

    fn post_batch(&self, texts: &[String]) -> Result<EmbedResponse> {
        let url = format!("{}/embed", self.endpoint);
        let mut last_err = String::new();
        for _ in 0..MAX_ATTEMPTS {
            match self.agent.post(&url).send_json(EmbedRequest { texts }) {
                Ok(mut resp) => {
                    return resp
                        .body_mut()
                        .read_json::<EmbedResponse>()
                        .map_err(|e| Error::ServiceUnavailable(format!("bad response body: {e}")));
                }
                Err(e) => last_err = e.to_string(),
            }
        }
        Err(Error::ServiceUnavailable(format!("{url}: {last_err}")))
    }
}

impl std::fmt::Debug for ServiceEmbedder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ServiceEmbedder")
            .field("endpoint", &self.endpoint)
            .field("dimension", &self.dimension)
            .field("batch_size", &self.batch_size)
            .finish()
    }
}

impl Embedder for ServiceEmbedder {
    fn info(&self) -> ProviderInfo {
        ProviderInfo {
            kind: ProviderKind::Service,
            model_id: self.endpoint.clone(),
            dimension: self.dimension,
            seed: None,
        }
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>> {
        if texts.iter().any(|t| t.is_empty()) {
            return Err(Error::EmptyInput);
        }
        let mut out = Vec::with_capacity(texts.len());
        for batch in texts.chunks(self.batch_size) {
            let resp = self.post_batch(batch)?;
            if resp.dim != self.dimension {
                return Err(Error::DimensionMismatch {
                    expected: self.dimension,
                    found: resp.dim,
                });
            }
            if resp.embeddings.len() != batch.len() {
                return Err(Error::ServiceUnavailable(format!(
                    "service returned {} vectors for {} texts",
                    resp.embeddings.len(),
                    batch.len()
                )));
            }
            for values in resp.embeddings {
                if values.len() != self.dimension {
                    return Err(Error::DimensionMismatch {
                        expected: self.dimension,
                        found: values.len(),
                    });
                }
                out.push(EmbeddingVector::new(values)?);
            }
        }
        Ok(out)
    }
}
