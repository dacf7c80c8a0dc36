//! Clusters the bundled chemistry-class fixture with the hash embedder and
//! prints the report.

use survey_cluster::embedding::HashEmbedder;
use survey_cluster::pipeline::{run_cluster, PipelineOptions};
use survey_cluster::report::{parse_survey, InputFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let survey = parse_survey(include_str!("../fixtures/responses.txt"), InputFormat::Text)?;
    let provider = HashEmbedder::new(384, 0)?;
    let report = run_cluster(&survey, &provider, &PipelineOptions::default())?;
    print!("{}", report.to_json());
    Ok(())
}
