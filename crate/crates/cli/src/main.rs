use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use survey_cluster::annotation::PreprocessOptions;
use survey_cluster::clustering::ClusteringConfig;
use survey_cluster::embedding::{Embedder, ProviderSpec, DEFAULT_DIMENSION};
use survey_cluster::insights::DEFAULT_MERGE_THRESHOLD;
use survey_cluster::pipeline::{run_assign, run_cluster, vocabulary, PipelineOptions};
use survey_cluster::report::{load_survey, load_titles, InputFormat, InsightReport, Palette, SCHEMA_VERSION};
use survey_cluster::{Error, Execution};

const EXIT_INTERNAL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_PROVIDER: u8 = 4;
const EXIT_TOO_FEW: u8 = 5;
const EXIT_NO_TITLES: u8 = 6;

/// Cluster free-text survey responses by embedding similarity, label the
/// clusters with their most representative tokens, or assign responses to
/// predefined titles.
#[derive(Parser, Debug)]
#[command(name = "survey-cluster")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pick k by silhouette, cluster, annotate and render wordclouds.
    Cluster(ClusterArgs),
    /// Assign each response to the most similar title.
    Assign(AssignArgs),
    /// Print every text an embedder must cover (responses, titles, tokens),
    /// one per line. Useful for building an offline cache.
    Vocab(VocabArgs),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Responses: JSON lines ({"id", "text"}) or one response per line.
    #[arg(long)]
    input: PathBuf,

    /// auto (by extension), jsonl or text.
    #[arg(long, default_value = "auto")]
    format: InputFormat,
}

#[derive(Args, Debug)]
struct EmbedArgs {
    /// hash, cache:PATH or service:URL.
    #[arg(long, default_value = "hash")]
    embedder: ProviderSpec,

    /// Embedding dimension for the hash and service embedders. A cache
    /// carries its own; if given, it must match.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    dim: Option<u64>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Run everything on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    embed: EmbedArgs,
    #[command(flatten)]
    output: OutputArgs,

    #[arg(long, default_value_t = 2)]
    k_min: usize,

    /// Defaults to min(20, responses - 1).
    #[arg(long)]
    k_max: Option<usize>,

    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    top_tokens: u64,

    /// Centroid cosine similarity at or above which two clusters are
    /// suggested for merging.
    #[arg(long, default_value_t = DEFAULT_MERGE_THRESHOLD, value_parser = parse_threshold)]
    merge_threshold: f64,

    /// Fold plural tokens into their singular when both occur.
    #[arg(long)]
    stem: bool,

    /// Directory for cluster_<id>.svg and unified.svg.
    #[arg(long)]
    svg_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AssignArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    embed: EmbedArgs,
    #[command(flatten)]
    output: OutputArgs,

    /// One title per line.
    #[arg(long)]
    titles: PathBuf,
}

#[derive(Args, Debug)]
struct VocabArgs {
    #[command(flatten)]
    input: InputArgs,

    #[arg(long)]
    titles: Option<PathBuf>,
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (-1.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [-1, 1]"))
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

fn input_failure(e: Error) -> Failure {
    Failure::new(EXIT_INPUT, e.to_string())
}

fn provider_failure(e: Error) -> Failure {
    Failure::new(EXIT_PROVIDER, e.to_string())
}

/// Classifies an error raised while running a pipeline.
fn pipeline_failure(e: Error) -> Failure {
    let code = match &e {
        Error::TooFewSamples { .. } => EXIT_TOO_FEW,
        Error::NoTitles => EXIT_NO_TITLES,
        Error::InvalidConfig(_) | Error::KTooLarge { .. } => EXIT_USAGE,
        Error::CacheMiss(_)
        | Error::ServiceUnavailable(_)
        | Error::DimensionMismatch { .. }
        | Error::NonFinite
        | Error::ZeroVector => EXIT_PROVIDER,
        _ => EXIT_INTERNAL,
    };
    Failure::new(code, e.to_string())
}

fn build_provider(args: &EmbedArgs) -> Result<Box<dyn Embedder>, Failure> {
    let dim = args.dim.map_or(DEFAULT_DIMENSION, |d| d as usize);
    let provider = args.embedder.build(dim, args.seed).map_err(provider_failure)?;
    if let Some(d) = args.dim {
        if provider.dimension() != d as usize {
            return Err(provider_failure(Error::DimensionMismatch {
                expected: d as usize,
                found: provider.dimension(),
            }));
        }
    }
    Ok(provider)
}

impl EmbedArgs {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::new(EXIT_INTERNAL, format!("cannot write {}: {e}", path.display())))
}

fn emit_report(report: &InsightReport, out: &OutputArgs) -> Result<(), Failure> {
    let json = report.to_json();
    match &out.out {
        Some(path) => write_file(path, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn cluster(args: ClusterArgs) -> Result<(), Failure> {
    let survey = load_survey(&args.input.input, args.input.format).map_err(input_failure)?;
    let provider = build_provider(&args.embed)?;
    let options = PipelineOptions {
        clustering: ClusteringConfig {
            k_min: args.k_min,
            k_max: args.k_max,
            seed: args.embed.seed,
            ..Default::default()
        }
        .with_execution(args.embed.execution()),
        top_tokens: args.top_tokens as usize,
        merge_threshold: args.merge_threshold,
        preprocess: PreprocessOptions {
            light_stemming: args.stem,
        },
    };
    let report = run_cluster(&survey, provider.as_ref(), &options).map_err(pipeline_failure)?;
    let svgs = match &args.svg_dir {
        Some(_) => report
            .render_svgs(&Palette::default())
            .map_err(|e| Failure::new(EXIT_INTERNAL, e.to_string()))?,
        None => Vec::new(),
    };

    // Everything is computed; only now touch the filesystem.
    if let Some(dir) = &args.svg_dir {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::new(EXIT_INTERNAL, format!("cannot create {}: {e}", dir.display())))?;
        for (name, svg) in &svgs {
            write_file(&dir.join(name), svg)?;
        }
    }
    emit_report(&report, &args.output)
}

fn assign(args: AssignArgs) -> Result<(), Failure> {
    let survey = load_survey(&args.input.input, args.input.format).map_err(input_failure)?;
    let titles = load_titles(&args.titles).map_err(input_failure)?;
    if titles.is_empty() {
        return Err(Failure::new(
            EXIT_NO_TITLES,
            format!("titles file {} contains no titles", args.titles.display()),
        ));
    }
    let provider = build_provider(&args.embed)?;
    let options = PipelineOptions {
        clustering: ClusteringConfig::default().with_execution(args.embed.execution()),
        ..Default::default()
    };
    let report = run_assign(&survey, &titles, provider.as_ref(), &options).map_err(pipeline_failure)?;
    emit_report(&report, &args.output)
}

fn vocab(args: VocabArgs) -> Result<(), Failure> {
    let survey = load_survey(&args.input.input, args.input.format).map_err(input_failure)?;
    let titles = match &args.titles {
        Some(path) => load_titles(path).map_err(input_failure)?,
        None => Vec::new(),
    };
    let texts = vocabulary(&survey, &titles).map_err(pipeline_failure)?;
    for t in texts {
        println!("{t}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let version = format!("{} (report schema {SCHEMA_VERSION})", env!("CARGO_PKG_VERSION"));
    let matches = Cli::command().version(version).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Cluster(args) => cluster(args),
        Command::Assign(args) => assign(args),
        Command::Vocab(args) => vocab(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("survey-cluster: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
