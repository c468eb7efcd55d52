//! `cvcard`: validity cards, embedding diagnostics and synthetic benchmarks
//! over a corpus manifest.
//!
//! Exit codes: 0 on success, 2 on validation or input errors, 3 when
//! `--strict` is set and a card raised a fail flag.

mod commands;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use construct_validity::cards::{ProxySpec, SuiteConfig};
use construct_validity::nuisance::DEFAULT_TOPIC_DIMS;
use construct_validity::report::OutputFormat;
use construct_validity::Error;
use serde::Deserialize;
use serde_json::{Map, Value};

#[derive(Parser, Debug)]
#[command(name = "cvcard", version, about = "Validity cards and embedding diagnostics for text-embedding proxies")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Corpus manifest, or a directory containing manifest.json
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// JSON run configuration (proxy, per-card blocks, and any of the flags)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: cvcard-out]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report format [default: both]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Exit with status 3 if any card raises a fail flag
    #[arg(long, global = true)]
    strict: bool,
    /// Use this label column as the proxy score
    #[arg(long, global = true)]
    proxy: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Markdown,
    Both,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Markdown => OutputFormat::Markdown,
            Format::Both => OutputFormat::Both,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a manifest; optionally compute nuisance feature blocks from
    /// document text and add them to it
    Ingest(IngestArgs),
    /// Reliability across embedding variants
    Card1,
    /// Convergent validity against a gold measure
    Card2,
    /// Discriminant and incremental validity against nuisance blocks
    Card3,
    /// Known-groups validity on anchor sets
    Card4,
    /// Predictive validity with a negative-control outcome
    Card5,
    /// Run the configured cards and write a combined report
    Suite,
    #[command(subcommand)]
    Diagnose(Diagnose),
    /// Generate a synthetic corpus with planted structure
    Synth(SynthArgs),
    /// Print version and report schema version
    Version,
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Feature blocks to compute
    #[arg(long, value_enum, value_delimiter = ',')]
    featurize: Vec<Featurizer>,
    #[arg(long, default_value_t = DEFAULT_TOPIC_DIMS)]
    topic_dims: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Featurizer {
    Style,
    Topic,
}

#[derive(Subcommand, Debug)]
enum Diagnose {
    /// Probe R² and single-coordinate correlation under random rotations
    Rotation {
        #[arg(long, default_value_t = 8)]
        dims: usize,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 1000)]
        n_docs: usize,
        #[arg(long, default_value_t = 0.1)]
        noise_sd: f64,
    },
    /// Iterative nullspace projection of a binary label out of a variant
    Nullspace {
        #[arg(long)]
        label: String,
        /// Defaults to the first variant in the manifest
        #[arg(long)]
        variant: Option<String>,
        #[arg(long, default_value_t = 10)]
        max_iter: usize,
        /// Also write the projected matrix
        #[arg(long)]
        write_matrix: bool,
    },
    /// Differential scores between paired observed and baseline variants
    Neutralize {
        #[arg(long)]
        observed: String,
        #[arg(long)]
        baseline: String,
        /// 1-row matrix file with linear probe weights
        #[arg(long, conflicts_with = "reference")]
        weights: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        bias: f64,
        /// 1-row matrix file with a reference vector for cosine scoring
        #[arg(long)]
        reference: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// JSON generator settings; omitted fields take their defaults
    #[arg(long)]
    spec: Option<PathBuf>,
    /// JSON export settings (variants, jitter, gold noise, splits)
    #[arg(long)]
    recipe: Option<PathBuf>,
}

/// A failure and the exit status it maps to.
#[derive(Debug)]
pub(crate) enum Failure {
    Invalid(Error),
    Strict(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e)
    }
}

pub(crate) type Outcome = std::result::Result<(), Failure>;

/// Config file keys that mirror the command-line flags; everything else is
/// the suite configuration.
#[derive(Deserialize, Default)]
struct FileConfig {
    manifest: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    format: Option<OutputFormat>,
    strict: Option<bool>,
    #[serde(flatten)]
    suite: Map<String, Value>,
}

/// Flags merged over the config file.
#[derive(Debug)]
pub(crate) struct Settings {
    pub manifest: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub format: OutputFormat,
    pub strict: bool,
    suite: Map<String, Value>,
    proxy: Option<String>,
}

impl Settings {
    fn resolve(common: Common) -> Result<Self, Error> {
        let (file, base) = match &common.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
                let file: FileConfig = serde_json::from_str(&text)
                    .map_err(|e| Error::Parse { path: path.clone(), message: e.to_string() })?;
                (file, path.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (FileConfig::default(), PathBuf::new()),
        };
        Ok(Self {
            manifest: common.manifest.or(file.manifest.map(|m| base.join(m))),
            out: common.out.or(file.out.map(|o| base.join(o))).unwrap_or_else(|| PathBuf::from("cvcard-out")),
            seed: common.seed.or(file.seed),
            format: common.format.map(OutputFormat::from).or(file.format).unwrap_or_default(),
            strict: common.strict || file.strict.unwrap_or(false),
            suite: file.suite,
            proxy: common.proxy,
        })
    }

    pub fn manifest_path(&self) -> Result<&Path, Error> {
        self.manifest
            .as_deref()
            .ok_or_else(|| Error::Config("no manifest given (use --manifest or \"manifest\" in the config)".into()))
    }

    pub fn suite_config(&self) -> Result<SuiteConfig, Error> {
        let mut raw = self.suite.clone();
        if let Some(name) = &self.proxy {
            let spec = ProxySpec::Label { name: name.clone() };
            raw.insert("proxy".into(), serde_json::to_value(spec).expect("proxy serializes"));
        }
        if !raw.contains_key("proxy") {
            return Err(Error::Config("no proxy configured (use --proxy or \"proxy\" in the config)".into()));
        }
        let mut config: SuiteConfig = serde_json::from_value(Value::Object(raw))
            .map_err(|e| Error::Config(format!("invalid suite configuration: {e}")))?;
        if let Some(seed) = self.seed {
            config.run.seed = seed;
        }
        Ok(config)
    }
}

fn run(cli: Cli) -> Outcome {
    if matches!(cli.command, Command::Version) {
        println!(
            "cvcard {} (report schema {})",
            env!("CARGO_PKG_VERSION"),
            construct_validity::cards::SCHEMA_VERSION
        );
        return Ok(());
    }
    let settings = Settings::resolve(cli.common)?;
    match cli.command {
        Command::Ingest(args) => commands::ingest(&settings, &args.featurize, args.topic_dims),
        Command::Card1 => commands::card(&settings, 1),
        Command::Card2 => commands::card(&settings, 2),
        Command::Card3 => commands::card(&settings, 3),
        Command::Card4 => commands::card(&settings, 4),
        Command::Card5 => commands::card(&settings, 5),
        Command::Suite => commands::suite(&settings),
        Command::Diagnose(Diagnose::Rotation { dims, seeds, n_docs, noise_sd }) => {
            commands::rotation(&settings, dims, seeds, n_docs, noise_sd)
        }
        Command::Diagnose(Diagnose::Nullspace { label, variant, max_iter, write_matrix }) => {
            commands::nullspace(&settings, &label, variant.as_deref(), max_iter, write_matrix)
        }
        Command::Diagnose(Diagnose::Neutralize { observed, baseline, weights, bias, reference }) => {
            commands::neutralize(&settings, &observed, &baseline, weights.as_deref(), bias, reference.as_deref())
        }
        Command::Synth(args) => commands::synth(&settings, args.spec.as_deref(), args.recipe.as_deref()),
        Command::Version => unreachable!(),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("{}: {e}", e.code());
            ExitCode::from(2)
        }
        Err(Failure::Strict(msg)) => {
            eprintln!("E_STRICT: {msg}");
            ExitCode::from(3)
        }
    }
}
