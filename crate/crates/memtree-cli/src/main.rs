//! Command line for building, querying, inspecting, and evaluating memory
//! trees stored as `*.memtree.json` snapshots.
//!
//! Every invocation loads the snapshot, acts, and (for mutating commands)
//! rewrites it. Settings resolve in order: built-in defaults, the workload
//! profile, the TOML config file (`--config` or `$MEMTREE_CONFIG`), then
//! command-line flags. Errors go to standard error as single-line JSON;
//! exit codes are 0 (success), 1 (usage), 2 (provider), 3 (data).

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use memtree::eval::otd::{beta_from_lambda, generate_planted_instance, theorem1_harness};
use memtree::{
    batch_insert, build_embedder, build_summarizer, chunk_text, collapsed_retrieve, export_dot,
    ingest_jsonl, insert, load_snapshot, render_answer_prompt, save_snapshot, traversal_retrieve,
    AggregationBackend, ChatSummarizer, ChunkProfile, DotOptions, EmbedderKind,
    EmbeddingProvider, EmbeddingProviderConfig, Error, FieldMap, MemoryTree, Result,
    RetrievalMode, RetrievalQuery, SummarizerConfig, SummarizerKind, ThresholdMode,
    ThresholdPolicy, WhitespaceTokenizer,
};

const DEFAULT_SNAPSHOT: &str = "memory.memtree.json";
const DEFAULT_DIMENSION: usize = 64;

#[derive(Parser)]
#[command(
    name = "memtree",
    version,
    about = "Tree-structured memory over text: insert, query, inspect, evaluate"
)]
struct Cli {
    /// TOML config file; defaults to $MEMTREE_CONFIG when set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Snapshot path (default memory.memtree.json).
    #[arg(long, global = true)]
    snapshot: Option<PathBuf>,

    /// Workload profile: single-document, multi-document, or dialogue.
    #[arg(long, global = true)]
    profile: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a fresh snapshot holding only the structural root.
    Init {
        /// Embedding dimension of the new tree.
        #[arg(long)]
        dimension: Option<usize>,
        /// Base threshold θ₀.
        #[arg(long)]
        theta0: Option<f64>,
        /// Threshold growth rate λ.
        #[arg(long)]
        lambda: Option<f64>,
        /// Threshold mode: normalized or main-text.
        #[arg(long)]
        threshold_mode: Option<String>,
        /// Overwrite an existing snapshot.
        #[arg(long)]
        force: bool,
    },
    /// Insert one item and rewrite the snapshot.
    Insert {
        /// The text to insert.
        text: String,
    },
    /// Stream a JSONL corpus into the tree, chunking per the profile.
    Ingest {
        /// JSONL file, one object per line.
        #[arg(long)]
        input: PathBuf,
        /// JSON field holding the text (default "text").
        #[arg(long)]
        text_field: Option<String>,
        /// JSON field holding a source id (default: line numbers).
        #[arg(long)]
        id_field: Option<String>,
        /// Abort on the first malformed line instead of collecting it.
        #[arg(long)]
        strict: bool,
        /// Chunk size in tokens, overriding the profile.
        #[arg(long, conflicts_with = "no_chunk")]
        chunk_tokens: Option<usize>,
        /// Insert each record whole, without chunking.
        #[arg(long)]
        no_chunk: bool,
    },
    /// Rank tree nodes against a query.
    Query {
        /// The query text.
        text: String,
        /// Number of nodes to return.
        #[arg(long)]
        k: Option<usize>,
        /// Minimum similarity kept, in [-1, 1].
        #[arg(long)]
        theta_retrieve: Option<f64>,
        /// Retrieval mode: collapsed or traversal.
        #[arg(long)]
        mode: Option<String>,
        /// Token budget for the rendered answer prompt.
        #[arg(long)]
        budget: Option<usize>,
        /// Send the answer prompt to the remote chat provider.
        #[arg(long)]
        answer: bool,
    },
    /// Print tree statistics as JSON.
    Stats,
    /// Render the tree as Graphviz DOT.
    Export {
        /// Output path; standard output when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Label truncation length in characters.
        #[arg(long)]
        max_label_chars: Option<usize>,
        /// Only emit nodes at or above this depth.
        #[arg(long)]
        depth_limit: Option<usize>,
    },
    /// Run the revenue-bound harness over planted instances, emitting CSV.
    Eval {
        /// Number of instances.
        #[arg(long)]
        instances: Option<usize>,
        /// Items per instance (2..=8).
        #[arg(long)]
        n: Option<usize>,
        /// Separation level β in (0, 1]; default e^{-λ}.
        #[arg(long)]
        beta: Option<f64>,
        /// Base seed; instance i uses seed + i.
        #[arg(long)]
        seed: Option<u64>,
        /// Output path; standard output when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Optional overrides loaded from the TOML config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    snapshot: Option<PathBuf>,
    profile: Option<ChunkProfile>,
    seed: Option<u64>,
    embedding: Option<EmbeddingProviderConfig>,
    summarizer: Option<SummarizerConfig>,
    threshold: Option<ThresholdFile>,
    retrieval: Option<RetrievalFile>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ThresholdFile {
    theta0: Option<f64>,
    lambda: Option<f64>,
    mode: Option<ThresholdMode>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RetrievalFile {
    k: Option<usize>,
    theta_retrieve: Option<f64>,
    mode: Option<RetrievalMode>,
    budget: Option<usize>,
}

/// Fully resolved settings for one invocation.
struct Settings {
    snapshot: PathBuf,
    profile: ChunkProfile,
    seed: u64,
    embedding: EmbeddingProviderConfig,
    summarizer: SummarizerConfig,
    /// Policy for `init` (baked into the snapshot) and `eval`; other
    /// commands use the policy stored in the snapshot.
    policy: ThresholdPolicy,
    k: usize,
    theta_retrieve: f64,
    mode: RetrievalMode,
    budget: usize,
}

fn parse_profile(text: &str) -> Result<ChunkProfile> {
    match text {
        "single-document" => Ok(ChunkProfile::SingleDocument),
        "multi-document" => Ok(ChunkProfile::MultiDocument),
        "dialogue" => Ok(ChunkProfile::Dialogue),
        other => Err(Error::InvalidArgument(format!(
            "unknown profile {other:?}; expected single-document, multi-document, or dialogue"
        ))),
    }
}

fn parse_threshold_mode(text: &str) -> Result<ThresholdMode> {
    match text {
        "normalized" => Ok(ThresholdMode::Normalized),
        "main-text" => Ok(ThresholdMode::MainText),
        other => Err(Error::InvalidArgument(format!(
            "unknown threshold mode {other:?}; expected normalized or main-text"
        ))),
    }
}

fn parse_retrieval_mode(text: &str) -> Result<RetrievalMode> {
    match text {
        "collapsed" => Ok(RetrievalMode::Collapsed),
        "traversal" => Ok(RetrievalMode::Traversal),
        other => Err(Error::InvalidArgument(format!(
            "unknown retrieval mode {other:?}; expected collapsed or traversal"
        ))),
    }
}

fn load_file_config(flag: Option<&Path>) -> Result<FileConfig> {
    let path = match flag {
        Some(path) => Some(path.to_path_buf()),
        None => std::env::var_os("MEMTREE_CONFIG").map(PathBuf::from),
    };
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(&path).map_err(|e| {
        Error::InvalidArgument(format!("cannot read config {}: {e}", path.display()))
    })?;
    toml::from_str(&text)
        .map_err(|e| Error::InvalidArgument(format!("config {}: {e}", path.display())))
}

fn resolve_settings(cli: &Cli) -> Result<Settings> {
    let file = load_file_config(cli.config.as_deref())?;
    let profile = match &cli.profile {
        Some(text) => parse_profile(text)?,
        None => file.profile.unwrap_or_default(),
    };
    let threshold = file.threshold.unwrap_or_default();
    let policy = ThresholdPolicy::new(
        threshold.theta0.unwrap_or(0.4),
        threshold.lambda.unwrap_or(0.5),
        threshold.mode.unwrap_or(ThresholdMode::Normalized),
    )?;
    let retrieval = file.retrieval.unwrap_or_default();
    Ok(Settings {
        snapshot: cli
            .snapshot
            .clone()
            .or(file.snapshot)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_SNAPSHOT)),
        profile,
        seed: file.seed.unwrap_or(0),
        embedding: file.embedding.unwrap_or(EmbeddingProviderConfig {
            kind: EmbedderKind::DeterministicMock,
            dimension: DEFAULT_DIMENSION,
            remote: None,
        }),
        summarizer: file.summarizer.unwrap_or_default(),
        policy,
        k: retrieval.k.unwrap_or_else(|| profile.k()),
        theta_retrieve: retrieval.theta_retrieve.unwrap_or(0.0),
        mode: retrieval.mode.unwrap_or_default(),
        budget: retrieval.budget.unwrap_or_else(|| profile.context_budget()),
    })
}

fn load_tree(settings: &Settings) -> Result<(MemoryTree, ThresholdPolicy)> {
    let path = &settings.snapshot;
    if !path.exists() {
        return Err(Error::NotFound(format!(
            "snapshot {} does not exist; run init first",
            path.display()
        )));
    }
    load_snapshot(&fs::read(path)?)
}

fn store_tree(settings: &Settings, tree: &MemoryTree, policy: &ThresholdPolicy) -> Result<()> {
    fs::write(&settings.snapshot, save_snapshot(tree, policy)?)?;
    Ok(())
}

/// The embedder, checked against the tree's dimension.
fn embedder_for(
    settings: &Settings,
    tree: &MemoryTree,
) -> Result<Box<dyn EmbeddingProvider>> {
    let embedder = build_embedder(&settings.embedding)?;
    if embedder.dimension() != tree.embedding_dimension() {
        return Err(Error::InvalidArgument(format!(
            "embedding provider dimension {} does not match the tree's {}",
            embedder.dimension(),
            tree.embedding_dimension()
        )));
    }
    Ok(embedder)
}

fn print_line(value: &serde_json::Value) {
    println!("{value}");
}

fn cmd_init(
    settings: &Settings,
    dimension: Option<usize>,
    theta0: Option<f64>,
    lambda: Option<f64>,
    threshold_mode: Option<&str>,
    force: bool,
) -> Result<()> {
    if settings.snapshot.exists() && !force {
        return Err(Error::InvalidArgument(format!(
            "snapshot {} already exists; pass --force to overwrite",
            settings.snapshot.display()
        )));
    }
    let policy = ThresholdPolicy::new(
        theta0.unwrap_or(settings.policy.theta0),
        lambda.unwrap_or(settings.policy.lambda),
        match threshold_mode {
            Some(text) => parse_threshold_mode(text)?,
            None => settings.policy.mode,
        },
    )?;
    let tree = MemoryTree::new(dimension.unwrap_or(settings.embedding.dimension))?;
    store_tree(settings, &tree, &policy)?;
    print_line(&json!({
        "snapshot": settings.snapshot.display().to_string(),
        "nodes": tree.len(),
        "embedding_dimension": tree.embedding_dimension(),
    }));
    Ok(())
}

/// Aggregation backend plus the summarizer keeping it alive.
struct Aggregation {
    summarizer: Option<Box<dyn memtree::Summarizer>>,
}

impl Aggregation {
    fn from_settings(settings: &Settings) -> Result<Self> {
        Ok(Aggregation {
            summarizer: build_summarizer(&settings.summarizer)?,
        })
    }

    fn backend(&self) -> AggregationBackend<'_> {
        match &self.summarizer {
            Some(summarizer) => AggregationBackend::Summarize(summarizer.as_ref()),
            None => AggregationBackend::MeanEmbedding,
        }
    }
}

fn cmd_insert(settings: &Settings, text: &str) -> Result<()> {
    let (mut tree, policy) = load_tree(settings)?;
    let embedder = embedder_for(settings, &tree)?;
    let aggregation = Aggregation::from_settings(settings)?;
    let report = insert(
        &mut tree,
        text,
        embedder.as_ref(),
        &aggregation.backend(),
        &policy,
    )?;
    store_tree(settings, &tree, &policy)?;
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    Ok(())
}

fn cmd_ingest(
    settings: &Settings,
    input: &Path,
    text_field: Option<String>,
    id_field: Option<String>,
    strict: bool,
    chunk_tokens: Option<usize>,
    no_chunk: bool,
) -> Result<()> {
    let (mut tree, policy) = load_tree(settings)?;
    let embedder = embedder_for(settings, &tree)?;
    let aggregation = Aggregation::from_settings(settings)?;

    let field_map = FieldMap {
        text_field: text_field.unwrap_or_else(|| "text".into()),
        id_field,
    };
    let file = fs::File::open(input)?;
    let outcome = ingest_jsonl(BufReader::new(file), &field_map, strict)?;

    let max_tokens = if no_chunk {
        None
    } else {
        chunk_tokens.or_else(|| settings.profile.chunk_tokens())
    };
    let mut texts = Vec::new();
    for record in &outcome.records {
        match max_tokens {
            Some(max) => {
                for chunk in chunk_text(&record.source_id, &record.text, max, &WhitespaceTokenizer)?
                {
                    texts.push(chunk.text);
                }
            }
            None => texts.push(record.text.clone()),
        }
    }

    let total = texts.len();
    let mut inserted = 0usize;
    let mut failure: Option<(usize, Error)> = None;
    for (start, window) in texts.chunks(100).enumerate().map(|(i, w)| (i * 100, w)) {
        let batch = batch_insert(
            &mut tree,
            window,
            embedder.as_ref(),
            &aggregation.backend(),
            &policy,
        );
        inserted += batch.reports.len();
        if let Some((offset, error)) = batch.failure {
            failure = Some((start + offset, error));
            break;
        }
        eprintln!(
            "{}",
            json!({"progress": {"inserted": inserted, "total": total}})
        );
    }
    // Keep whatever prefix made it in: insertion order is part of the
    // model, so a partial corpus is still a valid tree.
    store_tree(settings, &tree, &policy)?;
    print_line(&json!({
        "records": outcome.records.len(),
        "line_errors": outcome.errors,
        "chunks_inserted": inserted,
        "nodes": tree.len(),
    }));
    if let Some((index, error)) = failure {
        eprintln!(
            "{}",
            json!({"failed_at_chunk": index, "kind": error.kind()})
        );
        return Err(error);
    }
    Ok(())
}

fn cmd_query(
    settings: &Settings,
    text: &str,
    k: Option<usize>,
    theta_retrieve: Option<f64>,
    mode: Option<&str>,
    budget: Option<usize>,
    answer: bool,
) -> Result<()> {
    let (tree, _policy) = load_tree(settings)?;
    let embedder = embedder_for(settings, &tree)?;
    let mode = match mode {
        Some(text) => parse_retrieval_mode(text)?,
        None => settings.mode,
    };
    let query = RetrievalQuery::new(
        text,
        k.unwrap_or(settings.k),
        theta_retrieve.unwrap_or(settings.theta_retrieve),
        mode,
    )?;
    let result = match mode {
        RetrievalMode::Collapsed => collapsed_retrieve(&tree, &query, embedder.as_ref())?,
        RetrievalMode::Traversal => traversal_retrieve(&tree, &query, embedder.as_ref())?,
    };
    for ranked in &result.ranked {
        print_line(&json!({
            "node_id": ranked.node.as_u64(),
            "similarity": ranked.similarity,
            "depth": ranked.depth,
            "content": ranked.content,
        }));
    }
    if answer {
        if settings.summarizer.kind != SummarizerKind::RemoteChat {
            return Err(Error::InvalidArgument(
                "--answer requires the remote-chat summarizer in config".into(),
            ));
        }
        let remote = settings.summarizer.remote.clone().ok_or_else(|| {
            Error::InvalidArgument("remote-chat summarizer requires endpoint settings".into())
        })?;
        let prompt = render_answer_prompt(
            text,
            &result,
            budget.unwrap_or(settings.budget),
            &WhitespaceTokenizer,
        );
        let reply = ChatSummarizer::new(remote)?.complete(&prompt.text)?;
        print_line(&json!({
            "answer": reply,
            "included": prompt.included,
            "truncated": prompt.truncated,
        }));
    }
    Ok(())
}

fn cmd_stats(settings: &Settings) -> Result<()> {
    let (tree, _policy) = load_tree(settings)?;
    println!(
        "{}",
        serde_json::to_string(&tree.stats(&WhitespaceTokenizer)).expect("stats serialize")
    );
    Ok(())
}

fn cmd_export(
    settings: &Settings,
    output: Option<&Path>,
    max_label_chars: Option<usize>,
    depth_limit: Option<usize>,
) -> Result<()> {
    let (tree, _policy) = load_tree(settings)?;
    let mut options = DotOptions::default();
    if let Some(chars) = max_label_chars {
        options.max_label_chars = chars;
    }
    options.depth_limit = depth_limit;
    let dot = export_dot(&tree, &options);
    match output {
        Some(path) => fs::write(path, dot)?,
        None => print!("{dot}"),
    }
    Ok(())
}

fn cmd_eval(
    settings: &Settings,
    instances: Option<usize>,
    n: Option<usize>,
    beta: Option<f64>,
    seed: Option<u64>,
    output: Option<&Path>,
) -> Result<()> {
    let n = n.unwrap_or(6);
    if !(2..=8).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "--n must be in 2..=8 (brute-force optimum), got {n}"
        )));
    }
    let instances = instances.unwrap_or(100);
    let beta = beta.unwrap_or_else(|| beta_from_lambda(settings.policy.lambda));
    let base_seed = seed.unwrap_or(settings.seed);

    let mut csv = String::from("instance,otd_rev,memtree_rev,opt_rev,ratio,separation_ok\n");
    for i in 0..instances {
        let instance = generate_planted_instance(n, base_seed + i as u64)?;
        let report =
            theorem1_harness(&instance.embeddings, &instance.stream, beta, &settings.policy)?;
        let ratio = if report.optimal_revenue == 0.0 {
            1.0
        } else {
            report.otd_revenue / report.optimal_revenue
        };
        let separation_ok = report.otd_separation_ok && report.memtree_separation_ok;
        csv.push_str(&format!(
            "{i},{},{},{},{},{}\n",
            report.otd_revenue, report.memtree_revenue, report.optimal_revenue, ratio,
            separation_ok
        ));
    }
    match output {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let settings = resolve_settings(cli)?;
    match &cli.command {
        Command::Init {
            dimension,
            theta0,
            lambda,
            threshold_mode,
            force,
        } => cmd_init(
            &settings,
            *dimension,
            *theta0,
            *lambda,
            threshold_mode.as_deref(),
            *force,
        ),
        Command::Insert { text } => cmd_insert(&settings, text),
        Command::Ingest {
            input,
            text_field,
            id_field,
            strict,
            chunk_tokens,
            no_chunk,
        } => cmd_ingest(
            &settings,
            input,
            text_field.clone(),
            id_field.clone(),
            *strict,
            *chunk_tokens,
            *no_chunk,
        ),
        Command::Query {
            text,
            k,
            theta_retrieve,
            mode,
            budget,
            answer,
        } => cmd_query(
            &settings,
            text,
            *k,
            *theta_retrieve,
            mode.as_deref(),
            *budget,
            *answer,
        ),
        Command::Stats => cmd_stats(&settings),
        Command::Export {
            output,
            max_label_chars,
            depth_limit,
        } => cmd_export(
            &settings,
            output.as_deref(),
            *max_label_chars,
            *depth_limit,
        ),
        Command::Eval {
            instances,
            n,
            beta,
            seed,
            output,
        } => cmd_eval(
            &settings,
            *instances,
            *n,
            *beta,
            *seed,
            output.as_deref(),
        ),
    }
}

fn exit_code(kind: &str) -> u8 {
    match kind {
        "invalid-argument" | "too-large" => 1,
        "provider-unavailable" | "protocol-error" => 2,
        _ => 3,
    }
}

fn emit_error(kind: &str, message: &str) {
    eprintln!("{}", json!({"error": {"kind": kind, "message": message}}));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                let _ = std::io::stdout().flush();
                return ExitCode::SUCCESS;
            }
            emit_error("invalid-argument", &e.to_string());
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            emit_error(error.kind(), &error.to_string());
            ExitCode::from(exit_code(error.kind()))
        }
    }
}
