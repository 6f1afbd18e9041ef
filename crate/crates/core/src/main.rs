use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use chronosearch::corpus::{build_passages, ingest_corpus, Genre, NormalizationConfig, Unit};
use chronosearch::evalkit::{evaluate_run, load_qrels, load_run, Grid, Metric, QrelSet};
use chronosearch::feedback::{FeedbackParams, Policy};
use chronosearch::harness::{
    emit_per_query, emit_table, emit_terms, load_indexes, run_benchmark, run_grid, serve_api, ApiState, Benchmark,
    BenchmarkConfig,
};
use chronosearch::index::{CollectionLabel, Index};
use chronosearch::judging::{
    finalize_qrels, judge_topics, load_topics, sample_for_verification, write_judgments_jsonl, AssessorClient,
    CachingAssessor, GradingOptions, HttpAssessor, Judgment, DEFAULT_INSTRUCTIONS,
};
use chronosearch::retrieval::Bm25Params;

#[derive(Parser)]
#[command(name = "chronosearch", version, about = "Cross-genre retrieval experiments over historical corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from a JSONL corpus.
    Index(IndexArgs),
    /// Build relevance judgments.
    #[command(subcommand)]
    Judge(JudgeCommand),
    /// Run every configured experiment and write runs and reports.
    Run(RunArgs),
    /// Sweep M × T for one configuration.
    Grid(GridArgs),
    /// Print the comparison table, per-query AP and expansion terms.
    Report(ReportArgs),
    /// Serve the read-only HTTP API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    genre: CollectionLabel,
    #[arg(long, default_value = "para")]
    unit: Unit,
    #[arg(long)]
    out: PathBuf,
    /// One stopword per line; `#` starts a comment line.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    stem: bool,
}

#[derive(Subcommand)]
enum JudgeCommand {
    /// Pool candidates and grade them with the machine assessor.
    Pool(PoolArgs),
    /// Apply expert grades and write final qrels plus agreement statistics.
    Resolve(ResolveArgs),
}

#[derive(Args)]
struct PoolArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    topics: PathBuf,
    #[arg(long)]
    transcripts: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// OpenAI-compatible base URL; omit to replay transcripts only.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long, default_value = "assessor")]
    model: String,
    /// File replacing the built-in grading instructions.
    #[arg(long)]
    instructions: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long, default_value_t = 4)]
    max_in_flight: usize,
    #[arg(long, default_value_t = 0.40)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ResolveArgs {
    /// Machine judgments (JSONL) written by `judge pool`.
    #[arg(long)]
    judgments: PathBuf,
    /// Expert grades in TREC qrels format.
    #[arg(long)]
    expert: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    agreement: PathBuf,
    #[arg(long, default_value_t = 0.40)]
    fraction: f64,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    policy: Policy,
    #[arg(long, default_value = "MAP")]
    objective: Metric,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<usize>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Re-run this benchmark config and render it.
    #[arg(long, conflicts_with_all = ["qrels", "runs"])]
    config: Option<PathBuf>,
    /// Topic whose expansion terms to list.
    #[arg(long, requires = "config")]
    terms: Option<String>,
    /// Evaluate existing run files against these qrels instead.
    #[arg(long, requires = "runs")]
    qrels: Option<PathBuf>,
    #[arg(long, num_args = 1..)]
    runs: Vec<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    depth: usize,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Corpus used for result snippets.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().command {
        Command::Index(a) => index(a),
        Command::Judge(JudgeCommand::Pool(a)) => judge_pool(a),
        Command::Judge(JudgeCommand::Resolve(a)) => judge_resolve(a),
        Command::Run(a) => run(a),
        Command::Grid(a) => grid(a),
        Command::Report(a) => report(a),
        Command::Serve(a) => serve(a),
    }
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn index(a: IndexArgs) -> anyhow::Result<()> {
    let mut analysis = NormalizationConfig {
        stem: a.stem,
        ..Default::default()
    };
    if let Some(p) = &a.stopwords {
        analysis = analysis.with_stopword_file(p)?;
    }
    let filter = match a.genre {
        CollectionLabel::Fiction => Some(Genre::Fiction),
        CollectionLabel::NonFiction => Some(Genre::NonFiction),
        CollectionLabel::Merged => None,
    };
    let (docs, report) = ingest_corpus(&a.corpus, filter)?;
    for e in &report.errors {
        tracing::warn!(line = e.line, doc_id = ?e.doc_id, "{}", e.reason);
    }
    for w in &report.warnings {
        tracing::warn!("{w}");
    }
    let (passages, warnings) = build_passages(&docs, a.unit, &analysis);
    for w in &warnings {
        tracing::warn!("{w}");
    }
    let idx = Index::build(&passages, a.genre, a.unit, analysis)?;
    idx.persist(&a.out)?;
    tracing::info!(
        passages = idx.num_passages(),
        vocabulary = idx.meta().vocabulary_size,
        rejected = report.errors.len(),
        "wrote {}",
        a.out.display()
    );
    Ok(())
}

fn judge_pool(a: PoolArgs) -> anyhow::Result<()> {
    let index = Index::load(&a.index)?;
    let topics = load_topics(&a.topics)?;
    let (docs, _) = ingest_corpus(&a.corpus, None)?;
    let (passages, _) = build_passages(&docs, index.meta().unit, index.analysis());
    let texts: BTreeMap<String, String> = passages.into_iter().map(|p| (p.passage_id, p.text)).collect();
    let instructions = match &a.instructions {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => DEFAULT_INSTRUCTIONS.to_owned(),
    };
    let options = GradingOptions {
        max_in_flight: a.max_in_flight,
    };
    let bm25 = Bm25Params::default();
    let (pools, outcome, calls) = match &a.endpoint {
        Some(endpoint) => {
            let client = CachingAssessor::record(HttpAssessor::from_env(endpoint, &a.model)?, &a.transcripts, &a.model)?;
            let (p, o) = judge_topics(&topics, &index, &texts, &client as &dyn AssessorClient, &instructions, a.k, &bm25, &options)?;
            (p, o, client.remote_calls())
        }
        None => {
            let client = CachingAssessor::replay(&a.transcripts, &a.model)?;
            let (p, o) = judge_topics(&topics, &index, &texts, &client as &dyn AssessorClient, &instructions, a.k, &bm25, &options)?;
            (p, o, client.remote_calls())
        }
    };
    fs::create_dir_all(&a.out)?;
    let mut pool_out = Vec::new();
    for p in &pools {
        serde_json::to_writer(&mut pool_out, p)?;
        pool_out.push(b'\n');
    }
    write_file(&a.out.join("pool.jsonl"), pool_out)?;
    let mut judgments = Vec::new();
    write_judgments_jsonl(&mut judgments, &outcome.judgments)?;
    write_file(&a.out.join("judgments.jsonl"), judgments)?;
    write_file(&a.out.join("machine.qrels"), outcome.to_qrels()?.to_trec_string())?;
    write_file(&a.out.join("missing.json"), serde_json::to_string_pretty(&outcome.missing)? + "\n")?;
    write_file(&a.out.join("queued.json"), serde_json::to_string_pretty(&outcome.queued)? + "\n")?;
    let sample = sample_for_verification(&outcome.judgments, a.fraction, a.seed)?;
    let mut tsv = String::from("qid\tpassage_id\n");
    for j in &sample {
        tsv.push_str(&format!("{}\t{}\n", j.qid, j.passage_id));
    }
    write_file(&a.out.join("verification.tsv"), tsv)?;
    tracing::info!(
        judged = outcome.judgments.len(),
        missing = outcome.missing.len(),
        queued = outcome.queued.len(),
        sampled = sample.len(),
        remote_calls = calls,
        "wrote {}",
        a.out.display()
    );
    Ok(())
}

fn judge_resolve(a: ResolveArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&a.judgments).with_context(|| format!("reading {}", a.judgments.display()))?;
    let machine: Vec<Judgment> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{}:{}", a.judgments.display(), i + 1)))
        .collect::<anyhow::Result<_>>()?;
    let expert = load_qrels(&a.expert)?;
    let (qrels, agreement) = finalize_qrels(&machine, &expert, a.fraction, expert.len())?;
    write_file(&a.out, qrels.to_trec_string())?;
    write_file(&a.agreement, serde_json::to_string_pretty(&agreement)? + "\n")?;
    tracing::info!(
        exact_match_rate = agreement.exact_match_rate,
        resolved = agreement.n_resolved,
        "wrote {}",
        a.out.display()
    );
    Ok(())
}

fn load_benchmark(config: &Path) -> anyhow::Result<Benchmark> {
    let cfg = BenchmarkConfig::load(config)?;
    Ok(Benchmark::load(cfg)?)
}

fn run(a: RunArgs) -> anyhow::Result<()> {
    let bench = load_benchmark(&a.config)?;
    let started = std::time::SystemTime::now();
    let report = run_benchmark(&bench)?;
    report.write_to(&a.out)?;
    // Timestamps stay out of the deterministic outputs.
    let mut log = fs::OpenOptions::new().create(true).append(true).open(a.out.join("run.log"))?;
    let secs = started.duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    writeln!(log, "started_unix={secs} config={} config_hash={}", a.config.display(), report.provenance.config_hash)?;
    for f in &report.failures {
        tracing::error!("{}: {}", f.config_id, f.error);
    }
    print!("{}", emit_table(&report));
    Ok(())
}

fn grid(a: GridArgs) -> anyhow::Result<()> {
    let bench = load_benchmark(&a.config)?;
    let mut grid = Grid::default();
    if let Some(m) = a.m {
        grid.m_values = m;
    }
    if let Some(t) = a.t {
        grid.t_values = t;
    }
    let base = bench
        .config
        .experiments
        .iter()
        .find(|e| e.config_id == a.policy)
        .and_then(|e| e.effective_feedback())
        .unwrap_or_else(FeedbackParams::default);
    let outcome = run_grid(&bench, a.policy, base, &grid, a.objective, a.workers)?;
    fs::create_dir_all(&a.out)?;
    let mut csv = Vec::new();
    outcome.write_surface_csv(&mut csv)?;
    write_file(&a.out.join("surface.csv"), csv)?;
    write_file(&a.out.join("grid.json"), serde_json::to_string_pretty(&outcome)? + "\n")?;
    for c in outcome.failed() {
        tracing::warn!(m = c.m, t = c.t, "cell failed: {}", c.error.as_deref().unwrap_or(""));
    }
    match outcome.best {
        Some(b) => println!("best {} = {:.4} at M={} T={}", a.objective, b.value, b.m, b.t),
        None => bail!("every grid cell failed"),
    }
    Ok(())
}

fn report(a: ReportArgs) -> anyhow::Result<()> {
    if let Some(config) = &a.config {
        let bench = load_benchmark(config)?;
        let report = run_benchmark(&bench)?;
        print!("{}", emit_table(&report));
        println!();
        print!("{}", emit_per_query(&report));
        if let Some(qid) = &a.terms {
            println!();
            let expanding: Vec<Policy> = report
                .configs
                .iter()
                .map(|c| c.config_id)
                .filter(|p| p.transfer().is_some())
                .collect();
            print!("{}", emit_terms(&report, qid, &expanding));
        }
        return Ok(());
    }
    let Some(qrels_path) = &a.qrels else {
        bail!("pass --config, or --qrels with --runs");
    };
    let qrels: QrelSet = load_qrels(qrels_path)?;
    let settings = chronosearch::evalkit::EvalSettings {
        depth: a.depth,
        ..Default::default()
    };
    println!("run\tqueries\tMAP\tRecall\tnDCG\tP@10\tMRR");
    for path in &a.runs {
        let run = load_run(path)?;
        let r = evaluate_run(&run, &qrels, &settings)?;
        let g = &r.aggregate;
        println!(
            "{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
            r.run_tag, g.num_queries, g.map, g.recall, g.ndcg, g.p10, g.mrr
        );
    }
    Ok(())
}

fn serve(a: ServeArgs) -> anyhow::Result<()> {
    let cfg = BenchmarkConfig::load(&a.config)?;
    let indexes = load_indexes(&cfg.collections)?;
    let topics = load_topics(&cfg.topics)?;
    let qrels = load_qrels(&cfg.qrels).ok();
    let mut state = ApiState::new(indexes, topics, qrels);
    state.bm25 = cfg.bm25;
    if let Some(corpus) = &a.corpus {
        let (docs, _) = ingest_corpus(corpus, None)?;
        let first = state.indexes.iter().next().context("no collections configured")?.clone();
        let (passages, _) = build_passages(&docs, first.meta().unit, first.analysis());
        state = state.with_passage_texts(passages.into_iter().map(|p| (p.passage_id, p.text)).collect());
    }
    let addr: SocketAddr = format!("{}:{}", a.host, a.port).parse()?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(serve_api(addr, Arc::new(state)))?;
    Ok(())
}
