use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{build_passages, ingest_corpus, Genre, IngestReport, NormalizationConfig, Passage, Unit};
use crate::error::{Error, Result};
use crate::evalkit::{load_qrels, EvalSettings, QrelSet};
use crate::feedback::{FeedbackParams, IndexSet, Policy};
use crate::index::{CollectionLabel, Index};
use crate::judging::{load_topics, TopicSpec};
use crate::retrieval::Bm25Params;

pub const DEFAULT_RUN_DEPTH: usize = 1000;

/// Index directories; paths are relative to the config file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectionPaths {
    pub fiction: Option<PathBuf>,
    pub nonfiction: Option<PathBuf>,
    /// When absent, the merged collection is built from the other two on load.
    pub merged: Option<PathBuf>,
}

/// One row of the comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub config_id: Policy,
    /// Must be absent for `NonFiction_base`; defaults apply to the others.
    pub feedback: Option<FeedbackParams>,
}

impl ExperimentConfig {
    pub fn new(config_id: Policy, feedback: Option<FeedbackParams>) -> Self {
        Self { config_id, feedback }
    }

    /// Feedback parameters in effect, `None` for the baseline.
    pub fn effective_feedback(&self) -> Option<FeedbackParams> {
        self.config_id.transfer().map(|_| self.feedback.unwrap_or_default())
    }

    pub fn validate(&self) -> Result<()> {
        match (self.config_id.transfer(), &self.feedback) {
            (None, Some(_)) => Err(Error::Config(format!("{} takes no feedback parameters", self.config_id))),
            (Some(_), Some(p)) => p.validate(),
            _ => Ok(()),
        }
    }
}

/// A benchmark definition, usually read from TOML:
///
/// ```toml
/// topics = "topics.jsonl"
/// qrels = "qrels.txt"
/// depth = 1000
///
/// [collections]
/// fiction = "index/fiction"
/// nonfiction = "index/nonfiction"
///
/// [bm25]
/// k1 = 1.2
/// b = 0.75
///
/// [eval]
/// depth = 1000
///
/// [[experiment]]
/// config_id = "NonFiction_base"
///
/// [[experiment]]
/// config_id = "Fiction_RLM"
/// feedback = { M = 30, T = 50, alpha = 0.5, mu = 1000 }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub collections: CollectionPaths,
    pub topics: PathBuf,
    pub qrels: PathBuf,
    /// Hits retrieved per topic.
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default)]
    pub bm25: Bm25Params,
    #[serde(default)]
    pub eval: EvalSettings,
    #[serde(rename = "experiment")]
    pub experiments: Vec<ExperimentConfig>,
}

fn default_depth() -> usize {
    DEFAULT_RUN_DEPTH
}

impl BenchmarkConfig {
    /// The four configurations with default parameters.
    pub fn all_policies(collections: CollectionPaths, topics: PathBuf, qrels: PathBuf) -> Self {
        Self {
            collections,
            topics,
            qrels,
            depth: DEFAULT_RUN_DEPTH,
            bm25: Bm25Params::default(),
            eval: EvalSettings::default(),
            experiments: Policy::ALL.iter().map(|&p| ExperimentConfig::new(p, None)).collect(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: BenchmarkConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read `path` and resolve relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.topics);
        join(&mut self.qrels);
        for p in [
            &mut self.collections.fiction,
            &mut self.collections.nonfiction,
            &mut self.collections.merged,
        ]
        .into_iter()
        .flatten()
        {
            join(p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiments.is_empty() {
            return Err(Error::Config("no [[experiment]] sections".into()));
        }
        if self.depth == 0 {
            return Err(Error::Config("depth must be >= 1".into()));
        }
        self.bm25.validate()?;
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.experiments {
            e.validate()?;
            if !seen.insert(e.config_id) {
                return Err(Error::Config(format!("{} listed twice", e.config_id)));
            }
        }
        Ok(())
    }

    /// SHA-256 of the parameters that affect results (paths excluded).
    pub fn hash(&self) -> String {
        let value = serde_json::json!({
            "depth": self.depth,
            "bm25": self.bm25,
            "eval": self.eval,
            "experiments": self.experiments.iter().map(|e| (e.config_id, e.effective_feedback())).collect::<Vec<_>>(),
        });
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }
}

/// Everything a benchmark run reads, loaded into memory.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub config: BenchmarkConfig,
    pub indexes: IndexSet,
    pub topics: Vec<TopicSpec>,
    pub qrels: QrelSet,
}

impl Benchmark {
    pub fn load(config: BenchmarkConfig) -> Result<Self> {
        let indexes = load_indexes(&config.collections)?;
        let topics = load_topics(&config.topics)?;
        let qrels = load_qrels(&config.qrels)?;
        Ok(Self {
            config,
            indexes,
            topics,
            qrels,
        })
    }
}

/// Load the configured collections, merging fiction and non-fiction when no
/// merged index is given.
pub fn load_indexes(paths: &CollectionPaths) -> Result<IndexSet> {
    let load = |p: &Option<PathBuf>| -> Result<Option<Arc<Index>>> {
        p.as_ref().map(|p| Index::load(p).map(Arc::new)).transpose()
    };
    let fiction = load(&paths.fiction)?;
    let nonfiction = load(&paths.nonfiction)?;
    let mut merged = load(&paths.merged)?;
    if merged.is_none() {
        if let (Some(f), Some(n)) = (&fiction, &nonfiction) {
            merged = Some(Arc::new(Index::merge(f, n)?));
        }
    }
    for (label, idx) in [
        (CollectionLabel::Fiction, &fiction),
        (CollectionLabel::NonFiction, &nonfiction),
        (CollectionLabel::Merged, &merged),
    ] {
        if let Some(idx) = idx {
            if idx.label() != label {
                return Err(Error::Config(format!("{label} slot holds a {} index", idx.label())));
            }
        }
    }
    IndexSet::new([fiction, nonfiction, merged].into_iter().flatten())
}

/// Collections built in memory from one JSONL corpus.
#[derive(Debug, Clone)]
pub struct BuiltCollections {
    pub fiction: Index,
    pub nonfiction: Index,
    pub merged: Index,
    /// Every passage of both genres, sorted by passage id.
    pub passages: Vec<Passage>,
    pub report: IngestReport,
}

impl BuiltCollections {
    pub fn index_set(&self) -> Result<IndexSet> {
        IndexSet::new([
            Arc::new(self.fiction.clone()),
            Arc::new(self.nonfiction.clone()),
            Arc::new(self.merged.clone()),
        ])
    }

    /// Passage id → raw passage text.
    pub fn passage_texts(&self) -> BTreeMap<String, String> {
        self.passages
            .iter()
            .map(|p| (p.passage_id.clone(), p.text.clone()))
            .collect()
    }
}

/// Ingest a two-genre corpus and build fiction, non-fiction and merged indexes.
pub fn build_collections(corpus: impl AsRef<Path>, unit: Unit, analysis: &NormalizationConfig) -> Result<BuiltCollections> {
    let (docs, report) = ingest_corpus(corpus, None)?;
    let (passages, _) = build_passages(&docs, unit, analysis);
    let (fic, non): (Vec<Passage>, Vec<Passage>) = passages.iter().cloned().partition(|p| p.genre == Genre::Fiction);
    let fiction = Index::build(&fic, CollectionLabel::Fiction, unit, analysis.clone())?;
    let nonfiction = Index::build(&non, CollectionLabel::NonFiction, unit, analysis.clone())?;
    let merged = Index::merge(&fiction, &nonfiction)?;
    Ok(BuiltCollections {
        fiction,
        nonfiction,
        merged,
        passages,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
topics = "topics.jsonl"
qrels = "qrels.txt"

[collections]
fiction = "idx/fiction"
nonfiction = "idx/nonfiction"

[bm25]
k1 = 0.9

[[experiment]]
config_id = "NonFiction_base"

[[experiment]]
config_id = "Fiction_RLM"
feedback = { M = 30, T = 50 }
"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = BenchmarkConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(cfg.depth, 1000);
        assert_eq!(cfg.bm25, Bm25Params { k1: 0.9, b: 0.75 });
        assert_eq!(cfg.eval, EvalSettings::default());
        let fb = cfg.experiments[1].effective_feedback().unwrap();
        assert_eq!((fb.fb_docs, fb.fb_terms, fb.alpha, fb.mu), (30, 50, 0.5, 1000.0));
        assert_eq!(cfg.experiments[0].effective_feedback(), None);
    }

    #[test]
    fn rejects_bad_configs() {
        let base_with_fb = EXAMPLE.replace("config_id = \"NonFiction_base\"", "config_id = \"NonFiction_base\"\nfeedback = { M = 5 }");
        assert!(matches!(BenchmarkConfig::from_toml(&base_with_fb), Err(Error::Config(_))));
        let unknown = EXAMPLE.replace("Fiction_RLM", "Poetry_RLM");
        assert!(BenchmarkConfig::from_toml(&unknown).is_err());
        let dup = EXAMPLE.replace("Fiction_RLM", "NonFiction_base").replace("feedback = { M = 30, T = 50 }", "");
        assert!(BenchmarkConfig::from_toml(&dup).is_err());
        let bad_alpha = EXAMPLE.replace("T = 50", "T = 50, alpha = 2.0");
        assert!(matches!(BenchmarkConfig::from_toml(&bad_alpha), Err(Error::InvalidParam(_))));
    }

    #[test]
    fn hash_ignores_paths_but_not_params() {
        let a = BenchmarkConfig::from_toml(EXAMPLE).unwrap();
        let mut b = a.clone();
        b.topics = "elsewhere.jsonl".into();
        assert_eq!(a.hash(), b.hash());
        b.bm25.b = 0.5;
        assert_ne!(a.hash(), b.hash());
    }
}
