//! Text normalization and tokenization for historical prints.
//!
//! The same [`NormalizationConfig`] is stored with every index, and queries are
//! analyzed with the index's copy, so index-time and query-time analysis never
//! drift apart.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

static HYPHEN_LINEBREAK: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"-[ \t]*\r?\n[ \t]*").unwrap());

/// Analysis settings shared by indexing and querying.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizationConfig {
    pub lowercase: bool,
    /// Map the long s (`ſ`) to `s`.
    pub fold_long_s: bool,
    pub strip_punctuation: bool,
    /// Rejoin words split by a hyphen at a line end (`car-\nnival`).
    pub collapse_hyphen_linebreaks: bool,
    pub stopwords: Option<BTreeSet<String>>,
    /// Porter (English) stemming, applied after stopword removal.
    pub stem: bool,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            fold_long_s: true,
            strip_punctuation: true,
            collapse_hyphen_linebreaks: true,
            stopwords: None,
            stem: false,
        }
    }
}

impl NormalizationConfig {
    pub fn with_stopwords<I, S>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        // Stopwords are compared against normalized tokens, so normalize them too.
        let set = words
            .into_iter()
            .flat_map(|w| {
                normalize(w.as_ref(), &self)
                    .split_whitespace()
                    .map(str::to_owned)
                    .collect::<Vec<_>>()
            })
            .collect();
        self.stopwords = Some(set);
        self
    }

    /// Read a stopword list, one word per line; blank lines and `#` comments are skipped.
    pub fn with_stopword_file(self, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let words: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Ok(self.with_stopwords(words))
    }

    /// Normalize then tokenize.
    pub fn analyze(&self, text: &str) -> Vec<String> {
        tokenize(&normalize(text, self), self)
    }
}

/// Normalize `text` under `cfg`. Total, deterministic and idempotent.
///
/// Whitespace runs are always collapsed to a single space and the result is trimmed.
pub fn normalize(text: &str, cfg: &NormalizationConfig) -> String {
    let mut s: String = if cfg.collapse_hyphen_linebreaks {
        join_hyphenated(text)
    } else {
        text.to_owned()
    };
    if cfg.fold_long_s {
        s = s.replace('ſ', "s");
    }
    if cfg.lowercase {
        s = s.to_lowercase();
    }
    if cfg.strip_punctuation {
        s = s
            .chars()
            .filter(|c| !matches!(c, '\'' | '\u{2019}'))
            .map(|c| if c.is_alphanumeric() { c } else { ' ' })
            .collect();
    }
    let mut out = String::with_capacity(s.len());
    for word in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

fn join_hyphenated(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last = 0;
    for m in HYPHEN_LINEBREAK.find_iter(text) {
        let before = text[..m.start()].chars().next_back();
        let after = text[m.end()..].chars().next();
        out.push_str(&text[last..m.start()]);
        if !(before.is_some_and(char::is_alphanumeric) && after.is_some_and(char::is_alphanumeric)) {
            out.push_str(m.as_str());
        }
        last = m.end();
    }
    out.push_str(&text[last..]);
    out
}

/// Split normalized text into tokens, dropping stopwords and stemming if configured.
pub fn tokenize(text: &str, cfg: &NormalizationConfig) -> Vec<String> {
    let stemmer = cfg.stem.then(|| Stemmer::create(Algorithm::English));
    text.split_whitespace()
        .filter(|t| cfg.stopwords.as_ref().is_none_or(|sw| !sw.contains(*t)))
        .map(|t| match &stemmer {
            Some(st) => st.stem(t).into_owned(),
            None => t.to_owned(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_on() -> NormalizationConfig {
        NormalizationConfig::default()
    }

    #[test]
    fn long_s_and_punctuation() {
        assert_eq!(normalize("Paſsion,", &all_on()), "passion");
    }

    #[test]
    fn empty_text() {
        assert_eq!(normalize("", &all_on()), "");
        assert!(tokenize("", &all_on()).is_empty());
    }

    #[test]
    fn hyphenated_linebreak_is_repaired() {
        assert_eq!(normalize("car-\nnival", &all_on()), "carnival");
        assert_eq!(normalize("car-  \r\n  nival time", &all_on()), "carnival time");
        assert_eq!(normalize("a-\nb-\nc", &all_on()), "abc");

        let off = NormalizationConfig {
            collapse_hyphen_linebreaks: false,
            ..all_on()
        };
        assert_eq!(normalize("car-\nnival", &off), "car nival");
    }

    #[test]
    fn flags_are_independent() {
        let cfg = NormalizationConfig {
            lowercase: false,
            fold_long_s: false,
            strip_punctuation: false,
            collapse_hyphen_linebreaks: false,
            stopwords: None,
            stem: false,
        };
        assert_eq!(normalize("Paſsion,  and\n Wine", &cfg), "Paſsion, and Wine");
    }

    #[test]
    fn tokenize_with_and_without_stopwords() {
        let cfg = all_on();
        assert_eq!(tokenize("festival of wine", &cfg), ["festival", "of", "wine"]);
        let cfg = cfg.with_stopwords(["of"]);
        assert_eq!(tokenize("festival of wine", &cfg), ["festival", "wine"]);
    }

    #[test]
    fn stemming_flag() {
        let cfg = NormalizationConfig {
            stem: true,
            ..all_on()
        };
        assert_eq!(cfg.analyze("Festivals dancing"), ["festiv", "danc"]);
    }

    #[test]
    fn apostrophes_join() {
        assert_eq!(normalize("The King’s men", &all_on()), "the kings men");
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(s in "\\PC{0,64}", flags in proptest::array::uniform4(any::<bool>())) {
            let cfg = NormalizationConfig {
                lowercase: flags[0],
                fold_long_s: flags[1],
                strip_punctuation: flags[2],
                collapse_hyphen_linebreaks: flags[3],
                stopwords: None,
                stem: false,
            };
            let once = normalize(&s, &cfg);
            prop_assert_eq!(normalize(&once, &cfg), once);
        }

        #[test]
        fn idempotent_on_hyphen_heavy_text(s in "[a-zA-Zſ\\- \\n,\\.]{0,48}") {
            let cfg = all_on();
            let once = normalize(&s, &cfg);
            prop_assert_eq!(normalize(&once, &cfg), once);
        }
    }
}
