use std::collections::BTreeSet;
use std::path::Path;

use crate::error::{Error, Result};

/// A small English stopword list suitable for scientific abstracts.
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "all", "also", "an", "and", "any", "are", "as", "at",
    "be", "been", "before", "being", "between", "both", "but", "by", "can", "could", "did", "do",
    "does", "during", "each", "for", "from", "further", "had", "has", "have", "here", "how",
    "however", "if", "in", "into", "is", "it", "its", "may", "more", "most", "much", "no", "nor",
    "not", "of", "on", "once", "only", "or", "other", "our", "out", "over", "paper", "propose",
    "proposed", "same", "several", "should", "so", "some", "such", "than", "that", "the", "their",
    "them", "then", "there", "these", "they", "this", "those", "through", "to", "under", "until",
    "up", "use", "used", "using", "very", "via", "was", "we", "were", "what", "when", "where",
    "which", "while", "who", "will", "with", "within", "would",
];

#[derive(Debug, Clone, PartialEq)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub min_token_length: usize,
    pub stopwords: BTreeSet<String>,
    /// 1 for unigrams only, 2 to also emit adjacent-pair bigrams.
    pub ngram_max: usize,
    pub min_df: usize,
    pub max_df_fraction: f64,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            min_token_length: 2,
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
            ngram_max: 2,
            min_df: 2,
            max_df_fraction: 0.95,
        }
    }
}

impl TokenizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_token_length == 0 {
            return Err(Error::Config("min_token_length must be >= 1".into()));
        }
        if !(1..=2).contains(&self.ngram_max) {
            return Err(Error::Config("ngram_max must be 1 or 2".into()));
        }
        if self.min_df == 0 {
            return Err(Error::Config("min_df must be >= 1".into()));
        }
        if !(self.max_df_fraction > 0.0 && self.max_df_fraction <= 1.0) {
            return Err(Error::Config("max_df_fraction must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Splits on anything that is not alphanumeric or an inner hyphen, then
/// applies case folding, the length floor and stopword removal. With
/// `ngram_max == 2` the adjacent pairs of surviving unigrams follow the
/// unigrams as `"w1 w2"` tokens.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> Vec<String> {
    let unigrams: Vec<String> = text
        .split(|c: char| !(c.is_alphanumeric() || c == '-'))
        .map(|raw| raw.trim_matches('-'))
        .filter(|raw| !raw.is_empty())
        .map(|raw| {
            if config.lowercase {
                raw.to_lowercase()
            } else {
                raw.to_string()
            }
        })
        .filter(|tok| tok.chars().count() >= config.min_token_length)
        .filter(|tok| !config.stopwords.contains(tok))
        .collect();

    let mut tokens = unigrams.clone();
    if config.ngram_max >= 2 {
        tokens.extend(
            unigrams
                .windows(2)
                .map(|pair| format!("{} {}", pair[0], pair[1])),
        );
    }
    tokens
}

/// One stopword per line; blank lines and surrounding whitespace ignored.
pub fn load_stopwords(path: &Path, lowercase: bool) -> Result<BTreeSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            if lowercase {
                l.to_lowercase()
            } else {
                l.to_string()
            }
        })
        .collect())
}
