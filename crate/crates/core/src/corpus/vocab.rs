use std::collections::{BTreeMap, HashMap, HashSet};

use crate::corpus::TokenizerConfig;
use crate::error::{Error, Result};

/// Ordered term list with its inverse index. Column `i` of every
/// document-term matrix is `terms[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds from an ordered term list; fails on duplicates.
    pub fn from_terms(terms: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate vocabulary term `{t}`")));
            }
        }
        Ok(Self { terms, index })
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn term(&self, col: usize) -> &str {
        &self.terms[col]
    }
}

/// Global vocabulary over all windows.
///
/// `windows` holds, per window, one token list per document. A term is kept
/// when its document frequency over the whole corpus lies in
/// `[min_df, max_df_fraction * N]`. Terms are sorted lexicographically.
pub fn build_vocabulary(
    windows: &[Vec<Vec<String>>],
    config: &TokenizerConfig,
) -> Result<Vocabulary> {
    config.validate()?;
    let n_docs: usize = windows.iter().map(Vec::len).sum();
    if windows.iter().flatten().all(Vec::is_empty) {
        return Err(Error::Empty("no document contains any token".into()));
    }
    if config.min_df > n_docs {
        return Err(Error::Config(format!(
            "min_df={} exceeds the corpus size {n_docs}",
            config.min_df
        )));
    }

    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in windows.iter().flatten() {
        let unique: HashSet<&str> = doc.iter().map(String::as_str).collect();
        for term in unique {
            *df.entry(term).or_default() += 1;
        }
    }

    let max_df = config.max_df_fraction * n_docs as f64;
    let terms: Vec<String> = df
        .into_iter()
        .filter(|&(_, count)| count >= config.min_df && count as f64 <= max_df)
        .map(|(t, _)| t.to_string())
        .collect();

    if terms.is_empty() {
        return Err(Error::EmptyVocabulary {
            min_df: config.min_df,
            max_df_fraction: config.max_df_fraction,
        });
    }
    Vocabulary::from_terms(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(list: &[&[&str]]) -> Vec<Vec<String>> {
        list.iter()
            .map(|d| d.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    fn cfg(min_df: usize, max_df_fraction: f64) -> TokenizerConfig {
        TokenizerConfig {
            min_df,
            max_df_fraction,
            ..TokenizerConfig::default()
        }
    }

    #[test]
    fn union_of_disjoint_windows() {
        let windows = vec![docs(&[&["b", "a"]]), docs(&[&["c"]])];
        let vocab = build_vocabulary(&windows, &cfg(1, 1.0)).unwrap();
        assert_eq!(vocab.terms(), ["a", "b", "c"]);
        assert_eq!(vocab.get("c"), Some(2));
    }

    #[test]
    fn ubiquitous_term_excluded_by_max_df() {
        let windows = vec![docs(&[&["x", "a"], &["x", "b"], &["x"], &["x", "a"]])];
        let vocab = build_vocabulary(&windows, &cfg(1, 0.5)).unwrap();
        assert!(vocab.get("x").is_none());
        assert!(vocab.get("a").is_some());
    }

    #[test]
    fn min_df_excludes_singletons() {
        let windows = vec![docs(&[&["a", "b"], &["a"]])];
        let vocab = build_vocabulary(&windows, &cfg(2, 1.0)).unwrap();
        assert_eq!(vocab.terms(), ["a"]);
    }

    #[test]
    fn empty_after_filtering_is_an_error() {
        let windows = vec![docs(&[&["a"], &["b"]])];
        assert!(matches!(
            build_vocabulary(&windows, &cfg(2, 1.0)),
            Err(Error::EmptyVocabulary { .. })
        ));
    }

    #[test]
    fn index_inverts_terms() {
        let windows = vec![docs(&[&["z", "y", "x"]])];
        let vocab = build_vocabulary(&windows, &cfg(1, 1.0)).unwrap();
        for (i, t) in vocab.terms().iter().enumerate() {
            assert_eq!(vocab.get(t), Some(i));
        }
    }
}
