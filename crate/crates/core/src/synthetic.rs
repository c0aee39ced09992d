//! Deterministic synthetic corpora with planted topics and word vectors.
//!
//! Each planted topic owns a set of pseudo-words with Zipf-like weights.
//! A document draws one dominant topic from window-specific popularity
//! weights, then fills its tokens from that topic, a secondary topic and a
//! shared background vocabulary. An optional emerging topic appears only in
//! the last window. Word vectors cluster around one random center per topic.

use std::collections::BTreeSet;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, WindowLabel, DEFAULT_STOPWORDS};
use crate::error::{Error, Result};
use crate::metrics::EmbeddingTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub windows: Vec<WindowLabel>,
    pub docs_per_window: usize,
    pub n_topics: usize,
    pub terms_per_topic: usize,
    pub background_terms: usize,
    pub min_doc_length: usize,
    pub max_doc_length: usize,
    /// Probability that a token comes from the document's dominant topic.
    pub dominant_share: f64,
    /// Probability that a token comes from the secondary topic.
    pub secondary_share: f64,
    /// Plant a topic that occurs only in the final window.
    pub emerging: bool,
    /// Fraction of final-window documents dominated by the emerging topic.
    pub emerging_fraction: f64,
    pub embedding_dim: usize,
    /// Standard deviation of term vectors around their topic center.
    pub embedding_noise: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            windows: vec![2020, 2021, 2022],
            docs_per_window: 100,
            n_topics: 6,
            terms_per_topic: 12,
            background_terms: 60,
            min_doc_length: 40,
            max_doc_length: 70,
            dominant_share: 0.7,
            secondary_share: 0.15,
            emerging: false,
            emerging_fraction: 0.25,
            embedding_dim: 16,
            embedding_noise: 0.35,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.windows.is_empty() || self.docs_per_window == 0 {
            return bad("synthetic corpus needs at least one window and one document per window");
        }
        if self.n_topics < 2 || self.terms_per_topic < 2 {
            return bad("synthetic corpus needs at least two topics of two terms");
        }
        if self.min_doc_length == 0 || self.min_doc_length > self.max_doc_length {
            return bad("document length range is empty");
        }
        let (d, s) = (self.dominant_share, self.secondary_share);
        if !(0.0..=1.0).contains(&d) || !(0.0..=1.0).contains(&s) || d + s > 1.0 {
            return bad("token shares must lie in [0, 1] and sum to at most 1");
        }
        if !(0.0..=1.0).contains(&self.emerging_fraction) {
            return bad("emerging_fraction must lie in [0, 1]");
        }
        if self.embedding_dim == 0 || self.embedding_noise.is_nan() || self.embedding_noise < 0.0 {
            return bad("embedding_dim must be positive and embedding_noise non-negative");
        }
        Ok(())
    }
}

/// What was planted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTruth {
    pub windows: Vec<WindowLabel>,
    /// Terms of each planted topic, most frequent first.
    pub topics: Vec<Vec<String>>,
    pub emerging: Option<Vec<String>>,
    pub background: Vec<String>,
    /// Dominant topic of every document; the emerging topic has index `topics.len()`.
    pub document_topics: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub documents: Vec<Document>,
    pub embeddings: EmbeddingTable,
    pub truth: SyntheticTruth,
}

const ONSETS: &[&str] = &[
    "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "dr", "kr", "pl",
    "st", "tr",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou"];
const CODAS: &[&str] = &["", "", "n", "r", "s", "l", "x"];

fn pseudo_word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.random_range(2..=3);
    let mut w = String::new();
    for i in 0..syllables {
        w.push_str(ONSETS[rng.random_range(0..ONSETS.len())]);
        w.push_str(VOWELS[rng.random_range(0..VOWELS.len())]);
        if i + 1 == syllables {
            w.push_str(CODAS[rng.random_range(0..CODAS.len())]);
        }
    }
    w
}

fn unique_words(rng: &mut ChaCha8Rng, n: usize, taken: &mut BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = pseudo_word(rng);
        if !DEFAULT_STOPWORDS.contains(&w.as_str()) && taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn zipf_weights(n: usize) -> Vec<f64> {
    (1..=n).map(|r| 1.0 / (r as f64).powf(0.8)).collect()
}

/// Generates a corpus, its word vectors and the planted structure.
pub fn generate(config: &SyntheticConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut taken = BTreeSet::new();
    let topics: Vec<Vec<String>> = (0..config.n_topics)
        .map(|_| unique_words(&mut rng, config.terms_per_topic, &mut taken))
        .collect();
    let emerging = config
        .emerging
        .then(|| unique_words(&mut rng, config.terms_per_topic, &mut taken));
    let background = unique_words(&mut rng, config.background_terms, &mut taken);

    let term_dist =
        WeightedIndex::new(zipf_weights(config.terms_per_topic)).expect("positive weights");
    let n_planted = config.n_topics + usize::from(emerging.is_some());
    let last = config.windows.len() - 1;

    let mut documents = Vec::new();
    let mut document_topics = Vec::new();
    for (t, &label) in config.windows.iter().enumerate() {
        // Topic i starts with weight n - i; even topics grow and odd topics
        // shrink over time, so overall ranks are distinct but drift by window.
        let popularity: Vec<f64> = (0..config.n_topics)
            .map(|i| {
                let drift = if i % 2 == 0 { 0.3 } else { -0.3 };
                ((config.n_topics - i) as f64 + drift * t as f64).max(0.5)
            })
            .collect();
        let topic_dist = WeightedIndex::new(&popularity).expect("positive weights");
        for d in 0..config.docs_per_window {
            let dominant = match &emerging {
                Some(_) if t == last && rng.random::<f64>() < config.emerging_fraction => {
                    config.n_topics
                }
                _ => topic_dist.sample(&mut rng),
            };
            let secondary = loop {
                let s = rng.random_range(0..config.n_topics);
                if s != dominant {
                    break s;
                }
            };
            let words_of = |i: usize| -> &Vec<String> {
                if i == config.n_topics {
                    emerging.as_ref().expect("emerging topic planted")
                } else {
                    &topics[i]
                }
            };
            let len = rng.random_range(config.min_doc_length..=config.max_doc_length);
            let mut tokens = Vec::with_capacity(len);
            for _ in 0..len {
                let u: f64 = rng.random();
                let word = if u < config.dominant_share {
                    &words_of(dominant)[term_dist.sample(&mut rng)]
                } else if u < config.dominant_share + config.secondary_share {
                    &words_of(secondary)[term_dist.sample(&mut rng)]
                } else if background.is_empty() {
                    &words_of(dominant)[term_dist.sample(&mut rng)]
                } else {
                    &background[rng.random_range(0..background.len())]
                };
                tokens.push(word.as_str());
            }
            let id = format!("{label}-{d:04}");
            document_topics.push((id.clone(), dominant));
            documents.push(Document {
                id,
                year: label,
                text: tokens.join(" "),
            });
        }
    }

    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut embeddings = EmbeddingTable::new(config.embedding_dim);
    let mut center = || -> Vec<f64> {
        (0..config.embedding_dim)
            .map(|_| normal.sample(&mut rng))
            .collect()
    };
    let centers: Vec<Vec<f64>> = (0..n_planted).map(|_| center()).collect();
    let noise = Normal::new(0.0, config.embedding_noise).expect("valid noise");
    for (i, words) in topics.iter().chain(emerging.iter()).enumerate() {
        for w in words {
            let v = centers[i]
                .iter()
                .map(|c| c + noise.sample(&mut rng))
                .collect();
            embeddings.insert(w.clone(), v);
        }
    }
    for w in &background {
        let v = (0..config.embedding_dim)
            .map(|_| normal.sample(&mut rng))
            .collect();
        embeddings.insert(w.clone(), v);
    }

    Ok(SyntheticCorpus {
        documents,
        embeddings,
        truth: SyntheticTruth {
            windows: config.windows.clone(),
            topics,
            emerging,
            background,
            document_topics,
        },
    })
}

/// Renders word vectors in the text format read by
/// [`crate::metrics::load_embeddings`], terms in lexicographic order.
pub fn embeddings_to_text(table: &EmbeddingTable, terms: &[String]) -> String {
    let mut sorted: Vec<&String> = terms.iter().filter(|t| table.get(t).is_some()).collect();
    sorted.sort();
    sorted.dedup();
    let mut out = format!("{} {}\n", sorted.len(), table.dim());
    for t in sorted {
        out.push_str(t);
        for x in table.get(t).expect("filtered above") {
            out.push_str(&format!(" {x:.6}"));
        }
        out.push('\n');
    }
    out
}

/// Writes `corpus.jsonl`, `embeddings.txt` and `truth.json` into `dir`.
pub fn write_synthetic(corpus: &SyntheticCorpus, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut jsonl = String::new();
    for doc in &corpus.documents {
        jsonl.push_str(&serde_json::to_string(doc).expect("documents serialize"));
        jsonl.push('\n');
    }
    let terms: Vec<String> = corpus
        .truth
        .topics
        .iter()
        .flatten()
        .chain(corpus.truth.emerging.iter().flatten())
        .chain(&corpus.truth.background)
        .cloned()
        .collect();
    let truth = serde_json::to_string_pretty(&corpus.truth).expect("truth serializes") + "\n";
    for (name, contents) in [
        ("corpus.jsonl", jsonl),
        (
            "embeddings.txt",
            embeddings_to_text(&corpus.embeddings, &terms),
        ),
        ("truth.json", truth),
    ] {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{load_corpus, CorpusFormat};
    use crate::metrics::load_embeddings;

    #[test]
    fn deterministic_for_a_seed() {
        let c = SyntheticConfig {
            emerging: true,
            ..SyntheticConfig::default()
        };
        assert_eq!(generate(&c).unwrap(), generate(&c).unwrap());
        let other = generate(&SyntheticConfig {
            seed: 1,
            ..c.clone()
        })
        .unwrap();
        assert_ne!(generate(&c).unwrap().documents, other.documents);
    }

    #[test]
    fn shape_and_emerging_placement() {
        let c = SyntheticConfig {
            emerging: true,
            ..SyntheticConfig::default()
        };
        let corpus = generate(&c).unwrap();
        assert_eq!(corpus.documents.len(), 300);
        assert_eq!(corpus.truth.topics.len(), 6);
        let emerging = corpus.truth.emerging.as_ref().unwrap();
        let emerging_docs: Vec<&str> = corpus
            .truth
            .document_topics
            .iter()
            .filter(|(_, t)| *t == 6)
            .map(|(id, _)| id.as_str())
            .collect();
        assert!(!emerging_docs.is_empty());
        assert!(emerging_docs.iter().all(|id| id.starts_with("2022-")));
        for doc in corpus.documents.iter().filter(|d| d.year < 2022) {
            assert!(doc
                .text
                .split(' ')
                .all(|w| !emerging.contains(&w.to_string())));
        }
    }

    #[test]
    fn words_are_unique_and_embedded() {
        let corpus = generate(&SyntheticConfig::default()).unwrap();
        let all: Vec<&String> = corpus
            .truth
            .topics
            .iter()
            .flatten()
            .chain(&corpus.truth.background)
            .collect();
        let set: BTreeSet<&String> = all.iter().copied().collect();
        assert_eq!(set.len(), all.len());
        assert!(all.iter().all(|w| corpus.embeddings.get(w).is_some()));
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = generate(&SyntheticConfig::default()).unwrap();
        write_synthetic(&corpus, dir.path()).unwrap();
        let docs = load_corpus(&dir.path().join("corpus.jsonl"), CorpusFormat::JsonLines).unwrap();
        assert_eq!(docs, corpus.documents);
        let (table, warnings) = load_embeddings(&dir.path().join("embeddings.txt")).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(table.len(), corpus.embeddings.len());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = SyntheticConfig::default();
        assert!(generate(&SyntheticConfig {
            n_topics: 1,
            ..base.clone()
        })
        .is_err());
        assert!(generate(&SyntheticConfig {
            dominant_share: 0.9,
            secondary_share: 0.2,
            ..base.clone()
        })
        .is_err());
        assert!(generate(&SyntheticConfig {
            min_doc_length: 10,
            max_doc_length: 5,
            ..base
        })
        .is_err());
    }
}
