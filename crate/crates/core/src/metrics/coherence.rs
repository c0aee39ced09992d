use serde::{Deserialize, Serialize};

use crate::corpus::DocumentSets;
use crate::metrics::EmbeddingTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherenceMetric {
    TcW2v,
    CUmass,
}

impl CoherenceMetric {
    pub fn name(self) -> &'static str {
        match self {
            CoherenceMetric::TcW2v => "tc_w2v",
            CoherenceMetric::CUmass => "c_umass",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub metric: CoherenceMetric,
    pub top_n: usize,
    pub per_topic: Vec<f64>,
    pub mean: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

impl CoherenceReport {
    fn new(
        metric: CoherenceMetric,
        topics: &[Vec<String>],
        per_topic: Vec<f64>,
        warnings: Vec<String>,
    ) -> Self {
        let mean = if per_topic.is_empty() {
            0.0
        } else {
            per_topic.iter().sum::<f64>() / per_topic.len() as f64
        };
        Self {
            metric,
            top_n: topics.iter().map(Vec::len).max().unwrap_or(0),
            per_topic,
            mean,
            warnings,
        }
    }
}

fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Mean pairwise cosine similarity of each topic's term vectors.
///
/// Pairs with a term missing from the table are skipped. A topic with fewer
/// than two embedded terms scores 0 and is reported in `warnings`.
pub fn tc_w2v(topics: &[Vec<String>], table: &EmbeddingTable) -> CoherenceReport {
    let mut warnings = Vec::new();
    let per_topic = topics
        .iter()
        .enumerate()
        .map(|(t, terms)| {
            let vecs: Vec<&[f64]> = terms.iter().filter_map(|w| table.get(w)).collect();
            let mut sum = 0.0;
            let mut pairs = 0usize;
            for i in 0..vecs.len() {
                for j in i + 1..vecs.len() {
                    if let Some(c) = cosine(vecs[i], vecs[j]) {
                        sum += c;
                        pairs += 1;
                    }
                }
            }
            if pairs == 0 {
                warnings.push(format!(
                    "topic {t}: {} of {} terms have embeddings, scored 0",
                    vecs.len(),
                    terms.len()
                ));
                0.0
            } else {
                sum / pairs as f64
            }
        })
        .collect();
    CoherenceReport::new(CoherenceMetric::TcW2v, topics, per_topic, warnings)
}

/// UMass coherence: for each topic the sum over rank-ordered pairs
/// (`w_m` ranked below `w_l`) of `ln((D(w_m, w_l) + 1) / D(w_l))`, where `D`
/// counts documents. Pairs whose conditioning term occurs in no document are
/// skipped with a warning.
pub fn c_umass(topics: &[Vec<String>], docs: &DocumentSets) -> CoherenceReport {
    let mut warnings = Vec::new();
    let per_topic = topics
        .iter()
        .enumerate()
        .map(|(t, terms)| {
            let mut score = 0.0;
            for m in 1..terms.len() {
                for l in 0..m {
                    let d_l = docs.df(&terms[l]);
                    if d_l == 0 {
                        warnings.push(format!(
                            "topic {t}: term `{}` occurs in no document",
                            terms[l]
                        ));
                        continue;
                    }
                    let joint = docs.co_df(&terms[m], &terms[l]);
                    score += ((joint as f64 + 1.0) / d_l as f64).ln();
                }
            }
            score
        })
        .collect();
    warnings.dedup();
    CoherenceReport::new(CoherenceMetric::CUmass, topics, per_topic, warnings)
}
