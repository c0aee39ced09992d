use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::corpus::{Vocabulary, WindowLabel};
use crate::error::{Error, Result};

/// A dynamic topic with its popularity rank (1 = most popular).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedTopic {
    pub topic_index: usize,
    pub rank: usize,
    pub share: f64,
    pub top_terms: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    /// Topics in rank order.
    pub topics: Vec<RankedTopic>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

impl Ranking {
    /// Entry for `topic_index`.
    pub fn topic(&self, topic_index: usize) -> Option<&RankedTopic> {
        self.topics.iter().find(|t| t.topic_index == topic_index)
    }
}

/// The `n` highest-weight terms of a feature row, descending. Equal weights
/// keep vocabulary (lexicographic) order.
pub fn top_terms(h_row: ArrayView1<'_, f64>, vocab: &Vocabulary, n: usize) -> Vec<(String, f64)> {
    let mut order: Vec<usize> = (0..h_row.len()).collect();
    order.sort_by(|&a, &b| {
        h_row[b]
            .total_cmp(&h_row[a])
            .then(vocab.term(a).cmp(vocab.term(b)))
    });
    order
        .into_iter()
        .take(n)
        .map(|c| (vocab.term(c).to_string(), h_row[c]))
        .collect()
}

/// Popularity of each topic: its total document weight over all windows,
/// normalized to sum to 1. Ranks descend by share with ties to the lower
/// topic index. If every weight is zero the shares are uniform.
pub fn rank_topics(
    f_by_window: &[(WindowLabel, Array2<f64>)],
    h: ArrayView2<'_, f64>,
    vocab: &Vocabulary,
    n_terms: usize,
) -> Result<Ranking> {
    let k = h.nrows();
    if h.ncols() != vocab.len() {
        return Err(Error::Shape(format!(
            "feature matrix has {} columns, vocabulary has {}",
            h.ncols(),
            vocab.len()
        )));
    }
    let mut mass = vec![0.0; k];
    for (label, f) in f_by_window {
        if f.ncols() != k {
            return Err(Error::Shape(format!(
                "window {label} has {} topic columns, expected {k}",
                f.ncols()
            )));
        }
        for row in f.rows() {
            for (m, v) in mass.iter_mut().zip(row) {
                *m += v;
            }
        }
    }
    let mut warnings = Vec::new();
    let total: f64 = mass.iter().sum();
    let shares: Vec<f64> = if total > 0.0 {
        mass.iter().map(|m| m / total).collect()
    } else {
        warnings.push("all document-topic weights are zero; using uniform popularity".to_string());
        vec![1.0 / k as f64; k]
    };
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| shares[b].total_cmp(&shares[a]).then(a.cmp(&b)));
    let topics = order
        .into_iter()
        .enumerate()
        .map(|(r, t)| RankedTopic {
            topic_index: t,
            rank: r + 1,
            share: shares[t],
            top_terms: top_terms(h.row(t), vocab, n_terms),
        })
        .collect();
    Ok(Ranking { topics, warnings })
}

/// For each window, the fraction of that window's document-topic weight
/// carried by `topic` (0 for a window with no weight).
pub fn window_occupancy(
    f_by_window: &[(WindowLabel, Array2<f64>)],
    topic: usize,
) -> Vec<(WindowLabel, f64)> {
    f_by_window
        .iter()
        .map(|(label, f)| {
            let total = f.sum();
            let own = f.column(topic).sum();
            (*label, if total > 0.0 { own / total } else { 0.0 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::seeded_init;
    use ndarray::array;
    use proptest::prelude::*;

    fn vocab(terms: &[&str]) -> Vocabulary {
        Vocabulary::from_terms(terms.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn top_term_order() {
        let v = vocab(&["path", "robot"]);
        let h = array![0.1, 0.9];
        assert_eq!(top_terms(h.view(), &v, 1), vec![("robot".to_string(), 0.9)]);
        let all: Vec<String> = top_terms(h.view(), &v, 2)
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        assert_eq!(all, ["robot", "path"]);
    }

    #[test]
    fn top_term_ties_are_lexicographic() {
        let v = vocab(&["alpha", "beta", "gamma"]);
        let h = array![0.5, 0.5, 0.5];
        let t: Vec<String> = top_terms(h.view(), &v, 3)
            .into_iter()
            .map(|(t, _)| t)
            .collect();
        assert_eq!(t, ["alpha", "beta", "gamma"]);
    }

    #[test]
    fn shares_from_column_sums() {
        let v = vocab(&["a"]);
        let h = array![[1.0], [1.0]];
        let f = vec![(2020, array![[2.0, 0.5], [1.0, 0.5]])];
        let r = rank_topics(&f, h.view(), &v, 1).unwrap();
        assert_eq!(r.topic(0).unwrap().share, 0.75);
        assert_eq!(r.topic(1).unwrap().share, 0.25);
        assert_eq!(r.topic(0).unwrap().rank, 1);
        assert_eq!(r.topic(1).unwrap().rank, 2);
    }

    #[test]
    fn equal_shares_rank_by_index() {
        let v = vocab(&["a"]);
        let h = array![[1.0], [1.0], [1.0]];
        let f = vec![(1, array![[1.0, 1.0, 1.0]])];
        let r = rank_topics(&f, h.view(), &v, 1).unwrap();
        let idx: Vec<usize> = r.topics.iter().map(|t| t.topic_index).collect();
        assert_eq!(idx, [0, 1, 2]);
    }

    #[test]
    fn zero_weights_give_uniform_shares() {
        let v = vocab(&["a"]);
        let h = array![[1.0], [1.0]];
        let f = vec![(1, Array2::zeros((3, 2)))];
        let r = rank_topics(&f, h.view(), &v, 1).unwrap();
        assert!(r.topics.iter().all(|t| t.share == 0.5));
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn occupancy_per_window() {
        let f = vec![(1, array![[3.0, 1.0]]), (2, Array2::zeros((1, 2)))];
        assert_eq!(window_occupancy(&f, 0), vec![(1, 0.75), (2, 0.0)]);
    }

    proptest! {
        #[test]
        fn ranks_are_a_permutation_and_shares_sum_to_one(seed in 0u64..500, k in 1usize..8, docs in 1usize..6) {
            let names: Vec<String> = (0..4).map(|i| format!("w{i}")).collect();
            let v = Vocabulary::from_terms(names).unwrap();
            let h = seeded_init(k, 4, seed);
            let f = vec![(0, seeded_init(docs, k, seed + 1)), (1, seeded_init(docs, k, seed + 2))];
            let r = rank_topics(&f, h.view(), &v, 2).unwrap();
            let mut ranks: Vec<usize> = r.topics.iter().map(|t| t.rank).collect();
            ranks.sort_unstable();
            prop_assert_eq!(ranks, (1..=k).collect::<Vec<_>>());
            let sum: f64 = r.topics.iter().map(|t| t.share).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
            prop_assert!(r.topics.windows(2).all(|p| p[0].share >= p[1].share));
        }
    }
}
