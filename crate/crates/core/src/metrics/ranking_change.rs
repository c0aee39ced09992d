use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::RankedTopic;

/// Which share multiplies a topic's new rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShareConvention {
    /// The matched topic's own share in the perturbed model.
    #[default]
    PerturbedShare,
    /// The baseline share of whichever topic holds the new rank in the baseline.
    BaselineShareAtNewRank,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingChangeReport {
    /// One term per baseline topic, in baseline rank order.
    pub per_topic_terms: Vec<f64>,
    pub score: f64,
    /// `alignment[i]` is the perturbed topic matched to baseline topic `i`.
    pub alignment: Vec<usize>,
}

/// Mean over baseline topics of `|share' * rank' - share * rank|`, where
/// `rank`/`share` describe a baseline topic and `rank'`/`share'` its matched
/// perturbed topic (see [`ShareConvention`]).
pub fn ranking_change(
    baseline: &[RankedTopic],
    perturbed: &[RankedTopic],
    alignment: &[usize],
    convention: ShareConvention,
) -> Result<RankingChangeReport> {
    let k = baseline.len();
    if perturbed.len() != k || alignment.len() != k {
        return Err(Error::Shape(format!(
            "ranking change needs equal topic counts, got {k}, {} and alignment of {}",
            perturbed.len(),
            alignment.len()
        )));
    }
    let by_index = |ranked: &[RankedTopic]| -> Result<Vec<(usize, f64)>> {
        let mut out = vec![None; k];
        for t in ranked {
            if t.topic_index >= k || out[t.topic_index].is_some() {
                return Err(Error::Shape(format!(
                    "topic index {} invalid or repeated",
                    t.topic_index
                )));
            }
            out[t.topic_index] = Some((t.rank, t.share));
        }
        Ok(out
            .into_iter()
            .map(|o| o.expect("all indices present"))
            .collect())
    };
    let base = by_index(baseline)?;
    let pert = by_index(perturbed)?;
    let mut base_share_at_rank = vec![0.0; k + 1];
    for &(rank, share) in &base {
        base_share_at_rank[rank] = share;
    }

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&t| base[t].0);
    let per_topic_terms: Vec<f64> = order
        .iter()
        .map(|&t| {
            let (rank, share) = base[t];
            let (new_rank, pert_share) = pert[alignment[t]];
            let new_share = match convention {
                ShareConvention::PerturbedShare => pert_share,
                ShareConvention::BaselineShareAtNewRank => base_share_at_rank[new_rank],
            };
            (new_share * new_rank as f64 - share * rank as f64).abs()
        })
        .collect();
    let score = if k == 0 {
        0.0
    } else {
        per_topic_terms.iter().sum::<f64>() / k as f64
    };
    Ok(RankingChangeReport {
        per_topic_terms,
        score,
        alignment: alignment.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranked(entries: &[(usize, usize, f64)]) -> Vec<RankedTopic> {
        entries
            .iter()
            .map(|&(topic_index, rank, share)| RankedTopic {
                topic_index,
                rank,
                share,
                top_terms: Vec::new(),
            })
            .collect()
    }

    #[test]
    fn identical_models_score_zero() {
        let m = ranked(&[(0, 2, 0.3), (1, 1, 0.5), (2, 3, 0.2)]);
        let r = ranking_change(&m, &m, &[0, 1, 2], ShareConvention::PerturbedShare).unwrap();
        assert_eq!(r.score, 0.0);
    }

    #[test]
    fn single_topic_scores_zero() {
        let base = ranked(&[(0, 1, 1.0)]);
        let r = ranking_change(&base, &base, &[0], ShareConvention::PerturbedShare).unwrap();
        assert_eq!(r.score, 0.0);
    }

    #[test]
    fn swapped_pair_worked_example() {
        // baseline: A rank 1 (0.6), B rank 2 (0.4); perturbed: B rank 1 (0.6), A rank 2 (0.4)
        let base = ranked(&[(0, 1, 0.6), (1, 2, 0.4)]);
        let pert = ranked(&[(0, 2, 0.4), (1, 1, 0.6)]);
        for conv in [
            ShareConvention::PerturbedShare,
            ShareConvention::BaselineShareAtNewRank,
        ] {
            let r = ranking_change(&base, &pert, &[0, 1], conv).unwrap();
            assert!((r.per_topic_terms[0] - 0.2).abs() < 1e-15);
            assert!((r.per_topic_terms[1] - 0.2).abs() < 1e-15);
            assert!((r.score - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn conventions_differ_when_shares_move() {
        let base = ranked(&[(0, 1, 0.7), (1, 2, 0.3)]);
        let pert = ranked(&[(0, 1, 0.5), (1, 2, 0.5)]);
        let a = ranking_change(&base, &pert, &[0, 1], ShareConvention::PerturbedShare).unwrap();
        let b = ranking_change(
            &base,
            &pert,
            &[0, 1],
            ShareConvention::BaselineShareAtNewRank,
        )
        .unwrap();
        assert!(a.score > 0.0);
        assert_eq!(b.score, 0.0);
    }

    #[test]
    fn mismatched_k_is_an_error() {
        let base = ranked(&[(0, 1, 1.0)]);
        let pert = ranked(&[(0, 1, 0.5), (1, 2, 0.5)]);
        assert!(ranking_change(&base, &pert, &[0], ShareConvention::PerturbedShare).is_err());
    }
}
