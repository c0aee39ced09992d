//! Topic quality and stability measures.

mod alignment;
mod coherence;
mod embeddings;
mod ranking_change;
mod stability;

use std::collections::BTreeMap;

pub use alignment::{align_topics, min_cost_assignment, row_cosines};
pub use coherence::{c_umass, tc_w2v, CoherenceMetric, CoherenceReport};
pub use embeddings::{load_embeddings, parse_embeddings, EmbeddingTable};
pub use ranking_change::{ranking_change, RankingChangeReport, ShareConvention};
pub use stability::{
    stability_experiment, StabilityConfig, StabilityReport, StabilityRow, StabilitySeedRow,
};

/// Topic count with the highest score. Ties go to the smaller K and NaN
/// scores never win. Panics on an empty map.
pub fn select_k(scores: &BTreeMap<usize, f64>) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (&k, &s) in scores {
        let s = if s.is_nan() { f64::NEG_INFINITY } else { s };
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((k, s)),
        }
    }
    best.expect("select_k needs at least one score").0
}
