//! The two-stage dynamic topic method.
//!
//! Stage 1 fits one NMF topic model per window ([`fit_window_models`]),
//! stacks the window feature matrices row-wise into `V`
//! ([`stack_window_features`]) and factors `V ~ W H` a second time
//! ([`fit_dynamic_model`]). Per-window document/dynamic-topic weights follow
//! as `F_t = X_t W_t`, with `W_t` the rows of `W` that belong to window `t`.
//!
//! Stage 2 ([`refine_dynamic_model`]) expresses every dynamic topic as a
//! non-negative combination of the columns of `V` (NNLS against the columns
//! of `W`), starts convex NMF from that and the dynamic feature matrix `H`,
//! and re-derives the per-window topic weights from the refined basis
//! `W~ = V G`.

mod dynamic;
mod ranking;
mod refine;
mod window;

use serde::{Deserialize, Serialize};

use crate::corpus::{DocumentSets, WindowLabel};
use crate::error::{Error, Result};
use crate::factor::{FitConfig, SnmfConfig};
use crate::metrics::{c_umass, tc_w2v, CoherenceMetric, EmbeddingTable};

pub use dynamic::{
    fit_dynamic_model, project_document_topics, stack_window_features, DynamicModel,
    StackedFeatureMatrix,
};
pub use ranking::{rank_topics, top_terms, window_occupancy, RankedTopic, Ranking};
pub use refine::{init_refinement, refine_dynamic_model, RefinedModel};
pub use window::{
    fit_window_model, fit_window_models, normalize_feature_rows, topic_term_lists, WindowFits,
    WindowModel,
};

/// Inclusive range of topic counts to search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KRange {
    pub min: usize,
    pub max: usize,
}

impl KRange {
    pub fn new(min: usize, max: usize) -> Result<Self> {
        if min == 0 || min > max {
            return Err(Error::Config(format!("invalid topic range [{min}, {max}]")));
        }
        Ok(Self { min, max })
    }

    pub fn single(k: usize) -> Self {
        Self { min: k, max: k }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.min..=self.max
    }

    pub fn len(&self) -> usize {
        self.max + 1 - self.min
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl Default for KRange {
    fn default() -> Self {
        Self { min: 5, max: 20 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Solver settings shared by every fit; `k` is overridden per fit.
    pub fit: FitConfig,
    /// Settings for the convex refinement; `k` is taken from the dynamic model.
    pub refine: FitConfig,
    /// Terms per topic scored when selecting K.
    pub coherence_top_n: usize,
    /// Terms per topic attached to ranked topics.
    pub report_top_n: usize,
    /// Elastic-net regularization of the window models, if any.
    pub window_reg: Option<SnmfConfig>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            fit: FitConfig::default(),
            refine: FitConfig {
                max_iters: 500,
                rel_tolerance: 1e-8,
                ..FitConfig::default()
            },
            coherence_top_n: 10,
            report_top_n: 20,
            window_reg: None,
        }
    }
}

/// Coherence used for topic-count selection.
#[derive(Debug, Clone, Copy)]
pub enum Scoring<'a> {
    TcW2v(&'a EmbeddingTable),
    CUmass(&'a DocumentSets),
}

impl Scoring<'_> {
    pub fn metric(&self) -> CoherenceMetric {
        match self {
            Scoring::TcW2v(_) => CoherenceMetric::TcW2v,
            Scoring::CUmass(_) => CoherenceMetric::CUmass,
        }
    }

    /// Mean coherence of the given topics.
    pub fn score(&self, topics: &[Vec<String>]) -> f64 {
        match self {
            Scoring::TcW2v(table) => tc_w2v(topics, table).mean,
            Scoring::CUmass(docs) => c_umass(topics, docs).mean,
        }
    }
}

/// Deterministic per-window seed derived from the master seed and the window
/// label (SplitMix64 finalizer over their combination).
pub fn window_seed(master: u64, label: WindowLabel) -> u64 {
    splitmix(master ^ splitmix(label as i64 as u64 ^ 0x005E_ED0F_D1A6))
}

/// Seed of the second-layer fit.
pub fn dynamic_seed(master: u64) -> u64 {
    splitmix(master ^ 0xD15A_11CE)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
