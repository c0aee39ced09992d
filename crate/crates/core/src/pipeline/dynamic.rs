use std::collections::BTreeMap;
use std::ops::Range;

use ndarray::{concatenate, s, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::corpus::{Vocabulary, WindowLabel};
use crate::error::{Error, Result};
use crate::factor::{nmf_fit, FactorPair};
use crate::metrics::{select_k, CoherenceMetric};
use crate::pipeline::topic_term_lists;
use crate::pipeline::{dynamic_seed, KRange, PipelineConfig, Scoring, WindowModel};

/// Window feature matrices stacked row-wise: `V = [Y_1; ...; Y_T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedFeatureMatrix {
    /// (sum of window topic counts) x terms.
    pub v: Array2<f64>,
    /// `(window label, window topic index)` of every row of `v`.
    pub row_provenance: Vec<(WindowLabel, usize)>,
}

impl StackedFeatureMatrix {
    /// Window labels in stacking order.
    pub fn window_labels(&self) -> Vec<WindowLabel> {
        let mut labels: Vec<WindowLabel> = Vec::new();
        for &(label, _) in &self.row_provenance {
            if labels.last() != Some(&label) {
                labels.push(label);
            }
        }
        labels
    }

    /// Rows of `v` that came from window `label`.
    pub fn window_rows(&self, label: WindowLabel) -> Option<Range<usize>> {
        let start = self.row_provenance.iter().position(|&(l, _)| l == label)?;
        let len = self.row_provenance[start..]
            .iter()
            .take_while(|&&(l, _)| l == label)
            .count();
        Some(start..start + len)
    }

    /// The block of `v` belonging to window `label` (equal to that window's `Y`).
    pub fn window_block(&self, label: WindowLabel) -> Option<ArrayView2<'_, f64>> {
        self.window_rows(label).map(|r| self.v.slice(s![r, ..]))
    }
}

/// Stacks the feature matrices of `models` in the given order.
pub fn stack_window_features(models: &[WindowModel]) -> Result<StackedFeatureMatrix> {
    let first = models
        .first()
        .ok_or_else(|| Error::Empty("no window models to stack".into()))?;
    let cols = first.y.ncols();
    if let Some(m) = models.iter().find(|m| m.y.ncols() != cols) {
        return Err(Error::Shape(format!(
            "window {} has {} feature columns, expected {cols}",
            m.window_label,
            m.y.ncols()
        )));
    }
    let views: Vec<_> = models.iter().map(|m| m.y.view()).collect();
    let v = concatenate(Axis(0), &views).map_err(|e| Error::Shape(e.to_string()))?;
    let row_provenance = models
        .iter()
        .flat_map(|m| (0..m.y.nrows()).map(move |i| (m.window_label, i)))
        .collect();
    Ok(StackedFeatureMatrix { v, row_provenance })
}

/// Document weights on dynamic topics for one window: `F_t = X_t W_t`.
pub fn project_document_topics(
    x: ArrayView2<'_, f64>,
    w_block: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    if x.ncols() != w_block.nrows() {
        return Err(Error::Shape(format!(
            "cannot multiply {:?} document weights by a {:?} block",
            x.dim(),
            w_block.dim()
        )));
    }
    Ok(x.dot(&w_block))
}

/// Splits a (stacked rows) x K matrix into per-window blocks and projects
/// each window's documents onto them.
#[allow(clippy::type_complexity)]
pub(crate) fn blocks_and_projections(
    stacked: &StackedFeatureMatrix,
    windows: &[WindowModel],
    basis: ArrayView2<'_, f64>,
) -> Result<(
    Vec<(WindowLabel, Array2<f64>)>,
    Vec<(WindowLabel, Array2<f64>)>,
)> {
    let mut blocks = Vec::new();
    let mut projections = Vec::new();
    for label in stacked.window_labels() {
        let rows = stacked
            .window_rows(label)
            .expect("label comes from provenance");
        let window = windows
            .iter()
            .find(|m| m.window_label == label)
            .ok_or_else(|| Error::Shape(format!("no window model for stacked window {label}")))?;
        let block = basis.slice(s![rows, ..]).to_owned();
        projections.push((
            label,
            project_document_topics(window.x.view(), block.view())?,
        ));
        blocks.push((label, block));
    }
    Ok((blocks, projections))
}

/// Second-layer factorization `V ~ W H` with its per-window projections.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicModel {
    pub k: usize,
    /// (stacked rows) x K.
    pub w: Array2<f64>,
    /// K x terms.
    pub h: Array2<f64>,
    pub coherence_by_k: BTreeMap<usize, f64>,
    pub metric: CoherenceMetric,
    pub initial_loss: f64,
    pub loss_trace: Vec<f64>,
    pub iterations_run: usize,
    /// Rows of `W` per window, in stacking order.
    pub w_blocks: Vec<(WindowLabel, Array2<f64>)>,
    /// `F_t = X_t W_t` per window, in stacking order.
    pub f_by_window: Vec<(WindowLabel, Array2<f64>)>,
}

impl DynamicModel {
    /// Builds the model from fitted factors of `stacked.v`.
    pub fn from_factors(
        stacked: &StackedFeatureMatrix,
        windows: &[WindowModel],
        factors: FactorPair,
        coherence_by_k: BTreeMap<usize, f64>,
        metric: CoherenceMetric,
    ) -> Result<Self> {
        if factors.w.nrows() != stacked.v.nrows() || factors.h.ncols() != stacked.v.ncols() {
            return Err(Error::Shape(format!(
                "factors {:?} x {:?} do not fit a {:?} stacked matrix",
                factors.w.dim(),
                factors.h.dim(),
                stacked.v.dim()
            )));
        }
        let (w_blocks, f_by_window) = blocks_and_projections(stacked, windows, factors.w.view())?;
        Ok(Self {
            k: factors.h.nrows(),
            w: factors.w,
            h: factors.h,
            coherence_by_k,
            metric,
            initial_loss: factors.initial_loss,
            loss_trace: factors.loss_trace,
            iterations_run: factors.iterations_run,
            w_blocks,
            f_by_window,
        })
    }

    pub fn final_loss(&self) -> f64 {
        self.loss_trace.last().copied().unwrap_or(self.initial_loss)
    }
}

/// Fits the second layer for every K of `k_range` and keeps the most
/// coherent one.
pub fn fit_dynamic_model(
    stacked: &StackedFeatureMatrix,
    windows: &[WindowModel],
    vocab: &Vocabulary,
    k_range: KRange,
    scoring: Scoring<'_>,
    master_seed: u64,
    config: &PipelineConfig,
) -> Result<DynamicModel> {
    let (rows, cols) = stacked.v.dim();
    if k_range.max > rows.min(cols) {
        return Err(Error::RankOutOfRange {
            k: k_range.max,
            rows,
            cols,
        });
    }
    if cols != vocab.len() {
        return Err(Error::Shape(format!(
            "stacked matrix has {cols} columns, vocabulary has {}",
            vocab.len()
        )));
    }
    let seed = dynamic_seed(master_seed);
    let fits: Vec<(usize, FactorPair, f64)> = k_range
        .iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| {
            let pair = nmf_fit(stacked.v.view(), &config.fit.with_k(k).with_seed(seed))?;
            let score = scoring.score(&topic_term_lists(&pair.h, vocab, config.coherence_top_n));
            Ok((k, pair, score))
        })
        .collect::<Result<_>>()?;
    let coherence_by_k: BTreeMap<usize, f64> = fits.iter().map(|(k, _, s)| (*k, *s)).collect();
    let best = select_k(&coherence_by_k);
    let (_, pair, _) = fits
        .into_iter()
        .find(|(k, _, _)| *k == best)
        .expect("selected K was fitted");
    DynamicModel::from_factors(stacked, windows, pair, coherence_by_k, scoring.metric())
}
