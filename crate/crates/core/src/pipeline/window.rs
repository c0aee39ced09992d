use std::collections::BTreeMap;

use ndarray::{Array2, Axis};
use rayon::prelude::*;

use crate::corpus::{DocTermMatrix, DocumentSets, Vocabulary, WindowLabel};
use crate::error::{Error, Result};
use crate::factor::{nmf_fit, snmf_fit, FactorPair};
use crate::metrics::{select_k, CoherenceMetric, EmbeddingTable};
use crate::pipeline::{top_terms, window_seed, KRange, PipelineConfig, Scoring};

/// Topic model of one window: `Z_t ~ X_t Y_t` with unit-norm rows of `Y_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowModel {
    pub window_label: WindowLabel,
    pub doc_ids: Vec<String>,
    /// Documents x topics.
    pub x: Array2<f64>,
    /// Topics x terms, rows L2-normalized.
    pub y: Array2<f64>,
    pub k: usize,
    pub coherence_by_k: BTreeMap<usize, f64>,
    pub metric: CoherenceMetric,
    /// Final value of the fitted objective for the chosen K.
    pub final_loss: f64,
}

impl WindowModel {
    pub fn n_docs(&self) -> usize {
        self.x.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowFits {
    /// Fitted windows in ascending label order. Skipped windows are absent.
    pub models: Vec<WindowModel>,
    pub warnings: Vec<String>,
}

/// Rescales each row of `y` to unit L2 norm and multiplies the matching
/// column of `x` by the removed norm, so `x y` is unchanged. Zero rows stay.
pub fn normalize_feature_rows(x: &mut Array2<f64>, y: &mut Array2<f64>) {
    for (r, mut row) in y.axis_iter_mut(Axis(0)).enumerate() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|v| v / norm);
            x.column_mut(r).mapv_inplace(|v| v * norm);
        }
    }
}

/// Fits every K of `k_range` on one window, keeps the most coherent model
/// and normalizes its feature rows.
pub fn fit_window_model(
    z: &DocTermMatrix,
    vocab: &Vocabulary,
    k_range: KRange,
    embeddings: Option<&EmbeddingTable>,
    master_seed: u64,
    config: &PipelineConfig,
) -> Result<WindowModel> {
    if z.n_cols() != vocab.len() {
        return Err(Error::Shape(format!(
            "window {} has {} columns, vocabulary has {}",
            z.window_label,
            z.n_cols(),
            vocab.len()
        )));
    }
    let dense = z.to_dense();
    let seed = window_seed(master_seed, z.window_label);
    let doc_sets;
    let scoring = match embeddings {
        Some(table) => Scoring::TcW2v(table),
        None => {
            doc_sets = DocumentSets::from_matrices([z], vocab);
            Scoring::CUmass(&doc_sets)
        }
    };

    let fits: Vec<(usize, FactorPair, f64)> = k_range
        .iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| {
            let fit_config = config.fit.with_k(k).with_seed(seed);
            let pair = match &config.window_reg {
                Some(reg) => snmf_fit(dense.view(), &fit_config, reg)?,
                None => nmf_fit(dense.view(), &fit_config)?,
            };
            let topics = topic_term_lists(&pair.h, vocab, config.coherence_top_n);
            let score = scoring.score(&topics);
            Ok((k, pair, score))
        })
        .collect::<Result<_>>()?;

    let coherence_by_k: BTreeMap<usize, f64> = fits.iter().map(|(k, _, s)| (*k, *s)).collect();
    let best = select_k(&coherence_by_k);
    let (_, pair, _) = fits
        .into_iter()
        .find(|(k, _, _)| *k == best)
        .expect("selected K was fitted");
    let final_loss = pair.final_loss();
    let (mut x, mut y) = (pair.w, pair.h);
    normalize_feature_rows(&mut x, &mut y);
    Ok(WindowModel {
        window_label: z.window_label,
        doc_ids: z.rows.clone(),
        x,
        y,
        k: best,
        coherence_by_k,
        metric: scoring.metric(),
        final_loss,
    })
}

/// Fits a window model for each slice in parallel. Windows with fewer
/// documents than `k_range.min` are skipped with a warning; windows with
/// fewer documents than `k_range.max` search a truncated range.
pub fn fit_window_models(
    slices: &[DocTermMatrix],
    vocab: &Vocabulary,
    k_range: KRange,
    embeddings: Option<&EmbeddingTable>,
    master_seed: u64,
    config: &PipelineConfig,
) -> Result<WindowFits> {
    config.fit.with_k(k_range.min).validate()?;
    if k_range.max > vocab.len() {
        return Err(Error::RankOutOfRange {
            k: k_range.max,
            rows: slices.iter().map(DocTermMatrix::n_rows).max().unwrap_or(0),
            cols: vocab.len(),
        });
    }
    let mut warnings = Vec::new();
    let mut jobs = Vec::new();
    for z in slices {
        let n = z.n_rows();
        if n < k_range.min {
            warnings.push(format!(
                "window {}: {n} documents, fewer than the smallest topic count {}; skipped",
                z.window_label, k_range.min
            ));
            continue;
        }
        let range = if n < k_range.max {
            warnings.push(format!(
                "window {}: {n} documents, topic range truncated to [{}, {n}]",
                z.window_label, k_range.min
            ));
            KRange::new(k_range.min, n)?
        } else {
            k_range
        };
        jobs.push((z, range));
    }
    let models = jobs
        .into_par_iter()
        .map(|(z, range)| fit_window_model(z, vocab, range, embeddings, master_seed, config))
        .collect::<Result<Vec<_>>>()?;
    if models.is_empty() {
        return Err(Error::Empty("no window has enough documents to fit".into()));
    }
    Ok(WindowFits { models, warnings })
}

/// Top `n` terms of every row of a feature matrix.
pub fn topic_term_lists(h: &Array2<f64>, vocab: &Vocabulary, n: usize) -> Vec<Vec<String>> {
    h.rows()
        .into_iter()
        .map(|row| {
            top_terms(row, vocab, n)
                .into_iter()
                .map(|(t, _)| t)
                .collect()
        })
        .collect()
}
