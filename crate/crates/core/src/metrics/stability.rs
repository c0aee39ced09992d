use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{DocTermMatrix, DocumentSets, Vocabulary};
use crate::error::{Error, Result};
use crate::factor::SnmfConfig;
use crate::metrics::{align_topics, ranking_change, tc_w2v, EmbeddingTable, ShareConvention};
use crate::pipeline::{
    fit_dynamic_model, fit_window_model, fit_window_models, rank_topics, refine_dynamic_model,
    stack_window_features, KRange, PipelineConfig, Ranking, Scoring, WindowModel,
};

/// Settings of the sparse-perturbation stability experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityConfig {
    /// Sparsity ratios to test; 0 reproduces the baseline.
    pub l_values: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// Topic count of the dynamic models.
    pub k: usize,
    /// Window topic counts are selected once, on the baseline, from this range.
    pub window_k_range: KRange,
    pub seeds: Vec<u64>,
    pub convention: ShareConvention,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            l_values: vec![0.0, 0.4, 0.6, 0.9],
            alpha: 1e-5,
            beta: 0.0,
            k: 18,
            window_k_range: KRange::default(),
            seeds: vec![0],
            convention: ShareConvention::default(),
        }
    }
}

impl StabilityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l_values.is_empty() || self.seeds.is_empty() {
            return Err(Error::Config(
                "stability needs at least one l value and one seed".into(),
            ));
        }
        if let Some(l) = self.l_values.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(Error::Config(format!("l value {l} outside [0, 1]")));
        }
        SnmfConfig {
            alpha: self.alpha,
            beta: self.beta,
            l1_ratio: 0.0,
        }
        .validate()
    }
}

/// Averages over seeds for one sparsity ratio. Coherence columns are NaN
/// without embeddings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub l: f64,
    pub tc_w2v_nmf: f64,
    pub tc_w2v_cnmf: f64,
    pub change_nmf: f64,
    pub change_cnmf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySeedRow {
    pub seed: u64,
    #[serde(flatten)]
    pub row: StabilityRow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// One row per l value, in input order.
    pub rows: Vec<StabilityRow>,
    /// One row per (seed, l) cell.
    pub per_seed: Vec<StabilitySeedRow>,
    pub warnings: Vec<String>,
}

struct FamilyModels {
    nmf_h: ndarray::Array2<f64>,
    nmf_ranking: Ranking,
    cnmf_h: ndarray::Array2<f64>,
    cnmf_ranking: Ranking,
}

/// Refits the window layer with the elastic-net penalty at each sparsity
/// ratio `l`, rebuilds the dynamic (NMF-NMF) and refined (NMF-cNMF) models,
/// and measures their ranking change against the `l = 0` models of the same
/// seed along with their TC-W2V coherence.
pub fn stability_experiment(
    slices: &[DocTermMatrix],
    vocab: &Vocabulary,
    embeddings: Option<&EmbeddingTable>,
    stability: &StabilityConfig,
    config: &PipelineConfig,
) -> Result<StabilityReport> {
    stability.validate()?;
    let doc_sets;
    let scoring = match embeddings {
        Some(t) => Scoring::TcW2v(t),
        None => {
            doc_sets = DocumentSets::from_matrices(slices, vocab);
            Scoring::CUmass(&doc_sets)
        }
    };
    let reg = |l: f64| SnmfConfig {
        alpha: stability.alpha,
        beta: stability.beta,
        l1_ratio: l,
    };

    let per_seed_results: Vec<(Vec<StabilitySeedRow>, Vec<String>)> = stability
        .seeds
        .par_iter()
        .map(|&seed| {
            let base_config = PipelineConfig {
                window_reg: Some(reg(0.0)),
                ..config.clone()
            };
            let fits = fit_window_models(
                slices,
                vocab,
                stability.window_k_range,
                embeddings,
                seed,
                &base_config,
            )?;
            let window_ks: Vec<(usize, usize)> = fits
                .models
                .iter()
                .map(|m| {
                    let idx = slices
                        .iter()
                        .position(|z| z.window_label == m.window_label)
                        .expect("fitted slice");
                    (idx, m.k)
                })
                .collect();
            let baseline = build_families(
                &fits.models,
                vocab,
                stability.k,
                scoring,
                seed,
                &base_config,
            )?;

            let rows = stability
                .l_values
                .par_iter()
                .map(|&l| {
                    let perturbed = if l == 0.0 {
                        None
                    } else {
                        let cfg = PipelineConfig {
                            window_reg: Some(reg(l)),
                            ..config.clone()
                        };
                        let models = window_ks
                            .iter()
                            .map(|&(idx, k)| {
                                fit_window_model(
                                    &slices[idx],
                                    vocab,
                                    KRange::single(k),
                                    embeddings,
                                    seed,
                                    &cfg,
                                )
                            })
                            .collect::<Result<Vec<WindowModel>>>()?;
                        Some(build_families(
                            &models,
                            vocab,
                            stability.k,
                            scoring,
                            seed,
                            &cfg,
                        )?)
                    };
                    let p = perturbed.as_ref().unwrap_or(&baseline);
                    let change = |bh: &ndarray::Array2<f64>,
                                  br: &Ranking,
                                  ph: &ndarray::Array2<f64>,
                                  pr: &Ranking|
                     -> Result<f64> {
                        let alignment = align_topics(bh.view(), ph.view())?;
                        Ok(ranking_change(
                            &br.topics,
                            &pr.topics,
                            &alignment,
                            stability.convention,
                        )?
                        .score)
                    };
                    let coherence = |h: &ndarray::Array2<f64>| match embeddings {
                        Some(t) => {
                            let topics =
                                crate::pipeline::topic_term_lists(h, vocab, config.coherence_top_n);
                            tc_w2v(&topics, t).mean
                        }
                        None => f64::NAN,
                    };
                    Ok(StabilitySeedRow {
                        seed,
                        row: StabilityRow {
                            l,
                            tc_w2v_nmf: coherence(&p.nmf_h),
                            tc_w2v_cnmf: coherence(&p.cnmf_h),
                            change_nmf: change(
                                &baseline.nmf_h,
                                &baseline.nmf_ranking,
                                &p.nmf_h,
                                &p.nmf_ranking,
                            )?,
                            change_cnmf: change(
                                &baseline.cnmf_h,
                                &baseline.cnmf_ranking,
                                &p.cnmf_h,
                                &p.cnmf_ranking,
                            )?,
                        },
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((rows, fits.warnings))
        })
        .collect::<Result<_>>()?;

    let mut per_seed = Vec::new();
    let mut warnings = Vec::new();
    for (rows, w) in per_seed_results {
        per_seed.extend(rows);
        for msg in w {
            if !warnings.contains(&msg) {
                warnings.push(msg);
            }
        }
    }
    let n = stability.seeds.len() as f64;
    let rows = stability
        .l_values
        .iter()
        .map(|&l| {
            let cells: Vec<&StabilityRow> = per_seed
                .iter()
                .map(|r| &r.row)
                .filter(|r| r.l == l)
                .collect();
            let mean = |f: fn(&StabilityRow) -> f64| cells.iter().map(|r| f(r)).sum::<f64>() / n;
            StabilityRow {
                l,
                tc_w2v_nmf: mean(|r| r.tc_w2v_nmf),
                tc_w2v_cnmf: mean(|r| r.tc_w2v_cnmf),
                change_nmf: mean(|r| r.change_nmf),
                change_cnmf: mean(|r| r.change_cnmf),
            }
        })
        .collect();
    Ok(StabilityReport {
        rows,
        per_seed,
        warnings,
    })
}

fn build_families(
    models: &[WindowModel],
    vocab: &Vocabulary,
    k: usize,
    scoring: Scoring<'_>,
    seed: u64,
    config: &PipelineConfig,
) -> Result<FamilyModels> {
    let stacked = stack_window_features(models)?;
    let dynamic = fit_dynamic_model(
        &stacked,
        models,
        vocab,
        KRange::single(k),
        scoring,
        seed,
        config,
    )?;
    let nmf_ranking = rank_topics(
        &dynamic.f_by_window,
        dynamic.h.view(),
        vocab,
        config.report_top_n,
    )?;
    let refined = refine_dynamic_model(&stacked, models, &dynamic, vocab, config)?;
    Ok(FamilyModels {
        nmf_h: dynamic.h,
        nmf_ranking,
        cnmf_h: refined.convex.h_tilde,
        cnmf_ranking: refined.ranking,
    })
}
