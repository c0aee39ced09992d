use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::corpus::{Vocabulary, WindowLabel};
use crate::error::Result;
use crate::factor::{cnmf_fit, convex_objective, nnls_fixed_basis, ConvexFactors};
use crate::pipeline::dynamic::blocks_and_projections;
use crate::pipeline::{
    rank_topics, DynamicModel, PipelineConfig, Ranking, StackedFeatureMatrix, WindowModel,
};

/// Convex refinement of a dynamic model with its re-ranked topics.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedModel {
    pub convex: ConvexFactors,
    /// Convex objective at `(g_init, h_init)`.
    pub init_loss: f64,
    /// Projected-gradient norms of the column-wise NNLS initialization.
    pub init_kkt_residuals: Vec<f64>,
    /// Rows of `W~` per window, in stacking order.
    pub w_tilde_blocks: Vec<(WindowLabel, Array2<f64>)>,
    /// `X_t W~_t` per window, in stacking order.
    pub f_by_window: Vec<(WindowLabel, Array2<f64>)>,
    pub ranking: Ranking,
}

/// Starting point of the refinement: column `k` of `g_init` is the
/// non-negative combination of columns of `v` closest to column `k` of the
/// dynamic basis `W`, and `h_init` is the dynamic feature matrix.
pub fn init_refinement(
    v: ArrayView2<'_, f64>,
    dynamic: &DynamicModel,
) -> (Array2<f64>, Array2<f64>, Vec<f64>) {
    let k = dynamic.w.ncols();
    let solutions: Vec<_> = (0..k)
        .into_par_iter()
        .map(|c| nnls_fixed_basis(v, dynamic.w.column(c)))
        .collect();
    let mut g = Array2::zeros((v.ncols(), k));
    for (c, sol) in solutions.iter().enumerate() {
        g.column_mut(c).assign(&sol.coefficients);
    }
    let residuals = solutions.iter().map(|s| s.kkt_residual).collect();
    (g, dynamic.h.clone(), residuals)
}

/// Runs convex NMF from [`init_refinement`] and re-derives per-window topic
/// weights and popularity ranks from the refined basis `W~ = V G`.
pub fn refine_dynamic_model(
    stacked: &StackedFeatureMatrix,
    windows: &[WindowModel],
    dynamic: &DynamicModel,
    vocab: &Vocabulary,
    config: &PipelineConfig,
) -> Result<RefinedModel> {
    let v = stacked.v.view();
    let (g_init, h_init, init_kkt_residuals) = init_refinement(v, dynamic);
    let init_loss = convex_objective(v, g_init.view(), h_init.view());
    let convex = cnmf_fit(
        v,
        g_init.view(),
        h_init.view(),
        &config.refine.with_k(dynamic.k),
    )?;
    let (w_tilde_blocks, f_by_window) =
        blocks_and_projections(stacked, windows, convex.w_tilde.view())?;
    let ranking = rank_topics(
        &f_by_window,
        convex.h_tilde.view(),
        vocab,
        config.report_top_n,
    )?;
    Ok(RefinedModel {
        convex,
        init_loss,
        init_kkt_residuals,
        w_tilde_blocks,
        f_by_window,
        ranking,
    })
}
