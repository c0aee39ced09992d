//! Full two-stage run on a synthetic corpus: window models, the dynamic model,
//! convex refinement and popularity rankings.

use dyntopic::corpus::{build_windowed_corpus, TokenizerConfig};
use dyntopic::metrics::align_topics;
use dyntopic::pipeline::{
    fit_dynamic_model, fit_window_models, rank_topics, refine_dynamic_model, stack_window_features,
    KRange, PipelineConfig, Scoring,
};
use dyntopic::synthetic::{generate, SyntheticConfig};

fn main() -> dyntopic::Result<()> {
    let synthetic = generate(&SyntheticConfig {
        docs_per_window: 60,
        ..SyntheticConfig::default()
    })?;
    let corpus = build_windowed_corpus(&synthetic.documents, &TokenizerConfig::default())?;
    let vocab = &corpus.vocabulary;
    let table = &synthetic.embeddings;
    let config = PipelineConfig::default();

    let fits = fit_window_models(
        &corpus.matrices,
        vocab,
        KRange::new(4, 8)?,
        Some(table),
        0,
        &config,
    )?;
    for m in &fits.models {
        println!("window {}: K = {}", m.window_label, m.k);
    }
    let stacked = stack_window_features(&fits.models)?;
    let dynamic = fit_dynamic_model(
        &stacked,
        &fits.models,
        vocab,
        KRange::new(4, 10)?,
        Scoring::TcW2v(table),
        0,
        &config,
    )?;
    println!(
        "dynamic model: V is {:?}, K = {}",
        stacked.v.dim(),
        dynamic.k
    );

    let baseline = rank_topics(&dynamic.f_by_window, dynamic.h.view(), vocab, 6)?;
    let refined = refine_dynamic_model(&stacked, &fits.models, &dynamic, vocab, &config)?;
    let alignment = align_topics(dynamic.h.view(), refined.convex.h_tilde.view())?;
    println!("rank  share   refined  top terms");
    for t in &baseline.topics {
        let r = refined
            .ranking
            .topic(alignment[t.topic_index])
            .expect("ranked");
        let terms: Vec<&str> = r
            .top_terms
            .iter()
            .take(5)
            .map(|(w, _)| w.as_str())
            .collect();
        println!(
            "{:>4}  {:.3}  {:>7}  {}",
            t.rank,
            t.share,
            r.rank,
            terms.join(" ")
        );
    }
    Ok(())
}
