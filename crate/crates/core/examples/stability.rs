//! Ranking stability of the NMF-NMF and NMF-cNMF families under small
//! elastic-net perturbations of the window models.

use dyntopic::corpus::{build_windowed_corpus, TokenizerConfig};
use dyntopic::metrics::{stability_experiment, StabilityConfig};
use dyntopic::pipeline::{KRange, PipelineConfig};
use dyntopic::synthetic::{generate, SyntheticConfig};

fn main() -> dyntopic::Result<()> {
    let synthetic = generate(&SyntheticConfig {
        docs_per_window: 50,
        ..SyntheticConfig::default()
    })?;
    let corpus = build_windowed_corpus(&synthetic.documents, &TokenizerConfig::default())?;
    let config = StabilityConfig {
        k: 6,
        window_k_range: KRange::new(4, 6)?,
        seeds: vec![0, 1],
        ..StabilityConfig::default()
    };
    let report = stability_experiment(
        &corpus.matrices,
        &corpus.vocabulary,
        Some(&synthetic.embeddings),
        &config,
        &PipelineConfig::default(),
    )?;
    println!("   l  tc_w2v_nmf  tc_w2v_cnmf  change_nmf  change_cnmf");
    for r in &report.rows {
        println!(
            "{:>4}  {:>10.4}  {:>11.4}  {:>10.4}  {:>11.4}",
            r.l, r.tc_w2v_nmf, r.tc_w2v_cnmf, r.change_nmf, r.change_cnmf
        );
    }
    Ok(())
}
