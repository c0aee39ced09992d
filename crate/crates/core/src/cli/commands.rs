use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::cli::artifacts::{
    provenance_csv, read_fit_summary, read_ingest, read_matrix, topics_txt, write_ingest,
    write_json, write_matrix_pair, write_text, FitSummary, ModelKind, TopicReport, WindowSummary,
    FIT_DIR, INGEST_DIR, REFINE_DIR,
};
use crate::cli::{CliError, MetricChoice, RunConfig};
use crate::corpus::{
    build_windowed_corpus, load_corpus, CorpusFormat, DocumentSets, WindowedCorpus,
};
use crate::factor::io::{format_f64, loss_trace_csv};
use crate::factor::FactorPair;
use crate::metrics::{
    align_topics, c_umass, load_embeddings, stability_experiment, tc_w2v, CoherenceReport,
    EmbeddingTable, StabilityConfig,
};
use crate::pipeline::{
    fit_dynamic_model, fit_window_models, rank_topics, refine_dynamic_model, stack_window_features,
    topic_term_lists, Ranking, Scoring, WindowModel,
};
use crate::synthetic::{generate, write_synthetic};

const STABILITY_DIR: &str = "stability";
const EVALUATE_DIR: &str = "evaluate";
const SYNTHETIC_DIR: &str = "synthetic";

/// Empties and recreates a command's output directory so stale files from an
/// earlier run never survive.
fn fresh_dir(path: &Path) -> Result<(), CliError> {
    if path.exists() {
        fs::remove_dir_all(path)
            .map_err(|e| CliError::input(format!("cannot clear {}: {e}", path.display())))?;
    }
    fs::create_dir_all(path)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", path.display())))
}

fn embeddings(config: &RunConfig, flag: Option<&Path>) -> Result<Option<EmbeddingTable>, CliError> {
    match flag.or(config.embeddings_path.as_deref()) {
        Some(path) => Ok(Some(load_embeddings(path)?.0)),
        None => Ok(None),
    }
}

/// Term lists of the topics in rank order.
fn ranked_term_lists(ranking: &Ranking, lists: &[Vec<String>]) -> Vec<Vec<String>> {
    ranking
        .topics
        .iter()
        .map(|t| lists[t.topic_index].clone())
        .collect()
}

pub fn ingest(config: &RunConfig, input: Option<&Path>) -> Result<Vec<String>, CliError> {
    let path = input
        .or(config.input_path.as_deref())
        .ok_or_else(|| CliError::input("no corpus given: pass --input or set input_path"))?;
    let docs = load_corpus(path, CorpusFormat::from_path(path))?;
    let corpus = build_windowed_corpus(&docs, &config.tokenizer_config()?)?;
    let dir = config.output(INGEST_DIR);
    fresh_dir(&dir)?;
    let manifest = write_ingest(&dir, &corpus)?;
    Ok(vec![format!(
        "ingested {} documents in {} windows; {} terms",
        docs.len(),
        manifest.windows.len(),
        manifest.vocabulary_size
    )])
}

fn coherence_rows(out: &mut String, scope: &str, metric: &str, by_k: &BTreeMap<usize, f64>) {
    for (k, score) in by_k {
        let _ = writeln!(out, "{scope},{k},{metric},{}", format_f64(*score));
    }
}

pub fn fit(config: &RunConfig, embeddings_flag: Option<&Path>) -> Result<Vec<String>, CliError> {
    let WindowedCorpus {
        vocabulary,
        matrices,
    } = read_ingest(&config.output(INGEST_DIR))?;
    let table = embeddings(config, embeddings_flag)?;
    let pipeline = config.pipeline_config();
    let fits = fit_window_models(
        &matrices,
        &vocabulary,
        config.k_range()?,
        table.as_ref(),
        config.seed,
        &pipeline,
    )?;
    let stacked = stack_window_features(&fits.models)?;
    let doc_sets;
    let scoring = match &table {
        Some(t) => Scoring::TcW2v(t),
        None => {
            doc_sets = DocumentSets::from_matrices(&matrices, &vocabulary);
            Scoring::CUmass(&doc_sets)
        }
    };
    let dynamic = fit_dynamic_model(
        &stacked,
        &fits.models,
        &vocabulary,
        config.dynamic_k_range()?,
        scoring,
        config.seed,
        &pipeline,
    )?;
    let ranking = rank_topics(
        &dynamic.f_by_window,
        dynamic.h.view(),
        &vocabulary,
        config.report_top_n,
    )?;

    let dir = config.output(FIT_DIR);
    fresh_dir(&dir)?;
    let windows_dir = dir.join("windows");
    let mut coherence = String::from("scope,k,metric,score\n");
    for m in &fits.models {
        write_matrix_pair(&windows_dir, &format!("{}_x", m.window_label), m.x.view())?;
        write_matrix_pair(&windows_dir, &format!("{}_y", m.window_label), m.y.view())?;
        coherence_rows(
            &mut coherence,
            &m.window_label.to_string(),
            m.metric.name(),
            &m.coherence_by_k,
        );
    }
    coherence_rows(
        &mut coherence,
        "dynamic",
        dynamic.metric.name(),
        &dynamic.coherence_by_k,
    );
    write_text(&dir.join("coherence.csv"), &coherence)?;
    write_matrix_pair(&dir, "w", dynamic.w.view())?;
    write_matrix_pair(&dir, "h", dynamic.h.view())?;
    write_text(
        &dir.join("provenance.csv"),
        &provenance_csv(&stacked.row_provenance),
    )?;
    write_text(
        &dir.join("loss_trace.csv"),
        &loss_trace_csv(dynamic.initial_loss, &dynamic.loss_trace),
    )?;
    write_json(
        &dir.join("topics.json"),
        &TopicReport::new(ModelKind::NmfNmf, &ranking, &dynamic.f_by_window),
    )?;
    let lists = topic_term_lists(&dynamic.h, &vocabulary, config.coherence_top_n);
    write_text(
        &dir.join("topics.txt"),
        &topics_txt(&ranked_term_lists(&ranking, &lists)),
    )?;

    let mut warnings = fits.warnings;
    warnings.extend(ranking.warnings.iter().cloned());
    let summary = FitSummary {
        k: dynamic.k,
        metric: dynamic.metric,
        windows: fits
            .models
            .iter()
            .map(|m| WindowSummary {
                label: m.window_label,
                k: m.k,
                final_loss: m.final_loss,
            })
            .collect(),
        dynamic_coherence_by_k: dynamic.coherence_by_k.clone(),
        initial_loss: dynamic.initial_loss,
        final_loss: dynamic.final_loss(),
        iterations_run: dynamic.iterations_run,
        warnings: warnings.clone(),
    };
    write_json(&dir.join("summary.json"), &summary)?;
    warnings.push(format!(
        "fitted {} windows; dynamic K = {} ({} {})",
        fits.models.len(),
        dynamic.k,
        dynamic.metric.name(),
        format_f64(dynamic.coherence_by_k[&dynamic.k])
    ));
    Ok(warnings)
}

#[derive(Debug, Serialize)]
struct RefineSummary {
    k: usize,
    /// Convex objective at the NNLS initialization.
    init_loss: f64,
    final_loss: f64,
    iterations_run: usize,
    loss_not_above_init: bool,
    max_init_kkt_residual: f64,
}

pub fn refine(config: &RunConfig) -> Result<Vec<String>, CliError> {
    let corpus = read_ingest(&config.output(INGEST_DIR))?;
    let fit_dir = config.output(FIT_DIR);
    let summary = read_fit_summary(&fit_dir)?;
    let mut windows = Vec::with_capacity(summary.windows.len());
    for w in &summary.windows {
        let matrix = corpus
            .matrices
            .iter()
            .find(|m| m.window_label == w.label)
            .ok_or_else(|| {
                CliError::input(format!(
                    "window {} of the fit is not in the ingest manifest",
                    w.label
                ))
            })?;
        let windows_dir = fit_dir.join("windows");
        windows.push(WindowModel {
            window_label: w.label,
            doc_ids: matrix.rows.clone(),
            x: read_matrix(&windows_dir, &format!("{}_x", w.label))?,
            y: read_matrix(&windows_dir, &format!("{}_y", w.label))?,
            k: w.k,
            coherence_by_k: BTreeMap::new(),
            metric: summary.metric,
            final_loss: w.final_loss,
        });
    }
    let stacked = stack_window_features(&windows)?;
    let pair = FactorPair {
        w: read_matrix(&fit_dir, "w")?,
        h: read_matrix(&fit_dir, "h")?,
        initial_loss: summary.initial_loss,
        loss_trace: vec![summary.final_loss],
        iterations_run: summary.iterations_run,
    };
    let dynamic = crate::pipeline::DynamicModel::from_factors(
        &stacked,
        &windows,
        pair,
        summary.dynamic_coherence_by_k.clone(),
        summary.metric,
    )?;
    let pipeline = config.pipeline_config();
    let vocab = &corpus.vocabulary;
    let refined = refine_dynamic_model(&stacked, &windows, &dynamic, vocab, &pipeline)?;
    let baseline = rank_topics(
        &dynamic.f_by_window,
        dynamic.h.view(),
        vocab,
        config.report_top_n,
    )?;
    let alignment = align_topics(dynamic.h.view(), refined.convex.h_tilde.view())?;

    let dir = config.output(REFINE_DIR);
    fresh_dir(&dir)?;
    write_matrix_pair(&dir, "g", refined.convex.g.view())?;
    write_matrix_pair(&dir, "w_tilde", refined.convex.w_tilde.view())?;
    write_matrix_pair(&dir, "h_tilde", refined.convex.h_tilde.view())?;
    write_text(
        &dir.join("loss_trace.csv"),
        &loss_trace_csv(refined.convex.initial_loss, &refined.convex.loss_trace),
    )?;
    write_json(
        &dir.join("topics.json"),
        &TopicReport::new(ModelKind::NmfCnmf, &refined.ranking, &refined.f_by_window),
    )?;
    let lists = topic_term_lists(&refined.convex.h_tilde, vocab, config.coherence_top_n);
    write_text(
        &dir.join("topics.txt"),
        &topics_txt(&ranked_term_lists(&refined.ranking, &lists)),
    )?;

    let mut comparison = String::from(
        "baseline_topic,baseline_rank,baseline_share,refined_topic,refined_rank,refined_share\n",
    );
    for t in &baseline.topics {
        let j = alignment[t.topic_index];
        let r = refined
            .ranking
            .topic(j)
            .expect("every refined topic is ranked");
        let _ = writeln!(
            comparison,
            "{},{},{},{},{},{}",
            t.topic_index,
            t.rank,
            format_f64(t.share),
            j,
            r.rank,
            format_f64(r.share)
        );
    }
    write_text(&dir.join("rank_comparison.csv"), &comparison)?;

    let final_loss = refined.convex.final_loss();
    let run = RefineSummary {
        k: dynamic.k,
        init_loss: refined.init_loss,
        final_loss,
        iterations_run: refined.convex.iterations_run,
        loss_not_above_init: final_loss <= refined.init_loss,
        max_init_kkt_residual: refined
            .init_kkt_residuals
            .iter()
            .copied()
            .fold(0.0, f64::max),
    };
    write_json(&dir.join("summary.json"), &run)?;
    let mut notes = refined.ranking.warnings.clone();
    notes.push(format!(
        "refined K = {}: loss {} -> {} in {} iterations",
        dynamic.k,
        format_f64(refined.init_loss),
        format_f64(final_loss),
        refined.convex.iterations_run
    ));
    Ok(notes)
}

fn stability_csv(
    rows: impl Iterator<Item = (Option<u64>, crate::metrics::StabilityRow)>,
) -> String {
    let mut out = String::new();
    for (seed, r) in rows {
        if let Some(s) = seed {
            let _ = write!(out, "{s},");
        }
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.l,
            format_f64(r.tc_w2v_nmf),
            format_f64(r.tc_w2v_cnmf),
            format_f64(r.change_nmf),
            format_f64(r.change_cnmf)
        );
    }
    out
}

pub fn stability(
    config: &RunConfig,
    embeddings_flag: Option<&Path>,
) -> Result<Vec<String>, CliError> {
    let corpus = read_ingest(&config.output(INGEST_DIR))?;
    let k = match config.stability_k {
        Some(k) => k,
        None => match read_fit_summary(&config.output(FIT_DIR)) {
            Ok(summary) => summary.k,
            Err(e) if e.code == 4 => StabilityConfig::default().k,
            Err(e) => return Err(e),
        },
    };
    let table = embeddings(config, embeddings_flag)?;
    let report = stability_experiment(
        &corpus.matrices,
        &corpus.vocabulary,
        table.as_ref(),
        &config.stability_config(k)?,
        &config.pipeline_config(),
    )?;
    let dir = config.output(STABILITY_DIR);
    fresh_dir(&dir)?;
    let header = "l,tc_w2v_nmf,tc_w2v_cnmf,change_nmf,change_cnmf\n";
    write_text(
        &dir.join("stability.csv"),
        &(header.to_string() + &stability_csv(report.rows.iter().map(|r| (None, r.clone())))),
    )?;
    write_text(
        &dir.join("stability_seeds.csv"),
        &(format!("seed,{header}")
            + &stability_csv(
                report
                    .per_seed
                    .iter()
                    .map(|r| (Some(r.seed), r.row.clone())),
            )),
    )?;
    let mut notes = report.warnings;
    notes.push(format!("stability at K = {k}: {} rows", report.rows.len()));
    Ok(notes)
}

/// Reads one topic per line, terms separated by whitespace, `_` standing for
/// the space inside a bigram.
pub fn parse_topics(text: &str, path: &Path) -> Result<Vec<Vec<String>>, CliError> {
    let mut topics = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let terms: Vec<String> = line
            .split_whitespace()
            .map(|t| t.replace('_', " "))
            .collect();
        if terms.len() < 2 {
            return Err(CliError::input(format!(
                "{} line {}: a topic needs at least two terms",
                path.display(),
                i + 1
            )));
        }
        topics.push(terms);
    }
    if topics.is_empty() {
        return Err(CliError::empty(format!(
            "{} contains no topics",
            path.display()
        )));
    }
    Ok(topics)
}

pub fn evaluate(
    config: &RunConfig,
    topics_path: &Path,
    metric: MetricChoice,
    embeddings_flag: Option<&Path>,
) -> Result<Vec<String>, CliError> {
    let table = embeddings(config, embeddings_flag)?;
    if metric == MetricChoice::TcW2v && table.is_none() {
        return Err(CliError::config("tc-w2v requested but no embeddings given"));
    }
    let text = fs::read_to_string(topics_path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", topics_path.display())))?;
    let topics = parse_topics(&text, topics_path)?;
    let mut reports: Vec<CoherenceReport> = Vec::new();
    if metric != MetricChoice::CUmass {
        if let Some(t) = &table {
            reports.push(tc_w2v(&topics, t));
        }
    }
    if metric != MetricChoice::TcW2v {
        let corpus = read_ingest(&config.output(INGEST_DIR))?;
        reports.push(c_umass(
            &topics,
            &DocumentSets::from_matrices(&corpus.matrices, &corpus.vocabulary),
        ));
    }
    let dir = config.output(EVALUATE_DIR);
    fresh_dir(&dir)?;
    let mut csv = String::from("metric,topic,score\n");
    let mut notes = Vec::new();
    for r in &reports {
        write_json(&dir.join(format!("coherence_{}.json", r.metric.name())), r)?;
        for (i, s) in r.per_topic.iter().enumerate() {
            let _ = writeln!(csv, "{},{i},{}", r.metric.name(), format_f64(*s));
        }
        let _ = writeln!(csv, "{},mean,{}", r.metric.name(), format_f64(r.mean));
        notes.extend(r.warnings.iter().cloned());
        notes.push(format!("{} mean {}", r.metric.name(), format_f64(r.mean)));
    }
    write_text(&dir.join("coherence.csv"), &csv)?;
    Ok(notes)
}

pub fn gen_synthetic(config: &RunConfig, emerging: bool) -> Result<Vec<String>, CliError> {
    let mut synthetic = config.synthetic.clone();
    synthetic.emerging |= emerging;
    let corpus = generate(&synthetic)?;
    let dir = config.output(SYNTHETIC_DIR);
    fresh_dir(&dir)?;
    write_synthetic(&corpus, &dir)?;
    Ok(vec![format!(
        "wrote {} documents to {}",
        corpus.documents.len(),
        dir.display()
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topic_lines_parse_with_bigrams() {
        let t = parse_topics("path_planning robot\narm gripper\n", Path::new("t.txt")).unwrap();
        assert_eq!(t[0], ["path planning", "robot"]);
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn malformed_topic_line_names_the_line() {
        let e = parse_topics("a b\nlonely\n", Path::new("t.txt")).unwrap_err();
        assert_eq!(e.code, 2);
        assert!(e.message.contains("line 2"), "{}", e.message);
    }
}
