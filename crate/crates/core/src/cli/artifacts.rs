use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::cli::CliError;
use crate::corpus::{DocTermMatrix, Vocabulary, WindowLabel, WindowedCorpus};
use crate::factor::io::{format_f64, read_matrix_bin, write_matrix_bin, write_matrix_csv};
use crate::metrics::CoherenceMetric;
use crate::pipeline::{window_occupancy, Ranking};

pub const INGEST_DIR: &str = "ingest";
pub const FIT_DIR: &str = "fit";
pub const REFINE_DIR: &str = "refine";

pub fn write_text(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::input(format!("cannot create {}: {e}", parent.display())))?;
    }
    fs::write(path, contents)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("artifact types serialize") + "\n";
    write_text(path, &text)
}

fn read_required(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::missing(format!("missing artifact {}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = read_required(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// Matrix in binary and CSV form: `<stem>.bin` and `<stem>.csv`.
pub fn write_matrix_pair(dir: &Path, stem: &str, m: ArrayView2<'_, f64>) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
    write_matrix_bin(&dir.join(format!("{stem}.bin")), m)?;
    write_matrix_csv(&dir.join(format!("{stem}.csv")), m)?;
    Ok(())
}

pub fn read_matrix(dir: &Path, stem: &str) -> Result<Array2<f64>, CliError> {
    let path = dir.join(format!("{stem}.bin"));
    if !path.exists() {
        return Err(CliError::missing(format!(
            "missing artifact {}",
            path.display()
        )));
    }
    Ok(read_matrix_bin(&path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowEntry {
    pub label: WindowLabel,
    pub documents: usize,
    pub nonzeros: usize,
    pub matrix: PathBuf,
    pub doc_ids: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestManifest {
    pub vocabulary_size: usize,
    pub windows: Vec<WindowEntry>,
}

/// `row,col,value` triplets of the nonzero entries.
fn triplets_csv(m: &DocTermMatrix) -> String {
    let mut out = String::from("row,col,value\n");
    for r in 0..m.n_rows() {
        for (c, v) in m.row(r) {
            let _ = writeln!(out, "{r},{c},{}", format_f64(v));
        }
    }
    out
}

fn matrix_from_triplets(
    label: WindowLabel,
    rows: Vec<String>,
    n_cols: usize,
    path: &Path,
) -> Result<DocTermMatrix, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::missing(format!("missing artifact {}: {e}", path.display())))?;
    let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows.len()];
    for (i, record) in reader.deserialize::<(usize, usize, f64)>().enumerate() {
        let (r, c, v) = record
            .map_err(|e| CliError::input(format!("{} line {}: {e}", path.display(), i + 2)))?;
        if r >= rows.len() || c >= n_cols {
            return Err(CliError::input(format!(
                "{} line {}: entry ({r}, {c}) out of range",
                path.display(),
                i + 2
            )));
        }
        entries[r].push((c, v));
    }
    Ok(DocTermMatrix::from_rows(label, rows, n_cols, entries))
}

pub fn write_ingest(dir: &Path, corpus: &WindowedCorpus) -> Result<IngestManifest, CliError> {
    let mut vocab_text = String::new();
    for t in corpus.vocabulary.terms() {
        vocab_text.push_str(t);
        vocab_text.push('\n');
    }
    write_text(&dir.join("vocabulary.txt"), &vocab_text)?;
    let mut windows = Vec::new();
    for m in &corpus.matrices {
        let matrix = PathBuf::from(format!("windows/{}.csv", m.window_label));
        let doc_ids = PathBuf::from(format!("windows/{}.docs.txt", m.window_label));
        write_text(&dir.join(&matrix), &triplets_csv(m))?;
        write_text(&dir.join(&doc_ids), &(m.rows.join("\n") + "\n"))?;
        windows.push(WindowEntry {
            label: m.window_label,
            documents: m.n_rows(),
            nonzeros: m.nnz(),
            matrix,
            doc_ids,
        });
    }
    let manifest = IngestManifest {
        vocabulary_size: corpus.vocabulary.len(),
        windows,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

pub fn read_ingest(dir: &Path) -> Result<WindowedCorpus, CliError> {
    let manifest: IngestManifest = read_json(&dir.join("manifest.json"))?;
    let terms: Vec<String> = read_required(&dir.join("vocabulary.txt"))?
        .lines()
        .map(str::to_string)
        .collect();
    if terms.len() != manifest.vocabulary_size {
        return Err(CliError::input(format!(
            "vocabulary has {} terms, manifest records {}",
            terms.len(),
            manifest.vocabulary_size
        )));
    }
    let vocabulary = Vocabulary::from_terms(terms)?;
    let mut matrices = Vec::new();
    for w in &manifest.windows {
        let ids: Vec<String> = read_required(&dir.join(&w.doc_ids))?
            .lines()
            .map(str::to_string)
            .collect();
        if ids.len() != w.documents {
            return Err(CliError::input(format!(
                "window {} lists {} ids, expected {}",
                w.label,
                ids.len(),
                w.documents
            )));
        }
        matrices.push(matrix_from_triplets(
            w.label,
            ids,
            vocabulary.len(),
            &dir.join(&w.matrix),
        )?);
    }
    Ok(WindowedCorpus {
        vocabulary,
        matrices,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub label: WindowLabel,
    pub k: usize,
    pub final_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub k: usize,
    pub metric: CoherenceMetric,
    pub windows: Vec<WindowSummary>,
    pub dynamic_coherence_by_k: BTreeMap<usize, f64>,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub iterations_run: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub fn read_fit_summary(dir: &Path) -> Result<FitSummary, CliError> {
    read_json(&dir.join("summary.json"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    NmfNmf,
    NmfCnmf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermWeight {
    pub term: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occupancy {
    pub window: WindowLabel,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRecord {
    pub rank: usize,
    pub topic_index: usize,
    pub share: f64,
    pub terms: Vec<TermWeight>,
    pub window_occupancy: Vec<Occupancy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicReport {
    pub model_kind: ModelKind,
    pub k: usize,
    pub topics: Vec<TopicRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl TopicReport {
    pub fn new(
        model_kind: ModelKind,
        ranking: &Ranking,
        f_by_window: &[(WindowLabel, Array2<f64>)],
    ) -> Self {
        let topics = ranking
            .topics
            .iter()
            .map(|t| TopicRecord {
                rank: t.rank,
                topic_index: t.topic_index,
                share: t.share,
                terms: t
                    .top_terms
                    .iter()
                    .map(|(term, weight)| TermWeight {
                        term: term.clone(),
                        weight: *weight,
                    })
                    .collect(),
                window_occupancy: window_occupancy(f_by_window, t.topic_index)
                    .into_iter()
                    .map(|(window, share)| Occupancy { window, share })
                    .collect(),
            })
            .collect();
        Self {
            model_kind,
            k: ranking.topics.len(),
            topics,
            warnings: ranking.warnings.clone(),
        }
    }
}

/// One topic per line, terms separated by spaces, with the words of a bigram
/// joined by `_`.
pub fn topics_txt(topics: &[Vec<String>]) -> String {
    let mut out = String::new();
    for terms in topics {
        let joined: Vec<String> = terms.iter().map(|t| t.replace(' ', "_")).collect();
        out.push_str(&joined.join(" "));
        out.push('\n');
    }
    out
}

pub fn provenance_csv(provenance: &[(WindowLabel, usize)]) -> String {
    let mut out = String::from("row,window,topic\n");
    for (row, (label, topic)) in provenance.iter().enumerate() {
        let _ = writeln!(out, "{row},{label},{topic}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ingest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let vocabulary =
            Vocabulary::from_terms(vec!["a".into(), "b c".into(), "d".into()]).unwrap();
        let m1 = DocTermMatrix::from_rows(
            2020,
            vec!["x".into(), "y".into()],
            3,
            vec![vec![(0, 0.6), (2, 0.8)], vec![]],
        );
        let m2 = DocTermMatrix::from_rows(2021, vec!["z".into()], 3, vec![vec![(1, 1.0)]]);
        let corpus = WindowedCorpus {
            vocabulary,
            matrices: vec![m1, m2],
        };
        write_ingest(dir.path(), &corpus).unwrap();
        assert_eq!(read_ingest(dir.path()).unwrap(), corpus);
    }

    #[test]
    fn missing_ingest_is_code_four() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(read_ingest(dir.path()).unwrap_err().code, 4);
    }

    #[test]
    fn topics_text_joins_bigrams() {
        let topics = vec![vec!["path planning".to_string(), "robot".to_string()]];
        assert_eq!(topics_txt(&topics), "path_planning robot\n");
    }
}
