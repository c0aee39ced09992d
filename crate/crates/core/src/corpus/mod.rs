//! Corpus ingestion: time-stamped documents, tokenization, a global vocabulary
//! and per-window TF-IDF document-term matrices.
//!
//! Every window shares the same column space (the global [`Vocabulary`]), so
//! window feature matrices can be stacked row-wise later on. IDF statistics are
//! computed per window.

mod cooccurrence;
mod tfidf;
mod tokenize;
mod vocab;

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cooccurrence::DocumentSets;
pub use tfidf::{vectorize, DocTermMatrix};
pub use tokenize::{load_stopwords, tokenize, TokenizerConfig, DEFAULT_STOPWORDS};
pub use vocab::{build_vocabulary, Vocabulary};

/// Calendar year used as the window label.
pub type WindowLabel = i32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub year: i32,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    JsonLines,
    Csv,
}

impl CorpusFormat {
    /// `.csv` selects CSV, anything else is read as JSON lines.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::JsonLines,
        }
    }
}

/// Reads every record of a corpus file, in file order.
///
/// Errors name the offending line number, the missing field, or the
/// duplicated id.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<Document>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let docs = match format {
        CorpusFormat::JsonLines => read_jsonl(BufReader::new(file), path)?,
        CorpusFormat::Csv => read_csv(file)?,
    };
    let mut seen = HashSet::with_capacity(docs.len());
    for (doc, _) in &docs {
        if !seen.insert(doc.id.as_str()) {
            return Err(Error::DuplicateId(doc.id.clone()));
        }
    }
    Ok(docs.into_iter().map(|(d, _)| d).collect())
}

fn read_jsonl(reader: impl BufRead, path: &Path) -> Result<Vec<(Document, usize)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let obj = value.as_object().ok_or_else(|| Error::Parse {
            line: line_no,
            message: "expected a JSON object".into(),
        })?;
        let field = |name: &'static str| {
            obj.get(name).ok_or(Error::MissingField {
                line: line_no,
                field: name,
            })
        };
        let id = field("id")?
            .as_str()
            .ok_or_else(|| type_error(line_no, "id", "string"))?
            .to_string();
        let year = field("year")?
            .as_i64()
            .and_then(|y| i32::try_from(y).ok())
            .ok_or_else(|| type_error(line_no, "year", "integer"))?;
        let text = field("text")?
            .as_str()
            .ok_or_else(|| type_error(line_no, "text", "string"))?
            .to_string();
        out.push((validate(id, year, text, line_no)?, line_no));
    }
    Ok(out)
}

fn read_csv(file: File) -> Result<Vec<(Document, usize)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let headers = reader.headers().map_err(|e| csv_error(&e, 1))?.clone();
    let column = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or(Error::MissingField {
                line: 1,
                field: name,
            })
    };
    let (id_col, year_col, text_col) = (column("id")?, column("year")?, column("text")?);

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&e, 0))?;
        let line_no = record.position().map_or(0, |p| p.line() as usize);
        let get = |col: usize, name: &'static str| {
            record.get(col).ok_or(Error::MissingField {
                line: line_no,
                field: name,
            })
        };
        let id = get(id_col, "id")?.to_string();
        let year = get(year_col, "year")?
            .trim()
            .parse::<i32>()
            .map_err(|_| type_error(line_no, "year", "integer"))?;
        let text = get(text_col, "text")?.to_string();
        out.push((validate(id, year, text, line_no)?, line_no));
    }
    Ok(out)
}

fn validate(id: String, year: i32, text: String, line: usize) -> Result<Document> {
    if id.is_empty() {
        return Err(Error::Parse {
            line,
            message: "field `id` is empty".into(),
        });
    }
    if text.trim().is_empty() {
        return Err(Error::Parse {
            line,
            message: "field `text` is empty".into(),
        });
    }
    Ok(Document { id, year, text })
}

fn type_error(line: usize, field: &str, expected: &str) -> Error {
    Error::Parse {
        line,
        message: format!("field `{field}` must be a {expected}"),
    }
}

fn csv_error(e: &csv::Error, fallback_line: usize) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line() as usize);
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Documents published in one window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSlice {
    pub label: WindowLabel,
    pub documents: Vec<Document>,
}

/// Groups documents by year, ascending. Years without documents produce no slice.
pub fn slice_corpus(docs: &[Document]) -> Vec<WindowSlice> {
    let mut by_year: BTreeMap<i32, Vec<Document>> = BTreeMap::new();
    for doc in docs {
        by_year.entry(doc.year).or_default().push(doc.clone());
    }
    by_year
        .into_iter()
        .map(|(label, documents)| WindowSlice { label, documents })
        .collect()
}

/// Global vocabulary plus one TF-IDF matrix per window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedCorpus {
    pub vocabulary: Vocabulary,
    /// One matrix per window, ascending by label.
    pub matrices: Vec<DocTermMatrix>,
}

/// Slices, tokenizes and vectorizes a corpus in one pass. Windows are
/// tokenized and vectorized in parallel.
pub fn build_windowed_corpus(
    docs: &[Document],
    config: &TokenizerConfig,
) -> Result<WindowedCorpus> {
    use rayon::prelude::*;

    config.validate()?;
    if docs.is_empty() {
        return Err(Error::Empty("corpus has no documents".into()));
    }
    let slices = slice_corpus(docs);
    let tokens: Vec<Vec<Vec<String>>> = slices
        .par_iter()
        .map(|s| {
            s.documents
                .iter()
                .map(|d| tokenize(&d.text, config))
                .collect()
        })
        .collect();
    let vocabulary = build_vocabulary(&tokens, config)?;
    let matrices = slices
        .par_iter()
        .zip(&tokens)
        .map(|(s, t)| {
            let ids = s.documents.iter().map(|d| d.id.clone()).collect();
            vectorize(s.label, ids, t, &vocabulary)
        })
        .collect();
    Ok(WindowedCorpus {
        vocabulary,
        matrices,
    })
}
