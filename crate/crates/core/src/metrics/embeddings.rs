use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Word vectors keyed by term.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: HashMap::new(),
        }
    }

    /// Inserts or replaces a vector. Panics on a dimension mismatch.
    pub fn insert(&mut self, term: impl Into<String>, vector: Vec<f64>) -> Option<Vec<f64>> {
        assert_eq!(vector.len(), self.dim, "embedding dimension mismatch");
        self.vectors.insert(term.into(), vector)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<&[f64]> {
        self.vectors.get(term).map(Vec::as_slice)
    }
}

/// Parses the word-vector text format: a `<count> <dim>` header, then one
/// term followed by `dim` decimal values per line. Duplicate terms keep the
/// last occurrence and produce a warning.
pub fn parse_embeddings(text: &str) -> Result<(EmbeddingTable, Vec<String>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        message: "empty embedding file".into(),
    })?;
    let mut fields = header.split_whitespace();
    let parse_usize = |s: Option<&str>| s.and_then(|s| s.parse::<usize>().ok());
    let (count, dim) = match (
        parse_usize(fields.next()),
        parse_usize(fields.next()),
        fields.next(),
    ) {
        (Some(c), Some(d), None) if d > 0 => (c, d),
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: "header must be `<count> <dim>` with dim > 0".into(),
            })
        }
    };

    let mut table = EmbeddingTable::new(dim);
    let mut warnings = Vec::new();
    let mut rows = 0;
    for (i, line) in lines {
        let line_no = i + 1;
        let mut parts = line.split_whitespace();
        let term = parts.next().expect("non-blank line has a token");
        let values = parts
            .map(str::parse::<f64>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad value for `{term}`: {e}"),
            })?;
        if values.len() != dim {
            return Err(Error::Parse {
                line: line_no,
                message: format!("`{term}` has {} values, expected {dim}", values.len()),
            });
        }
        if table.insert(term, values).is_some() {
            warnings.push(format!(
                "line {line_no}: duplicate term `{term}`, keeping the last vector"
            ));
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "embedding file has no vectors".into(),
        });
    }
    if rows != count {
        warnings.push(format!(
            "header announces {count} vectors, file holds {rows}"
        ));
    }
    Ok((table, warnings))
}

pub fn load_embeddings(path: &Path) -> Result<(EmbeddingTable, Vec<String>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&text)
}
