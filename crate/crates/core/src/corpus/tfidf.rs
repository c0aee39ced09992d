use std::collections::BTreeMap;

use ndarray::Array2;

use crate::corpus::{Vocabulary, WindowLabel};

/// Sparse (CSR) TF-IDF matrix for one window, documents x vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct DocTermMatrix {
    pub window_label: WindowLabel,
    /// Document ids, one per row.
    pub rows: Vec<String>,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl DocTermMatrix {
    /// Assembles a matrix from per-row `(column, value)` lists. Columns in a
    /// row must be strictly increasing.
    pub fn from_rows(
        window_label: WindowLabel,
        rows: Vec<String>,
        n_cols: usize,
        entries: Vec<Vec<(usize, f64)>>,
    ) -> Self {
        assert_eq!(rows.len(), entries.len(), "one entry list per row");
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in entries {
            for (c, v) in row {
                assert!(c < n_cols, "column {c} out of range");
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self {
            window_label,
            rows,
            n_cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut dense = Array2::zeros((self.n_rows(), self.n_cols));
        for r in 0..self.n_rows() {
            for (c, v) in self.row(r) {
                dense[[r, c]] = v;
            }
        }
        dense
    }

    /// Column indices present in each row.
    pub fn row_supports(&self) -> Vec<Vec<usize>> {
        (0..self.n_rows())
            .map(|r| self.row(r).map(|(c, _)| c).collect())
            .collect()
    }
}

/// TF-IDF weighting of one window's documents against the global vocabulary.
///
/// `tf` is the raw in-document count, `idf = ln((1 + n) / (1 + df)) + 1` over
/// this window's `n` documents, and every non-empty row is scaled to unit
/// L2 norm. Out-of-vocabulary tokens are ignored.
pub fn vectorize(
    window_label: WindowLabel,
    doc_ids: Vec<String>,
    docs: &[Vec<String>],
    vocab: &Vocabulary,
) -> DocTermMatrix {
    let counts: Vec<BTreeMap<usize, f64>> = docs
        .iter()
        .map(|tokens| {
            let mut tf = BTreeMap::new();
            for col in tokens.iter().filter_map(|t| vocab.get(t)) {
                *tf.entry(col).or_insert(0.0) += 1.0;
            }
            tf
        })
        .collect();

    let mut df = vec![0usize; vocab.len()];
    for row in &counts {
        for &c in row.keys() {
            df[c] += 1;
        }
    }
    let n = docs.len() as f64;
    let idf: Vec<f64> = df
        .iter()
        .map(|&d| ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0)
        .collect();

    let entries = counts
        .into_iter()
        .map(|tf| {
            let mut row: Vec<(usize, f64)> = tf.into_iter().map(|(c, t)| (c, t * idf[c])).collect();
            let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (_, v) in &mut row {
                    *v /= norm;
                }
            }
            row
        })
        .collect();

    DocTermMatrix::from_rows(window_label, doc_ids, vocab.len(), entries)
}
