use std::collections::HashMap;

use crate::corpus::{DocTermMatrix, Vocabulary};

/// Per-document term sets indexed for document-frequency queries.
#[derive(Debug, Clone, Default)]
pub struct DocumentSets {
    n_docs: usize,
    /// term -> ascending document indices
    postings: HashMap<String, Vec<usize>>,
}

impl DocumentSets {
    pub fn from_documents<I, D, S>(docs: I) -> Self
    where
        I: IntoIterator<Item = D>,
        D: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut out = Self::default();
        for doc in docs {
            out.push(doc);
        }
        out
    }

    /// Term sets read off the nonzero pattern of the given windows.
    pub fn from_matrices<'a>(
        matrices: impl IntoIterator<Item = &'a DocTermMatrix>,
        vocab: &Vocabulary,
    ) -> Self {
        let mut out = Self::default();
        for m in matrices {
            for support in m.row_supports() {
                out.push(support.into_iter().map(|c| vocab.term(c)));
            }
        }
        out
    }

    fn push<D, S>(&mut self, doc: D)
    where
        D: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let d = self.n_docs;
        self.n_docs += 1;
        for term in doc {
            let list = self.postings.entry(term.as_ref().to_string()).or_default();
            if list.last() != Some(&d) {
                list.push(d);
            }
        }
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    /// Number of documents containing `term`.
    pub fn df(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    /// Number of documents containing both terms.
    pub fn co_df(&self, a: &str, b: &str) -> usize {
        let (Some(pa), Some(pb)) = (self.postings.get(a), self.postings.get(b)) else {
            return 0;
        };
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < pa.len() && j < pb.len() {
            match pa[i].cmp(&pb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let sets =
            DocumentSets::from_documents([vec!["a", "b"], vec!["a", "a", "c"], vec!["b", "c"]]);
        assert_eq!(sets.n_docs(), 3);
        assert_eq!(sets.df("a"), 2);
        assert_eq!(sets.df("zz"), 0);
        assert_eq!(sets.co_df("a", "b"), 1);
        assert_eq!(sets.co_df("b", "c"), 1);
        assert_eq!(sets.co_df("a", "a"), 2);
    }
}
