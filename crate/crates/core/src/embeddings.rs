//! Word2vec-style text embedding tables for the similarity scorer: one
//! token per line followed by its vector components, with an optional
//! `count dim` header line.

use std::collections::HashMap;
use std::path::Path;

use crate::corpus::TokenSeq;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(|v| v.as_slice())
    }

    /// Vectors for the tokens the table knows; unknown tokens are skipped.
    pub fn lookup_seq(&self, seq: &TokenSeq) -> Vec<Vec<f64>> {
        seq.iter().filter_map(|t| self.vectors.get(t.as_str()).cloned()).collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let lines = crate::corpus::read_lines(path)?;
        let mut vectors = HashMap::new();
        let mut dim = 0usize;
        let mut rows = lines.iter().enumerate();

        // word2vec text files open with "<count> <dim>"; GloVe-style files
        // start directly with vectors
        let mut pending: Option<(usize, &String)> = None;
        if let Some((i, first)) = rows.next() {
            let fields: Vec<&str> = first.split_whitespace().collect();
            let is_header = fields.len() == 2
                && fields[0].parse::<usize>().is_ok()
                && fields[1].parse::<usize>().is_ok();
            if !is_header {
                pending = Some((i, first));
            }
        }
        let mut handle = |i: usize, line: &String| -> Result<()> {
            if line.trim().is_empty() {
                return Ok(());
            }
            let mut fields = line.split_whitespace();
            let token = fields
                .next()
                .ok_or_else(|| Error::data_at(path, i + 1, "empty embedding row"))?;
            let vec: Vec<f64> = fields
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::data_at(path, i + 1, format!("bad component {f:?}")))
                })
                .collect::<Result<_>>()?;
            if vec.is_empty() {
                return Err(Error::data_at(path, i + 1, "embedding row has no components"));
            }
            if dim == 0 {
                dim = vec.len();
            } else if vec.len() != dim {
                return Err(Error::data_at(
                    path,
                    i + 1,
                    format!("dimension mismatch: {} vs {dim}", vec.len()),
                ));
            }
            vectors.insert(token.to_string(), vec);
            Ok(())
        };
        if let Some((i, line)) = pending {
            handle(i, line)?;
        }
        for (i, line) in rows {
            handle(i, line)?;
        }
        if vectors.is_empty() {
            return Err(Error::data(format!("{}: no embeddings found", path.display())));
        }
        Ok(EmbeddingTable { dim, vectors })
    }
}
