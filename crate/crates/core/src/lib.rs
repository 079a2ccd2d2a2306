//! Scoring and filtering for noisy parallel corpora.
//!
//! The toolkit assigns every sentence pair a product of partial scores in
//! [0, 1] — a hard language-id gate, an adequacy score from dual
//! conditional cross-entropies, a domain score from monolingual
//! cross-entropy difference, and an embedding cosine similarity — then
//! extracts the best subset meeting a target word budget by threshold
//! selection. A synthetic noise benchmark measures how well a scoring
//! configuration ranks clean pairs above corrupted ones.

pub mod bench;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod langid;
pub mod lexical;
pub mod ngram;
pub mod pipeline;
pub mod scores;
pub mod selection;

pub use error::{Error, Result};
