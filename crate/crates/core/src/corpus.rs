//! Corpus I/O, tokenization and the shared data types every scorer consumes.
//!
//! A corpus is a pair of line-aligned UTF-8 text files (one sentence per
//! line). Score files carry one decimal value per line, aligned with the
//! corpus; values are written with Rust's shortest round-trip float
//! formatting so re-parsing reproduces them exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// One line-aligned sentence pair. `id` equals the zero-based line number
/// in both corpus halves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    pub id: usize,
    pub src_raw: String,
    pub trg_raw: String,
}

/// A whitespace-tokenized sentence. Tokens are non-empty and contain no
/// whitespace; joining with single spaces and re-tokenizing is idempotent.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSeq {
    tokens: Vec<String>,
}

impl TokenSeq {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.tokens.iter()
    }

    /// Space-joined surface form.
    pub fn detokenize(&self) -> String {
        self.tokens.join(" ")
    }
}

impl From<Vec<String>> for TokenSeq {
    fn from(tokens: Vec<String>) -> Self {
        debug_assert!(tokens.iter().all(|t| !t.is_empty() && !t.contains(char::is_whitespace)));
        TokenSeq { tokens }
    }
}

impl<'a> IntoIterator for &'a TokenSeq {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.tokens.iter()
    }
}

/// Splits on Unicode whitespace, collapsing runs. No other normalization.
pub fn tokenize(text: &str) -> TokenSeq {
    TokenSeq { tokens: text.split_whitespace().map(str::to_owned).collect() }
}

/// Target-side token count; this is what word budgets are measured in.
pub fn trg_word_count(pair: &SentencePair) -> usize {
    tokenize(&pair.trg_raw).len()
}

/// One computed partial score cell. Scorers downstream of a zero gate are
/// skipped and emitted as placeholders, never folded into the total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Partial {
    Value(f64),
    Skipped,
}

impl Partial {
    pub fn value(&self) -> Option<f64> {
        match self {
            Partial::Value(v) => Some(*v),
            Partial::Skipped => None,
        }
    }
}

/// Named partial scores and the combined total for one pair.
///
/// `total` is the product of the computed partials after clamping each to
/// [0, 1]; it is 0 whenever any partial is 0, and skipped cells can only
/// occur after such a zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub id: usize,
    pub partials: Vec<Partial>,
    pub total: f64,
}

/// Streaming reader over two line-aligned corpus halves.
///
/// Yields pairs in file order with sequential ids. A line-count mismatch or
/// invalid UTF-8 surfaces as a data error naming the offending file/line.
pub struct BitextReader {
    src_path: PathBuf,
    trg_path: PathBuf,
    src: BufReader<File>,
    trg: BufReader<File>,
    next_id: usize,
    done: bool,
}

impl BitextReader {
    pub fn open(src_path: impl AsRef<Path>, trg_path: impl AsRef<Path>) -> Result<Self> {
        let src_path = src_path.as_ref().to_path_buf();
        let trg_path = trg_path.as_ref().to_path_buf();
        let src = File::open(&src_path).map_err(|e| Error::io(&src_path, e))?;
        let trg = File::open(&trg_path).map_err(|e| Error::io(&trg_path, e))?;
        Ok(BitextReader {
            src_path,
            trg_path,
            src: BufReader::new(src),
            trg: BufReader::new(trg),
            next_id: 0,
            done: false,
        })
    }

    fn read_line(
        reader: &mut BufReader<File>,
        path: &Path,
        line_no: usize,
    ) -> Result<Option<String>> {
        let mut buf = Vec::new();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| Error::io(path, e))?;
        if n == 0 {
            return Ok(None);
        }
        if buf.last() == Some(&b'\n') {
            buf.pop();
            if buf.last() == Some(&b'\r') {
                buf.pop();
            }
        }
        String::from_utf8(buf)
            .map(Some)
            .map_err(|_| Error::data_at(path, line_no + 1, "invalid UTF-8"))
    }
}

impl Iterator for BitextReader {
    type Item = Result<SentencePair>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let id = self.next_id;
        let src_line = match Self::read_line(&mut self.src, &self.src_path, id) {
            Ok(l) => l,
            Err(e) => {
                self.done = true;
                return Some(Err(e));
            }
        };
        let trg_line = match Self::read_line(&mut self.trg, &self.trg_path, id) {
            Ok(l) => l,
            Err(e) => {
                self.done = true;
                return Some(Err(e));
            }
        };
        match (src_line, trg_line) {
            (Some(src_raw), Some(trg_raw)) => {
                self.next_id += 1;
                Some(Ok(SentencePair { id, src_raw, trg_raw }))
            }
            (None, None) => {
                self.done = true;
                None
            }
            (more_src, _) => {
                self.done = true;
                // Drain the longer file so the error names both totals.
                let src_longer = more_src.is_some();
                let longer = if src_longer { &mut self.src } else { &mut self.trg };
                let mut extra = 1usize;
                let mut sink = Vec::new();
                loop {
                    sink.clear();
                    match longer.read_until(b'\n', &mut sink) {
                        Ok(0) => break,
                        Ok(_) => extra += 1,
                        Err(_) => break,
                    }
                }
                let (n_src, n_trg) = if src_longer { (id + extra, id) } else { (id, id + extra) };
                Some(Err(Error::data(format!(
                    "line count mismatch {} vs {} ({} vs {})",
                    n_src,
                    n_trg,
                    self.src_path.display(),
                    self.trg_path.display()
                ))))
            }
        }
    }
}

/// Opens both halves and streams pairs; see [`BitextReader`].
pub fn read_bitext(
    src_path: impl AsRef<Path>,
    trg_path: impl AsRef<Path>,
) -> Result<BitextReader> {
    BitextReader::open(src_path, trg_path)
}

/// Collects the whole corpus into memory.
pub fn read_bitext_to_vec(
    src_path: impl AsRef<Path>,
    trg_path: impl AsRef<Path>,
) -> Result<Vec<SentencePair>> {
    read_bitext(src_path, trg_path)?.collect()
}

/// Formats a score so that re-parsing reproduces the exact value.
pub fn format_score(value: f64) -> String {
    // Rust's float Display prints the shortest decimal that round-trips.
    format!("{value}")
}

/// Writes one score per line.
pub fn write_score_file(path: impl AsRef<Path>, scores: &[f64]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for s in scores {
        writeln!(out, "{s}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads a line-aligned column of decimal values.
pub fn read_score_file(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut scores = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let v: f64 = line
            .trim()
            .parse()
            .map_err(|_| Error::data_at(path, i + 1, format!("unparseable score {line:?}")))?;
        scores.push(v);
    }
    Ok(scores)
}

/// Reads a plain text file into one string per line.
pub fn read_lines(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).split(b'\n').enumerate() {
        let mut raw = line.map_err(|e| Error::io(path, e))?;
        if raw.last() == Some(&b'\r') {
            raw.pop();
        }
        let s = String::from_utf8(raw)
            .map_err(|_| Error::data_at(path, i + 1, "invalid UTF-8"))?;
        out.push(s);
    }
    Ok(out)
}
