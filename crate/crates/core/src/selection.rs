//! Threshold-based budgeted subset extraction.
//!
//! Given per-line scores and target-side word counts, selection finds the
//! maximal threshold t such that the pairs scoring >= t (and > 0) together
//! reach the word budget, then keeps all of them: ties at the threshold
//! are included even when that overshoots. Zero-score pairs are never
//! selected; if the nonzero pairs cannot cover the budget, everything
//! nonzero is selected and the result is flagged exhausted.
//!
//! Two code paths implement the same contract: an in-memory exact path
//! used by tests and library callers, and a two-pass histogram path over
//! score files for corpora larger than memory.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::corpus;
use crate::error::{Error, Result};

/// Chosen threshold, selected pair ids and achieved word count.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Smallest selected score; `None` when nothing could be selected.
    pub threshold: Option<f64>,
    /// Ascending line indices of the selected pairs.
    pub selected_ids: Vec<usize>,
    pub achieved_words: u64,
    pub budget: u64,
    /// Set when the nonzero-score pairs run out before the budget is met.
    pub exhausted: bool,
}

/// Exact in-memory selection over parallel score/count columns.
pub fn select_by_budget(scores: &[f64], counts: &[u64], budget: u64) -> Result<SelectionResult> {
    if budget == 0 {
        return Err(Error::usage("budget must be >= 1"));
    }
    if scores.len() != counts.len() {
        return Err(Error::data(format!(
            "scores and counts are not line-aligned: {} vs {}",
            scores.len(),
            counts.len()
        )));
    }
    if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::data(format!("non-finite score {bad}")));
    }

    // words per distinct positive score value
    let mut words_by_score: BTreeMap<u64, u64> = BTreeMap::new();
    for (&score, &count) in scores.iter().zip(counts) {
        if score > 0.0 {
            *words_by_score.entry(score.to_bits()).or_insert(0) += count;
        }
    }

    let mut threshold: Option<f64> = None;
    let mut cum = 0u64;
    for (&bits, &words) in words_by_score.iter().rev() {
        cum += words;
        if cum >= budget {
            threshold = Some(f64::from_bits(bits));
            break;
        }
    }
    let exhausted = threshold.is_none();
    if exhausted {
        // select everything nonzero; the threshold is the lowest positive score
        threshold = words_by_score.keys().next().map(|&bits| f64::from_bits(bits));
    }

    let mut selected_ids = Vec::new();
    let mut achieved_words = 0u64;
    if let Some(t) = threshold {
        for (id, (&score, &count)) in scores.iter().zip(counts).enumerate() {
            if score > 0.0 && score >= t {
                selected_ids.push(id);
                achieved_words += count;
            }
        }
    }
    Ok(SelectionResult { threshold, selected_ids, achieved_words, budget, exhausted })
}

/// Writes the selected pairs, in original corpus order, to two line-aligned
/// output files.
pub fn emit_subset(
    result: &SelectionResult,
    src_path: impl AsRef<Path>,
    trg_path: impl AsRef<Path>,
    out_src: impl AsRef<Path>,
    out_trg: impl AsRef<Path>,
) -> Result<()> {
    let out_src = out_src.as_ref();
    let out_trg = out_trg.as_ref();
    let mut src_out =
        BufWriter::new(File::create(out_src).map_err(|e| Error::io(out_src, e))?);
    let mut trg_out =
        BufWriter::new(File::create(out_trg).map_err(|e| Error::io(out_trg, e))?);

    let mut wanted = result.selected_ids.iter().copied().peekable();
    let mut count = 0usize;
    for pair in corpus::read_bitext(src_path, trg_path)? {
        let pair = pair?;
        if wanted.peek() == Some(&pair.id) {
            wanted.next();
            writeln!(src_out, "{}", pair.src_raw).map_err(|e| Error::io(out_src, e))?;
            writeln!(trg_out, "{}", pair.trg_raw).map_err(|e| Error::io(out_trg, e))?;
            count += 1;
        }
    }
    if let Some(missing) = wanted.next() {
        return Err(Error::data(format!(
            "selected id {missing} is out of range: corpus ended after {count} emitted pairs"
        )));
    }
    src_out.flush().map_err(|e| Error::io(out_src, e))?;
    trg_out.flush().map_err(|e| Error::io(out_trg, e))?;
    Ok(())
}

/// Outcome of the streaming path, which never materializes the id set.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamingSummary {
    pub threshold: Option<f64>,
    pub selected_pairs: u64,
    pub achieved_words: u64,
    pub total_pairs: u64,
    pub budget: u64,
    pub exhausted: bool,
}

const HISTOGRAM_BUCKETS: usize = 1 << 16;

/// Bucket index for a positive score. Scores in (0, 1] spread over the
/// histogram; anything above 1 shares the top bucket and is resolved
/// exactly in the refinement pass.
fn bucket_of(score: f64) -> usize {
    ((score * HISTOGRAM_BUCKETS as f64) as usize).min(HISTOGRAM_BUCKETS - 1)
}

struct ScoreCountStream {
    scores: BufReader<File>,
    trg: BufReader<File>,
    scores_path: std::path::PathBuf,
    trg_path: std::path::PathBuf,
    line: usize,
}

impl ScoreCountStream {
    fn open(scores_path: &Path, trg_path: &Path) -> Result<Self> {
        Ok(ScoreCountStream {
            scores: BufReader::new(
                File::open(scores_path).map_err(|e| Error::io(scores_path, e))?,
            ),
            trg: BufReader::new(File::open(trg_path).map_err(|e| Error::io(trg_path, e))?),
            scores_path: scores_path.to_path_buf(),
            trg_path: trg_path.to_path_buf(),
            line: 0,
        })
    }

    /// Next (score, target word count), or None at a clean simultaneous EOF.
    fn next(&mut self) -> Result<Option<(f64, u64)>> {
        let mut score_line = String::new();
        let n_score = self
            .scores
            .read_line(&mut score_line)
            .map_err(|e| Error::io(&self.scores_path, e))?;
        let mut trg_line = String::new();
        let n_trg =
            self.trg.read_line(&mut trg_line).map_err(|e| Error::io(&self.trg_path, e))?;
        self.line += 1;
        match (n_score, n_trg) {
            (0, 0) => Ok(None),
            (0, _) | (_, 0) => Err(Error::data(format!(
                "line count mismatch between {} and {} at line {}",
                self.scores_path.display(),
                self.trg_path.display(),
                self.line
            ))),
            _ => {
                let score: f64 = score_line.trim().parse().map_err(|_| {
                    Error::data_at(
                        &self.scores_path,
                        self.line,
                        format!("unparseable score {:?}", score_line.trim()),
                    )
                })?;
                if !score.is_finite() {
                    return Err(Error::data_at(&self.scores_path, self.line, "non-finite score"));
                }
                let words = trg_line.split_whitespace().count() as u64;
                Ok(Some((score, words)))
            }
        }
    }
}

/// Two-pass streaming selection: a histogram pass finds the bucket where
/// the cumulative word count crosses the budget, a refinement pass resolves
/// the exact threshold among the distinct scores of that bucket, and the
/// emit pass writes the subset.
pub fn select_and_emit(
    scores_path: impl AsRef<Path>,
    src_path: impl AsRef<Path>,
    trg_path: impl AsRef<Path>,
    out_src: impl AsRef<Path>,
    out_trg: impl AsRef<Path>,
    budget: u64,
) -> Result<StreamingSummary> {
    let scores_path = scores_path.as_ref();
    let src_path = src_path.as_ref();
    let trg_path = trg_path.as_ref();
    if budget == 0 {
        return Err(Error::usage("budget must be >= 1"));
    }

    // pass 1: histogram of words per score bucket
    let mut buckets = vec![0u64; HISTOGRAM_BUCKETS];
    let mut min_positive: Option<f64> = None;
    let mut total_pairs = 0u64;
    {
        let mut stream = ScoreCountStream::open(scores_path, trg_path)?;
        while let Some((score, words)) = stream.next()? {
            total_pairs += 1;
            if score > 0.0 {
                buckets[bucket_of(score)] += words;
                min_positive = Some(match min_positive {
                    Some(m) if m <= score => m,
                    _ => score,
                });
            }
        }
    }

    let mut crossing_bucket = None;
    let mut words_above = 0u64;
    for b in (0..HISTOGRAM_BUCKETS).rev() {
        if words_above + buckets[b] >= budget {
            crossing_bucket = Some(b);
            break;
        }
        words_above += buckets[b];
    }

    let (threshold, exhausted) = match crossing_bucket {
        None => (min_positive, true),
        Some(bucket) => {
            // refinement pass: exact words per distinct score inside the bucket
            let mut within: BTreeMap<u64, u64> = BTreeMap::new();
            let mut stream = ScoreCountStream::open(scores_path, trg_path)?;
            while let Some((score, words)) = stream.next()? {
                if score > 0.0 && bucket_of(score) == bucket {
                    *within.entry(score.to_bits()).or_insert(0) += words;
                }
            }
            let mut cum = words_above;
            let mut threshold = None;
            for (&bits, &words) in within.iter().rev() {
                cum += words;
                if cum >= budget {
                    threshold = Some(f64::from_bits(bits));
                    break;
                }
            }
            debug_assert!(threshold.is_some(), "crossing bucket must contain the threshold");
            (threshold, false)
        }
    };

    // emit pass
    let out_src = out_src.as_ref();
    let out_trg = out_trg.as_ref();
    let mut src_out =
        BufWriter::new(File::create(out_src).map_err(|e| Error::io(out_src, e))?);
    let mut trg_out =
        BufWriter::new(File::create(out_trg).map_err(|e| Error::io(out_trg, e))?);
    let mut selected_pairs = 0u64;
    let mut achieved_words = 0u64;
    if let Some(t) = threshold {
        let mut stream = ScoreCountStream::open(scores_path, trg_path)?;
        let mut src = BufReader::new(File::open(src_path).map_err(|e| Error::io(src_path, e))?);
        let mut trg = BufReader::new(File::open(trg_path).map_err(|e| Error::io(trg_path, e))?);
        let mut src_line = String::new();
        let mut trg_line = String::new();
        let mut line = 0usize;
        while let Some((score, words)) = stream.next()? {
            line += 1;
            src_line.clear();
            if src.read_line(&mut src_line).map_err(|e| Error::io(src_path, e))? == 0 {
                return Err(Error::data(format!(
                    "{} is shorter than {} ({} lines)",
                    src_path.display(),
                    scores_path.display(),
                    line
                )));
            }
            trg_line.clear();
            trg.read_line(&mut trg_line).map_err(|e| Error::io(trg_path, e))?;
            if score > 0.0 && score >= t {
                src_out
                    .write_all(normalized_line(&src_line).as_bytes())
                    .map_err(|e| Error::io(out_src, e))?;
                trg_out
                    .write_all(normalized_line(&trg_line).as_bytes())
                    .map_err(|e| Error::io(out_trg, e))?;
                selected_pairs += 1;
                achieved_words += words;
            }
        }
        let mut rest = String::new();
        if src.read_line(&mut rest).map_err(|e| Error::io(src_path, e))? != 0 {
            return Err(Error::data(format!(
                "{} is longer than {}",
                src_path.display(),
                scores_path.display()
            )));
        }
    }
    src_out.flush().map_err(|e| Error::io(out_src, e))?;
    trg_out.flush().map_err(|e| Error::io(out_trg, e))?;

    Ok(StreamingSummary {
        threshold,
        selected_pairs,
        achieved_words,
        total_pairs,
        budget,
        exhausted,
    })
}

/// Line with exactly one trailing newline, whatever the input ending.
fn normalized_line(line: &str) -> String {
    let mut s = line.trim_end_matches(['\n', '\r']).to_string();
    s.push('\n');
    s
}
