//! Pipeline orchestration: loads the configured scorers, scores a corpus
//! with an order-preserving parallel map, and emits the per-pair TSV plus
//! the single-column totals file consumed by selection. Also hosts the
//! score-file utilities (merge, stats).
//!
//! Scorers run in config order and a pair is dead as soon as any partial
//! clamps to 0: the remaining scorers are skipped and their TSV cells
//! emitted as `skipped` placeholders. Ordering hard gates (langid, dom
//! with a cut-off, external 0/1 columns) first therefore saves the
//! expensive entropy work; the total is order-independent because the
//! product commutes.

mod config;

pub use config::{EntropySourceSpec, PipelineConfig, ScorerKindSpec, ScorerSpec};

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::corpus::{self, Partial, ScoreRecord, SentencePair, TokenSeq};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::langid::LangIdModel;
use crate::lexical::{self, ExternalEntropyColumn, LexicalModel};
use crate::ngram::NGramModel;
use crate::scores::{self, AdqConfig, DomConfig, SimOutcome};

/// Conditional-entropy backend of one adq direction.
enum CondSource {
    Ibm1(Box<LexicalModel>),
    Column(ExternalEntropyColumn),
}

impl CondSource {
    fn load(spec: &EntropySourceSpec, corpus_len: usize) -> Result<Self> {
        match spec {
            EntropySourceSpec::Model(path) => {
                Ok(CondSource::Ibm1(Box::new(LexicalModel::load(path)?)))
            }
            EntropySourceSpec::Column(path) => {
                Ok(CondSource::Column(lexical::load_entropy_column(path, corpus_len)?))
            }
        }
    }

    /// H(pred | cond) for one pair, however the source is backed.
    fn entropy(&self, id: usize, cond: &TokenSeq, pred: &TokenSeq) -> Result<f64> {
        match self {
            CondSource::Ibm1(model) => model.cond_cross_entropy(cond, pred),
            CondSource::Column(col) => col
                .get(id)
                .ok_or_else(|| Error::data(format!("entropy column has no line {}", id + 1))),
        }
    }
}

/// Monolingual-entropy backend of one dom side.
enum MonoSource {
    Model(Box<NGramModel>),
    Column(ExternalEntropyColumn),
}

impl MonoSource {
    fn load(spec: &EntropySourceSpec, corpus_len: usize) -> Result<Self> {
        match spec {
            EntropySourceSpec::Model(path) => Ok(MonoSource::Model(Box::new(NGramModel::load(path)?))),
            EntropySourceSpec::Column(path) => {
                Ok(MonoSource::Column(lexical::load_entropy_column(path, corpus_len)?))
            }
        }
    }

    fn entropy(&self, id: usize, y: &TokenSeq) -> Result<f64> {
        match self {
            MonoSource::Model(model) => model.cross_entropy(y),
            MonoSource::Column(col) => col
                .get(id)
                .ok_or_else(|| Error::data(format!("entropy column has no line {}", id + 1))),
        }
    }
}

enum Scorer {
    LangId { model: Box<LangIdModel>, src_lang: String, trg_lang: String },
    Adq { fwd: CondSource, bwd: CondSource, cfg: AdqConfig },
    Dom { in_domain: MonoSource, out_domain: MonoSource, cfg: DomConfig },
    Sim { table: Box<EmbeddingTable>, degenerate: AtomicU64 },
    External { column: Vec<f64> },
}

/// A fully loaded scoring pipeline; immutable and shareable across scoring
/// workers.
pub struct Pipeline {
    names: Vec<String>,
    scorers: Vec<Scorer>,
}

impl Pipeline {
    /// Loads every artifact referenced by the config. `corpus_len` is the
    /// corpus line count used to validate line-aligned columns.
    pub fn load(config: &PipelineConfig, corpus_len: usize) -> Result<Self> {
        let mut names = Vec::with_capacity(config.scorers.len());
        let mut scorers = Vec::with_capacity(config.scorers.len());
        for spec in &config.scorers {
            let scorer = match &spec.kind {
                ScorerKindSpec::LangId { model, src_lang, trg_lang } => Scorer::LangId {
                    model: Box::new(LangIdModel::load(model)?),
                    src_lang: src_lang.clone(),
                    trg_lang: trg_lang.clone(),
                },
                ScorerKindSpec::Adq { fwd, bwd, cfg } => Scorer::Adq {
                    fwd: CondSource::load(fwd, corpus_len)?,
                    bwd: CondSource::load(bwd, corpus_len)?,
                    cfg: *cfg,
                },
                ScorerKindSpec::Dom { in_domain, out_domain, cfg } => Scorer::Dom {
                    in_domain: MonoSource::load(in_domain, corpus_len)?,
                    out_domain: MonoSource::load(out_domain, corpus_len)?,
                    cfg: *cfg,
                },
                ScorerKindSpec::Sim { embeddings } => Scorer::Sim {
                    table: Box::new(EmbeddingTable::load(embeddings)?),
                    degenerate: AtomicU64::new(0),
                },
                ScorerKindSpec::External { column } => Scorer::External {
                    column: load_score_column(column, corpus_len)?,
                },
            };
            names.push(spec.name.clone());
            scorers.push(scorer);
        }
        Ok(Pipeline { names, scorers })
    }

    pub fn scorer_names(&self) -> &[String] {
        &self.names
    }

    /// Lines for which the sim scorer saw degenerate input and scored 0.
    pub fn sim_degenerate_count(&self) -> u64 {
        self.scorers
            .iter()
            .map(|s| match s {
                Scorer::Sim { degenerate, .. } => degenerate.load(Ordering::Relaxed),
                _ => 0,
            })
            .sum()
    }

    fn eval(&self, scorer: &Scorer, pair: &SentencePair, x: &TokenSeq, y: &TokenSeq) -> Result<f64> {
        match scorer {
            Scorer::LangId { model, src_lang, trg_lang } => {
                Ok(model.lang_gate(pair, src_lang, trg_lang))
            }
            Scorer::Adq { fwd, bwd, cfg } => {
                let h_fwd = fwd.entropy(pair.id, x, y)?;
                let h_bwd = bwd.entropy(pair.id, y, x)?;
                scores::adq(h_fwd, h_bwd, *cfg)
            }
            Scorer::Dom { in_domain, out_domain, cfg } => {
                let h_in = in_domain.entropy(pair.id, y)?;
                let h_out = out_domain.entropy(pair.id, y)?;
                scores::dom(h_in, h_out, *cfg)
            }
            Scorer::Sim { table, degenerate } => {
                let vx = table.lookup_seq(x);
                let vy = table.lookup_seq(y);
                match scores::sim(&vx, &vy) {
                    SimOutcome::Score(v) => Ok(v),
                    SimOutcome::Degenerate => {
                        degenerate.fetch_add(1, Ordering::Relaxed);
                        Ok(0.0)
                    }
                }
            }
            Scorer::External { column } => column
                .get(pair.id)
                .copied()
                .ok_or_else(|| Error::data(format!("column has no line {}", pair.id + 1))),
        }
    }

    /// Scores one pair: partials in config order (clamped to the unit
    /// interval) and their product. Scorers after the first zero are
    /// skipped.
    pub fn score_pair(&self, pair: &SentencePair) -> Result<ScoreRecord> {
        let x = corpus::tokenize(&pair.src_raw);
        let y = corpus::tokenize(&pair.trg_raw);
        let mut partials = Vec::with_capacity(self.scorers.len());
        let mut total = 1.0;
        let mut dead = false;
        for (name, scorer) in self.names.iter().zip(&self.scorers) {
            if dead {
                partials.push(Partial::Skipped);
                continue;
            }
            let raw = self.eval(scorer, pair, &x, &y).map_err(|e| {
                Error::data(format!("line {}, scorer {}: {}", pair.id + 1, name, e))
            })?;
            let value = raw.clamp(0.0, 1.0);
            total *= value;
            partials.push(Partial::Value(value));
            if value == 0.0 {
                total = 0.0;
                dead = true;
            }
        }
        Ok(ScoreRecord { id: pair.id, partials, total })
    }
}

/// External score column: any finite values, clamped later by the
/// combiner; length-checked against the corpus.
fn load_score_column(path: &Path, corpus_len: usize) -> Result<Vec<f64>> {
    let values = corpus::read_score_file(path)?;
    if let Some((i, bad)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::data_at(path, i + 1, format!("non-finite score {bad}")));
    }
    if values.len() != corpus_len {
        return Err(Error::data(format!(
            "{}: score column has {} lines, corpus has {corpus_len}",
            path.display(),
            values.len()
        )));
    }
    Ok(values)
}

/// Outcome counters of a scoring run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreRunSummary {
    pub pairs: u64,
    pub zero_totals: u64,
    pub sim_degenerate: u64,
}

const SCORE_BATCH: usize = 1024;

/// Streams the corpus, scores pairs with `workers` threads (0 = one per
/// core) in an order-preserving map, and writes the per-pair TSV and the
/// line-aligned totals column.
pub fn score_corpus(
    config: &PipelineConfig,
    src_path: impl AsRef<Path>,
    trg_path: impl AsRef<Path>,
    tsv_path: impl AsRef<Path>,
    totals_path: impl AsRef<Path>,
    workers: usize,
) -> Result<ScoreRunSummary> {
    let src_path = src_path.as_ref();
    let trg_path = trg_path.as_ref();
    let tsv_path = tsv_path.as_ref();
    let totals_path = totals_path.as_ref();

    let corpus_len = count_lines(src_path)?;
    let pipeline = Pipeline::load(config, corpus_len)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::usage(format!("cannot build worker pool: {e}")))?;

    let mut tsv = BufWriter::new(File::create(tsv_path).map_err(|e| Error::io(tsv_path, e))?);
    let mut totals =
        BufWriter::new(File::create(totals_path).map_err(|e| Error::io(totals_path, e))?);
    write_tsv_header(&mut tsv, tsv_path, pipeline.scorer_names())?;

    let mut reader = corpus::read_bitext(src_path, trg_path)?;
    let mut summary = ScoreRunSummary { pairs: 0, zero_totals: 0, sim_degenerate: 0 };
    let mut batch: Vec<SentencePair> = Vec::with_capacity(SCORE_BATCH);
    loop {
        batch.clear();
        for pair in reader.by_ref().take(SCORE_BATCH) {
            batch.push(pair?);
        }
        if batch.is_empty() {
            break;
        }
        let records: Vec<Result<ScoreRecord>> = pool.install(|| {
            use rayon::prelude::*;
            batch.par_iter().map(|pair| pipeline.score_pair(pair)).collect()
        });
        for record in records {
            let record = record?;
            write_tsv_row(&mut tsv, tsv_path, &record)?;
            writeln!(totals, "{}", record.total).map_err(|e| Error::io(totals_path, e))?;
            summary.pairs += 1;
            if record.total == 0.0 {
                summary.zero_totals += 1;
            }
        }
    }
    tsv.flush().map_err(|e| Error::io(tsv_path, e))?;
    totals.flush().map_err(|e| Error::io(totals_path, e))?;
    summary.sim_degenerate = pipeline.sim_degenerate_count();
    Ok(summary)
}

fn write_tsv_header(out: &mut impl Write, path: &Path, names: &[String]) -> Result<()> {
    let mut header = String::from("id");
    for name in names {
        header.push('\t');
        header.push_str(name);
    }
    header.push_str("\ttotal");
    writeln!(out, "{header}").map_err(|e| Error::io(path, e))
}

fn write_tsv_row(out: &mut impl Write, path: &Path, record: &ScoreRecord) -> Result<()> {
    let mut row = record.id.to_string();
    for partial in &record.partials {
        row.push('\t');
        match partial {
            Partial::Value(v) => row.push_str(&corpus::format_score(*v)),
            Partial::Skipped => row.push_str("skipped"),
        }
    }
    row.push('\t');
    row.push_str(&corpus::format_score(record.total));
    writeln!(out, "{row}").map_err(|e| Error::io(path, e))
}

pub fn count_lines(path: &Path) -> Result<usize> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut n = 0usize;
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let read = reader.read_until(b'\n', &mut buf).map_err(|e| Error::io(path, e))?;
        if read == 0 {
            return Ok(n);
        }
        n += 1;
    }
}

/// Per-line product of clamped score columns.
pub fn merge_scores(columns: &[impl AsRef<Path>], out_path: impl AsRef<Path>) -> Result<u64> {
    if columns.is_empty() {
        return Err(Error::usage("merge-scores needs at least one column"));
    }
    let out_path = out_path.as_ref();
    let paths: Vec<&Path> = columns.iter().map(|p| p.as_ref()).collect();
    let mut readers = Vec::with_capacity(paths.len());
    for path in &paths {
        readers.push(BufReader::new(File::open(path).map_err(|e| Error::io(*path, e))?));
    }
    let mut out = BufWriter::new(File::create(out_path).map_err(|e| Error::io(out_path, e))?);
    let mut line_no = 0usize;
    let mut merged = 0u64;
    loop {
        line_no += 1;
        let mut lines: Vec<Option<String>> = Vec::with_capacity(readers.len());
        for (reader, path) in readers.iter_mut().zip(&paths) {
            let mut line = String::new();
            let n = reader.read_line(&mut line).map_err(|e| Error::io(*path, e))?;
            lines.push((n > 0).then_some(line));
        }
        if lines.iter().all(Option::is_none) {
            break;
        }
        if let Some(short) = lines.iter().position(Option::is_none) {
            return Err(Error::data(format!(
                "line count mismatch: {} ended before line {line_no}",
                paths[short].display()
            )));
        }
        let mut product = 1.0f64;
        for (line, path) in lines.iter().zip(&paths) {
            let raw = line.as_deref().expect("checked above").trim();
            let v: f64 = raw.parse().map_err(|_| {
                Error::data_at(path, line_no, format!("unparseable score {raw:?}"))
            })?;
            if !v.is_finite() {
                return Err(Error::data_at(path, line_no, "non-finite score"));
            }
            product *= v.clamp(0.0, 1.0);
        }
        writeln!(out, "{product}").map_err(|e| Error::io(out_path, e))?;
        merged += 1;
    }
    out.flush().map_err(|e| Error::io(out_path, e))?;
    Ok(merged)
}

/// Deterministic score-file summary.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreStats {
    pub count: u64,
    pub nonzero: u64,
    /// (percent, value) with nearest-rank quantiles; empty for empty files.
    pub quantiles: Vec<(u8, f64)>,
    /// (bucket lower edge, bucket upper edge, count).
    pub histogram: Vec<(f64, f64, u64)>,
}

impl ScoreStats {
    /// Key-value text as printed by the CLI.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("count {}\n", self.count));
        out.push_str(&format!("nonzero {}\n", self.nonzero));
        for (pct, value) in &self.quantiles {
            let key = match pct {
                0 => "min".to_string(),
                100 => "max".to_string(),
                p => format!("p{p}"),
            };
            out.push_str(&format!("{key} {value}\n"));
        }
        out
    }
}

const STATS_QUANTILES: [u8; 7] = [0, 25, 50, 75, 90, 99, 100];
const HISTOGRAM_BINS: usize = 20;

pub fn score_stats(path: impl AsRef<Path>) -> Result<ScoreStats> {
    let mut values = corpus::read_score_file(path)?;
    let count = values.len() as u64;
    let nonzero = values.iter().filter(|&&v| v != 0.0).count() as u64;
    if values.is_empty() {
        return Ok(ScoreStats { count, nonzero, quantiles: vec![], histogram: vec![] });
    }
    values.sort_by(f64::total_cmp);
    let quantiles = STATS_QUANTILES
        .iter()
        .map(|&pct| {
            // nearest-rank on the sorted column
            let rank = ((pct as f64 / 100.0) * values.len() as f64).ceil() as usize;
            (pct, values[rank.clamp(1, values.len()) - 1])
        })
        .collect();

    let lo = values[0];
    let hi = *values.last().expect("non-empty");
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let mut histogram = Vec::with_capacity(HISTOGRAM_BINS);
    if width == 0.0 {
        histogram.push((lo, hi, values.len() as u64));
    } else {
        let mut counts = vec![0u64; HISTOGRAM_BINS];
        for &v in &values {
            let bin = (((v - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
            counts[bin] += 1;
        }
        for (i, c) in counts.into_iter().enumerate() {
            histogram.push((lo + width * i as f64, lo + width * (i + 1) as f64, c));
        }
    }
    Ok(ScoreStats { count, nonzero, quantiles, histogram })
}

pub fn write_histogram(path: impl AsRef<Path>, stats: &ScoreStats) -> Result<()> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for (lo, hi, count) in &stats.histogram {
        writeln!(out, "{lo}\t{hi}\t{count}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
