//! IBM Model 1 lexical translation tables trained by EM, providing the
//! word-normalized conditional cross-entropy H(y|x) behind the adequacy
//! score. Precomputed per-line entropies from any external system can
//! stand in for the built-in backend via [`ExternalEntropyColumn`].

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::{SentencePair, TokenSeq};
use crate::error::{Error, Result};
use crate::langid::parse_versioned_header;

const FORMAT_VERSION: u32 = 1;
const NULL_TOKEN: &str = "<null>";

/// Floor for unseen lexical events: noisy pairs get large-but-finite
/// entropy instead of infinities that break downstream exponentiation.
pub const UNSEEN_PROB_FLOOR: f64 = 1e-9;

/// Default EM iteration count.
pub const DEFAULT_ITERATIONS: usize = 5;

#[derive(Debug, Clone, Default)]
struct Interner {
    by_token: HashMap<String, u32>,
    tokens: Vec<String>,
}

impl Interner {
    fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.by_token.get(token) {
            return id;
        }
        let id = self.tokens.len() as u32;
        self.by_token.insert(token.to_string(), id);
        self.tokens.push(token.to_string());
        id
    }

    fn get(&self, token: &str) -> Option<u32> {
        self.by_token.get(token).copied()
    }
}

/// Translation table t(trg | src) with a distinguished NULL source token.
/// For every source token the outgoing probabilities sum to 1.
#[derive(Debug, Clone)]
pub struct LexicalModel {
    lowercase: bool,
    src_vocab: Interner, // id 0 = NULL
    trg_vocab: Interner,
    table: Vec<HashMap<u32, f64>>, // indexed by src id
}

impl LexicalModel {
    pub fn lowercase(&self) -> bool {
        self.lowercase
    }

    fn fold(&self, token: &str) -> String {
        if self.lowercase {
            token.to_lowercase()
        } else {
            token.to_string()
        }
    }

    /// t(trg | src); `None` src means the NULL token.
    pub fn translation_prob(&self, src: Option<&str>, trg: &str) -> f64 {
        let src_id = match src {
            None => 0,
            Some(s) => match self.src_vocab.get(&self.fold(s)) {
                Some(id) => id,
                None => return 0.0,
            },
        };
        let trg_id = match self.trg_vocab.get(&self.fold(trg)) {
            Some(id) => id,
            None => return 0.0,
        };
        self.table[src_id as usize].get(&trg_id).copied().unwrap_or(0.0)
    }

    /// Per-source-token probability mass, for normalization checks.
    pub fn source_mass_sums(&self) -> Vec<(String, f64)> {
        let mut out = Vec::new();
        for (src_id, row) in self.table.iter().enumerate() {
            if row.is_empty() {
                continue;
            }
            let mass: f64 = row.values().sum();
            out.push((self.src_vocab.tokens[src_id].clone(), mass));
        }
        out
    }

    fn lexical_prob(&self, src_ids: &[Option<u32>], trg_token: &str) -> f64 {
        let sum = match self.trg_vocab.get(&self.fold(trg_token)) {
            None => 0.0,
            Some(t) => {
                let mut sum = self.table[0].get(&t).copied().unwrap_or(0.0);
                for s in src_ids.iter().flatten() {
                    sum += self.table[*s as usize].get(&t).copied().unwrap_or(0.0);
                }
                sum
            }
        };
        let avg = sum / (src_ids.len() + 1) as f64;
        if avg == 0.0 {
            UNSEEN_PROB_FLOOR
        } else {
            avg
        }
    }

    /// Word-normalized conditional cross-entropy
    /// H(y|x) = -(1/|y|) sum_t ln P(y_t|x), where P(y_t|x) averages the
    /// lexical probabilities over NULL and every source token.
    pub fn cond_cross_entropy(&self, x: &TokenSeq, y: &TokenSeq) -> Result<f64> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::data(
                "conditional cross-entropy is undefined for empty sentence",
            ));
        }
        let src_ids: Vec<Option<u32>> =
            x.iter().map(|t| self.src_vocab.get(&self.fold(t))).collect();
        let mut sum = 0.0;
        for trg in y {
            sum += self.lexical_prob(&src_ids, trg).ln();
        }
        Ok(-sum / y.len() as f64)
    }

    /// Versioned text artifact: sorted `src<TAB>trg<TAB>prob` rows.
    pub fn to_text(&self) -> String {
        let mut rows: Vec<(&str, &str, f64)> = Vec::new();
        for (src_id, row) in self.table.iter().enumerate() {
            let src = self.src_vocab.tokens[src_id].as_str();
            for (&trg_id, &p) in row {
                rows.push((src, &self.trg_vocab.tokens[trg_id as usize], p));
            }
        }
        rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut out = String::new();
        let _ = writeln!(out, "parsieve-ibm1 {FORMAT_VERSION}");
        let _ = writeln!(out, "lowercase {}", self.lowercase);
        let _ = writeln!(out, "entries {}", rows.len());
        for (src, trg, p) in rows {
            let _ = writeln!(out, "{src}\t{trg}\t{p}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::model("empty lexical model"))?;
        let version = parse_versioned_header(header, "parsieve-ibm1")?;
        if version > FORMAT_VERSION {
            return Err(Error::model(format!(
                "lexical model format version {version} is newer than supported {FORMAT_VERSION}"
            )));
        }
        let lowercase: bool = lines
            .next()
            .and_then(|l| l.strip_prefix("lowercase "))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::model("missing lowercase line"))?;
        let entries: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("entries "))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::model("missing entries line"))?;

        let mut model = LexicalModel {
            lowercase,
            src_vocab: Interner::default(),
            trg_vocab: Interner::default(),
            table: Vec::new(),
        };
        model.src_vocab.intern(NULL_TOKEN);
        model.table.push(HashMap::new());
        for _ in 0..entries {
            let row = lines.next().ok_or_else(|| Error::model("truncated lexical model"))?;
            let mut fields = row.split('\t');
            let (src, trg, prob) = match (fields.next(), fields.next(), fields.next()) {
                (Some(s), Some(t), Some(p)) => (s, t, p),
                _ => return Err(Error::model(format!("bad table row {row:?}"))),
            };
            let p: f64 = prob
                .parse()
                .map_err(|_| Error::model(format!("bad probability in row {row:?}")))?;
            if !(0.0..=1.0 + 1e-9).contains(&p) {
                return Err(Error::model(format!("probability out of range in row {row:?}")));
            }
            let src_id = model.src_vocab.intern(src);
            if src_id as usize == model.table.len() {
                model.table.push(HashMap::new());
            }
            let trg_id = model.trg_vocab.intern(trg);
            model.table[src_id as usize].insert(trg_id, p);
        }
        for (src, mass) in model.source_mass_sums() {
            if (mass - 1.0).abs() > 1e-6 {
                return Err(Error::model(format!(
                    "translation probabilities for {src:?} sum to {mass}, expected 1"
                )));
            }
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io_model(path, e))?;
        Self::from_text(&text)
    }
}

/// Incremental IBM Model 1 EM state: one [`step`](Ibm1Trainer::step) is one
/// E+M pass, and the data log-likelihood is observable between steps.
pub struct Ibm1Trainer {
    pairs: Vec<(Vec<u32>, Vec<u32>)>,
    model: LexicalModel,
}

impl Ibm1Trainer {
    pub fn new(bitext: &[SentencePair], lowercase: bool) -> Result<Self> {
        if bitext.is_empty() {
            return Err(Error::data("cannot train IBM Model 1 on an empty bitext"));
        }
        let mut model = LexicalModel {
            lowercase,
            src_vocab: Interner::default(),
            trg_vocab: Interner::default(),
            table: Vec::new(),
        };
        model.src_vocab.intern(NULL_TOKEN);
        model.table.push(HashMap::new());

        let fold = |tok: &str| {
            if lowercase {
                tok.to_lowercase()
            } else {
                tok.to_string()
            }
        };
        let mut pairs = Vec::with_capacity(bitext.len());
        for pair in bitext {
            let src: Vec<u32> = pair
                .src_raw
                .split_whitespace()
                .map(|t| {
                    let id = model.src_vocab.intern(&fold(t));
                    if id as usize == model.table.len() {
                        model.table.push(HashMap::new());
                    }
                    id
                })
                .collect();
            let trg: Vec<u32> =
                pair.trg_raw.split_whitespace().map(|t| model.trg_vocab.intern(&fold(t))).collect();
            pairs.push((src, trg));
        }

        // uniform initialization over the target vocabulary, stored
        // sparsely for co-occurring pairs (others never enter EM)
        let uniform = 1.0 / model.trg_vocab.tokens.len().max(1) as f64;
        for (src, trg) in &pairs {
            for &t in trg {
                model.table[0].insert(t, uniform);
                for &s in src {
                    model.table[s as usize].insert(t, uniform);
                }
            }
        }
        Ok(Ibm1Trainer { pairs, model })
    }

    /// One EM iteration: expected co-occurrence counts under the current
    /// table, then per-source renormalization.
    pub fn step(&mut self) {
        let n_src = self.model.table.len();
        let mut counts: Vec<HashMap<u32, f64>> = vec![HashMap::new(); n_src];
        let mut totals: Vec<f64> = vec![0.0; n_src];
        for (src, trg) in &self.pairs {
            for &t in trg {
                let mut z = self.model.table[0].get(&t).copied().unwrap_or(0.0);
                for &s in src {
                    z += self.model.table[s as usize].get(&t).copied().unwrap_or(0.0);
                }
                if z == 0.0 {
                    continue;
                }
                let null_p = self.model.table[0].get(&t).copied().unwrap_or(0.0);
                if null_p > 0.0 {
                    let delta = null_p / z;
                    *counts[0].entry(t).or_insert(0.0) += delta;
                    totals[0] += delta;
                }
                for &s in src {
                    let p = self.model.table[s as usize].get(&t).copied().unwrap_or(0.0);
                    if p > 0.0 {
                        let delta = p / z;
                        *counts[s as usize].entry(t).or_insert(0.0) += delta;
                        totals[s as usize] += delta;
                    }
                }
            }
        }
        for (s, row) in counts.into_iter().enumerate() {
            if totals[s] == 0.0 {
                continue;
            }
            let new_row: HashMap<u32, f64> =
                row.into_iter().map(|(t, c)| (t, c / totals[s])).collect();
            self.model.table[s] = new_row;
        }
    }

    /// Corpus log-likelihood under the current table, including the
    /// uniform alignment factor 1/(|x|+1) per target token.
    pub fn log_likelihood(&self) -> f64 {
        let mut ll = 0.0;
        for (src, trg) in &self.pairs {
            let denom = (src.len() + 1) as f64;
            for &t in trg {
                let mut z = self.model.table[0].get(&t).copied().unwrap_or(0.0);
                for &s in src {
                    z += self.model.table[s as usize].get(&t).copied().unwrap_or(0.0);
                }
                ll += (z.max(UNSEEN_PROB_FLOOR) / denom).ln();
            }
        }
        ll
    }

    pub fn model(&self) -> &LexicalModel {
        &self.model
    }

    pub fn into_model(self) -> LexicalModel {
        self.model
    }
}

/// Standard IBM Model 1 EM from uniform initialization. The source side of
/// each pair is the conditioning side; NULL is implicit in every sentence.
pub fn train_ibm1(bitext: &[SentencePair], iterations: usize) -> Result<LexicalModel> {
    train_ibm1_opts(bitext, iterations, true)
}

pub fn train_ibm1_opts(
    bitext: &[SentencePair],
    iterations: usize,
    lowercase: bool,
) -> Result<LexicalModel> {
    if iterations == 0 {
        return Err(Error::usage("iterations must be >= 1"));
    }
    let mut trainer = Ibm1Trainer::new(bitext, lowercase)?;
    for _ in 0..iterations {
        trainer.step();
    }
    Ok(trainer.into_model())
}

/// Per-line conditional cross-entropies produced by an external system,
/// line-aligned with the corpus.
#[derive(Debug, Clone)]
pub struct ExternalEntropyColumn {
    values: Vec<f64>,
}

impl ExternalEntropyColumn {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, id: usize) -> Option<f64> {
        self.values.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Loads a line-aligned entropy column, checking length and that every
/// value is finite and non-negative.
pub fn load_entropy_column(
    path: impl AsRef<Path>,
    corpus_len: usize,
) -> Result<ExternalEntropyColumn> {
    let path = path.as_ref();
    let lines = crate::corpus::read_lines(path)?;
    let mut values = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let v: f64 = line
            .trim()
            .parse()
            .map_err(|_| Error::data_at(path, i + 1, format!("unparseable entropy {line:?}")))?;
        if !v.is_finite() || v < 0.0 {
            return Err(Error::data_at(
                path,
                i + 1,
                format!("entropy must be finite and >= 0, got {v}"),
            ));
        }
        values.push(v);
    }
    if values.len() != corpus_len {
        return Err(Error::data(format!(
            "{}: entropy column has {} lines, corpus has {corpus_len}",
            path.display(),
            values.len()
        )));
    }
    Ok(ExternalEntropyColumn { values })
}
