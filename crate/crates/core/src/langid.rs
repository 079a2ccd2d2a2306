//! Character n-gram language identifier backing the hard language gate.
//!
//! Per language, additive-smoothed character n-gram tables of orders 1-3
//! over lowercased, whitespace-collapsed text. Classification is the argmax
//! of the length-normalized log-likelihood summed across orders, with a
//! deterministic lexicographic tie-break. Near-empty inputs (< 3
//! non-whitespace characters) classify as the distinguished code "und" so
//! they always fail the gate.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::SentencePair;
use crate::error::{Error, Result};

pub const UNDETERMINED: &str = "und";

const FORMAT_VERSION: u32 = 1;
const MAX_ORDER: usize = 3;
const SMOOTHING_ALPHA: f64 = 0.5;
const MIN_CLASSIFIABLE_CHARS: usize = 3;

#[derive(Debug, Clone, Default)]
struct NGramTable {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl NGramTable {
    fn log_prob(&self, gram: &str) -> f64 {
        let count = self.counts.get(gram).copied().unwrap_or(0);
        let types = self.counts.len() as f64;
        let denom = self.total as f64 + SMOOTHING_ALPHA * (types + 1.0);
        ((count as f64 + SMOOTHING_ALPHA) / denom).ln()
    }

    /// Smoothed probability of one event; the event space is the observed
    /// grams plus a single unseen reserve.
    fn prob(&self, count: u64) -> f64 {
        let types = self.counts.len() as f64;
        let denom = self.total as f64 + SMOOTHING_ALPHA * (types + 1.0);
        (count as f64 + SMOOTHING_ALPHA) / denom
    }
}

#[derive(Debug, Clone)]
struct LangProfile {
    code: String,
    tables: Vec<NGramTable>, // index 0 = order 1
}

/// Trained character n-gram language identifier.
#[derive(Debug, Clone)]
pub struct LangIdModel {
    profiles: Vec<LangProfile>, // sorted by code
}

/// Lowercase, map every whitespace run to a single space, and frame with
/// spaces so edge n-grams see word boundaries.
fn normalize(sentence: &str) -> Vec<char> {
    let mut out = vec![' '];
    let mut last_space = true;
    for ch in sentence.chars() {
        if ch.is_whitespace() {
            if !last_space {
                out.push(' ');
                last_space = true;
            }
        } else {
            for lc in ch.to_lowercase() {
                out.push(lc);
            }
            last_space = false;
        }
    }
    if !last_space {
        out.push(' ');
    }
    out
}

fn non_whitespace_chars(sentence: &str) -> usize {
    sentence.chars().filter(|c| !c.is_whitespace()).count()
}

impl LangIdModel {
    /// Trains one profile per language from sample text (one sentence per
    /// line). Requires at least two languages and a non-empty sample for
    /// each; sample order does not affect the model.
    pub fn train<S: AsRef<str>>(samples: &BTreeMap<String, Vec<S>>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::usage(format!(
                "need >=2 languages to train a language identifier, got {}",
                samples.len()
            )));
        }
        let mut profiles = Vec::with_capacity(samples.len());
        for (code, lines) in samples {
            if code == UNDETERMINED {
                return Err(Error::usage(format!(
                    "language code {UNDETERMINED:?} is reserved for unclassifiable input"
                )));
            }
            let mut tables = vec![NGramTable::default(); MAX_ORDER];
            let mut saw_text = false;
            for line in lines {
                let chars = normalize(line.as_ref());
                if chars.len() <= 2 {
                    continue; // only the frame spaces
                }
                saw_text = true;
                for (order, table) in tables.iter_mut().enumerate() {
                    let n = order + 1;
                    if chars.len() < n {
                        continue;
                    }
                    for window in chars.windows(n) {
                        let gram: String = window.iter().collect();
                        *table.counts.entry(gram).or_insert(0) += 1;
                        table.total += 1;
                    }
                }
            }
            if !saw_text {
                return Err(Error::data(format!("empty training sample for language {code}")));
            }
            profiles.push(LangProfile { code: code.clone(), tables });
        }
        Ok(LangIdModel { profiles })
    }

    /// Trains from one sample file per language.
    pub fn train_from_files(samples: &BTreeMap<String, std::path::PathBuf>) -> Result<Self> {
        let mut text_samples = BTreeMap::new();
        for (code, path) in samples {
            let lines = crate::corpus::read_lines(path)?;
            text_samples.insert(code.clone(), lines);
        }
        LangIdModel::train(&text_samples)
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.profiles.iter().map(|p| p.code.as_str())
    }

    /// Length-normalized log-likelihood of the sentence under one profile,
    /// summed over n-gram orders.
    fn log_likelihood(profile: &LangProfile, chars: &[char]) -> f64 {
        let mut score = 0.0;
        let mut gram = String::new();
        for (order, table) in profile.tables.iter().enumerate() {
            let n = order + 1;
            if chars.len() < n {
                continue;
            }
            let mut sum = 0.0;
            let mut count = 0usize;
            for window in chars.windows(n) {
                gram.clear();
                for ch in window {
                    gram.push(*ch);
                }
                sum += table.log_prob(&gram);
                count += 1;
            }
            score += sum / count as f64;
        }
        score
    }

    /// Language code with the highest score; ties break to the
    /// lexicographically smallest code. Inputs with fewer than 3
    /// non-whitespace characters return [`UNDETERMINED`].
    pub fn classify(&self, sentence: &str) -> &str {
        if non_whitespace_chars(sentence) < MIN_CLASSIFIABLE_CHARS {
            return UNDETERMINED;
        }
        let chars = normalize(sentence);
        let mut best: Option<(&str, f64)> = None;
        for profile in &self.profiles {
            let score = Self::log_likelihood(profile, &chars);
            // profiles are sorted by code, so strictly-greater keeps the
            // lexicographically smallest code on ties
            match best {
                Some((_, s)) if score <= s => {}
                _ => best = Some((&profile.code, score)),
            }
        }
        best.map(|(code, _)| code).unwrap_or(UNDETERMINED)
    }

    /// Hard pair gate: 1.0 iff the source classifies as `src_lang` and the
    /// target as `trg_lang`, else 0.0.
    pub fn lang_gate(&self, pair: &SentencePair, src_lang: &str, trg_lang: &str) -> f64 {
        if self.classify(&pair.src_raw) == src_lang && self.classify(&pair.trg_raw) == trg_lang {
            1.0
        } else {
            0.0
        }
    }

    /// Serializes the model as a versioned text artifact with sorted,
    /// tab-separated gram counts.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "parsieve-langid {FORMAT_VERSION}");
        let _ = writeln!(out, "alpha {SMOOTHING_ALPHA}");
        let _ = writeln!(out, "max-order {MAX_ORDER}");
        for profile in &self.profiles {
            let _ = writeln!(out, "lang {}", profile.code);
            for (order, table) in profile.tables.iter().enumerate() {
                let _ = writeln!(out, "ngram {} {}", order + 1, table.counts.len());
                for (gram, count) in &table.counts {
                    let _ = writeln!(out, "{gram}\t{count}");
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::model("empty language-id model"))?;
        let version = parse_versioned_header(header, "parsieve-langid")?;
        if version > FORMAT_VERSION {
            return Err(Error::model(format!(
                "language-id model format version {version} is newer than supported {FORMAT_VERSION}"
            )));
        }
        expect_kv(lines.next(), "alpha")?;
        expect_kv(lines.next(), "max-order")?;

        let mut profiles: Vec<LangProfile> = Vec::new();
        while let Some(line) = lines.next() {
            let code = line
                .strip_prefix("lang ")
                .ok_or_else(|| Error::model(format!("expected 'lang <code>', got {line:?}")))?;
            if code == UNDETERMINED {
                return Err(Error::model(format!(
                    "language code {UNDETERMINED:?} is reserved for unclassifiable input"
                )));
            }
            let mut tables = Vec::with_capacity(MAX_ORDER);
            for expected_order in 1..=MAX_ORDER {
                let header = lines
                    .next()
                    .ok_or_else(|| Error::model("truncated language-id model"))?;
                let mut it = header.split(' ');
                if it.next() != Some("ngram") {
                    return Err(Error::model(format!("expected ngram section, got {header:?}")));
                }
                let order: usize = it
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::model("bad ngram section header"))?;
                if order != expected_order {
                    return Err(Error::model(format!(
                        "expected ngram order {expected_order}, got {order}"
                    )));
                }
                let entries: usize = it
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::model("bad ngram section header"))?;
                let mut table = NGramTable::default();
                for _ in 0..entries {
                    let row = lines
                        .next()
                        .ok_or_else(|| Error::model("truncated ngram section"))?;
                    let (gram, count) = row
                        .rsplit_once('\t')
                        .ok_or_else(|| Error::model(format!("bad ngram row {row:?}")))?;
                    let count: u64 = count
                        .parse()
                        .map_err(|_| Error::model(format!("bad ngram count in {row:?}")))?;
                    table.total += count;
                    table.counts.insert(gram.to_string(), count);
                }
                tables.push(table);
            }
            profiles.push(LangProfile { code: code.to_string(), tables });
        }
        if profiles.len() < 2 {
            return Err(Error::model("language-id model must carry >=2 languages"));
        }
        Ok(LangIdModel { profiles })
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

    /// Per-(language, order) sums of the smoothed event space: observed
    /// grams plus the unseen reserve. Each should be 1.
    pub fn probability_mass_sums(&self) -> Vec<(String, usize, f64)> {
        let mut sums = Vec::new();
        for profile in &self.profiles {
            for (order, table) in profile.tables.iter().enumerate() {
                let mut mass: f64 = table.counts.values().map(|&c| table.prob(c)).sum();
                mass += table.prob(0); // unseen reserve
                sums.push((profile.code.clone(), order + 1, mass));
            }
        }
        sums
    }
}

pub(crate) fn parse_versioned_header(header: &str, magic: &str) -> Result<u32> {
    let rest = header.strip_prefix(magic).and_then(|r| r.strip_prefix(' '));
    match rest.and_then(|v| v.parse::<u32>().ok()) {
        Some(v) => Ok(v),
        None => Err(Error::model(format!("expected {magic:?} header, got {header:?}"))),
    }
}

fn expect_kv(line: Option<&str>, key: &str) -> Result<()> {
    match line {
        Some(l) if l.starts_with(key) => Ok(()),
        other => Err(Error::model(format!("expected {key} line, got {other:?}"))),
    }
}
