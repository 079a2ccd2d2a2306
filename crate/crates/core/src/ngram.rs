//! Word-level n-gram language model with word-normalized cross-entropy.
//!
//! Smoothing is either Witten-Bell interpolation (default) or plain
//! maximum likelihood (a test-only mode that may assign probability 0 and
//! then refuses to score). Singleton token types are mapped to `<unk>` at
//! training time so unseen words receive probability mass when scoring raw
//! text.
//!
//! Sentence boundaries: models of order >= 2 pad with order-1 `<s>`
//! symbols and one `</s>`. The end symbol is scored but not counted in the
//! |x| normalizer, so reported entropies stay per *word*. Order-1 models
//! have no context to anchor boundary symbols and use none.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::TokenSeq;
use crate::error::{Error, Result};
use crate::langid::parse_versioned_header;

const FORMAT_VERSION: u32 = 1;
const MAX_SUPPORTED_ORDER: usize = 5;

const UNK_ID: u32 = 0;
const BOS_ID: u32 = 1;
const EOS_ID: u32 = 2;

const UNK_TOKEN: &str = "<unk>";
const BOS_TOKEN: &str = "<s>";
const EOS_TOKEN: &str = "</s>";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    /// Maximum-likelihood relative frequencies; zero-probability events
    /// are scoring errors.
    None,
    /// Witten-Bell interpolation down to a uniform base over the
    /// predictable vocabulary.
    WittenBell,
}

impl std::fmt::Display for Smoothing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Smoothing::None => f.write_str("none"),
            Smoothing::WittenBell => f.write_str("witten-bell"),
        }
    }
}

impl std::str::FromStr for Smoothing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Smoothing::None),
            "witten-bell" => Ok(Smoothing::WittenBell),
            other => Err(Error::usage(format!(
                "unknown smoothing {other:?} (expected none or witten-bell)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Vocab {
    by_token: HashMap<String, u32>,
    tokens: Vec<String>, // indexed by id
}

impl Vocab {
    fn new() -> Self {
        let mut v = Vocab::default();
        for tok in [UNK_TOKEN, BOS_TOKEN, EOS_TOKEN] {
            let id = v.tokens.len() as u32;
            v.by_token.insert(tok.to_string(), id);
            v.tokens.push(tok.to_string());
        }
        v
    }

    fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.by_token.get(token) {
            return id;
        }
        let id = self.tokens.len() as u32;
        self.by_token.insert(token.to_string(), id);
        self.tokens.push(token.to_string());
        id
    }

    fn map(&self, token: &str) -> u32 {
        self.by_token.get(token).copied().unwrap_or(UNK_ID)
    }

    fn surface(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }
}

/// N-gram event counts keyed by the id window.
type GramCounts = HashMap<Box<[u32]>, u64>;
/// History -> (total following events, distinct following types).
type ContextStats = HashMap<Box<[u32]>, (u64, u64)>;

/// Smoothed word n-gram model giving word-normalized cross-entropy in
/// nats/token.
#[derive(Debug, Clone)]
pub struct NGramModel {
    order: usize,
    smoothing: Smoothing,
    vocab: Vocab,
    /// counts[n-1]: event counts for n-grams (windows never end in `<s>`).
    counts: Vec<GramCounts>,
    /// ctx_by_len[len]: contexts of `len` tokens, from counts[len].
    ctx_by_len: Vec<ContextStats>,
    n_events: u64,
    t_uni: u64,
    predictable: Vec<u32>,
}

impl NGramModel {
    /// Counts all n-grams up to `order` over the given lines. Empty lines
    /// are skipped; token types occurring exactly once are replaced by
    /// `<unk>`.
    pub fn train<S: AsRef<str>>(lines: &[S], order: usize, smoothing: Smoothing) -> Result<Self> {
        if !(1..=MAX_SUPPORTED_ORDER).contains(&order) {
            return Err(Error::usage(format!(
                "order must be in 1..={MAX_SUPPORTED_ORDER}, got {order}"
            )));
        }
        let mut type_counts: HashMap<&str, u64> = HashMap::new();
        let mut tokenized: Vec<Vec<&str>> = Vec::new();
        for line in lines {
            let tokens: Vec<&str> = line.as_ref().split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            for tok in &tokens {
                *type_counts.entry(tok).or_insert(0) += 1;
            }
            tokenized.push(tokens);
        }
        if tokenized.is_empty() {
            return Err(Error::data("cannot train a language model on an empty corpus"));
        }

        let mut vocab = Vocab::new();
        let mut surviving: Vec<&str> = type_counts
            .iter()
            .filter(|(tok, &c)| c >= 2 && !is_reserved(tok))
            .map(|(tok, _)| *tok)
            .collect();
        surviving.sort_unstable();
        for tok in surviving {
            vocab.intern(tok);
        }

        let mut counts: Vec<GramCounts> = vec![HashMap::new(); order];
        let mut ids = Vec::new();
        for tokens in &tokenized {
            ids.clear();
            if order >= 2 {
                ids.extend(std::iter::repeat_n(BOS_ID, order - 1));
            }
            for tok in tokens {
                let id = vocab.map(tok);
                // singleton types were never interned and fall back to UNK
                ids.push(id);
            }
            if order >= 2 {
                ids.push(EOS_ID);
            }
            for n in 1..=order {
                if ids.len() < n {
                    continue;
                }
                for window in ids.windows(n) {
                    if *window.last().expect("non-empty window") == BOS_ID {
                        continue;
                    }
                    *counts[n - 1].entry(window.into()).or_insert(0) += 1;
                }
            }
        }

        Ok(Self::finalize(order, smoothing, vocab, counts))
    }

    pub fn train_from_file(
        path: impl AsRef<Path>,
        order: usize,
        smoothing: Smoothing,
    ) -> Result<Self> {
        let lines = crate::corpus::read_lines(path)?;
        Self::train(&lines, order, smoothing)
    }

    /// Derives context totals, distinct-successor counts and the
    /// predictable event space from raw n-gram counts.
    fn finalize(
        order: usize,
        smoothing: Smoothing,
        vocab: Vocab,
        counts: Vec<GramCounts>,
    ) -> Self {
        let mut ctx_by_len: Vec<ContextStats> = vec![HashMap::new(); order];
        for n in 2..=order {
            for (gram, &c) in &counts[n - 1] {
                let entry = ctx_by_len[n - 1]
                    .entry(gram[..n - 1].into())
                    .or_insert((0, 0));
                entry.0 += c;
                entry.1 += 1;
            }
        }
        let n_events: u64 = counts[0].values().sum();
        let t_uni = counts[0].len() as u64;

        let mut predictable: Vec<u32> = counts[0].keys().map(|g| g[0]).collect();
        if !predictable.contains(&UNK_ID) {
            predictable.push(UNK_ID);
        }
        if order >= 2 && !predictable.contains(&EOS_ID) {
            predictable.push(EOS_ID);
        }
        predictable.sort_unstable();

        NGramModel { order, smoothing, vocab, counts, ctx_by_len, n_events, t_uni, predictable }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }

    fn unigram_count(&self, id: u32) -> u64 {
        self.counts[0].get(&[id][..]).copied().unwrap_or(0)
    }

    fn gram_count(&self, history: &[u32], id: u32) -> u64 {
        let mut key = Vec::with_capacity(history.len() + 1);
        key.extend_from_slice(history);
        key.push(id);
        self.counts[history.len()].get(key.as_slice()).copied().unwrap_or(0)
    }

    fn ctx(&self, history: &[u32]) -> (u64, u64) {
        if history.is_empty() {
            return (self.n_events, self.t_uni);
        }
        self.ctx_by_len[history.len()]
            .get(history)
            .copied()
            .unwrap_or((0, 0))
    }

    fn prob_uniform(&self) -> f64 {
        1.0 / self.predictable.len() as f64
    }

    fn prob_unigram_wb(&self, id: u32) -> f64 {
        let c = self.unigram_count(id) as f64;
        let t = self.t_uni as f64;
        (c + t * self.prob_uniform()) / (self.n_events as f64 + t)
    }

    /// Witten-Bell interpolated probability; unseen histories defer
    /// entirely to the shorter context.
    fn prob_wb(&self, history: &[u32], id: u32) -> f64 {
        if history.is_empty() {
            return self.prob_unigram_wb(id);
        }
        let backoff = self.prob_wb(&history[1..], id);
        let (total, distinct) = self.ctx(history);
        if total == 0 {
            return backoff;
        }
        let c = self.gram_count(history, id) as f64;
        (c + distinct as f64 * backoff) / (total as f64 + distinct as f64)
    }

    fn prob_ml(&self, history: &[u32], id: u32) -> Option<f64> {
        let c = self.gram_count(history, id);
        if c == 0 {
            return None;
        }
        let (total, _) = self.ctx(history);
        debug_assert!(total >= c);
        Some(c as f64 / total as f64)
    }

    /// Conditional probability of one event; histories longer than
    /// order-1 are truncated on the left. `None` only in ML mode for
    /// unseen events.
    fn prob(&self, history: &[u32], id: u32) -> Option<f64> {
        let start = history.len().saturating_sub(self.order - 1);
        let history = &history[start..];
        match self.smoothing {
            Smoothing::WittenBell => Some(self.prob_wb(history, id)),
            Smoothing::None => self.prob_ml(history, id),
        }
    }

    /// Negative log-probability (nats) of each scored event: every token
    /// of `x`, plus the end symbol for orders >= 2.
    pub fn token_neg_log_probs(&self, x: &TokenSeq) -> Result<Vec<f64>> {
        if x.is_empty() {
            return Err(Error::data("cross-entropy is undefined for empty input"));
        }
        let mut ids = Vec::with_capacity(x.len() + self.order);
        if self.order >= 2 {
            ids.extend(std::iter::repeat_n(BOS_ID, self.order - 1));
        }
        for tok in x {
            ids.push(self.vocab.map(tok));
        }
        if self.order >= 2 {
            ids.push(EOS_ID);
        }
        let lead = if self.order >= 2 { self.order - 1 } else { 0 };
        let mut nlp = Vec::with_capacity(ids.len() - lead);
        for i in lead..ids.len() {
            let (history, id) = (&ids[i - lead..i], ids[i]);
            match self.prob(history, id) {
                Some(p) => nlp.push(-p.ln()),
                None => {
                    let surface = if id == EOS_ID && i == ids.len() - 1 {
                        EOS_TOKEN.to_string()
                    } else {
                        x.tokens()[i - lead].clone()
                    };
                    return Err(Error::data(format!(
                        "zero probability for token {surface:?} at position {} (ML mode)",
                        i - lead + 1
                    )));
                }
            }
        }
        Ok(nlp)
    }

    /// Word-normalized cross-entropy: the summed negative log-probability
    /// of the scored events divided by |x|.
    pub fn cross_entropy(&self, x: &TokenSeq) -> Result<f64> {
        let nlp = self.token_neg_log_probs(x)?;
        Ok(nlp.iter().sum::<f64>() / x.len() as f64)
    }

    /// exp(cross_entropy); the definitional identity, not an independent
    /// computation.
    pub fn perplexity(&self, x: &TokenSeq) -> Result<f64> {
        Ok(self.cross_entropy(x)?.exp())
    }

    /// Sum of conditional probabilities over the whole predictable event
    /// space for one history (tokens unknown to the model count as
    /// `<unk>`). Smoothed models must return 1 within tolerance.
    pub fn distribution_mass(&self, history: &[&str]) -> f64 {
        let ids: Vec<u32> = history.iter().map(|t| self.vocab.map(t)).collect();
        self.predictable
            .iter()
            .map(|&w| self.prob(&ids, w).unwrap_or(0.0))
            .sum()
    }

    /// Every full-order history observed in training, as surface strings.
    pub fn observed_histories(&self) -> Vec<Vec<String>> {
        if self.order < 2 {
            return vec![Vec::new()];
        }
        let mut hists: Vec<Vec<String>> = self
            .ctx_by_len[self.order - 1]
            .keys()
            .map(|h| h.iter().map(|&id| self.vocab.surface(id).to_string()).collect())
            .collect();
        hists.sort();
        hists
    }

    /// Versioned plain-text dump: one `n-gram<TAB>count` row per entry,
    /// sorted, restorable with [`NGramModel::from_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "parsieve-ngramlm {FORMAT_VERSION}");
        let _ = writeln!(out, "order {}", self.order);
        let _ = writeln!(out, "smoothing {}", self.smoothing);
        for n in 1..=self.order {
            let mut rows: Vec<(String, u64)> = self.counts[n - 1]
                .iter()
                .map(|(gram, &c)| {
                    let toks: Vec<&str> =
                        gram.iter().map(|&id| self.vocab.surface(id)).collect();
                    (toks.join(" "), c)
                })
                .collect();
            rows.sort();
            let _ = writeln!(out, "ngram {} {}", n, rows.len());
            for (gram, c) in rows {
                let _ = writeln!(out, "{gram}\t{c}");
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::model("empty n-gram model"))?;
        let version = parse_versioned_header(header, "parsieve-ngramlm")?;
        if version > FORMAT_VERSION {
            return Err(Error::model(format!(
                "n-gram model format version {version} is newer than supported {FORMAT_VERSION}"
            )));
        }
        let order: usize = lines
            .next()
            .and_then(|l| l.strip_prefix("order "))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::model("missing order line"))?;
        if !(1..=MAX_SUPPORTED_ORDER).contains(&order) {
            return Err(Error::model(format!("unsupported order {order}")));
        }
        let smoothing: Smoothing = lines
            .next()
            .and_then(|l| l.strip_prefix("smoothing "))
            .ok_or_else(|| Error::model("missing smoothing line"))?
            .parse()
            .map_err(|_| Error::model("bad smoothing line"))?;

        let mut vocab = Vocab::new();
        let mut counts: Vec<GramCounts> = vec![HashMap::new(); order];
        for n in 1..=order {
            let section = lines
                .next()
                .ok_or_else(|| Error::model("truncated n-gram model"))?;
            let entries: usize = section
                .strip_prefix(&format!("ngram {n} "))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::model(format!("bad section header {section:?}")))?;
            for _ in 0..entries {
                let row = lines
                    .next()
                    .ok_or_else(|| Error::model("truncated ngram section"))?;
                let (gram, count) = row
                    .rsplit_once('\t')
                    .ok_or_else(|| Error::model(format!("bad ngram row {row:?}")))?;
                let count: u64 = count
                    .parse()
                    .map_err(|_| Error::model(format!("bad count in row {row:?}")))?;
                let ids: Vec<u32> = gram.split(' ').map(|t| vocab.intern(t)).collect();
                if ids.len() != n {
                    return Err(Error::model(format!(
                        "row {row:?} has {} tokens, expected {n}",
                        ids.len()
                    )));
                }
                counts[n - 1].insert(ids.into(), count);
            }
        }
        Ok(Self::finalize(order, smoothing, vocab, counts))
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

fn is_reserved(token: &str) -> bool {
    token == UNK_TOKEN || token == BOS_TOKEN || token == EOS_TOKEN
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn seq(s: &str) -> TokenSeq {
        tokenize(s)
    }

    #[test]
    fn rejects_bad_order() {
        assert!(NGramModel::train(&["a b"], 0, Smoothing::None).is_err());
        assert!(NGramModel::train(&["a b"], 6, Smoothing::None).is_err());
    }

    #[test]
    fn rejects_empty_corpus() {
        let none: [&str; 0] = [];
        assert!(NGramModel::train(&none, 2, Smoothing::WittenBell).is_err());
        assert!(NGramModel::train(&["", "   "], 2, Smoothing::WittenBell).is_err());
    }

    #[test]
    fn ml_unigram_hand_values() {
        // "a a b": b is a singleton and folds into <unk>
        let model = NGramModel::train(&["a a b"], 1, Smoothing::None).unwrap();
        let h_a = model.cross_entropy(&seq("a")).unwrap();
        assert!((h_a - (-(2.0f64 / 3.0).ln())).abs() < 1e-12, "H={h_a}");
        let h_ab = model.cross_entropy(&seq("a b")).unwrap();
        let expect = -((2.0f64 / 3.0).ln() + (1.0f64 / 3.0).ln()) / 2.0;
        assert!((h_ab - expect).abs() < 1e-12, "H={h_ab}, want {expect}");
        assert!((expect - 0.752038).abs() < 1e-6);
    }

    #[test]
    fn ml_perplexity_uniform_vocab() {
        // four types, each count 2: a uniform unigram distribution
        let model = NGramModel::train(&["c d e f", "f e d c"], 1, Smoothing::None).unwrap();
        let pp = model.perplexity(&seq("c d e f")).unwrap();
        assert!((pp - 4.0).abs() < 1e-9, "pp={pp}");
    }

    #[test]
    fn ml_perplexity_of_single_token() {
        let model = NGramModel::train(&["a a b"], 1, Smoothing::None).unwrap();
        let pp = model.perplexity(&seq("a")).unwrap();
        assert!((pp - 1.5).abs() < 1e-12);
    }

    #[test]
    fn empty_input_is_an_error() {
        let model = NGramModel::train(&["a a b"], 1, Smoothing::None).unwrap();
        let err = model.cross_entropy(&TokenSeq::default()).unwrap_err();
        assert!(err.to_string().contains("empty input"));
    }

    #[test]
    fn ml_zero_probability_names_the_token() {
        // no singletons, so <unk> has zero count and unseen words cannot score
        let model = NGramModel::train(&["a a b b"], 1, Smoothing::None).unwrap();
        let err = model.cross_entropy(&seq("a c")).unwrap_err();
        assert!(err.to_string().contains("\"c\""), "got: {err}");
    }

    #[test]
    fn perplexity_is_exp_of_cross_entropy() {
        let corpus: Vec<String> = (0..50)
            .map(|i| format!("w{} w{} w{} w{}", i % 7, (i + 1) % 7, (i + 2) % 7, i % 3))
            .collect();
        let model = NGramModel::train(&corpus, 3, Smoothing::WittenBell).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let len = rng.gen_range(1..12);
            let text: Vec<String> =
                (0..len).map(|_| format!("w{}", rng.gen_range(0..9))).collect();
            let x = TokenSeq::from(text);
            let h = model.cross_entropy(&x).unwrap();
            let pp = model.perplexity(&x).unwrap();
            assert!((pp - h.exp()).abs() <= 1e-12 * pp.abs().max(1.0));
        }
    }

    #[test]
    fn witten_bell_conditional_distributions_normalize() {
        let corpus: Vec<String> = (0..60)
            .map(|i| {
                format!(
                    "t{} t{} t{} t{} t{}",
                    i % 11,
                    (i * 3 + 1) % 11,
                    (i * 5 + 2) % 11,
                    i % 4,
                    (i + 6) % 11
                )
            })
            .collect();
        let model = NGramModel::train(&corpus, 3, Smoothing::WittenBell).unwrap();

        let mut checked = 0;
        for hist in model.observed_histories() {
            let refs: Vec<&str> = hist.iter().map(|s| s.as_str()).collect();
            let mass = model.distribution_mass(&refs);
            assert!((mass - 1.0).abs() < 1e-6, "history {refs:?}: mass {mass}");
            checked += 1;
        }
        // unseen and partially-unseen histories must also normalize
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        while checked < 120 {
            let h1 = format!("t{}", rng.gen_range(0..20));
            let h2 = format!("novel{}", rng.gen_range(0..20));
            let mass = model.distribution_mass(&[h1.as_str(), h2.as_str()]);
            assert!((mass - 1.0).abs() < 1e-6, "history [{h1},{h2}]: mass {mass}");
            checked += 1;
        }
        assert!(checked >= 100);
    }

    #[test]
    fn training_is_bit_stable() {
        let corpus = ["der hund läuft", "die katze schläft", "der hund schläft gern"];
        let a = NGramModel::train(&corpus, 3, Smoothing::WittenBell).unwrap();
        let b = NGramModel::train(&corpus, 3, Smoothing::WittenBell).unwrap();
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn duplicating_corpus_preserves_ml_probabilities() {
        // all types >= 2 occurrences so the singleton rule stays inert
        let corpus = ["a b a b", "b c c a"];
        let doubled = ["a b a b", "b c c a", "a b a b", "b c c a"];
        let single = NGramModel::train(&corpus, 2, Smoothing::None).unwrap();
        let double = NGramModel::train(&doubled, 2, Smoothing::None).unwrap();
        for text in ["a b", "b c c a", "a b a b", "b a"] {
            let x = seq(text);
            let h1 = single.cross_entropy(&x).unwrap();
            let h2 = double.cross_entropy(&x).unwrap();
            assert!((h1 - h2).abs() < 1e-12, "{text}: {h1} vs {h2}");
        }
    }

    #[test]
    fn cross_entropy_is_stream_safe() {
        let corpus: Vec<String> =
            (0..40).map(|i| format!("s{} s{} s{}", i % 6, (i + 2) % 6, (i + 4) % 6)).collect();
        let model = NGramModel::train(&corpus, 3, Smoothing::WittenBell).unwrap();
        let x = seq("s0 s2 s4 s1 s3 s5 s0 s2");
        let nlp = model.token_neg_log_probs(&x).unwrap();
        let h = model.cross_entropy(&x).unwrap();
        let (front, back) = nlp.split_at(nlp.len() / 2);
        let split_sum: f64 = front.iter().sum::<f64>() + back.iter().sum::<f64>();
        assert!((h - split_sum / x.len() as f64).abs() < 1e-9);
    }

    #[test]
    fn text_round_trip_is_identical() {
        let corpus = ["ein haus am see", "ein boot am see", "das haus ist alt"];
        let model = NGramModel::train(&corpus, 3, Smoothing::WittenBell).unwrap();
        let text = model.to_text();
        let back = NGramModel::from_text(&text).unwrap();
        assert_eq!(text, back.to_text());
        let x = seq("ein haus ist neu");
        assert_eq!(
            model.cross_entropy(&x).unwrap(),
            back.cross_entropy(&x).unwrap()
        );
    }

    #[test]
    fn newer_version_fails_cleanly() {
        let model = NGramModel::train(&["a a"], 1, Smoothing::None).unwrap();
        let text = model.to_text().replacen("parsieve-ngramlm 1", "parsieve-ngramlm 42", 1);
        let err = NGramModel::from_text(&text).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn higher_order_model_scores_eos_but_normalizes_by_word_count() {
        // corpus: two identical sentences "x y", order 2. After padding,
        // events are (x|<s>), (y|x), (</s>|y), each with ML probability 1.
        let model = NGramModel::train(&["x y", "x y"], 2, Smoothing::None).unwrap();
        let h = model.cross_entropy(&seq("x y")).unwrap();
        assert!(h.abs() < 1e-12, "H={h}");
        // perplexity of a certain sequence is exactly 1
        assert!((model.perplexity(&seq("x y")).unwrap() - 1.0).abs() < 1e-12);
    }
}
