//! Synthetic noisy-bitext generator and ranking evaluator.
//!
//! Starting from a clean bitext, fixed fractions of lines are corrupted
//! with the classic crawl noise classes: target replaced by a copy of the
//! source, wrong-language text, misaligned targets, truncated targets and
//! non-linguistic junk. The evaluator measures how well a score column
//! ranks clean lines above corrupted ones (AUC with ties counted half,
//! plus precision at top fractions).

use std::fmt;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::corpus::SentencePair;
use crate::error::{Error, Result};

/// Per-class corruption fractions. Fractions must be non-negative and sum
/// to at most 1; the remainder stays clean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub copy_source: f64,
    pub wrong_language: f64,
    pub misaligned: f64,
    pub truncated_target: f64,
    pub junk: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            copy_source: 0.05,
            wrong_language: 0.05,
            misaligned: 0.05,
            truncated_target: 0.05,
            junk: 0.05,
            seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        let fractions = [
            self.copy_source,
            self.wrong_language,
            self.misaligned,
            self.truncated_target,
            self.junk,
        ];
        if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::usage("noise fractions must be in [0,1]"));
        }
        let sum: f64 = fractions.iter().sum();
        if sum > 1.0 + 1e-12 {
            return Err(Error::usage(format!("noise fractions sum to {sum}, must be <= 1")));
        }
        Ok(())
    }
}

/// Noise class of one line, `Clean` for untouched lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseLabel {
    Clean,
    Copy,
    Lang,
    Misaligned,
    Truncated,
    Junk,
}

impl NoiseLabel {
    pub const ALL: [NoiseLabel; 6] = [
        NoiseLabel::Clean,
        NoiseLabel::Copy,
        NoiseLabel::Lang,
        NoiseLabel::Misaligned,
        NoiseLabel::Truncated,
        NoiseLabel::Junk,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseLabel::Clean => "clean",
            NoiseLabel::Copy => "copy",
            NoiseLabel::Lang => "lang",
            NoiseLabel::Misaligned => "misaligned",
            NoiseLabel::Truncated => "truncated",
            NoiseLabel::Junk => "junk",
        }
    }

    pub fn parse(s: &str) -> Option<NoiseLabel> {
        NoiseLabel::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

impl fmt::Display for NoiseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Deterministically corrupts `floor(fraction * n)` lines per class.
/// `third_language` supplies replacement sentences for the wrong-language
/// class; it must be non-empty when that fraction is positive.
pub fn generate(
    clean: &[SentencePair],
    third_language: &[String],
    spec: &NoiseSpec,
) -> Result<(Vec<SentencePair>, Vec<NoiseLabel>)> {
    spec.validate()?;
    if clean.is_empty() {
        return Err(Error::data("cannot generate a benchmark from an empty bitext"));
    }
    if spec.wrong_language > 0.0 && third_language.is_empty() {
        return Err(Error::usage(
            "wrong-language noise requires a third-language sample",
        ));
    }

    let n = clean.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut labels = vec![NoiseLabel::Clean; n];
    let mut cursor = 0usize;
    let classes = [
        (NoiseLabel::Copy, spec.copy_source),
        (NoiseLabel::Lang, spec.wrong_language),
        (NoiseLabel::Misaligned, spec.misaligned),
        (NoiseLabel::Truncated, spec.truncated_target),
        (NoiseLabel::Junk, spec.junk),
    ];
    for (label, fraction) in classes {
        let k = (fraction * n as f64).floor() as usize;
        for &idx in &order[cursor..cursor + k] {
            labels[idx] = label;
        }
        cursor += k;
    }

    let mut noisy = Vec::with_capacity(n);
    for (i, pair) in clean.iter().enumerate() {
        let mut out = pair.clone();
        match labels[i] {
            NoiseLabel::Clean => {}
            NoiseLabel::Copy => out.trg_raw = out.src_raw.clone(),
            NoiseLabel::Lang => {
                let line = third_language[rng.gen_range(0..third_language.len())].clone();
                if rng.gen_bool(0.5) {
                    out.src_raw = line;
                } else {
                    out.trg_raw = line;
                }
            }
            NoiseLabel::Misaligned => {
                if n > 1 {
                    let mut j = rng.gen_range(0..n - 1);
                    if j >= i {
                        j += 1;
                    }
                    out.trg_raw = clean[j].trg_raw.clone();
                }
            }
            NoiseLabel::Truncated => {
                let tokens: Vec<&str> = out.trg_raw.split_whitespace().collect();
                let keep = tokens.len().div_ceil(2);
                out.trg_raw = tokens[..keep].join(" ");
            }
            NoiseLabel::Junk => {
                out.src_raw = junk_string(&mut rng);
                out.trg_raw = junk_string(&mut rng);
            }
        }
        noisy.push(out);
    }
    Ok((noisy, labels))
}

fn junk_string(rng: &mut ChaCha8Rng) -> String {
    const CHARS: &[u8] = b"0123456789!?.,;:%&/()=+-#*";
    let words = rng.gen_range(2..8);
    let mut out = String::new();
    for w in 0..words {
        if w > 0 {
            out.push(' ');
        }
        let len = rng.gen_range(1..7);
        for _ in 0..len {
            out.push(CHARS[rng.gen_range(0..CHARS.len())] as char);
        }
    }
    out
}

/// Ranking metrics of a score column against clean/noisy labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RankMetrics {
    /// Probability that a random clean line outranks a random noisy one,
    /// ties counted half. Absent when the labels are all one class.
    pub auc: Option<f64>,
    /// (requested top fraction, share of clean lines in that top slice).
    pub precision_at: Vec<(f64, f64)>,
}

/// Evaluates how well scores rank clean lines above noisy ones.
pub fn rank_eval(
    scores: &[f64],
    labels: &[NoiseLabel],
    precision_fractions: &[f64],
) -> Result<RankMetrics> {
    if scores.len() != labels.len() {
        return Err(Error::data(format!(
            "scores and labels are not line-aligned: {} vs {}",
            scores.len(),
            labels.len()
        )));
    }
    let auc = ranking_auc(scores, labels);

    let mut by_score: Vec<usize> = (0..scores.len()).collect();
    // ties broken by line id so the top-k slice is deterministic
    by_score.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut precision_at = Vec::with_capacity(precision_fractions.len());
    for &fraction in precision_fractions {
        let k = ((fraction * scores.len() as f64).floor() as usize).max(1).min(scores.len());
        let clean = by_score[..k].iter().filter(|&&i| labels[i] == NoiseLabel::Clean).count();
        precision_at.push((fraction, clean as f64 / k as f64));
    }
    Ok(RankMetrics { auc, precision_at })
}

/// Mann-Whitney AUC of clean-vs-noisy with average ranks for ties.
fn ranking_auc(scores: &[f64], labels: &[NoiseLabel]) -> Option<f64> {
    let n_clean = labels.iter().filter(|&&l| l == NoiseLabel::Clean).count();
    let n_noisy = labels.len() - n_clean;
    if n_clean == 0 || n_noisy == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_clean = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j share the average rank
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if labels[idx] == NoiseLabel::Clean {
                rank_sum_clean += avg_rank;
            }
        }
        i = j;
    }
    let u = rank_sum_clean - (n_clean * (n_clean + 1)) as f64 / 2.0;
    Some(u / (n_clean as f64 * n_noisy as f64))
}

/// Writes the one-label-per-line file next to a generated benchmark.
pub fn write_labels(path: impl AsRef<std::path::Path>, labels: &[NoiseLabel]) -> Result<()> {
    let text: String = labels.iter().map(|l| format!("{l}\n")).collect();
    std::fs::write(path.as_ref(), text).map_err(|e| Error::io(path.as_ref(), e))
}

pub fn read_labels(path: impl AsRef<std::path::Path>) -> Result<Vec<NoiseLabel>> {
    let path = path.as_ref();
    let lines = crate::corpus::read_lines(path)?;
    lines
        .iter()
        .enumerate()
        .map(|(i, line)| {
            NoiseLabel::parse(line.trim())
                .ok_or_else(|| Error::data_at(path, i + 1, format!("unknown label {line:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clean_corpus(n: usize) -> Vec<SentencePair> {
        (0..n)
            .map(|id| SentencePair {
                id,
                src_raw: format!("quelle satz nummer {id} mit worten"),
                trg_raw: format!("target sentence number {id} with words"),
            })
            .collect()
    }

    fn third_lang() -> Vec<String> {
        (0..20).map(|i| format!("phrase française numéro {i} avec des mots")).collect()
    }

    #[test]
    fn all_zero_spec_is_identity() {
        let clean = clean_corpus(10);
        let spec = NoiseSpec {
            copy_source: 0.0,
            wrong_language: 0.0,
            misaligned: 0.0,
            truncated_target: 0.0,
            junk: 0.0,
            seed: 1,
        };
        let (noisy, labels) = generate(&clean, &third_lang(), &spec).unwrap();
        assert_eq!(noisy, clean);
        assert!(labels.iter().all(|&l| l == NoiseLabel::Clean));
    }

    #[test]
    fn copy_fraction_one_copies_every_line() {
        let clean = clean_corpus(7);
        let spec = NoiseSpec {
            copy_source: 1.0,
            wrong_language: 0.0,
            misaligned: 0.0,
            truncated_target: 0.0,
            junk: 0.0,
            seed: 3,
        };
        let (noisy, labels) = generate(&clean, &third_lang(), &spec).unwrap();
        assert!(noisy.iter().all(|p| p.trg_raw == p.src_raw));
        assert!(labels.iter().all(|&l| l == NoiseLabel::Copy));
    }

    #[test]
    fn fixed_seed_regenerates_identically() {
        let clean = clean_corpus(50);
        let spec = NoiseSpec { seed: 42, ..NoiseSpec::default() };
        let a = generate(&clean, &third_lang(), &spec).unwrap();
        let b = generate(&clean, &third_lang(), &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn corrupts_exactly_floor_fraction_per_class() {
        let clean = clean_corpus(103);
        let spec = NoiseSpec {
            copy_source: 0.1,
            wrong_language: 0.07,
            misaligned: 0.2,
            truncated_target: 0.01,
            junk: 0.03,
            seed: 9,
        };
        let (_, labels) = generate(&clean, &third_lang(), &spec).unwrap();
        let count = |l: NoiseLabel| labels.iter().filter(|&&x| x == l).count();
        assert_eq!(count(NoiseLabel::Copy), 10);
        assert_eq!(count(NoiseLabel::Lang), 7);
        assert_eq!(count(NoiseLabel::Misaligned), 20);
        assert_eq!(count(NoiseLabel::Truncated), 1);
        assert_eq!(count(NoiseLabel::Junk), 3);
    }

    #[test]
    fn fraction_sum_above_one_is_rejected() {
        let spec = NoiseSpec {
            copy_source: 0.5,
            wrong_language: 0.6,
            misaligned: 0.0,
            truncated_target: 0.0,
            junk: 0.0,
            seed: 0,
        };
        assert!(generate(&clean_corpus(4), &third_lang(), &spec).is_err());
    }

    #[test]
    fn misaligned_lines_take_other_targets() {
        let clean = clean_corpus(30);
        let spec = NoiseSpec {
            copy_source: 0.0,
            wrong_language: 0.0,
            misaligned: 0.5,
            truncated_target: 0.0,
            junk: 0.0,
            seed: 11,
        };
        let (noisy, labels) = generate(&clean, &third_lang(), &spec).unwrap();
        for (i, label) in labels.iter().enumerate() {
            if *label == NoiseLabel::Misaligned {
                assert_ne!(noisy[i].trg_raw, clean[i].trg_raw);
                assert!(clean.iter().any(|p| p.trg_raw == noisy[i].trg_raw));
            }
        }
    }

    #[test]
    fn truncation_halves_target_tokens() {
        let clean = vec![SentencePair {
            id: 0,
            src_raw: "a b c d".into(),
            trg_raw: "one two three four five six".into(),
        }];
        let spec = NoiseSpec {
            copy_source: 0.0,
            wrong_language: 0.0,
            misaligned: 0.0,
            truncated_target: 1.0,
            junk: 0.0,
            seed: 5,
        };
        let (noisy, _) = generate(&clean, &third_lang(), &spec).unwrap();
        assert_eq!(noisy[0].trg_raw, "one two three");
    }

    #[test]
    fn perfect_scores_give_auc_one() {
        let labels = vec![
            NoiseLabel::Clean,
            NoiseLabel::Junk,
            NoiseLabel::Clean,
            NoiseLabel::Copy,
        ];
        let scores = vec![1.0, 0.0, 1.0, 0.0];
        let m = rank_eval(&scores, &labels, &[0.5]).unwrap();
        assert_eq!(m.auc, Some(1.0));
        assert_eq!(m.precision_at, vec![(0.5, 1.0)]);
    }

    #[test]
    fn constant_scores_give_auc_half() {
        let labels = vec![NoiseLabel::Clean, NoiseLabel::Junk, NoiseLabel::Clean];
        let scores = vec![0.7, 0.7, 0.7];
        let m = rank_eval(&scores, &labels, &[]).unwrap();
        assert!((m.auc.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn random_scores_hover_near_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 10_000;
        let labels: Vec<NoiseLabel> = (0..n)
            .map(|i| if i % 2 == 0 { NoiseLabel::Clean } else { NoiseLabel::Junk })
            .collect();
        let scores: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let auc = rank_eval(&scores, &labels, &[]).unwrap().auc.unwrap();
        assert!((auc - 0.5).abs() < 0.02, "auc={auc}");
    }

    #[test]
    fn one_class_labels_have_no_auc() {
        let labels = vec![NoiseLabel::Clean, NoiseLabel::Clean];
        let m = rank_eval(&[0.3, 0.9], &labels, &[]).unwrap();
        assert_eq!(m.auc, None);
    }

    #[test]
    fn auc_invariant_under_monotone_transform() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let labels: Vec<NoiseLabel> = (0..500)
            .map(|_| if rng.gen_bool(0.6) { NoiseLabel::Clean } else { NoiseLabel::Misaligned })
            .collect();
        let scores: Vec<f64> = (0..500).map(|_| rng.gen::<f64>()).collect();
        let squashed: Vec<f64> = scores.iter().map(|s| (3.0 * s + 1.0).ln()).collect();
        let a = rank_eval(&scores, &labels, &[]).unwrap().auc.unwrap();
        let b = rank_eval(&squashed, &labels, &[]).unwrap().auc.unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn labels_round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.txt");
        let labels = vec![NoiseLabel::Clean, NoiseLabel::Copy, NoiseLabel::Junk];
        write_labels(&path, &labels).unwrap();
        assert_eq!(read_labels(&path).unwrap(), labels);
    }

    #[test]
    fn unknown_label_is_a_data_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.txt");
        std::fs::write(&path, "clean\nwhatever\n").unwrap();
        let err = read_labels(&path).unwrap_err();
        assert!(err.to_string().contains(":2:"));
    }
}
