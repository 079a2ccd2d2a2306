//! Synthetic trilingual world shared by the integration and acceptance
//! tests: a German-like/English-like bilingual lexicon plus a French-like
//! third language, with seeded sentence generators.
// not every test binary uses every helper
#![allow(dead_code)]
//!
//! Clean pairs are near-word-by-word translations with realistic slack:
//! words may render as one of several variants, occasionally drop out of
//! the target, and filler words appear with no source counterpart. The
//! slack keeps the two conditional cross-entropies of a clean pair from
//! agreeing perfectly, which a purely word-for-word world would do.

use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use parsieve::corpus::SentencePair;

/// (source word, target renderings).
pub const LEXICON: [(&str, &[&str]); 64] = [
    ("das", &["the"]),
    ("haus", &["house", "home"]),
    ("ist", &["is"]),
    ("groß", &["big", "large"]),
    ("klein", &["small", "little"]),
    ("schön", &["beautiful", "lovely"]),
    ("hund", &["dog"]),
    ("katze", &["cat"]),
    ("läuft", &["runs"]),
    ("schläft", &["sleeps"]),
    ("unter", &["under", "beneath"]),
    ("über", &["above", "over"]),
    ("tisch", &["table"]),
    ("stuhl", &["chair"]),
    ("wasser", &["water"]),
    ("feuer", &["fire"]),
    ("berg", &["mountain"]),
    ("fluss", &["river"]),
    ("stadt", &["city", "town"]),
    ("dorf", &["village"]),
    ("brücke", &["bridge"]),
    ("zug", &["train"]),
    ("fährt", &["drives", "rides"]),
    ("schnell", &["quickly", "fast"]),
    ("langsam", &["slowly"]),
    ("heute", &["today"]),
    ("morgen", &["tomorrow"]),
    ("gestern", &["yesterday"]),
    ("wetter", &["weather"]),
    ("regen", &["rain"]),
    ("schnee", &["snow"]),
    ("sonne", &["sun"]),
    ("kinder", &["children", "kids"]),
    ("spielen", &["play"]),
    ("garten", &["garden", "yard"]),
    ("buch", &["book"]),
    ("liest", &["reads"]),
    ("schreibt", &["writes"]),
    ("zeitung", &["newspaper", "paper"]),
    ("straße", &["street", "road"]),
    ("alt", &["old"]),
    ("neu", &["new"]),
    ("freund", &["friend"]),
    ("trinkt", &["drinks"]),
    ("kaffee", &["coffee"]),
    ("milch", &["milk"]),
    ("brot", &["bread"]),
    ("käse", &["cheese"]),
    ("abend", &["evening"]),
    ("nacht", &["night"]),
    ("woche", &["week"]),
    ("jahr", &["year"]),
    ("immer", &["always"]),
    ("niemals", &["never"]),
    ("vielleicht", &["maybe", "perhaps"]),
    ("zusammen", &["together"]),
    ("arbeit", &["work", "job"]),
    ("schule", &["school"]),
    ("lehrer", &["teacher"]),
    ("schüler", &["pupil", "student"]),
    ("fenster", &["window"]),
    ("tür", &["door"]),
    ("himmel", &["sky", "heaven"]),
    ("wolke", &["cloud"]),
];

/// Target-side words with no source counterpart (NULL-aligned in a
/// lexical model).
pub const TRG_FILLER: [&str; 6] = ["of", "a", "to", "it", "so", "up"];

pub const THIRD_LANG_WORDS: [&str; 48] = [
    "maison", "château", "être", "avec", "très", "jardin", "fenêtre", "français", "déjà",
    "après", "toujours", "jamais", "peut-être", "ensemble", "travail", "école", "maître",
    "élève", "porte", "ciel", "nuage", "aujourd'hui", "demain", "hier", "temps", "pluie",
    "neige", "soleil", "enfants", "jouer", "livre", "lit", "écrit", "journal", "rue",
    "vieux", "nouveau", "ami", "boit", "café", "lait", "pain", "fromage", "soir", "nuit",
    "semaine", "année", "rivière",
];

const DROP_PROB: f64 = 0.12;
const FILLER_PROB: f64 = 0.10;

fn sentence_indices(rng: &mut ChaCha8Rng) -> Vec<usize> {
    let len = rng.gen_range(4..=10);
    (0..len).map(|_| rng.gen_range(0..LEXICON.len())).collect()
}

fn render_pair(rng: &mut ChaCha8Rng) -> (String, String) {
    let idx = sentence_indices(rng);
    let src: Vec<&str> = idx.iter().map(|&i| LEXICON[i].0).collect();
    let mut trg: Vec<&str> = Vec::new();
    for &i in &idx {
        let variants = LEXICON[i].1;
        let word = variants[rng.gen_range(0..variants.len())];
        if rng.gen_bool(DROP_PROB) {
            continue;
        }
        trg.push(word);
        if rng.gen_bool(FILLER_PROB) {
            trg.push(TRG_FILLER[rng.gen_range(0..TRG_FILLER.len())]);
        }
    }
    if trg.is_empty() {
        trg.push(LEXICON[idx[0]].1[0]);
    }
    (src.join(" "), trg.join(" "))
}

/// Line-aligned clean bitext with the translation slack described above.
pub fn gen_clean_bitext(n: usize, seed: u64) -> Vec<SentencePair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|id| {
            let (src_raw, trg_raw) = render_pair(&mut rng);
            SentencePair { id, src_raw, trg_raw }
        })
        .collect()
}

/// Monolingual source-language lines.
pub fn gen_src_lines(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let words: Vec<&str> =
                sentence_indices(&mut rng).iter().map(|&i| LEXICON[i].0).collect();
            words.join(" ")
        })
        .collect()
}

/// Monolingual target-language lines, drawn from the same renderer as
/// clean bitext targets.
pub fn gen_trg_lines(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| render_pair(&mut rng).1).collect()
}

pub fn gen_third_lines(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let len = rng.gen_range(4..=10);
            let words: Vec<&str> = (0..len)
                .map(|_| THIRD_LANG_WORDS[rng.gen_range(0..THIRD_LANG_WORDS.len())])
                .collect();
            words.join(" ")
        })
        .collect()
}

pub fn write_lines(path: impl AsRef<Path>, lines: &[String]) {
    let text: String = lines.iter().map(|l| format!("{l}\n")).collect();
    std::fs::write(path, text).unwrap();
}

pub fn write_bitext(src_path: impl AsRef<Path>, trg_path: impl AsRef<Path>, pairs: &[SentencePair]) {
    let src: String = pairs.iter().map(|p| format!("{}\n", p.src_raw)).collect();
    let trg: String = pairs.iter().map(|p| format!("{}\n", p.trg_raw)).collect();
    std::fs::write(src_path, src).unwrap();
    std::fs::write(trg_path, trg).unwrap();
}

/// Word2vec-style embedding file where each lexicon entry and its target
/// renderings share a nearby latent vector, so translated pairs pool to
/// similar sentence vectors.
pub fn write_embeddings(path: impl AsRef<Path>, seed: u64) {
    const DIM: usize = 16;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lines = Vec::new();
    let mut emit = |word: &str, base: &[f64], rng: &mut ChaCha8Rng| {
        let comps: Vec<String> = base
            .iter()
            .map(|b| format!("{:.6}", b + rng.gen_range(-0.05..0.05)))
            .collect();
        lines.push(format!("{word} {}", comps.join(" ")));
    };
    for (src, variants) in LEXICON {
        let base: Vec<f64> = (0..DIM).map(|_| rng.gen_range(-1.0..1.0)).collect();
        emit(src, &base, &mut rng);
        for trg in variants {
            emit(trg, &base, &mut rng);
        }
    }
    for word in TRG_FILLER.iter().chain(THIRD_LANG_WORDS.iter()) {
        let base: Vec<f64> = (0..DIM).map(|_| rng.gen_range(-1.0..1.0)).collect();
        emit(word, &base, &mut rng);
    }
    write_lines(path, &lines);
}

/// Trains the standard helper models into `dir`: the language identifier,
/// both IBM Model 1 directions, and the in-domain (clean target text)
/// language model. The out-of-domain model depends on the noisy sample at
/// hand, so callers train it themselves.
pub fn train_world_models(dir: &Path) -> WorldModels {
    use parsieve::langid::LangIdModel;
    use parsieve::lexical::train_ibm1;
    use parsieve::ngram::{NGramModel, Smoothing};

    let langid = dir.join("world.langid");
    let mut samples = std::collections::BTreeMap::new();
    samples.insert("de".to_string(), gen_src_lines(800, 101));
    samples.insert("en".to_string(), gen_trg_lines(800, 102));
    samples.insert("fr".to_string(), gen_third_lines(800, 103));
    LangIdModel::train(&samples).unwrap().save(&langid).unwrap();

    let seed_bitext = gen_clean_bitext(2500, 104);
    let ibm1_fwd = dir.join("de-en.ibm1");
    train_ibm1(&seed_bitext, 5).unwrap().save(&ibm1_fwd).unwrap();
    let swapped: Vec<SentencePair> = seed_bitext
        .iter()
        .map(|p| SentencePair {
            id: p.id,
            src_raw: p.trg_raw.clone(),
            trg_raw: p.src_raw.clone(),
        })
        .collect();
    let ibm1_bwd = dir.join("en-de.ibm1");
    train_ibm1(&swapped, 5).unwrap().save(&ibm1_bwd).unwrap();

    let in_lm = dir.join("clean.lm");
    NGramModel::train(&gen_trg_lines(2000, 105), 3, Smoothing::WittenBell)
        .unwrap()
        .save(&in_lm)
        .unwrap();
    WorldModels { langid, ibm1_fwd, ibm1_bwd, in_lm }
}

pub struct WorldModels {
    pub langid: std::path::PathBuf,
    pub ibm1_fwd: std::path::PathBuf,
    pub ibm1_bwd: std::path::PathBuf,
    pub in_lm: std::path::PathBuf,
}
