//! Command-line surface for corpus scoring, model training, budgeted
//! selection and the synthetic noise benchmark.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use parsieve::bench::{self, NoiseSpec};
use parsieve::corpus;
use parsieve::error::{Error, Result};
use parsieve::langid::LangIdModel;
use parsieve::lexical;
use parsieve::ngram::{NGramModel, Smoothing};
use parsieve::pipeline::{self, PipelineConfig, ScorerKindSpec};
use parsieve::scores::DomConfig;
use parsieve::selection;

#[derive(Parser)]
#[command(
    name = "parsieve",
    version,
    about = "Score noisy parallel corpora and select the best subset under a word budget"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the character n-gram language identifier from per-language samples.
    TrainLangid {
        /// Language samples as CODE=PATH (at least two).
        #[arg(value_name = "CODE=PATH", required = true)]
        samples: Vec<String>,
        /// Output model path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a word n-gram language model on monolingual text.
    TrainLm {
        /// Training text, one sentence per line.
        #[arg(value_name = "TEXT")]
        text: PathBuf,
        /// N-gram order (1-5).
        #[arg(long, default_value_t = 3)]
        order: usize,
        /// Smoothing: witten-bell or none.
        #[arg(long, default_value = "witten-bell")]
        smoothing: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train an IBM Model 1 table conditioning on --src and predicting --trg.
    TrainIbm1 {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        trg: PathBuf,
        /// EM iterations.
        #[arg(long, default_value_t = lexical::DEFAULT_ITERATIONS)]
        iterations: usize,
        /// Keep the original casing instead of lowercasing internally.
        #[arg(long)]
        no_lowercase: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a corpus with a configured scorer pipeline.
    Score {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        trg: PathBuf,
        /// Per-pair TSV (id, partials, total).
        #[arg(long)]
        out: PathBuf,
        /// Single-column totals file, line-aligned with the corpus.
        #[arg(long)]
        totals: PathBuf,
        /// Scoring threads; 0 uses one per core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Override the cut-off of every dom scorer in the config.
        #[arg(long)]
        cutoff: Option<f64>,
        #[command(flatten)]
        ablation: AblationFlags,
    },
    /// Multiply score columns line by line (values clamped to [0,1]).
    MergeScores {
        #[arg(value_name = "COLUMN", required = true)]
        columns: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select the best-scoring subset reaching a target word budget.
    Select {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        trg: PathBuf,
        /// Target-side word budget.
        #[arg(long)]
        budget_words: u64,
        /// Writes PREFIX.src and PREFIX.trg.
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Corrupt a clean bitext into a labeled noisy benchmark.
    BenchGenerate {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        trg: PathBuf,
        /// Third-language sample for the wrong-language class.
        #[arg(long)]
        third: Option<PathBuf>,
        /// Writes PREFIX.src, PREFIX.trg and PREFIX.labels.
        #[arg(long)]
        out_prefix: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        copy_source: f64,
        #[arg(long, default_value_t = 0.05)]
        wrong_language: f64,
        #[arg(long, default_value_t = 0.05)]
        misaligned: f64,
        #[arg(long, default_value_t = 0.05)]
        truncated_target: f64,
        #[arg(long, default_value_t = 0.05)]
        junk: f64,
    },
    /// Rank a score column against benchmark labels (AUC, precision@k).
    BenchEval {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Top fractions for precision, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.5")]
        precision_at: Vec<f64>,
    },
    /// Summarize a score file (counts, quantiles, optional histogram).
    Stats {
        #[arg(long)]
        scores: PathBuf,
        /// Write a bucket TSV (lower, upper, count) here.
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
}

#[derive(Args)]
struct AblationFlags {
    /// Drop the absolute-difference term from every adq scorer.
    #[arg(long)]
    no_abs_difference: bool,
    /// Drop the average-entropy weighting from every adq scorer.
    #[arg(long)]
    no_ce_weighting: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help/version requests are not usage errors
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::TrainLangid { samples, out } => {
            let mut files = BTreeMap::new();
            for sample in &samples {
                let (code, path) = sample.split_once('=').ok_or_else(|| {
                    Error::usage(format!("expected CODE=PATH, got {sample:?}"))
                })?;
                if files.insert(code.to_string(), PathBuf::from(path)).is_some() {
                    return Err(Error::usage(format!("duplicate language code {code:?}")));
                }
            }
            let model = LangIdModel::train_from_files(&files)?;
            model.save(&out)?;
            eprintln!(
                "trained language identifier for {} languages -> {}",
                files.len(),
                out.display()
            );
            Ok(())
        }
        Command::TrainLm { text, order, smoothing, out } => {
            let smoothing: Smoothing = smoothing.parse()?;
            let model = NGramModel::train_from_file(&text, order, smoothing)?;
            model.save(&out)?;
            eprintln!("trained order-{order} {smoothing} language model -> {}", out.display());
            Ok(())
        }
        Command::TrainIbm1 { src, trg, iterations, no_lowercase, out } => {
            let bitext = corpus::read_bitext_to_vec(&src, &trg)?;
            let model = lexical::train_ibm1_opts(&bitext, iterations, !no_lowercase)?;
            model.save(&out)?;
            eprintln!(
                "trained IBM Model 1 on {} pairs ({iterations} iterations) -> {}",
                bitext.len(),
                out.display()
            );
            Ok(())
        }
        Command::Score { config, src, trg, out, totals, workers, cutoff, ablation } => {
            let mut config = PipelineConfig::load_file(&config)?;
            apply_overrides(&mut config, cutoff, &ablation)?;
            let summary = pipeline::score_corpus(&config, &src, &trg, &out, &totals, workers)?;
            eprintln!(
                "scored {} pairs, {} with total 0 -> {} / {}",
                summary.pairs,
                summary.zero_totals,
                out.display(),
                totals.display()
            );
            if summary.sim_degenerate > 0 {
                eprintln!(
                    "sim: {} pairs had degenerate inputs and scored 0",
                    summary.sim_degenerate
                );
            }
            Ok(())
        }
        Command::MergeScores { columns, out } => {
            let merged = pipeline::merge_scores(&columns, &out)?;
            eprintln!("merged {} columns over {merged} lines -> {}", columns.len(), out.display());
            Ok(())
        }
        Command::Select { scores, src, trg, budget_words, out_prefix } => {
            let out_src = prefixed(&out_prefix, "src");
            let out_trg = prefixed(&out_prefix, "trg");
            let summary =
                selection::select_and_emit(&scores, &src, &trg, &out_src, &out_trg, budget_words)?;
            match summary.threshold {
                Some(t) => println!("threshold {t}"),
                None => println!("threshold none"),
            }
            println!("selected {}", summary.selected_pairs);
            println!("words {}", summary.achieved_words);
            println!("budget {}", summary.budget);
            println!("exhausted {}", summary.exhausted);
            Ok(())
        }
        Command::BenchGenerate {
            src,
            trg,
            third,
            out_prefix,
            seed,
            copy_source,
            wrong_language,
            misaligned,
            truncated_target,
            junk,
        } => {
            let clean = corpus::read_bitext_to_vec(&src, &trg)?;
            let third_lines = match &third {
                Some(path) => corpus::read_lines(path)?,
                None => Vec::new(),
            };
            let spec = NoiseSpec {
                copy_source,
                wrong_language,
                misaligned,
                truncated_target,
                junk,
                seed,
            };
            let (noisy, labels) = bench::generate(&clean, &third_lines, &spec)?;
            let out_src = prefixed(&out_prefix, "src");
            let out_trg = prefixed(&out_prefix, "trg");
            let out_labels = prefixed(&out_prefix, "labels");
            write_corpus_half(&out_src, noisy.iter().map(|p| p.src_raw.as_str()))?;
            write_corpus_half(&out_trg, noisy.iter().map(|p| p.trg_raw.as_str()))?;
            bench::write_labels(&out_labels, &labels)?;
            let corrupted = labels.iter().filter(|&&l| l != bench::NoiseLabel::Clean).count();
            eprintln!(
                "generated {} pairs ({corrupted} corrupted, seed {seed}) -> {}.{{src,trg,labels}}",
                noisy.len(),
                out_prefix.display()
            );
            Ok(())
        }
        Command::BenchEval { scores, labels, precision_at } => {
            let scores = corpus::read_score_file(&scores)?;
            let labels = bench::read_labels(&labels)?;
            let metrics = bench::rank_eval(&scores, &labels, &precision_at)?;
            match metrics.auc {
                Some(auc) => println!("auc {auc}"),
                None => println!("auc undefined (labels are a single class)"),
            }
            for (fraction, precision) in metrics.precision_at {
                println!("precision@{fraction} {precision}");
            }
            Ok(())
        }
        Command::Stats { scores, histogram } => {
            let stats = pipeline::score_stats(&scores)?;
            print!("{}", stats.render());
            if let Some(path) = histogram {
                pipeline::write_histogram(&path, &stats)?;
            }
            Ok(())
        }
    }
}

/// `--cutoff` and the ablation flags override the corresponding settings
/// of every dom / adq scorer in the config.
fn apply_overrides(
    config: &mut PipelineConfig,
    cutoff: Option<f64>,
    ablation: &AblationFlags,
) -> Result<()> {
    let dom_cfg = cutoff.map(DomConfig::new).transpose()?;
    for spec in &mut config.scorers {
        match &mut spec.kind {
            ScorerKindSpec::Dom { cfg, .. } => {
                if let Some(over) = dom_cfg {
                    *cfg = over;
                }
            }
            ScorerKindSpec::Adq { cfg, .. } => {
                if ablation.no_abs_difference {
                    cfg.use_abs_difference = false;
                }
                if ablation.no_ce_weighting {
                    cfg.use_ce_weighting = false;
                }
            }
            _ => {}
        }
    }
    Ok(())
}

fn prefixed(prefix: &std::path::Path, ext: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_os_string();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}

fn write_corpus_half<'a>(
    path: &std::path::Path,
    lines: impl Iterator<Item = &'a str>,
) -> Result<()> {
    use std::io::Write as _;
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for line in lines {
        writeln!(out, "{line}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
