//! Declarative scoring-pipeline configuration: a flat keyed-text format
//! with one scorer block per `scorer <name>` line.
//!
//! ```text
//! scorer gate
//! kind langid
//! model models/langid.txt
//! src-lang de
//! trg-lang en
//!
//! scorer adq
//! kind adq
//! fwd-model models/de-en.ibm1
//! bwd-model models/en-de.ibm1
//!
//! scorer dom
//! kind dom
//! in-model models/news.lm
//! out-model models/crawl.lm
//! cutoff 0.25
//! ```
//!
//! Relative paths resolve against the config file's directory. The adq and
//! dom scorers accept `*-entropies` columns in place of `*-model` artifacts
//! so externally computed cross-entropies can replace the built-in
//! backends.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::scores::{AdqConfig, DomConfig};

/// Where a scorer gets its per-sentence cross-entropies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntropySourceSpec {
    /// Model artifact evaluated on the fly.
    Model(PathBuf),
    /// Line-aligned column of precomputed entropies.
    Column(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScorerKindSpec {
    LangId { model: PathBuf, src_lang: String, trg_lang: String },
    Adq { fwd: EntropySourceSpec, bwd: EntropySourceSpec, cfg: AdqConfig },
    Dom { in_domain: EntropySourceSpec, out_domain: EntropySourceSpec, cfg: DomConfig },
    Sim { embeddings: PathBuf },
    External { column: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScorerSpec {
    pub name: String,
    pub kind: ScorerKindSpec,
}

/// Ordered list of scorer specs; order is the evaluation (and TSV column)
/// order, so cheap hard gates belong first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineConfig {
    pub scorers: Vec<ScorerSpec>,
}

struct Block {
    name: String,
    line: usize,
    keys: BTreeMap<String, (usize, String)>,
}

impl Block {
    fn take(&mut self, key: &str) -> Option<String> {
        self.keys.remove(key).map(|(_, v)| v)
    }

    fn require(&mut self, key: &str) -> Result<String> {
        self.take(key).ok_or_else(|| {
            Error::data(format!(
                "scorer {:?} (line {}): missing required key {key:?}",
                self.name, self.line
            ))
        })
    }

    fn take_bool(&mut self, key: &str) -> Result<bool> {
        match self.take(key) {
            None => Ok(false),
            Some(v) => v.parse().map_err(|_| {
                Error::data(format!(
                    "scorer {:?}: key {key} expects true or false, got {v:?}",
                    self.name
                ))
            }),
        }
    }

    /// Exactly one of a `*-model` artifact or a `*-entropies` column.
    fn entropy_source(&mut self, stem: &str, base: &Path) -> Result<EntropySourceSpec> {
        let model_key = format!("{stem}-model");
        let column_key = format!("{stem}-entropies");
        match (self.take(&model_key), self.take(&column_key)) {
            (Some(m), None) => Ok(EntropySourceSpec::Model(resolve(base, &m))),
            (None, Some(c)) => Ok(EntropySourceSpec::Column(resolve(base, &c))),
            (Some(_), Some(_)) => Err(Error::data(format!(
                "scorer {:?}: {model_key} and {column_key} are mutually exclusive",
                self.name
            ))),
            (None, None) => Err(Error::data(format!(
                "scorer {:?}: needs {model_key} or {column_key}",
                self.name
            ))),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some((key, (line, _))) = self.keys.into_iter().next() {
            return Err(Error::data(format!(
                "scorer {:?}: unknown key {key:?} at line {line}",
                self.name
            )));
        }
        Ok(())
    }
}

fn resolve(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl PipelineConfig {
    pub fn load_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses config text; relative artifact paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut blocks: Vec<Block> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let line_no = i + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = match line.split_once(char::is_whitespace) {
                Some((k, v)) => (k, v.trim()),
                None => {
                    return Err(Error::data(format!(
                        "config line {line_no}: expected 'key value', got {line:?}"
                    )))
                }
            };
            if key == "scorer" {
                blocks.push(Block {
                    name: value.to_string(),
                    line: line_no,
                    keys: BTreeMap::new(),
                });
                continue;
            }
            let block = blocks.last_mut().ok_or_else(|| {
                Error::data(format!(
                    "config line {line_no}: key {key:?} before any 'scorer <name>' line"
                ))
            })?;
            if block
                .keys
                .insert(key.to_string(), (line_no, value.to_string()))
                .is_some()
            {
                return Err(Error::data(format!(
                    "config line {line_no}: duplicate key {key:?} in scorer {:?}",
                    block.name
                )));
            }
        }

        let mut scorers = Vec::with_capacity(blocks.len());
        let mut seen = std::collections::BTreeSet::new();
        for mut block in blocks {
            if block.name.is_empty() {
                return Err(Error::data(format!("config line {}: empty scorer name", block.line)));
            }
            if !seen.insert(block.name.clone()) {
                return Err(Error::data(format!(
                    "config line {}: duplicate scorer name {:?}",
                    block.line, block.name
                )));
            }
            let kind_value = block.require("kind")?;
            let kind = match kind_value.as_str() {
                "langid" => ScorerKindSpec::LangId {
                    model: resolve(base, &block.require("model")?),
                    src_lang: block.require("src-lang")?,
                    trg_lang: block.require("trg-lang")?,
                },
                "adq" => {
                    let fwd = block.entropy_source("fwd", base)?;
                    let bwd = block.entropy_source("bwd", base)?;
                    let cfg = AdqConfig {
                        use_abs_difference: !block.take_bool("no-abs-difference")?,
                        use_ce_weighting: !block.take_bool("no-ce-weighting")?,
                    };
                    ScorerKindSpec::Adq { fwd, bwd, cfg }
                }
                "dom" => {
                    let in_domain = block.entropy_source("in", base)?;
                    let out_domain = block.entropy_source("out", base)?;
                    let cutoff = match block.take("cutoff") {
                        None => 0.0,
                        Some(v) => v.parse().map_err(|_| {
                            Error::data(format!(
                                "scorer {:?}: bad cutoff value {v:?}",
                                block.name
                            ))
                        })?,
                    };
                    ScorerKindSpec::Dom { in_domain, out_domain, cfg: DomConfig::new(cutoff)? }
                }
                "sim" => ScorerKindSpec::Sim {
                    embeddings: resolve(base, &block.require("embeddings")?),
                },
                "external" => ScorerKindSpec::External {
                    column: resolve(base, &block.require("column")?),
                },
                other => {
                    return Err(Error::data(format!(
                        "scorer {:?} (line {}): unknown kind {other:?}",
                        block.name, block.line
                    )))
                }
            };
            let name = block.name.clone();
            block.finish()?;
            scorers.push(ScorerSpec { name, kind });
        }
        Ok(PipelineConfig { scorers })
    }
}
