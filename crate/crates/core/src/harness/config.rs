//! Line-oriented experiment configuration.
//!
//! ```text
//! # comment
//! output = results
//! seeds = 1,2,3
//! transformations = case,mark,det,mwe,name,copula,coordination
//! epochs = 10
//! explore_k = 1
//! explore_p = 0.9
//! jobs = 4
//!
//! [treebank en]
//! train = en/train.conllu
//! dev = en/dev.conllu
//! test = en/test.conllu
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{ComplexityMode, LmUnit, MetricOptions};
use crate::parser::Hyperparameters;
use crate::transform::{TransformationId, COPULA_NOUN_LABELS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreebankSpec {
    pub language: String,
    pub train: PathBuf,
    pub dev: Option<PathBuf>,
    pub test: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub treebanks: Vec<TreebankSpec>,
    pub transformations: Vec<TransformationId>,
    pub seeds: Vec<u64>,
    pub hyperparameters: Hyperparameters,
    pub output: PathBuf,
    /// Concurrent jobs; 0 lets the thread pool decide.
    pub jobs: usize,
    pub copula_noun_labels: Vec<String>,
    pub metrics: MetricOptions,
    /// Rows listed in the top-difference table on each side.
    pub top_k: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            treebanks: Vec::new(),
            transformations: TransformationId::ALL.to_vec(),
            seeds: vec![1, 2, 3],
            hyperparameters: Hyperparameters::default(),
            output: PathBuf::from("results"),
            jobs: 0,
            copula_noun_labels: COPULA_NOUN_LABELS.iter().map(|s| s.to_string()).collect(),
            metrics: MetricOptions::default(),
            top_k: 5,
        }
    }
}

fn config_error(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| config_error(line, format!("invalid value {:?} for {}", value, key)))
}

fn csv(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

#[derive(Default)]
struct PartialTreebank {
    language: String,
    line: usize,
    train: Option<PathBuf>,
    dev: Option<PathBuf>,
    test: Option<PathBuf>,
}

impl PartialTreebank {
    fn finish(self) -> Result<TreebankSpec> {
        let missing = |what: &str| {
            config_error(
                self.line,
                format!("treebank {} has no {} path", self.language, what),
            )
        };
        Ok(TreebankSpec {
            train: self.train.clone().ok_or_else(|| missing("train"))?,
            test: self.test.clone().ok_or_else(|| missing("test"))?,
            dev: self.dev,
            language: self.language,
        })
    }
}

impl ExperimentConfig {
    /// Parse config text; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut current: Option<PartialTreebank> = None;
        let resolve = |p: &str| -> PathBuf {
            let path = PathBuf::from(p);
            if path.is_absolute() {
                path
            } else {
                base.join(path)
            }
        };

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            if let Some(section) = content.strip_prefix('[') {
                let section = section
                    .strip_suffix(']')
                    .ok_or_else(|| config_error(line, "unterminated section header"))?;
                let mut words = section.split_whitespace();
                match (words.next(), words.next(), words.next()) {
                    (Some("treebank"), Some(name), None) => {
                        if let Some(tb) = current.take() {
                            cfg.treebanks.push(tb.finish()?);
                        }
                        if cfg.treebanks.iter().any(|t| t.language == name) {
                            return Err(config_error(line, format!("duplicate treebank {}", name)));
                        }
                        current = Some(PartialTreebank {
                            language: name.to_string(),
                            line,
                            ..Default::default()
                        });
                    }
                    _ => return Err(config_error(line, format!("unknown section [{}]", section))),
                }
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_error(line, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());

            if let Some(tb) = current.as_mut() {
                match key {
                    "train" => tb.train = Some(resolve(value)),
                    "dev" => tb.dev = Some(resolve(value)),
                    "test" => tb.test = Some(resolve(value)),
                    _ => return Err(config_error(line, format!("unknown treebank key {}", key))),
                }
                continue;
            }

            match key {
                "output" => cfg.output = resolve(value),
                "seeds" => {
                    cfg.seeds = csv(value)
                        .map(|s| parse_value(line, key, s))
                        .collect::<Result<_>>()?
                }
                "transformations" => {
                    cfg.transformations = csv(value)
                        .map(|s| parse_value(line, key, s))
                        .collect::<Result<_>>()?
                }
                "epochs" => cfg.hyperparameters.epochs = parse_value(line, key, value)?,
                "explore_k" => cfg.hyperparameters.explore_k = parse_value(line, key, value)?,
                "explore_p" => cfg.hyperparameters.explore_p = parse_value(line, key, value)?,
                "jobs" => cfg.jobs = parse_value(line, key, value)?,
                "top_k" => cfg.top_k = parse_value(line, key, value)?,
                "copula_noun_labels" => {
                    cfg.copula_noun_labels = csv(value).map(str::to_string).collect()
                }
                "lm_unit" => {
                    cfg.metrics.lm_unit = match value {
                        "form" => LmUnit::Form,
                        "upos" => LmUnit::Upos,
                        _ => return Err(config_error(line, format!("unknown lm_unit {}", value))),
                    }
                }
                "complexity" => {
                    cfg.metrics.complexity = match value {
                        "global" => ComplexityMode::Global,
                        "per-sentence" => ComplexityMode::PerSentence,
                        _ => {
                            return Err(config_error(line, format!("unknown complexity {}", value)))
                        }
                    }
                }
                _ => return Err(config_error(line, format!("unknown key {}", key))),
            }
        }
        if let Some(tb) = current.take() {
            cfg.treebanks.push(tb.finish()?);
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    /// Structural checks that need no file access.
    pub fn check(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidArgument("no seeds configured".to_string()));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return Err(Error::InvalidArgument("seeds must be distinct".to_string()));
        }
        let mut ts = self.transformations.clone();
        ts.sort();
        ts.dedup();
        if ts.len() != self.transformations.len() {
            return Err(Error::InvalidArgument(
                "transformations must be distinct".to_string(),
            ));
        }
        if self.hyperparameters.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be at least 1".to_string()));
        }
        Ok(())
    }

    /// Check that every configured path exists.
    pub fn check_paths(&self) -> Result<()> {
        for tb in &self.treebanks {
            let paths = [Some(&tb.train), tb.dev.as_ref(), Some(&tb.test)];
            for path in paths.into_iter().flatten() {
                if !path.is_file() {
                    return Err(Error::InvalidArgument(format!(
                        "treebank {}: {} does not exist",
                        tb.language,
                        path.display()
                    )));
                }
            }
        }
        Ok(())
    }
}
