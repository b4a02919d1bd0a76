//! Grid execution with an on-disk cache.

use std::fs;
use std::hash::Hasher;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use fnv::FnvHasher;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, TreebankSpec};
use crate::error::{Error, Result};
use crate::eval::{compare_schemes, corpus_uas, metric_coherence, ComparisonRow, CoherenceRow};
use crate::metrics::MetricReport;
use crate::parser::{parse_corpus, train, Model};
use crate::transform::{apply_transformation_with, TransformOptions, TransformationId};
use crate::treebank::{parse_conllu, Sentence};

const CACHE_VERSION: &str = "udlearn-cache-1";

/// Outcome of one (treebank, transformation) configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub fingerprint: String,
    pub row: ComparisonRow,
    pub ud_seed_uas: Vec<f64>,
    pub transformed_seed_uas: Vec<f64>,
    /// Trigger arcs rewritten in the training split.
    pub arcs_rewritten: usize,
    pub repairs_applied: usize,
    pub ud_metrics: Option<MetricReport>,
    pub transformed_metrics: Option<MetricReport>,
    /// Per metric: coherent, incoherent, or skipped on a UAS tie.
    pub coherence: Vec<(String, Option<bool>)>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: usize,
    pub excluded: usize,
    pub errors: usize,
    /// Rows with a difference value.
    pub compared: usize,
    pub positive: usize,
    pub negative: usize,
    pub ties: usize,
    pub mean_abs_diff: Option<f64>,
    pub max_abs_diff: Option<f64>,
    /// `positive / (positive + negative)`.
    pub fraction_ud_better: Option<f64>,
}

impl Summary {
    pub fn from_rows<'a>(rows: impl IntoIterator<Item = (&'a ComparisonRow, bool)>) -> Self {
        let mut s = Summary::default();
        let mut abs_sum = 0.0;
        for (row, failed) in rows {
            s.rows += 1;
            if failed {
                s.errors += 1;
                continue;
            }
            if row.excluded {
                s.excluded += 1;
                continue;
            }
            let Some(diff) = row.diff else { continue };
            s.compared += 1;
            abs_sum += diff.abs();
            s.max_abs_diff = Some(s.max_abs_diff.map_or(diff.abs(), |m: f64| m.max(diff.abs())));
            if diff > 0.0 {
                s.positive += 1;
            } else if diff < 0.0 {
                s.negative += 1;
            } else {
                s.ties += 1;
            }
        }
        if s.compared > 0 {
            s.mean_abs_diff = Some(abs_sum / s.compared as f64);
        }
        if s.positive + s.negative > 0 {
            s.fraction_ud_better = Some(s.positive as f64 / (s.positive + s.negative) as f64);
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub cells: Vec<CellResult>,
    pub coherence: Vec<CoherenceRow>,
    pub summary: Summary,
    /// Parser trainings executed by this run (cache hits excluded).
    #[serde(skip)]
    pub trainings_executed: usize,
    #[serde(skip)]
    pub cells_from_cache: usize,
}

impl ExperimentReport {
    pub fn from_cells(cells: Vec<CellResult>) -> Self {
        let summary = Summary::from_rows(cells.iter().map(|c| (&c.row, c.error.is_some())));
        let coherence = coherence_table(&cells);
        ExperimentReport {
            cells,
            coherence,
            summary,
            trainings_executed: 0,
            cells_from_cache: 0,
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = &ComparisonRow> {
        self.cells.iter().map(|c| &c.row)
    }
}

pub const METRIC_NAMES: [&str; 4] = [
    "distance",
    "predictability",
    "derivation_complexity",
    "derivation_perplexity",
];

fn coherence_table(cells: &[CellResult]) -> Vec<CoherenceRow> {
    METRIC_NAMES
        .iter()
        .map(|&name| {
            let mut row = CoherenceRow {
                metric: name.to_string(),
                coherent: 0,
                evaluated: 0,
                ties: 0,
                fraction: None,
            };
            for cell in cells.iter().filter(|c| c.error.is_none() && !c.row.excluded) {
                if let Some((_, verdict)) = cell.coherence.iter().find(|(m, _)| m == name) {
                    match verdict {
                        Some(c) => {
                            row.evaluated += 1;
                            row.coherent += usize::from(*c);
                        }
                        None => row.ties += 1,
                    }
                }
            }
            if row.evaluated > 0 {
                row.fraction = Some(row.coherent as f64 / row.evaluated as f64);
            }
            row
        })
        .collect()
}

struct LoadedTreebank {
    spec: TreebankSpec,
    /// Raw file contents, used for fingerprints.
    raw: [String; 3],
    corpora: Result<[Vec<Sentence>; 3]>,
}

fn load_treebank(spec: &TreebankSpec) -> LoadedTreebank {
    let read = |p: Option<&PathBuf>| -> Result<String> {
        match p {
            Some(p) => Ok(fs::read_to_string(p)?),
            None => Ok(String::new()),
        }
    };
    let mut raw = [String::new(), String::new(), String::new()];
    let corpora = (|| {
        raw[0] = read(Some(&spec.train))?;
        raw[1] = read(spec.dev.as_ref())?;
        raw[2] = read(Some(&spec.test))?;
        let train = parse_conllu(&raw[0]).map_err(|e| file_error(&spec.train, e))?;
        let dev = match &spec.dev {
            Some(p) => parse_conllu(&raw[1]).map_err(|e| file_error(p, e))?,
            None => Vec::new(),
        };
        let test = parse_conllu(&raw[2]).map_err(|e| file_error(&spec.test, e))?;
        if train.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{}: no sentences",
                spec.train.display()
            )));
        }
        Ok([train, dev, test])
    })();
    LoadedTreebank {
        spec: spec.clone(),
        raw,
        corpora,
    }
}

fn file_error(path: &Path, e: Error) -> Error {
    Error::InvalidArgument(format!("{}: {}", path.display(), e))
}

fn fingerprint(parts: &[&str]) -> String {
    let mut h = FnvHasher::default();
    for p in parts {
        h.write(p.as_bytes());
        h.write_u8(0xff);
    }
    format!("{:016x}", h.finish())
}

fn hp_key(cfg: &ExperimentConfig) -> String {
    serde_json::to_string(&cfg.hyperparameters).expect("serialisable")
}

fn ud_fingerprint(cfg: &ExperimentConfig, tb: &LoadedTreebank, seed: u64) -> String {
    fingerprint(&[
        CACHE_VERSION,
        "ud",
        &tb.raw[0],
        &tb.raw[1],
        &hp_key(cfg),
        &seed.to_string(),
    ])
}

fn cell_fingerprint(cfg: &ExperimentConfig, tb: &LoadedTreebank, t: TransformationId) -> String {
    let seeds: Vec<String> = cfg.seeds.iter().map(u64::to_string).collect();
    fingerprint(&[
        CACHE_VERSION,
        "cell",
        &tb.spec.language,
        t.name(),
        &tb.raw[0],
        &tb.raw[1],
        &tb.raw[2],
        &hp_key(cfg),
        &seeds.join(","),
        &cfg.copula_noun_labels.join(","),
        &serde_json::to_string(&cfg.metrics).expect("serialisable"),
    ])
}

fn safe_name(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Cached UD-side result for one (treebank, seed).
#[derive(Serialize, Deserialize)]
struct UdEntry {
    fingerprint: String,
    uas: f64,
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    cache: PathBuf,
    trainings: AtomicUsize,
}

impl Runner<'_> {
    fn cell_path(&self, language: &str, t: TransformationId) -> PathBuf {
        self.cache
            .join(format!("cell-{}-{}.json", safe_name(language), t.name()))
    }

    fn cached_cell(&self, tb: &LoadedTreebank, t: TransformationId) -> Option<CellResult> {
        tb.corpora.as_ref().ok()?;
        let text = fs::read_to_string(self.cell_path(&tb.spec.language, t)).ok()?;
        let cell: CellResult = serde_json::from_str(&text).ok()?;
        (cell.fingerprint == cell_fingerprint(self.cfg, tb, t)).then_some(cell)
    }

    fn train_counted(&self, train_set: &[Sentence], dev: &[Sentence], seed: u64) -> Result<Model> {
        let model = train(train_set, dev, &self.cfg.hyperparameters, seed)?;
        self.trainings.fetch_add(1, Ordering::Relaxed);
        Ok(model)
    }

    /// Test UAS of the UD-side model, trained or read from the cache.
    fn ud_uas(&self, tb: &LoadedTreebank, seed: u64) -> Result<f64> {
        let [train_set, dev, test] = tb.corpora.as_ref().map_err(clone_error)?;
        let fp = ud_fingerprint(self.cfg, tb, seed);
        let stem = format!("ud-{}-seed{}", safe_name(&tb.spec.language), seed);
        let entry_path = self.cache.join(format!("{}.json", stem));
        if let Ok(text) = fs::read_to_string(&entry_path) {
            if let Ok(entry) = serde_json::from_str::<UdEntry>(&text) {
                if entry.fingerprint == fp {
                    return Ok(entry.uas);
                }
            }
        }
        let model = self.train_counted(train_set, dev, seed)?;
        let uas = corpus_uas(test, &parse_corpus(&model, test))?.percent();
        model.save(self.cache.join(format!("{}.model", stem)))?;
        let entry = UdEntry {
            fingerprint: fp,
            uas,
        };
        fs::write(&entry_path, serde_json::to_string_pretty(&entry)?)?;
        Ok(uas)
    }

    fn run_cell(
        &self,
        tb: &LoadedTreebank,
        t: TransformationId,
        ud: &Result<(Vec<f64>, MetricReport)>,
    ) -> Result<CellResult> {
        let [train_set, dev, test] = tb.corpora.as_ref().map_err(clone_error)?;
        let (ud_uas, ud_metrics) = ud.as_ref().map_err(clone_error)?;
        let options = TransformOptions {
            copula_noun_labels: self.cfg.copula_noun_labels.clone(),
        };
        let tt = apply_transformation_with(train_set, t, &options)?;
        let td = apply_transformation_with(dev, t, &options)?;
        let ts = apply_transformation_with(test, t, &options)?;
        let excluded = !(tt.changed || td.changed || ts.changed);
        let language = &tb.spec.language;

        let mut cell = CellResult {
            fingerprint: cell_fingerprint(self.cfg, tb, t),
            row: compare_schemes(language, t, &[], &[], true)?,
            ud_seed_uas: ud_uas.clone(),
            transformed_seed_uas: Vec::new(),
            arcs_rewritten: tt.arcs_rewritten,
            repairs_applied: tt.repairs_applied,
            ud_metrics: Some(ud_metrics.clone()),
            transformed_metrics: None,
            coherence: Vec::new(),
            error: None,
        };
        if excluded {
            return Ok(cell);
        }

        for &seed in &self.cfg.seeds {
            let model = self.train_counted(&tt.sentences, &td.sentences, seed)?;
            let predicted = parse_corpus(&model, &ts.sentences);
            cell.transformed_seed_uas
                .push(corpus_uas(&ts.sentences, &predicted)?.percent());
        }
        cell.row = compare_schemes(language, t, ud_uas, &cell.transformed_seed_uas, false)?;
        let transformed_metrics = MetricReport::compute(
            &format!("{}/{}", language, t.name()),
            &tt.sentences,
            self.cfg.metrics,
        );
        let uas_pair = (
            cell.row.uas_ud.expect("compared row"),
            cell.row.uas_transformed.expect("compared row"),
        );
        for ((name, a), (_, b)) in ud_metrics.values().into_iter().zip(transformed_metrics.values()) {
            let verdict = match (a, b) {
                (Some(a), Some(b)) => metric_coherence((a, b), uas_pair),
                _ => None,
            };
            cell.coherence.push((name.to_string(), verdict));
        }
        cell.transformed_metrics = Some(transformed_metrics);
        Ok(cell)
    }
}

/// `Error` is not `Clone`; shared failures are re-reported by message.
fn clone_error(e: &Error) -> Error {
    Error::InvalidArgument(e.to_string())
}

fn failed_cell(language: &str, t: TransformationId, e: &Error) -> CellResult {
    CellResult {
        fingerprint: String::new(),
        row: ComparisonRow {
            language: language.to_string(),
            transformation: t,
            uas_ud: None,
            uas_transformed: None,
            diff: None,
            excluded: false,
        },
        ud_seed_uas: Vec::new(),
        transformed_seed_uas: Vec::new(),
        arcs_rewritten: 0,
        repairs_applied: 0,
        ud_metrics: None,
        transformed_metrics: None,
        coherence: Vec::new(),
        error: Some(e.to_string()),
    }
}

/// Run every (treebank, transformation) cell. Completed cells found in the
/// cache with a matching fingerprint are reused; failures are recorded per
/// cell.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.check()?;
    let cache = cfg.output.join("cache");
    fs::create_dir_all(&cache)?;
    let runner = Runner {
        cfg,
        cache,
        trainings: AtomicUsize::new(0),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {}", e)))?;

    pool.install(|| {
        let treebanks: Vec<LoadedTreebank> = cfg.treebanks.par_iter().map(load_treebank).collect();

        let cached: Vec<Vec<Option<CellResult>>> = treebanks
            .iter()
            .map(|tb| {
                cfg.transformations
                    .iter()
                    .map(|&t| runner.cached_cell(tb, t))
                    .collect()
            })
            .collect();
        let needs_ud: Vec<bool> = cached
            .iter()
            .map(|cells| cells.iter().any(Option::is_none))
            .collect();

        let ud_jobs: Vec<(usize, u64)> = (0..treebanks.len())
            .filter(|&i| needs_ud[i] && treebanks[i].corpora.is_ok())
            .flat_map(|i| cfg.seeds.iter().map(move |&s| (i, s)))
            .collect();
        let ud_scores: Vec<Result<f64>> = ud_jobs
            .par_iter()
            .map(|&(i, seed)| runner.ud_uas(&treebanks[i], seed))
            .collect();
        let ud_metrics: Vec<Option<MetricReport>> = treebanks
            .par_iter()
            .enumerate()
            .map(|(i, tb)| {
                let corpora = tb.corpora.as_ref().ok().filter(|_| needs_ud[i])?;
                Some(MetricReport::compute(&tb.spec.language, &corpora[0], cfg.metrics))
            })
            .collect();

        let ud: Vec<Result<(Vec<f64>, MetricReport)>> = (0..treebanks.len())
            .map(|i| {
                if let Err(e) = &treebanks[i].corpora {
                    return Err(clone_error(e));
                }
                let scores = ud_jobs
                    .iter()
                    .zip(&ud_scores)
                    .filter(|((j, _), _)| *j == i)
                    .map(|(_, r)| r.as_ref().copied().map_err(clone_error))
                    .collect::<Result<Vec<f64>>>()?;
                let metrics = ud_metrics[i]
                    .clone()
                    .ok_or_else(|| Error::InvalidArgument("UD side not computed".to_string()))?;
                Ok((scores, metrics))
            })
            .collect();

        let jobs: Vec<(usize, TransformationId)> = treebanks
            .iter()
            .enumerate()
            .flat_map(|(i, _)| cfg.transformations.iter().map(move |&t| (i, t)))
            .collect();
        let from_cache = AtomicUsize::new(0);
        let cells: Vec<CellResult> = jobs
            .par_iter()
            .enumerate()
            .map(|(k, &(i, t))| {
                let tb = &treebanks[i];
                if let Some(cell) = &cached[i][k % cfg.transformations.len()] {
                    from_cache.fetch_add(1, Ordering::Relaxed);
                    return cell.clone();
                }
                match runner.run_cell(tb, t, &ud[i]) {
                    Ok(cell) => {
                        let path = runner.cell_path(&tb.spec.language, t);
                        if let Err(e) = serde_json::to_string_pretty(&cell)
                            .map_err(Error::from)
                            .and_then(|text| fs::write(&path, text).map_err(Error::from))
                        {
                            return failed_cell(&tb.spec.language, t, &e);
                        }
                        cell
                    }
                    Err(e) => failed_cell(&tb.spec.language, t, &e),
                }
            })
            .collect();

        let mut report = ExperimentReport::from_cells(cells);
        report.trainings_executed = runner.trainings.load(Ordering::Relaxed);
        report.cells_from_cache = from_cache.load(Ordering::Relaxed);
        Ok(report)
    })
}
