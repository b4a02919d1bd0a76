//! Averaged perceptron over hashed features.
//!
//! Model file format, one record per line:
//!
//! ```text
//! udlearn-model 1
//! updates <number of averaging steps>
//! labels <count>
//! <label>
//! ...
//! weights <count>
//! <feature hash, 16 hex digits>\t<action>\t<weight>
//! ...
//! ```
//!
//! Actions are written as `SHIFT`, `REDUCE`, `LEFT_ARC:<label>` or
//! `RIGHT_ARC:<label>`. Weight lines are sorted by hash, then action index;
//! zero weights are omitted.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fnv::FnvHashMap;

use super::system::{Action, ActionKind};
use crate::error::{Error, Result};

const MAGIC: &str = "udlearn-model 1";

/// Maps actions to dense indices: SHIFT, REDUCE, LEFT_ARC per label,
/// RIGHT_ARC per label, labels sorted. Index order equals the tie-break
/// order (kind, then label).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSet {
    labels: Vec<String>,
}

impl ActionSet {
    pub fn new(mut labels: Vec<String>) -> Self {
        labels.sort();
        labels.dedup();
        ActionSet { labels }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        2 + 2 * self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }

    pub fn index(&self, kind: ActionKind, label: Option<&str>) -> Option<usize> {
        match kind {
            ActionKind::Shift => Some(0),
            ActionKind::Reduce => Some(1),
            ActionKind::LeftArc => self.label_index(label?).map(|l| 2 + l),
            ActionKind::RightArc => self
                .label_index(label?)
                .map(|l| 2 + self.labels.len() + l),
        }
    }

    pub fn index_of(&self, action: &Action) -> Option<usize> {
        self.index(action.kind, action.label.as_deref())
    }

    pub fn kind(&self, index: usize) -> ActionKind {
        match index {
            0 => ActionKind::Shift,
            1 => ActionKind::Reduce,
            i if i < 2 + self.labels.len() => ActionKind::LeftArc,
            _ => ActionKind::RightArc,
        }
    }

    pub fn action(&self, index: usize) -> Action {
        let n = self.labels.len();
        match index {
            0 => Action::shift(),
            1 => Action::reduce(),
            i if i < 2 + n => Action::left_arc(self.labels[i - 2].clone()),
            i => Action::right_arc(self.labels[i - 2 - n].clone()),
        }
    }

    /// All indices for an action kind.
    pub fn indices(&self, kind: ActionKind) -> std::ops::Range<usize> {
        let n = self.labels.len();
        match kind {
            ActionKind::Shift => 0..1,
            ActionKind::Reduce => 1..2,
            ActionKind::LeftArc => 2..2 + n,
            ActionKind::RightArc => 2 + n..2 + 2 * n,
        }
    }
}

/// Sparse weight table: feature hash -> (action index, weight).
pub type Weights = FnvHashMap<u64, Vec<(u32, f64)>>;

fn score_into(weights: &Weights, features: &[u64], scores: &mut [f64]) {
    for f in features {
        if let Some(row) = weights.get(f) {
            for &(action, w) in row {
                scores[action as usize] += w;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Param {
    weight: f64,
    total: f64,
    stamp: u64,
}

/// Perceptron with lazily maintained weight averages.
///
/// Time advances with [`Perceptron::tick`]; the average is taken over the
/// weight values at the end of each step.
#[derive(Clone, Debug)]
pub struct Perceptron {
    params: FnvHashMap<u64, Vec<(u32, Param)>>,
    steps: u64,
}

impl Default for Perceptron {
    fn default() -> Self {
        Self::new()
    }
}

impl Perceptron {
    pub fn new() -> Self {
        Perceptron {
            params: FnvHashMap::default(),
            steps: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Start a new averaging step.
    pub fn tick(&mut self) {
        self.steps += 1;
    }

    pub fn score(&self, features: &[u64], scores: &mut [f64]) {
        for f in features {
            if let Some(row) = self.params.get(f) {
                for (action, p) in row {
                    scores[*action as usize] += p.weight;
                }
            }
        }
    }

    /// Add `delta` to the weight of every feature for `action`, effective
    /// from the current step on.
    pub fn update(&mut self, features: &[u64], action: usize, delta: f64) {
        let now = self.steps;
        for &f in features {
            let row = self.params.entry(f).or_default();
            let param = match row.iter_mut().find(|(a, _)| *a as usize == action) {
                Some((_, p)) => p,
                None => {
                    row.push((
                        action as u32,
                        Param {
                            weight: 0.0,
                            total: 0.0,
                            stamp: now,
                        },
                    ));
                    &mut row.last_mut().unwrap().1
                }
            };
            // `total` covers steps before `stamp`. Steps before `now` held the
            // old weight; step `now` is folded in with the new one.
            if param.stamp > now {
                param.total -= param.weight;
            } else {
                param.total += param.weight * (now - param.stamp) as f64;
            }
            param.weight += delta;
            param.total += param.weight;
            param.stamp = now + 1;
        }
    }

    /// Current (non-averaged) weights.
    pub fn weights(&self) -> Weights {
        self.collect(|p| p.weight)
    }

    /// Averaged weights over the steps taken so far.
    pub fn averaged(&self) -> Weights {
        let steps = self.steps;
        if steps == 0 {
            return self.weights();
        }
        self.collect(|p| {
            let total = p.total + p.weight * (steps + 1).saturating_sub(p.stamp) as f64;
            total / steps as f64
        })
    }

    fn collect(&self, value: impl Fn(&Param) -> f64) -> Weights {
        let mut out = Weights::default();
        for (&f, row) in &self.params {
            let values: Vec<(u32, f64)> = row
                .iter()
                .map(|(a, p)| (*a, value(p)))
                .filter(|(_, v)| *v != 0.0)
                .collect();
            if !values.is_empty() {
                out.insert(f, values);
            }
        }
        out
    }
}

/// A frozen parsing model.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub actions: ActionSet,
    pub weights: Weights,
    /// Number of averaging steps the weights were averaged over.
    pub updates: u64,
}

impl Model {
    pub fn labels(&self) -> &[String] {
        self.actions.labels()
    }

    pub fn score(&self, features: &[u64], scores: &mut [f64]) {
        score_into(&self.weights, features, scores)
    }

    fn sorted_entries(&self) -> Vec<(u64, u32, f64)> {
        let mut entries: Vec<(u64, u32, f64)> = self
            .weights
            .iter()
            .flat_map(|(&f, row)| row.iter().map(move |&(a, w)| (f, a, w)))
            .filter(|&(_, _, w)| w != 0.0)
            .collect();
        entries.sort_by_key(|&(f, a, _)| (f, a));
        entries
    }

    pub fn to_text(&self) -> String {
        let entries = self.sorted_entries();
        let mut out = String::new();
        let _ = writeln!(out, "{}", MAGIC);
        let _ = writeln!(out, "updates {}", self.updates);
        let _ = writeln!(out, "labels {}", self.labels().len());
        for label in self.labels() {
            let _ = writeln!(out, "{}", label);
        }
        let _ = writeln!(out, "weights {}", entries.len());
        for (f, a, w) in entries {
            let _ = writeln!(out, "{:016x}\t{}\t{}", f, self.actions.action(a as usize), w);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| Error::Model {
                line: 0,
                message: format!("unexpected end of file, expected {}", what),
            })
        };
        let err = |line: usize, message: String| Error::Model { line, message };

        let (line, magic) = next("header")?;
        if magic != MAGIC {
            return Err(err(line, format!("unsupported header {:?}", magic)));
        }

        let count = |line: usize, text: &str, key: &str| -> Result<u64> {
            text.strip_prefix(key)
                .and_then(|rest| rest.trim().parse().ok())
                .ok_or_else(|| err(line, format!("expected `{} <n>`", key.trim())))
        };

        let (line, text) = next("updates")?;
        let updates = count(line, text, "updates ")?;
        let (line, text) = next("labels")?;
        let n_labels = count(line, text, "labels ")? as usize;
        let mut labels = Vec::with_capacity(n_labels);
        for _ in 0..n_labels {
            let (_, label) = next("label")?;
            labels.push(label.to_string());
        }
        let actions = ActionSet::new(labels);
        if actions.labels().len() != n_labels {
            return Err(err(line, "duplicate labels".to_string()));
        }

        let (line, text) = next("weights")?;
        let n_weights = count(line, text, "weights ")? as usize;
        let mut weights = Weights::default();
        for _ in 0..n_weights {
            let (line, text) = next("weight")?;
            let mut fields = text.split('\t');
            let (Some(key), Some(action), Some(weight), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(err(line, "expected 3 tab-separated fields".to_string()));
            };
            let key = u64::from_str_radix(key, 16)
                .map_err(|_| err(line, format!("bad feature key {:?}", key)))?;
            let action: Action = action.parse().map_err(|e| err(line, format!("{}", e)))?;
            let index = actions
                .index_of(&action)
                .ok_or_else(|| err(line, format!("unknown action {}", action)))?;
            let weight: f64 = weight
                .parse()
                .map_err(|_| err(line, format!("bad weight {:?}", weight)))?;
            weights.entry(key).or_default().push((index as u32, weight));
        }

        Ok(Model {
            actions,
            weights,
            updates,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn action_indices() {
        let set = ActionSet::new(vec!["root".into(), "det".into(), "det".into()]);
        assert_eq!(set.len(), 6);
        assert_eq!(set.index(ActionKind::LeftArc, Some("det")), Some(2));
        assert_eq!(set.index(ActionKind::RightArc, Some("root")), Some(5));
        assert_eq!(set.index(ActionKind::RightArc, Some("nsubj")), None);
        for i in 0..set.len() {
            assert_eq!(set.index_of(&set.action(i)), Some(i));
            assert_eq!(set.kind(i), set.action(i).kind);
        }
    }

    #[test]
    fn lazy_average_equals_naive_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut perceptron = Perceptron::new();
        let mut naive: FnvHashMap<(u64, u32), f64> = FnvHashMap::default();
        let mut sums: FnvHashMap<(u64, u32), f64> = FnvHashMap::default();

        for _ in 0..100 {
            perceptron.tick();
            if rng.gen_bool(0.7) {
                // Several updates may land on the same step.
                for _ in 0..rng.gen_range(1..3) {
                    let mut features: Vec<u64> =
                        (0..rng.gen_range(1..5)).map(|_| rng.gen_range(0..8)).collect();
                    features.sort_unstable();
                    features.dedup();
                    let action = rng.gen_range(0..3);
                    let delta = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    perceptron.update(&features, action, delta);
                    for f in features {
                        *naive.entry((f, action as u32)).or_default() += delta;
                    }
                }
            }
            for (k, w) in &naive {
                *sums.entry(*k).or_default() += w;
            }
        }

        let averaged = perceptron.averaged();
        let current = perceptron.weights();
        for ((f, a), sum) in &sums {
            let expected = sum / 100.0;
            let got = averaged
                .get(f)
                .and_then(|row| row.iter().find(|(x, _)| x == a))
                .map_or(0.0, |(_, w)| *w);
            assert!((got - expected).abs() < 1e-9, "{} vs {}", got, expected);
            let w = current
                .get(f)
                .and_then(|row| row.iter().find(|(x, _)| x == a))
                .map_or(0.0, |(_, w)| *w);
            assert_eq!(w, naive[&(*f, *a)]);
        }
    }

    #[test]
    fn text_round_trip() {
        let mut weights = Weights::default();
        weights.insert(0xdead_beef, vec![(0, 0.5), (3, -1.25)]);
        weights.insert(7, vec![(5, 1.0 / 3.0)]);
        let model = Model {
            actions: ActionSet::new(vec!["det".into(), "root".into()]),
            weights,
            updates: 42,
        };
        let text = model.to_text();
        let back = Model::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.updates, 42);
        assert!(text.contains("\tRIGHT_ARC:root\t"));
    }

    #[test]
    fn rejects_bad_header() {
        assert!(Model::from_text("something else\n").is_err());
    }
}
