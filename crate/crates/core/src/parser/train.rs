//! Perceptron training with a dynamic oracle, and greedy decoding.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::feature_hashes;
use super::model::{ActionSet, Model, Perceptron};
use super::oracle::GoldTree;
use super::system::{ActionKind, Configuration};
use crate::error::{Error, Result};
use crate::eval::corpus_uas;
use crate::treebank::Sentence;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub epochs: usize,
    /// Exploration starts after this many epochs.
    pub explore_k: usize,
    /// Probability of following the model's prediction while exploring.
    pub explore_p: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            epochs: 10,
            explore_k: 1,
            explore_p: 0.9,
        }
    }
}

/// Per-epoch training statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub updates: usize,
    pub configurations: usize,
    pub dev_uas: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: Model,
    pub epochs: Vec<EpochStats>,
    /// Epoch whose snapshot was returned.
    pub best_epoch: usize,
}

/// A RIGHT_ARC from the artificial root once it already has a dependent
/// would produce a second root; decoding never allows it.
fn allowed(config: &Configuration, kind: ActionKind) -> bool {
    config.is_valid(kind)
        && !(kind == ActionKind::RightArc
            && config.stack_top() == Some(0)
            && config.has_root_dependent())
}

fn best_index(scores: &[f64], candidates: impl IntoIterator<Item = usize>) -> Option<usize> {
    // Strict comparison keeps the lowest index on ties.
    let mut best: Option<usize> = None;
    for idx in candidates {
        match best {
            Some(b) if scores[idx] <= scores[b] => {}
            _ => best = Some(idx),
        }
    }
    best
}

fn allowed_indices<'a>(
    config: &'a Configuration,
    actions: &'a ActionSet,
) -> impl Iterator<Item = usize> + 'a {
    ActionKind::ALL
        .into_iter()
        .filter(move |&k| allowed(config, k))
        .flat_map(move |k| actions.indices(k))
}

/// Oracle actions: allowed actions of minimal cost, arc actions restricted
/// to the gold relation.
fn oracle_indices(config: &Configuration, gold: &GoldTree, actions: &ActionSet) -> Vec<usize> {
    let before = gold.reachable(config);
    let mut costed: Vec<(usize, usize)> = Vec::new();
    for kind in ActionKind::ALL.into_iter().filter(|&k| allowed(config, k)) {
        let mut next = config.clone();
        next.apply(&super::system::Action {
            kind,
            label: kind.is_arc().then(String::new),
        })
        .expect("allowed action");
        let cost = before - gold.reachable(&next);
        if kind.is_arc() {
            match actions.index(kind, gold.arc_label(config, kind)) {
                Some(idx) => costed.push((idx, cost)),
                // Gold relation unseen in training: any label will do.
                None => costed.extend(actions.indices(kind).map(|idx| (idx, cost))),
            }
        } else {
            costed.extend(actions.indices(kind).map(|idx| (idx, cost)));
        }
    }
    let min = costed.iter().map(|&(_, c)| c).min().unwrap_or(0);
    costed
        .into_iter()
        .filter(|&(_, c)| c == min)
        .map(|(idx, _)| idx)
        .collect()
}

fn label_inventory(sentences: &[Sentence]) -> Vec<String> {
    let mut labels: Vec<String> = sentences
        .iter()
        .flat_map(|s| s.tokens.iter().map(|t| t.deprel.clone()))
        .collect();
    labels.sort();
    labels.dedup();
    labels
}

/// Train a parser and return the averaged model.
pub fn train(
    train_set: &[Sentence],
    dev_set: &[Sentence],
    hp: &Hyperparameters,
    seed: u64,
) -> Result<Model> {
    train_with_stats(train_set, dev_set, hp, seed).map(|outcome| outcome.model)
}

pub fn train_with_stats(
    train_set: &[Sentence],
    dev_set: &[Sentence],
    hp: &Hyperparameters,
    seed: u64,
) -> Result<TrainOutcome> {
    if train_set.is_empty() {
        return Err(Error::InvalidArgument("empty training set".to_string()));
    }
    if hp.epochs < 1 {
        return Err(Error::InvalidArgument("epochs must be at least 1".to_string()));
    }
    if !(0.0..=1.0).contains(&hp.explore_p) {
        return Err(Error::InvalidArgument(format!(
            "exploration probability {} outside [0, 1]",
            hp.explore_p
        )));
    }
    let labels = label_inventory(train_set);
    if labels.is_empty() {
        return Err(Error::InvalidArgument("empty label inventory".to_string()));
    }
    let actions = ActionSet::new(labels);
    let golds: Vec<GoldTree> = train_set.iter().map(GoldTree::new).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perceptron = Perceptron::new();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut scores = vec![0.0; actions.len()];

    let mut stats = Vec::with_capacity(hp.epochs);
    let mut best: Option<(f64, usize, Model)> = None;

    for epoch in 1..=hp.epochs {
        order.shuffle(&mut rng);
        let explore = epoch > hp.explore_k;
        let mut epoch_stats = EpochStats {
            epoch,
            updates: 0,
            configurations: 0,
            dev_uas: None,
        };

        for &idx in &order {
            let sentence = &train_set[idx];
            let gold = &golds[idx];
            let mut config = Configuration::new(sentence.len());
            while !config.is_terminal() {
                let features = feature_hashes(&config, sentence);
                scores.iter_mut().for_each(|s| *s = 0.0);
                perceptron.score(&features, &mut scores);

                let predicted = best_index(&scores, allowed_indices(&config, &actions))
                    .expect("shift is allowed while the buffer is non-empty");
                let oracle = oracle_indices(&config, gold, &actions);
                let best_oracle = best_index(&scores, oracle.iter().copied())
                    .expect("at least one oracle action");

                perceptron.tick();
                epoch_stats.configurations += 1;
                let correct = oracle.contains(&predicted);
                if !correct {
                    perceptron.update(&features, best_oracle, 1.0);
                    perceptron.update(&features, predicted, -1.0);
                    epoch_stats.updates += 1;
                }

                let follow = if correct || (explore && rng.gen_bool(hp.explore_p)) {
                    predicted
                } else {
                    best_oracle
                };
                config
                    .apply(&actions.action(follow))
                    .expect("allowed action");
            }
        }

        let snapshot = Model {
            actions: actions.clone(),
            weights: perceptron.averaged(),
            updates: perceptron.steps(),
        };
        if dev_set.is_empty() {
            best = Some((0.0, epoch, snapshot));
        } else {
            let predicted = parse_corpus(&snapshot, dev_set);
            let uas = corpus_uas(dev_set, &predicted)?.percent();
            epoch_stats.dev_uas = Some(uas);
            if best.as_ref().is_none_or(|(b, _, _)| uas >= *b) {
                best = Some((uas, epoch, snapshot));
            }
        }
        stats.push(epoch_stats);
    }

    let (_, best_epoch, model) = best.expect("at least one epoch");
    Ok(TrainOutcome {
        model,
        epochs: stats,
        best_epoch,
    })
}

/// Greedy decoding. Tokens left headless at the end are attached to the
/// root token, or become the root when there is none.
pub fn parse(model: &Model, sentence: &Sentence) -> Sentence {
    let mut out = sentence.clone();
    out.mwt_ranges = sentence.mwt_ranges.clone();
    let n = sentence.len();
    let mut config = Configuration::new(n);
    let mut scores = vec![0.0; model.actions.len()];
    while !config.is_terminal() {
        let features = feature_hashes(&config, sentence);
        scores.iter_mut().for_each(|s| *s = 0.0);
        model.score(&features, &mut scores);
        let best = best_index(&scores, allowed_indices(&config, &model.actions))
            .expect("shift is allowed while the buffer is non-empty");
        config
            .apply(&model.actions.action(best))
            .expect("allowed action");
    }

    let mut root = config.right_children(0).first().copied();
    for id in 1..=n {
        match config.head(id) {
            Some(head) => out.attach(id, head, config.deprel(id).unwrap_or("dep")),
            None => match root {
                None => {
                    out.attach(id, 0, "root");
                    root = Some(id);
                }
                Some(r) => out.attach(id, r, "dep"),
            },
        }
    }
    out
}

/// Parse sentences concurrently; output order follows input order.
pub fn parse_corpus(model: &Model, sentences: &[Sentence]) -> Vec<Sentence> {
    sentences.par_iter().map(|s| parse(model, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::validate_tree;

    fn sentence() -> Sentence {
        Sentence::from_tuples(&[
            ("the", "DET", 2, "det"),
            ("dog", "NOUN", 3, "nsubj"),
            ("barks", "VERB", 0, "root"),
            ("loudly", "ADV", 3, "advmod"),
            (".", "PUNCT", 3, "punct"),
        ])
    }

    #[test]
    fn memorises_a_repeated_sentence() {
        let corpus = vec![sentence(); 20];
        let hp = Hyperparameters {
            epochs: 5,
            ..Default::default()
        };
        let model = train(&corpus, &[], &hp, 1).unwrap();
        let parsed = parse(&model, &sentence());
        assert!(parsed.same_tree(&sentence()));
    }

    #[test]
    fn deterministic_under_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let corpus = crate::synthetic::toy_corpus(30, &mut rng);
        let hp = Hyperparameters {
            epochs: 3,
            ..Default::default()
        };
        let a = train(&corpus, &[], &hp, 9).unwrap();
        let b = train(&corpus, &[], &hp, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn single_token_parse() {
        let model = Model {
            actions: ActionSet::new(vec!["root".into()]),
            weights: Default::default(),
            updates: 0,
        };
        let s = Sentence::from_tuples(&[("hi", "INTJ", 0, "root")]);
        let parsed = parse(&model, &s);
        assert_eq!(parsed.head(1), 0);
    }

    #[test]
    fn untrained_model_yields_valid_trees() {
        let model = Model {
            actions: ActionSet::new(vec!["dep".into(), "root".into()]),
            weights: Default::default(),
            updates: 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..10 {
            let s = crate::synthetic::random_tree(n, &mut rng);
            assert!(validate_tree(&parse(&model, &s)).ok);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let hp = Hyperparameters::default();
        assert!(train(&[], &[], &hp, 1).is_err());
        let zero = Hyperparameters { epochs: 0, ..hp };
        assert!(train(&[sentence()], &[], &zero, 1).is_err());
    }
}
