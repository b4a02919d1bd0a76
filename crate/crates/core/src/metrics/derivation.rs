//! Metrics computed from gold arc-eager derivations.

use rayon::prelude::*;

use super::lm::WittenBell;
use super::suffix_tree::count_distinct_substrings;
use crate::parser::oracle::static_oracle_derivation;
use crate::parser::system::{ActionKind, Configuration};
use crate::treebank::Sentence;

/// Token ids in the order the gold derivation attaches them to their head.
/// Tokens the derivation never attaches follow in surface order.
pub fn derivation_order_ids(sentence: &Sentence) -> Vec<usize> {
    let derivation = static_oracle_derivation(sentence);
    let mut config = Configuration::new(sentence.len());
    let mut order = Vec::with_capacity(sentence.len());
    for action in &derivation.actions {
        match action.kind {
            ActionKind::LeftArc => order.push(config.stack_top().expect("non-empty stack")),
            ActionKind::RightArc => order.push(config.buffer_at(0).expect("non-empty buffer")),
            _ => {}
        }
        config.apply(action).expect("oracle actions are valid");
    }
    order.extend((1..=sentence.len()).filter(|&id| !config.has_head(id)));
    order
}

/// Word forms in attachment order.
pub fn derivation_order(sentence: &Sentence) -> Vec<String> {
    derivation_order_ids(sentence)
        .into_iter()
        .map(|id| sentence.token(id).form.clone())
        .collect()
}

/// What the reordered language model is estimated on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LmUnit {
    #[default]
    Form,
    Upos,
}

/// Self-perplexity of a Witten-Bell trigram model over attachment-ordered
/// sentences.
pub fn derivation_perplexity(corpus: &[Sentence], unit: LmUnit) -> f64 {
    let reordered: Vec<Vec<String>> = corpus
        .par_iter()
        .map(|s| {
            derivation_order_ids(s)
                .into_iter()
                .map(|id| {
                    let t = s.token(id);
                    match unit {
                        LmUnit::Form => t.form.clone(),
                        LmUnit::Upos => t.upos.clone(),
                    }
                })
                .collect()
        })
        .collect();
    WittenBell::train(&reordered).perplexity(&reordered)
}

/// How derivation substrings are aggregated over a corpus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplexityMode {
    /// Distinct substrings over the whole corpus.
    #[default]
    Global,
    /// Sum of per-sentence distinct substring counts.
    PerSentence,
}

/// Action-kind strings over `{S, R, L, A}`, one per sentence.
pub fn derivation_strings(corpus: &[Sentence]) -> Vec<Vec<char>> {
    corpus
        .par_iter()
        .map(|s| static_oracle_derivation(s).kinds().chars().collect())
        .collect()
}

pub fn derivation_complexity(corpus: &[Sentence], mode: ComplexityMode) -> u64 {
    let strings = derivation_strings(corpus);
    match mode {
        ComplexityMode::Global => count_distinct_substrings(&strings),
        ComplexityMode::PerSentence => strings
            .iter()
            .map(|s| count_distinct_substrings(std::slice::from_ref(s)))
            .sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn the_book() -> Sentence {
        Sentence::from_tuples(&[("the", "DET", 2, "det"), ("book", "NOUN", 0, "root")])
    }

    #[test]
    fn order_of_the_book() {
        assert_eq!(derivation_order(&the_book()), vec!["the", "book"]);
        let one = Sentence::from_tuples(&[("hi", "INTJ", 0, "root")]);
        assert_eq!(derivation_order(&one), vec!["hi"]);
    }

    #[test]
    fn complexity_of_the_book() {
        assert_eq!(derivation_complexity(&[the_book()], ComplexityMode::Global), 6);
        let twice = vec![the_book(), the_book()];
        assert_eq!(derivation_complexity(&twice, ComplexityMode::Global), 6);
        assert_eq!(derivation_complexity(&twice, ComplexityMode::PerSentence), 12);
    }

    #[test]
    fn nonprojective_order_is_a_permutation() {
        // Arcs 1 -> 4 and 4 -> 2 cross 3.
        let s = Sentence::from_tuples(&[
            ("a", "X", 3, "dep"),
            ("b", "X", 4, "dep"),
            ("c", "X", 0, "root"),
            ("d", "X", 1, "dep"),
        ]);
        let mut ids = derivation_order_ids(&s);
        ids.sort();
        assert_eq!(ids, vec![1, 2, 3, 4]);
    }
}
