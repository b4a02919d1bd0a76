//! Tree-shape metrics: dependency distance and POS predictability.

use std::collections::BTreeMap;

use crate::treebank::Sentence;

/// Head tag used for dependents of the artificial root.
pub const ROOT_TAG: &str = "ROOT";

/// Mean `|head - dependent|` over arcs not headed by the artificial root.
/// `None` when the corpus has no such arc.
pub fn avg_dependency_distance(corpus: &[Sentence]) -> Option<f64> {
    let (sum, count) = corpus
        .iter()
        .flat_map(|s| s.tokens.iter())
        .filter(|t| t.head != 0)
        .fold((0usize, 0usize), |(sum, count), t| {
            (sum + t.head.abs_diff(t.id), count + 1)
        });
    (count > 0).then(|| sum as f64 / count as f64)
}

/// Joint counts of (head UPOS, dependent UPOS).
pub fn pos_pair_counts(corpus: &[Sentence]) -> BTreeMap<(String, String), usize> {
    let mut counts = BTreeMap::new();
    for sentence in corpus {
        for token in &sentence.tokens {
            let head = if token.head == 0 {
                ROOT_TAG.to_string()
            } else {
                sentence.token(token.head).upos.clone()
            };
            *counts.entry((head, token.upos.clone())).or_insert(0) += 1;
        }
    }
    counts
}

/// Conditional entropy H(dependent POS | head POS) in bits.
pub fn pos_predictability(corpus: &[Sentence]) -> f64 {
    conditional_entropy(&pos_pair_counts(corpus))
}

/// H(D | H) in bits from joint `(h, d)` counts, maximum-likelihood estimates.
pub fn conditional_entropy(joint: &BTreeMap<(String, String), usize>) -> f64 {
    let total: usize = joint.values().sum();
    if total == 0 {
        return 0.0;
    }
    let mut marginal: BTreeMap<&str, usize> = BTreeMap::new();
    for ((h, _), c) in joint {
        *marginal.entry(h.as_str()).or_insert(0) += c;
    }
    let entropy: f64 = joint
        .iter()
        .map(|((h, _), &c)| {
            let p_joint = c as f64 / total as f64;
            let p_cond = c as f64 / marginal[h.as_str()] as f64;
            -p_joint * p_cond.log2()
        })
        .sum();
    // Clamp the -0.0 produced by deterministic conditionals.
    entropy.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances() {
        let book = Sentence::from_tuples(&[("the", "DET", 2, "det"), ("book", "NOUN", 0, "root")]);
        assert_eq!(avg_dependency_distance(&[book]), Some(1.0));
        let s = Sentence::from_tuples(&[("a", "X", 3, "dep"), ("b", "X", 3, "dep"), ("c", "X", 0, "root")]);
        assert_eq!(avg_dependency_distance(&[s]), Some(1.5));
        let single = Sentence::from_tuples(&[("a", "X", 0, "root")]);
        assert_eq!(avg_dependency_distance(&[single]), None);
    }

    #[test]
    fn entropy_one_bit() {
        let s = Sentence::from_tuples(&[
            ("a", "DET", 3, "det"),
            ("b", "ADJ", 3, "amod"),
            ("c", "NOUN", 0, "root"),
        ]);
        // NOUN -> {DET, ADJ} and ROOT -> NOUN: H = 2/3 * 1 bit.
        assert!((pos_predictability(&[s]) - 2.0 / 3.0).abs() < 1e-12);
    }
}
