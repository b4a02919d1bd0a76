//! Rewrites from the UD content-head scheme to function-head alternatives.
//!
//! Seven transformations exist. CASE, MARK and DET invert a single labelled
//! arc. MWE and NAME turn a flat head-initial sequence into a chain. COPULA
//! promotes the copula or passive auxiliary, and COORDINATION makes the
//! first coordinating conjunction the head of the coordination.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::treebank::{validate_tree, Sentence};

/// Dependents of a copula head that stay on the noun when the copula is
/// promoted.
pub const COPULA_NOUN_LABELS: &[&str] = &["det", "amod", "nmod", "case", "nummod", "acl", "appos"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformationId {
    Case,
    Mark,
    Det,
    Mwe,
    Name,
    Copula,
    Coordination,
}

impl TransformationId {
    pub const ALL: [TransformationId; 7] = [
        TransformationId::Case,
        TransformationId::Mark,
        TransformationId::Det,
        TransformationId::Mwe,
        TransformationId::Name,
        TransformationId::Copula,
        TransformationId::Coordination,
    ];

    /// Relations that trigger the transformation.
    pub fn trigger_labels(self) -> &'static [&'static str] {
        match self {
            TransformationId::Case => &["case"],
            TransformationId::Mark => &["mark"],
            TransformationId::Det => &["det"],
            TransformationId::Mwe => &["mwe", "goeswith"],
            TransformationId::Name => &["name"],
            TransformationId::Copula => &["cop", "auxpass"],
            TransformationId::Coordination => &["cc", "conj"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TransformationId::Case => "case",
            TransformationId::Mark => "mark",
            TransformationId::Det => "det",
            TransformationId::Mwe => "mwe",
            TransformationId::Name => "name",
            TransformationId::Copula => "copula",
            TransformationId::Coordination => "coordination",
        }
    }
}

impl fmt::Display for TransformationId {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TransformationId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let id = match s.trim().to_ascii_lowercase().as_str() {
            "case" => TransformationId::Case,
            "mark" => TransformationId::Mark,
            "det" => TransformationId::Det,
            "mwe" => TransformationId::Mwe,
            "name" => TransformationId::Name,
            "copula" | "cop" => TransformationId::Copula,
            "coordination" | "cc" | "conjunction" => TransformationId::Coordination,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown transformation {:?}",
                    other
                )))
            }
        };
        Ok(id)
    }
}

/// The tokens involved in one head/dependent swap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InversionContext {
    /// Former head of `w_i` (0 for the artificial root).
    pub w_h: usize,
    /// Original head of the inverted arc.
    pub w_i: usize,
    /// Original dependent, promoted to head.
    pub w_j: usize,
    /// Children of `w_i` still attached to it after the swap.
    pub w_k_set: Vec<usize>,
}

/// One sentence after a rewrite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rewrite {
    pub sentence: Sentence,
    pub arcs_rewritten: usize,
    pub repairs_applied: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Counts {
    arcs_rewritten: usize,
    repairs_applied: usize,
}

impl Counts {
    fn into_rewrite(self, sentence: Sentence) -> Rewrite {
        Rewrite {
            sentence,
            arcs_rewritten: self.arcs_rewritten,
            repairs_applied: self.repairs_applied,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformResult {
    pub sentences: Vec<Sentence>,
    pub changed: bool,
    pub arcs_rewritten: usize,
    pub repairs_applied: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformOptions {
    pub copula_noun_labels: Vec<String>,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions {
            copula_noun_labels: COPULA_NOUN_LABELS.iter().map(|l| l.to_string()).collect(),
        }
    }
}

fn has_label(labels: &[&str], deprel: &str) -> bool {
    labels.contains(&deprel)
}

/// Pick the dependent nearest to `head`, leftmost on ties.
fn nearest(head: usize, candidates: &[usize]) -> usize {
    *candidates
        .iter()
        .min_by_key(|&&c| (c.abs_diff(head), c))
        .expect("non-empty candidate list")
}

/// Trigger arcs grouped by original head: `(head, primary, others)`,
/// ordered by the position of the primary dependent.
fn trigger_groups(sentence: &Sentence, labels: &[&str]) -> Vec<(usize, usize, Vec<usize>)> {
    let mut by_head: Vec<(usize, Vec<usize>)> = Vec::new();
    for token in &sentence.tokens {
        if !has_label(labels, &token.deprel) {
            continue;
        }
        match by_head.iter_mut().find(|(h, _)| *h == token.head) {
            Some((_, deps)) => deps.push(token.id),
            None => by_head.push((token.head, vec![token.id])),
        }
    }

    let mut groups: Vec<(usize, usize, Vec<usize>)> = by_head
        .into_iter()
        // An arc from the artificial root has no head token to demote.
        .filter(|(head, _)| *head != 0)
        .map(|(head, deps)| {
            let primary = nearest(head, &deps);
            let others = deps.into_iter().filter(|&d| d != primary).collect();
            (head, primary, others)
        })
        .collect();
    groups.sort_by_key(|(_, primary, _)| *primary);
    groups
}

/// Drop the parts of a group an earlier rewrite already moved. `None` when
/// the primary arc itself no longer exists.
fn live_group(
    sentence: &Sentence,
    labels: &[&str],
    (w_i, w_j, others): (usize, usize, Vec<usize>),
) -> Option<(usize, usize, Vec<usize>)> {
    let intact = |d: usize| sentence.head(d) == w_i && has_label(labels, sentence.deprel(d));
    if !intact(w_j) {
        return None;
    }
    let others = others.into_iter().filter(|&d| intact(d)).collect();
    Some((w_i, w_j, others))
}

/// Swap `w_i` and `w_j`: `w_j` takes the incoming arc of `w_i`, and `w_i`
/// attaches to `w_j` with the label the arc `w_i -> w_j` had.
fn swap(sentence: &mut Sentence, w_i: usize, w_j: usize) -> InversionContext {
    let w_h = sentence.head(w_i);
    let incoming = sentence.deprel(w_i).to_string();
    let label = sentence.deprel(w_j).to_string();
    sentence.attach(w_j, w_h, incoming);
    sentence.attach(w_i, w_j, label);
    InversionContext {
        w_h,
        w_i,
        w_j,
        w_k_set: sentence.children(w_i),
    }
}

/// Reattach to `w_j` every remaining child `w_k` of `w_i` such that `w_j`
/// lies strictly between `w_k` and `w_i`. Returns the number of moved
/// children.
pub fn repair_projectivity(sentence: &mut Sentence, ctx: &InversionContext) -> usize {
    let (i, j) = (ctx.w_i, ctx.w_j);
    let mut moved = 0;
    for &k in &ctx.w_k_set {
        if sentence.head(k) != i {
            continue;
        }
        if (k < j && j < i) || (i < j && j < k) {
            let deprel = sentence.deprel(k).to_string();
            sentence.attach(k, j, deprel);
            moved += 1;
        }
    }
    moved
}

fn invert_in_place(sentence: &mut Sentence, labels: &[&str]) -> Counts {
    let mut counts = Counts::default();
    for group in trigger_groups(sentence, labels) {
        let Some((w_i, w_j, others)) = live_group(sentence, labels, group) else {
            continue;
        };
        for &other in &others {
            let label = sentence.deprel(other).to_string();
            sentence.attach(other, w_j, label);
        }
        let ctx = swap(sentence, w_i, w_j);
        counts.arcs_rewritten += 1 + others.len();
        counts.repairs_applied += repair_projectivity(sentence, &ctx);
    }
    counts
}

/// Invert every arc labelled with one of `labels` (CASE, MARK, DET).
///
/// Trigger arcs are taken from the input tree and processed left to right
/// by dependent position. When one head has several such dependents, the
/// nearest is inverted and the others move to it with their label.
pub fn invert_simple(sentence: &Sentence, labels: &[&str]) -> Rewrite {
    let mut out = sentence.clone();
    let counts = invert_in_place(&mut out, labels);
    counts.into_rewrite(out)
}

fn chain_in_place(sentence: &mut Sentence, labels: &[&str]) -> Counts {
    let mut counts = Counts::default();
    let mut heads: Vec<usize> = sentence
        .tokens
        .iter()
        .filter(|t| has_label(labels, &t.deprel) && t.head != 0)
        .map(|t| t.head)
        .collect();
    heads.sort_unstable();
    heads.dedup();

    for head in heads {
        // Only the head-initial part of the flat structure is chained.
        let seq: Vec<usize> = sentence
            .tokens
            .iter()
            .filter(|t| t.head == head && t.id > head && has_label(labels, &t.deprel))
            .map(|t| t.id)
            .collect();
        for pair in seq.windows(2) {
            let label = sentence.deprel(pair[1]).to_string();
            sentence.attach(pair[1], pair[0], label);
            counts.arcs_rewritten += 1;
        }
    }
    counts
}

/// Turn flat sequences (MWE, NAME) into chains: each word attaches to the
/// word preceding it, the first keeps the original head.
pub fn chain_sequence(sentence: &Sentence, labels: &[&str]) -> Rewrite {
    let mut out = sentence.clone();
    let counts = chain_in_place(&mut out, labels);
    counts.into_rewrite(out)
}

fn copula_in_place(sentence: &mut Sentence, noun_labels: &[&str]) -> Counts {
    let triggers = TransformationId::Copula.trigger_labels();
    let mut counts = Counts::default();
    for group in trigger_groups(sentence, triggers) {
        let Some((w_i, w_j, others)) = live_group(sentence, triggers, group) else {
            continue;
        };
        let ctx = swap(sentence, w_i, w_j);
        counts.arcs_rewritten += 1 + others.len();

        let mut staying = Vec::new();
        for &child in &ctx.w_k_set {
            let deprel = sentence.deprel(child).to_string();
            if others.contains(&child) || !has_label(noun_labels, &deprel) {
                sentence.attach(child, w_j, deprel);
            } else {
                staying.push(child);
            }
        }
        let ctx = InversionContext {
            w_k_set: staying,
            ..ctx
        };
        counts.repairs_applied += repair_projectivity(sentence, &ctx);
    }
    counts
}

/// Promote copulas and passive auxiliaries over their head.
///
/// Dependents of the former head move to the copula unless their relation
/// is one of `noun_labels`.
pub fn promote_copula(sentence: &Sentence, noun_labels: &[&str]) -> Rewrite {
    let mut out = sentence.clone();
    let counts = copula_in_place(&mut out, noun_labels);
    counts.into_rewrite(out)
}

fn depth(sentence: &Sentence, id: usize) -> usize {
    let mut depth = 0;
    let mut cur = id;
    while cur != 0 && depth <= sentence.len() {
        cur = sentence.head(cur);
        depth += 1;
    }
    depth
}

fn coordination_in_place(sentence: &mut Sentence) -> Counts {
    let mut counts = Counts::default();

    let mut heads: Vec<usize> = sentence
        .tokens
        .iter()
        .filter(|t| t.deprel == "cc" && t.head != 0)
        .map(|t| t.head)
        .collect();
    heads.sort_unstable();
    heads.dedup();
    heads.sort_by_key(|&h| (depth(sentence, h), h));

    for first in heads {
        let children = sentence.children(first);
        let ccs: Vec<usize> = children
            .iter()
            .copied()
            .filter(|&c| sentence.deprel(c) == "cc")
            .collect();
        let conjs: Vec<usize> = children
            .iter()
            .copied()
            .filter(|&c| sentence.deprel(c) == "conj")
            .collect();
        if ccs.is_empty() || conjs.is_empty() {
            continue;
        }

        let conjunction = ccs[0];
        let w_h = sentence.head(first);
        let incoming = sentence.deprel(first).to_string();
        sentence.attach(conjunction, w_h, incoming);
        sentence.attach(first, conjunction, "conj");
        for &conj in &conjs {
            sentence.attach(conj, conjunction, "conj");
        }
        for &cc in &ccs[1..] {
            sentence.attach(cc, conjunction, "cc");
        }
        counts.arcs_rewritten += ccs.len() + conjs.len();

        let ctx = InversionContext {
            w_h,
            w_i: first,
            w_j: conjunction,
            w_k_set: sentence.children(first),
        };
        counts.repairs_applied += repair_projectivity(sentence, &ctx);
    }
    counts
}

/// Make the first coordinating conjunction the head of the coordination.
/// Heads without both `cc` and `conj` dependents are left untouched.
pub fn rehead_coordination(sentence: &Sentence) -> Rewrite {
    let mut out = sentence.clone();
    let counts = coordination_in_place(&mut out);
    counts.into_rewrite(out)
}

/// Apply one transformation to a single sentence.
pub fn transform_sentence(
    sentence: &Sentence,
    id: TransformationId,
    options: &TransformOptions,
) -> Rewrite {
    match id {
        TransformationId::Case | TransformationId::Mark | TransformationId::Det => {
            invert_simple(sentence, id.trigger_labels())
        }
        TransformationId::Mwe | TransformationId::Name => {
            chain_sequence(sentence, id.trigger_labels())
        }
        TransformationId::Copula => {
            let noun_labels: Vec<&str> =
                options.copula_noun_labels.iter().map(String::as_str).collect();
            promote_copula(sentence, &noun_labels)
        }
        TransformationId::Coordination => rehead_coordination(sentence),
    }
}

pub fn apply_transformation(sentences: &[Sentence], id: TransformationId) -> Result<TransformResult> {
    apply_transformation_with(sentences, id, &TransformOptions::default())
}

/// Transform a corpus. Every input and output sentence must be a valid
/// tree; the first offending sentence index is reported.
pub fn apply_transformation_with(
    sentences: &[Sentence],
    id: TransformationId,
    options: &TransformOptions,
) -> Result<TransformResult> {
    let rewrites: Vec<Result<(Rewrite, bool)>> = sentences
        .par_iter()
        .enumerate()
        .map(|(index, sentence)| {
            let report = validate_tree(sentence);
            if !report.ok {
                return Err(Error::InvalidTree { index, report });
            }
            let rewrite = transform_sentence(sentence, id, options);
            let report = validate_tree(&rewrite.sentence);
            if !report.ok {
                return Err(Error::InvalidTree { index, report });
            }
            let changed = !rewrite.sentence.same_tree(sentence);
            Ok((rewrite, changed))
        })
        .collect();

    let mut result = TransformResult {
        sentences: Vec::with_capacity(sentences.len()),
        changed: false,
        arcs_rewritten: 0,
        repairs_applied: 0,
    };
    for rewrite in rewrites {
        let (rewrite, changed) = rewrite?;
        result.changed |= changed;
        result.arcs_rewritten += rewrite.arcs_rewritten;
        result.repairs_applied += rewrite.repairs_applied;
        result.sentences.push(rewrite.sentence);
    }
    Ok(result)
}

/// Number of arcs between two words carrying one of the transformation's
/// trigger labels.
pub fn count_trigger_arcs(sentences: &[Sentence], id: TransformationId) -> usize {
    let labels = id.trigger_labels();
    sentences
        .iter()
        .flat_map(|s| &s.tokens)
        .filter(|t| t.head != 0 && has_label(labels, &t.deprel))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::is_projective;

    fn s(words: &[(&str, &str, usize, &str)]) -> Sentence {
        Sentence::from_tuples(words)
    }

    fn heads_labels(sentence: &Sentence) -> Vec<(usize, String)> {
        sentence
            .tokens
            .iter()
            .map(|t| (t.head, t.deprel.clone()))
            .collect()
    }

    fn hl(pairs: &[(usize, &str)]) -> Vec<(usize, String)> {
        pairs.iter().map(|(h, l)| (*h, l.to_string())).collect()
    }

    #[test]
    fn parses_transformation_names() {
        for id in TransformationId::ALL {
            assert_eq!(id.name().parse::<TransformationId>().unwrap(), id);
        }
        assert!("verb".parse::<TransformationId>().is_err());
    }

    #[test]
    fn case_inversion() {
        // made of Earth: made -nmod-> Earth, Earth -case-> of
        let input = s(&[
            ("made", "VERB", 0, "root"),
            ("of", "ADP", 3, "case"),
            ("Earth", "PROPN", 1, "nmod"),
        ]);
        let out = invert_simple(&input, &["case"]);
        assert_eq!(
            heads_labels(&out.sentence),
            hl(&[(0, "root"), (1, "nmod"), (2, "case")])
        );
        assert_eq!(out.arcs_rewritten, 1);
    }

    #[test]
    fn no_trigger_is_identity() {
        let input = s(&[("the", "DET", 2, "det"), ("book", "NOUN", 0, "root")]);
        let out = invert_simple(&input, &["case"]);
        assert_eq!(out.sentence, input);
        assert_eq!(out.arcs_rewritten, 0);
    }

    #[test]
    fn repair_order_i_j_k() {
        // root -> w_i(1), w_i -> w_j(2) target, w_i -> w_k(3)
        let input = s(&[
            ("wi", "NOUN", 0, "root"),
            ("wj", "ADP", 1, "case"),
            ("wk", "NOUN", 1, "nmod"),
        ]);
        let out = invert_simple(&input, &["case"]);
        assert_eq!(
            heads_labels(&out.sentence),
            hl(&[(2, "case"), (0, "root"), (2, "nmod")])
        );
        assert_eq!(out.repairs_applied, 1);
        assert!(is_projective(&out.sentence));
    }

    #[test]
    fn repair_order_k_j_i() {
        let input = s(&[
            ("wk", "NOUN", 3, "nmod"),
            ("wj", "ADP", 3, "case"),
            ("wi", "NOUN", 0, "root"),
        ]);
        let out = invert_simple(&input, &["case"]);
        assert_eq!(
            heads_labels(&out.sentence),
            hl(&[(2, "nmod"), (0, "root"), (2, "case")])
        );
        assert_eq!(out.repairs_applied, 1);
    }

    #[test]
    fn repair_leaves_child_between_head_and_dependent() {
        // order i < k < j
        let input = s(&[
            ("wi", "NOUN", 0, "root"),
            ("wk", "ADJ", 1, "amod"),
            ("wj", "ADP", 1, "case"),
        ]);
        let out = invert_simple(&input, &["case"]);
        assert_eq!(out.sentence.head(2), 1);
        assert_eq!(out.repairs_applied, 0);
        assert!(is_projective(&out.sentence));
    }

    #[test]
    fn several_triggers_on_one_head() {
        // x -> 4; 4 -det-> 1, 4 -det-> 3 ; nearest to 4 is 3
        let input = s(&[
            ("all", "DET", 4, "det"),
            ("of", "ADP", 4, "case"),
            ("the", "DET", 4, "det"),
            ("books", "NOUN", 0, "root"),
        ]);
        let out = invert_simple(&input, &["det"]);
        let t = &out.sentence;
        assert_eq!((t.head(3), t.deprel(3)), (0, "root"));
        assert_eq!((t.head(4), t.deprel(4)), (3, "det"));
        assert_eq!((t.head(1), t.deprel(1)), (3, "det"));
        // k=2 < j=3 < i=4: repaired
        assert_eq!(t.head(2), 3);
        assert_eq!(out.arcs_rewritten, 2);
        assert!(validate_tree(t).ok);
    }

    #[test]
    fn chain_john_jr_doe() {
        let input = s(&[
            ("saw", "VERB", 0, "root"),
            ("John", "PROPN", 1, "dobj"),
            ("Jr.", "PROPN", 2, "name"),
            ("Doe", "PROPN", 2, "name"),
        ]);
        let out = chain_sequence(&input, &["name"]);
        assert_eq!(
            heads_labels(&out.sentence),
            hl(&[(0, "root"), (1, "dobj"), (2, "name"), (3, "name")])
        );
        assert_eq!(out.arcs_rewritten, 1);
    }

    #[test]
    fn chain_of_one_is_unchanged() {
        let input = s(&[("New", "PROPN", 0, "root"), ("York", "PROPN", 1, "name")]);
        let out = chain_sequence(&input, &["name"]);
        assert_eq!(out.sentence, input);
        assert_eq!(out.arcs_rewritten, 0);
    }

    #[test]
    fn copula_keeps_noun_dependents() {
        // is a nice book
        let input = s(&[
            ("is", "VERB", 4, "cop"),
            ("a", "DET", 4, "det"),
            ("nice", "ADJ", 4, "amod"),
            ("book", "NOUN", 0, "root"),
            (".", "PUNCT", 4, "punct"),
        ]);
        let out = promote_copula(&input, COPULA_NOUN_LABELS);
        let t = &out.sentence;
        assert_eq!((t.head(1), t.deprel(1)), (0, "root"));
        assert_eq!((t.head(4), t.deprel(4)), (1, "cop"));
        assert_eq!(t.head(2), 4);
        assert_eq!(t.head(3), 4);
        assert_eq!(t.head(5), 1);
    }

    #[test]
    fn coordination_without_cc_is_unchanged() {
        let input = s(&[
            ("red", "ADJ", 0, "root"),
            (",", "PUNCT", 3, "punct"),
            ("blue", "ADJ", 1, "conj"),
        ]);
        let out = rehead_coordination(&input);
        assert_eq!(out.sentence, input);
        assert_eq!(out.arcs_rewritten, 0);
    }

    #[test]
    fn nested_coordination_outermost_first() {
        // a and b or c : a -cc-> and, a -conj-> b, b -cc-> or, b -conj-> c
        let input = s(&[
            ("a", "NOUN", 0, "root"),
            ("and", "CONJ", 1, "cc"),
            ("b", "NOUN", 1, "conj"),
            ("or", "CONJ", 3, "cc"),
            ("c", "NOUN", 3, "conj"),
        ]);
        let out = rehead_coordination(&input);
        let t = &out.sentence;
        assert_eq!(
            heads_labels(t),
            hl(&[(2, "conj"), (0, "root"), (4, "conj"), (2, "conj"), (4, "conj")])
        );
        assert!(validate_tree(t).ok);
    }

    #[test]
    fn corpus_reports_invalid_input_index() {
        let good = s(&[("a", "X", 0, "root")]);
        let bad = s(&[("a", "X", 2, "dep"), ("b", "X", 1, "dep")]);
        let err = apply_transformation(&[good, bad], TransformationId::Case).unwrap_err();
        assert!(matches!(err, Error::InvalidTree { index: 1, .. }));
    }

    #[test]
    fn stale_trigger_arc_is_skipped() {
        // b -cop-> c and c -cop-> a: promoting c over a first leaves the
        // second arc pointing at a token that moved.
        let input = s(&[
            ("a", "NOUN", 0, "root"),
            ("b", "AUX", 3, "cop"),
            ("c", "AUX", 1, "cop"),
        ]);
        let out = promote_copula(&input, &[]);
        assert!(validate_tree(&out.sentence).ok);
        let out = invert_simple(&input, &["cop"]);
        assert!(validate_tree(&out.sentence).ok);
    }
}
