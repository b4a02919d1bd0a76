//! Random trees and toy corpora for property tests and smoke runs.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::treebank::{Sentence, Token};

const POS: &[&str] = &["NOUN", "VERB", "ADJ", "DET", "ADP", "PRON", "ADV", "PUNCT"];
const LABELS: &[&str] = &["nsubj", "dobj", "amod", "advmod", "nmod", "punct", "dep"];

fn word(id: usize, rng: &mut impl Rng) -> Token {
    let upos = POS[rng.gen_range(0..POS.len())];
    let mut token = Token::new(id, format!("w{}", rng.gen_range(0..20)), upos);
    token.lemma = token.form.clone();
    token
}

fn finish(mut tokens: Vec<Token>, heads: &[usize], rng: &mut impl Rng) -> Sentence {
    for (token, &head) in tokens.iter_mut().zip(heads) {
        token.head = head;
        token.deprel = if head == 0 {
            "root".to_string()
        } else {
            LABELS[rng.gen_range(0..LABELS.len())].to_string()
        };
    }
    Sentence::new(tokens)
}

/// Uniformly random attachment order; usually non-projective.
pub fn random_tree(n: usize, rng: &mut impl Rng) -> Sentence {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut heads = vec![0; n];
    for (idx, &id) in order.iter().enumerate().skip(1) {
        heads[id - 1] = order[rng.gen_range(0..idx)];
    }
    let tokens = (1..=n).map(|id| word(id, rng)).collect();
    finish(tokens, &heads, rng)
}

fn projective_span(lo: usize, hi: usize, head: usize, heads: &mut [usize], rng: &mut impl Rng) {
    if lo > hi {
        return;
    }
    // Split [lo, hi] into contiguous blocks, each a subtree of `head`.
    let mut start = lo;
    while start <= hi {
        let end = rng.gen_range(start..=hi);
        let root = rng.gen_range(start..=end);
        heads[root - 1] = head;
        if root > start {
            projective_span(start, root - 1, root, heads, rng);
        }
        projective_span(root + 1, end, root, heads, rng);
        start = end + 1;
    }
}

/// Random projective tree with a single root.
pub fn random_projective_tree(n: usize, rng: &mut impl Rng) -> Sentence {
    let mut heads = vec![0; n];
    if n > 0 {
        let root = rng.gen_range(1..=n);
        if root > 1 {
            projective_span(1, root - 1, root, &mut heads, rng);
        }
        projective_span(root + 1, n, root, &mut heads, rng);
    }
    let tokens = (1..=n).map(|id| word(id, rng)).collect();
    finish(tokens, &heads, rng)
}

/// Overwrite the labels of some non-root arcs with labels drawn from
/// `labels`, each arc with probability `rate`.
pub fn inject_labels(sentence: &mut Sentence, labels: &[&str], rate: f64, rng: &mut impl Rng) {
    for token in &mut sentence.tokens {
        if token.head != 0 && rng.gen_bool(rate) {
            token.deprel = labels[rng.gen_range(0..labels.len())].to_string();
        }
    }
}

/// A tiny phrase-structure generator producing UD-style trees that contain
/// every relation the transformations look at.
pub fn toy_sentence(rng: &mut impl Rng) -> Sentence {
    let mut b = Builder::default();
    let clause_kind = rng.gen_range(0..3);
    let root = match clause_kind {
        // copular clause: NP is (a) ADJ|NOUN .
        0 => {
            let subj = b.noun_phrase(rng);
            let cop = b.push(pick(rng, &["is", "was", "seems"]), "VERB");
            let pred = if rng.gen_bool(0.5) {
                b.push(pick(rng, &["nice", "red", "big", "old"]), "ADJ")
            } else {
                let det = b.push("a", "DET");
                let noun = b.push(pick(rng, &["book", "cat", "city", "idea"]), "NOUN");
                b.attach(det, noun, "det");
                noun
            };
            b.attach(subj, pred, "nsubj");
            b.attach(cop, pred, if rng.gen_bool(0.8) { "cop" } else { "auxpass" });
            pred
        }
        // transitive clause, optional subordinate and coordination
        _ => {
            let subj = b.noun_phrase(rng);
            let verb = b.push(pick(rng, &["reads", "sees", "likes", "finds"]), "VERB");
            let obj = b.coordinated_np(rng);
            b.attach(subj, verb, "nsubj");
            b.attach(obj, verb, "dobj");
            if rng.gen_bool(0.5) {
                let prep = b.push(pick(rng, &["of", "in", "on"]), "ADP");
                let np = b.name_or_mwe(rng);
                b.attach(prep, np, "case");
                b.attach(np, verb, "nmod");
            }
            if clause_kind == 2 {
                let mark = b.push("to", "PART");
                let sub = b.push(pick(rng, &["sleep", "read", "win"]), "VERB");
                b.attach(mark, sub, "mark");
                b.attach(sub, verb, "advcl");
            }
            verb
        }
    };
    let punct = b.push(".", "PUNCT");
    b.attach(punct, root, "punct");
    b.attach(root, 0, "root");
    b.build()
}

fn pick<'a>(rng: &mut impl Rng, options: &[&'a str]) -> &'a str {
    options[rng.gen_range(0..options.len())]
}

#[derive(Default)]
struct Builder {
    tokens: Vec<Token>,
}

impl Builder {
    fn push(&mut self, form: &str, upos: &str) -> usize {
        let id = self.tokens.len() + 1;
        let mut token = Token::new(id, form, upos);
        token.lemma = form.to_lowercase();
        self.tokens.push(token);
        id
    }

    fn attach(&mut self, dep: usize, head: usize, deprel: &str) {
        let token = &mut self.tokens[dep - 1];
        token.head = head;
        token.deprel = deprel.to_string();
    }

    fn noun_phrase(&mut self, rng: &mut impl Rng) -> usize {
        let det = rng.gen_bool(0.6).then(|| self.push(pick(rng, &["the", "a", "this"]), "DET"));
        let adj = rng.gen_bool(0.3).then(|| self.push(pick(rng, &["small", "green"]), "ADJ"));
        let noun = self.push(pick(rng, &["dog", "man", "girl", "student"]), "NOUN");
        if let Some(det) = det {
            self.attach(det, noun, "det");
        }
        if let Some(adj) = adj {
            self.attach(adj, noun, "amod");
        }
        noun
    }

    fn coordinated_np(&mut self, rng: &mut impl Rng) -> usize {
        let first = self.noun_phrase(rng);
        if rng.gen_bool(0.4) {
            let cc = self.push(pick(rng, &["and", "or"]), "CONJ");
            let second = self.noun_phrase(rng);
            self.attach(cc, first, "cc");
            self.attach(second, first, "conj");
        }
        first
    }

    fn name_or_mwe(&mut self, rng: &mut impl Rng) -> usize {
        if rng.gen_bool(0.5) {
            let first = self.push(pick(rng, &["John", "Mary", "Paris"]), "PROPN");
            for _ in 0..rng.gen_range(1..3) {
                let part = self.push(pick(rng, &["Jr.", "Doe", "Smith"]), "PROPN");
                self.attach(part, first, "name");
            }
            first
        } else {
            let first = self.push("because", "ADP");
            let second = self.push("of", "ADP");
            self.attach(second, first, "mwe");
            let noun = self.push(pick(rng, &["rain", "him"]), "NOUN");
            self.attach(first, noun, "case");
            noun
        }
    }

    fn build(self) -> Sentence {
        Sentence::new(self.tokens)
    }
}

/// Corpus of `n` toy sentences.
pub fn toy_corpus(n: usize, rng: &mut impl Rng) -> Vec<Sentence> {
    (0..n).map(|_| toy_sentence(rng)).collect()
}
