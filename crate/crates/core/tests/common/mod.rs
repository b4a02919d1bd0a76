//! Reference implementations used as test oracles. They are deliberately
//! naive and share no code with the library beyond the sentence type.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use udlearn::treebank::Sentence;

pub fn fixture(path: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(path)
}

/// Sentence with the given heads, all labels `dep` except the root.
pub fn tree(heads: &[usize]) -> Sentence {
    let words: Vec<(String, String, usize, String)> = heads
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let label = if h == 0 { "root" } else { "dep" };
            (format!("w{}", i + 1), "X".to_string(), h, label.to_string())
        })
        .collect();
    Sentence::from_tuples(&words)
}

/// Every head vector over `n` tokens that forms a single-rooted tree.
pub fn all_trees(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut heads = vec![0usize; n];
    fn rec(i: usize, n: usize, heads: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            if is_tree(heads) {
                out.push(heads.clone());
            }
            return;
        }
        for h in 0..=n {
            if h != i + 1 {
                heads[i] = h;
                rec(i + 1, n, heads, out);
            }
        }
    }
    rec(0, n, &mut heads, &mut out);
    out
}

/// Exactly one root, no self-loop, and every token reaches the root.
pub fn is_tree(heads: &[usize]) -> bool {
    let n = heads.len();
    if heads.iter().filter(|&&h| h == 0).count() != 1 {
        return false;
    }
    for start in 1..=n {
        let mut node = start;
        let mut steps = 0;
        while node != 0 {
            let h = heads[node - 1];
            if h == node || h > n {
                return false;
            }
            node = h;
            steps += 1;
            if steps > n {
                return false;
            }
        }
    }
    true
}

/// Projective iff no two arcs cross, counting arcs from position 0.
pub fn is_projective_pairwise(heads: &[usize]) -> bool {
    let arcs: Vec<(usize, usize)> = heads
        .iter()
        .enumerate()
        .map(|(i, &h)| (h.min(i + 1), h.max(i + 1)))
        .collect();
    for &(a, b) in &arcs {
        for &(c, d) in &arcs {
            if a < c && c < b && b < d {
                return false;
            }
        }
    }
    true
}

/// Minimal arc-eager state for exhaustive search.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct State {
    pub stack: Vec<usize>,
    pub front: usize,
    pub heads: Vec<Option<usize>>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Move {
    Shift,
    Reduce,
    Left,
    Right,
}

pub const MOVES: [Move; 4] = [Move::Shift, Move::Reduce, Move::Left, Move::Right];

impl State {
    pub fn initial(n: usize) -> Self {
        State {
            stack: vec![0],
            front: 1,
            heads: vec![None; n + 1],
        }
    }

    fn n(&self) -> usize {
        self.heads.len() - 1
    }

    pub fn terminal(&self) -> bool {
        self.front > self.n()
    }

    pub fn step(&self, m: Move) -> Option<State> {
        if self.terminal() && m != Move::Reduce {
            return None;
        }
        let top = *self.stack.last()?;
        let mut next = self.clone();
        match m {
            Move::Shift => {
                next.stack.push(self.front);
                next.front += 1;
            }
            Move::Reduce => {
                if top == 0 || self.heads[top].is_none() {
                    return None;
                }
                next.stack.pop();
            }
            Move::Left => {
                if top == 0 || self.heads[top].is_some() {
                    return None;
                }
                next.heads[top] = Some(self.front);
                next.stack.pop();
            }
            Move::Right => {
                next.heads[self.front] = Some(top);
                next.stack.push(self.front);
                next.front += 1;
            }
        }
        Some(next)
    }

    pub fn correct(&self, gold: &[usize]) -> usize {
        (1..=self.n())
            .filter(|&d| self.heads[d] == Some(gold[d - 1]))
            .count()
    }
}

/// Most gold arcs any continuation of `state` can end with, memoised.
pub fn best_completion(state: &State, gold: &[usize], memo: &mut HashMap<State, usize>) -> usize {
    if state.terminal() {
        return state.correct(gold);
    }
    if let Some(&v) = memo.get(state) {
        return v;
    }
    let best = MOVES
        .iter()
        .filter_map(|&m| state.step(m))
        .map(|next| best_completion(&next, gold, memo))
        .max()
        .expect("shift is possible before the end");
    memo.insert(state.clone(), best);
    best
}

/// All non-empty substrings of all strings.
pub fn brute_substrings<T: Clone + Eq + std::hash::Hash>(strings: &[Vec<T>]) -> usize {
    let mut set: HashSet<Vec<T>> = HashSet::new();
    for s in strings {
        for i in 0..s.len() {
            for j in i + 1..=s.len() {
                set.insert(s[i..j].to_vec());
            }
        }
    }
    set.len()
}

/// Witten-Bell trigram probability computed directly from the padded
/// corpus by scanning it for every query.
pub struct ReferenceWb {
    events: Vec<(String, String, String)>,
    types: Vec<String>,
}

impl ReferenceWb {
    pub fn new(corpus: &[Vec<&str>]) -> Self {
        let mut events = Vec::new();
        for s in corpus {
            let mut padded = vec!["<s>".to_string(), "<s>".to_string()];
            padded.extend(s.iter().map(|w| w.to_string()));
            padded.push("</s>".to_string());
            for k in 2..padded.len() {
                events.push((padded[k - 2].clone(), padded[k - 1].clone(), padded[k].clone()));
            }
        }
        let mut types: Vec<String> = events.iter().map(|e| e.2.clone()).collect();
        types.sort();
        types.dedup();
        ReferenceWb { events, types }
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.types
    }

    fn unigram(&self, w: &str) -> f64 {
        let n = self.events.len() as f64;
        let t = self.types.len() as f64;
        let c = self.events.iter().filter(|e| e.2 == w).count() as f64;
        let lambda = n / (n + t);
        lambda * (c / n) + (1.0 - lambda) / (t + 1.0)
    }

    fn bigram(&self, v: &str, w: &str) -> f64 {
        let ctx: Vec<_> = self.events.iter().filter(|e| e.1 == v).collect();
        if ctx.is_empty() {
            return self.unigram(w);
        }
        let c = ctx.len() as f64;
        let t = ctx.iter().map(|e| &e.2).collect::<HashSet<_>>().len() as f64;
        let hit = ctx.iter().filter(|e| e.2 == w).count() as f64;
        let lambda = c / (c + t);
        lambda * hit / c + (1.0 - lambda) * self.unigram(w)
    }

    pub fn prob(&self, u: &str, v: &str, w: &str) -> f64 {
        let ctx: Vec<_> = self.events.iter().filter(|e| e.0 == u && e.1 == v).collect();
        if ctx.is_empty() {
            return self.bigram(v, w);
        }
        let c = ctx.len() as f64;
        let t = ctx.iter().map(|e| &e.2).collect::<HashSet<_>>().len() as f64;
        let hit = ctx.iter().filter(|e| e.2 == w).count() as f64;
        let lambda = c / (c + t);
        lambda * hit / c + (1.0 - lambda) * self.bigram(v, w)
    }

    pub fn self_perplexity(&self) -> f64 {
        let sum: f64 = self
            .events
            .iter()
            .map(|(u, v, w)| self.prob(u, v, w).log2())
            .sum();
        (-sum / self.events.len() as f64).exp2()
    }
}
