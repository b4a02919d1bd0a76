//! Interpolated Witten-Bell trigram language model.

use std::collections::HashMap;

/// Context statistics: total count and distinct continuations.
#[derive(Clone, Copy, Debug, Default)]
struct ContextStats {
    count: usize,
    types: usize,
}

/// Symbols are interned: 0 is the begin marker, 1 the end marker.
#[derive(Clone, Debug)]
pub struct WittenBell {
    vocab: HashMap<String, u32>,
    unigrams: HashMap<u32, usize>,
    bigrams: HashMap<(u32, u32), usize>,
    trigrams: HashMap<(u32, u32, u32), usize>,
    uni_ctx: ContextStats,
    bi_ctx: HashMap<u32, ContextStats>,
    tri_ctx: HashMap<(u32, u32), ContextStats>,
    /// Distinct predicted symbols, end marker included.
    predicted_types: usize,
}

const BOS: u32 = 0;
const EOS: u32 = 1;
/// Stands for any word absent from training.
const UNSEEN: u32 = u32::MAX;

pub const BOS_MARKER: &str = "<s>";
pub const EOS_MARKER: &str = "</s>";

impl WittenBell {
    /// Estimate from sentences, each padded with two begin markers and one
    /// end marker.
    pub fn train<S: AsRef<str>>(sentences: &[Vec<S>]) -> Self {
        let mut model = WittenBell {
            vocab: HashMap::new(),
            unigrams: HashMap::new(),
            bigrams: HashMap::new(),
            trigrams: HashMap::new(),
            uni_ctx: ContextStats::default(),
            bi_ctx: HashMap::new(),
            tri_ctx: HashMap::new(),
            predicted_types: 0,
        };
        model.vocab.insert(BOS_MARKER.to_string(), BOS);
        model.vocab.insert(EOS_MARKER.to_string(), EOS);

        for sentence in sentences {
            let ids: Vec<u32> = sentence.iter().map(|w| model.intern(w.as_ref())).collect();
            let (mut u, mut v) = (BOS, BOS);
            for w in ids.into_iter().chain(std::iter::once(EOS)) {
                *model.unigrams.entry(w).or_insert(0) += 1;
                *model.bigrams.entry((v, w)).or_insert(0) += 1;
                *model.trigrams.entry((u, v, w)).or_insert(0) += 1;
                u = v;
                v = w;
            }
        }

        model.predicted_types = model.unigrams.len();
        model.uni_ctx = ContextStats {
            count: model.unigrams.values().sum(),
            types: model.unigrams.len(),
        };
        for (&(v, _), &c) in &model.bigrams {
            let stats = model.bi_ctx.entry(v).or_default();
            stats.count += c;
            stats.types += 1;
        }
        for (&(u, v, _), &c) in &model.trigrams {
            let stats = model.tri_ctx.entry((u, v)).or_default();
            stats.count += c;
            stats.types += 1;
        }
        model
    }

    fn intern(&mut self, word: &str) -> u32 {
        let next = self.vocab.len() as u32;
        *self.vocab.entry(word.to_string()).or_insert(next)
    }

    fn id(&self, word: &str) -> u32 {
        self.vocab.get(word).copied().unwrap_or(UNSEEN)
    }

    /// Number of outcomes of the uniform base distribution: every predicted
    /// type plus one slot for unseen words.
    pub fn base_outcomes(&self) -> usize {
        self.predicted_types + 1
    }

    /// Predicted symbols seen in training, end marker included.
    pub fn vocabulary(&self) -> Vec<&str> {
        let mut words: Vec<&str> = self
            .vocab
            .iter()
            .filter(|(_, id)| self.unigrams.contains_key(id))
            .map(|(w, _)| w.as_str())
            .collect();
        words.sort_unstable();
        words
    }

    fn lambda(stats: ContextStats) -> f64 {
        stats.count as f64 / (stats.count + stats.types) as f64
    }

    fn p_unigram(&self, w: u32) -> f64 {
        let uniform = 1.0 / self.base_outcomes() as f64;
        if self.uni_ctx.count == 0 {
            return uniform;
        }
        let ml = self.unigrams.get(&w).copied().unwrap_or(0) as f64 / self.uni_ctx.count as f64;
        let l = Self::lambda(self.uni_ctx);
        l * ml + (1.0 - l) * uniform
    }

    fn p_bigram(&self, v: u32, w: u32) -> f64 {
        let lower = self.p_unigram(w);
        match self.bi_ctx.get(&v) {
            Some(&stats) => {
                let ml = self.bigrams.get(&(v, w)).copied().unwrap_or(0) as f64 / stats.count as f64;
                let l = Self::lambda(stats);
                l * ml + (1.0 - l) * lower
            }
            None => lower,
        }
    }

    fn p_trigram(&self, u: u32, v: u32, w: u32) -> f64 {
        let lower = self.p_bigram(v, w);
        match self.tri_ctx.get(&(u, v)) {
            Some(&stats) => {
                let ml =
                    self.trigrams.get(&(u, v, w)).copied().unwrap_or(0) as f64 / stats.count as f64;
                let l = Self::lambda(stats);
                l * ml + (1.0 - l) * lower
            }
            None => lower,
        }
    }

    /// P(w | u, v). Unknown words share the unseen slot.
    pub fn prob(&self, u: &str, v: &str, w: &str) -> f64 {
        self.p_trigram(self.id(u), self.id(v), self.id(w))
    }

    /// Probability mass reserved for words outside the vocabulary.
    pub fn unseen_prob(&self, u: &str, v: &str) -> f64 {
        self.p_trigram(self.id(u), self.id(v), UNSEEN)
    }

    /// Total log2 probability and number of predicted positions.
    pub fn log2_prob<S: AsRef<str>>(&self, sentences: &[Vec<S>]) -> (f64, usize) {
        let mut total = 0.0;
        let mut positions = 0;
        for sentence in sentences {
            let (mut u, mut v) = (BOS, BOS);
            let ids = sentence.iter().map(|w| self.id(w.as_ref()));
            for w in ids.chain(std::iter::once(EOS)) {
                total += self.p_trigram(u, v, w).log2();
                positions += 1;
                u = v;
                v = w;
            }
        }
        (total, positions)
    }

    /// `2^(-(1/M) sum log2 P)` over all predicted positions.
    pub fn perplexity<S: AsRef<str>>(&self, sentences: &[Vec<S>]) -> f64 {
        let (log_prob, positions) = self.log2_prob(sentences);
        if positions == 0 {
            return 1.0;
        }
        (-log_prob / positions as f64).exp2()
    }
}
