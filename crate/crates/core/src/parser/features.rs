//! Rich non-local feature templates for transition-based parsing
//! (Zhang and Nivre, 2011).
//!
//! Positions: S0 is the stack top, N0..N2 the first three buffer items.
//! `h`/`h2` are the head and grandhead of S0, `l`/`l2` the leftmost and
//! second-leftmost dependents, `r`/`r2` the rightmost ones. Values are word
//! form (w), POS (p) and relation (l). Absent positions produce `<NONE>`,
//! so every configuration yields the same number of features.

use std::hash::Hasher;

use fnv::FnvHasher;

use super::system::Configuration;
use crate::treebank::Sentence;

pub const NONE: &str = "<NONE>";
pub const ROOT: &str = "<ROOT>";

const MAX_DISTANCE: usize = 10;

/// Receives one feature per template, as a sequence of string parts.
pub trait FeatureSink {
    fn emit(&mut self, template: &str, parts: &[&str]);
}

/// Collects readable feature strings such as `S0wN0w=the|book`.
#[derive(Default)]
pub struct StringSink(pub Vec<String>);

impl FeatureSink for StringSink {
    fn emit(&mut self, template: &str, parts: &[&str]) {
        self.0.push(feature_string(template, parts));
    }
}

/// Collects 64-bit FNV-1a hashes of the feature strings.
#[derive(Default)]
pub struct HashSink(pub Vec<u64>);

impl FeatureSink for HashSink {
    fn emit(&mut self, template: &str, parts: &[&str]) {
        let mut hasher = FnvHasher::default();
        hasher.write(template.as_bytes());
        hasher.write_u8(b'=');
        for (idx, part) in parts.iter().enumerate() {
            if idx > 0 {
                hasher.write_u8(b'|');
            }
            hasher.write(part.as_bytes());
        }
        self.0.push(hasher.finish());
    }
}

fn feature_string(template: &str, parts: &[&str]) -> String {
    let mut s = String::with_capacity(template.len() + 16);
    s.push_str(template);
    s.push('=');
    for (idx, part) in parts.iter().enumerate() {
        if idx > 0 {
            s.push('|');
        }
        s.push_str(part);
    }
    s
}

/// Hash of a feature string as produced by [`extract_features`].
pub fn hash_feature(feature: &str) -> u64 {
    let mut hasher = FnvHasher::default();
    hasher.write(feature.as_bytes());
    hasher.finish()
}

struct Context<'a> {
    config: &'a Configuration,
    sentence: &'a Sentence,
}

impl<'a> Context<'a> {
    fn word(&self, id: Option<usize>) -> &'a str {
        match id {
            None => NONE,
            Some(0) => ROOT,
            Some(id) => &self.sentence.token(id).form,
        }
    }

    fn pos(&self, id: Option<usize>) -> &'a str {
        match id {
            None => NONE,
            Some(0) => ROOT,
            Some(id) => &self.sentence.token(id).upos,
        }
    }

    fn label(&self, id: Option<usize>) -> &'a str {
        id.and_then(|id| self.config.deprel(id)).unwrap_or(NONE)
    }

    fn head(&self, id: Option<usize>) -> Option<usize> {
        id.and_then(|id| self.config.head(id))
    }

    fn leftmost(&self, id: Option<usize>, rank: usize) -> Option<usize> {
        let children = self.config.left_children(id?);
        children.len().checked_sub(rank + 1).map(|i| children[i])
    }

    fn rightmost(&self, id: Option<usize>, rank: usize) -> Option<usize> {
        let children = self.config.right_children(id?);
        children.len().checked_sub(rank + 1).map(|i| children[i])
    }

    fn label_set(&self, children: &[usize]) -> String {
        let mut labels: Vec<&str> = children
            .iter()
            .filter_map(|&c| self.config.deprel(c))
            .collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.is_empty() {
            return NONE.to_string();
        }
        labels.join(",")
    }
}

/// Emit every template for `config` into `sink`.
pub fn extract_into(config: &Configuration, sentence: &Sentence, sink: &mut impl FeatureSink) {
    let cx = Context { config, sentence };

    let s0 = config.stack_top();
    let n0 = config.buffer_at(0);
    let n1 = config.buffer_at(1);
    let n2 = config.buffer_at(2);

    let (s0w, s0p) = (cx.word(s0), cx.pos(s0));
    let (n0w, n0p) = (cx.word(n0), cx.pos(n0));
    let (n1w, n1p) = (cx.word(n1), cx.pos(n1));
    let (n2w, n2p) = (cx.word(n2), cx.pos(n2));

    // single words
    sink.emit("S0wp", &[s0w, s0p]);
    sink.emit("S0w", &[s0w]);
    sink.emit("S0p", &[s0p]);
    sink.emit("N0wp", &[n0w, n0p]);
    sink.emit("N0w", &[n0w]);
    sink.emit("N0p", &[n0p]);
    sink.emit("N1wp", &[n1w, n1p]);
    sink.emit("N1w", &[n1w]);
    sink.emit("N1p", &[n1p]);
    sink.emit("N2wp", &[n2w, n2p]);
    sink.emit("N2w", &[n2w]);
    sink.emit("N2p", &[n2p]);

    // word pairs
    sink.emit("S0wpN0wp", &[s0w, s0p, n0w, n0p]);
    sink.emit("S0wpN0w", &[s0w, s0p, n0w]);
    sink.emit("S0wN0wp", &[s0w, n0w, n0p]);
    sink.emit("S0wpN0p", &[s0w, s0p, n0p]);
    sink.emit("S0pN0wp", &[s0p, n0w, n0p]);
    sink.emit("S0wN0w", &[s0w, n0w]);
    sink.emit("S0pN0p", &[s0p, n0p]);
    sink.emit("N0pN1p", &[n0p, n1p]);

    let s0h = cx.head(s0);
    let s0h2 = cx.head(s0h);
    let s0l = cx.leftmost(s0, 0);
    let s0l2 = cx.leftmost(s0, 1);
    let s0r = cx.rightmost(s0, 0);
    let s0r2 = cx.rightmost(s0, 1);
    let n0l = cx.leftmost(n0, 0);
    let n0l2 = cx.leftmost(n0, 1);

    // three words
    sink.emit("N0pN1pN2p", &[n0p, n1p, n2p]);
    sink.emit("S0pN0pN1p", &[s0p, n0p, n1p]);
    sink.emit("S0hpS0pN0p", &[cx.pos(s0h), s0p, n0p]);
    sink.emit("S0pS0lpN0p", &[s0p, cx.pos(s0l), n0p]);
    sink.emit("S0pS0rpN0p", &[s0p, cx.pos(s0r), n0p]);
    sink.emit("S0pN0pN0lp", &[s0p, n0p, cx.pos(n0l)]);

    // distance
    let distance = match (s0, n0) {
        (Some(s), Some(n)) => (n - s).min(MAX_DISTANCE).to_string(),
        _ => NONE.to_string(),
    };
    let d = distance.as_str();
    sink.emit("S0wd", &[s0w, d]);
    sink.emit("S0pd", &[s0p, d]);
    sink.emit("N0wd", &[n0w, d]);
    sink.emit("N0pd", &[n0p, d]);
    sink.emit("S0wN0wd", &[s0w, n0w, d]);
    sink.emit("S0pN0pd", &[s0p, n0p, d]);

    // valency
    let count = |c: &[usize]| c.len().to_string();
    let s0vl = s0.map_or(NONE.to_string(), |s| count(config.left_children(s)));
    let s0vr = s0.map_or(NONE.to_string(), |s| count(config.right_children(s)));
    let n0vl = n0.map_or(NONE.to_string(), |n| count(config.left_children(n)));
    sink.emit("S0wvr", &[s0w, &s0vr]);
    sink.emit("S0pvr", &[s0p, &s0vr]);
    sink.emit("S0wvl", &[s0w, &s0vl]);
    sink.emit("S0pvl", &[s0p, &s0vl]);
    sink.emit("N0wvl", &[n0w, &n0vl]);
    sink.emit("N0pvl", &[n0p, &n0vl]);

    // unigrams over heads and dependents
    sink.emit("S0hw", &[cx.word(s0h)]);
    sink.emit("S0hp", &[cx.pos(s0h)]);
    sink.emit("S0hl", &[cx.label(s0)]);
    sink.emit("S0lw", &[cx.word(s0l)]);
    sink.emit("S0lp", &[cx.pos(s0l)]);
    sink.emit("S0ll", &[cx.label(s0l)]);
    sink.emit("S0rw", &[cx.word(s0r)]);
    sink.emit("S0rp", &[cx.pos(s0r)]);
    sink.emit("S0rl", &[cx.label(s0r)]);
    sink.emit("N0lw", &[cx.word(n0l)]);
    sink.emit("N0lp", &[cx.pos(n0l)]);
    sink.emit("N0ll", &[cx.label(n0l)]);

    // third order
    sink.emit("S0h2w", &[cx.word(s0h2)]);
    sink.emit("S0h2p", &[cx.pos(s0h2)]);
    sink.emit("S0h2l", &[cx.label(s0h)]);
    sink.emit("S0l2w", &[cx.word(s0l2)]);
    sink.emit("S0l2p", &[cx.pos(s0l2)]);
    sink.emit("S0l2l", &[cx.label(s0l2)]);
    sink.emit("S0r2w", &[cx.word(s0r2)]);
    sink.emit("S0r2p", &[cx.pos(s0r2)]);
    sink.emit("S0r2l", &[cx.label(s0r2)]);
    sink.emit("N0l2w", &[cx.word(n0l2)]);
    sink.emit("N0l2p", &[cx.pos(n0l2)]);
    sink.emit("N0l2l", &[cx.label(n0l2)]);
    sink.emit("S0pS0lpS0l2p", &[s0p, cx.pos(s0l), cx.pos(s0l2)]);
    sink.emit("S0pS0rpS0r2p", &[s0p, cx.pos(s0r), cx.pos(s0r2)]);
    sink.emit("S0pS0hpS0h2p", &[s0p, cx.pos(s0h), cx.pos(s0h2)]);
    sink.emit("N0pN0lpN0l2p", &[n0p, cx.pos(n0l), cx.pos(n0l2)]);

    // label sets
    let s0sl = s0.map_or(NONE.to_string(), |s| cx.label_set(config.left_children(s)));
    let s0sr = s0.map_or(NONE.to_string(), |s| cx.label_set(config.right_children(s)));
    let n0sl = n0.map_or(NONE.to_string(), |n| cx.label_set(config.left_children(n)));
    sink.emit("S0wsr", &[s0w, &s0sr]);
    sink.emit("S0psr", &[s0p, &s0sr]);
    sink.emit("S0wsl", &[s0w, &s0sl]);
    sink.emit("S0psl", &[s0p, &s0sl]);
    sink.emit("N0wsl", &[n0w, &n0sl]);
    sink.emit("N0psl", &[n0p, &n0sl]);
}

/// Feature strings for a configuration.
pub fn extract_features(config: &Configuration, sentence: &Sentence) -> Vec<String> {
    let mut sink = StringSink::default();
    extract_into(config, sentence, &mut sink);
    sink.0
}

/// Hashed features, in the same order as [`extract_features`].
pub fn feature_hashes(config: &Configuration, sentence: &Sentence) -> Vec<u64> {
    let mut sink = HashSink::default();
    extract_into(config, sentence, &mut sink);
    sink.0
}
