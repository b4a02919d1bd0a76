//! Dynamic oracle for arc-eager and static gold derivations.
//!
//! The cost of an action is the number of gold arcs that are reachable from
//! the configuration but no longer reachable after the action. Arcs count
//! only when explicitly built: a configuration is terminal once the buffer
//! is empty, and tokens left headless there earn nothing.
//!
//! For projective gold trees every individually reachable arc is jointly
//! reachable, so reachability is a per-arc test. For non-projective gold
//! trees the maximum is found with a projective maximum-spanning-tree
//! search over the stack and buffer nodes.

use serde::{Deserialize, Serialize};

use super::system::{Action, ActionKind, Configuration};
use crate::treebank::{is_projective, Sentence};

/// Gold heads and labels of a sentence, indexed by token id.
#[derive(Clone, Debug)]
pub struct GoldTree {
    heads: Vec<usize>,
    labels: Vec<String>,
    projective: bool,
}

impl GoldTree {
    pub fn new(sentence: &Sentence) -> Self {
        let mut heads = vec![0];
        let mut labels = vec![String::new()];
        for token in &sentence.tokens {
            heads.push(token.head);
            labels.push(token.deprel.clone());
        }
        GoldTree {
            heads,
            labels,
            projective: is_projective(sentence),
        }
    }

    pub fn len(&self) -> usize {
        self.heads.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn head(&self, id: usize) -> usize {
        self.heads[id]
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels[id]
    }

    pub fn is_projective(&self) -> bool {
        self.projective
    }

    /// Maximum number of correct arcs in any terminal configuration
    /// reachable from `config`.
    pub fn reachable(&self, config: &Configuration) -> usize {
        let made = (1..=self.len())
            .filter(|&d| config.head(d) == Some(self.heads[d]))
            .count();
        let future = if self.projective {
            self.future_decomposed(config)
        } else {
            self.future_exact(config)
        };
        made + future
    }

    fn future_decomposed(&self, config: &Configuration) -> usize {
        (1..=self.len())
            .filter(|&d| {
                if config.has_head(d) {
                    return false;
                }
                let h = self.heads[d];
                let h_buffer = config.in_buffer(h);
                let h_stack = config.on_stack(h);
                if config.in_buffer(d) {
                    h_buffer || h_stack
                } else {
                    config.on_stack(d) && h_buffer
                }
            })
            .count()
    }

    /// Exact maximum over future arc sets. Every future derivation builds a
    /// projective tree over stack+buffer in which a stack item either stays
    /// on the item below it or gets a head from the buffer.
    fn future_exact(&self, config: &Configuration) -> usize {
        let nodes: Vec<usize> = config
            .stack
            .iter()
            .copied()
            .chain(config.buffer())
            .collect();
        let stack_len = config.stack.len();
        let n = nodes.len();
        if n <= 1 {
            return 0;
        }

        const NEG: i64 = i64::MIN / 4;
        let score = |u: usize, v: usize| -> i64 {
            // u -> v, indices into `nodes`.
            if v == 0 {
                return NEG;
            }
            let (head, dep) = (nodes[u], nodes[v]);
            if v < stack_len {
                if u + 1 == v {
                    // stays on the item below it until the end
                    return 0;
                }
                if u < stack_len || config.has_head(dep) {
                    return NEG;
                }
            }
            i64::from(self.heads[dep] == head)
        };

        // Eisner's algorithm; `[s][t][0]` has its head at t, `[1]` at s.
        let mut complete = vec![vec![[0i64; 2]; n]; n];
        let mut incomplete = vec![vec![[NEG; 2]; n]; n];
        for len in 1..n {
            for s in 0..n - len {
                let t = s + len;
                let mut best = NEG;
                for r in s..t {
                    best = best.max(complete[s][r][1] + complete[r + 1][t][0]);
                }
                incomplete[s][t][0] = best + score(t, s);
                incomplete[s][t][1] = best + score(s, t);

                let mut left = NEG;
                for r in s..t {
                    left = left.max(complete[s][r][0] + incomplete[r][t][0]);
                }
                complete[s][t][0] = left;

                let mut right = NEG;
                for r in s + 1..=t {
                    right = right.max(incomplete[s][r][1] + complete[r][t][1]);
                }
                complete[s][t][1] = right;
            }
        }
        complete[0][n - 1][1].max(0) as usize
    }

    /// Unlabelled cost of an action kind. The kind must be valid.
    pub fn cost(&self, config: &Configuration, kind: ActionKind) -> usize {
        let before = self.reachable(config);
        let mut next = config.clone();
        next.apply(&self.placeholder(kind))
            .expect("cost requested for an invalid action");
        before - self.reachable(&next)
    }

    /// The gold relation for the arc an action of `kind` would build.
    pub fn arc_label(&self, config: &Configuration, kind: ActionKind) -> Option<&str> {
        match kind {
            ActionKind::LeftArc => config.stack_top().map(|d| self.label(d)),
            ActionKind::RightArc => config.buffer_at(0).map(|d| self.label(d)),
            _ => None,
        }
    }

    fn placeholder(&self, kind: ActionKind) -> Action {
        Action {
            kind,
            label: kind.is_arc().then(String::new),
        }
    }
}

/// Number of gold arcs made unreachable by `action`; labels are ignored.
pub fn action_cost(config: &Configuration, action: &Action, gold: &Sentence) -> usize {
    GoldTree::new(gold).cost(config, action.kind)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub actions: Vec<Action>,
    pub n: usize,
}

impl Derivation {
    /// Action kinds as a string over `{S, R, L, A}`.
    pub fn kinds(&self) -> String {
        self.actions.iter().map(|a| a.kind.symbol()).collect()
    }

    pub fn symbols(&self) -> Vec<ActionKind> {
        self.actions.iter().map(|a| a.kind).collect()
    }

    /// Run the derivation from the initial configuration.
    pub fn execute(&self) -> Configuration {
        let mut config = Configuration::new(self.n);
        for action in &self.actions {
            config
                .apply(action)
                .expect("derivation contains an invalid action");
        }
        config
    }
}

/// Gold derivation: at each step the cheapest valid action, ties broken by
/// SHIFT > REDUCE > LEFT_ARC > RIGHT_ARC. Stops when the buffer is empty.
pub fn static_oracle_derivation(gold: &Sentence) -> Derivation {
    let tree = GoldTree::new(gold);
    let mut config = Configuration::new(gold.len());
    let mut actions = Vec::new();
    while !config.is_terminal() {
        let before = tree.reachable(&config);
        let (kind, _) = ActionKind::ALL
            .into_iter()
            .filter(|&k| config.is_valid(k))
            .map(|k| {
                let mut next = config.clone();
                next.apply(&tree.placeholder(k)).expect("valid action");
                (k, before - tree.reachable(&next))
            })
            .min_by_key(|&(k, cost)| (cost, k))
            .expect("shift is valid while the buffer is non-empty");
        let action = Action {
            kind,
            label: tree.arc_label(&config, kind).map(str::to_string),
        };
        config.apply(&action).expect("valid action");
        actions.push(action);
    }
    Derivation {
        actions,
        n: gold.len(),
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::treebank::validate_tree;

    fn the_book() -> Sentence {
        Sentence::from_tuples(&[("the", "DET", 2, "det"), ("book", "NOUN", 0, "root")])
    }

    fn tree(heads: &[usize]) -> Sentence {
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

    type StateKey = (Vec<usize>, usize, Vec<Option<usize>>);

    /// Memoised exhaustive search over all action sequences.
    fn brute_max(
        config: &Configuration,
        gold: &[usize],
        memo: &mut HashMap<StateKey, usize>,
    ) -> usize {
        let heads: Vec<Option<usize>> = (0..gold.len()).map(|d| config.head(d)).collect();
        let key = (config.stack.clone(), config.buffer_len(), heads.clone());
        if let Some(&v) = memo.get(&key) {
            return v;
        }
        let value = if config.is_terminal() {
            (1..gold.len()).filter(|&d| heads[d] == Some(gold[d])).count()
        } else {
            ActionKind::ALL
                .into_iter()
                .filter(|&k| config.is_valid(k))
                .map(|k| {
                    let mut next = config.clone();
                    let label = k.is_arc().then(String::new);
                    next.apply(&Action { kind: k, label }).unwrap();
                    brute_max(&next, gold, memo)
                })
                .max()
                .unwrap()
        };
        memo.insert(key, value);
        value
    }

    #[test]
    fn the_book_costs() {
        let gold = the_book();
        let tree = GoldTree::new(&gold);
        let mut c = Configuration::new(2);
        c.apply(&Action::shift()).unwrap();
        assert_eq!(tree.cost(&c, ActionKind::LeftArc), 0);
        // Both gold arcs are lost: "the" and "book" end on the stack headless.
        assert_eq!(tree.cost(&c, ActionKind::Shift), 2);
        assert_eq!(tree.cost(&c, ActionKind::RightArc), 2);
    }

    #[test]
    fn wrong_root_costs() {
        let gold = tree(&[2, 0]);
        let c = Configuration::new(2);
        assert!(action_cost(&c, &Action::right_arc("root"), &gold) >= 1);
        assert_eq!(action_cost(&c, &Action::shift(), &gold), 0);
    }

    #[test]
    fn derivations() {
        let d = static_oracle_derivation(&the_book());
        assert_eq!(
            d.actions,
            vec![Action::shift(), Action::left_arc("det"), Action::right_arc("root")]
        );
        assert_eq!(d.kinds(), "SLA");

        let single = static_oracle_derivation(&tree(&[0]));
        assert_eq!(single.actions, vec![Action::right_arc("root")]);
    }

    #[test]
    fn exact_search_agrees_with_decomposition_on_projective_trees() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let n = rand::Rng::gen_range(&mut rng, 1..9);
            let gold = crate::synthetic::random_projective_tree(n, &mut rng);
            let tree = GoldTree::new(&gold);
            let mut config = Configuration::new(n);
            while !config.is_terminal() {
                assert_eq!(tree.future_decomposed(&config), tree.future_exact(&config));
                let kinds: Vec<_> = ActionKind::ALL
                    .into_iter()
                    .filter(|&k| config.is_valid(k))
                    .collect();
                let k = kinds[rand::Rng::gen_range(&mut rng, 0..kinds.len())];
                config.apply(&tree.placeholder(k)).unwrap();
            }
        }
    }

    #[test]
    fn costs_match_exhaustive_search_n4() {
        // All head functions over 4 tokens that form trees.
        let n = 4;
        let mut checked = 0;
        for code in 0..(n + 1usize).pow(n as u32) {
            let heads: Vec<usize> = (0..n).map(|i| (code / (n + 1).pow(i as u32)) % (n + 1)).collect();
            let gold = tree(&heads);
            if !validate_tree(&gold).ok {
                continue;
            }
            let gold_heads: Vec<usize> = std::iter::once(0).chain(heads.iter().copied()).collect();
            let oracle = GoldTree::new(&gold);
            let mut memo = HashMap::new();
            let mut frontier = vec![Configuration::new(n)];
            while let Some(config) = frontier.pop() {
                if config.is_terminal() {
                    continue;
                }
                let before = brute_max(&config, &gold_heads, &mut memo);
                assert_eq!(oracle.reachable(&config), before);
                for k in ActionKind::ALL.into_iter().filter(|&k| config.is_valid(k)) {
                    let mut next = config.clone();
                    next.apply(&oracle.placeholder(k)).unwrap();
                    let after = brute_max(&next, &gold_heads, &mut memo);
                    assert_eq!(oracle.cost(&config, k), before - after, "{:?} {:?}", heads, k);
                    frontier.push(next);
                }
            }
            checked += 1;
        }
        assert_eq!(checked, 64);
    }
}
