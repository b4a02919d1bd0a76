//! Generalized suffix tree built with Ukkonen's algorithm.

use fnv::FnvHashMap;

const ROOT: usize = 0;
const LEAF_END: usize = u32::MAX as usize;
const NO_CHILD: u32 = u32::MAX;
/// Alphabets up to this size use a dense per-node child array.
const DENSE_ALPHABET: u32 = 16;

/// Outgoing edges keyed by first symbol. Terminators are unique, so an
/// edge starting with one is never looked up and is not stored.
#[derive(Clone, Debug)]
enum Children {
    Dense { sigma: usize, slots: Vec<u32> },
    Sparse(FnvHashMap<(u32, u32), u32>),
}

impl Children {
    fn new(sigma: u32, nodes: usize) -> Self {
        if sigma <= DENSE_ALPHABET {
            Children::Dense {
                sigma: sigma as usize,
                slots: Vec::with_capacity(nodes * sigma as usize),
            }
        } else {
            Children::Sparse(FnvHashMap::with_capacity_and_hasher(nodes, Default::default()))
        }
    }

    fn add_node(&mut self) {
        if let Children::Dense { sigma, slots } = self {
            slots.resize(slots.len() + *sigma, NO_CHILD);
        }
    }

    fn get(&self, node: usize, symbol: u32) -> Option<usize> {
        let found = match self {
            Children::Dense { sigma, slots } => {
                if symbol as usize >= *sigma {
                    return None;
                }
                slots[node * sigma + symbol as usize]
            }
            Children::Sparse(map) => *map.get(&(node as u32, symbol))?,
        };
        (found != NO_CHILD).then_some(found as usize)
    }

    fn set(&mut self, node: usize, symbol: u32, child: usize) {
        match self {
            Children::Dense { sigma, slots } => {
                if (symbol as usize) < *sigma {
                    slots[node * *sigma + symbol as usize] = child as u32;
                }
            }
            Children::Sparse(map) => {
                map.insert((node as u32, symbol), child as u32);
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Node {
    start: u32,
    /// Exclusive end; `LEAF_END` for leaves, which grow with the text.
    end: u32,
    link: u32,
}

/// Suffix tree over the concatenation of several strings, each followed by
/// its own terminator. Symbols at or above `terminator_base` are terminators.
#[derive(Clone, Debug)]
pub struct SuffixTree {
    text: Vec<u32>,
    nodes: Vec<Node>,
    children: Children,
    terminator_base: u32,
}

impl SuffixTree {
    /// Build over `strings`; every symbol must be below `terminator_base`.
    pub fn build(strings: &[Vec<u32>], terminator_base: u32) -> Self {
        let total: usize = strings.iter().map(|s| s.len() + 1).sum();
        assert!(total < LEAF_END / 2, "input too long for 32-bit positions");
        let mut text = Vec::with_capacity(total);
        for (i, s) in strings.iter().enumerate() {
            debug_assert!(s.iter().all(|&c| c < terminator_base));
            text.extend_from_slice(s);
            text.push(terminator_base + i as u32);
        }
        let mut tree = SuffixTree {
            text,
            nodes: Vec::with_capacity(2 * total + 1),
            // A tree over `total` symbols has fewer than `2 * total` nodes.
            children: Children::new(terminator_base, 2 * total + 1),
            terminator_base,
        };
        tree.new_node(0, 0);
        tree.construct();
        tree
    }

    fn edge_len(&self, node: usize, pos: usize) -> usize {
        let n = self.nodes[node];
        (n.end as usize).min(pos + 1) - n.start as usize
    }

    fn new_node(&mut self, start: usize, end: usize) -> usize {
        self.nodes.push(Node {
            start: start as u32,
            end: end as u32,
            link: ROOT as u32,
        });
        self.children.add_node();
        self.nodes.len() - 1
    }

    fn child(&self, node: usize, symbol: u32) -> Option<usize> {
        if symbol >= self.terminator_base {
            return None;
        }
        self.children.get(node, symbol)
    }

    fn set_child(&mut self, node: usize, symbol: u32, child: usize) {
        if symbol < self.terminator_base {
            self.children.set(node, symbol, child);
        }
    }

    fn construct(&mut self) {
        let mut active_node = ROOT;
        let mut active_edge = 0usize;
        let mut active_len = 0usize;
        let mut remainder = 0usize;

        for pos in 0..self.text.len() {
            let c = self.text[pos];
            remainder += 1;
            let mut last_internal: Option<usize> = None;

            while remainder > 0 {
                if active_len == 0 {
                    active_edge = pos;
                }
                let edge_symbol = self.text[active_edge];
                match self.child(active_node, edge_symbol) {
                    None => {
                        let leaf = self.new_node(pos, LEAF_END);
                        self.set_child(active_node, edge_symbol, leaf);
                        if let Some(l) = last_internal.take() {
                            self.nodes[l].link = active_node as u32;
                        }
                    }
                    Some(next) => {
                        let len = self.edge_len(next, pos);
                        if active_len >= len {
                            active_edge += len;
                            active_len -= len;
                            active_node = next;
                            continue;
                        }
                        if self.text[self.nodes[next].start as usize + active_len] == c {
                            if let Some(l) = last_internal.take() {
                                if active_node != ROOT {
                                    self.nodes[l].link = active_node as u32;
                                }
                            }
                            active_len += 1;
                            break;
                        }
                        let start = self.nodes[next].start as usize;
                        let split = self.new_node(start, start + active_len);
                        self.set_child(active_node, edge_symbol, split);
                        let leaf = self.new_node(pos, LEAF_END);
                        self.set_child(split, c, leaf);
                        self.nodes[next].start += active_len as u32;
                        let moved = self.text[self.nodes[next].start as usize];
                        self.set_child(split, moved, next);
                        if let Some(l) = last_internal {
                            self.nodes[l].link = split as u32;
                        }
                        last_internal = Some(split);
                    }
                }
                remainder -= 1;
                if active_node == ROOT && active_len > 0 {
                    active_len -= 1;
                    active_edge = pos + 1 - remainder;
                } else if active_node != ROOT {
                    active_node = self.nodes[active_node].link as usize;
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Distinct non-empty substrings free of terminators: each edge
    /// contributes the part of its label before the first terminator.
    pub fn count_distinct_substrings(&self) -> u64 {
        let n = self.text.len();
        let mut next_terminator = vec![n; n + 1];
        for i in (0..n).rev() {
            next_terminator[i] = if self.text[i] >= self.terminator_base {
                i
            } else {
                next_terminator[i + 1]
            };
        }
        self.nodes
            .iter()
            .skip(1)
            .map(|node| {
                let (start, end) = (node.start as usize, (node.end as usize).min(n));
                (end.min(next_terminator[start]) - start) as u64
            })
            .sum()
    }
}

/// Number of distinct non-empty substrings across all `strings`.
pub fn count_distinct_substrings<T: Ord + Clone>(strings: &[Vec<T>]) -> u64 {
    let mut alphabet: Vec<T> = strings.iter().flatten().cloned().collect();
    alphabet.sort();
    alphabet.dedup();
    let encoded: Vec<Vec<u32>> = strings
        .iter()
        .map(|s| {
            s.iter()
                .map(|c| alphabet.binary_search(c).expect("symbol in alphabet") as u32)
                .collect()
        })
        .collect();
    SuffixTree::build(&encoded, alphabet.len() as u32).count_distinct_substrings()
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;

    fn chars(words: &[&str]) -> Vec<Vec<char>> {
        words.iter().map(|w| w.chars().collect()).collect()
    }

    fn brute(words: &[&str]) -> u64 {
        let mut set = HashSet::new();
        for w in words {
            for i in 0..w.len() {
                for j in i + 1..=w.len() {
                    set.insert(&w[i..j]);
                }
            }
        }
        set.len() as u64
    }

    #[test]
    fn fixed_cases() {
        assert_eq!(count_distinct_substrings(&chars(&["aaa"])), 3);
        assert_eq!(count_distinct_substrings(&chars(&["abab"])), 7);
        assert_eq!(count_distinct_substrings(&chars(&["ab", "ba"])), 4);
        assert_eq!(count_distinct_substrings(&chars(&["SLA"])), 6);
        assert_eq!(count_distinct_substrings::<char>(&[]), 0);
        assert_eq!(count_distinct_substrings(&chars(&["", "a"])), 1);
    }

    #[test]
    fn matches_brute_force() {
        let cases: &[&[&str]] = &[
            &["mississippi"],
            &["banana", "ananas", "nab"],
            &["abcabxabcd", "xabc"],
            &["SSLRSA", "SLA", "SLA", "ASSR"],
        ];
        for words in cases {
            assert_eq!(count_distinct_substrings(&chars(words)), brute(words), "{words:?}");
        }
    }
}
