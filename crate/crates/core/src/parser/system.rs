//! The arc-eager transition system.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::treebank::Sentence;

/// Transition kinds, in the fixed priority order used for tie-breaking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionKind {
    Shift,
    Reduce,
    LeftArc,
    RightArc,
}

impl ActionKind {
    pub const ALL: [ActionKind; 4] = [
        ActionKind::Shift,
        ActionKind::Reduce,
        ActionKind::LeftArc,
        ActionKind::RightArc,
    ];

    /// One-letter symbol used in derivation strings.
    pub fn symbol(self) -> char {
        match self {
            ActionKind::Shift => 'S',
            ActionKind::Reduce => 'R',
            ActionKind::LeftArc => 'L',
            ActionKind::RightArc => 'A',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActionKind::Shift => "SHIFT",
            ActionKind::Reduce => "REDUCE",
            ActionKind::LeftArc => "LEFT_ARC",
            ActionKind::RightArc => "RIGHT_ARC",
        }
    }

    pub fn is_arc(self) -> bool {
        matches!(self, ActionKind::LeftArc | ActionKind::RightArc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Action {
    pub kind: ActionKind,
    /// Relation of the created arc; set iff the action is an arc action.
    pub label: Option<String>,
}

impl Action {
    pub fn shift() -> Self {
        Action {
            kind: ActionKind::Shift,
            label: None,
        }
    }

    pub fn reduce() -> Self {
        Action {
            kind: ActionKind::Reduce,
            label: None,
        }
    }

    pub fn left_arc(label: impl Into<String>) -> Self {
        Action {
            kind: ActionKind::LeftArc,
            label: Some(label.into()),
        }
    }

    pub fn right_arc(label: impl Into<String>) -> Self {
        Action {
            kind: ActionKind::RightArc,
            label: Some(label.into()),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match &self.label {
            Some(label) => write!(f, "{}:{}", self.kind.name(), label),
            None => f.write_str(self.kind.name()),
        }
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, label) = match s.split_once(':') {
            Some((kind, label)) => (kind, Some(label)),
            None => (s, None),
        };
        let kind = match kind {
            "SHIFT" => ActionKind::Shift,
            "REDUCE" => ActionKind::Reduce,
            "LEFT_ARC" => ActionKind::LeftArc,
            "RIGHT_ARC" => ActionKind::RightArc,
            _ => return Err(Error::InvalidArgument(format!("unknown action {:?}", s))),
        };
        if kind.is_arc() != label.is_some() {
            return Err(Error::InvalidArgument(format!("malformed action {:?}", s)));
        }
        Ok(Action {
            kind,
            label: label.map(str::to_string),
        })
    }
}

/// Parser state. The buffer is always a suffix `front..=n` of the sentence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub stack: Vec<usize>,
    front: usize,
    n: usize,
    heads: Vec<Option<usize>>,
    deprels: Vec<Option<String>>,
    on_stack: Vec<bool>,
    left_children: Vec<Vec<usize>>,
    right_children: Vec<Vec<usize>>,
}

impl Configuration {
    pub fn new(n: usize) -> Self {
        let mut on_stack = vec![false; n + 1];
        on_stack[0] = true;
        Configuration {
            stack: vec![0],
            front: 1,
            n,
            heads: vec![None; n + 1],
            deprels: vec![None; n + 1],
            on_stack,
            left_children: vec![Vec::new(); n + 1],
            right_children: vec![Vec::new(); n + 1],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn buffer(&self) -> RangeInclusive<usize> {
        self.front..=self.n
    }

    pub fn buffer_len(&self) -> usize {
        self.n + 1 - self.front
    }

    /// Buffer element at offset `i` (0 = front).
    pub fn buffer_at(&self, i: usize) -> Option<usize> {
        let id = self.front + i;
        (id <= self.n).then_some(id)
    }

    pub fn stack_top(&self) -> Option<usize> {
        self.stack.last().copied()
    }

    pub fn in_buffer(&self, id: usize) -> bool {
        id >= self.front && id <= self.n
    }

    pub fn on_stack(&self, id: usize) -> bool {
        self.on_stack[id]
    }

    pub fn head(&self, id: usize) -> Option<usize> {
        self.heads[id]
    }

    pub fn deprel(&self, id: usize) -> Option<&str> {
        self.deprels[id].as_deref()
    }

    pub fn has_head(&self, id: usize) -> bool {
        self.heads[id].is_some()
    }

    /// Left dependents of `id`, nearest first.
    pub fn left_children(&self, id: usize) -> &[usize] {
        &self.left_children[id]
    }

    /// Right dependents of `id`, nearest first.
    pub fn right_children(&self, id: usize) -> &[usize] {
        &self.right_children[id]
    }

    /// True once the buffer is exhausted.
    pub fn is_terminal(&self) -> bool {
        self.front > self.n
    }

    /// All arcs as `(head, dependent, deprel)`, ordered by dependent.
    pub fn arcs(&self) -> Vec<(usize, usize, &str)> {
        (1..=self.n)
            .filter_map(|d| {
                self.heads[d].map(|h| (h, d, self.deprels[d].as_deref().unwrap_or("")))
            })
            .collect()
    }

    pub fn has_root_dependent(&self) -> bool {
        !self.right_children[0].is_empty()
    }

    fn add_arc(&mut self, head: usize, dep: usize, label: &str) {
        self.heads[dep] = Some(head);
        self.deprels[dep] = Some(label.to_string());
        if dep < head {
            // LEFT-ARC attaches stack items in decreasing position.
            self.left_children[head].push(dep);
            self.left_children[head].sort_unstable_by(|a, b| b.cmp(a));
        } else {
            self.right_children[head].push(dep);
        }
    }

    fn pop(&mut self) -> usize {
        let top = self.stack.pop().expect("non-empty stack");
        self.on_stack[top] = false;
        top
    }

    fn push_front(&mut self) {
        let id = self.front;
        self.front += 1;
        self.stack.push(id);
        self.on_stack[id] = true;
    }

    pub fn is_valid(&self, kind: ActionKind) -> bool {
        let buffer = !self.is_terminal();
        match kind {
            ActionKind::Shift => buffer,
            ActionKind::LeftArc => match self.stack_top() {
                Some(top) => buffer && top != 0 && !self.has_head(top),
                None => false,
            },
            ActionKind::RightArc => buffer && !self.stack.is_empty(),
            ActionKind::Reduce => match self.stack_top() {
                Some(top) => top != 0 && self.has_head(top),
                None => false,
            },
        }
    }

    /// Apply `action` in place; invalid actions are rejected unchanged.
    pub fn apply(&mut self, action: &Action) -> Result<()> {
        if !self.is_valid(action.kind) {
            return Err(Error::InvalidArgument(format!(
                "{} is not valid in this configuration",
                action
            )));
        }
        let label = action.label.as_deref().unwrap_or("");
        match action.kind {
            ActionKind::Shift => self.push_front(),
            ActionKind::Reduce => {
                self.pop();
            }
            ActionKind::LeftArc => {
                let dep = self.pop();
                self.add_arc(self.front, dep, label);
            }
            ActionKind::RightArc => {
                let head = self.stack_top().expect("non-empty stack");
                self.add_arc(head, self.front, label);
                self.push_front();
            }
        }
        Ok(())
    }
}

/// Stack `[0]`, buffer `1..=n`, no arcs.
pub fn initial_config(sentence: &Sentence) -> Configuration {
    Configuration::new(sentence.len())
}

/// Valid action kinds in priority order.
pub fn valid_actions(config: &Configuration) -> Vec<ActionKind> {
    ActionKind::ALL
        .into_iter()
        .filter(|&kind| config.is_valid(kind))
        .collect()
}

/// Functional form of [`Configuration::apply`].
pub fn apply_action(config: &Configuration, action: &Action) -> Result<Configuration> {
    let mut next = config.clone();
    next.apply(action)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: usize, actions: &[Action]) -> Configuration {
        let mut c = Configuration::new(n);
        for a in actions {
            c.apply(a).unwrap();
        }
        c
    }

    #[test]
    fn initial_configuration() {
        let c = Configuration::new(2);
        assert_eq!(c.stack, vec![0]);
        assert_eq!(c.buffer().collect::<Vec<_>>(), vec![1, 2]);
        assert!(c.arcs().is_empty());

        let empty = Configuration::new(0);
        assert!(empty.is_terminal());
        assert_eq!(empty.buffer_len(), 0);
    }

    #[test]
    fn valid_action_sets() {
        let c = Configuration::new(3);
        assert_eq!(valid_actions(&c), vec![ActionKind::Shift, ActionKind::RightArc]);

        let c = config(3, &[Action::shift()]);
        assert_eq!(
            valid_actions(&c),
            vec![ActionKind::Shift, ActionKind::LeftArc, ActionKind::RightArc]
        );

        let c = config(1, &[Action::right_arc("root")]);
        assert_eq!(valid_actions(&c), vec![ActionKind::Reduce]);
    }

    #[test]
    fn the_book_trace() {
        let mut c = config(2, &[Action::shift()]);
        c.apply(&Action::left_arc("det")).unwrap();
        assert_eq!(c.arcs(), vec![(2, 1, "det")]);
        assert_eq!(c.stack, vec![0]);
        assert_eq!(c.buffer().collect::<Vec<_>>(), vec![2]);

        c.apply(&Action::right_arc("root")).unwrap();
        assert_eq!(c.arcs(), vec![(2, 1, "det"), (0, 2, "root")]);
        assert_eq!(c.stack, vec![0, 2]);
        assert!(c.is_terminal());
    }

    #[test]
    fn shift_single_token() {
        let c = config(1, &[Action::shift()]);
        assert_eq!(c.stack, vec![0, 1]);
        assert_eq!(c.buffer_len(), 0);
    }

    #[test]
    fn rejects_invalid_action() {
        let mut c = Configuration::new(2);
        let before = c.clone();
        assert!(c.apply(&Action::reduce()).is_err());
        assert!(c.apply(&Action::left_arc("x")).is_err());
        assert_eq!(c, before);
    }

    #[test]
    fn action_string_round_trip() {
        for a in [Action::shift(), Action::reduce(), Action::left_arc("det"), Action::right_arc("nmod:poss")] {
            assert_eq!(a.to_string().parse::<Action>().unwrap(), a);
        }
        assert!("LEFT_ARC".parse::<Action>().is_err());
    }
}
