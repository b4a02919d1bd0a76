//! CoNLL-U (UD v1) reading and writing, the dependency tree model and
//! structural validation.
//!
//! Columns FEATS, DEPS and MISC are kept as opaque strings. Multiword-token
//! lines and comments are carried through unchanged so that a transformed
//! treebank is still a valid UD file.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Universal POS tag used for punctuation.
pub const PUNCT: &str = "PUNCT";

/// A single syntactic word.
///
/// Empty optional columns (`_` in the file) are stored as empty strings.
/// FORM and LEMMA are stored verbatim, so an underscore token survives.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub id: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: String,
    /// Head position, 0 for the artificial root.
    pub head: usize,
    pub deprel: String,
    pub deps: String,
    pub misc: String,
}

impl Token {
    pub fn new(id: usize, form: impl Into<String>, upos: impl Into<String>) -> Self {
        Token {
            id,
            form: form.into(),
            upos: upos.into(),
            ..Default::default()
        }
    }

    pub fn with_head(mut self, head: usize, deprel: impl Into<String>) -> Self {
        self.head = head;
        self.deprel = deprel.into();
        self
    }

    pub fn is_punct(&self) -> bool {
        self.upos == PUNCT
    }
}

/// A multiword-token line (`a-b`), kept out of the tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiwordToken {
    pub start: usize,
    pub end: usize,
    pub form: String,
    pub misc: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub mwt_ranges: Vec<MultiwordToken>,
    /// Comment lines without the leading `#`.
    pub comments: Vec<String>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence {
            tokens,
            ..Default::default()
        }
    }

    /// Build a sentence from `(form, upos, head, deprel)` tuples.
    pub fn from_tuples<S: AsRef<str>>(words: &[(S, S, usize, S)]) -> Self {
        let tokens = words
            .iter()
            .enumerate()
            .map(|(idx, (form, upos, head, deprel))| {
                let mut token = Token::new(idx + 1, form.as_ref(), upos.as_ref())
                    .with_head(*head, deprel.as_ref());
                token.lemma = form.as_ref().to_string();
                token
            })
            .collect();
        Sentence::new(tokens)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token at 1-based position `id`.
    pub fn token(&self, id: usize) -> &Token {
        &self.tokens[id - 1]
    }

    pub fn token_mut(&mut self, id: usize) -> &mut Token {
        &mut self.tokens[id - 1]
    }

    pub fn head(&self, id: usize) -> usize {
        self.tokens[id - 1].head
    }

    pub fn deprel(&self, id: usize) -> &str {
        &self.tokens[id - 1].deprel
    }

    /// Set head and label of token `id`.
    pub fn attach(&mut self, id: usize, head: usize, deprel: impl Into<String>) {
        let token = self.token_mut(id);
        token.head = head;
        token.deprel = deprel.into();
    }

    /// Head vector indexed by position; index 0 is unused.
    pub fn heads(&self) -> Vec<usize> {
        std::iter::once(0)
            .chain(self.tokens.iter().map(|t| t.head))
            .collect()
    }

    /// Dependents of `head` in surface order.
    pub fn children(&self, head: usize) -> Vec<usize> {
        self.tokens
            .iter()
            .filter(|t| t.head == head)
            .map(|t| t.id)
            .collect()
    }

    /// Token attached to the artificial root, if exactly one exists.
    pub fn root(&self) -> Option<usize> {
        let mut roots = self.tokens.iter().filter(|t| t.head == 0);
        match (roots.next(), roots.next()) {
            (Some(t), None) => Some(t.id),
            _ => None,
        }
    }

    /// True if `node` lies in the subtree rooted at `ancestor`.
    ///
    /// Every node is its own descendant. Terminates on cyclic input.
    pub fn dominates(&self, ancestor: usize, node: usize) -> bool {
        let mut cur = node;
        for _ in 0..=self.len() {
            if cur == ancestor {
                return true;
            }
            if cur == 0 || cur > self.len() {
                return false;
            }
            cur = self.head(cur);
        }
        false
    }

    /// The head/deprel skeleton, used to compare trees.
    pub fn arcs(&self) -> Vec<(usize, usize, &str)> {
        self.tokens
            .iter()
            .map(|t| (t.head, t.id, t.deprel.as_str()))
            .collect()
    }

    /// Structural equality of the trees, ignoring token attributes.
    pub fn same_tree(&self, other: &Sentence) -> bool {
        self.len() == other.len()
            && self
                .tokens
                .iter()
                .zip(&other.tokens)
                .all(|(a, b)| a.head == b.head && a.deprel == b.deprel)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    NonContiguousId,
    SelfLoop,
    HeadOutOfRange,
    MissingDeprel,
    NoRoot,
    MultipleRoots,
    Cycle,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let name = match self {
            ViolationKind::NonContiguousId => "non-contiguous-id",
            ViolationKind::SelfLoop => "self-loop",
            ViolationKind::HeadOutOfRange => "head-out-of-range",
            ViolationKind::MissingDeprel => "missing-deprel",
            ViolationKind::NoRoot => "no-root",
            ViolationKind::MultipleRoots => "multiple-roots",
            ViolationKind::Cycle => "cycle",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub token: Option<usize>,
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport {
            ok: violations.is_empty(),
            violations,
        }
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.ok {
            return f.write_str("ok");
        }
        for (idx, v) in self.violations.iter().enumerate() {
            if idx > 0 {
                f.write_str("; ")?;
            }
            match v.token {
                Some(id) => write!(f, "{} (token {}): {}", v.kind, id, v.message)?,
                None => write!(f, "{}: {}", v.kind, v.message)?,
            }
        }
        Ok(())
    }
}

/// Check that the sentence is a single-rooted tree over contiguous ids.
pub fn validate_tree(sentence: &Sentence) -> ValidationReport {
    let n = sentence.len();
    let mut violations = Vec::new();
    let mut violation = |token, kind, message: String| {
        violations.push(Violation {
            token,
            kind,
            message,
        })
    };

    for (idx, token) in sentence.tokens.iter().enumerate() {
        if token.id != idx + 1 {
            violation(
                Some(token.id),
                ViolationKind::NonContiguousId,
                format!("expected id {}, found {}", idx + 1, token.id),
            );
        }
    }

    for token in &sentence.tokens {
        if token.head == token.id {
            violation(
                Some(token.id),
                ViolationKind::SelfLoop,
                "token is its own head".to_string(),
            );
        } else if token.head > n {
            violation(
                Some(token.id),
                ViolationKind::HeadOutOfRange,
                format!("head {} exceeds sentence length {}", token.head, n),
            );
        }
        if token.deprel.is_empty() {
            violation(
                Some(token.id),
                ViolationKind::MissingDeprel,
                "empty dependency relation".to_string(),
            );
        }
    }

    let roots: Vec<usize> = sentence
        .tokens
        .iter()
        .filter(|t| t.head == 0)
        .map(|t| t.id)
        .collect();
    match roots.len() {
        0 => violation(
            None,
            ViolationKind::NoRoot,
            "no token is attached to the root".to_string(),
        ),
        1 => {}
        _ => violation(
            Some(roots[1]),
            ViolationKind::MultipleRoots,
            format!("tokens {:?} are all attached to the root", roots),
        ),
    }

    // Cycle detection on the head function. Ids are taken positionally so
    // that this also terminates on sentences with broken ids.
    // 0 = unvisited, 1 = on current path, 2 = done.
    let head_of = |pos: usize| sentence.tokens[pos - 1].head;
    let mut state = vec![0u8; n + 1];
    for start in 1..=n {
        if state[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = start;
        loop {
            if cur == 0 || cur > n || state[cur] == 2 {
                break;
            }
            if state[cur] == 1 {
                let cycle_start = path.iter().position(|&p| p == cur).unwrap();
                let cycle = &path[cycle_start..];
                let lowest = *cycle.iter().min().unwrap();
                violation(
                    Some(lowest),
                    ViolationKind::Cycle,
                    format!("tokens {:?} form a cycle", cycle),
                );
                break;
            }
            state[cur] = 1;
            path.push(cur);
            cur = head_of(cur);
        }
        for p in path {
            state[p] = 2;
        }
    }

    ValidationReport::from_violations(violations)
}

/// True iff no two arcs cross, the artificial root counting as position 0.
///
/// Equivalently, for every arc every token strictly between its endpoints
/// is dominated by the head.
pub fn is_projective(sentence: &Sentence) -> bool {
    sentence.tokens.iter().all(|t| {
        let (lo, hi) = if t.head < t.id {
            (t.head, t.id)
        } else {
            (t.id, t.head)
        };
        (lo + 1..hi).all(|between| sentence.dominates(t.head, between))
    })
}

fn empty_as_underscore(value: &str) -> &str {
    if value.is_empty() {
        "_"
    } else {
        value
    }
}

fn underscore_as_empty(value: &str) -> String {
    if value == "_" {
        String::new()
    } else {
        value.to_string()
    }
}

/// Reader state for the sentence currently being collected.
#[derive(Default)]
struct Block {
    sentence: Sentence,
    first_line: usize,
    head_lines: Vec<usize>,
}

impl Block {
    fn is_empty(&self) -> bool {
        self.sentence.tokens.is_empty()
            && self.sentence.comments.is_empty()
            && self.sentence.mwt_ranges.is_empty()
    }

    fn finish(self) -> Result<Sentence> {
        let n = self.sentence.tokens.len();
        if n == 0 {
            return Err(Error::Format {
                line: self.first_line,
                message: "sentence block without tokens".to_string(),
            });
        }
        for (token, &line) in self.sentence.tokens.iter().zip(&self.head_lines) {
            if token.head > n {
                return Err(Error::Format {
                    line,
                    message: format!("head {} out of range 0..={}", token.head, n),
                });
            }
        }
        for mwt in &self.sentence.mwt_ranges {
            if mwt.end > n {
                return Err(Error::Format {
                    line: self.first_line,
                    message: format!("multiword range {}-{} exceeds sentence", mwt.start, mwt.end),
                });
            }
        }
        Ok(self.sentence)
    }
}

fn parse_index(field: &str, line: usize, what: &str) -> Result<usize> {
    field.parse::<usize>().map_err(|_| Error::Format {
        line,
        message: format!("non-integer {}: {:?}", what, field),
    })
}

/// Read CoNLL-U text. Any malformed sentence aborts the whole read.
pub fn parse_conllu(text: &str) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    let mut block = Block::default();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);

        if line.trim().is_empty() {
            if !block.is_empty() {
                sentences.push(std::mem::take(&mut block).finish()?);
            }
            continue;
        }

        if block.is_empty() {
            block.first_line = line_no;
        }

        if let Some(comment) = line.strip_prefix('#') {
            if !block.sentence.tokens.is_empty() || !block.sentence.mwt_ranges.is_empty() {
                return Err(Error::Format {
                    line: line_no,
                    message: "comment line inside a sentence".to_string(),
                });
            }
            block.sentence.comments.push(comment.to_string());
            continue;
        }

        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 10 {
            return Err(Error::Format {
                line: line_no,
                message: format!("expected 10 tab-separated columns, found {}", fields.len()),
            });
        }

        let expected = block.sentence.tokens.len() + 1;

        if let Some((start, end)) = fields[0].split_once('-') {
            let start = parse_index(start, line_no, "multiword start")?;
            let end = parse_index(end, line_no, "multiword end")?;
            if start != expected || end <= start {
                return Err(Error::Format {
                    line: line_no,
                    message: format!("invalid multiword range {}", fields[0]),
                });
            }
            block.sentence.mwt_ranges.push(MultiwordToken {
                start,
                end,
                form: fields[1].to_string(),
                misc: underscore_as_empty(fields[9]),
            });
            continue;
        }

        if fields[0].contains('.') {
            return Err(Error::Format {
                line: line_no,
                message: format!("empty node {} is not part of UD v1", fields[0]),
            });
        }

        let id = parse_index(fields[0], line_no, "id")?;
        if id != expected {
            let message = if id < expected && id >= 1 {
                format!("duplicate id {}", id)
            } else {
                format!("expected id {}, found {}", expected, id)
            };
            return Err(Error::Format {
                line: line_no,
                message,
            });
        }

        let head = parse_index(fields[6], line_no, "head")?;
        if head == id {
            return Err(Error::Format {
                line: line_no,
                message: format!("token {} is its own head", id),
            });
        }
        let deprel = underscore_as_empty(fields[7]);
        if deprel.is_empty() {
            return Err(Error::Format {
                line: line_no,
                message: "missing dependency relation".to_string(),
            });
        }

        block.sentence.tokens.push(Token {
            id,
            form: fields[1].to_string(),
            lemma: fields[2].to_string(),
            upos: underscore_as_empty(fields[3]),
            xpos: underscore_as_empty(fields[4]),
            feats: underscore_as_empty(fields[5]),
            head,
            deprel,
            deps: underscore_as_empty(fields[8]),
            misc: underscore_as_empty(fields[9]),
        });
        block.head_lines.push(line_no);
    }

    if !block.is_empty() {
        sentences.push(block.finish()?);
    }

    Ok(sentences)
}

/// Serialize sentences; refuses any sentence that is not a valid tree.
pub fn write_conllu(sentences: &[Sentence]) -> Result<String> {
    let mut out = String::new();
    for (index, sentence) in sentences.iter().enumerate() {
        let report = validate_tree(sentence);
        if !report.ok {
            return Err(Error::InvalidTree { index, report });
        }
        write_sentence(sentence, &mut out);
    }
    Ok(out)
}

fn write_sentence(sentence: &Sentence, out: &mut String) {
    use std::fmt::Write;

    for comment in &sentence.comments {
        out.push('#');
        out.push_str(comment);
        out.push('\n');
    }

    let mut mwts = sentence.mwt_ranges.iter().peekable();
    for token in &sentence.tokens {
        while let Some(mwt) = mwts.next_if(|m| m.start == token.id) {
            let _ = writeln!(
                out,
                "{}-{}\t{}\t_\t_\t_\t_\t_\t_\t_\t{}",
                mwt.start,
                mwt.end,
                mwt.form,
                empty_as_underscore(&mwt.misc)
            );
        }
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            token.id,
            token.form,
            token.lemma,
            empty_as_underscore(&token.upos),
            empty_as_underscore(&token.xpos),
            empty_as_underscore(&token.feats),
            token.head,
            empty_as_underscore(&token.deprel),
            empty_as_underscore(&token.deps),
            empty_as_underscore(&token.misc),
        );
    }
    out.push('\n');
}
