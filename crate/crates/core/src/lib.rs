//! Universal Dependencies annotation-scheme conversion, a greedy arc-eager
//! parser and corpus learnability metrics.

pub mod error;
pub mod eval;
pub mod harness;
pub mod metrics;
pub mod parser;
pub mod synthetic;
pub mod transform;
pub mod treebank;

pub use error::{Error, Result};
pub use treebank::{parse_conllu, validate_tree, write_conllu, Sentence, Token};
