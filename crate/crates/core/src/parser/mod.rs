//! Greedy arc-eager dependency parser.

pub mod features;
pub mod model;
pub mod oracle;
pub mod system;
pub mod train;

pub use features::{extract_features, feature_hashes};
pub use model::{ActionSet, Model, Perceptron};
pub use oracle::{action_cost, static_oracle_derivation, Derivation, GoldTree};
pub use system::{apply_action, initial_config, valid_actions, Action, ActionKind, Configuration};
pub use train::{parse, parse_corpus, train, train_with_stats, EpochStats, Hyperparameters, TrainOutcome};
