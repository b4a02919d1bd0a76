//! Learnability metrics of an annotated corpus.

pub mod derivation;
pub mod lm;
pub mod structure;
pub mod suffix_tree;

use serde::{Deserialize, Serialize};

pub use derivation::{
    derivation_complexity, derivation_order, derivation_order_ids, derivation_perplexity,
    derivation_strings, ComplexityMode, LmUnit,
};
pub use lm::WittenBell;
pub use structure::{avg_dependency_distance, conditional_entropy, pos_predictability};
pub use suffix_tree::{count_distinct_substrings, SuffixTree};

use crate::treebank::Sentence;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricOptions {
    pub lm_unit: LmUnit,
    pub complexity: ComplexityMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub corpus: String,
    /// Absent when the corpus has no non-root arc.
    pub distance: Option<f64>,
    pub predictability_bits: f64,
    pub derivation_perplexity: f64,
    pub derivation_complexity: u64,
    pub lm_unit: LmUnit,
    pub complexity_mode: ComplexityMode,
}

impl MetricReport {
    pub fn compute(corpus_id: &str, corpus: &[Sentence], options: MetricOptions) -> Self {
        MetricReport {
            corpus: corpus_id.to_string(),
            distance: avg_dependency_distance(corpus),
            predictability_bits: pos_predictability(corpus),
            derivation_perplexity: derivation_perplexity(corpus, options.lm_unit),
            derivation_complexity: derivation_complexity(corpus, options.complexity),
            lm_unit: options.lm_unit,
            complexity_mode: options.complexity,
        }
    }

    /// Named values, all lower-is-better.
    pub fn values(&self) -> [(&'static str, Option<f64>); 4] {
        [
            ("distance", self.distance),
            ("predictability", Some(self.predictability_bits)),
            ("derivation_complexity", Some(self.derivation_complexity as f64)),
            ("derivation_perplexity", Some(self.derivation_perplexity)),
        ]
    }

    pub const TSV_HEADER: &'static str =
        "corpus\tdistance\tpredictability_bits\tderivation_perplexity\tderivation_complexity";

    pub fn tsv_row(&self) -> String {
        format!(
            "{}\t{}\t{:.6}\t{:.6}\t{}",
            self.corpus,
            self.distance.map_or("NA".to_string(), |d| format!("{:.6}", d)),
            self.predictability_bits,
            self.derivation_perplexity,
            self.derivation_complexity
        )
    }
}
