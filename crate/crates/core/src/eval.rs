//! Attachment scores, scheme comparison and metric coherence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transform::TransformationId;
use crate::treebank::Sentence;

/// Correct and total non-punctuation attachments.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UasCount {
    pub correct: usize,
    pub total: usize,
}

impl UasCount {
    /// Score in percent; 0 when nothing was scored.
    pub fn percent(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.correct as f64 / self.total as f64
        }
    }
}

impl std::ops::Add for UasCount {
    type Output = UasCount;

    fn add(self, other: UasCount) -> UasCount {
        UasCount {
            correct: self.correct + other.correct,
            total: self.total + other.total,
        }
    }
}

fn check_alignment(index: usize, gold: &Sentence, predicted: &Sentence) -> Result<()> {
    if gold.len() != predicted.len() {
        return Err(Error::Mismatch {
            index,
            message: format!("{} gold tokens, {} predicted", gold.len(), predicted.len()),
        });
    }
    for (g, p) in gold.tokens.iter().zip(&predicted.tokens) {
        if g.form != p.form {
            return Err(Error::Mismatch {
                index,
                message: format!("token {}: form {:?} vs {:?}", g.id, g.form, p.form),
            });
        }
    }
    Ok(())
}

/// Unlabeled attachment counts for one sentence, skipping gold PUNCT tokens.
pub fn uas(gold: &Sentence, predicted: &Sentence) -> Result<UasCount> {
    sentence_uas(0, gold, predicted)
}

fn sentence_uas(index: usize, gold: &Sentence, predicted: &Sentence) -> Result<UasCount> {
    check_alignment(index, gold, predicted)?;
    let mut count = UasCount::default();
    for (g, p) in gold.tokens.iter().zip(&predicted.tokens) {
        if g.is_punct() {
            continue;
        }
        count.total += 1;
        if g.head == p.head {
            count.correct += 1;
        }
    }
    Ok(count)
}

/// Micro-averaged counts over a corpus.
pub fn corpus_uas(gold: &[Sentence], predicted: &[Sentence]) -> Result<UasCount> {
    if gold.len() != predicted.len() {
        return Err(Error::Mismatch {
            index: gold.len().min(predicted.len()),
            message: format!("{} gold sentences, {} predicted", gold.len(), predicted.len()),
        });
    }
    gold.iter()
        .zip(predicted)
        .enumerate()
        .try_fold(UasCount::default(), |acc, (i, (g, p))| {
            Ok(acc + sentence_uas(i, g, p)?)
        })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub language: String,
    pub transformation: TransformationId,
    pub uas_ud: Option<f64>,
    pub uas_transformed: Option<f64>,
    /// `uas_ud - uas_transformed`; positive means UD parsed better.
    pub diff: Option<f64>,
    pub excluded: bool,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Average per-seed scores on both sides. No-op corpora yield an excluded
/// row without scores.
pub fn compare_schemes(
    language: &str,
    transformation: TransformationId,
    ud: &[f64],
    transformed: &[f64],
    excluded: bool,
) -> Result<ComparisonRow> {
    if excluded {
        return Ok(ComparisonRow {
            language: language.to_string(),
            transformation,
            uas_ud: None,
            uas_transformed: None,
            diff: None,
            excluded: true,
        });
    }
    if ud.is_empty() || transformed.is_empty() {
        return Err(Error::InvalidArgument("empty seed list".to_string()));
    }
    if ud.len() != transformed.len() {
        return Err(Error::InvalidArgument(format!(
            "{} UD seeds but {} transformed seeds",
            ud.len(),
            transformed.len()
        )));
    }
    let (a, b) = (mean(ud), mean(transformed));
    Ok(ComparisonRow {
        language: language.to_string(),
        transformation,
        uas_ud: Some(a),
        uas_transformed: Some(b),
        diff: Some(a - b),
        excluded: false,
    })
}

/// Whether a lower-is-better metric prefers the scheme with the higher UAS.
/// `None` when the UAS values tie.
pub fn metric_coherence(metric: (f64, f64), uas: (f64, f64)) -> Option<bool> {
    if uas.0 == uas.1 {
        return None;
    }
    let ud_parses_better = uas.0 > uas.1;
    let ud_metric_better = metric.0 < metric.1;
    Some(ud_parses_better == ud_metric_better)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceRow {
    pub metric: String,
    pub coherent: usize,
    pub evaluated: usize,
    /// Configurations skipped because the UAS values tied.
    pub ties: usize,
    pub fraction: Option<f64>,
}

impl CoherenceRow {
    /// Tally coherence over `(metric pair, uas pair)` observations.
    pub fn tally(metric: &str, observations: impl IntoIterator<Item = ((f64, f64), (f64, f64))>) -> Self {
        let mut row = CoherenceRow {
            metric: metric.to_string(),
            coherent: 0,
            evaluated: 0,
            ties: 0,
            fraction: None,
        };
        for (m, u) in observations {
            match metric_coherence(m, u) {
                None => row.ties += 1,
                Some(c) => {
                    row.evaluated += 1;
                    row.coherent += usize::from(c);
                }
            }
        }
        if row.evaluated > 0 {
            row.fraction = Some(row.coherent as f64 / row.evaluated as f64);
        }
        row
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gold() -> Sentence {
        Sentence::from_tuples(&[
            ("a", "DET", 2, "det"),
            ("b", "NOUN", 3, "nsubj"),
            ("c", "VERB", 0, "root"),
            (".", "PUNCT", 3, "punct"),
        ])
    }

    #[test]
    fn punctuation_is_ignored() {
        let mut pred = gold();
        pred.attach(2, 1, "x");
        pred.attach(4, 1, "x");
        let c = uas(&gold(), &pred).unwrap();
        assert_eq!((c.correct, c.total), (2, 3));
        assert!((c.percent() - 66.67).abs() < 0.01);
    }

    #[test]
    fn perfect_and_mismatch() {
        assert_eq!(uas(&gold(), &gold()).unwrap().percent(), 100.0);
        let short = Sentence::from_tuples(&[("a", "DET", 0, "root")]);
        assert!(uas(&gold(), &short).is_err());
    }

    #[test]
    fn only_punct_sentence() {
        let s = Sentence::from_tuples(&[(".", "PUNCT", 0, "root")]);
        assert_eq!(uas(&s, &s).unwrap().total, 0);
    }

    #[test]
    fn comparison_sign() {
        let row = compare_schemes(
            "la",
            TransformationId::Coordination,
            &[60.69; 3],
            &[52.57; 3],
            false,
        )
        .unwrap();
        assert!((row.diff.unwrap() - 8.12).abs() < 1e-9);
        let ex = compare_schemes("zh", TransformationId::Mwe, &[], &[], true).unwrap();
        assert!(ex.excluded && ex.diff.is_none());
        assert!(compare_schemes("x", TransformationId::Det, &[], &[], false).is_err());
    }

    #[test]
    fn coherence_examples() {
        assert_eq!(metric_coherence((2.0, 1.5), (80.0, 82.0)), Some(true));
        assert_eq!(metric_coherence((1.5, 2.0), (80.0, 82.0)), Some(false));
        assert_eq!(metric_coherence((1.5, 2.0), (80.0, 80.0)), None);
    }
}
