//! Competition metrics: per-class precision/recall/F1, macro-F1 and accuracy
//! for subtask A, exact match ratio and averaged macro-F1 for subtask B, plus
//! confusion matrices.
//!
//! Zero-denominator convention: any metric whose denominator is 0 scores 0
//! (never NaN). macro-F1 averages the F1 of both classes unweighted.

use thiserror::Error;

use crate::corpus::{LabelDim, LabelSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("length mismatch: {true_len} gold vs {pred_len} predicted")]
    LengthMismatch { true_len: usize, pred_len: usize },
    #[error("cannot score zero pairs")]
    Empty,
}

fn check_lengths<T, U>(y_true: &[T], y_pred: &[U]) -> Result<(), EvalError> {
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch {
            true_len: y_true.len(),
            pred_len: y_pred.len(),
        });
    }
    Ok(())
}

fn safe_div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Binary confusion counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.false_neg + self.true_neg
    }

    /// Precision of the positive class.
    pub fn precision(&self) -> f64 {
        safe_div(self.true_pos as f64, (self.true_pos + self.false_pos) as f64)
    }

    /// Recall of the positive class.
    pub fn recall(&self) -> f64 {
        safe_div(self.true_pos as f64, (self.true_pos + self.false_neg) as f64)
    }

    pub fn accuracy(&self) -> f64 {
        safe_div((self.true_pos + self.true_neg) as f64, self.total() as f64)
    }

    /// Counts with the positive/negative roles swapped.
    pub fn flipped(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            true_pos: self.true_neg,
            false_pos: self.false_neg,
            false_neg: self.false_pos,
            true_neg: self.true_pos,
        }
    }
}

/// FP / (FP + TN), 0 when the gold standard has no negatives.
pub fn false_positive_rate(cm: &ConfusionMatrix) -> f64 {
    safe_div(cm.false_pos as f64, (cm.false_pos + cm.true_neg) as f64)
}

/// Precision/recall/F1 for one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold-standard instances of this class.
    pub support: usize,
}

fn class_metrics(cm: &ConfusionMatrix) -> ClassMetrics {
    let p = cm.precision();
    let r = cm.recall();
    ClassMetrics {
        precision: p,
        recall: r,
        f1: safe_div(2.0 * p * r, p + r),
        support: cm.true_pos + cm.false_neg,
    }
}

/// Full binary report: both classes plus the aggregates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub pos: ClassMetrics,
    pub neg: ClassMetrics,
    pub macro_f1: f64,
    pub accuracy: f64,
}

impl MetricReport {
    pub fn from_confusion(cm: &ConfusionMatrix) -> MetricReport {
        let pos = class_metrics(cm);
        let neg = class_metrics(&cm.flipped());
        MetricReport {
            pos,
            neg,
            macro_f1: (pos.f1 + neg.f1) / 2.0,
            accuracy: cm.accuracy(),
        }
    }
}

/// Tallies the confusion matrix of a binary prediction.
pub fn confusion(y_true: &[bool], y_pred: &[bool]) -> Result<ConfusionMatrix, EvalError> {
    check_lengths(y_true, y_pred)?;
    let mut cm = ConfusionMatrix::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (true, true) => cm.true_pos += 1,
            (false, true) => cm.false_pos += 1,
            (true, false) => cm.false_neg += 1,
            (false, false) => cm.true_neg += 1,
        }
    }
    Ok(cm)
}

/// Per-class and aggregate metrics for one binary task.
pub fn binary_metrics(y_true: &[bool], y_pred: &[bool]) -> Result<MetricReport, EvalError> {
    if y_true.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(MetricReport::from_confusion(&confusion(y_true, y_pred)?))
}

/// Two-class macro-averaged F1 (the subtask A headline number).
pub fn macro_f1(y_true: &[bool], y_pred: &[bool]) -> Result<f64, EvalError> {
    Ok(binary_metrics(y_true, y_pred)?.macro_f1)
}

/// Exact match ratio: the share of tweets whose HS, TR and AG all match.
/// Empty input scores 0.
pub fn emr(y_true: &[LabelSet], y_pred: &[LabelSet]) -> Result<f64, EvalError> {
    check_lengths(y_true, y_pred)?;
    if y_true.is_empty() {
        return Ok(0.0);
    }
    let hits = y_true.iter().zip(y_pred).filter(|(t, p)| t == p).count();
    Ok(hits as f64 / y_true.len() as f64)
}

/// Subtask B partial-match score: the mean of the three label dimensions'
/// macro-F1, each computed independently.
pub fn subtask_b_score(y_true: &[LabelSet], y_pred: &[LabelSet]) -> Result<f64, EvalError> {
    check_lengths(y_true, y_pred)?;
    if y_true.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut sum = 0.0;
    for dim in LabelDim::ALL {
        let t: Vec<bool> = y_true.iter().map(|l| l.get(dim)).collect();
        let p: Vec<bool> = y_pred.iter().map(|l| l.get(dim)).collect();
        sum += macro_f1(&t, &p)?;
    }
    Ok(sum / 3.0)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;

    fn labels(bits: &[(u8, u8, u8)]) -> Vec<LabelSet> {
        bits.iter()
            .map(|&(h, t, a)| LabelSet::new(h == 1, t == 1, a == 1).unwrap())
            .collect()
    }

    #[test]
    fn perfect_prediction_scores_one() {
        let y = [true, false, true, true];
        let r = binary_metrics(&y, &y).unwrap();
        assert_eq!(r.pos.f1, 1.0);
        assert_eq!(r.neg.f1, 1.0);
        assert_eq!(r.macro_f1, 1.0);
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn hand_counted_report() {
        // TP=2, FP=1, FN=1, TN=6.
        let y_true = [true, true, true, false, false, false, false, false, false, false];
        let y_pred = [true, true, false, true, false, false, false, false, false, false];
        let cm = confusion(&y_true, &y_pred).unwrap();
        assert_eq!(
            cm,
            ConfusionMatrix { true_pos: 2, false_pos: 1, false_neg: 1, true_neg: 6 }
        );
        let r = binary_metrics(&y_true, &y_pred).unwrap();
        assert_abs_diff_eq!(r.pos.precision, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.pos.recall, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.pos.f1, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.accuracy, 0.8, epsilon = 1e-12);
        assert_eq!(r.pos.support, 3);
    }

    #[test]
    fn all_negative_predictions_zero_out_the_positive_class() {
        let y_true = [true, false, true, false];
        let y_pred = [false; 4];
        let r = binary_metrics(&y_true, &y_pred).unwrap();
        assert_eq!(r.pos.precision, 0.0);
        assert_eq!(r.pos.recall, 0.0);
        assert_eq!(r.pos.f1, 0.0);
        assert!(r.macro_f1.is_finite());
    }

    #[test]
    fn length_mismatch_and_empty_are_rejected() {
        assert_eq!(
            binary_metrics(&[true], &[true, false]).unwrap_err(),
            EvalError::LengthMismatch { true_len: 1, pred_len: 2 }
        );
        assert_eq!(binary_metrics(&[], &[]).unwrap_err(), EvalError::Empty);
    }

    #[test]
    fn emr_counts_full_matches_only() {
        let gold = labels(&[(1, 1, 0), (0, 0, 0), (1, 0, 1)]);
        assert_eq!(emr(&gold, &gold).unwrap(), 1.0);
        // One tweet differs only in AG.
        let pred = labels(&[(1, 1, 0), (0, 0, 0), (1, 0, 0)]);
        assert_abs_diff_eq!(emr(&gold, &pred).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
        let none = labels(&[(0, 0, 0), (1, 0, 0), (1, 1, 1)]);
        assert_eq!(emr(&gold, &none).unwrap(), 0.0);
        assert_eq!(emr(&[], &[]).unwrap(), 0.0);
    }

    #[test]
    fn subtask_b_averages_the_three_dimensions() {
        let gold = labels(&[(1, 1, 0), (1, 0, 1), (0, 0, 0), (1, 1, 1), (0, 0, 0)]);
        let pred = labels(&[(1, 0, 0), (1, 0, 1), (0, 0, 0), (0, 0, 0), (1, 0, 1)]);
        assert_eq!(subtask_b_score(&gold, &gold).unwrap(), 1.0);

        let mut mean = 0.0;
        for dim in LabelDim::ALL {
            let t: Vec<bool> = gold.iter().map(|l| l.get(dim)).collect();
            let p: Vec<bool> = pred.iter().map(|l| l.get(dim)).collect();
            mean += macro_f1(&t, &p).unwrap();
        }
        mean /= 3.0;
        assert_abs_diff_eq!(subtask_b_score(&gold, &pred).unwrap(), mean, epsilon = 1e-12);
        // Mean of the Table-V-like component scores.
        assert_abs_diff_eq!((0.67 + 0.83 + 0.61) / 3.0, 0.7033, epsilon = 1e-4);
    }

    #[test]
    fn fpr_matches_hand_arithmetic() {
        let cm = ConfusionMatrix { true_pos: 0, false_pos: 18, false_neg: 0, true_neg: 82 };
        assert_abs_diff_eq!(false_positive_rate(&cm), 0.18, epsilon = 1e-12);
        let empty = ConfusionMatrix::default();
        assert_eq!(false_positive_rate(&empty), 0.0);
    }

    #[test]
    fn disjoint_predictions_have_no_agreeing_counts() {
        let y_true = [true, false, true];
        let y_pred = [false, true, false];
        let cm = confusion(&y_true, &y_pred).unwrap();
        assert_eq!(cm.true_pos, 0);
        assert_eq!(cm.true_neg, 0);
        assert_eq!(cm.total(), 3);
    }

    fn any_labels(n: usize) -> impl Strategy<Value = Vec<LabelSet>> {
        prop::collection::vec(
            (any::<bool>(), any::<bool>(), any::<bool>()).prop_map(|(h, t, a)| {
                if h {
                    LabelSet::new(true, t, a).unwrap()
                } else {
                    LabelSet::new(false, false, false).unwrap()
                }
            }),
            n..n + 1,
        )
    }

    proptest! {
        #[test]
        fn confusion_matches_an_independent_tally(
            pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..1000)
        ) {
            let (y_true, y_pred): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
            let cm = confusion(&y_true, &y_pred).unwrap();
            let count = |t: bool, p: bool| {
                y_true.iter().zip(&y_pred).filter(|&(&a, &b)| a == t && b == p).count()
            };
            prop_assert_eq!(cm.true_pos, count(true, true));
            prop_assert_eq!(cm.false_pos, count(false, true));
            prop_assert_eq!(cm.false_neg, count(true, false));
            prop_assert_eq!(cm.true_neg, count(false, false));
        }

        #[test]
        fn metrics_stay_in_unit_range_and_finite(
            pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..200)
        ) {
            let (y_true, y_pred): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
            let r = binary_metrics(&y_true, &y_pred).unwrap();
            for v in [
                r.pos.precision, r.pos.recall, r.pos.f1,
                r.neg.precision, r.neg.recall, r.neg.f1,
                r.macro_f1, r.accuracy,
            ] {
                prop_assert!((0.0..=1.0).contains(&v), "metric {} out of range", v);
            }
        }

        #[test]
        fn macro_f1_is_symmetric_under_class_swap(
            pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..200)
        ) {
            let (y_true, y_pred): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
            let flipped_t: Vec<bool> = y_true.iter().map(|b| !b).collect();
            let flipped_p: Vec<bool> = y_pred.iter().map(|b| !b).collect();
            let a = macro_f1(&y_true, &y_pred).unwrap();
            let b = macro_f1(&flipped_t, &flipped_p).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn emr_bounded_by_every_dimension_accuracy(
            (gold, pred) in (1usize..60).prop_flat_map(|n| (any_labels(n), any_labels(n)))
        ) {
            let score = emr(&gold, &pred).unwrap();
            for dim in LabelDim::ALL {
                let t: Vec<bool> = gold.iter().map(|l| l.get(dim)).collect();
                let p: Vec<bool> = pred.iter().map(|l| l.get(dim)).collect();
                let acc = binary_metrics(&t, &p).unwrap().accuracy;
                prop_assert!(score <= acc + 1e-12);
            }
        }
    }
}
