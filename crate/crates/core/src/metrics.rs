//! Pixel accuracy, mean per-class accuracy and mean IoU over a confusion
//! matrix, with ignored classes and [`UNKNOWN`] pixels excluded.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{SegmentationMask, UNKNOWN};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    num_classes: usize,
    /// Row = truth, column = prediction.
    counts: Vec<u64>,
    ignore: BTreeSet<u8>,
    excluded: u64,
}

impl ConfusionMatrix {
    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.num_classes + pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.num_classes).map(|c| self.get(c, c)).sum()
    }

    /// Pixels skipped because of an ignored truth class or an UNKNOWN value.
    pub fn excluded(&self) -> u64 {
        self.excluded
    }

    pub fn ignore(&self) -> &BTreeSet<u8> {
        &self.ignore
    }

    pub fn to_csv(&self) -> String {
        let n = self.num_classes;
        let mut out = String::from("truth");
        for p in 0..n {
            out.push_str(&format!(",pred_{p}"));
        }
        out.push('\n');
        for t in 0..n {
            out.push_str(&t.to_string());
            for p in 0..n {
                out.push_str(&format!(",{}", self.get(t, p)));
            }
            out.push('\n');
        }
        out
    }
}

/// Tallies `(truth, pred)` pairs. Pixels whose truth is in `ignore`, or whose
/// truth or prediction is UNKNOWN, are counted as excluded.
pub fn confusion_matrix(
    pred: &SegmentationMask,
    truth: &SegmentationMask,
    num_classes: usize,
    ignore: &BTreeSet<u8>,
) -> Result<ConfusionMatrix> {
    if !pred.same_shape(truth) {
        return Err(Error::DimensionMismatch(format!(
            "prediction is {}x{}, truth is {}x{}",
            pred.height(),
            pred.width(),
            truth.height(),
            truth.width()
        )));
    }
    pred.validate_classes(num_classes)?;
    truth.validate_classes(num_classes)?;
    let mut counts = vec![0u64; num_classes * num_classes];
    let mut excluded = 0;
    for (&p, &t) in pred.classes().iter().zip(truth.classes()) {
        if t == UNKNOWN || p == UNKNOWN || ignore.contains(&t) {
            excluded += 1;
            continue;
        }
        counts[t as usize * num_classes + p as usize] += 1;
    }
    Ok(ConfusionMatrix {
        num_classes,
        counts,
        ignore: ignore.clone(),
        excluded,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class_id: u8,
    pub accuracy: f64,
    pub iou: f64,
    pub support: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub pa: f64,
    pub mpa: f64,
    pub miou: f64,
    /// Classes with non-zero truth support, ascending.
    pub per_class: Vec<ClassMetrics>,
    pub evaluated_pixels: u64,
    pub excluded_pixels: u64,
}

/// Class means run over classes with non-zero truth support only.
pub fn compute_metrics(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyEvaluation);
    }
    let n = cm.num_classes;
    let mut per_class = Vec::new();
    for c in 0..n {
        let support: u64 = (0..n).map(|p| cm.get(c, p)).sum();
        if support == 0 {
            continue;
        }
        let tp = cm.get(c, c);
        let predicted: u64 = (0..n).map(|t| cm.get(t, c)).sum();
        let fp = predicted - tp;
        let fn_ = support - tp;
        per_class.push(ClassMetrics {
            class_id: c as u8,
            accuracy: tp as f64 / support as f64,
            iou: tp as f64 / (tp + fp + fn_) as f64,
            support,
        });
    }
    let m = per_class.len() as f64;
    Ok(MetricsReport {
        pa: cm.trace() as f64 / total as f64,
        mpa: per_class.iter().map(|c| c.accuracy).sum::<f64>() / m,
        miou: per_class.iter().map(|c| c.iou).sum::<f64>() / m,
        per_class,
        evaluated_pixels: total,
        excluded_pixels: cm.excluded,
    })
}

pub fn evaluate(
    pred: &SegmentationMask,
    truth: &SegmentationMask,
    num_classes: usize,
    ignore: &BTreeSet<u8>,
) -> Result<MetricsReport> {
    compute_metrics(&confusion_matrix(pred, truth, num_classes, ignore)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(h: usize, w: usize, v: &[u8]) -> SegmentationMask {
        SegmentationMask::new(h, w, v.to_vec()).unwrap()
    }

    #[test]
    fn perfect_prediction() {
        let m = mask(2, 3, &[0, 1, 2, 2, 1, 0]);
        let cm = confusion_matrix(&m, &m, 3, &BTreeSet::new()).unwrap();
        assert_eq!(cm.trace(), 6);
        assert_eq!(cm.total(), 6);
        let r = compute_metrics(&cm).unwrap();
        assert_eq!((r.pa, r.mpa, r.miou), (1.0, 1.0, 1.0));
    }

    #[test]
    fn hand_computed_two_by_two() {
        // truth (0,1 / 1,1), pred (0,0 / 1,1):
        // class 0: TP 1, FN 0, FP 1 -> acc 1, IoU 1/2
        // class 1: TP 2, FN 1, FP 0 -> acc 2/3, IoU 2/3
        let pred = mask(2, 2, &[0, 0, 1, 1]);
        let truth = mask(2, 2, &[0, 1, 1, 1]);
        let r = evaluate(&pred, &truth, 2, &BTreeSet::new()).unwrap();
        assert_eq!(r.pa, 0.75);
        assert_eq!(r.mpa, (1.0 + 2.0 / 3.0) / 2.0);
        assert_eq!(r.miou, (0.5 + 2.0 / 3.0) / 2.0);
    }

    #[test]
    fn ignored_truth_yields_empty_evaluation() {
        let truth = mask(2, 2, &[0; 4]);
        let pred = mask(2, 2, &[0, 1, 0, 1]);
        let ignore = BTreeSet::from([0]);
        let cm = confusion_matrix(&pred, &truth, 2, &ignore).unwrap();
        assert_eq!(cm.total(), 0);
        assert_eq!(cm.excluded(), 4);
        assert!(matches!(compute_metrics(&cm), Err(Error::EmptyEvaluation)));
    }

    #[test]
    fn single_class_truth() {
        let m = mask(2, 2, &[3; 4]);
        let r = evaluate(&m, &m, 5, &BTreeSet::new()).unwrap();
        assert_eq!(r.per_class.len(), 1);
        assert_eq!((r.mpa, r.miou), (1.0, 1.0));
    }

    #[test]
    fn unknown_pixels_are_excluded() {
        let pred = mask(1, 4, &[UNKNOWN, 1, 1, 0]);
        let truth = mask(1, 4, &[1, UNKNOWN, 1, 0]);
        let r = evaluate(&pred, &truth, 2, &BTreeSet::new()).unwrap();
        assert_eq!(r.evaluated_pixels, 2);
        assert_eq!(r.excluded_pixels, 2);
        assert_eq!(r.pa, 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let a = mask(2, 2, &[0; 4]);
        let b = mask(1, 4, &[0; 4]);
        assert!(matches!(
            confusion_matrix(&a, &b, 2, &BTreeSet::new()),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
