use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;

/// Binary confusion counts with `genuine` as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp_genuine: usize,
    pub fn_genuine: usize,
    pub fp_genuine: usize,
    pub tn_genuine: usize,
}

impl ConfusionMatrix {
    pub fn from_predictions(predictions: &[Label], gold: &[Label]) -> Result<Self> {
        if predictions.len() != gold.len() {
            return Err(Error::InvalidData(format!(
                "{} predictions for {} gold labels",
                predictions.len(),
                gold.len()
            )));
        }
        let mut cm = ConfusionMatrix::default();
        for (p, g) in predictions.iter().zip(gold) {
            match (g, p) {
                (Label::Genuine, Label::Genuine) => cm.tp_genuine += 1,
                (Label::Genuine, Label::Layout) => cm.fn_genuine += 1,
                (Label::Layout, Label::Genuine) => cm.fp_genuine += 1,
                (Label::Layout, Label::Layout) => cm.tn_genuine += 1,
            }
        }
        Ok(cm)
    }

    /// Builds the matrix from counts stated with `layout` as the positive class.
    pub fn from_layout_counts(tp: usize, fn_: usize, fp: usize, tn: usize) -> Self {
        ConfusionMatrix {
            tp_genuine: tn,
            fn_genuine: fp,
            fp_genuine: fn_,
            tn_genuine: tp,
        }
    }

    pub fn total(&self) -> usize {
        self.tp_genuine + self.fn_genuine + self.fp_genuine + self.tn_genuine
    }

    /// (tp, fp, fn) with `label` as the positive class.
    fn counts_for(&self, label: Label) -> (usize, usize, usize) {
        match label {
            Label::Genuine => (self.tp_genuine, self.fp_genuine, self.fn_genuine),
            Label::Layout => (self.tn_genuine, self.fn_genuine, self.fp_genuine),
        }
    }

    pub fn support(&self, label: Label) -> usize {
        match label {
            Label::Genuine => self.tp_genuine + self.fn_genuine,
            Label::Layout => self.tn_genuine + self.fp_genuine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn safe_div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Harmonic mean of precision and recall, 0 when both are 0.
pub fn f1_from_pr(precision: f64, recall: f64) -> f64 {
    safe_div(2.0 * precision * recall, precision + recall)
}

impl ClassMetrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = safe_div(tp as f64, (tp + fp) as f64);
        let recall = safe_div(tp as f64, (tp + fn_) as f64);
        ClassMetrics {
            precision,
            recall,
            f1: f1_from_pr(precision, recall),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub layout: ClassMetrics,
    pub genuine: ClassMetrics,
    pub weighted: ClassMetrics,
    pub support_layout: usize,
    pub support_genuine: usize,
    pub n: usize,
    pub confusion: ConfusionMatrix,
}

impl EvalReport {
    pub fn from_confusion(cm: ConfusionMatrix) -> Result<Self> {
        let n = cm.total();
        if n == 0 {
            return Err(Error::InvalidData("cannot score an empty prediction set".into()));
        }
        let per_class = |label| {
            let (tp, fp, fn_) = cm.counts_for(label);
            ClassMetrics::from_counts(tp, fp, fn_)
        };
        let layout = per_class(Label::Layout);
        let genuine = per_class(Label::Genuine);
        let (sl, sg) = (cm.support(Label::Layout) as f64, cm.support(Label::Genuine) as f64);
        let w = |a: f64, b: f64| (sl * a + sg * b) / n as f64;
        Ok(EvalReport {
            layout,
            genuine,
            weighted: ClassMetrics {
                precision: w(layout.precision, genuine.precision),
                recall: w(layout.recall, genuine.recall),
                f1: w(layout.f1, genuine.f1),
            },
            support_layout: cm.support(Label::Layout),
            support_genuine: cm.support(Label::Genuine),
            n,
            confusion: cm,
        })
    }

    pub fn class(&self, label: Label) -> &ClassMetrics {
        match label {
            Label::Layout => &self.layout,
            Label::Genuine => &self.genuine,
        }
    }

    pub fn accuracy(&self) -> f64 {
        (self.confusion.tp_genuine + self.confusion.tn_genuine) as f64 / self.n as f64
    }
}

/// Per-class and support-weighted precision, recall and F1.
pub fn score(predictions: &[Label], gold: &[Label]) -> Result<EvalReport> {
    EvalReport::from_confusion(ConfusionMatrix::from_predictions(predictions, gold)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn dwtc_retrained_reconstruction() {
        let cm = ConfusionMatrix::from_layout_counts(1171, 96, 83, 1272);
        let r = EvalReport::from_confusion(cm).unwrap();
        assert_eq!((r.support_layout, r.support_genuine), (1267, 1355));
        let expect = [
            (r.layout.precision, 0.934),
            (r.layout.recall, 0.924),
            (r.layout.f1, 0.929),
            (r.genuine.precision, 0.930),
            (r.genuine.recall, 0.939),
            (r.genuine.f1, 0.934),
            (r.weighted.f1, 0.932),
        ];
        for (got, want) in expect {
            assert!(close(got, want, 0.001), "{got} vs {want}");
        }
    }

    #[test]
    fn perfect_predictions() {
        let gold = [Label::Layout, Label::Genuine, Label::Genuine];
        let r = score(&gold, &gold).unwrap();
        for m in [r.layout, r.genuine, r.weighted] {
            assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn all_layout_predictor() {
        let gold: Vec<Label> = std::iter::repeat(Label::Layout)
            .take(1267)
            .chain(std::iter::repeat(Label::Genuine).take(1355))
            .collect();
        let pred = vec![Label::Layout; gold.len()];
        let r = score(&pred, &gold).unwrap();
        assert_eq!(r.genuine.recall, 0.0);
        assert_eq!(r.genuine.f1, 0.0);
        assert_eq!(r.genuine.precision, 0.0);
        assert_eq!(r.layout.recall, 1.0);
    }

    #[test]
    fn empty_and_mismatched_inputs() {
        assert!(score(&[], &[]).is_err());
        assert!(score(&[Label::Layout], &[]).is_err());
    }

    #[test]
    fn f1_definition() {
        assert_eq!(f1_from_pr(0.0, 0.0), 0.0);
        assert!(close(f1_from_pr(0.5, 1.0), 2.0 / 3.0, 1e-15));
    }
}
