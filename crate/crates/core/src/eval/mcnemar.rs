use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    /// Examples classifier A gets right and B gets wrong.
    pub b: usize,
    /// Examples classifier A gets wrong and B gets right.
    pub c: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// Upper tail of the chi-square distribution with one degree of freedom:
/// P(X > x) = erfc(sqrt(x / 2)).
pub fn chi2_sf_df1(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    statrs::function::erf::erfc((x / 2.0).sqrt()).clamp(0.0, 1.0)
}

impl McNemarResult {
    /// Edwards continuity-corrected statistic max(0, |b−c|−1)² / (b+c).
    pub fn from_counts(b: usize, c: usize) -> Self {
        if b + c == 0 {
            return McNemarResult {
                b,
                c,
                statistic: 0.0,
                p_value: 1.0,
            };
        }
        let diff = (b as f64 - c as f64).abs() - 1.0;
        let statistic = diff.max(0.0).powi(2) / (b + c) as f64;
        McNemarResult {
            b,
            c,
            statistic,
            p_value: chi2_sf_df1(statistic),
        }
    }
}

/// McNemar's test on paired predictions of two classifiers.
pub fn mcnemar(pred_a: &[Label], pred_b: &[Label], gold: &[Label]) -> Result<McNemarResult> {
    if pred_a.len() != gold.len() || pred_b.len() != gold.len() {
        return Err(Error::InvalidData("McNemar's test needs equal-length prediction sets".into()));
    }
    if gold.is_empty() {
        return Err(Error::InvalidData("McNemar's test needs at least one example".into()));
    }
    let (mut b, mut c) = (0, 0);
    for ((a, bb), g) in pred_a.iter().zip(pred_b).zip(gold) {
        match (a == g, bb == g) {
            (true, false) => b += 1,
            (false, true) => c += 1,
            _ => {}
        }
    }
    Ok(McNemarResult::from_counts(b, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// P(|Z| > z) for a standard normal, by Simpson integration of the density.
    fn normal_two_sided_tail(z: f64) -> f64 {
        let steps = 20_000;
        let h = z / steps as f64;
        let pdf = |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = pdf(0.0) + pdf(z);
        for i in 1..steps {
            let x = i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * pdf(x);
        }
        let central = s * h / 3.0;
        1.0 - 2.0 * central
    }

    #[test]
    fn symmetric_disagreement() {
        let r = McNemarResult::from_counts(10, 10);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn five_versus_fifteen() {
        let r = McNemarResult::from_counts(5, 15);
        assert!((r.statistic - 4.05).abs() < 1e-12);
        let oracle = normal_two_sided_tail(4.05f64.sqrt());
        assert!((r.p_value - oracle).abs() < 1e-6, "{} vs {oracle}", r.p_value);
        assert!((r.p_value - 0.044).abs() <= 0.002);
    }

    #[test]
    fn no_disagreements() {
        let r = McNemarResult::from_counts(0, 0);
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn counts_from_predictions() {
        use Label::*;
        let gold = [Genuine, Genuine, Layout, Layout];
        let a = [Genuine, Layout, Layout, Genuine];
        let b = [Layout, Genuine, Layout, Layout];
        let r = mcnemar(&a, &b, &gold).unwrap();
        assert_eq!((r.b, r.c), (1, 2));
        let swapped = mcnemar(&b, &a, &gold).unwrap();
        assert_eq!((swapped.b, swapped.c), (2, 1));
        assert_eq!(swapped.statistic, r.statistic);
        assert_eq!(swapped.p_value, r.p_value);
    }

    #[test]
    fn one_disagreement_has_zero_statistic() {
        let r = McNemarResult::from_counts(1, 0);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }
}
