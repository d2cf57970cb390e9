use crate::error::{Error, Result};
use crate::label::Label;

/// Pearson correlation; 0 when either side has zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n == 0 {
        return 0.0;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs[..n].iter().zip(&ys[..n]) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx.sqrt() * syy.sqrt())
}

/// CFS merit of a subset from its summed feature–class correlation and the
/// summed pairwise feature–feature correlation (both absolute).
pub fn merit(k: usize, sum_class_corr: f64, sum_pair_corr: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    // k·mean(r_cf) / sqrt(k + k(k-1)·mean(r_ff)), with mean(r_ff) over k(k-1)/2 pairs
    sum_class_corr / (k as f64 + 2.0 * sum_pair_corr).sqrt()
}

/// Greedy forward correlation-based feature selection.
///
/// `rows` holds one feature vector per example. Returns `k` feature indices
/// in the order they were added; each step adds the feature that maximizes
/// the merit of the grown subset, ties going to the lower index.
pub fn select_features_cfs(rows: &[Vec<f64>], labels: &[Label], k: usize) -> Result<Vec<usize>> {
    if rows.is_empty() {
        return Err(Error::InvalidData("feature selection needs a non-empty dataset".into()));
    }
    if rows.len() != labels.len() {
        return Err(Error::InvalidData(format!(
            "{} feature rows but {} labels",
            rows.len(),
            labels.len()
        )));
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(Error::InvalidData("feature rows have unequal lengths".into()));
    }
    if k > dim {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds feature dimension {dim}")));
    }

    let columns: Vec<Vec<f64>> = (0..dim).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let y: Vec<f64> = labels.iter().map(|l| l.index() as f64).collect();
    let class_corr: Vec<f64> = columns.iter().map(|c| pearson(c, &y).abs()).collect();

    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut in_set = vec![false; dim];
    // redundancy[j] = Σ_{s ∈ selected} |corr(j, s)|
    let mut redundancy = vec![0.0; dim];
    let mut sum_class = 0.0;
    let mut sum_pairs = 0.0;

    while selected.len() < k {
        let size = selected.len() + 1;
        let mut best: Option<(usize, f64)> = None;
        for j in (0..dim).filter(|j| !in_set[*j]) {
            let m = merit(size, sum_class + class_corr[j], sum_pairs + redundancy[j]);
            if best.map_or(true, |(_, bm)| m > bm) {
                best = Some((j, m));
            }
        }
        let (j, _) = best.expect("k <= dim leaves a candidate");
        in_set[j] = true;
        selected.push(j);
        sum_class += class_corr[j];
        sum_pairs += redundancy[j];
        for (other, red) in redundancy.iter_mut().enumerate() {
            if !in_set[other] {
                *red += pearson(&columns[other], &columns[j]).abs();
            }
        }
    }
    Ok(selected)
}
