use serde::{Deserialize, Serialize};

use crate::table::{Cell, TableGrid};

pub const CATALOGUE_VERSION: u32 = 1;

/// Feature names of catalogue version 1, in vector order.
pub const CATALOGUE_V1: [&str; 26] = [
    "n_rows",
    "n_cols",
    "cell_count",
    "avg_cell_chars",
    "var_cell_chars",
    "min_cell_chars",
    "max_cell_chars",
    "row_col_ratio",
    "ratio_empty",
    "ratio_numeric",
    "ratio_alphabetic",
    "ratio_link",
    "ratio_image",
    "ratio_form",
    "ratio_header",
    "ratio_colspan",
    "ratio_rowspan",
    "has_nested",
    "avg_row_len_var",
    "avg_col_len_var",
    "col_type_homogeneity",
    "row_type_homogeneity",
    "first_row_header_ratio",
    "first_col_header_ratio",
    "first_row_distinctness",
    "avg_links_per_cell",
];

/// Catalogue indices of features bounded to [0, 1].
pub const RATIO_FEATURES: [usize; 15] = [8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 20, 21, 22, 23, 24];

/// Share of non-space characters a cell needs in a class to be typed as it.
const TYPE_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureCatalogue {
    pub version: u32,
    pub names: Vec<String>,
}

impl FeatureCatalogue {
    pub fn v1() -> Self {
        FeatureCatalogue {
            version: CATALOGUE_VERSION,
            names: CATALOGUE_V1.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HtmlFeatureVector {
    pub values: Vec<f64>,
    pub catalogue_version: u32,
}

impl HtmlFeatureVector {
    pub fn get(&self, name: &str) -> Option<f64> {
        CATALOGUE_V1
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Empty,
    Numeric,
    Alphabetic,
    Mixed,
}

fn is_numeric_char(ch: char) -> bool {
    ch.is_ascii_digit()
        || matches!(
            ch,
            '.' | ',' | '-' | '%' | '$' | '€' | '£' | '¥' | '¢' | '₹' | '₽' | '₩' | '₺' | '₪' | '₫' | '฿' | '₴' | '₦'
        )
}

pub fn cell_kind(text: &str) -> CellKind {
    let mut total = 0usize;
    let mut numeric = 0usize;
    let mut alpha = 0usize;
    for ch in text.chars().filter(|c| !c.is_whitespace()) {
        total += 1;
        if is_numeric_char(ch) {
            numeric += 1;
        } else if ch.is_alphabetic() {
            alpha += 1;
        }
    }
    if total == 0 {
        return CellKind::Empty;
    }
    let total = total as f64;
    if numeric as f64 >= TYPE_THRESHOLD * total {
        CellKind::Numeric
    } else if alpha as f64 >= TYPE_THRESHOLD * total {
        CellKind::Alphabetic
    } else {
        CellKind::Mixed
    }
}

fn ratio(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Population variance.
fn variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

fn dominant_share(kinds: &[CellKind]) -> f64 {
    if kinds.is_empty() {
        return 0.0;
    }
    let mut counts = [0usize; 4];
    for k in kinds {
        counts[*k as usize] += 1;
    }
    *counts.iter().max().unwrap() as f64 / kinds.len() as f64
}

/// Computes the catalogue-v1 feature vector of a grid.
///
/// Cell-level ratios and statistics range over origin cells, so a spanning
/// cell counts once. Per-row and per-column aggregates group origin cells by
/// the row/column they start in; groups without any origin cell are skipped.
pub fn extract_features(grid: &TableGrid) -> HtmlFeatureVector {
    let origins: Vec<(usize, usize, &Cell)> = grid.origins().collect();
    let n = origins.len();
    let lengths: Vec<f64> = origins.iter().map(|(_, _, c)| c.text.chars().count() as f64).collect();
    let kinds: Vec<CellKind> = origins.iter().map(|(_, _, c)| cell_kind(&c.text)).collect();

    let count = |pred: &dyn Fn(&Cell) -> bool| origins.iter().filter(|(_, _, c)| pred(c)).count();

    let mut row_lengths = vec![Vec::new(); grid.n_rows];
    let mut col_lengths = vec![Vec::new(); grid.n_cols];
    let mut row_kinds = vec![Vec::new(); grid.n_rows];
    let mut col_kinds = vec![Vec::new(); grid.n_cols];
    for (i, (r, c, _)) in origins.iter().enumerate() {
        row_lengths[*r].push(lengths[i]);
        col_lengths[*c].push(lengths[i]);
        row_kinds[*r].push(kinds[i]);
        col_kinds[*c].push(kinds[i]);
    }
    let group_mean = |groups: &[Vec<f64>], f: &dyn Fn(&[f64]) -> f64| {
        let vals: Vec<f64> = groups.iter().filter(|g| !g.is_empty()).map(|g| f(g)).collect();
        mean(&vals)
    };
    let homogeneity = |groups: &[Vec<CellKind>]| {
        let vals: Vec<f64> = groups.iter().filter(|g| !g.is_empty()).map(|g| dominant_share(g)).collect();
        mean(&vals)
    };

    let first_row: Vec<&Cell> = origins.iter().filter(|(r, _, _)| *r == 0).map(|(_, _, c)| *c).collect();
    let first_col: Vec<&Cell> = origins.iter().filter(|(_, c, _)| *c == 0).map(|(_, _, c)| *c).collect();
    let distinct_first_row = {
        let mut texts: Vec<&str> = first_row.iter().map(|c| c.text.as_str()).collect();
        texts.sort_unstable();
        texts.dedup();
        texts.len()
    };
    let total_links: u64 = origins.iter().map(|(_, _, c)| u64::from(c.n_links)).sum();

    let values = vec![
        grid.n_rows as f64,
        grid.n_cols as f64,
        n as f64,
        mean(&lengths),
        variance(&lengths),
        lengths.iter().cloned().reduce(f64::min).unwrap_or(0.0),
        lengths.iter().cloned().reduce(f64::max).unwrap_or(0.0),
        if grid.n_cols == 0 { 0.0 } else { grid.n_rows as f64 / grid.n_cols as f64 },
        ratio(kinds.iter().filter(|k| **k == CellKind::Empty).count(), n),
        ratio(kinds.iter().filter(|k| **k == CellKind::Numeric).count(), n),
        ratio(kinds.iter().filter(|k| **k == CellKind::Alphabetic).count(), n),
        ratio(count(&|c| c.n_links > 0), n),
        ratio(count(&|c| c.n_images > 0), n),
        ratio(count(&|c| c.n_form_controls > 0), n),
        ratio(count(&|c| c.is_header), n),
        ratio(count(&|c| c.colspan > 1), n),
        ratio(count(&|c| c.rowspan > 1), n),
        if grid.has_nested_table { 1.0 } else { 0.0 },
        group_mean(&row_lengths, &variance),
        group_mean(&col_lengths, &variance),
        homogeneity(&col_kinds),
        homogeneity(&row_kinds),
        ratio(first_row.iter().filter(|c| c.is_header).count(), first_row.len()),
        ratio(first_col.iter().filter(|c| c.is_header).count(), first_col.len()),
        ratio(distinct_first_row, first_row.len()),
        if n == 0 { 0.0 } else { total_links as f64 / n as f64 },
    ];
    debug_assert_eq!(values.len(), CATALOGUE_V1.len());

    HtmlFeatureVector {
        values,
        catalogue_version: CATALOGUE_VERSION,
    }
}
