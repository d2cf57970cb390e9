use std::fmt::Write as _;

use super::{EvalReport, McNemarResult};

#[derive(Debug, Clone, PartialEq)]
pub struct NamedReport {
    pub name: String,
    pub report: EvalReport,
}

const METRIC_COLUMNS: [&str; 9] = [
    "layout_p",
    "layout_r",
    "layout_f1",
    "genuine_p",
    "genuine_r",
    "genuine_f1",
    "weighted_p",
    "weighted_r",
    "weighted_f1",
];

/// Three decimals, ties rounded half to even on the exact binary value.
pub fn format_metric(v: f64) -> String {
    // std's fixed-precision formatting rounds the exact value half-to-even.
    format!("{v:.3}")
}

fn metric_row(r: &EvalReport) -> [f64; 9] {
    [
        r.layout.precision,
        r.layout.recall,
        r.layout.f1,
        r.genuine.precision,
        r.genuine.recall,
        r.genuine.f1,
        r.weighted.precision,
        r.weighted.recall,
        r.weighted.f1,
    ]
}

/// `report.csv`: one row per classifier, a name column and nine metric columns.
pub fn report_csv(reports: &[NamedReport]) -> String {
    let mut out = String::from("name");
    for c in METRIC_COLUMNS {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for r in reports {
        out.push_str(&csv_field(&r.name));
        for v in metric_row(&r.report) {
            out.push(',');
            out.push_str(&format_metric(v));
        }
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Aligned text table grouped as Layout | Genuine | Weighted avg.
pub fn report_text(reports: &[NamedReport]) -> String {
    let name_w = reports
        .iter()
        .map(|r| r.name.chars().count())
        .chain(std::iter::once("Approach".len()))
        .max()
        .unwrap_or(8);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<name_w$} | {:^20} | {:^20} | {:^20}",
        "", "Layout", "Genuine", "Weighted avg."
    );
    let _ = writeln!(
        out,
        "{:<name_w$} | {:>6} {:>6} {:>6} | {:>6} {:>6} {:>6} | {:>6} {:>6} {:>6}",
        "Approach", "P", "R", "F1", "P", "R", "F1", "P", "R", "F1"
    );
    let _ = writeln!(out, "{}", "-".repeat(name_w + 69));
    for r in reports {
        let m = metric_row(&r.report).map(format_metric);
        let _ = writeln!(
            out,
            "{:<name_w$} | {:>6} {:>6} {:>6} | {:>6} {:>6} {:>6} | {:>6} {:>6} {:>6}",
            r.name, m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8]
        );
    }
    out
}

/// `mcnemar.csv`: one row per classifier pair.
pub fn mcnemar_csv(pairs: &[(String, String, McNemarResult)]) -> String {
    let mut out = String::from("model_a,model_b,b,c,statistic,p_value\n");
    for (a, b, r) in pairs {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{:.6}",
            csv_field(a),
            csv_field(b),
            r.b,
            r.c,
            r.statistic,
            r.p_value
        );
    }
    out
}
