//! Evaluation protocol: stratified splitting, per-class and support-weighted
//! precision/recall/F1, McNemar's test, and tabular reports.

mod mcnemar;
mod metrics;
mod predictions;
mod report;
mod split;

pub use mcnemar::{chi2_sf_df1, mcnemar, McNemarResult};
pub use metrics::{f1_from_pr, score, ClassMetrics, ConfusionMatrix, EvalReport};
pub use predictions::{load_predictions, read_predictions, save_predictions, write_predictions, Prediction};
pub use report::{format_metric, mcnemar_csv, report_csv, report_text, NamedReport};
pub use split::{stratified_split, SplitAssignment};
