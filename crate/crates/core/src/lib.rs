//! Genuine vs. layout web table classification.
//!
//! The pipeline takes web pages out of WARC archives, samples one `<table>`
//! per page, parses it into a span-expanded [`TableGrid`], and classifies it
//! as *genuine* (relational data) or *layout* (formatting, navigation) using
//! explicit HTML features, visual features from CNN models run on a rendered
//! image of the table, or both.
//!
//! Stages map onto modules:
//!
//! * [`corpus`]: WARC reading, table sampling, language filter, dataset manifest.
//! * [`table`]: HTML table parsing and the structural size filter.
//! * [`features`]: the fixed HTML feature catalogue and correlation-based selection.
//! * [`render`]: external renderer orchestration, asset fetching, image preprocessing.
//! * [`visual`]: ONNX model execution, global average pooling, visual classification.
//! * [`classify`]: random forest and MLP classifiers over any feature scope.
//! * [`eval`]: stratified splits, precision/recall/F1 reports, McNemar's test.
//! * [`synth`]: a synthetic corpus of genuine-like and layout-like tables.

pub mod classify;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
mod label;
pub mod render;
pub mod synth;
pub mod table;
pub mod visual;

pub use error::{Error, Result};
pub use label::{Label, Split};
pub use table::{Cell, Slot, TableGrid};

pub use classify::{ForestConfig, ForestModel, MlpConfig, MlpModel};
pub use corpus::{DatasetManifest, LabeledExample, PageRecord};
pub use eval::{ConfusionMatrix, EvalReport, McNemarResult};
pub use features::{FeatureCatalogue, HtmlFeatureVector};
pub use render::ImageTensor;
pub use visual::{ModelManifest, VisualFeatureVector};
