//! Visual features and classification from exported CNN models.
//!
//! A model is an ONNX file plus a `model.json` [`ModelManifest`] naming its
//! input, the tapped block outputs, the top output and the optional sigmoid
//! head. Frozen and adapted networks differ only in which file is loaded.

mod extractor;
mod gap;
mod manifest;
pub mod stub;

use serde::{Deserialize, Serialize};

pub use extractor::{classify_visual, extract_all, extract_top, label_for_probability, VisualModel};
pub use gap::{global_average_pool, FeatureMap};
pub use manifest::{
    Backbone, ChannelOrder, ModelManifest, Mode, OutputSpec, Preprocessing, TensorLayout, INPUT_SIZE, MANIFEST_FILE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VisualScope {
    Top,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisualFeatureVector {
    pub values: Vec<f64>,
    pub scope: VisualScope,
    pub backbone: Backbone,
    pub mode: Mode,
}
