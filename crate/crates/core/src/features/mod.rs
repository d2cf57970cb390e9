//! Explicit HTML feature extraction and feature-matrix I/O.

mod cfs;
mod html;
mod matrix;

pub use cfs::{merit, pearson, select_features_cfs};
pub use html::{
    cell_kind, extract_features, CellKind, FeatureCatalogue, HtmlFeatureVector, CATALOGUE_V1,
    CATALOGUE_VERSION, RATIO_FEATURES,
};
pub use matrix::{FeatureMatrix, FeatureRow};
