//! Random forest and MLP classifiers over HTML, visual, or joint feature
//! vectors, plus model persistence.

mod forest;
mod mlp;
pub mod tree;

use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

pub use forest::{bootstrap_indices, FeaturesPerSplit, ForestConfig, ForestModel, PRESET_NAMES};
pub use mlp::{EpochLog, MlpConfig, MlpModel, Weights};

use crate::corpus::Provenance;
use crate::error::{Error, Result};
use crate::features::HtmlFeatureVector;
use crate::label::Label;
use crate::visual::VisualFeatureVector;

/// Version of the `*.forest.json` / `*.mlp.json` file formats.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureScope {
    Html,
    VisualTop,
    VisualAll,
    Joint,
}

impl FeatureScope {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureScope::Html => "html",
            FeatureScope::VisualTop => "visual_top",
            FeatureScope::VisualAll => "visual_all",
            FeatureScope::Joint => "joint",
        }
    }
}

impl std::str::FromStr for FeatureScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "html" => Ok(FeatureScope::Html),
            "visual_top" | "visual-top" => Ok(FeatureScope::VisualTop),
            "visual_all" | "visual-all" => Ok(FeatureScope::VisualAll),
            "joint" => Ok(FeatureScope::Joint),
            other => Err(Error::InvalidArgument(format!(
                "unknown feature scope `{other}`; expected html, visual_top, visual_all or joint"
            ))),
        }
    }
}

impl std::fmt::Display for FeatureScope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Shared preconditions of both trainers.
pub(crate) fn check_training_data(x: &[Vec<f64>], y: &[Label], feature_names: &[String]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidData(format!("{} feature rows but {} labels", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::InvalidData("need at least 2 training examples".into()));
    }
    if feature_names.is_empty() {
        return Err(Error::InvalidData("feature vectors are empty".into()));
    }
    for row in x {
        if row.len() != feature_names.len() {
            return Err(Error::Dimension {
                expected: feature_names.len(),
                found: row.len(),
            });
        }
        if let Some(c) = row.iter().position(|v| v.is_nan()) {
            return Err(Error::NanFeature(feature_names[c].clone()));
        }
    }
    for label in Label::ALL {
        if !y.contains(&label) {
            return Err(Error::InvalidData(format!("training data has no `{label}` examples; both classes are required")));
        }
    }
    Ok(())
}

/// HTML values followed by visual values.
pub fn concat_features(html: &HtmlFeatureVector, visual: &VisualFeatureVector) -> Vec<f64> {
    debug_assert!(!visual.values.is_empty());
    let mut out = Vec::with_capacity(html.values.len() + visual.values.len());
    out.extend_from_slice(&html.values);
    out.extend_from_slice(&visual.values);
    out
}

/// Layout for nested grids when the flag is on and the model is HTML-only;
/// `None` means the model decides.
pub fn nested_default(enabled: bool, scope: FeatureScope, has_nested_table: bool) -> Option<Label> {
    (enabled && scope == FeatureScope::Html && has_nested_table).then_some(Label::Layout)
}

/// A loaded model of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Forest(ForestModel),
    Mlp(MlpModel),
}

impl Model {
    pub fn feature_names(&self) -> &[String] {
        match self {
            Model::Forest(m) => &m.feature_names,
            Model::Mlp(m) => &m.feature_names,
        }
    }

    pub fn feature_scope(&self) -> FeatureScope {
        match self {
            Model::Forest(m) => m.feature_scope,
            Model::Mlp(m) => m.feature_scope,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<(Label, f64)> {
        match self {
            Model::Forest(m) => m.predict(x),
            Model::Mlp(m) => m.predict(x),
        }
    }

    pub fn set_provenance(&mut self, provenance: Provenance) {
        match self {
            Model::Forest(m) => m.provenance = Some(provenance),
            Model::Mlp(m) => m.provenance = Some(provenance),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        match self {
            Model::Forest(m) => save_forest(m, path),
            Model::Mlp(m) => save_mlp(m, path),
        }
    }
}

#[derive(Deserialize)]
struct Peek {
    format_version: u32,
    #[serde(default)]
    kind: Option<String>,
}

fn read_checked(path: &Path) -> Result<(String, Peek)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let peek: Peek = serde_json::from_str(&text)?;
    if peek.format_version != FORMAT_VERSION {
        return Err(Error::ModelVersion {
            found: peek.format_version,
            expected: FORMAT_VERSION,
        });
    }
    Ok((text, peek))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Serialize, Deserialize)]
struct ForestFile {
    kind: String,
    #[serde(flatten)]
    model: ForestModel,
}

pub fn save_forest(model: &ForestModel, path: &Path) -> Result<()> {
    let file = ForestFile {
        kind: "forest".into(),
        model: model.clone(),
    };
    write_json(&file, path)
}

pub fn load_forest(path: &Path) -> Result<ForestModel> {
    let (text, _) = read_checked(path)?;
    let file: ForestFile = serde_json::from_str(&text)?;
    let m = file.model;
    let dim = m.feature_names.len();
    if m.trees.is_empty() {
        return Err(Error::InvalidData(format!("{}: forest has no trees", path.display())));
    }
    for tree in &m.trees {
        tree.validate(dim)
            .map_err(|e| Error::InvalidData(format!("{}: {e}", path.display())))?;
    }
    Ok(m)
}

/// Weight arrays are stored as base64 of little-endian f64 bytes.
#[derive(Serialize, Deserialize)]
struct MlpFile {
    kind: String,
    format_version: u32,
    config: MlpConfig,
    feature_scope: FeatureScope,
    feature_names: Vec<String>,
    tie_label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
    hidden_units: usize,
    means: String,
    stds: String,
    w1: String,
    b1: String,
    w2: String,
    b2: f64,
    history: Vec<EpochLog>,
}

fn encode_f64s(values: &[f64]) -> String {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    B64.encode(bytes)
}

fn decode_f64s(field: &str, text: &str, expected: usize) -> Result<Vec<f64>> {
    let bytes = B64
        .decode(text)
        .map_err(|e| Error::InvalidData(format!("weight blob `{field}`: {e}")))?;
    if bytes.len() != expected * 8 {
        return Err(Error::InvalidData(format!(
            "weight blob `{field}` holds {} bytes, expected {}",
            bytes.len(),
            expected * 8
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn save_mlp(model: &MlpModel, path: &Path) -> Result<()> {
    let file = MlpFile {
        kind: "mlp".into(),
        format_version: model.format_version,
        config: model.config.clone(),
        feature_scope: model.feature_scope,
        feature_names: model.feature_names.clone(),
        tie_label: model.tie_label,
        provenance: model.provenance.clone(),
        hidden_units: model.weights.b1.len(),
        means: encode_f64s(&model.means),
        stds: encode_f64s(&model.stds),
        w1: encode_f64s(&model.weights.w1),
        b1: encode_f64s(&model.weights.b1),
        w2: encode_f64s(&model.weights.w2),
        b2: model.weights.b2,
        history: model.history.clone(),
    };
    write_json(&file, path)
}

pub fn load_mlp(path: &Path) -> Result<MlpModel> {
    let (text, _) = read_checked(path)?;
    let f: MlpFile = serde_json::from_str(&text)?;
    let d = f.feature_names.len();
    let h = f.hidden_units;
    Ok(MlpModel {
        format_version: f.format_version,
        config: f.config,
        feature_scope: f.feature_scope,
        means: decode_f64s("means", &f.means, d)?,
        stds: decode_f64s("stds", &f.stds, d)?,
        weights: Weights {
            w1: decode_f64s("w1", &f.w1, d * h)?,
            b1: decode_f64s("b1", &f.b1, h)?,
            w2: decode_f64s("w2", &f.w2, h)?,
            b2: f.b2,
        },
        feature_names: f.feature_names,
        tie_label: f.tie_label,
        provenance: f.provenance,
        history: f.history,
    })
}

/// Loads a model file of either kind, dispatching on its `kind` field.
pub fn load_model(path: &Path) -> Result<Model> {
    let (_, peek) = read_checked(path)?;
    match peek.kind.as_deref() {
        Some("forest") => load_forest(path).map(Model::Forest),
        Some("mlp") => load_mlp(path).map(Model::Mlp),
        other => Err(Error::InvalidData(format!(
            "{}: unknown model kind {other:?}",
            path.display()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::visual::{Backbone, Mode, VisualScope};

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("f{i}")).collect()
    }

    fn data(n: usize) -> (Vec<Vec<f64>>, Vec<Label>) {
        (0..n)
            .map(|i| {
                let v = i as f64;
                (vec![v.sin(), (v * 0.37).cos(), (i % 3) as f64], Label::from_index(usize::from(v.sin() > 0.0)))
            })
            .unzip()
    }

    #[test]
    fn concat_lengths() {
        let html = HtmlFeatureVector { values: vec![1.0; 26], catalogue_version: 1 };
        for n in [512, 1472] {
            let visual = VisualFeatureVector {
                values: vec![2.0; n],
                scope: VisualScope::All,
                backbone: Backbone::Vgg16,
                mode: Mode::Frozen,
            };
            let joint = concat_features(&html, &visual);
            assert_eq!(joint.len(), 26 + n);
            assert_eq!(joint[25], 1.0);
            assert_eq!(joint[26], 2.0);
        }
    }

    #[test]
    fn nested_default_only_for_html_scope() {
        assert_eq!(nested_default(true, FeatureScope::Html, true), Some(Label::Layout));
        assert_eq!(nested_default(true, FeatureScope::Html, false), None);
        assert_eq!(nested_default(false, FeatureScope::Html, true), None);
        assert_eq!(nested_default(true, FeatureScope::Joint, true), None);
        assert_eq!(nested_default(true, FeatureScope::VisualTop, true), None);
    }

    #[test]
    fn forest_round_trip() {
        let (x, y) = data(60);
        let cfg = ForestConfig { n_trees: 15, ..ForestConfig::dwtc_original(9) };
        let m = ForestModel::train(&x, &y, &names(3), FeatureScope::Html, 1, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.forest.json");
        save_forest(&m, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back, Model::Forest(m.clone()));
        for i in 0..100 {
            let v = [i as f64 / 50.0 - 1.0, (i as f64).cos(), (i % 4) as f64];
            assert_eq!(back.predict(&v).unwrap(), m.predict(&v).unwrap());
        }
    }

    #[test]
    fn mlp_round_trip() {
        let (x, y) = data(60);
        let cfg = MlpConfig { max_epochs: 5, ..MlpConfig::joint(2) };
        let m = MlpModel::train(&x, &y, &x, &y, &names(3), FeatureScope::Joint, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.mlp.json");
        save_mlp(&m, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), Model::Mlp(m));
    }

    #[test]
    fn version_mismatch_and_truncation() {
        let (x, y) = data(20);
        let cfg = ForestConfig { n_trees: 2, ..ForestConfig::dwtc_original(1) };
        let m = ForestModel::train(&x, &y, &names(3), FeatureScope::Html, 1, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.forest.json");
        save_forest(&m, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();

        fs::write(&path, text.replace("\"format_version\":1", "\"format_version\":7")).unwrap();
        assert!(matches!(load_model(&path), Err(Error::ModelVersion { found: 7, expected: 1 })));

        fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(load_model(&path).is_err());
    }

    #[test]
    fn check_training_data_errors() {
        let n = names(2);
        assert!(check_training_data(&[vec![0.0, 1.0]], &[Label::Genuine], &n).is_err());
        let err = check_training_data(&[vec![0.0, 1.0], vec![0.0]], &[Label::Genuine, Label::Layout], &n).unwrap_err();
        assert!(matches!(err, Error::Dimension { expected: 2, found: 1 }));
        assert!(check_training_data(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[Label::Genuine, Label::Layout], &n).is_ok());
    }

    #[test]
    fn scope_parsing() {
        for s in [FeatureScope::Html, FeatureScope::VisualTop, FeatureScope::VisualAll, FeatureScope::Joint] {
            assert_eq!(s.as_str().parse::<FeatureScope>().unwrap(), s);
        }
        assert!("pixels".parse::<FeatureScope>().is_err());
    }
}
