use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conventional manifest file name next to the model file.
pub const MANIFEST_FILE: &str = "model.json";

/// Side length of the square network input.
pub const INPUT_SIZE: usize = 224;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backbone {
    Vgg16,
    Resnet50,
}

impl Backbone {
    pub fn as_str(self) -> &'static str {
        match self {
            Backbone::Vgg16 => "vgg16",
            Backbone::Resnet50 => "resnet50",
        }
    }

    /// Channels of the last convolutional stage.
    pub fn top_channels(self) -> usize {
        match self {
            Backbone::Vgg16 => 512,
            Backbone::Resnet50 => 2048,
        }
    }

    /// Channels at the end of each block or stage.
    pub fn block_channels(self) -> &'static [usize] {
        match self {
            Backbone::Vgg16 => &[64, 128, 256, 512, 512],
            Backbone::Resnet50 => &[64, 256, 512, 1024, 2048],
        }
    }
}

impl std::fmt::Display for Backbone {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Frozen,
    Adapt,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Frozen => "frozen",
            Mode::Adapt => "adapt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelOrder {
    Rgb,
    Bgr,
}

/// Pixel transform `(v - means[c]) * scale`, applied after reordering
/// channels; `means` is indexed in the output channel order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub channel_order: ChannelOrder,
    pub means: [f64; 3],
    pub scale: f64,
}

impl Preprocessing {
    /// Raw 0–255 RGB values.
    pub fn identity() -> Self {
        Preprocessing {
            channel_order: ChannelOrder::Rgb,
            means: [0.0; 3],
            scale: 1.0,
        }
    }

    /// Stable fingerprint of the constants, carried by every tensor.
    pub fn id(&self) -> String {
        let order = match self.channel_order {
            ChannelOrder::Rgb => "rgb",
            ChannelOrder::Bgr => "bgr",
        };
        format!(
            "squash-bilinear-{INPUT_SIZE}/{order}/mean={},{},{}/scale={}",
            self.means[0], self.means[1], self.means[2], self.scale
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub name: String,
    pub channels: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorLayout {
    Nhwc,
    Nchw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    /// Model file; relative paths are resolved against the manifest's directory.
    pub model_path: PathBuf,
    pub backbone: Backbone,
    pub mode: Mode,
    pub input_name: String,
    pub input_shape: [usize; 4],
    pub preprocessing: Preprocessing,
    pub tap_outputs: Vec<OutputSpec>,
    pub top_output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head_output: Option<String>,
}

impl ModelManifest {
    /// Reads and validates a manifest; `path` may be the file or its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
        let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        let mut manifest: ModelManifest = serde_json::from_str(&text)
            .map_err(|e| Error::ModelConfig(format!("{}: {e}", file.display())))?;
        if manifest.model_path.is_relative() {
            if let Some(dir) = file.parent() {
                manifest.model_path = dir.join(&manifest.model_path);
            }
        }
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn preprocessing_id(&self) -> String {
        self.preprocessing.id()
    }

    pub fn layout(&self) -> Result<TensorLayout> {
        match self.input_shape {
            [1, h, w, 3] if h == INPUT_SIZE && w == INPUT_SIZE => Ok(TensorLayout::Nhwc),
            [1, 3, h, w] if h == INPUT_SIZE && w == INPUT_SIZE => Ok(TensorLayout::Nchw),
            other => Err(Error::ModelConfig(format!(
                "input_shape {other:?} is neither [1,{INPUT_SIZE},{INPUT_SIZE},3] nor [1,3,{INPUT_SIZE},{INPUT_SIZE}]"
            ))),
        }
    }

    /// Length of an `all` vector.
    pub fn tap_channel_sum(&self) -> usize {
        self.tap_outputs.iter().map(|t| t.channels).sum()
    }

    pub fn validate(&self) -> Result<()> {
        self.layout()?;
        let expected_top = self.backbone.top_channels();
        if self.top_output.channels != expected_top {
            return Err(Error::ModelConfig(format!(
                "{} top output has {} channels, expected {expected_top}",
                self.backbone, self.top_output.channels
            )));
        }
        if self.backbone == Backbone::Vgg16 && !self.tap_outputs.is_empty() && self.tap_channel_sum() != 1472 {
            return Err(Error::ModelConfig(format!(
                "vgg16 tap outputs sum to {} channels, expected 1472",
                self.tap_channel_sum()
            )));
        }
        if self.tap_outputs.iter().any(|t| t.channels == 0) {
            return Err(Error::ModelConfig("tap output with zero channels".into()));
        }
        if !self.preprocessing.scale.is_finite() || self.preprocessing.means.iter().any(|m| !m.is_finite()) {
            return Err(Error::ModelConfig("preprocessing constants must be finite".into()));
        }
        Ok(())
    }
}
