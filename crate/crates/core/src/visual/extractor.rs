use tract_onnx::prelude::*;

use super::gap::{global_average_pool, FeatureMap};
use super::manifest::{ModelManifest, OutputSpec, TensorLayout, INPUT_SIZE};
use super::{VisualFeatureVector, VisualScope};
use crate::error::{Error, Result};
use crate::label::Label;
use crate::render::ImageTensor;

type Plan = TypedRunnableModel<TypedModel>;

/// A loaded model with one execution plan exposing the top output, every
/// tap and the head. Runs are stateless, so one instance can be shared
/// across threads.
pub struct VisualModel {
    manifest: ModelManifest,
    plan: Plan,
    /// Output slots of the plan.
    top_slot: usize,
    tap_slots: Vec<usize>,
    head_slot: Option<usize>,
}

fn config_err(manifest: &ModelManifest, e: impl std::fmt::Display) -> Error {
    Error::ModelConfig(format!("{}: {e}", manifest.model_path.display()))
}

impl VisualModel {
    pub fn load(manifest: &ModelManifest) -> Result<Self> {
        manifest.validate()?;
        let mut model = tract_onnx::onnx()
            .model_for_path(&manifest.model_path)
            .map_err(|e| config_err(manifest, e))?;

        let inputs: Vec<String> = model
            .input_outlets()
            .map_err(|e| config_err(manifest, e))?
            .iter()
            .map(|o| model.node(o.node).name.clone())
            .collect();
        if inputs != [manifest.input_name.as_str()] {
            return Err(config_err(
                manifest,
                format!("model inputs are {inputs:?}, manifest names `{}`", manifest.input_name),
            ));
        }
        model
            .set_input_fact(0, f32::fact(manifest.input_shape).into())
            .map_err(|e| config_err(manifest, e))?;

        let mut names: Vec<&str> = vec![manifest.top_output.name.as_str()];
        let tap_slots = manifest.tap_outputs.iter().map(|t| slot(&mut names, &t.name)).collect();
        let head_slot = manifest.head_output.as_deref().map(|h| slot(&mut names, h));
        model.set_output_names(&names).map_err(|e| config_err(manifest, e))?;

        let plan = model
            .into_optimized()
            .and_then(|m| m.into_runnable())
            .map_err(|e| config_err(manifest, e))?;
        Ok(VisualModel {
            manifest: manifest.clone(),
            plan,
            top_slot: 0,
            tap_slots,
            head_slot,
        })
    }

    pub fn manifest(&self) -> &ModelManifest {
        &self.manifest
    }

    fn run(&self, tensor: &ImageTensor) -> Result<TVec<TValue>> {
        let expected = self.manifest.preprocessing_id();
        if tensor.preprocessing_id != expected {
            return Err(Error::ModelConfig(format!(
                "tensor was preprocessed as `{}`, model expects `{expected}`",
                tensor.preprocessing_id
            )));
        }
        let n = INPUT_SIZE;
        let input = match self.manifest.layout()? {
            TensorLayout::Nhwc => Tensor::from_shape(&[1, n, n, 3], &tensor.data),
            TensorLayout::Nchw => {
                let mut chw = vec![0f32; 3 * n * n];
                for (i, px) in tensor.data.chunks_exact(3).enumerate() {
                    for (c, v) in px.iter().enumerate() {
                        chw[c * n * n + i] = *v;
                    }
                }
                Tensor::from_shape(&[1, 3, n, n], &chw)
            }
        }
        .map_err(|e| Error::Inference(e.to_string()))?;
        self.plan
            .run(tvec!(input.into()))
            .map_err(|e| Error::Inference(e.to_string()))
    }

    pub fn extract_top(&self, tensor: &ImageTensor) -> Result<VisualFeatureVector> {
        let outputs = self.run(tensor)?;
        let values = pooled(&outputs[self.top_slot], &self.manifest.top_output)?;
        Ok(self.vector(values, VisualScope::Top))
    }

    /// GAP vectors of every tap in manifest order, concatenated.
    pub fn extract_all(&self, tensor: &ImageTensor) -> Result<VisualFeatureVector> {
        if self.manifest.tap_outputs.is_empty() {
            return Err(Error::ModelConfig("manifest lists no tap outputs".into()));
        }
        let outputs = self.run(tensor)?;
        let mut values = Vec::with_capacity(self.manifest.tap_channel_sum());
        for (spec, &s) in self.manifest.tap_outputs.iter().zip(&self.tap_slots) {
            values.extend(pooled(&outputs[s], spec)?);
        }
        Ok(self.vector(values, VisualScope::All))
    }

    pub fn classify_visual(&self, tensor: &ImageTensor) -> Result<(f64, Label)> {
        let slot = self
            .head_slot
            .ok_or_else(|| Error::ModelConfig("manifest has no head_output".into()))?;
        let outputs = self.run(tensor)?;
        let view = outputs[slot]
            .to_array_view::<f32>()
            .map_err(|e| Error::Inference(e.to_string()))?;
        if view.len() != 1 {
            return Err(Error::Inference(format!("head output has {} values, expected 1", view.len())));
        }
        let p = f64::from(*view.iter().next().expect("one value"));
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Inference(format!("head output {p} is not a probability")));
        }
        Ok((p, label_for_probability(p)))
    }

    fn vector(&self, values: Vec<f64>, scope: VisualScope) -> VisualFeatureVector {
        VisualFeatureVector {
            values,
            scope,
            backbone: self.manifest.backbone,
            mode: self.manifest.mode,
        }
    }
}

fn slot<'a>(names: &mut Vec<&'a str>, name: &'a str) -> usize {
    names.iter().position(|n| *n == name).unwrap_or_else(|| {
        names.push(name);
        names.len() - 1
    })
}

/// Genuine iff `p >= 0.5`.
pub fn label_for_probability(p: f64) -> Label {
    if p >= 0.5 {
        Label::Genuine
    } else {
        Label::Layout
    }
}

/// Reads an output as a channel vector, pooling spatial maps. Rank-4
/// outputs are taken as NHWC when the last axis matches the channel count,
/// otherwise as NCHW.
fn pooled(value: &TValue, spec: &OutputSpec) -> Result<Vec<f64>> {
    let view = value
        .to_array_view::<f32>()
        .map_err(|e| Error::Inference(e.to_string()))?;
    let shape = view.shape().to_vec();
    let c = spec.channels;
    let mismatch = || {
        Error::ModelConfig(format!(
            "output `{}` has shape {shape:?}, manifest declares {c} channels",
            spec.name
        ))
    };
    let values: Vec<f64> = match shape.as_slice() {
        [1, n] if *n == c => view.iter().map(|&v| f64::from(v)).collect(),
        [1, h, w, ch] if *ch == c => {
            let map = FeatureMap::new(*h, *w, c, view.iter().map(|&v| f64::from(v)).collect())?;
            global_average_pool(&map)
        }
        [1, ch, h, w] if *ch == c => {
            let mut data = vec![0.0; h * w * c];
            for ((_, ci, y, x), v) in view.indexed_iter().map(|(i, v)| ((i[0], i[1], i[2], i[3]), v)) {
                data[(y * w + x) * c + ci] = f64::from(*v);
            }
            global_average_pool(&FeatureMap::new(*h, *w, c, data)?)
        }
        _ => return Err(mismatch()),
    };
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Inference(format!("output `{}` channel {i} is not finite", spec.name)));
    }
    Ok(values)
}

/// Loads the model and returns the top vector. Prefer [`VisualModel`] for
/// more than one tensor.
pub fn extract_top(tensor: &ImageTensor, manifest: &ModelManifest) -> Result<VisualFeatureVector> {
    VisualModel::load(manifest)?.extract_top(tensor)
}

pub fn extract_all(tensor: &ImageTensor, manifest: &ModelManifest) -> Result<VisualFeatureVector> {
    VisualModel::load(manifest)?.extract_all(tensor)
}

pub fn classify_visual(tensor: &ImageTensor, manifest: &ModelManifest) -> Result<(f64, Label)> {
    if manifest.head_output.is_none() {
        return Err(Error::ModelConfig("manifest has no head_output".into()));
    }
    VisualModel::load(manifest)?.classify_visual(tensor)
}
