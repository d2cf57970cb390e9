//! Small synthetic ONNX models with the tap layout of the real backbones.
//!
//! Each of the five blocks halves the resolution with a 2×2 average pool
//! and maps channels with a 1×1 convolution and ReLU, so taps have the
//! channel counts of VGG16 or ResNet50 at a fraction of the cost. The head
//! is GAP, a dense layer and a sigmoid. Weights come from a seeded PRNG, so
//! the same spec always yields the same file.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::manifest::{
    Backbone, ChannelOrder, ModelManifest, Mode, OutputSpec, Preprocessing, INPUT_SIZE, MANIFEST_FILE,
};
use crate::error::{Error, Result};

pub const STUB_MODEL_FILE: &str = "model.onnx";

#[derive(Debug, Clone, PartialEq)]
pub struct StubSpec {
    pub backbone: Backbone,
    pub mode: Mode,
    pub seed: u64,
    /// Fixed head output regardless of input.
    pub constant_probability: Option<f32>,
    pub preprocessing: Preprocessing,
}

impl StubSpec {
    pub fn new(backbone: Backbone, seed: u64) -> Self {
        StubSpec {
            backbone,
            mode: Mode::Frozen,
            seed,
            constant_probability: None,
            preprocessing: Preprocessing {
                channel_order: ChannelOrder::Bgr,
                means: [103.939, 116.779, 123.68],
                scale: 1.0,
            },
        }
    }
}

/// Minimal protobuf writer for the subset of the ONNX schema used here.
#[derive(Default)]
struct Msg(Vec<u8>);

impl Msg {
    fn key(&mut self, field: u32, wire: u8) {
        self.raw_varint(u64::from(field) << 3 | u64::from(wire));
    }

    fn raw_varint(&mut self, mut v: u64) {
        while v >= 0x80 {
            self.0.push((v as u8) | 0x80);
            v >>= 7;
        }
        self.0.push(v as u8);
    }

    fn int(&mut self, field: u32, v: i64) -> &mut Self {
        self.key(field, 0);
        self.raw_varint(v as u64);
        self
    }

    fn float(&mut self, field: u32, v: f32) -> &mut Self {
        self.key(field, 5);
        self.0.extend_from_slice(&v.to_le_bytes());
        self
    }

    fn bytes(&mut self, field: u32, b: &[u8]) -> &mut Self {
        self.key(field, 2);
        self.raw_varint(b.len() as u64);
        self.0.extend_from_slice(b);
        self
    }

    fn str(&mut self, field: u32, s: &str) -> &mut Self {
        self.bytes(field, s.as_bytes())
    }

    fn msg(&mut self, field: u32, m: &Msg) -> &mut Self {
        self.bytes(field, &m.0)
    }
}

const ATTR_INT: i64 = 2;
const ATTR_INTS: i64 = 7;
const ATTR_FLOAT: i64 = 1;
const TENSOR_FLOAT: i64 = 1;

fn attr_ints(name: &str, values: &[i64]) -> Msg {
    let mut a = Msg::default();
    a.str(1, name);
    for &v in values {
        a.int(8, v);
    }
    a.int(20, ATTR_INTS);
    a
}

fn attr_int(name: &str, v: i64) -> Msg {
    let mut a = Msg::default();
    a.str(1, name).int(3, v).int(20, ATTR_INT);
    a
}

fn attr_float(name: &str, v: f32) -> Msg {
    let mut a = Msg::default();
    a.str(1, name).float(2, v).int(20, ATTR_FLOAT);
    a
}

fn node(op: &str, name: &str, inputs: &[&str], output: &str, attrs: &[Msg]) -> Msg {
    let mut n = Msg::default();
    for i in inputs {
        n.str(1, i);
    }
    n.str(2, output).str(3, name).str(4, op);
    for a in attrs {
        n.msg(5, a);
    }
    n
}

fn tensor(name: &str, dims: &[usize], values: &[f32]) -> Msg {
    debug_assert_eq!(dims.iter().product::<usize>(), values.len());
    let mut t = Msg::default();
    for &d in dims {
        t.int(1, d as i64);
    }
    t.int(2, TENSOR_FLOAT).str(8, name);
    let raw: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    t.bytes(9, &raw);
    t
}

fn value_info(name: &str, dims: Option<&[usize]>) -> Msg {
    let mut tensor_type = Msg::default();
    tensor_type.int(1, TENSOR_FLOAT);
    if let Some(dims) = dims {
        let mut shape = Msg::default();
        for &d in dims {
            let mut dim = Msg::default();
            dim.int(1, d as i64);
            shape.msg(1, &dim);
        }
        tensor_type.msg(2, &shape);
    }
    let mut ty = Msg::default();
    ty.msg(1, &tensor_type);
    let mut v = Msg::default();
    v.str(1, name).msg(2, &ty);
    v
}

/// Serialized ONNX model bytes for `spec`.
pub fn stub_model_bytes(spec: &StubSpec) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut graph = Msg::default();
    graph.str(2, "stub");

    let n = INPUT_SIZE;
    graph.msg(11, &value_info("input", Some(&[1, n, n, 3])));
    graph.msg(1, &node("Transpose", "to_nchw", &["input"], "x0", &[attr_ints("perm", &[0, 3, 1, 2])]));

    let mut prev = "x0".to_string();
    let mut in_ch = 3;
    let mut side = n;
    let channels = spec.backbone.block_channels();
    for (k, &out_ch) in channels.iter().enumerate() {
        let b = k + 1;
        side /= 2;
        let pool = format!("pool{b}");
        graph.msg(
            1,
            &node(
                "AveragePool",
                &pool,
                &[&prev],
                &pool,
                &[attr_ints("kernel_shape", &[2, 2]), attr_ints("strides", &[2, 2])],
            ),
        );
        let bound = (3.0 / in_ch as f64).sqrt() as f32;
        let w: Vec<f32> = (0..out_ch * in_ch).map(|_| rng.random_range(-bound..bound)).collect();
        let bias: Vec<f32> = (0..out_ch).map(|_| rng.random_range(0.0..0.1)).collect();
        let (wn, bn) = (format!("conv{b}_w"), format!("conv{b}_b"));
        graph.msg(5, &tensor(&wn, &[out_ch, in_ch, 1, 1], &w));
        graph.msg(5, &tensor(&bn, &[out_ch], &bias));
        let conv = format!("conv{b}");
        graph.msg(1, &node("Conv", &conv, &[&pool, &wn, &bn], &conv, &[]));
        let relu = format!("relu{b}");
        graph.msg(1, &node("Relu", &relu, &[&conv], &relu, &[]));
        let tap = format!("block{b}");
        graph.msg(1, &node("Transpose", &tap, &[&relu], &tap, &[attr_ints("perm", &[0, 2, 3, 1])]));
        graph.msg(12, &value_info(&tap, Some(&[1, side, side, out_ch])));
        prev = relu;
        in_ch = out_ch;
    }

    graph.msg(1, &node("GlobalAveragePool", "gap", &[&prev], "gap", &[]));
    graph.msg(1, &node("Flatten", "flat", &["gap"], "flat", &[attr_int("axis", 1)]));
    let (hw, hb): (Vec<f32>, f32) = match spec.constant_probability {
        Some(p) => (vec![0.0; in_ch], (p / (1.0 - p)).ln()),
        None => {
            let bound = 0.05 / (in_ch as f32).sqrt();
            ((0..in_ch).map(|_| rng.random_range(-bound..bound)).collect(), 0.0)
        }
    };
    graph.msg(5, &tensor("head_w", &[in_ch, 1], &hw));
    graph.msg(5, &tensor("head_b", &[1], &[hb]));
    graph.msg(
        1,
        &node("Gemm", "head", &["flat", "head_w", "head_b"], "logit", &[attr_float("alpha", 1.0)]),
    );
    graph.msg(1, &node("Sigmoid", "probability", &["logit"], "probability", &[]));
    graph.msg(12, &value_info("probability", Some(&[1, 1])));

    let mut opset = Msg::default();
    opset.str(1, "").int(2, 13);
    let mut model = Msg::default();
    model.int(1, 7).str(2, "tablesieve-stub").msg(7, &graph).msg(8, &opset);
    model.0
}

/// Manifest describing a stub model stored at `model_path`.
pub fn stub_manifest(spec: &StubSpec, model_path: &Path) -> ModelManifest {
    let taps: Vec<OutputSpec> = spec
        .backbone
        .block_channels()
        .iter()
        .enumerate()
        .map(|(i, &c)| OutputSpec {
            name: format!("block{}", i + 1),
            channels: c,
        })
        .collect();
    ModelManifest {
        model_path: model_path.to_path_buf(),
        backbone: spec.backbone,
        mode: spec.mode,
        input_name: "input".into(),
        input_shape: [1, INPUT_SIZE, INPUT_SIZE, 3],
        preprocessing: spec.preprocessing.clone(),
        top_output: taps.last().expect("five blocks").clone(),
        tap_outputs: taps,
        head_output: Some("probability".into()),
    }
}

/// Writes `model.onnx` and `model.json` into `dir` and returns the loaded
/// manifest.
pub fn write_stub_model(dir: &Path, spec: &StubSpec) -> Result<ModelManifest> {
    if let Some(p) = spec.constant_probability {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!("constant probability {p} must lie in (0, 1)")));
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let model_path = dir.join(STUB_MODEL_FILE);
    fs::write(&model_path, stub_model_bytes(spec)).map_err(|e| Error::io(&model_path, e))?;
    stub_manifest(spec, Path::new(STUB_MODEL_FILE)).save(&dir.join(MANIFEST_FILE))?;
    ModelManifest::load(&dir.join(MANIFEST_FILE))
}
