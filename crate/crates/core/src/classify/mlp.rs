//! One-hidden-layer perceptron with a sigmoid output, trained with Adam on
//! binary cross-entropy and early stopping on validation loss.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::forest::encode_labels;
use super::{check_training_data, FeatureScope, FORMAT_VERSION};
use crate::corpus::Provenance;
use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl MlpConfig {
    /// Joint-feature preset: 64 ReLU units, lr 0.001, batches of 32, patience 20.
    pub fn joint(seed: u64) -> Self {
        MlpConfig {
            hidden_units: 64,
            learning_rate: 0.001,
            batch_size: 32,
            max_epochs: 200,
            patience: 20,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_units == 0 {
            return Err(Error::InvalidArgument("hidden_units must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidArgument("learning_rate must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidArgument("batch_size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    /// hidden × input, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub format_version: u32,
    pub config: MlpConfig,
    pub feature_scope: FeatureScope,
    pub feature_names: Vec<String>,
    /// Per-feature standardization fit on the training set.
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub weights: Weights,
    pub tie_label: Label,
    pub provenance: Option<Provenance>,
    pub history: Vec<EpochLog>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

const EPS: f64 = 1e-12;

fn bce(p: f64, y: f64) -> f64 {
    let p = p.clamp(EPS, 1.0 - EPS);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

impl Weights {
    fn glorot<R: Rng>(inputs: usize, hidden: usize, rng: &mut R) -> Self {
        let l1 = (6.0 / (inputs + hidden) as f64).sqrt();
        let l2 = (6.0 / (hidden + 1) as f64).sqrt();
        Weights {
            w1: (0..inputs * hidden).map(|_| rng.random_range(-l1..=l1)).collect(),
            b1: vec![0.0; hidden],
            w2: (0..hidden).map(|_| rng.random_range(-l2..=l2)).collect(),
            b2: 0.0,
        }
    }

    fn zeros_like(&self) -> Self {
        Weights {
            w1: vec![0.0; self.w1.len()],
            b1: vec![0.0; self.b1.len()],
            w2: vec![0.0; self.w2.len()],
            b2: 0.0,
        }
    }

    fn hidden(&self) -> usize {
        self.b1.len()
    }

    /// Forward pass on a standardized input; fills `h` with hidden activations.
    fn forward(&self, x: &[f64], h: &mut [f64]) -> f64 {
        let d = x.len();
        let mut z = self.b2;
        for (j, hj) in h.iter_mut().enumerate() {
            let row = &self.w1[j * d..(j + 1) * d];
            let a = self.b1[j] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            *hj = a.max(0.0);
            z += self.w2[j] * *hj;
        }
        sigmoid(z)
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w1
            .iter_mut()
            .chain(self.b1.iter_mut())
            .chain(self.w2.iter_mut())
            .chain(std::iter::once(&mut self.b2))
    }

    fn params(&self) -> impl Iterator<Item = &f64> {
        self.w1
            .iter()
            .chain(self.b1.iter())
            .chain(self.w2.iter())
            .chain(std::iter::once(&self.b2))
    }
}

struct Adam {
    m: Weights,
    v: Weights,
    t: i32,
    lr: f64,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPSILON: f64 = 1e-8;

    fn new(shape: &Weights, lr: f64) -> Self {
        Adam {
            m: shape.zeros_like(),
            v: shape.zeros_like(),
            t: 0,
            lr,
        }
    }

    fn step(&mut self, weights: &mut Weights, grad: &Weights) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        let lr = self.lr;
        for (((w, g), m), v) in weights
            .params_mut()
            .zip(grad.params())
            .zip(self.m.params_mut())
            .zip(self.v.params_mut())
        {
            *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * g;
            *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * g * g;
            *w -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPSILON);
        }
    }
}

fn standardizer(x: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let d = x[0].len();
    let n = x.len() as f64;
    let mut means = vec![0.0; d];
    for row in x {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut stds = vec![0.0; d];
    for row in x {
        for ((s, v), m) in stds.iter_mut().zip(row).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut stds {
        *s = (*s / n).sqrt();
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    (means, stds)
}

impl MlpModel {
    fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    fn mean_loss(&self, xs: &[Vec<f64>], ys: &[u8]) -> (f64, f64) {
        let mut h = vec![0.0; self.weights.hidden()];
        let mut loss = 0.0;
        let mut correct = 0usize;
        for (x, &y) in xs.iter().zip(ys) {
            let p = self.weights.forward(x, &mut h);
            loss += bce(p, f64::from(y));
            if (p >= 0.5) == (y == 1) {
                correct += 1;
            }
        }
        (loss / xs.len() as f64, correct as f64 / xs.len() as f64)
    }

    /// Trains on `(x, y)` with early stopping on `(val_x, val_y)`; the
    /// weights of the epoch with the lowest validation loss are restored.
    pub fn train(
        x: &[Vec<f64>],
        y: &[Label],
        val_x: &[Vec<f64>],
        val_y: &[Label],
        feature_names: &[String],
        scope: FeatureScope,
        config: &MlpConfig,
    ) -> Result<Self> {
        config.validate()?;
        check_training_data(x, y, feature_names)?;
        if val_x.is_empty() || val_x.len() != val_y.len() {
            return Err(Error::InvalidData("MLP training needs a non-empty validation set".into()));
        }
        if let Some(bad) = val_x.iter().find(|r| r.len() != feature_names.len()) {
            return Err(Error::Dimension {
                expected: feature_names.len(),
                found: bad.len(),
            });
        }
        let d = feature_names.len();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let (means, stds) = standardizer(x);
        let yb = encode_labels(y);
        let genuine = yb.iter().filter(|&&v| v == 1).count();

        let mut model = MlpModel {
            format_version: FORMAT_VERSION,
            config: config.clone(),
            feature_scope: scope,
            feature_names: feature_names.to_vec(),
            means,
            stds,
            weights: Weights::glorot(d, config.hidden_units, &mut rng),
            tie_label: if genuine * 2 >= yb.len() { Label::Genuine } else { Label::Layout },
            provenance: None,
            history: Vec::new(),
        };
        let xs: Vec<Vec<f64>> = x.iter().map(|r| model.standardize(r)).collect();
        let vxs: Vec<Vec<f64>> = val_x.iter().map(|r| model.standardize(r)).collect();
        let vyb = encode_labels(val_y);

        let mut adam = Adam::new(&model.weights, config.learning_rate);
        let (mut best_loss, _) = model.mean_loss(&vxs, &vyb);
        let mut best_weights = model.weights.clone();
        let mut since_best = 0usize;
        let mut order: Vec<usize> = (0..xs.len()).collect();
        let hidden = config.hidden_units;
        let mut h = vec![0.0; hidden];

        for epoch in 1..=config.max_epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for batch in order.chunks(config.batch_size) {
                let mut grad = model.weights.zeros_like();
                for &i in batch {
                    let xi = &xs[i];
                    let p = model.weights.forward(xi, &mut h);
                    let target = f64::from(yb[i]);
                    epoch_loss += bce(p, target);
                    // d loss / d z for sigmoid + BCE
                    let dz = p - target;
                    grad.b2 += dz;
                    for j in 0..hidden {
                        grad.w2[j] += dz * h[j];
                        if h[j] > 0.0 {
                            let da = dz * model.weights.w2[j];
                            grad.b1[j] += da;
                            let row = &mut grad.w1[j * d..(j + 1) * d];
                            for (g, v) in row.iter_mut().zip(xi) {
                                *g += da * v;
                            }
                        }
                    }
                }
                let scale = 1.0 / batch.len() as f64;
                grad.params_mut().for_each(|g| *g *= scale);
                adam.step(&mut model.weights, &grad);
            }
            let train_loss = epoch_loss / xs.len() as f64;
            if !train_loss.is_finite() || model.weights.params().any(|w| !w.is_finite()) {
                return Err(Error::Diverged { epoch });
            }
            let (val_loss, val_accuracy) = model.mean_loss(&vxs, &vyb);
            model.history.push(EpochLog {
                epoch,
                train_loss,
                val_loss,
                val_accuracy,
            });
            if val_loss < best_loss {
                best_loss = val_loss;
                best_weights = model.weights.clone();
                since_best = 0;
            } else {
                since_best += 1;
                if since_best > config.patience {
                    break;
                }
            }
        }
        model.weights = best_weights;
        Ok(model)
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::Dimension {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        let mut h = vec![0.0; self.weights.hidden()];
        Ok(self.weights.forward(&self.standardize(x), &mut h))
    }

    /// Genuine iff the probability is at least 0.5.
    pub fn predict(&self, x: &[f64]) -> Result<(Label, f64)> {
        let p = self.predict_proba(x)?;
        Ok((if p >= 0.5 { Label::Genuine } else { Label::Layout }, p))
    }
}
