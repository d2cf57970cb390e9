//! CART decision trees grown on Gini impurity.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::forest::{FeaturesPerSplit, ForestConfig};

/// Column-major training matrix with binary targets (0 = layout, 1 = genuine).
pub struct Columns<'a> {
    pub cols: Vec<Vec<f64>>,
    pub y: &'a [u8],
}

impl<'a> Columns<'a> {
    pub fn new(rows: &[Vec<f64>], y: &'a [u8]) -> Self {
        let dim = rows.first().map_or(0, Vec::len);
        let cols = (0..dim).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
        Columns { cols, y }
    }

    pub fn dim(&self) -> usize {
        self.cols.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Training class counts `[layout, genuine]` that reached the leaf.
    Leaf { counts: [u32; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

/// Gini impurity 1 − Σ p_k² of a two-class count vector.
pub fn gini(counts: [u32; 2]) -> f64 {
    let n = f64::from(counts[0] + counts[1]);
    if n == 0.0 {
        return 0.0;
    }
    let (p0, p1) = (f64::from(counts[0]) / n, f64::from(counts[1]) / n);
    1.0 - p0 * p0 - p1 * p1
}

impl DecisionTree {
    pub fn leaf_for(&self, x: &[f64]) -> [u32; 2] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return *counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    /// Fraction of genuine training samples in the leaf reached by `x`.
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let c = self.leaf_for(x);
        let n = c[0] + c[1];
        if n == 0 {
            0.5
        } else {
            f64::from(c[1]) / f64::from(n)
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn max_feature_index(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .max()
    }

    /// Structural check of a deserialized tree: children point forward and
    /// in range, split features are below `dim`.
    pub fn validate(&self, dim: usize) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Split { feature, left, right, .. } = node {
                if *feature >= dim {
                    return Err(format!("node {i} splits on feature {feature}, dimension is {dim}"));
                }
                for child in [*left, *right] {
                    if child <= i || child >= self.nodes.len() {
                        return Err(format!("node {i} has invalid child {child}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Grows a tree on the given sample indices (duplicates allowed, as
    /// produced by bootstrapping).
    pub fn fit<R: Rng>(data: &Columns<'_>, samples: Vec<usize>, config: &ForestConfig, rng: &mut R) -> Self {
        let mut builder = Builder {
            data,
            config,
            nodes: Vec::new(),
            mtry: config.features_per_split.resolve(data.dim()),
        };
        builder.grow(samples, 0, rng);
        DecisionTree { nodes: builder.nodes }
    }
}

impl FeaturesPerSplit {
    pub fn resolve(self, dim: usize) -> usize {
        let k = match self {
            FeaturesPerSplit::Sqrt => (dim as f64).sqrt().floor() as usize,
            FeaturesPerSplit::All => dim,
            FeaturesPerSplit::Fixed(k) => k,
        };
        k.clamp(1, dim.max(1))
    }
}

/// Best split of one feature: (weighted child impurity, threshold).
#[derive(Debug, Clone, Copy)]
pub struct SplitCandidate {
    pub impurity: f64,
    pub feature: usize,
    pub threshold: f64,
}

/// Exhaustive threshold search on one feature at midpoints between
/// consecutive distinct values. Returns `None` when the feature is constant
/// on the samples or no threshold satisfies `min_leaf`.
pub fn best_threshold(data: &Columns<'_>, samples: &[usize], feature: usize, min_leaf: usize) -> Option<SplitCandidate> {
    let col = &data.cols[feature];
    let mut pairs: Vec<(f64, u8)> = samples.iter().map(|&i| (col[i], data.y[i])).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pairs.len();
    let mut total = [0u32; 2];
    for &(_, y) in &pairs {
        total[y as usize] += 1;
    }

    let mut left = [0u32; 2];
    let mut best: Option<SplitCandidate> = None;
    for i in 0..n - 1 {
        left[pairs[i].1 as usize] += 1;
        let (a, b) = (pairs[i].0, pairs[i + 1].0);
        if a == b {
            continue;
        }
        let n_left = i + 1;
        let n_right = n - n_left;
        if n_left < min_leaf || n_right < min_leaf {
            continue;
        }
        let right = [total[0] - left[0], total[1] - left[1]];
        let impurity = (n_left as f64 * gini(left) + n_right as f64 * gini(right)) / n as f64;
        if best.map_or(true, |b| impurity < b.impurity) {
            let mut threshold = a + (b - a) / 2.0;
            if threshold >= b {
                threshold = a;
            }
            best = Some(SplitCandidate {
                impurity,
                feature,
                threshold,
            });
        }
    }
    best
}

struct Builder<'d, 'a> {
    data: &'d Columns<'a>,
    config: &'d ForestConfig,
    nodes: Vec<Node>,
    mtry: usize,
}

impl Builder<'_, '_> {
    fn leaf(&mut self, samples: &[usize]) -> usize {
        let mut counts = [0u32; 2];
        for &i in samples {
            counts[self.data.y[i] as usize] += 1;
        }
        self.nodes.push(Node::Leaf { counts });
        self.nodes.len() - 1
    }

    fn choose_split<R: Rng>(&self, samples: &[usize], rng: &mut R) -> Option<SplitCandidate> {
        let dim = self.data.dim();
        let mut order: Vec<usize> = (0..dim).collect();
        if self.mtry < dim {
            order.shuffle(rng);
        }
        // Draw features until `mtry` of them vary within the node.
        let mut evaluated = 0;
        let mut best: Option<SplitCandidate> = None;
        for f in order {
            if evaluated >= self.mtry {
                break;
            }
            let col = &self.data.cols[f];
            let first = col[samples[0]];
            if samples.iter().all(|&i| col[i] == first) {
                continue;
            }
            evaluated += 1;
            let Some(cand) = best_threshold(self.data, samples, f, self.config.min_samples_leaf) else {
                continue;
            };
            let better = match best {
                None => true,
                Some(b) => {
                    cand.impurity < b.impurity
                        || (cand.impurity == b.impurity
                            && (cand.feature, cand.threshold) < (b.feature, b.threshold))
                }
            };
            if better {
                best = Some(cand);
            }
        }
        best
    }

    fn grow<R: Rng>(&mut self, samples: Vec<usize>, depth: usize, rng: &mut R) -> usize {
        let first = self.data.y[samples[0]];
        let pure = samples.iter().all(|&i| self.data.y[i] == first);
        let depth_reached = self.config.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_reached || samples.len() < self.config.min_samples_split {
            return self.leaf(&samples);
        }
        let Some(split) = self.choose_split(&samples, rng) else {
            return self.leaf(&samples);
        };

        let col = &self.data.cols[split.feature];
        let (left, right): (Vec<usize>, Vec<usize>) =
            samples.into_iter().partition(|&i| col[i] <= split.threshold);

        let index = self.nodes.len();
        self.nodes.push(Node::Leaf { counts: [0, 0] });
        let l = self.grow(left, depth + 1, rng);
        let r = self.grow(right, depth + 1, rng);
        self.nodes[index] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: l,
            right: r,
        };
        index
    }
}
