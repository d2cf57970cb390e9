//! Random forest of bootstrapped CART trees.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{Columns, DecisionTree};
use super::{check_training_data, FeatureScope, FORMAT_VERSION};
use crate::corpus::Provenance;
use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeaturesPerSplit {
    Sqrt,
    All,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub features_per_split: FeaturesPerSplit,
    /// Draw a same-size sample with replacement per tree.
    pub bootstrap: bool,
    pub seed: u64,
}

pub const PRESET_NAMES: [&str; 2] = ["dwtc-original", "dwtc-retrained"];

impl ForestConfig {
    /// Weka defaults of the original DWTC classifier: 10 trees, no limits.
    pub fn dwtc_original(seed: u64) -> Self {
        ForestConfig {
            n_trees: 10,
            max_depth: None,
            min_samples_leaf: 1,
            min_samples_split: 2,
            features_per_split: FeaturesPerSplit::Sqrt,
            bootstrap: true,
            seed,
        }
    }

    /// Grid-searched configuration of the retrained DWTC forest.
    pub fn dwtc_retrained(seed: u64) -> Self {
        ForestConfig {
            n_trees: 1600,
            max_depth: Some(80),
            min_samples_leaf: 4,
            min_samples_split: 2,
            features_per_split: FeaturesPerSplit::Sqrt,
            bootstrap: true,
            seed,
        }
    }

    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        match name {
            "dwtc-original" => Ok(Self::dwtc_original(seed)),
            "dwtc-retrained" => Ok(Self::dwtc_retrained(seed)),
            other => Err(Error::InvalidArgument(format!(
                "unknown forest preset `{other}`; valid presets: {}",
                PRESET_NAMES.join(", ")
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidArgument("n_trees must be at least 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::InvalidArgument("min_samples_split must be at least 2".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::InvalidArgument("min_samples_leaf must be at least 1".into()));
        }
        if let FeaturesPerSplit::Fixed(0) = self.features_per_split {
            return Err(Error::InvalidArgument("features_per_split must be at least 1".into()));
        }
        Ok(())
    }

    /// PRNG of tree `index`: an independent ChaCha stream per tree, so trees
    /// can be grown in any order.
    pub fn tree_rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format_version: u32,
    pub config: ForestConfig,
    pub catalogue_version: u32,
    pub feature_scope: FeatureScope,
    pub feature_names: Vec<String>,
    /// Decision for probability exactly 0.5: the class with more training samples.
    pub tie_label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub trees: Vec<DecisionTree>,
}

/// Bootstrap sample indices of one tree.
pub fn bootstrap_indices<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

pub(crate) fn encode_labels(y: &[Label]) -> Vec<u8> {
    y.iter().map(|l| l.index() as u8).collect()
}

fn tie_label(y: &[u8]) -> Label {
    let genuine = y.iter().filter(|&&v| v == 1).count();
    if genuine * 2 >= y.len() {
        Label::Genuine
    } else {
        Label::Layout
    }
}

impl ForestModel {
    /// Trains a forest. Each tree draws its bootstrap sample and its
    /// per-split feature subsets from its own stream, so the result depends
    /// only on the data and `config.seed`.
    pub fn train(
        x: &[Vec<f64>],
        y: &[Label],
        feature_names: &[String],
        scope: FeatureScope,
        catalogue_version: u32,
        config: &ForestConfig,
    ) -> Result<Self> {
        config.validate()?;
        check_training_data(x, y, feature_names)?;
        let y = encode_labels(y);
        let data = Columns::new(x, &y);
        let n = x.len();

        let trees: Vec<DecisionTree> = (0..config.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = config.tree_rng(t);
                let samples = if config.bootstrap {
                    bootstrap_indices(n, &mut rng)
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit(&data, samples, config, &mut rng)
            })
            .collect();

        Ok(ForestModel {
            format_version: FORMAT_VERSION,
            config: config.clone(),
            catalogue_version,
            feature_scope: scope,
            feature_names: feature_names.to_vec(),
            tie_label: tie_label(&y),
            provenance: None,
            trees,
        })
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Mean over trees of the genuine fraction in the reached leaf.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::Dimension {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict_proba(x)).sum();
        Ok(sum / self.trees.len() as f64)
    }

    pub fn predict(&self, x: &[f64]) -> Result<(Label, f64)> {
        let p = self.predict_proba(x)?;
        let label = if p > 0.5 {
            Label::Genuine
        } else if p < 0.5 {
            Label::Layout
        } else {
            self.tie_label
        };
        Ok((label, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::tree::Node;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("f{i}")).collect()
    }

    fn fixture() -> (Vec<Vec<f64>>, Vec<Label>) {
        (
            vec![vec![0.0], vec![1.0], vec![10.0], vec![11.0]],
            vec![Label::Layout, Label::Layout, Label::Genuine, Label::Genuine],
        )
    }

    fn single(bootstrap: bool) -> ForestConfig {
        ForestConfig {
            n_trees: 1,
            max_depth: None,
            min_samples_leaf: 1,
            min_samples_split: 2,
            features_per_split: FeaturesPerSplit::All,
            bootstrap,
            seed: 5,
        }
    }

    #[test]
    fn four_point_fixture() {
        let (x, y) = fixture();
        let m = ForestModel::train(&x, &y, &names(1), FeatureScope::Html, 1, &single(false)).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(m.predict(xi).unwrap().0, *yi);
        }
        assert_eq!(m.predict(&[0.5]).unwrap(), (Label::Layout, 0.0));
    }

    #[test]
    fn prediction_changes_once_along_sweep() {
        let (x, y) = fixture();
        let m = ForestModel::train(&x, &y, &names(1), FeatureScope::Html, 1, &single(false)).unwrap();
        let labels: Vec<Label> = (0..=110).map(|i| m.predict(&[i as f64 / 10.0]).unwrap().0).collect();
        let changes = labels.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(changes, 1);
    }

    #[test]
    fn single_class_is_rejected() {
        let x = vec![vec![0.0], vec![1.0]];
        let y = vec![Label::Genuine, Label::Genuine];
        assert!(ForestModel::train(&x, &y, &names(1), FeatureScope::Html, 1, &single(false)).is_err());
    }

    #[test]
    fn nan_feature_names_its_column() {
        let x = vec![vec![0.0, f64::NAN], vec![1.0, 2.0]];
        let y = vec![Label::Genuine, Label::Layout];
        let err = ForestModel::train(&x, &y, &names(2), FeatureScope::Html, 1, &single(false)).unwrap_err();
        assert!(matches!(&err, Error::NanFeature(c) if c == "f1"), "{err}");
    }

    #[test]
    fn same_seed_same_forest() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![(i % 7) as f64, (i % 5) as f64, i as f64]).collect();
        let y: Vec<Label> = (0..40).map(|i| Label::from_index(((i % 7) > 3) as usize)).collect();
        let cfg = ForestConfig { n_trees: 25, ..ForestConfig::dwtc_original(3) };
        let a = ForestModel::train(&x, &y, &names(3), FeatureScope::Html, 1, &cfg).unwrap();
        let b = ForestModel::train(&x, &y, &names(3), FeatureScope::Html, 1, &cfg).unwrap();
        assert_eq!(a, b);
        let c = ForestModel::train(&x, &y, &names(3), FeatureScope::Html, 1, &ForestConfig { seed: 4, ..cfg }).unwrap();
        assert_ne!(a.trees, c.trees);
    }

    #[test]
    fn stump_forest_to_pure_genuine() {
        let tree = DecisionTree {
            nodes: vec![
                Node::Split { feature: 0, threshold: 0.0, left: 1, right: 2 },
                Node::Leaf { counts: [0, 4] },
                Node::Leaf { counts: [0, 7] },
            ],
        };
        let m = ForestModel {
            format_version: FORMAT_VERSION,
            config: single(false),
            catalogue_version: 1,
            feature_scope: FeatureScope::Html,
            feature_names: names(1),
            tie_label: Label::Layout,
            provenance: None,
            trees: vec![tree.clone(), tree],
        };
        assert_eq!(m.predict(&[3.0]).unwrap(), (Label::Genuine, 1.0));
        assert!(matches!(m.predict(&[1.0, 2.0]), Err(Error::Dimension { expected: 1, found: 2 })));
    }

    #[test]
    fn tie_goes_to_training_prior() {
        let tree = |counts| DecisionTree { nodes: vec![Node::Leaf { counts }] };
        let mut m = ForestModel {
            format_version: FORMAT_VERSION,
            config: single(false),
            catalogue_version: 1,
            feature_scope: FeatureScope::Html,
            feature_names: names(1),
            tie_label: Label::Layout,
            provenance: None,
            trees: vec![tree([1, 0]), tree([0, 1])],
        };
        assert_eq!(m.predict(&[0.0]).unwrap(), (Label::Layout, 0.5));
        m.tie_label = Label::Genuine;
        assert_eq!(m.predict(&[0.0]).unwrap(), (Label::Genuine, 0.5));
    }

    #[test]
    fn presets() {
        let r = ForestConfig::preset("dwtc-retrained", 1).unwrap();
        assert_eq!((r.n_trees, r.max_depth, r.min_samples_leaf, r.min_samples_split), (1600, Some(80), 4, 2));
        let o = ForestConfig::preset("dwtc-original", 1).unwrap();
        assert_eq!((o.n_trees, o.max_depth), (10, None));
        let err = ForestConfig::preset("weka", 1).unwrap_err().to_string();
        assert!(err.contains("dwtc-original") && err.contains("dwtc-retrained"));
    }
}
