//! Bagged ensemble of Gini decision trees.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::features::{weight_vector_with, DocFreqStats, FeatureVector, NUM_FEATURES};
use crate::fragment::FragmentSize;
use crate::label::LabelSet;
use crate::rng;
use crate::tree::{grow, GrowParams, Node, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ClassWeight {
    /// Every sample counts once.
    #[default]
    None,
    /// Samples are weighted by `n / (classes × n_class)`.
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Hyperparams {
    pub n_trees: u32,
    /// Non-constant features scored per split.
    pub max_features: u32,
    pub min_leaf_size: u32,
    pub max_depth: Option<u32>,
    pub class_weight: ClassWeight,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: 16,
            min_leaf_size: 1,
            max_depth: None,
            class_weight: ClassWeight::None,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Hyperparams("n_trees must be positive"));
        }
        if self.max_features == 0 || self.max_features as usize > NUM_FEATURES {
            return Err(Error::Hyperparams("max_features must be in 1..=256"));
        }
        if self.min_leaf_size == 0 {
            return Err(Error::Hyperparams("min_leaf_size must be positive"));
        }
        if self.max_depth == Some(0) {
            return Err(Error::Hyperparams("max_depth must be positive"));
        }
        Ok(())
    }
}

/// Outcome of a plurality vote.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: u16,
    /// Fraction of trees voting for each label, in label-set order.
    pub votes: Vec<f64>,
}

impl Prediction {
    pub fn top_fraction(&self) -> f64 {
        self.votes[usize::from(self.label)]
    }
}

/// A trained model together with the feature statistics it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub labels: LabelSet,
    pub doc_freq: DocFreqStats,
    pub fragment_size: FragmentSize,
    pub hyper: Hyperparams,
    pub train_seed: u64,
    /// Mean feature vector of each class's training rows.
    pub class_mean_weights: Vec<FeatureVector>,
    /// Training rows per class.
    pub class_support: Vec<u64>,
}

/// Row indices of tree `tree_index`'s bootstrap sample.
pub fn bootstrap_sample(train_seed: u64, tree_index: u32, n: usize) -> Vec<u32> {
    let mut rng = rng::stream(train_seed, u64::from(tree_index));
    draw_bootstrap(&mut rng, n)
}

fn draw_bootstrap<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<u32> {
    (0..n).map(|_| rng.random_range(0..n as u32)).collect()
}

impl Forest {
    /// Trains `hyper.n_trees` trees, tree `t` on the stream `seed ^ t`.
    pub fn train(
        x: &[FeatureVector],
        y: &[u16],
        labels: LabelSet,
        doc_freq: DocFreqStats,
        fragment_size: FragmentSize,
        hyper: Hyperparams,
        seed: u64,
    ) -> Result<Self> {
        hyper.validate()?;
        if x.len() != y.len() {
            return Err(Error::ShapeMismatch {
                rows: x.len(),
                labels: y.len(),
            });
        }
        if x.len() < 2 {
            return Err(Error::DegenerateTrainingSet("fewer than two samples"));
        }
        if x.len() > u32::MAX as usize {
            return Err(Error::DegenerateTrainingSet("too many samples"));
        }
        let num_classes = labels.len();
        let mut support = vec![0u64; num_classes];
        for &label in y {
            let idx = usize::from(label);
            if idx >= num_classes {
                return Err(Error::LabelIndex {
                    index: idx,
                    len: num_classes,
                });
            }
            support[idx] += 1;
        }
        if support.iter().filter(|&&n| n > 0).count() < 2 {
            return Err(Error::DegenerateTrainingSet("fewer than two classes"));
        }
        for (row, v) in x.iter().enumerate() {
            if let Some(column) = v.0.iter().position(|w| !w.is_finite()) {
                return Err(Error::NonFinite { row, column });
            }
        }

        let class_weights = class_weights(&support, hyper.class_weight);
        let params = GrowParams {
            max_features: hyper.max_features as usize,
            min_leaf: hyper.min_leaf_size as usize,
            max_depth: hyper.max_depth,
            class_weights: &class_weights,
        };
        let grow_one = |t: u32| {
            let mut rng = rng::stream(seed, u64::from(t));
            let samples = draw_bootstrap(&mut rng, x.len());
            grow(x, y, samples, &params, &mut rng)
        };

        #[cfg(feature = "parallel")]
        let trees = {
            use rayon::prelude::*;
            (0..hyper.n_trees).into_par_iter().map(grow_one).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let trees = (0..hyper.n_trees).map(grow_one).collect();

        Ok(Self {
            trees,
            class_mean_weights: class_means(x, y, &support),
            class_support: support,
            labels,
            doc_freq,
            fragment_size,
            hyper,
            train_seed: seed,
        })
    }

    /// Plurality vote; ties go to the label that comes first in the label set.
    pub fn predict(&self, x: &FeatureVector) -> Prediction {
        let mut counts = vec![0u32; self.labels.len()];
        for tree in &self.trees {
            counts[usize::from(tree.predict(x))] += 1;
        }
        let mut label = 0usize;
        for (i, &c) in counts.iter().enumerate() {
            if c > counts[label] {
                label = i;
            }
        }
        let n = self.trees.len() as f64;
        Prediction {
            label: label as u16,
            votes: counts.iter().map(|&c| f64::from(c) / n).collect(),
        }
    }

    /// Vectorizes a raw fragment with the model's document frequencies and
    /// predicts its class.
    pub fn classify_fragment(&self, raw: &[u8]) -> Result<Prediction> {
        self.classify_with(raw, &self.doc_freq.idf_table())
    }

    /// Like [`Forest::classify_fragment`] with a precomputed IDF table, for
    /// classifying many blocks.
    pub fn classify_with(&self, raw: &[u8], idf_table: &[f64; NUM_FEATURES]) -> Result<Prediction> {
        if raw.len() != self.fragment_size.bytes() {
            return Err(Error::FragmentLength {
                expected: self.fragment_size.bytes(),
                actual: raw.len(),
            });
        }
        Ok(self.predict(&weight_vector_with(raw, idf_table)))
    }

    /// Checks that trees only reference labels and features the model knows.
    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        let n = self.labels.len();
        if self.trees.is_empty() {
            return Err(Error::Counts("forest has no trees"));
        }
        if self.class_mean_weights.len() != n || self.class_support.len() != n {
            return Err(Error::Counts("per-class summaries do not match label set"));
        }
        for tree in &self.trees {
            for node in tree.nodes() {
                if let Node::Leaf {
                    class_counts,
                    label,
                } = node
                {
                    if class_counts.len() != n || usize::from(*label) >= n {
                        return Err(Error::Counts("leaf does not match label set"));
                    }
                }
            }
        }
        Ok(())
    }
}

fn class_weights(support: &[u64], mode: ClassWeight) -> Vec<f64> {
    match mode {
        ClassWeight::None => vec![1.0; support.len()],
        ClassWeight::Balanced => {
            let total: u64 = support.iter().sum();
            let present = support.iter().filter(|&&n| n > 0).count() as f64;
            support
                .iter()
                .map(|&n| {
                    if n == 0 {
                        0.0
                    } else {
                        total as f64 / (present * n as f64)
                    }
                })
                .collect()
        }
    }
}

fn class_means(x: &[FeatureVector], y: &[u16], support: &[u64]) -> Vec<FeatureVector> {
    let mut sums = vec![FeatureVector::zeros(); support.len()];
    for (row, &label) in x.iter().zip(y) {
        let acc = &mut sums[usize::from(label)];
        for (a, w) in acc.0.iter_mut().zip(row.0.iter()) {
            *a += w;
        }
    }
    for (acc, &n) in sums.iter_mut().zip(support) {
        if n > 0 {
            acc.0.iter_mut().for_each(|a| *a /= n as f64);
        }
    }
    sums
}
