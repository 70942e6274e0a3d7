//! Core algorithms for classifying fixed-size file fragments by type.
//!
//! The pipeline is: slice labeled files into fragments ([`fragment`]), weight
//! each of the 256 byte values per fragment with a TF-IDF scheme
//! ([`features`]), train a bagged Gini decision-tree ensemble ([`forest`]),
//! and score it with pooled k-fold cross-validation ([`cv`], [`metrics`]).
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. The `parallel` feature trains trees and folds on a rayon pool;
//! results are identical with and without it.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod cv;
pub mod error;
pub mod features;
pub mod forest;
pub mod fragment;
pub mod label;
pub mod metrics;
pub mod rng;
mod tree;

pub use cv::{cross_validate, kfold_split, CvOptions, FoldAssignment, StatsPolicy};
pub use error::{Error, Result};
pub use features::{
    byte_histogram, fit_doc_freq, idf, tf, vectorize_all, weight_vector, ByteHistogram,
    DocFreqStats, FeatureVector, NUM_FEATURES,
};
pub use forest::{ClassWeight, Forest, Hyperparams, Prediction};
pub use fragment::{extract_from_file, Fragment, FragmentSet, FragmentSize};
pub use label::{ClassLabel, LabelSet};
pub use metrics::{metrics_from_counts, ClassMetrics, ConfusionMatrix, EvalReport};
pub use tree::{Node, Tree};
