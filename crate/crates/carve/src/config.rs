//! Run configuration: an optional flat TOML file whose values command-line
//! flags override.
//!
//! ```toml
//! dataset = "corpus/"
//! fragment_size = 512
//! k = 10
//! seed = 42
//! trees = 100
//! mtry = 16
//! label_rule = "parent-dir"
//! stats_policy = "per-fold"
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use sift_core::{ClassWeight, FragmentSize, Hyperparams, StatsPolicy};

use crate::corpus::LabelRule;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub dataset: Option<PathBuf>,
    pub dump: Option<PathBuf>,
    pub fragment_size: Option<u32>,
    pub k: Option<u32>,
    pub seed: Option<u64>,
    pub trees: Option<u32>,
    pub mtry: Option<u32>,
    pub min_leaf: Option<u32>,
    pub max_depth: Option<u32>,
    pub class_weight: Option<ClassWeight>,
    pub label_rule: Option<LabelRule>,
    pub stats_policy: Option<StatsPolicy>,
    pub group_by_file: Option<bool>,
    pub stratified: Option<bool>,
    pub model: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fields set in `other` replace fields in `self`.
    pub fn overlay(self, other: ConfigFile) -> ConfigFile {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigFile { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            dataset,
            dump,
            fragment_size,
            k,
            seed,
            trees,
            mtry,
            min_leaf,
            max_depth,
            class_weight,
            label_rule,
            stats_policy,
            group_by_file,
            stratified,
            model,
            report
        )
    }
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub fragment_size: FragmentSize,
    pub k: u32,
    pub seed: u64,
    pub hyper: Hyperparams,
    pub label_rule: LabelRule,
    pub stats_policy: StatsPolicy,
    pub group_by_file: bool,
    pub stratified: bool,
    pub dataset: Option<PathBuf>,
    pub dump: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl RunConfig {
    /// Resolves a merged config. `needs_seed` commands fail without an
    /// explicit seed.
    pub fn resolve(c: ConfigFile, needs_seed: bool) -> Result<Self> {
        let fragment_size = FragmentSize::new(c.fragment_size.unwrap_or(512))?;
        let k = c.k.unwrap_or(10);
        if k < 2 {
            bail!("k must be at least 2, got {k}");
        }
        let seed = match c.seed {
            Some(s) => s,
            None if needs_seed => bail!("a seed is required: pass --seed or set `seed` in the config file"),
            None => 0,
        };
        let defaults = Hyperparams::default();
        let hyper = Hyperparams {
            n_trees: c.trees.unwrap_or(defaults.n_trees),
            max_features: c.mtry.unwrap_or(defaults.max_features),
            min_leaf_size: c.min_leaf.unwrap_or(defaults.min_leaf_size),
            max_depth: c.max_depth.or(defaults.max_depth),
            class_weight: c.class_weight.unwrap_or_default(),
        };
        hyper.validate()?;
        Ok(Self {
            fragment_size,
            k,
            seed,
            hyper,
            label_rule: c.label_rule.unwrap_or_default(),
            stats_policy: c.stats_policy.unwrap_or_default(),
            group_by_file: c.group_by_file.unwrap_or(false),
            stratified: c.stratified.unwrap_or(false),
            dataset: c.dataset,
            dump: c.dump,
            model: c.model,
            report: c.report,
        })
    }
}
