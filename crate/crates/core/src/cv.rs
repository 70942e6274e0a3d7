//! K-fold cross-validation with a pooled confusion matrix.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::features::{fit_doc_freq, vectorize_all, DocFreqStats};
use crate::forest::{Forest, Hyperparams};
use crate::fragment::FragmentSet;
use crate::metrics::{ConfusionMatrix, EvalConfig, EvalReport};
use crate::rng;

/// Which fragments document frequencies are fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum StatsPolicy {
    /// Each fold's training split only.
    #[default]
    PerFold,
    /// Every fragment, test folds included.
    Global,
}

/// Fold index of every item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    k: u32,
    fold_of: Vec<u32>,
}

impl FoldAssignment {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn fold_of(&self) -> &[u32] {
        &self.fold_of
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k as usize];
        for &f in &self.fold_of {
            sizes[f as usize] += 1;
        }
        sizes
    }

    /// Item indices in fold `fold`, ascending.
    pub fn members(&self, fold: u32) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] == fold)
            .collect()
    }
}

fn check_folds(n: usize, k: u32) -> Result<()> {
    if k < 2 || k as usize > n {
        return Err(Error::Folds { n, k: k as usize });
    }
    Ok(())
}

/// Shuffles `0..n` and cuts the permutation into `k` contiguous folds whose
/// sizes differ by at most one; the first `n mod k` folds get the extra item.
pub fn kfold_split<R: Rng + ?Sized>(n: usize, k: u32, rng: &mut R) -> Result<FoldAssignment> {
    check_folds(n, k)?;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);

    let k_us = k as usize;
    let (q, r) = (n / k_us, n % k_us);
    let big = (q + 1) * r;
    let mut fold_of = vec![0u32; n];
    for (pos, &item) in perm.iter().enumerate() {
        let fold = if pos < big { pos / (q + 1) } else { r + (pos - big) / q };
        fold_of[item] = fold as u32;
    }
    Ok(FoldAssignment { k, fold_of })
}

/// Like [`kfold_split`], but deals each class's shuffled items round-robin so
/// every fold gets a near-equal share of every class.
pub fn stratified_split<R: Rng + ?Sized>(classes: &[u16], k: u32, rng: &mut R) -> Result<FoldAssignment> {
    check_folds(classes.len(), k)?;
    let num_classes = classes.iter().map(|&c| usize::from(c) + 1).max().unwrap_or(0);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &c) in classes.iter().enumerate() {
        by_class[usize::from(c)].push(i);
    }
    let mut fold_of = vec![0u32; classes.len()];
    let mut pos = 0usize;
    for members in &mut by_class {
        members.shuffle(rng);
        for &item in members.iter() {
            fold_of[item] = (pos % k as usize) as u32;
            pos += 1;
        }
    }
    Ok(FoldAssignment { k, fold_of })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CvOptions {
    pub k: u32,
    pub hyper: Hyperparams,
    pub stats_policy: StatsPolicy,
    pub seed: u64,
    /// Assign whole files to folds instead of single fragments.
    pub group_by_file: bool,
    pub stratified: bool,
}

impl CvOptions {
    pub fn new(k: u32, seed: u64) -> Self {
        Self {
            k,
            hyper: Hyperparams::default(),
            stats_policy: StatsPolicy::PerFold,
            seed,
            group_by_file: false,
            stratified: false,
        }
    }
}

const SPLIT_SALT: u64 = 1;
const FOLD_SALT: u64 = 0x100;

/// Fold index for every fragment of `set` under `opts`.
pub fn assign_folds(set: &FragmentSet, opts: &CvOptions) -> Result<FoldAssignment> {
    let mut split_rng = rng::stream(rng::derive_seed(opts.seed, SPLIT_SALT), 0);
    let fragment_classes = set.label_indices();
    if !opts.group_by_file {
        return if opts.stratified {
            stratified_split(&fragment_classes, opts.k, &mut split_rng)
        } else {
            kfold_split(set.len(), opts.k, &mut split_rng)
        };
    }

    let mut file_classes = vec![0u16; set.num_files()];
    for f in &set.fragments {
        file_classes[f.file_id as usize] = f.label;
    }
    let by_file = if opts.stratified {
        stratified_split(&file_classes, opts.k, &mut split_rng)?
    } else {
        kfold_split(file_classes.len(), opts.k, &mut split_rng)?
    };
    Ok(FoldAssignment {
        k: opts.k,
        fold_of: set
            .fragments
            .iter()
            .map(|f| by_file.fold_of[f.file_id as usize])
            .collect(),
    })
}

/// Runs k-fold cross-validation: per fold, fits document frequencies, trains
/// a forest on the other `k - 1` folds and predicts the held-out fold. All
/// predictions are pooled into one confusion matrix.
pub fn cross_validate(set: &FragmentSet, opts: &CvOptions) -> Result<EvalReport> {
    opts.hyper.validate()?;
    let support = set.class_counts();
    if support.iter().filter(|&&n| n > 0).count() < 2 {
        return Err(Error::DegenerateTrainingSet("fewer than two classes"));
    }
    let folds = assign_folds(set, opts)?;
    let bytes: Vec<&[u8]> = set.fragments.iter().map(|f| f.bytes.as_slice()).collect();
    let labels = set.label_indices();

    let global = match opts.stats_policy {
        StatsPolicy::Global => Some(fit_doc_freq(&bytes)?),
        StatsPolicy::PerFold => None,
    };

    let mut matrix = ConfusionMatrix::new(set.labels.len());
    let mut warnings = Vec::new();
    for fold in 0..opts.k {
        let (train_idx, test_idx): (Vec<usize>, Vec<usize>) =
            (0..set.len()).partition(|&i| folds.fold_of[i] != fold);
        if test_idx.is_empty() {
            warnings.push(format!("fold {fold} has no test fragments"));
            continue;
        }
        let train_bytes: Vec<&[u8]> = train_idx.iter().map(|&i| bytes[i]).collect();
        let test_bytes: Vec<&[u8]> = test_idx.iter().map(|&i| bytes[i]).collect();
        let train_y: Vec<u16> = train_idx.iter().map(|&i| labels[i]).collect();

        let mut train_support = vec![0u64; set.labels.len()];
        for &y in &train_y {
            train_support[usize::from(y)] += 1;
        }
        for (c, (&all, &train)) in support.iter().zip(&train_support).enumerate() {
            if all > 0 && train == 0 {
                let label = set.labels.get(c as u16).map(|l| l.as_str()).unwrap_or("?");
                warnings.push(format!("class {label} absent from training split of fold {fold}"));
            }
        }

        let present: Vec<u16> = (0..set.labels.len() as u16)
            .filter(|&c| train_support[usize::from(c)] > 0)
            .collect();
        if let [only] = present[..] {
            warnings.push(format!(
                "fold {fold} trains on a single class; its test fragments are all predicted as that class"
            ));
            for &i in &test_idx {
                matrix.record(labels[i], only);
            }
            continue;
        }

        let stats: DocFreqStats = match &global {
            Some(s) => s.clone(),
            None => fit_doc_freq(&train_bytes)?,
        };
        let train_x = vectorize_all(&train_bytes, &stats);
        let forest = Forest::train(
            &train_x,
            &train_y,
            set.labels.clone(),
            stats,
            set.fragment_size,
            opts.hyper,
            rng::derive_seed(opts.seed, FOLD_SALT + u64::from(fold)),
        )?;
        drop(train_x);

        let test_x = vectorize_all(&test_bytes, &forest.doc_freq);
        for (row, &i) in test_x.iter().zip(&test_idx) {
            matrix.record(labels[i], forest.predict(row).label);
        }
    }

    let config = EvalConfig {
        fragment_size: set.fragment_size.get(),
        k: opts.k,
        seed: opts.seed,
        hyper: opts.hyper,
        stats_policy: opts.stats_policy,
        group_by_file: opts.group_by_file,
        stratified: opts.stratified,
    };
    Ok(EvalReport::from_matrix(set.labels.clone(), matrix, config, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragment::FragmentSize;
    use crate::label::{ClassLabel, LabelSet};
    use crate::rng::PipelineRng;
    use alloc::string::ToString;
    use proptest::prelude::*;
    use rand::SeedableRng;

    #[test]
    fn ten_into_ten() {
        let mut rng = PipelineRng::seed_from_u64(0);
        let folds = kfold_split(10, 10, &mut rng).unwrap();
        assert_eq!(folds.fold_sizes(), vec![1; 10]);
    }

    #[test]
    fn large_corpus_fold_sizes() {
        let mut rng = PipelineRng::seed_from_u64(0);
        let sizes = kfold_split(47_482, 10, &mut rng).unwrap().fold_sizes();
        assert!(sizes.iter().all(|&s| s == 4748 || s == 4749));
        assert_eq!(sizes.iter().filter(|&&s| s == 4749).count(), 2);
    }

    #[test]
    fn invalid_k() {
        let mut rng = PipelineRng::seed_from_u64(0);
        assert_eq!(kfold_split(5, 6, &mut rng), Err(Error::Folds { n: 5, k: 6 }));
        assert!(kfold_split(5, 1, &mut rng).is_err());
    }

    #[test]
    fn split_is_seeded() {
        let a = kfold_split(100, 7, &mut PipelineRng::seed_from_u64(3)).unwrap();
        let b = kfold_split(100, 7, &mut PipelineRng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn stratified_spreads_classes() {
        let classes: Vec<u16> = (0..40).map(|i| u16::from(i < 10)).collect();
        let folds = stratified_split(&classes, 5, &mut PipelineRng::seed_from_u64(1)).unwrap();
        assert_eq!(folds.fold_sizes(), vec![8; 5]);
        for f in 0..5 {
            let minority = folds.members(f).iter().filter(|&&i| classes[i] == 1).count();
            assert_eq!(minority, 2);
        }
    }

    fn two_fragment_set() -> FragmentSet {
        let labels = LabelSet::new(
            ["a", "b"].iter().map(|n| ClassLabel::new(n.to_string()).unwrap()).collect(),
        )
        .unwrap();
        let mut set = FragmentSet::new(FragmentSize::new(32).unwrap(), labels);
        set.push_file(&[b','; 64], 0, 1).unwrap();
        set.push_file(&[0u8; 64], 1, 1).unwrap();
        set
    }

    #[test]
    fn two_fragment_shape() {
        let set = two_fragment_set();
        let mut opts = CvOptions::new(2, 5);
        opts.hyper.n_trees = 3;
        let report = cross_validate(&set, &opts).unwrap();
        assert_eq!(report.matrix.size(), 2);
        assert_eq!(report.matrix.total(), 2);
        // each training split holds the other class only
        assert_eq!(report.matrix.trace(), 0);
        assert_eq!(report.warnings.len(), 4);
    }

    #[test]
    fn group_by_file_keeps_files_whole() {
        let labels = LabelSet::new(vec![ClassLabel::new("a").unwrap()]).unwrap();
        let mut set = FragmentSet::new(FragmentSize::new(32).unwrap(), labels);
        for i in 0..6u8 {
            set.push_file(&[i; 32 * 5], 0, 0).unwrap();
        }
        let mut opts = CvOptions::new(3, 11);
        opts.group_by_file = true;
        let folds = assign_folds(&set, &opts).unwrap();
        for f in &set.fragments {
            let first = set.fragments.iter().find(|g| g.file_id == f.file_id).unwrap();
            let idx = |g: &crate::fragment::Fragment| {
                set.fragments.iter().position(|h| core::ptr::eq(h, g)).unwrap()
            };
            assert_eq!(folds.fold_of()[idx(f)], folds.fold_of()[idx(first)]);
        }
    }

    proptest! {
        #[test]
        fn folds_partition_indices(n in 2usize..300, k in 2u32..12, seed: u64) {
            prop_assume!(k as usize <= n);
            let folds = kfold_split(n, k, &mut PipelineRng::seed_from_u64(seed)).unwrap();
            let sizes = folds.fold_sizes();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let mut all: Vec<usize> = (0..k).flat_map(|f| folds.members(f)).collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }
}
