//! CART-style classification trees with Gini splits.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::features::{FeatureVector, NUM_FEATURES};

/// A tree node. Samples with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: u8,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        /// Training samples (with bootstrap multiplicity) reaching the leaf.
        class_counts: Vec<u32>,
        /// Majority class under the training class weights.
        label: u16,
    },
}

/// Arena of nodes; the root is node 0 and children always follow parents.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    /// Validates a node arena read back from storage.
    pub fn from_nodes(nodes: Vec<Node>, num_classes: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Counts("tree has no nodes"));
        }
        let mut parents = vec![0u32; nodes.len()];
        for (i, node) in nodes.iter().enumerate() {
            match node {
                Node::Split {
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    if !threshold.is_finite() {
                        return Err(Error::Counts("non-finite split threshold"));
                    }
                    for &child in [left, right] {
                        let c = child as usize;
                        if c <= i || c >= nodes.len() {
                            return Err(Error::Counts("child index out of order"));
                        }
                        parents[c] += 1;
                    }
                }
                Node::Leaf {
                    class_counts,
                    label,
                } => {
                    if class_counts.len() != num_classes || usize::from(*label) >= num_classes {
                        return Err(Error::Counts("leaf does not match label set"));
                    }
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return Err(Error::Counts("node arena is not a tree"));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaf(&self, x: &FeatureVector) -> &Node {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[usize::from(*feature)] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
                leaf => return leaf,
            }
        }
    }

    pub fn predict(&self, x: &FeatureVector) -> u16 {
        match self.leaf(x) {
            Node::Leaf { label, .. } => *label,
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Split { left, right, .. } = node {
                depth[*left as usize] = depth[i] + 1;
                depth[*right as usize] = depth[i] + 1;
            }
        }
        depth.into_iter().max().unwrap_or(0)
    }
}

pub(crate) struct GrowParams<'a> {
    pub max_features: usize,
    pub min_leaf: usize,
    pub max_depth: Option<u32>,
    pub class_weights: &'a [f64],
}

#[derive(Clone, Copy)]
struct Candidate {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    fn beats(&self, other: &Option<Candidate>) -> bool {
        let Some(best) = other else { return true };
        let tol = 1e-12 * best.score.abs().max(1.0);
        if self.score > best.score + tol {
            return true;
        }
        if self.score < best.score - tol {
            return false;
        }
        (self.feature, self.threshold) < (best.feature, best.threshold)
    }
}

/// Grows one tree over `samples` (row indices into `rows`, repeats allowed).
pub(crate) fn grow<R: Rng + ?Sized>(
    rows: &[FeatureVector],
    y: &[u16],
    mut samples: Vec<u32>,
    params: &GrowParams<'_>,
    rng: &mut R,
) -> Tree {
    let num_classes = params.class_weights.len();
    let mut nodes: Vec<Node> = vec![placeholder()];
    let mut stack = vec![(0usize, 0usize, samples.len(), 0u32)];
    let mut scratch: Vec<(f64, u16)> = Vec::with_capacity(samples.len());
    let mut order: [usize; NUM_FEATURES] = core::array::from_fn(|i| i);

    while let Some((node, start, end, depth)) = stack.pop() {
        let slice = &mut samples[start..end];
        let mut counts = vec![0u32; num_classes];
        for &s in slice.iter() {
            counts[usize::from(y[s as usize])] += 1;
        }
        let m = slice.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = params.max_depth.is_some_and(|d| depth >= d);

        let split = if pure || depth_capped || m < 2 * params.min_leaf {
            None
        } else {
            best_split(rows, y, slice, params, &mut order, &mut scratch, rng)
        };

        match split {
            None => nodes[node] = leaf(counts, params.class_weights),
            Some(Candidate {
                feature, threshold, ..
            }) => {
                let mid = partition(slice, |s| rows[s as usize][feature] <= threshold);
                let left = nodes.len();
                nodes.push(placeholder());
                nodes.push(placeholder());
                nodes[node] = Node::Split {
                    feature: feature as u8,
                    threshold,
                    left: left as u32,
                    right: left as u32 + 1,
                };
                stack.push((left + 1, start + mid, end, depth + 1));
                stack.push((left, start, start + mid, depth + 1));
            }
        }
    }
    Tree { nodes }
}

fn placeholder() -> Node {
    Node::Leaf {
        class_counts: Vec::new(),
        label: 0,
    }
}

fn leaf(class_counts: Vec<u32>, weights: &[f64]) -> Node {
    let mut label = 0usize;
    let mut best = f64::NEG_INFINITY;
    for (c, (&n, &w)) in class_counts.iter().zip(weights).enumerate() {
        let score = f64::from(n) * w;
        if n > 0 && score > best {
            best = score;
            label = c;
        }
    }
    Node::Leaf {
        class_counts,
        label: label as u16,
    }
}

/// Stable in-place partition; returns the number of elements satisfying `pred`.
fn partition(slice: &mut [u32], pred: impl Fn(u32) -> bool) -> usize {
    let (left, right): (Vec<u32>, Vec<u32>) = slice.iter().partition(|&&s| pred(s));
    let mid = left.len();
    slice[..mid].copy_from_slice(&left);
    slice[mid..].copy_from_slice(&right);
    mid
}

/// Examines features in random order until `max_features` non-constant ones
/// have been scored (or all 256 are exhausted) and returns the split with the
/// lowest weighted Gini impurity.
fn best_split<R: Rng + ?Sized>(
    rows: &[FeatureVector],
    y: &[u16],
    samples: &[u32],
    params: &GrowParams<'_>,
    order: &mut [usize; NUM_FEATURES],
    scratch: &mut Vec<(f64, u16)>,
    rng: &mut R,
) -> Option<Candidate> {
    let weights = params.class_weights;
    let num_classes = weights.len();
    let mut total = vec![0.0f64; num_classes];
    for &s in samples {
        let c = usize::from(y[s as usize]);
        total[c] += weights[c];
    }
    let total_w: f64 = total.iter().sum();
    let total_sq: f64 = total.iter().map(|t| t * t).sum();

    let mut best: Option<Candidate> = None;
    let mut visited = 0usize;
    let mut left = vec![0.0f64; num_classes];

    for i in 0..NUM_FEATURES {
        if visited == params.max_features {
            break;
        }
        let j = rng.random_range(i..NUM_FEATURES);
        order.swap(i, j);
        let feature = order[i];

        scratch.clear();
        scratch.extend(samples.iter().map(|&s| (rows[s as usize][feature], y[s as usize])));
        scratch.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if scratch[0].0 == scratch[scratch.len() - 1].0 {
            continue;
        }
        visited += 1;

        left.fill(0.0);
        let (mut left_w, mut left_sq, mut right_sq) = (0.0f64, 0.0f64, total_sq);
        let m = scratch.len();
        for k in 0..m - 1 {
            let (x, c) = scratch[k];
            let c = usize::from(c);
            let w = weights[c];
            let (l, r) = (left[c], total[c] - left[c]);
            left_sq += (l + w) * (l + w) - l * l;
            right_sq += (r - w) * (r - w) - r * r;
            left[c] += w;
            left_w += w;

            let next = scratch[k + 1].0;
            if x == next || k + 1 < params.min_leaf || m - k - 1 < params.min_leaf {
                continue;
            }
            let right_w = total_w - left_w;
            if left_w <= 0.0 || right_w <= 0.0 {
                continue;
            }
            let score = left_sq / left_w + right_sq / right_w;
            let mut threshold = x + (next - x) / 2.0;
            if threshold >= next {
                threshold = x;
            }
            let cand = Candidate {
                score,
                feature,
                threshold,
            };
            if cand.beats(&best) {
                best = Some(cand);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::PipelineRng;
    use rand::SeedableRng;

    fn fv(pairs: &[(usize, f64)]) -> FeatureVector {
        let mut v = FeatureVector::zeros();
        for &(i, x) in pairs {
            v.0[i] = x;
        }
        v
    }

    fn params(weights: &[f64]) -> GrowParams<'_> {
        GrowParams {
            max_features: 256,
            min_leaf: 1,
            max_depth: None,
            class_weights: weights,
        }
    }

    #[test]
    fn stump_on_separable_feature() {
        let rows = vec![
            fv(&[(0x2C, 0.6)]),
            fv(&[(0x2C, 0.62)]),
            fv(&[(0x2C, 0.0)]),
            fv(&[(0x2C, 0.0)]),
        ];
        let y = [0u16, 0, 1, 1];
        let mut rng = PipelineRng::seed_from_u64(1);
        let tree = grow(&rows, &y, vec![0, 1, 2, 3], &params(&[1.0, 1.0]), &mut rng);
        assert_eq!(tree.nodes().len(), 3);
        match &tree.nodes()[0] {
            Node::Split {
                feature, threshold, ..
            } => {
                assert_eq!(*feature, 0x2C);
                assert_eq!(*threshold, 0.3);
            }
            other => panic!("expected split, got {other:?}"),
        }
        assert_eq!(tree.predict(&rows[0]), 0);
        assert_eq!(tree.predict(&rows[2]), 1);
    }

    #[test]
    fn identical_rows_make_a_majority_leaf() {
        let rows = vec![fv(&[(1, 0.5)]); 5];
        let y = [1u16, 0, 1, 1, 0];
        let mut rng = PipelineRng::seed_from_u64(3);
        let tree = grow(&rows, &y, (0..5).collect(), &params(&[1.0, 1.0]), &mut rng);
        assert_eq!(
            tree.nodes(),
            &[Node::Leaf {
                class_counts: vec![2, 3],
                label: 1
            }]
        );
    }

    #[test]
    fn equal_gain_prefers_lower_feature() {
        // features 3 and 9 both separate perfectly
        let rows = vec![fv(&[(3, 1.0), (9, 1.0)]), fv(&[])];
        let y = [0u16, 1];
        for seed in 0..20 {
            let mut rng = PipelineRng::seed_from_u64(seed);
            let tree = grow(&rows, &y, vec![0, 1], &params(&[1.0, 1.0]), &mut rng);
            assert!(matches!(tree.nodes()[0], Node::Split { feature: 3, .. }));
        }
    }

    #[test]
    fn max_depth_caps_growth() {
        let rows: Vec<_> = (0..16).map(|i| fv(&[(0, i as f64)])).collect();
        let y: Vec<u16> = (0..16).map(|i| (i % 2) as u16).collect();
        let mut p = params(&[1.0, 1.0]);
        p.max_depth = Some(2);
        let mut rng = PipelineRng::seed_from_u64(0);
        let tree = grow(&rows, &y, (0..16).collect(), &p, &mut rng);
        assert!(tree.depth() <= 2);
    }

    #[test]
    fn min_leaf_is_respected() {
        let rows: Vec<_> = (0..12).map(|i| fv(&[(5, i as f64)])).collect();
        let y: Vec<u16> = (0..12).map(|i| u16::from(i % 3 == 0)).collect();
        let mut p = params(&[1.0, 1.0]);
        p.min_leaf = 3;
        let mut rng = PipelineRng::seed_from_u64(0);
        let tree = grow(&rows, &y, (0..12).collect(), &p, &mut rng);
        for node in tree.nodes() {
            if let Node::Leaf { class_counts, .. } = node {
                assert!(class_counts.iter().sum::<u32>() >= 3);
            }
        }
    }

    #[test]
    fn from_nodes_rejects_bad_arenas() {
        let leaf = Node::Leaf {
            class_counts: vec![1, 0],
            label: 0,
        };
        assert!(Tree::from_nodes(vec![leaf.clone()], 2).is_ok());
        assert!(Tree::from_nodes(vec![leaf.clone()], 3).is_err());
        assert!(Tree::from_nodes(vec![], 2).is_err());
        let cyclic = Node::Split {
            feature: 0,
            threshold: 0.5,
            left: 0,
            right: 1,
        };
        assert!(Tree::from_nodes(vec![cyclic, leaf.clone()], 2).is_err());
        let shared = Node::Split {
            feature: 0,
            threshold: 0.5,
            left: 1,
            right: 1,
        };
        assert!(Tree::from_nodes(vec![shared, leaf], 2).is_err());
    }
}
