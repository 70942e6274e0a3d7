//! Model file format.
//!
//! All integers little-endian; floats are IEEE-754 bit patterns.
//!
//! | field              | encoding |
//! |--------------------|----------|
//! | magic              | `b"SIFTMODL"` |
//! | version            | u16 = 1 |
//! | fragment size      | u32 |
//! | labels             | u16 count, then u8 length + ASCII name each |
//! | fragments fitted   | u64 (`N`) |
//! | document freqs     | 256 × u64 (`K_0..K_255`) |
//! | hyperparameters    | n_trees u32, max_features u32, min_leaf_size u32, max_depth u32 (0 = unbounded), class_weight u8 (0 none, 1 balanced) |
//! | train seed         | u64 |
//! | class support      | labels × u64 |
//! | class mean weights | labels × 256 × f64 |
//! | trees              | u32 count, then per tree: u32 node count and nodes |
//! | node               | tag u8; 0 = leaf: label u16, labels × u32 counts; 1 = split: feature u8, threshold f64, left u32, right u32 |
//! | checksum           | CRC-32 (IEEE) of every preceding byte, u32 |

use std::path::Path;

use sift_core::{
    ClassWeight, DocFreqStats, FeatureVector, Forest, FragmentSize, Hyperparams, Node, Tree, NUM_FEATURES,
};

use crate::wire::{header, FormatError, Reader, Writer};

pub const MODEL_MAGIC: &[u8; 8] = b"SIFTMODL";
pub const MODEL_VERSION: u16 = 1;

const LEAF: u8 = 0;
const SPLIT: u8 = 1;

pub fn encode_model(forest: &Forest) -> Vec<u8> {
    let mut w = Writer::default();
    w.bytes(MODEL_MAGIC);
    w.u16(MODEL_VERSION);
    w.u32(forest.fragment_size.get());
    w.labels(&forest.labels);

    w.u64(forest.doc_freq.total_fragments());
    for &k in forest.doc_freq.doc_freq() {
        w.u64(k);
    }

    let h = &forest.hyper;
    w.u32(h.n_trees);
    w.u32(h.max_features);
    w.u32(h.min_leaf_size);
    w.u32(h.max_depth.unwrap_or(0));
    w.u8(match h.class_weight {
        ClassWeight::None => 0,
        ClassWeight::Balanced => 1,
    });
    w.u64(forest.train_seed);

    for &n in &forest.class_support {
        w.u64(n);
    }
    for mean in &forest.class_mean_weights {
        for &x in mean.as_array() {
            w.f64(x);
        }
    }

    w.u32(forest.trees.len() as u32);
    for tree in &forest.trees {
        w.u32(tree.nodes().len() as u32);
        for node in tree.nodes() {
            match node {
                Node::Leaf {
                    class_counts,
                    label,
                } => {
                    w.u8(LEAF);
                    w.u16(*label);
                    class_counts.iter().for_each(|&c| w.u32(c));
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    w.u8(SPLIT);
                    w.u8(*feature);
                    w.f64(*threshold);
                    w.u32(*left);
                    w.u32(*right);
                }
            }
        }
    }

    let crc = crc32fast::hash(&w.buf);
    w.u32(crc);
    w.buf
}

pub fn decode_model(bytes: &[u8]) -> Result<Forest, FormatError> {
    let mut r = Reader::new(bytes);
    header(&mut r, MODEL_MAGIC, "model", MODEL_VERSION)?;
    if bytes.len() < 14 {
        return Err(FormatError::Truncated);
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(FormatError::Checksum { stored, computed });
    }

    let mut r = Reader::new(body);
    header(&mut r, MODEL_MAGIC, "model", MODEL_VERSION)?;
    let fragment_size = FragmentSize::new(r.u32()?)?;
    let labels = r.labels()?;
    let n = labels.len();

    let total = r.u64()?;
    let mut doc_freq = [0u64; NUM_FEATURES];
    for k in doc_freq.iter_mut() {
        *k = r.u64()?;
    }
    let doc_freq = DocFreqStats::from_parts(doc_freq, total)?;

    let n_trees = r.u32()?;
    let max_features = r.u32()?;
    let min_leaf_size = r.u32()?;
    let max_depth = Some(r.u32()?).filter(|&d| d > 0);
    let class_weight = match r.u8()? {
        0 => ClassWeight::None,
        1 => ClassWeight::Balanced,
        other => return Err(FormatError::Invalid(format!("unknown class weight mode {other}"))),
    };
    let hyper = Hyperparams {
        n_trees,
        max_features,
        min_leaf_size,
        max_depth,
        class_weight,
    };
    let train_seed = r.u64()?;

    let class_support = (0..n).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
    let mut class_mean_weights = Vec::with_capacity(n);
    for _ in 0..n {
        let mut v = FeatureVector::zeros();
        for x in v.0.iter_mut() {
            *x = r.f64()?;
        }
        class_mean_weights.push(v);
    }

    let tree_count = r.u32()?;
    if tree_count != n_trees {
        return Err(FormatError::Invalid("tree count does not match hyperparameters".into()));
    }
    let mut trees = Vec::with_capacity(tree_count as usize);
    for _ in 0..tree_count {
        let node_count = r.u32()? as usize;
        if node_count > r.remaining() {
            return Err(FormatError::Truncated);
        }
        let mut nodes = Vec::with_capacity(node_count);
        for _ in 0..node_count {
            nodes.push(match r.u8()? {
                LEAF => {
                    let label = r.u16()?;
                    let class_counts = (0..n).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
                    Node::Leaf {
                        class_counts,
                        label,
                    }
                }
                SPLIT => Node::Split {
                    feature: r.u8()?,
                    threshold: r.f64()?,
                    left: r.u32()?,
                    right: r.u32()?,
                },
                tag => return Err(FormatError::Invalid(format!("unknown node tag {tag}"))),
            });
        }
        trees.push(Tree::from_nodes(nodes, n)?);
    }
    r.finish()?;

    let forest = Forest {
        trees,
        labels,
        doc_freq,
        fragment_size,
        hyper,
        train_seed,
        class_mean_weights,
        class_support,
    };
    forest.validate()?;
    Ok(forest)
}

pub fn save_model(forest: &Forest, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, encode_model(forest))
}

pub fn load_model(path: &Path) -> Result<Forest, FormatError> {
    decode_model(&std::fs::read(path)?)
}
