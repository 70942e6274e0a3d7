use alloc::string::String;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("fragment size {0} is not one of 32, 64, 128, 256, 512, 1024, 2048, 4096")]
    InvalidFragmentSize(u32),
    #[error("file of {len} bytes is shorter than two fragments of {fragment_size} bytes")]
    FileTooShort { len: usize, fragment_size: u32 },
    #[error("invalid class label {0:?}: must be non-empty and match [a-z0-9]+")]
    InvalidLabel(String),
    #[error("duplicate class label {0:?}")]
    DuplicateLabel(String),
    #[error("label index {index} out of range for {len} labels")]
    LabelIndex { index: usize, len: usize },
    #[error("cannot fit document frequencies on an empty fragment list")]
    EmptyCorpus,
    #[error("fragment has {actual} bytes, expected {expected}")]
    FragmentLength { expected: usize, actual: usize },
    #[error("feature matrix has {rows} rows but {labels} labels")]
    ShapeMismatch { rows: usize, labels: usize },
    #[error("degenerate training set: {0}")]
    DegenerateTrainingSet(&'static str),
    #[error("feature matrix contains a non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("invalid hyperparameter: {0}")]
    Hyperparams(&'static str),
    #[error("cannot split {n} items into {k} folds (need k >= 2 and k <= n)")]
    Folds { n: usize, k: usize },
    #[error("class has zero support (tp={tp}, p=0)")]
    EmptyClass { tp: u64 },
    #[error("inconsistent counts: {0}")]
    Counts(&'static str),
}
