//! File-system side of the fragment classification toolkit: dataset
//! scanning, fragment dumps, model files, reports and the `sift-carve`
//! command line.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod fragmenter;
pub mod model;
pub mod report;
pub mod synthetic;
mod wire;

pub use corpus::{label_of, scan_dataset, CorpusManifest, FileEntry, LabelRule};
pub use fragmenter::{extract_fragments, read_dump, write_dump};
pub use model::{load_model, save_model};
