//! Reading manifest files into fragments, and the binary fragment dump.
//!
//! Dump layout, all integers little-endian:
//!
//! | field        | type          |
//! |--------------|---------------|
//! | magic        | `b"SIFTFRAG"` |
//! | version      | u16 = 1       |
//! | fragment size| u32           |
//! | count        | u64           |
//! | label count  | u16           |
//! | labels       | u8 length + ASCII name, per label |
//! | records      | `count` × (file_id u32, label_id u16, ordinal u32, R bytes) |

use std::path::{Path, PathBuf};

use sift_core::{Fragment, FragmentSet, FragmentSize};

use crate::corpus::CorpusManifest;
use crate::wire::{header, FormatError, Reader, Writer};

pub const DUMP_MAGIC: &[u8; 8] = b"SIFTFRAG";
pub const DUMP_VERSION: u16 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error("manifest has no entries")]
    EmptyManifest,
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} changed size since scan ({expected} -> {actual} bytes)")]
    SizeChanged {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },
    #[error("{path}: {source}")]
    Fragment {
        path: PathBuf,
        source: sift_core::Error,
    },
}

/// Extracts every manifest entry in order. File `i` draws its padding from
/// the stream `seed ^ i`.
pub fn extract_fragments(manifest: &CorpusManifest, seed: u64) -> Result<FragmentSet, ExtractError> {
    if manifest.entries.is_empty() {
        return Err(ExtractError::EmptyManifest);
    }
    let labels = manifest.labels();
    let mut set = FragmentSet::new(manifest.fragment_size, labels.clone());
    for entry in &manifest.entries {
        let contents = std::fs::read(&entry.path).map_err(|source| ExtractError::Read {
            path: entry.path.clone(),
            source,
        })?;
        if contents.len() as u64 != entry.size_bytes {
            return Err(ExtractError::SizeChanged {
                path: entry.path.clone(),
                expected: entry.size_bytes,
                actual: contents.len() as u64,
            });
        }
        let label = labels
            .index_of(&entry.label)
            .expect("manifest labels come from its entries");
        set.push_file(&contents, label, seed)
            .map_err(|source| ExtractError::Fragment {
                path: entry.path.clone(),
                source,
            })?;
    }
    Ok(set)
}

pub fn encode_dump(set: &FragmentSet) -> Vec<u8> {
    let r = set.fragment_size.bytes();
    let mut w = Writer {
        buf: Vec::with_capacity(32 + set.len() * (10 + r)),
    };
    w.bytes(DUMP_MAGIC);
    w.u16(DUMP_VERSION);
    w.u32(set.fragment_size.get());
    w.u64(set.len() as u64);
    w.labels(&set.labels);
    for f in &set.fragments {
        w.u32(f.file_id);
        w.u16(f.label);
        w.u32(f.ordinal);
        w.bytes(&f.bytes);
    }
    w.buf
}

pub fn decode_dump(bytes: &[u8]) -> Result<FragmentSet, FormatError> {
    let mut r = Reader::new(bytes);
    header(&mut r, DUMP_MAGIC, "fragment dump", DUMP_VERSION)?;
    let size = FragmentSize::new(r.u32()?)?;
    let count = r.u64()?;
    let labels = r.labels()?;
    let record = 10 + size.bytes() as u64;
    if count.checked_mul(record).is_none_or(|n| n > r.remaining() as u64) {
        return Err(FormatError::Truncated);
    }

    let mut set = FragmentSet::new(size, labels);
    for _ in 0..count {
        let file_id = r.u32()?;
        let label = r.u16()?;
        let ordinal = r.u32()?;
        let bytes = r.take(size.bytes())?.to_vec();
        if usize::from(label) >= set.labels.len() {
            return Err(FormatError::Invalid(format!("label id {label} out of range")));
        }
        let files = set.per_file_counts.len();
        match set.per_file_counts.last_mut() {
            Some(count) if file_id as usize + 1 == files && ordinal == *count => *count += 1,
            _ if file_id as usize == files && ordinal == 0 => set.per_file_counts.push(1),
            _ => return Err(FormatError::Invalid("records out of order".into())),
        }
        set.fragments.push(Fragment {
            bytes,
            file_id,
            label,
            ordinal,
        });
    }
    r.finish()?;
    Ok(set)
}

pub fn write_dump(path: &Path, set: &FragmentSet) -> std::io::Result<()> {
    std::fs::write(path, encode_dump(set))
}

pub fn read_dump(path: &Path) -> Result<FragmentSet, FormatError> {
    decode_dump(&std::fs::read(path)?)
}
