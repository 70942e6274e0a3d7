//! Fixed-size fragment extraction.
//!
//! A file of `L` bytes at fragment size `R` yields the `⌊L/R⌋ - 1` full
//! fragments that follow the header fragment `[0, R)`. When `L mod R = rem`
//! is non-zero the trailing `rem` bytes become one more fragment, padded to
//! `R` bytes with the first `R - rem` bytes of a uniformly chosen full
//! fragment of the same file.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::label::LabelSet;
use crate::rng;

/// Fragment size in bytes, restricted to the powers of two from 32 to 4096.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "u32", into = "u32"))]
pub struct FragmentSize(u32);

impl FragmentSize {
    pub const ALLOWED: [u32; 8] = [32, 64, 128, 256, 512, 1024, 2048, 4096];

    pub fn new(bytes: u32) -> Result<Self> {
        if Self::ALLOWED.contains(&bytes) {
            Ok(Self(bytes))
        } else {
            Err(Error::InvalidFragmentSize(bytes))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn bytes(self) -> usize {
        self.0 as usize
    }
}

impl TryFrom<u32> for FragmentSize {
    type Error = Error;

    fn try_from(value: u32) -> Result<Self> {
        Self::new(value)
    }
}

impl From<FragmentSize> for u32 {
    fn from(size: FragmentSize) -> u32 {
        size.0
    }
}

impl fmt::Display for FragmentSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Number of fragments a file of `len` bytes yields.
pub fn fragment_count(len: usize, size: FragmentSize) -> usize {
    let r = size.bytes();
    if len < 2 * r {
        return 0;
    }
    len / r - 1 + usize::from(!len.is_multiple_of(r))
}

/// Slices one file into fragments. Draws from `rng` once, and only when the
/// file length is not a multiple of the fragment size.
pub fn extract_from_file<R: Rng + ?Sized>(
    contents: &[u8],
    size: FragmentSize,
    rng: &mut R,
) -> Result<Vec<Vec<u8>>> {
    let r = size.bytes();
    let len = contents.len();
    if len < 2 * r {
        return Err(Error::FileTooShort {
            len,
            fragment_size: size.get(),
        });
    }

    let full = len / r - 1;
    let rem = len % r;
    assert!(full >= 1, "size filter guarantees at least one full fragment");

    let mut out = Vec::with_capacity(full + usize::from(rem > 0));
    out.extend(contents[r..r * (full + 1)].chunks_exact(r).map(<[u8]>::to_vec));

    if rem > 0 {
        let chosen = rng.random_range(0..full);
        let mut padded = Vec::with_capacity(r);
        padded.extend_from_slice(&contents[len - rem..]);
        padded.extend_from_slice(&out[chosen][..r - rem]);
        out.push(padded);
    }
    Ok(out)
}

/// One classification sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub bytes: Vec<u8>,
    /// Index of the source file in extraction order.
    pub file_id: u32,
    /// Class index into the owning set's [`LabelSet`].
    pub label: u16,
    /// Position within the file's extracted sequence, from 0.
    pub ordinal: u32,
}

/// All fragments extracted from a corpus at one fragment size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentSet {
    pub fragment_size: FragmentSize,
    pub labels: LabelSet,
    pub fragments: Vec<Fragment>,
    /// Fragments contributed by each file, indexed by `file_id`.
    pub per_file_counts: Vec<u32>,
}

impl FragmentSet {
    pub fn new(fragment_size: FragmentSize, labels: LabelSet) -> Self {
        Self {
            fragment_size,
            labels,
            fragments: Vec::new(),
            per_file_counts: Vec::new(),
        }
    }

    /// Extracts the next file's fragments. The file gets id
    /// `per_file_counts.len()` and its padding draw comes from the stream
    /// `seed ^ file_id`, so the result is independent of how files are
    /// scheduled.
    pub fn push_file(&mut self, contents: &[u8], label: u16, seed: u64) -> Result<u32> {
        if usize::from(label) >= self.labels.len() {
            return Err(Error::LabelIndex {
                index: usize::from(label),
                len: self.labels.len(),
            });
        }
        let file_id = self.per_file_counts.len() as u32;
        let mut rng = rng::stream(seed, u64::from(file_id));
        let pieces = extract_from_file(contents, self.fragment_size, &mut rng)?;
        let count = pieces.len() as u32;
        self.fragments
            .extend(pieces.into_iter().enumerate().map(|(ordinal, bytes)| Fragment {
                bytes,
                file_id,
                label,
                ordinal: ordinal as u32,
            }));
        self.per_file_counts.push(count);
        Ok(file_id)
    }

    pub fn len(&self) -> usize {
        self.fragments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fragments.is_empty()
    }

    /// Fragment count per class index.
    pub fn class_counts(&self) -> Vec<u64> {
        let mut counts = alloc::vec![0u64; self.labels.len()];
        for f in &self.fragments {
            counts[usize::from(f.label)] += 1;
        }
        counts
    }

    pub fn label_indices(&self) -> Vec<u16> {
        self.fragments.iter().map(|f| f.label).collect()
    }

    pub fn num_files(&self) -> usize {
        self.per_file_counts.len()
    }
}
