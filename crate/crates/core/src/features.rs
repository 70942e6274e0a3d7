//! Byte-level TF-IDF weighting.
//!
//! For byte value `v` in a fragment of `R` bytes, `TF = count(v) / R`; over a
//! fitted corpus of `N` fragments of which `K_v` contain `v`,
//! `IDF = ln(N / K_v)`, with `IDF = 0` for bytes the corpus never saw. The
//! feature for `v` is `TF × IDF`, which is zero unless the byte occurs in the
//! fragment and is absent from at least one fitted fragment.

use alloc::vec::Vec;
use core::ops::Index;

use crate::error::{Error, Result};

pub const NUM_FEATURES: usize = 256;

/// Occurrence count of each byte value in one fragment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ByteHistogram {
    pub counts: [u32; NUM_FEATURES],
}

impl ByteHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }
}

pub fn byte_histogram(fragment: &[u8]) -> ByteHistogram {
    let mut counts = [0u32; NUM_FEATURES];
    for &b in fragment {
        counts[usize::from(b)] += 1;
    }
    ByteHistogram { counts }
}

/// Per-byte document frequencies over a set of fragments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocFreqStats {
    doc_freq: [u64; NUM_FEATURES],
    total_fragments: u64,
}

impl DocFreqStats {
    /// Rebuilds stats from stored counts, checking `1 <= N` and `K_v <= N`.
    pub fn from_parts(doc_freq: [u64; NUM_FEATURES], total_fragments: u64) -> Result<Self> {
        if total_fragments == 0 {
            return Err(Error::EmptyCorpus);
        }
        if doc_freq.iter().any(|&k| k > total_fragments) {
            return Err(Error::Counts("document frequency exceeds fragment count"));
        }
        Ok(Self {
            doc_freq,
            total_fragments,
        })
    }

    pub fn doc_freq(&self) -> &[u64; NUM_FEATURES] {
        &self.doc_freq
    }

    pub fn total_fragments(&self) -> u64 {
        self.total_fragments
    }

    /// Precomputed IDF for every byte value.
    pub fn idf_table(&self) -> [f64; NUM_FEATURES] {
        core::array::from_fn(|v| idf(self, v as u8))
    }
}

/// Counts, for each byte value, the fragments it occurs in.
pub fn fit_doc_freq<I, F>(fragments: I) -> Result<DocFreqStats>
where
    I: IntoIterator<Item = F>,
    F: AsRef<[u8]>,
{
    let mut doc_freq = [0u64; NUM_FEATURES];
    let mut total = 0u64;
    let mut seen = [false; NUM_FEATURES];
    for fragment in fragments {
        seen.fill(false);
        for &b in fragment.as_ref() {
            seen[usize::from(b)] = true;
        }
        for (k, &present) in doc_freq.iter_mut().zip(&seen) {
            *k += u64::from(present);
        }
        total += 1;
    }
    if total == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(DocFreqStats {
        doc_freq,
        total_fragments: total,
    })
}

/// Term frequency of byte `v`: `counts[v] / fragment_size`.
pub fn tf(histogram: &ByteHistogram, v: u8, fragment_size: usize) -> f64 {
    debug_assert!(fragment_size > 0);
    f64::from(histogram.counts[usize::from(v)]) / fragment_size as f64
}

/// Inverse document frequency of byte `v`; zero for bytes never seen in the
/// fitted corpus.
pub fn idf(stats: &DocFreqStats, v: u8) -> f64 {
    let k = stats.doc_freq[usize::from(v)];
    if k == 0 {
        0.0
    } else {
        libm::log(stats.total_fragments as f64 / k as f64)
    }
}

/// Dense 256-entry weight vector for one fragment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; NUM_FEATURES]);

impl FeatureVector {
    pub fn zeros() -> Self {
        Self([0.0; NUM_FEATURES])
    }

    pub fn as_array(&self) -> &[f64; NUM_FEATURES] {
        &self.0
    }
}

impl Index<usize> for FeatureVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

pub fn weight_vector(fragment: &[u8], stats: &DocFreqStats) -> FeatureVector {
    weight_vector_with(fragment, &stats.idf_table())
}

pub(crate) fn weight_vector_with(fragment: &[u8], idf_table: &[f64; NUM_FEATURES]) -> FeatureVector {
    let hist = byte_histogram(fragment);
    let r = fragment.len();
    let mut out = [0.0; NUM_FEATURES];
    if r == 0 {
        return FeatureVector(out);
    }
    for (v, w) in out.iter_mut().enumerate() {
        let count = hist.counts[v];
        if count > 0 && idf_table[v] > 0.0 {
            *w = tf(&hist, v as u8, r) * idf_table[v];
        }
    }
    FeatureVector(out)
}

/// Vectorizes fragments against `stats`, one row per fragment in input order.
pub fn vectorize_all<F: AsRef<[u8]> + Sync>(fragments: &[F], stats: &DocFreqStats) -> Vec<FeatureVector> {
    let table = stats.idf_table();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        fragments
            .par_iter()
            .map(|f| weight_vector_with(f.as_ref(), &table))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        fragments
            .iter()
            .map(|f| weight_vector_with(f.as_ref(), &table))
            .collect()
    }
}
