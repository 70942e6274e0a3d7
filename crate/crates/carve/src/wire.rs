//! Little-endian encoding helpers shared by the dump and model formats.

use sift_core::{ClassLabel, LabelSet};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("bad magic bytes: not a {0} file")]
    BadMagic(&'static str),
    #[error("unsupported format version {found} (this build reads version {supported})")]
    UnsupportedVersion { found: u16, supported: u16 },
    #[error("file is truncated")]
    Truncated,
    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("{0} trailing bytes after end of data")]
    TrailingBytes(usize),
    #[error("invalid content: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] sift_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Default)]
pub(crate) struct Writer {
    pub buf: Vec<u8>,
}

impl Writer {
    pub fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }
    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    pub fn u16(&mut self, v: u16) {
        self.bytes(&v.to_le_bytes());
    }
    pub fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }
    pub fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }
    pub fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }
    pub fn labels(&mut self, labels: &LabelSet) {
        self.u16(labels.len() as u16);
        for label in labels.iter() {
            let name = label.as_str().as_bytes();
            self.u8(name.len() as u8);
            self.bytes(name);
        }
    }
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }
    pub fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(n).ok_or(FormatError::Truncated)?;
        let out = self.buf.get(self.pos..end).ok_or(FormatError::Truncated)?;
        self.pos = end;
        Ok(out)
    }
    pub fn array<const N: usize>(&mut self) -> Result<[u8; N], FormatError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }
    pub fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }
    pub fn u16(&mut self) -> Result<u16, FormatError> {
        Ok(u16::from_le_bytes(self.array()?))
    }
    pub fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    pub fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    pub fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_bits(self.u64()?))
    }
    pub fn labels(&mut self) -> Result<LabelSet, FormatError> {
        let n = self.u16()?;
        let mut labels = Vec::with_capacity(usize::from(n));
        for _ in 0..n {
            let len = usize::from(self.u8()?);
            let name = std::str::from_utf8(self.take(len)?)
                .map_err(|_| FormatError::Invalid("label is not UTF-8".into()))?;
            labels.push(ClassLabel::new(name)?);
        }
        Ok(LabelSet::new(labels)?)
    }
    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
    pub fn finish(self) -> Result<(), FormatError> {
        match self.remaining() {
            0 => Ok(()),
            n => Err(FormatError::TrailingBytes(n)),
        }
    }
}

/// Checks the magic and version that open every file format.
pub(crate) fn header(
    r: &mut Reader<'_>,
    magic: &[u8; 8],
    kind: &'static str,
    supported: u16,
) -> Result<(), FormatError> {
    let found = r.take(8).map_err(|_| FormatError::BadMagic(kind))?;
    if found != magic {
        return Err(FormatError::BadMagic(kind));
    }
    let version = r.u16()?;
    if version != supported {
        return Err(FormatError::UnsupportedVersion {
            found: version,
            supported,
        });
    }
    Ok(())
}
