use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// A lowercase alphanumeric file-type label such as `csv` or `dbase3`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "String", into = "String"))]
pub struct ClassLabel(String);

impl ClassLabel {
    /// Label given to files without an extension.
    pub const UNKNOWN: &'static str = "unk";

    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if !name.is_empty()
            && name
                .bytes()
                .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit())
        {
            Ok(Self(name))
        } else {
            Err(Error::InvalidLabel(name))
        }
    }

    pub fn unknown() -> Self {
        Self(Self::UNKNOWN.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for ClassLabel {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ClassLabel> for String {
    fn from(label: ClassLabel) -> String {
        label.0
    }
}

impl core::str::FromStr for ClassLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::new(s)
    }
}

/// Ordered, duplicate-free set of labels. A label's position is its class
/// index everywhere else in the crate, and the order breaks voting ties.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(try_from = "Vec<ClassLabel>", into = "Vec<ClassLabel>")
)]
pub struct LabelSet {
    labels: Vec<ClassLabel>,
}

impl LabelSet {
    pub fn new(labels: Vec<ClassLabel>) -> Result<Self> {
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(Error::DuplicateLabel(label.to_string()));
            }
        }
        if labels.len() > usize::from(u16::MAX) {
            return Err(Error::LabelIndex {
                index: labels.len(),
                len: usize::from(u16::MAX),
            });
        }
        Ok(Self { labels })
    }

    /// Builds a set from arbitrary labels, sorted and deduplicated.
    pub fn from_unsorted(mut labels: Vec<ClassLabel>) -> Self {
        labels.sort();
        labels.dedup();
        Self { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, index: u16) -> Option<&ClassLabel> {
        self.labels.get(usize::from(index))
    }

    pub fn index_of(&self, label: &ClassLabel) -> Option<u16> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| i as u16)
    }

    pub fn index_of_str(&self, name: &str) -> Option<u16> {
        self.labels
            .iter()
            .position(|l| l.as_str() == name)
            .map(|i| i as u16)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ClassLabel> {
        self.labels.iter()
    }

    pub fn as_slice(&self) -> &[ClassLabel] {
        &self.labels
    }
}

impl TryFrom<Vec<ClassLabel>> for LabelSet {
    type Error = Error;

    fn try_from(labels: Vec<ClassLabel>) -> Result<Self> {
        Self::new(labels)
    }
}

impl From<LabelSet> for Vec<ClassLabel> {
    fn from(set: LabelSet) -> Self {
        set.labels
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_validation() {
        assert!(ClassLabel::new("dbase3").is_ok());
        assert!(ClassLabel::new("").is_err());
        assert!(ClassLabel::new("PDF").is_err());
        assert!(ClassLabel::new("tar-gz").is_err());
        assert!(ClassLabel::new("é").is_err());
    }

    #[test]
    fn duplicate_labels_rejected() {
        let a = ClassLabel::new("csv").unwrap();
        assert!(LabelSet::new(alloc::vec![a.clone(), a]).is_err());
    }

    #[test]
    fn from_unsorted_orders_labels() {
        let set = LabelSet::from_unsorted(alloc::vec![
            ClassLabel::new("pdf").unwrap(),
            ClassLabel::new("csv").unwrap(),
            ClassLabel::new("pdf").unwrap(),
        ]);
        assert_eq!(set.len(), 2);
        assert_eq!(set.index_of_str("csv"), Some(0));
        assert_eq!(set.index_of_str("pdf"), Some(1));
    }
}
