//! Dataset discovery: walk a directory, label files, drop duplicate names and
//! files shorter than two fragments.

use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sift_core::{ClassLabel, FragmentSize, LabelSet};
use walkdir::WalkDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum LabelRule {
    /// Lowercased filename extension; `unk` when there is none.
    #[default]
    Extension,
    /// Name of the file's immediate parent directory.
    ParentDir,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LabelError {
    #[error("file has no parent directory inside the dataset")]
    NoParent,
    #[error("path is not valid UTF-8")]
    NotUtf8,
    #[error(transparent)]
    Invalid(#[from] sift_core::Error),
}

/// Derives a file's class label from its path.
pub fn label_of(path: &Path, rule: LabelRule) -> Result<ClassLabel, LabelError> {
    match rule {
        LabelRule::Extension => match path.extension() {
            None => Ok(ClassLabel::unknown()),
            Some(ext) => {
                let ext = ext.to_str().ok_or(LabelError::NotUtf8)?;
                Ok(ClassLabel::new(ext.to_ascii_lowercase())?)
            }
        },
        LabelRule::ParentDir => {
            let parent = path
                .parent()
                .and_then(Path::file_name)
                .ok_or(LabelError::NoParent)?;
            let parent = parent.to_str().ok_or(LabelError::NotUtf8)?;
            Ok(ClassLabel::new(parent.to_ascii_lowercase())?)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: PathBuf,
    pub base_name: String,
    pub size_bytes: u64,
    pub label: ClassLabel,
}

/// A file left out of the manifest and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skipped {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub root: PathBuf,
    pub fragment_size: FragmentSize,
    pub label_rule: LabelRule,
    pub label_set: Vec<ClassLabel>,
    /// Sorted by path.
    pub entries: Vec<FileEntry>,
    /// Files whose label could not be derived.
    pub rejects: Vec<Skipped>,
    /// Duplicate names and files shorter than two fragments.
    pub excluded: Vec<Skipped>,
}

impl CorpusManifest {
    pub fn labels(&self) -> LabelSet {
        LabelSet::from_unsorted(self.label_set.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

/// Scans `root` and returns the files that survive preprocessing.
///
/// Among files sharing a base name only the first by path is kept, then
/// files smaller than `2 × fragment_size` are dropped. Deduplicating first
/// makes the size filter monotone in `fragment_size`.
pub fn scan_dataset(root: &Path, fragment_size: FragmentSize, rule: LabelRule) -> io::Result<CorpusManifest> {
    let meta = std::fs::metadata(root)?;
    if !meta.is_dir() {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!("{} is not a directory", root.display()),
        ));
    }

    let mut rejects = Vec::new();
    let mut labeled = Vec::new();
    for item in WalkDir::new(root).follow_links(false).sort_by_file_name() {
        let item = item.map_err(io::Error::from)?;
        if !item.file_type().is_file() {
            continue;
        }
        let path = item.path().to_path_buf();
        let relative = path.strip_prefix(root).unwrap_or(&path);
        let label_path = match rule {
            // the dataset root itself never names a class
            LabelRule::ParentDir => relative,
            LabelRule::Extension => path.as_path(),
        };
        let label = match label_of(label_path, rule) {
            Ok(label) => label,
            Err(err) => {
                rejects.push(Skipped {
                    path,
                    reason: err.to_string(),
                });
                continue;
            }
        };
        let Some(base_name) = path.file_name().and_then(|n| n.to_str()).map(str::to_owned) else {
            rejects.push(Skipped {
                path,
                reason: LabelError::NotUtf8.to_string(),
            });
            continue;
        };
        let size_bytes = item.metadata().map_err(io::Error::from)?.len();
        labeled.push(FileEntry {
            path,
            base_name,
            size_bytes,
            label,
        });
    }
    labeled.sort_by(|a, b| a.path.cmp(&b.path));

    let mut excluded = Vec::new();
    let mut first_by_name: BTreeMap<String, PathBuf> = BTreeMap::new();
    let min_size = 2 * u64::from(fragment_size.get());
    let mut entries = Vec::new();
    for entry in labeled {
        if let Some(kept) = first_by_name.get(&entry.base_name) {
            excluded.push(Skipped {
                reason: format!("duplicate file name; kept {}", kept.display()),
                path: entry.path,
            });
            continue;
        }
        first_by_name.insert(entry.base_name.clone(), entry.path.clone());
        if entry.size_bytes < min_size {
            excluded.push(Skipped {
                reason: format!("{} bytes is below {min_size}", entry.size_bytes),
                path: entry.path,
            });
            continue;
        }
        entries.push(entry);
    }

    let label_set: BTreeSet<ClassLabel> = entries.iter().map(|e| e.label.clone()).collect();
    Ok(CorpusManifest {
        root: root.to_path_buf(),
        fragment_size,
        label_rule: rule,
        label_set: label_set.into_iter().collect(),
        entries,
        rejects,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn r(n: u32) -> FragmentSize {
        FragmentSize::new(n).unwrap()
    }

    fn write(root: &Path, rel: &str, len: usize) {
        let p = root.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, vec![b'x'; len]).unwrap();
    }

    #[test]
    fn labels_by_extension() {
        assert_eq!(label_of(Path::new("docs/report.PDF"), LabelRule::Extension).unwrap().as_str(), "pdf");
        assert_eq!(label_of(Path::new("data/blob"), LabelRule::Extension).unwrap().as_str(), "unk");
        assert!(label_of(Path::new("a/b.tar-gz"), LabelRule::Extension).is_err());
    }

    #[test]
    fn labels_by_parent_dir() {
        assert_eq!(
            label_of(Path::new("train/eps/file001"), LabelRule::ParentDir).unwrap().as_str(),
            "eps"
        );
        assert_eq!(label_of(Path::new("file001"), LabelRule::ParentDir), Err(LabelError::NoParent));
    }

    #[test]
    fn empty_directory() {
        let dir = tempfile::tempdir().unwrap();
        let m = scan_dataset(dir.path(), r(512), LabelRule::Extension).unwrap();
        assert!(m.entries.is_empty());
        assert!(m.label_set.is_empty());
    }

    #[test]
    fn missing_root_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(scan_dataset(&dir.path().join("nope"), r(512), LabelRule::Extension).is_err());
    }

    #[test]
    fn duplicate_names_keep_first_path() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "b/x.csv", 4096);
        write(dir.path(), "a/x.csv", 2048);
        let m = scan_dataset(dir.path(), r(512), LabelRule::Extension).unwrap();
        assert_eq!(m.entries.len(), 1);
        assert_eq!(m.entries[0].path, dir.path().join("a/x.csv"));
        assert_eq!(m.entries[0].size_bytes, 2048);
        assert_eq!(m.excluded.len(), 1);
    }

    #[test]
    fn small_files_are_excluded() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "small.txt", 900);
        write(dir.path(), "edge.txt", 1024);
        let m = scan_dataset(dir.path(), r(512), LabelRule::Extension).unwrap();
        let names: Vec<_> = m.entries.iter().map(|e| e.base_name.as_str()).collect();
        assert_eq!(names, ["edge.txt"]);
    }

    #[test]
    fn root_level_files_rejected_under_parent_dir() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "loose.bin", 4096);
        write(dir.path(), "Gif/a", 4096);
        let m = scan_dataset(dir.path(), r(512), LabelRule::ParentDir).unwrap();
        assert_eq!(m.entries.len(), 1);
        assert_eq!(m.entries[0].label.as_str(), "gif");
        assert_eq!(m.rejects.len(), 1);
        assert_eq!(m.rejects[0].path, dir.path().join("loose.bin"));
    }
}
