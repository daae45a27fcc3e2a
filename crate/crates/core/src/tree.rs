//! In-memory source trees.
//!
//! A [`SourceTree`] maps `/`-separated relative paths to `\n`-normalized text.
//! Iteration is always lexicographic by path, so every operation that walks a
//! tree (hashing, diffing, rendering) is deterministic.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// File name of the manifest at the tree root. It is never part of the tree.
pub const MANIFEST_FILE: &str = "dcc.json";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceTree {
    entries: BTreeMap<String, String>,
}

/// Normalizes line endings to `\n` and terminates the last line.
pub fn normalize_text(text: &str) -> String {
    let mut out = text.replace("\r\n", "\n").replace('\r', "\n");
    if !out.is_empty() && !out.ends_with('\n') {
        out.push('\n');
    }
    out
}

/// Checks that `path` is relative, `/`-separated and free of `.`/`..` segments.
pub fn check_path(path: &str) -> Result<()> {
    if path.is_empty() || path.starts_with('/') || path.contains('\\') {
        return Err(Error::Parse(format!("invalid relative path `{path}`")));
    }
    for seg in path.split('/') {
        if seg.is_empty() || seg == "." || seg == ".." {
            return Err(Error::Parse(format!("invalid path segment in `{path}`")));
        }
    }
    Ok(())
}

/// Splits normalized text into lines without terminators.
pub fn split_lines(text: &str) -> Vec<&str> {
    text.split_terminator('\n').collect()
}

/// Joins lines back into normalized text.
pub fn join_lines<S: AsRef<str>>(lines: &[S]) -> String {
    let mut out = String::new();
    for line in lines {
        out.push_str(line.as_ref());
        out.push('\n');
    }
    out
}

impl SourceTree {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a file, normalizing its content. Returns the previous content.
    pub fn insert(&mut self, path: impl Into<String>, content: &str) -> Result<Option<String>> {
        let path = path.into();
        check_path(&path)?;
        Ok(self.entries.insert(path, normalize_text(content)))
    }

    pub fn remove(&mut self, path: &str) -> Option<String> {
        self.entries.remove(path)
    }

    pub fn get(&self, path: &str) -> Option<&str> {
        self.entries.get(path).map(String::as_str)
    }

    pub fn contains(&self, path: &str) -> bool {
        self.entries.contains_key(path)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(p, c)| (p.as_str(), c.as_str()))
    }

    /// Paths whose content differs between the two trees, including paths
    /// present on one side only.
    pub fn differing_paths(&self, other: &SourceTree) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for (path, content) in &self.entries {
            if other.entries.get(path) != Some(content) {
                out.push(path.clone());
            }
        }
        for path in other.entries.keys() {
            if !self.entries.contains_key(path) {
                out.push(path.clone());
            }
        }
        out.sort();
        out
    }

    /// SHA-256 over every `(path, content)` pair in path order.
    pub fn digest(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        for (path, content) in &self.entries {
            hasher.update((path.len() as u64).to_le_bytes());
            hasher.update(path.as_bytes());
            hasher.update((content.len() as u64).to_le_bytes());
            hasher.update(content.as_bytes());
        }
        hasher.finalize().into()
    }

    /// Reads a directory. Hidden entries (leading `.`) and the root manifest
    /// are skipped; binary or non-UTF-8 files are a parse error.
    pub fn load_dir(root: &Path) -> Result<SourceTree> {
        let mut tree = SourceTree::new();
        let walker = walkdir::WalkDir::new(root)
            .sort_by_file_name()
            .into_iter()
            .filter_entry(|e| e.depth() == 0 || !e.file_name().to_string_lossy().starts_with('.'));
        for entry in walker {
            let entry = entry.map_err(|e| Error::Io {
                path: root.display().to_string(),
                source: e.into(),
            })?;
            if !entry.file_type().is_file() {
                continue;
            }
            let rel = entry
                .path()
                .strip_prefix(root)
                .expect("walkdir yields paths under root");
            let rel: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            let rel = rel.join("/");
            if rel == MANIFEST_FILE {
                continue;
            }
            let bytes = fs::read(entry.path()).map_err(|source| Error::Io { path: rel.clone(), source })?;
            if bytes.contains(&0) {
                return Err(Error::Parse(format!("binary file `{rel}`")));
            }
            let text = String::from_utf8(bytes).map_err(|_| Error::Parse(format!("non-UTF-8 file `{rel}`")))?;
            tree.insert(rel, &text)?;
        }
        Ok(tree)
    }

    /// Writes every file under `root`, creating directories as needed.
    pub fn write_dir(&self, root: &Path) -> Result<()> {
        for (path, content) in &self.entries {
            let dest = root.join(path);
            if let Some(parent) = dest.parent() {
                fs::create_dir_all(parent).map_err(|source| Error::Io { path: path.clone(), source })?;
            }
            fs::write(&dest, content).map_err(|source| Error::Io { path: path.clone(), source })?;
        }
        Ok(())
    }
}

impl FromIterator<(String, String)> for SourceTree {
    /// Panics on malformed paths; meant for literals in tests and fixtures.
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        let mut tree = SourceTree::new();
        for (path, content) in iter {
            tree.insert(path, &content).expect("valid path");
        }
        tree
    }
}

/// Builds a tree from `(path, content)` literals.
pub fn tree_of<'a>(files: impl IntoIterator<Item = (&'a str, &'a str)>) -> SourceTree {
    files.into_iter().map(|(p, c)| (p.to_owned(), c.to_owned())).collect()
}
