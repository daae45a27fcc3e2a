//! Open-subset derivation and two-way patch translation.
//!
//! The internal tree is the single source of truth. The open tree is always
//! `derive_open_subset(internal)`: `open` files verbatim, `mixed` files with
//! their marked regions stripped, `internal` files dropped.
//!
//! Internal commits are translated by deriving the touched files before and
//! after the commit and diffing the results, so the forward patch commutes
//! with derivation by construction. Community commits are ported back by
//! replaying the open-side edit script onto the internal file through the
//! strip map; an insertion that could land on either side of a stripped
//! region is a [`Error::Conflict`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use similar::DiffOp;

use crate::error::{Error, MarkerError, Result};
use crate::model::{first_marker_line, Manifest, Visibility};
use crate::patch::{apply_patch, diff_ops, diff_trees_on, Patch};
use crate::tree::{join_lines, split_lines, SourceTree};

/// Which development path a commit was authored on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PathKind {
    Internal,
    Open,
}

/// Lines `begin_line..=end_line` (1-based, marker lines included) of a file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Region {
    pub begin_line: usize,
    pub end_line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarkedRegion {
    pub path: String,
    pub begin_line: usize,
    pub end_line: usize,
}

/// Locates marked regions. Errors carry an empty path.
pub fn find_regions(content: &str, begin: &str, end: &str) -> Result<Vec<Region>, MarkerError> {
    let mut regions = Vec::new();
    let mut open: Option<usize> = None;
    for (i, line) in content.split_terminator('\n').enumerate() {
        let lineno = i + 1;
        if line.contains(begin) {
            if open.is_some() {
                return Err(MarkerError::Nested { path: String::new(), line: lineno });
            }
            open = Some(lineno);
        } else if line.contains(end) {
            match open.take() {
                Some(b) => regions.push(Region { begin_line: b, end_line: lineno }),
                None => return Err(MarkerError::Unbalanced { path: String::new(), line: lineno }),
            }
        }
    }
    match open {
        Some(b) => Err(MarkerError::Unbalanced { path: String::new(), line: b }),
        None => Ok(regions),
    }
}

/// Removes marker lines and everything between paired markers.
pub fn strip_file(content: &str, begin: &str, end: &str) -> Result<(String, Vec<Region>), MarkerError> {
    let regions = find_regions(content, begin, end)?;
    let lines = split_lines(content);
    let mut kept = Vec::with_capacity(lines.len());
    let mut next = regions.iter().peekable();
    for (i, line) in lines.iter().enumerate() {
        let lineno = i + 1;
        while next.peek().is_some_and(|r| r.end_line < lineno) {
            next.next();
        }
        if next.peek().is_some_and(|r| r.begin_line <= lineno && lineno <= r.end_line) {
            continue;
        }
        kept.push(*line);
    }
    Ok((join_lines(&kept), regions))
}

/// Line mapping for one stripped file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileStripMap {
    pub regions: Vec<Region>,
    /// 0-based internal line index of each open line.
    open_to_internal: Vec<usize>,
    internal_len: usize,
}

impl FileStripMap {
    fn new(regions: Vec<Region>, internal_len: usize) -> Self {
        let mut open_to_internal = Vec::with_capacity(internal_len);
        let mut r = regions.iter().peekable();
        for idx in 0..internal_len {
            let lineno = idx + 1;
            while r.peek().is_some_and(|x| x.end_line < lineno) {
                r.next();
            }
            if !r.peek().is_some_and(|x| x.begin_line <= lineno) {
                open_to_internal.push(idx);
            }
        }
        FileStripMap { regions, open_to_internal, internal_len }
    }

    /// Internal line (1-based) → open line (1-based); `None` for stripped lines.
    pub fn to_open(&self, internal_line: usize) -> Option<usize> {
        let idx = internal_line.checked_sub(1)?;
        self.open_to_internal.binary_search(&idx).ok().map(|i| i + 1)
    }

    /// Open line (1-based) → internal line (1-based).
    pub fn to_internal(&self, open_line: usize) -> Option<usize> {
        self.open_to_internal.get(open_line.checked_sub(1)?).map(|i| i + 1)
    }

    pub fn open_len(&self) -> usize {
        self.open_to_internal.len()
    }

    pub fn internal_len(&self) -> usize {
        self.internal_len
    }

    /// Internal index range `[lo, hi)` between open lines `j-1` and `j`
    /// (0-based). Non-empty exactly when stripped lines sit there.
    fn gap(&self, j: usize) -> (usize, usize) {
        let lo = if j == 0 { 0 } else { self.open_to_internal[j - 1] + 1 };
        let hi = self.open_to_internal.get(j).copied().unwrap_or(self.internal_len);
        (lo, hi)
    }
}

/// Strip maps for every `mixed` file of a derivation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StripMap {
    pub files: BTreeMap<String, FileStripMap>,
}

impl StripMap {
    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    pub fn get(&self, path: &str) -> Option<&FileStripMap> {
        self.files.get(path)
    }

    pub fn regions(&self) -> Vec<MarkedRegion> {
        self.files
            .iter()
            .flat_map(|(path, f)| {
                f.regions.iter().map(move |r| MarkedRegion {
                    path: path.clone(),
                    begin_line: r.begin_line,
                    end_line: r.end_line,
                })
            })
            .collect()
    }
}

/// Open-side content of one file, or `None` when the file is internal.
pub fn derive_file(manifest: &Manifest, path: &str, content: &str) -> Result<Option<(String, Option<FileStripMap>)>> {
    let begin = manifest.marker_begin();
    let end = manifest.marker_end();
    match manifest.visibility_of(path) {
        Visibility::Internal => Ok(None),
        Visibility::Open => match first_marker_line(content, begin, end) {
            Some(line) => Err(MarkerError::InOpenFile { path: path.to_owned(), line }.into()),
            None => Ok(Some((content.to_owned(), None))),
        },
        Visibility::Mixed => {
            let (text, regions) = strip_file(content, begin, end).map_err(|e| e.with_path(path))?;
            let map = FileStripMap::new(regions, split_lines(content).len());
            Ok(Some((text, Some(map))))
        }
    }
}

/// Derives the open-source-able subset of `tree`.
pub fn derive_open_subset(tree: &SourceTree, manifest: &Manifest) -> Result<(SourceTree, StripMap)> {
    let mut out = SourceTree::new();
    let mut map = StripMap::default();
    for (path, content) in tree.iter() {
        if let Some((text, file_map)) = derive_file(manifest, path, content)? {
            out.insert(path, &text)?;
            if let Some(m) = file_map {
                map.files.insert(path.to_owned(), m);
            }
        }
    }
    Ok((out, map))
}

fn derive_paths<'a>(tree: &SourceTree, manifest: &Manifest, paths: impl IntoIterator<Item = &'a str>) -> Result<SourceTree> {
    let mut out = SourceTree::new();
    for path in paths {
        if let Some(content) = tree.get(path) {
            if let Some((text, _)) = derive_file(manifest, path, content)? {
                out.insert(path, &text)?;
            }
        }
    }
    Ok(out)
}

/// Translates an internal commit into the equivalent open-subset patch.
pub fn forward_patch(internal_patch: &Patch, base: &SourceTree, manifest: &Manifest) -> Result<Patch> {
    let after = apply_patch(base, internal_patch)?;
    let touched = internal_patch.touched_paths();
    let paths = || touched.iter().map(String::as_str);
    let open_after = derive_paths(&after, manifest, paths())?;
    let open_before = derive_paths(base, manifest, paths())?;
    Ok(diff_trees_on(&open_before, &open_after, paths()))
}

/// Translates a community patch on the open subset into an internal patch.
pub fn port_back(open_patch: &Patch, base: &SourceTree, manifest: &Manifest) -> Result<Patch> {
    let touched = open_patch.touched_paths();
    let paths = || touched.iter().map(String::as_str);
    let open_before = derive_paths(base, manifest, paths())?;
    let open_after = apply_patch(&open_before, open_patch)?;
    let begin = manifest.marker_begin();
    let end = manifest.marker_end();

    let mut ported = base.clone();
    for path in paths() {
        if let Some(new) = open_after.get(path) {
            if let Some(line) = first_marker_line(new, begin, end) {
                return Err(MarkerError::InOpenFile { path: path.to_owned(), line }.into());
            }
        }
        let visibility = manifest.visibility_of(path);
        match (open_before.get(path), open_after.get(path)) {
            (None, None) => {}
            (None, Some(new)) => {
                if visibility == Visibility::Internal || base.contains(path) {
                    return Err(Error::Conflict(format!("{path}: community patch creates a file at an internal path")));
                }
                ported.insert(path, new)?;
            }
            (Some(_), None) => {
                let internal = base.get(path).expect("derived from base");
                if visibility == Visibility::Mixed && !find_regions(internal, begin, end).map_err(|e| e.with_path(path))?.is_empty() {
                    return Err(Error::Conflict(format!("{path}: deleting the file would delete internal regions")));
                }
                ported.remove(path);
            }
            (Some(old), Some(new)) => {
                let internal = base.get(path).expect("derived from base");
                let content = match visibility {
                    Visibility::Mixed => port_mixed(path, internal, old, new, begin, end)?,
                    _ => new.to_owned(),
                };
                ported.insert(path, &content)?;
            }
        }
    }
    Ok(diff_trees_on(base, &ported, paths()))
}

/// Replays the `open_old → open_new` edit script onto a mixed file.
fn port_mixed(path: &str, internal: &str, open_old: &str, open_new: &str, begin: &str, end: &str) -> Result<String> {
    let internal_lines = split_lines(internal);
    let (_, regions) = strip_file(internal, begin, end).map_err(|e| e.with_path(path))?;
    let map = FileStripMap::new(regions, internal_lines.len());
    let old = split_lines(open_old);
    let new = split_lines(open_new);
    debug_assert_eq!(old.len(), map.open_len());

    let conflict = |open_line: usize| {
        Error::Conflict(format!(
            "{path}: change at open line {open_line} borders a stripped region; placement is ambiguous"
        ))
    };
    let mut deleted = vec![false; internal_lines.len()];
    // Lines to emit before internal index `k` (or at the end for `len`).
    let mut inserts: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for op in diff_ops(&old, &new) {
        match op {
            DiffOp::Equal { .. } => {}
            DiffOp::Delete { old_index, old_len, .. } => {
                for k in old_index..old_index + old_len {
                    deleted[map.open_to_internal[k]] = true;
                }
            }
            DiffOp::Insert { old_index, new_index, new_len } => {
                let (lo, hi) = map.gap(old_index);
                if lo != hi {
                    return Err(conflict(old_index + 1));
                }
                inserts.entry(lo).or_default().extend_from_slice(&new[new_index..new_index + new_len]);
            }
            DiffOp::Replace { old_index, old_len, new_index, new_len } => {
                let first = map.open_to_internal[old_index];
                let last = map.open_to_internal[old_index + old_len - 1];
                if last - first != old_len - 1 {
                    return Err(conflict(old_index + 1));
                }
                deleted[first..=last].fill(true);
                inserts.entry(first).or_default().extend_from_slice(&new[new_index..new_index + new_len]);
            }
        }
    }

    let mut out: Vec<&str> = Vec::with_capacity(internal_lines.len() + new.len());
    for (k, line) in internal_lines.iter().enumerate() {
        if let Some(ins) = inserts.get(&k) {
            out.extend_from_slice(ins);
        }
        if !deleted[k] {
            out.push(line);
        }
    }
    if let Some(ins) = inserts.get(&internal_lines.len()) {
        out.extend_from_slice(ins);
    }
    Ok(join_lines(&out))
}

// ---------------------------------------------------------------------------
// Round-trip replay

/// Translation strategy used by [`check_round_trip_with`].
pub trait Translator {
    fn forward(&self, internal_patch: &Patch, base: &SourceTree, manifest: &Manifest) -> Result<Patch>;
    fn back(&self, open_patch: &Patch, base: &SourceTree, manifest: &Manifest) -> Result<Patch>;
}

/// [`forward_patch`] and [`port_back`].
#[derive(Debug, Clone, Copy, Default)]
pub struct AutoTranslator;

impl Translator for AutoTranslator {
    fn forward(&self, internal_patch: &Patch, base: &SourceTree, manifest: &Manifest) -> Result<Patch> {
        forward_patch(internal_patch, base, manifest)
    }

    fn back(&self, open_patch: &Patch, base: &SourceTree, manifest: &Manifest) -> Result<Patch> {
        port_back(open_patch, base, manifest)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepError {
    /// 1-based index into the patch sequence.
    pub step: usize,
    pub kind: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Divergence {
    pub step: usize,
    pub paths: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SyncReport {
    pub steps_replayed: usize,
    pub internal_steps: usize,
    pub open_steps: usize,
    pub errors: Vec<StepError>,
    pub divergence: Option<Divergence>,
}

impl SyncReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty() && self.divergence.is_none()
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e.root() {
        Error::Apply(_) => "apply",
        Error::Conflict(_) => "conflict",
        Error::Marker(_) => "marker",
        _ => "other",
    }
}

/// Replays `patches` on both development paths with the automatic translator.
pub fn check_round_trip(tree: &SourceTree, manifest: &Manifest, patches: &[(PathKind, Patch)]) -> Result<SyncReport> {
    check_round_trip_with(tree, manifest, patches, &AutoTranslator)
}

/// Replays `patches`, keeping an internal tree and a separately maintained
/// open tree, and compares the open tree against a fresh derivation after
/// every step. Stops at the first divergence. Failing steps are recorded and
/// skipped.
pub fn check_round_trip_with(
    tree: &SourceTree,
    manifest: &Manifest,
    patches: &[(PathKind, Patch)],
    translator: &dyn Translator,
) -> Result<SyncReport> {
    let mut report = SyncReport::default();
    let mut internal = tree.clone();
    let (mut open, _) = derive_open_subset(&internal, manifest)?;

    for (i, (kind, patch)) in patches.iter().enumerate() {
        let step = i + 1;
        let result = match kind {
            PathKind::Internal => translator.forward(patch, &internal, manifest).and_then(|fwd| {
                Ok((apply_patch(&internal, patch)?, apply_patch(&open, &fwd)?))
            }),
            PathKind::Open => translator.back(patch, &internal, manifest).and_then(|back| {
                Ok((apply_patch(&internal, &back)?, apply_patch(&open, patch)?))
            }),
        };
        report.steps_replayed = step;
        match kind {
            PathKind::Internal => report.internal_steps += 1,
            PathKind::Open => report.open_steps += 1,
        }
        let (next_internal, next_open) = match result {
            Ok(pair) => pair,
            Err(e) => {
                report.errors.push(StepError { step, kind: error_kind(&e), message: e.to_string() });
                continue;
            }
        };
        let fresh = match derive_open_subset(&next_internal, manifest) {
            Ok((t, _)) => t,
            Err(e) => {
                report.errors.push(StepError { step, kind: error_kind(&e), message: e.to_string() });
                continue;
            }
        };
        internal = next_internal;
        open = next_open;
        if fresh != open {
            report.divergence = Some(Divergence { step, paths: open.differing_paths(&fresh) });
            break;
        }
    }
    Ok(report)
}
