//! Unified diffs: parsing, rendering, exact application and tree diffing.
//!
//! Hunk headers store the values exactly as they appear in `@@ -s,l +s,l @@`:
//! for an empty range `s` is the line *after which* the change applies (so
//! `0` means "at the top"), otherwise it is the 1-based first line.
//!
//! Application is strict. Every hunk must match at its declared position with
//! zero fuzz and zero offset; anything else is an [`Error::Apply`].

use std::collections::BTreeSet;
use std::fmt;

use similar::{Algorithm, DiffOp};

use crate::error::{Error, Result};
use crate::tree::{join_lines, split_lines, SourceTree};

pub const DEV_NULL: &str = "/dev/null";
pub const CONTEXT_LINES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    Context,
    Delete,
    Add,
}

impl LineKind {
    fn prefix(self) -> char {
        match self {
            LineKind::Context => ' ',
            LineKind::Delete => '-',
            LineKind::Add => '+',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HunkLine {
    pub kind: LineKind,
    pub text: String,
}

impl HunkLine {
    pub fn new(kind: LineKind, text: impl Into<String>) -> Self {
        HunkLine { kind, text: text.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hunk {
    pub old_start: usize,
    pub old_len: usize,
    pub new_start: usize,
    pub new_len: usize,
    pub lines: Vec<HunkLine>,
}

impl Hunk {
    /// Builds a hunk from its body, deriving both lengths.
    pub fn from_lines(old_start: usize, new_start: usize, lines: Vec<HunkLine>) -> Hunk {
        let old_len = lines.iter().filter(|l| l.kind != LineKind::Add).count();
        let new_len = lines.iter().filter(|l| l.kind != LineKind::Delete).count();
        Hunk { old_start, old_len, new_start, new_len, lines }
    }

    fn counts_match(&self) -> bool {
        let old = self.lines.iter().filter(|l| l.kind != LineKind::Add).count();
        let new = self.lines.iter().filter(|l| l.kind != LineKind::Delete).count();
        old == self.old_len && new == self.new_len
    }

    /// 0-based index of the first old line this hunk covers.
    fn old_index(&self) -> Result<usize> {
        match (self.old_len, self.old_start) {
            (0, s) => Ok(s),
            (_, 0) => Err(Error::Apply("hunk with non-empty old range starts at line 0".into())),
            (_, s) => Ok(s - 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilePatch {
    /// `None` for `/dev/null` (file creation).
    pub old_path: Option<String>,
    /// `None` for `/dev/null` (file deletion).
    pub new_path: Option<String>,
    pub hunks: Vec<Hunk>,
}

impl FilePatch {
    /// The path this entry is about: the new path, or the old one for deletions.
    pub fn path(&self) -> &str {
        self.new_path
            .as_deref()
            .or(self.old_path.as_deref())
            .expect("file patch has at least one path")
    }

    pub fn is_create(&self) -> bool {
        self.old_path.is_none()
    }

    pub fn is_delete(&self) -> bool {
        self.new_path.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Patch {
    pub files: Vec<FilePatch>,
}

impl Patch {
    pub fn empty() -> Self {
        Patch::default()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Every path the patch touches, old side and new side.
    pub fn touched_paths(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for f in &self.files {
            out.extend(f.old_path.iter().cloned());
            out.extend(f.new_path.iter().cloned());
        }
        out
    }

    pub fn hunk_count(&self) -> usize {
        self.files.iter().map(|f| f.hunks.len()).sum()
    }

    /// Number of added and deleted lines.
    pub fn line_stats(&self) -> (usize, usize) {
        let mut added = 0;
        let mut deleted = 0;
        for line in self.files.iter().flat_map(|f| &f.hunks).flat_map(|h| &h.lines) {
            match line.kind {
                LineKind::Add => added += 1,
                LineKind::Delete => deleted += 1,
                LineKind::Context => {}
            }
        }
        (added, deleted)
    }
}

impl fmt::Display for Patch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for file in &self.files {
            match &file.old_path {
                Some(p) => writeln!(f, "--- a/{p}")?,
                None => writeln!(f, "--- {DEV_NULL}")?,
            }
            match &file.new_path {
                Some(p) => writeln!(f, "+++ b/{p}")?,
                None => writeln!(f, "+++ {DEV_NULL}")?,
            }
            for h in &file.hunks {
                writeln!(f, "@@ -{},{} +{},{} @@", h.old_start, h.old_len, h.new_start, h.new_len)?;
                for line in &h.lines {
                    writeln!(f, "{}{}", line.kind.prefix(), line.text)?;
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Parsing

fn header_path(rest: &str, prefix: &str) -> Option<String> {
    let raw = rest.split('\t').next().unwrap_or(rest).trim_end();
    if raw == DEV_NULL {
        return None;
    }
    Some(raw.strip_prefix(prefix).unwrap_or(raw).to_owned())
}

fn parse_range(s: &str) -> Option<(usize, usize)> {
    match s.split_once(',') {
        Some((start, len)) => Some((start.parse().ok()?, len.parse().ok()?)),
        None => Some((s.parse().ok()?, 1)),
    }
}

fn parse_hunk_header(line: &str) -> Option<(usize, usize, usize, usize)> {
    let rest = line.strip_prefix("@@ -")?;
    let (ranges, _) = rest.split_once(" @@")?;
    let (old, new) = ranges.split_once(" +")?;
    let (os, ol) = parse_range(old)?;
    let (ns, nl) = parse_range(new)?;
    Some((os, ol, ns, nl))
}

/// Parses a unified diff. Lines outside file sections (`diff --git`,
/// `index ...`, commentary) are ignored.
pub fn parse_patch(text: &str) -> Result<Patch> {
    let text = text.replace("\r\n", "\n");
    let lines: Vec<&str> = text.split_terminator('\n').collect();
    let mut files = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let Some(old) = lines[i].strip_prefix("--- ") else {
            i += 1;
            continue;
        };
        let Some(new) = lines.get(i + 1).and_then(|l| l.strip_prefix("+++ ")) else {
            return Err(Error::Parse(format!("line {}: `---` header without `+++`", i + 1)));
        };
        let old_path = header_path(old, "a/");
        let new_path = header_path(new, "b/");
        if old_path.is_none() && new_path.is_none() {
            return Err(Error::Parse(format!("line {}: both sides are {DEV_NULL}", i + 1)));
        }
        for p in old_path.iter().chain(&new_path) {
            crate::tree::check_path(p)?;
        }
        i += 2;

        let mut hunks = Vec::new();
        while let Some((os, ol, ns, nl)) = lines.get(i).and_then(|l| parse_hunk_header(l)) {
            let header_line = i + 1;
            i += 1;
            let (mut old_left, mut new_left) = (ol, nl);
            let mut body = Vec::new();
            while old_left > 0 || new_left > 0 {
                let Some(&line) = lines.get(i) else {
                    return Err(Error::Parse(format!("line {header_line}: hunk is shorter than its header")));
                };
                let (kind, text) = match line.chars().next() {
                    None => (LineKind::Context, ""),
                    Some(' ') => (LineKind::Context, &line[1..]),
                    Some('-') => (LineKind::Delete, &line[1..]),
                    Some('+') => (LineKind::Add, &line[1..]),
                    Some('\\') => {
                        i += 1;
                        continue;
                    }
                    Some(_) => {
                        return Err(Error::Parse(format!("line {}: unexpected hunk line `{line}`", i + 1)));
                    }
                };
                match kind {
                    LineKind::Context => {
                        if old_left == 0 || new_left == 0 {
                            return Err(Error::Parse(format!("line {header_line}: hunk is longer than its header")));
                        }
                        old_left -= 1;
                        new_left -= 1;
                    }
                    LineKind::Delete => {
                        old_left = old_left
                            .checked_sub(1)
                            .ok_or_else(|| Error::Parse(format!("line {header_line}: hunk is longer than its header")))?;
                    }
                    LineKind::Add => {
                        new_left = new_left
                            .checked_sub(1)
                            .ok_or_else(|| Error::Parse(format!("line {header_line}: hunk is longer than its header")))?;
                    }
                }
                body.push(HunkLine::new(kind, text));
                i += 1;
            }
            while lines.get(i).is_some_and(|l| l.starts_with('\\')) {
                i += 1;
            }
            hunks.push(Hunk { old_start: os, old_len: ol, new_start: ns, new_len: nl, lines: body });
        }
        if let Some(l) = lines.get(i) {
            if l.starts_with("@@") {
                return Err(Error::Parse(format!("line {}: malformed hunk header", i + 1)));
            }
            if !l.starts_with("--- ") && (l.starts_with('+') || l.starts_with('-') || l.starts_with(' ')) {
                return Err(Error::Parse(format!("line {}: hunk is longer than its header", i + 1)));
            }
        }
        files.push(FilePatch { old_path, new_path, hunks });
    }
    Ok(Patch { files })
}

// ---------------------------------------------------------------------------
// Application

/// Applies hunks to one file's content with exact matching.
pub fn apply_hunks(content: &str, hunks: &[Hunk]) -> Result<String> {
    let old = split_lines(content);
    let mut out: Vec<&str> = Vec::with_capacity(old.len());
    let mut cursor = 0usize;
    for (n, h) in hunks.iter().enumerate() {
        if !h.counts_match() {
            return Err(Error::Apply(format!("hunk {}: line counts disagree with header", n + 1)));
        }
        let idx = h.old_index()?;
        if idx < cursor {
            return Err(Error::Apply(format!("hunk {}: overlaps or precedes the previous hunk", n + 1)));
        }
        if idx + h.old_len > old.len() {
            return Err(Error::Apply(format!("hunk {}: extends past end of file", n + 1)));
        }
        let new_idx = out.len() + (idx - cursor);
        let expected_new_start = if h.new_len == 0 { new_idx } else { new_idx + 1 };
        if h.new_start != expected_new_start {
            return Err(Error::Apply(format!(
                "hunk {}: new start {} does not match computed {}",
                n + 1,
                h.new_start,
                expected_new_start
            )));
        }
        out.extend_from_slice(&old[cursor..idx]);
        let mut pos = idx;
        for line in &h.lines {
            match line.kind {
                LineKind::Context | LineKind::Delete => {
                    if old[pos] != line.text {
                        return Err(Error::Apply(format!(
                            "hunk {}: line {} is `{}`, patch expects `{}`",
                            n + 1,
                            pos + 1,
                            old[pos],
                            line.text
                        )));
                    }
                    if line.kind == LineKind::Context {
                        out.push(old[pos]);
                    }
                    pos += 1;
                }
                LineKind::Add => out.push(&line.text),
            }
        }
        cursor = pos;
    }
    out.extend_from_slice(&old[cursor..]);
    Ok(join_lines(&out))
}

/// Applies a patch to a tree, file entry by file entry.
pub fn apply_patch(tree: &SourceTree, patch: &Patch) -> Result<SourceTree> {
    let mut out = tree.clone();
    apply_patch_in_place(&mut out, patch)?;
    Ok(out)
}

pub fn apply_patch_in_place(tree: &mut SourceTree, patch: &Patch) -> Result<()> {
    for file in &patch.files {
        let ctx = |e: Error| match e {
            Error::Apply(msg) => Error::Apply(format!("{}: {msg}", file.path())),
            other => other,
        };
        match (&file.old_path, &file.new_path) {
            (None, Some(new)) => {
                if tree.contains(new) {
                    return Err(Error::Apply(format!("{new}: created file already exists")));
                }
                let content = apply_hunks("", &file.hunks).map_err(ctx)?;
                tree.insert(new.clone(), &content)?;
            }
            (Some(old), None) => {
                let current = tree
                    .get(old)
                    .ok_or_else(|| Error::Apply(format!("{old}: deleted file does not exist")))?;
                let rest = apply_hunks(current, &file.hunks).map_err(ctx)?;
                if !rest.is_empty() {
                    return Err(Error::Apply(format!("{old}: deletion leaves content behind")));
                }
                tree.remove(old);
            }
            (Some(old), Some(new)) => {
                let current = tree
                    .get(old)
                    .ok_or_else(|| Error::Apply(format!("{old}: file does not exist")))?;
                let content = apply_hunks(current, &file.hunks).map_err(ctx)?;
                if old != new {
                    if tree.contains(new) {
                        return Err(Error::Apply(format!("{new}: rename target already exists")));
                    }
                    tree.remove(old);
                }
                tree.insert(new.clone(), &content)?;
            }
            (None, None) => return Err(Error::Apply("file patch without paths".into())),
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Diffing

/// Line-level edit script between two line slices (Myers).
pub(crate) fn diff_ops(old: &[&str], new: &[&str]) -> Vec<DiffOp> {
    similar::capture_diff_slices(Algorithm::Myers, old, new)
}

/// Hunks turning `old` into `new` with `context` lines of context.
pub fn diff_text(old: &str, new: &str, context: usize) -> Vec<Hunk> {
    let old_lines = split_lines(old);
    let new_lines = split_lines(new);
    let ops = diff_ops(&old_lines, &new_lines);
    let mut hunks = Vec::new();
    // `new_index` of a leading delete op is not reliable, so the new-side
    // start is derived from the old side plus the running line delta.
    let mut delta: isize = 0;
    for group in similar::group_diff_ops(ops, context) {
        let Some(first) = group.first() else {
            continue;
        };
        let old_begin = first.old_range().start;
        let new_begin = (old_begin as isize + delta) as usize;
        let mut lines = Vec::new();
        for op in &group {
            match *op {
                DiffOp::Equal { old_index, len, .. } => {
                    lines.extend(old_lines[old_index..old_index + len].iter().map(|l| HunkLine::new(LineKind::Context, *l)));
                }
                DiffOp::Delete { old_index, old_len, .. } => {
                    lines.extend(old_lines[old_index..old_index + old_len].iter().map(|l| HunkLine::new(LineKind::Delete, *l)));
                }
                DiffOp::Insert { new_index, new_len, .. } => {
                    lines.extend(new_lines[new_index..new_index + new_len].iter().map(|l| HunkLine::new(LineKind::Add, *l)));
                }
                DiffOp::Replace { old_index, old_len, new_index, new_len } => {
                    lines.extend(old_lines[old_index..old_index + old_len].iter().map(|l| HunkLine::new(LineKind::Delete, *l)));
                    lines.extend(new_lines[new_index..new_index + new_len].iter().map(|l| HunkLine::new(LineKind::Add, *l)));
                }
            }
        }
        let mut h = Hunk::from_lines(0, 0, lines);
        delta += h.new_len as isize - h.old_len as isize;
        h.old_start = if h.old_len == 0 { old_begin } else { old_begin + 1 };
        h.new_start = if h.new_len == 0 { new_begin } else { new_begin + 1 };
        hunks.push(h);
    }
    hunks
}

/// File entry turning `old` into `new`; `None` when nothing changes.
pub fn diff_file(path: &str, old: Option<&str>, new: Option<&str>) -> Option<FilePatch> {
    match (old, new) {
        (None, None) => None,
        (Some(a), Some(b)) if a == b => None,
        (a, b) => Some(FilePatch {
            old_path: a.map(|_| path.to_owned()),
            new_path: b.map(|_| path.to_owned()),
            hunks: diff_text(a.unwrap_or(""), b.unwrap_or(""), CONTEXT_LINES),
        }),
    }
}

/// Patch turning `old` into `new`, restricted to `paths`.
pub fn diff_trees_on<'a>(old: &SourceTree, new: &SourceTree, paths: impl IntoIterator<Item = &'a str>) -> Patch {
    let paths: BTreeSet<&str> = paths.into_iter().collect();
    Patch {
        files: paths
            .into_iter()
            .filter_map(|p| diff_file(p, old.get(p), new.get(p)))
            .collect(),
    }
}

/// Patch turning `old` into `new`.
pub fn diff_trees(old: &SourceTree, new: &SourceTree) -> Patch {
    let paths: BTreeSet<&str> = old.paths().chain(new.paths()).collect();
    diff_trees_on(old, new, paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::tree_of;
    use proptest::prelude::*;

    #[test]
    fn renders_and_parses() {
        let old = tree_of([("a.c", "1\n2\n3\n"), ("gone.c", "x\n")]);
        let new = tree_of([("a.c", "1\n2b\n3\n"), ("new.c", "y\nz\n")]);
        let p = diff_trees(&old, &new);
        let text = p.to_string();
        assert_eq!(
            text,
            "--- a/a.c\n+++ b/a.c\n@@ -1,3 +1,3 @@\n 1\n-2\n+2b\n 3\n\
             --- a/gone.c\n+++ /dev/null\n@@ -1,1 +0,0 @@\n-x\n\
             --- /dev/null\n+++ b/new.c\n@@ -0,0 +1,2 @@\n+y\n+z\n"
        );
        assert_eq!(parse_patch(&text).unwrap(), p);
        assert_eq!(apply_patch(&old, &p).unwrap(), new);
    }

    #[test]
    fn parses_foreign_headers() {
        let text = "diff --git a/x b/x\nindex 1..2 100644\n--- a/x\t2020-01-01\n+++ b/x\n@@ -1 +1 @@\n-a\n+b\n\\ No newline at end of file\n";
        let p = parse_patch(text).unwrap();
        assert_eq!(p.files.len(), 1);
        assert_eq!(p.files[0].hunks[0].old_len, 1);
        let t = apply_patch(&tree_of([("x", "a\n")]), &p).unwrap();
        assert_eq!(t.get("x"), Some("b\n"));
    }

    #[test]
    fn rejects_short_hunk() {
        let text = "--- a/x\n+++ b/x\n@@ -1,2 +1,2 @@\n a\n";
        assert!(matches!(parse_patch(text), Err(Error::Parse(_))));
        let text = "--- a/x\n+++ b/x\n@@ -1,1 +1,1 @@\n a\n+b\n";
        assert!(matches!(parse_patch(text), Err(Error::Parse(_))));
    }

    #[test]
    fn exact_application_only() {
        let base = tree_of([("x", "a\nb\nc\nd\n")]);
        // Same hunk one line off: no offset search.
        let p = parse_patch("--- a/x\n+++ b/x\n@@ -2,1 +2,2 @@\n c\n+n\n").unwrap();
        assert!(matches!(apply_patch(&base, &p), Err(Error::Apply(_))));
        let p = parse_patch("--- a/x\n+++ b/x\n@@ -3,1 +3,2 @@\n c\n+n\n").unwrap();
        assert_eq!(apply_patch(&base, &p).unwrap().get("x"), Some("a\nb\nc\nn\nd\n"));
        // Zero-context insert at top.
        let p = parse_patch("--- a/x\n+++ b/x\n@@ -0,0 +1,1 @@\n+top\n").unwrap();
        assert_eq!(apply_patch(&base, &p).unwrap().get("x"), Some("top\na\nb\nc\nd\n"));
    }

    #[test]
    fn create_and_delete_checks() {
        let base = tree_of([("x", "a\n")]);
        let create = parse_patch("--- /dev/null\n+++ b/x\n@@ -0,0 +1,1 @@\n+a\n").unwrap();
        assert!(matches!(apply_patch(&base, &create), Err(Error::Apply(_))));
        let del = parse_patch("--- a/missing\n+++ /dev/null\n@@ -1,1 +0,0 @@\n-a\n").unwrap();
        assert!(matches!(apply_patch(&base, &del), Err(Error::Apply(_))));
        let empty = parse_patch("--- /dev/null\n+++ b/e\n").unwrap();
        assert_eq!(apply_patch(&base, &empty).unwrap().get("e"), Some(""));
    }

    fn lines_strategy() -> impl Strategy<Value = String> {
        prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "", "-x", "+y", " z"]), 0..20)
            .prop_map(|v| join_lines(&v))
    }

    proptest! {
        #[test]
        fn diff_then_apply_reproduces(old in lines_strategy(), new in lines_strategy()) {
            let a = tree_of([("f", old.as_str())]);
            let b = tree_of([("f", new.as_str())]);
            let p = diff_trees(&a, &b);
            prop_assert_eq!(&apply_patch(&a, &p).unwrap(), &b);
            prop_assert_eq!(parse_patch(&p.to_string()).unwrap(), p);
        }
    }
}
