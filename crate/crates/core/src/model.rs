//! Manifest schema, tag resolution and tree validation.
//!
//! The manifest (`dcc.json` at the tree root) declares the marker syntax, the
//! tag-axis vocabularies, the ordered path rules, and the module / target /
//! feature / test inventory. Every other module in this crate works from a
//! validated [`Manifest`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use globset::{Glob, GlobBuilder, GlobMatcher, GlobSet, GlobSetBuilder};
use serde::{Deserialize, Serialize};

use crate::dualsync::find_regions;
use crate::error::{Error, MarkerError, Result};
use crate::tree::SourceTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Open,
    Internal,
    Mixed,
}

impl fmt::Display for Visibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Visibility::Open => "open",
            Visibility::Internal => "internal",
            Visibility::Mixed => "mixed",
        })
    }
}

/// Tag axes other than visibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    Os,
    Soc,
    Ip,
    Feature,
    Usage,
}

impl Axis {
    pub const ALL: [Axis; 5] = [Axis::Os, Axis::Soc, Axis::Ip, Axis::Feature, Axis::Usage];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Os => "os",
            Axis::Soc => "soc",
            Axis::Ip => "ip",
            Axis::Feature => "feature",
            Axis::Usage => "usage",
        }
    }
}

/// Resolved tags of one file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagAxes {
    pub visibility: Visibility,
    pub os: BTreeSet<String>,
    pub soc: BTreeSet<String>,
    pub ip: BTreeSet<String>,
    pub feature: BTreeSet<String>,
    pub usage: BTreeSet<String>,
}

impl TagAxes {
    /// Fail-closed tags for files no rule matches.
    pub fn unmatched() -> Self {
        Self::with_visibility(Visibility::Internal)
    }

    pub fn with_visibility(visibility: Visibility) -> Self {
        TagAxes {
            visibility,
            os: BTreeSet::new(),
            soc: BTreeSet::new(),
            ip: BTreeSet::new(),
            feature: BTreeSet::new(),
            usage: BTreeSet::new(),
        }
    }

    pub fn axis(&self, axis: Axis) -> &BTreeSet<String> {
        match axis {
            Axis::Os => &self.os,
            Axis::Soc => &self.soc,
            Axis::Ip => &self.ip,
            Axis::Feature => &self.feature,
            Axis::Usage => &self.usage,
        }
    }
}

// ---------------------------------------------------------------------------
// Document form (what `dcc.json` contains)

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkerDoc {
    pub begin: String,
    pub end: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxesDoc {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub os: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub soc: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ip: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub feature: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub usage: Vec<String>,
}

impl AxesDoc {
    pub fn get(&self, axis: Axis) -> &Vec<String> {
        match axis {
            Axis::Os => &self.os,
            Axis::Soc => &self.soc,
            Axis::Ip => &self.ip,
            Axis::Feature => &self.feature,
            Axis::Usage => &self.usage,
        }
    }

    pub fn get_mut(&mut self, axis: Axis) -> &mut Vec<String> {
        match axis {
            Axis::Os => &mut self.os,
            Axis::Soc => &mut self.soc,
            Axis::Ip => &mut self.ip,
            Axis::Feature => &mut self.feature,
            Axis::Usage => &mut self.usage,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleDoc {
    pub pattern: String,
    pub visibility: Visibility,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub os: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub soc: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ip: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub feature: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub usage: Vec<String>,
}

impl RuleDoc {
    pub fn new(pattern: impl Into<String>, visibility: Visibility) -> Self {
        RuleDoc {
            pattern: pattern.into(),
            visibility,
            os: Vec::new(),
            soc: Vec::new(),
            ip: Vec::new(),
            feature: Vec::new(),
            usage: Vec::new(),
        }
    }

    pub fn axis(&self, axis: Axis) -> &Vec<String> {
        match axis {
            Axis::Os => &self.os,
            Axis::Soc => &self.soc,
            Axis::Ip => &self.ip,
            Axis::Feature => &self.feature,
            Axis::Usage => &self.usage,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleDef {
    pub id: String,
    pub globs: Vec<String>,
    #[serde(default)]
    pub deps: Vec<String>,
    pub cost_sec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetDef {
    pub id: String,
    pub modules: Vec<String>,
    pub link_cost_sec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureDef {
    pub id: String,
    pub globs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestDef {
    pub id: String,
    pub features: Vec<String>,
    pub cost_sec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestDoc {
    pub marker: MarkerDoc,
    #[serde(default)]
    pub axes: AxesDoc,
    pub rules: Vec<RuleDoc>,
    #[serde(default)]
    pub modules: Vec<ModuleDef>,
    #[serde(default)]
    pub targets: Vec<TargetDef>,
    #[serde(default)]
    pub features: Vec<FeatureDef>,
    #[serde(default)]
    pub tests: Vec<TestDef>,
}

impl ManifestDoc {
    /// Canonical rendering: pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

// ---------------------------------------------------------------------------
// Validated form

/// Compiles a glob: `**` crosses separators, `*` stays within a segment.
pub fn compile_glob(pattern: &str) -> Result<GlobMatcher> {
    Ok(build_glob(pattern)?.compile_matcher())
}

fn build_glob(pattern: &str) -> Result<Glob> {
    GlobBuilder::new(pattern)
        .literal_separator(true)
        .build()
        .map_err(|e| Error::Schema(format!("bad glob `{pattern}`: {e}")))
}

pub(crate) fn compile_globset(patterns: &[String]) -> Result<GlobSet> {
    let mut builder = GlobSetBuilder::new();
    for p in patterns {
        builder.add(build_glob(p)?);
    }
    builder
        .build()
        .map_err(|e| Error::Schema(format!("bad glob set: {e}")))
}

#[derive(Debug, Clone)]
pub struct PathRule {
    pub pattern: String,
    pub tags: TagAxes,
    /// Position in the manifest; lower wins.
    pub priority: usize,
    matcher: GlobMatcher,
}

impl PathRule {
    pub fn matches(&self, path: &str) -> bool {
        self.matcher.is_match(path)
    }
}

#[derive(Debug, Clone)]
pub struct Manifest {
    doc: ManifestDoc,
    source: String,
    rules: Vec<PathRule>,
    module_globs: Vec<GlobSet>,
    feature_globs: Vec<GlobSet>,
}

/// Parses and validates a manifest document.
pub fn load_manifest(text: &str) -> Result<Manifest> {
    let doc: ManifestDoc = serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => Error::Schema(e.to_string()),
        _ => Error::Parse(e.to_string()),
    })?;
    Manifest::from_doc_with_source(doc, text.to_owned())
}

fn unique<'a>(kind: &str, ids: impl Iterator<Item = &'a str>) -> Result<BTreeSet<&'a str>> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if id.is_empty() {
            return Err(Error::Schema(format!("empty {kind} id")));
        }
        if !seen.insert(id) {
            return Err(Error::Schema(format!("duplicate {kind} id `{id}`")));
        }
    }
    Ok(seen)
}

fn check_cost(what: &str, cost: f64) -> Result<()> {
    if !(cost.is_finite() && cost >= 0.0) {
        return Err(Error::Schema(format!("{what}: cost must be a nonnegative number, got {cost}")));
    }
    Ok(())
}

impl Manifest {
    pub fn from_doc(doc: ManifestDoc) -> Result<Manifest> {
        let source = doc.to_json();
        Self::from_doc_with_source(doc, source)
    }

    fn from_doc_with_source(doc: ManifestDoc, source: String) -> Result<Manifest> {
        if doc.marker.begin.is_empty() || doc.marker.end.is_empty() {
            return Err(Error::Schema("marker strings must be non-empty".into()));
        }
        if doc.marker.begin.contains(&doc.marker.end) || doc.marker.end.contains(&doc.marker.begin) {
            return Err(Error::Schema("marker strings must not contain each other".into()));
        }

        let mut vocab: BTreeMap<Axis, BTreeSet<&str>> = BTreeMap::new();
        for axis in Axis::ALL {
            vocab.insert(axis, unique(axis.name(), doc.axes.get(axis).iter().map(String::as_str))?);
        }

        let mut rules = Vec::with_capacity(doc.rules.len());
        for (priority, r) in doc.rules.iter().enumerate() {
            let mut tags = TagAxes::with_visibility(r.visibility);
            for axis in Axis::ALL {
                for id in r.axis(axis) {
                    if !vocab[&axis].contains(id.as_str()) {
                        return Err(Error::Reference(format!(
                            "rule `{}` uses undeclared {} `{id}`",
                            r.pattern,
                            axis.name()
                        )));
                    }
                }
                let set: BTreeSet<String> = r.axis(axis).iter().cloned().collect();
                match axis {
                    Axis::Os => tags.os = set,
                    Axis::Soc => tags.soc = set,
                    Axis::Ip => tags.ip = set,
                    Axis::Feature => tags.feature = set,
                    Axis::Usage => tags.usage = set,
                }
            }
            rules.push(PathRule {
                pattern: r.pattern.clone(),
                tags,
                priority,
                matcher: compile_glob(&r.pattern)?,
            });
        }

        let module_ids = unique("module", doc.modules.iter().map(|m| m.id.as_str()))?;
        for m in &doc.modules {
            check_cost(&format!("module `{}`", m.id), m.cost_sec)?;
            for d in &m.deps {
                if !module_ids.contains(d.as_str()) {
                    return Err(Error::Reference(format!("module `{}` depends on undeclared `{d}`", m.id)));
                }
            }
        }
        check_module_cycles(&doc.modules)?;

        unique("target", doc.targets.iter().map(|t| t.id.as_str()))?;
        for t in &doc.targets {
            check_cost(&format!("target `{}`", t.id), t.link_cost_sec)?;
            for m in &t.modules {
                if !module_ids.contains(m.as_str()) {
                    return Err(Error::Reference(format!("target `{}` references undeclared module `{m}`", t.id)));
                }
            }
        }

        let feature_ids = unique("feature", doc.features.iter().map(|f| f.id.as_str()))?;
        for f in &doc.features {
            if f.globs.is_empty() {
                return Err(Error::Schema(format!("feature `{}` has no globs", f.id)));
            }
        }

        unique("test", doc.tests.iter().map(|t| t.id.as_str()))?;
        for t in &doc.tests {
            check_cost(&format!("test `{}`", t.id), t.cost_sec)?;
            if t.features.is_empty() {
                return Err(Error::Schema(format!("test `{}` covers no features", t.id)));
            }
            for f in &t.features {
                if !feature_ids.contains(f.as_str()) {
                    return Err(Error::Reference(format!("test `{}` references undeclared feature `{f}`", t.id)));
                }
            }
        }

        let module_globs = doc
            .modules
            .iter()
            .map(|m| compile_globset(&m.globs))
            .collect::<Result<Vec<_>>>()?;
        let feature_globs = doc
            .features
            .iter()
            .map(|f| compile_globset(&f.globs))
            .collect::<Result<Vec<_>>>()?;

        Ok(Manifest {
            doc,
            source,
            rules,
            module_globs,
            feature_globs,
        })
    }

    pub fn doc(&self) -> &ManifestDoc {
        &self.doc
    }

    /// The document text this manifest was loaded from.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn marker_begin(&self) -> &str {
        &self.doc.marker.begin
    }

    pub fn marker_end(&self) -> &str {
        &self.doc.marker.end
    }

    pub fn rules(&self) -> &[PathRule] {
        &self.rules
    }

    pub fn modules(&self) -> &[ModuleDef] {
        &self.doc.modules
    }

    pub fn targets(&self) -> &[TargetDef] {
        &self.doc.targets
    }

    pub fn features(&self) -> &[FeatureDef] {
        &self.doc.features
    }

    pub fn tests(&self) -> &[TestDef] {
        &self.doc.tests
    }

    pub fn vocabulary(&self, axis: Axis) -> &[String] {
        self.doc.axes.get(axis)
    }

    /// First matching rule, if any.
    pub fn rule_for(&self, path: &str) -> Option<&PathRule> {
        self.rules.iter().find(|r| r.matches(path))
    }

    /// Tags of the first matching rule, or the fail-closed default.
    pub fn tags_of(&self, path: &str) -> TagAxes {
        self.rule_for(path).map(|r| r.tags.clone()).unwrap_or_else(TagAxes::unmatched)
    }

    pub fn visibility_of(&self, path: &str) -> Visibility {
        self.rule_for(path).map(|r| r.tags.visibility).unwrap_or(Visibility::Internal)
    }

    /// Index of the earliest-declared module whose globs match `path`.
    pub fn owner_index(&self, path: &str) -> Option<usize> {
        self.module_globs.iter().position(|g| g.is_match(path))
    }

    pub fn owner_of(&self, path: &str) -> Option<&ModuleDef> {
        self.owner_index(path).map(|i| &self.doc.modules[i])
    }

    /// Ids of every feature whose globs match `path`.
    pub fn features_of(&self, path: &str) -> BTreeSet<String> {
        self.feature_globs
            .iter()
            .zip(&self.doc.features)
            .filter(|(g, _)| g.is_match(path))
            .map(|(_, f)| f.id.clone())
            .collect()
    }
}

/// Module-free convenience: `manifest.tags_of(path)`.
pub fn tags_of(manifest: &Manifest, path: &str) -> TagAxes {
    manifest.tags_of(path)
}

fn check_module_cycles(modules: &[ModuleDef]) -> Result<()> {
    let index: BTreeMap<&str, usize> = modules.iter().enumerate().map(|(i, m)| (m.id.as_str(), i)).collect();
    let deps: Vec<Vec<usize>> = modules
        .iter()
        .map(|m| m.deps.iter().map(|d| index[d.as_str()]).collect())
        .collect();
    find_cycle(&deps).map_or(Ok(()), |cycle| {
        Err(Error::Cycle(cycle.into_iter().map(|i| modules[i].id.clone()).collect()))
    })
}

/// Returns one cycle (first node repeated at the end) if the graph has any.
pub(crate) fn find_cycle(deps: &[Vec<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut mark = vec![Mark::New; deps.len()];
    for start in 0..deps.len() {
        if mark[start] != Mark::New {
            continue;
        }
        // Iterative DFS; `stack` holds (node, next edge index).
        let mut stack = vec![(start, 0usize)];
        mark[start] = Mark::Active;
        while let Some(&mut (node, ref mut edge)) = stack.last_mut() {
            if let Some(&next) = deps[node].get(*edge) {
                *edge += 1;
                match mark[next] {
                    Mark::New => {
                        mark[next] = Mark::Active;
                        stack.push((next, 0));
                    }
                    Mark::Active => {
                        let pos = stack.iter().position(|&(n, _)| n == next).expect("active node on stack");
                        let mut cycle: Vec<usize> = stack[pos..].iter().map(|&(n, _)| n).collect();
                        cycle.push(next);
                        return Some(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[node] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Tree validation

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FindingKind {
    UnmatchedByRule,
    UnbalancedMarker { line: usize },
    NestedMarker { line: usize },
    MarkerInOpenFile { line: usize },
    NoOwningModule,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Finding {
    pub path: String,
    #[serde(flatten)]
    pub kind: FindingKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    /// True when no finding would make open-subset derivation fail.
    pub fn derivable(&self) -> bool {
        !self.findings.iter().any(|f| {
            matches!(
                f.kind,
                FindingKind::UnbalancedMarker { .. } | FindingKind::NestedMarker { .. } | FindingKind::MarkerInOpenFile { .. }
            )
        })
    }
}

/// Lists rule, marker and ownership problems per file. Never fails.
pub fn validate_tree(manifest: &Manifest, tree: &SourceTree) -> ValidationReport {
    let begin = manifest.marker_begin();
    let end = manifest.marker_end();
    let mut findings = Vec::new();
    for (path, content) in tree.iter() {
        let push = |findings: &mut Vec<Finding>, kind| findings.push(Finding { path: path.to_owned(), kind });
        match manifest.rule_for(path) {
            None => push(&mut findings, FindingKind::UnmatchedByRule),
            Some(rule) => match rule.tags.visibility {
                Visibility::Open => {
                    if let Some(line) = first_marker_line(content, begin, end) {
                        push(&mut findings, FindingKind::MarkerInOpenFile { line });
                    }
                }
                Visibility::Mixed => match find_regions(content, begin, end) {
                    Ok(_) => {}
                    Err(MarkerError::Unbalanced { line, .. }) => push(&mut findings, FindingKind::UnbalancedMarker { line }),
                    Err(MarkerError::Nested { line, .. }) => push(&mut findings, FindingKind::NestedMarker { line }),
                    Err(MarkerError::InOpenFile { line, .. }) => push(&mut findings, FindingKind::MarkerInOpenFile { line }),
                },
                Visibility::Internal => {}
            },
        }
        if manifest.owner_index(path).is_none() {
            push(&mut findings, FindingKind::NoOwningModule);
        }
    }
    ValidationReport { findings }
}

/// 1-based line of the first line containing either marker.
pub(crate) fn first_marker_line(content: &str, begin: &str, end: &str) -> Option<usize> {
    content
        .split_terminator('\n')
        .position(|l| l.contains(begin) || l.contains(end))
        .map(|i| i + 1)
}
