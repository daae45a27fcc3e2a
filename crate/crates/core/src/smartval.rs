//! Change-based test selection over a file → feature → test graph.

use std::collections::{BTreeMap, BTreeSet};

use globset::GlobSet;
use serde::Serialize;

use crate::model::{compile_globset, Manifest};
use crate::patch::Patch;
use crate::tree::SourceTree;

#[derive(Debug, Clone)]
pub struct TraceGraph {
    pub file_to_features: BTreeMap<String, BTreeSet<String>>,
    pub feature_to_tests: BTreeMap<String, BTreeSet<String>>,
    pub test_costs: BTreeMap<String, f64>,
    /// Feature globs, for paths the tree does not contain (created files).
    feature_globs: Vec<(String, GlobSet)>,
}

pub fn build_trace_graph(manifest: &Manifest, tree: &SourceTree) -> TraceGraph {
    let file_to_features = tree
        .paths()
        .map(|p| (p.to_owned(), manifest.features_of(p)))
        .collect();
    let mut feature_to_tests: BTreeMap<String, BTreeSet<String>> =
        manifest.features().iter().map(|f| (f.id.clone(), BTreeSet::new())).collect();
    for t in manifest.tests() {
        for f in &t.features {
            feature_to_tests.entry(f.clone()).or_default().insert(t.id.clone());
        }
    }
    let test_costs = manifest.tests().iter().map(|t| (t.id.clone(), t.cost_sec)).collect();
    let feature_globs = manifest
        .features()
        .iter()
        .map(|f| (f.id.clone(), compile_globset(&f.globs).expect("validated manifest globs")))
        .collect();
    TraceGraph { file_to_features, feature_to_tests, test_costs, feature_globs }
}

impl TraceGraph {
    /// Features of `path`; paths outside the graph's tree are matched by glob.
    pub fn features_of(&self, path: &str) -> BTreeSet<String> {
        match self.file_to_features.get(path) {
            Some(f) => f.clone(),
            None => self
                .feature_globs
                .iter()
                .filter(|(_, g)| g.is_match(path))
                .map(|(id, _)| id.clone())
                .collect(),
        }
    }

    pub fn tests_of(&self, feature: &str) -> impl Iterator<Item = &String> {
        self.feature_to_tests.get(feature).into_iter().flatten()
    }

    pub fn full_cost(&self) -> f64 {
        self.test_costs.values().sum()
    }

    pub fn cost_of<'a>(&self, tests: impl IntoIterator<Item = &'a String>) -> f64 {
        tests.into_iter().map(|t| self.test_costs.get(t).copied().unwrap_or(0.0)).sum()
    }
}

pub fn impacted_features(graph: &TraceGraph, diff: &Patch) -> BTreeSet<String> {
    diff.touched_paths().iter().flat_map(|p| graph.features_of(p)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionReason {
    Targeted,
    FullFallback,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestSelection {
    pub tests: BTreeSet<String>,
    pub total_cost_sec: f64,
    pub reason: SelectionReason,
}

/// Tests covering every feature the diff touches. Any touched path without a
/// feature mapping selects the whole suite.
pub fn select_tests(graph: &TraceGraph, diff: &Patch) -> TestSelection {
    let touched = diff.touched_paths();
    if touched.is_empty() {
        return TestSelection { tests: BTreeSet::new(), total_cost_sec: 0.0, reason: SelectionReason::Empty };
    }
    let mut features = BTreeSet::new();
    for path in &touched {
        let f = graph.features_of(path);
        if f.is_empty() {
            let tests: BTreeSet<String> = graph.test_costs.keys().cloned().collect();
            return TestSelection { total_cost_sec: graph.cost_of(&tests), tests, reason: SelectionReason::FullFallback };
        }
        features.extend(f);
    }
    let tests: BTreeSet<String> = features.iter().flat_map(|f| graph.tests_of(f)).cloned().collect();
    TestSelection { total_cost_sec: graph.cost_of(&tests), tests, reason: SelectionReason::Targeted }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SavingsReport {
    pub selected_cost_sec: f64,
    pub full_cost_sec: f64,
    /// `selected / full`, 0 when the full suite costs nothing.
    pub ratio: f64,
}

pub fn selection_report(selection: &TestSelection, graph: &TraceGraph) -> SavingsReport {
    let full = graph.full_cost();
    let selected = selection.total_cost_sec;
    SavingsReport {
        selected_cost_sec: selected,
        full_cost_sec: full,
        ratio: if full > 0.0 { selected / full } else { 0.0 },
    }
}

/// Shape printed by `dcc select`.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionOutput {
    pub tests: Vec<String>,
    pub reason: SelectionReason,
    pub selected_cost_sec: f64,
    pub full_cost_sec: f64,
    pub ratio: f64,
}

impl SelectionOutput {
    pub fn new(selection: &TestSelection, graph: &TraceGraph) -> Self {
        let report = selection_report(selection, graph);
        SelectionOutput {
            tests: selection.tests.iter().cloned().collect(),
            reason: selection.reason,
            selected_cost_sec: report.selected_cost_sec,
            full_cost_sec: report.full_cost_sec,
            ratio: report.ratio,
        }
    }
}
