//! Per-commit CI pipeline: forward translation, test selection, build
//! invalidation and scheduling, folded into one feedback-loop estimate.

use serde::Serialize;

use crate::buildsched::{invalidate_detailed, plan_tasks, schedule, Cache};
use crate::dualsync::forward_patch;
use crate::error::{Result, Stage};
use crate::model::{Manifest, Visibility};
use crate::patch::{apply_patch, Patch};
use crate::smartval::{build_trace_graph, select_tests, SelectionOutput};
use crate::tree::SourceTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PatchSummary {
    pub files: usize,
    pub hunks: usize,
    pub added: usize,
    pub deleted: usize,
}

impl PatchSummary {
    pub fn of(patch: &Patch) -> Self {
        let (added, deleted) = patch.line_stats();
        PatchSummary { files: patch.files.len(), hunks: patch.hunk_count(), added, deleted }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    pub workers: usize,
    /// Translate the commit to the open subset as the first stage.
    pub open_sync: bool,
    pub commit_id: Option<String>,
}

impl PipelineOptions {
    /// Open sync is on whenever some rule publishes files.
    pub fn for_manifest(manifest: &Manifest, workers: usize) -> Self {
        let open_sync = manifest.rules().iter().any(|r| r.tags.visibility != Visibility::Internal);
        PipelineOptions { workers, open_sync, commit_id: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    pub commit_id: Option<String>,
    pub forward_patch: Option<PatchSummary>,
    pub selection: SelectionOutput,
    pub dirty_tasks: Vec<String>,
    /// An unowned file forced a monolithic rebuild.
    pub build_fallback: bool,
    pub workers: usize,
    pub build_makespan_sec: f64,
    pub validation_sec: f64,
    pub feedback_loop_sec: f64,
    pub baseline_loop_sec: f64,
    /// `feedback / baseline`, 0 when the baseline is 0.
    pub ratio: f64,
}

/// Runs every stage for one commit. `cache` holds artifacts built before it.
pub fn run_pipeline(
    tree: &SourceTree,
    manifest: &Manifest,
    diff: &Patch,
    cache: &Cache,
    options: &PipelineOptions,
) -> Result<PipelineReport> {
    let forward = if options.open_sync {
        let fwd = forward_patch(diff, tree, manifest).map_err(|e| e.at(Stage::Forward))?;
        Some(PatchSummary::of(&fwd))
    } else {
        None
    };

    let trace = build_trace_graph(manifest, tree);
    let selection = select_tests(&trace, diff);
    let selection = SelectionOutput::new(&selection, &trace);

    let after = apply_patch(tree, diff).map_err(|e| e.at(Stage::Invalidate))?;
    let tasks = plan_tasks(manifest, &after).map_err(|e| e.at(Stage::Invalidate))?;
    let inval = invalidate_detailed(&tasks, diff, cache);
    let monolithic = tasks.total_cost();
    let build_makespan_sec = if inval.fallback {
        monolithic
    } else {
        schedule(&tasks, &inval.dirty, options.workers).makespan_sec
    };

    let validation_sec = selection.selected_cost_sec;
    let feedback_loop_sec = build_makespan_sec + validation_sec;
    let baseline_loop_sec = monolithic + selection.full_cost_sec;
    Ok(PipelineReport {
        commit_id: options.commit_id.clone(),
        forward_patch: forward,
        selection,
        dirty_tasks: inval.dirty.into_iter().collect(),
        build_fallback: inval.fallback,
        workers: options.workers,
        build_makespan_sec,
        validation_sec,
        feedback_loop_sec,
        baseline_loop_sec,
        ratio: if baseline_loop_sec > 0.0 { feedback_loop_sec / baseline_loop_sec } else { 0.0 },
    })
}
