//! Modular build planning, content-hash invalidation and list scheduling.
//!
//! Every module becomes one build task and every target one `link:<target>`
//! task. Input hashes are SHA-256 digests computed bottom-up:
//!
//! ```text
//! H(task) = sha256( "task\0" id "\0"
//!                   { "file\0" path "\0" sha256(content) }  for owned files, sorted by path
//!                   { "dep\0"  dep  "\0" H(dep) }           for deps, sorted by id )
//! ```
//!
//! Scheduling runs on logical time: a dirty task occupies a worker for its
//! declared cost, a clean (cached) task completes the moment it becomes ready.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use globset::GlobSet;
use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{compile_globset, find_cycle, Manifest};
use crate::patch::Patch;
use crate::tree::SourceTree;

pub const LINK_PREFIX: &str = "link:";

/// `(id, deps, cost, owned files with content digests)`.
type TaskSpec = (String, BTreeSet<String>, f64, Vec<(String, [u8; 32])>);

#[derive(Debug, Clone, PartialEq)]
pub struct BuildTask {
    pub id: String,
    pub deps: BTreeSet<String>,
    pub cost_sec: f64,
    pub input_hash: [u8; 32],
    /// Files owned by the task (empty for link tasks).
    pub files: Vec<String>,
}

impl BuildTask {
    pub fn hash_hex(&self) -> String {
        hex::encode(self.input_hash)
    }
}

#[derive(Debug, Clone)]
pub struct TaskGraph {
    pub tasks: BTreeMap<String, BuildTask>,
    /// Topological order, lexicographic among independent tasks.
    pub topo: Vec<String>,
    /// Reverse edges: task → tasks depending on it.
    pub dependents: BTreeMap<String, BTreeSet<String>>,
    /// Module globs that matched no file.
    pub warnings: Vec<String>,
    owners: Vec<(String, GlobSet)>,
}

fn file_digest(content: &str) -> [u8; 32] {
    Sha256::digest(content.as_bytes()).into()
}

fn task_hash(id: &str, files: &[(String, [u8; 32])], deps: &[(&str, [u8; 32])]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"task\0");
    h.update(id.as_bytes());
    h.update(b"\0");
    for (path, digest) in files {
        h.update(b"file\0");
        h.update(path.as_bytes());
        h.update(b"\0");
        h.update(digest);
    }
    for (dep, digest) in deps {
        h.update(b"dep\0");
        h.update(dep.as_bytes());
        h.update(b"\0");
        h.update(digest);
    }
    h.finalize().into()
}

/// One task per module plus one link task per target.
pub fn plan_tasks(manifest: &Manifest, tree: &SourceTree) -> Result<TaskGraph> {
    let mut owned: Vec<Vec<(String, [u8; 32])>> = vec![Vec::new(); manifest.modules().len()];
    for (path, content) in tree.iter() {
        if let Some(i) = manifest.owner_index(path) {
            owned[i].push((path.to_owned(), file_digest(content)));
        }
    }

    let mut specs: Vec<TaskSpec> = Vec::new();
    let mut warnings = Vec::new();
    for (m, files) in manifest.modules().iter().zip(owned) {
        if files.is_empty() {
            warnings.push(format!("module `{}`: globs match no file", m.id));
        }
        specs.push((m.id.clone(), m.deps.iter().cloned().collect(), m.cost_sec, files));
    }
    for t in manifest.targets() {
        specs.push((format!("{LINK_PREFIX}{}", t.id), t.modules.iter().cloned().collect(), t.link_cost_sec, Vec::new()));
    }

    let owners = manifest
        .modules()
        .iter()
        .map(|m| Ok((m.id.clone(), compile_globset(&m.globs)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut graph = TaskGraph::build(specs, owners)?;
    graph.warnings = warnings;
    Ok(graph)
}

impl TaskGraph {
    fn build(specs: Vec<TaskSpec>, owners: Vec<(String, GlobSet)>) -> Result<TaskGraph> {
        let index: BTreeMap<&str, usize> = specs.iter().enumerate().map(|(i, s)| (s.0.as_str(), i)).collect();
        let mut adj = Vec::with_capacity(specs.len());
        for (id, deps, _, _) in &specs {
            let mut edges = Vec::new();
            for d in deps {
                let j = *index
                    .get(d.as_str())
                    .ok_or_else(|| Error::Reference(format!("task `{id}` depends on unknown `{d}`")))?;
                edges.push(j);
            }
            adj.push(edges);
        }
        if let Some(cycle) = find_cycle(&adj) {
            return Err(Error::Cycle(cycle.into_iter().map(|i| specs[i].0.clone()).collect()));
        }

        let mut dependents: BTreeMap<String, BTreeSet<String>> = specs.iter().map(|s| (s.0.clone(), BTreeSet::new())).collect();
        for (id, deps, _, _) in &specs {
            for d in deps {
                dependents.get_mut(d).expect("known dep").insert(id.clone());
            }
        }

        // Kahn's algorithm, smallest id first.
        let mut indegree: BTreeMap<&str, usize> = specs.iter().map(|s| (s.0.as_str(), s.1.len())).collect();
        let mut ready: BTreeSet<&str> = indegree.iter().filter(|(_, &n)| n == 0).map(|(id, _)| *id).collect();
        let mut topo = Vec::with_capacity(specs.len());
        while let Some(id) = ready.pop_first() {
            topo.push(id.to_owned());
            for dep in &dependents[id] {
                let n = indegree.get_mut(dep.as_str()).expect("known task");
                *n -= 1;
                if *n == 0 {
                    ready.insert(dep.as_str());
                }
            }
        }

        let mut specs_by_id: BTreeMap<String, _> = specs.into_iter().map(|s| (s.0.clone(), s)).collect();
        let mut tasks: BTreeMap<String, BuildTask> = BTreeMap::new();
        for id in &topo {
            let (id, deps, cost, mut files) = specs_by_id.remove(id).expect("task in topo order");
            files.sort();
            let dep_hashes: Vec<(&str, [u8; 32])> = deps.iter().map(|d| (d.as_str(), tasks[d].input_hash)).collect();
            let input_hash = task_hash(&id, &files, &dep_hashes);
            tasks.insert(
                id.clone(),
                BuildTask { id, deps, cost_sec: cost, input_hash, files: files.into_iter().map(|(p, _)| p).collect() },
            );
        }
        Ok(TaskGraph { tasks, topo, dependents, warnings: Vec::new(), owners })
    }

    /// Graph from explicit `(id, deps, cost)` triples, without files.
    pub fn from_costs<'a>(tasks: impl IntoIterator<Item = (&'a str, &'a [&'a str], f64)>) -> Result<TaskGraph> {
        let specs = tasks
            .into_iter()
            .map(|(id, deps, cost)| (id.to_owned(), deps.iter().map(|d| d.to_string()).collect(), cost, Vec::new()))
            .collect();
        TaskGraph::build(specs, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn all_ids(&self) -> BTreeSet<String> {
        self.tasks.keys().cloned().collect()
    }

    /// Id of the task owning `path` (earliest-declared matching module).
    pub fn owner_of(&self, path: &str) -> Option<&str> {
        self.owners.iter().find(|(_, g)| g.is_match(path)).map(|(id, _)| id.as_str())
    }

    pub fn total_cost(&self) -> f64 {
        self.tasks.values().map(|t| t.cost_sec).sum()
    }

    pub fn cost_of<'a>(&self, ids: impl IntoIterator<Item = &'a String>) -> f64 {
        ids.into_iter().map(|id| self.tasks[id].cost_sec).sum()
    }

    /// `seeds` plus everything that transitively depends on them.
    pub fn dependents_closure(&self, seeds: impl IntoIterator<Item = String>) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<String> = seeds.into_iter().collect();
        while let Some(id) = stack.pop() {
            if out.insert(id.clone()) {
                stack.extend(self.dependents[&id].iter().cloned());
            }
        }
        out
    }

    /// Longest path to an exit, counting only dirty task costs.
    pub fn bottom_levels(&self, dirty: &BTreeSet<String>) -> BTreeMap<String, f64> {
        let mut level: BTreeMap<String, f64> = BTreeMap::new();
        for id in self.topo.iter().rev() {
            let own = if dirty.contains(id) { self.tasks[id].cost_sec } else { 0.0 };
            let below = self.dependents[id].iter().map(|d| level[d]).fold(0.0, f64::max);
            level.insert(id.clone(), own + below);
        }
        level
    }
}

// ---------------------------------------------------------------------------
// Cache

/// Map from input hash (hex) to an opaque artifact token.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cache {
    pub entries: BTreeMap<String, String>,
}

impl Cache {
    pub fn contains(&self, hash: &[u8; 32]) -> bool {
        self.entries.contains_key(&hex::encode(hash))
    }

    /// Records an artifact for every task in `ids`.
    pub fn record<'a>(&mut self, graph: &TaskGraph, ids: impl IntoIterator<Item = &'a String>) {
        for id in ids {
            let task = &graph.tasks[id];
            let hex = task.hash_hex();
            let token = format!("{}@{}", task.id, &hex[..12]);
            self.entries.insert(hex, token);
        }
    }

    pub fn record_all(&mut self, graph: &TaskGraph) {
        let ids = graph.all_ids();
        self.record(graph, &ids);
    }

    pub fn from_json(text: &str) -> Result<Cache> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("cache: {e}")))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("cache serializes");
        s.push('\n');
        s
    }
}

/// Tasks to rebuild after `diff`. `graph` must be planned on the tree after
/// the change; tasks whose input hash is already cached are dropped. A touched
/// file that no module owns dirties every task, bypassing the cache.
pub fn invalidate(graph: &TaskGraph, diff: &Patch, cache: &Cache) -> BTreeSet<String> {
    invalidate_detailed(graph, diff, cache).dirty
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Invalidation {
    pub dirty: BTreeSet<String>,
    /// Set when an unowned file forced a full rebuild.
    pub fallback: bool,
}

pub fn invalidate_detailed(graph: &TaskGraph, diff: &Patch, cache: &Cache) -> Invalidation {
    let mut seeds = BTreeSet::new();
    for path in &diff.touched_paths() {
        match graph.owner_of(path) {
            Some(owner) => {
                seeds.insert(owner.to_owned());
            }
            None => return Invalidation { dirty: graph.all_ids(), fallback: true },
        }
    }
    let dirty = graph
        .dependents_closure(seeds)
        .into_iter()
        .filter(|id| !cache.contains(&graph.tasks[id].input_hash))
        .collect();
    Invalidation { dirty, fallback: false }
}

// ---------------------------------------------------------------------------
// Scheduling

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assignment {
    pub task: String,
    pub worker: usize,
    pub start_sec: f64,
    pub end_sec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    pub makespan_sec: f64,
    /// Dirty tasks only, sorted by start time then worker.
    pub assignments: Vec<Assignment>,
}

struct Ready<'a> {
    priority: f64,
    id: &'a str,
}

impl Ord for Ready<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        other.priority.total_cmp(&self.priority).then_with(|| self.id.cmp(other.id))
    }
}

impl PartialOrd for Ready<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Ready<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ready<'_> {}

/// Highest-level-first list scheduling of the dirty tasks on `workers`
/// identical workers. Ties go to the lexicographically smaller id, and a
/// freed task goes to the lowest-numbered idle worker.
pub fn schedule(graph: &TaskGraph, dirty: &BTreeSet<String>, workers: usize) -> Schedule {
    assert!(workers >= 1, "at least one worker");
    let level = graph.bottom_levels(dirty);
    let mut waiting: BTreeMap<&str, usize> = graph.tasks.iter().map(|(id, t)| (id.as_str(), t.deps.len())).collect();
    let mut ready: BTreeSet<Ready> = BTreeSet::new();
    let mut running: Vec<Option<(&str, f64)>> = vec![None; workers];
    let mut assignments = Vec::new();
    let mut now = 0.0_f64;

    // Marks `id` finished at `now` and releases its dependents. Clean tasks
    // finish on release, so this cascades.
    fn finish<'a>(
        graph: &'a TaskGraph,
        dirty: &BTreeSet<String>,
        level: &BTreeMap<String, f64>,
        waiting: &mut BTreeMap<&'a str, usize>,
        ready: &mut BTreeSet<Ready<'a>>,
        id: &'a str,
    ) {
        let mut stack = vec![id];
        while let Some(done) = stack.pop() {
            for dep in &graph.dependents[done] {
                let n = waiting.get_mut(dep.as_str()).expect("known task");
                *n -= 1;
                if *n == 0 {
                    release(dirty, level, ready, &mut stack, dep);
                }
            }
        }
    }

    fn release<'a>(dirty: &BTreeSet<String>, level: &BTreeMap<String, f64>, ready: &mut BTreeSet<Ready<'a>>, clean: &mut Vec<&'a str>, id: &'a str) {
        if dirty.contains(id) {
            ready.insert(Ready { priority: level[id], id });
        } else {
            clean.push(id);
        }
    }

    let mut initial_clean = Vec::new();
    for (id, t) in &graph.tasks {
        if t.deps.is_empty() {
            release(dirty, &level, &mut ready, &mut initial_clean, id);
        }
    }
    for id in initial_clean {
        finish(graph, dirty, &level, &mut waiting, &mut ready, id);
    }

    loop {
        for (w, slot) in running.iter_mut().enumerate() {
            if slot.is_some() {
                continue;
            }
            let Some(next) = ready.pop_first() else { break };
            let end = now + graph.tasks[next.id].cost_sec;
            *slot = Some((next.id, end));
            assignments.push(Assignment { task: next.id.to_owned(), worker: w, start_sec: now, end_sec: end });
        }
        let Some(next_time) = running.iter().flatten().map(|&(_, end)| end).min_by(f64::total_cmp) else {
            break;
        };
        now = next_time;
        for slot in running.iter_mut() {
            if let Some((id, end)) = *slot {
                if end == now {
                    *slot = None;
                    finish(graph, dirty, &level, &mut waiting, &mut ready, id);
                }
            }
        }
    }

    assignments.sort_by(|a, b| a.start_sec.total_cmp(&b.start_sec).then(a.worker.cmp(&b.worker)));
    let makespan_sec = assignments.iter().map(|a| a.end_sec).fold(0.0, f64::max);
    Schedule { makespan_sec, assignments }
}

/// Longest dirty-cost-weighted path; 0 when nothing is dirty.
pub fn critical_path(graph: &TaskGraph, dirty: &BTreeSet<String>) -> f64 {
    if dirty.is_empty() {
        return 0.0;
    }
    graph.bottom_levels(dirty).values().copied().fold(0.0, f64::max)
}

/// Monolithic rebuild time over scheduled incremental time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Speedup {
    /// Nothing to rebuild.
    Clean,
    Factor(f64),
}

impl Serialize for Speedup {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Speedup::Clean => s.serialize_str("clean"),
            Speedup::Factor(f) => s.serialize_f64(*f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedupReport {
    pub workers: usize,
    pub monolithic_sec: f64,
    pub scheduled_sec: f64,
    pub dirty_work_sec: f64,
    pub critical_path_sec: f64,
    pub dirty_tasks: usize,
    pub total_tasks: usize,
    pub speedup: Speedup,
}

pub fn speedup_report(graph: &TaskGraph, dirty: &BTreeSet<String>, workers: usize) -> SpeedupReport {
    let monolithic_sec = graph.total_cost();
    let scheduled_sec = schedule(graph, dirty, workers).makespan_sec;
    SpeedupReport {
        workers,
        monolithic_sec,
        scheduled_sec,
        dirty_work_sec: graph.cost_of(dirty),
        critical_path_sec: critical_path(graph, dirty),
        dirty_tasks: dirty.len(),
        total_tasks: graph.len(),
        speedup: if scheduled_sec > 0.0 { Speedup::Factor(monolithic_sec / scheduled_sec) } else { Speedup::Clean },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::load_manifest;
    use crate::patch::diff_trees;
    use crate::tree::tree_of;

    fn ids(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn three_task_manifest() -> Manifest {
        load_manifest(
            r#"{"marker":{"begin":"B","end":"E"},"rules":[{"pattern":"**","visibility":"open"}],
                "modules":[{"id":"m1","globs":["m1/**"],"cost_sec":10},{"id":"m2","globs":["m2/**"],"deps":["m1"],"cost_sec":5}],
                "targets":[{"id":"T","modules":["m1","m2"],"link_cost_sec":1}]}"#,
        )
        .unwrap()
    }

    fn three_task_tree() -> SourceTree {
        tree_of([("m1/a.c", "a\n"), ("m2/b.c", "b\n")])
    }

    #[test]
    fn plans_three_tasks() {
        let g = plan_tasks(&three_task_manifest(), &three_task_tree()).unwrap();
        assert_eq!(g.topo, vec!["m1", "m2", "link:T"]);
        assert_eq!(g.tasks["m2"].deps, ids(&["m1"]));
        assert_eq!(g.tasks["link:T"].deps, ids(&["m1", "m2"]));
        assert_eq!(g.tasks["link:T"].cost_sec, 1.0);
        assert_eq!(g.tasks["m1"].files, vec!["m1/a.c"]);
        assert!(g.warnings.is_empty());
    }

    #[test]
    fn empty_and_shared_modules() {
        let m = load_manifest(r#"{"marker":{"begin":"B","end":"E"},"rules":[]}"#).unwrap();
        assert!(plan_tasks(&m, &SourceTree::new()).unwrap().is_empty());

        let m = load_manifest(
            r#"{"marker":{"begin":"B","end":"E"},"rules":[],
                "modules":[{"id":"m1","globs":["**"],"cost_sec":3}],
                "targets":[{"id":"A","modules":["m1"],"link_cost_sec":1},{"id":"B","modules":["m1"],"link_cost_sec":2}]}"#,
        )
        .unwrap();
        let g = plan_tasks(&m, &SourceTree::new()).unwrap();
        assert_eq!(g.all_ids(), ids(&["link:A", "link:B", "m1"]));
        assert_eq!(g.dependents["m1"], ids(&["link:A", "link:B"]));
        assert_eq!(g.warnings.len(), 1);
    }

    #[test]
    fn hash_tracks_content_and_deps() {
        let m = three_task_manifest();
        let g1 = plan_tasks(&m, &three_task_tree()).unwrap();
        let g2 = plan_tasks(&m, &three_task_tree()).unwrap();
        assert_eq!(g1.tasks["link:T"].input_hash, g2.tasks["link:T"].input_hash);
        let g3 = plan_tasks(&m, &tree_of([("m1/a.c", "a2\n"), ("m2/b.c", "b\n")])).unwrap();
        for id in ["m1", "m2", "link:T"] {
            assert_ne!(g1.tasks[id].input_hash, g3.tasks[id].input_hash, "{id}");
        }
        let g4 = plan_tasks(&m, &tree_of([("m1/a.c", "a\n"), ("m2/b.c", "b2\n")])).unwrap();
        assert_eq!(g1.tasks["m1"].input_hash, g4.tasks["m1"].input_hash);
        assert_ne!(g1.tasks["m2"].input_hash, g4.tasks["m2"].input_hash);
    }

    #[test]
    fn invalidation_cases() {
        let m = three_task_manifest();
        let before = three_task_tree();
        let after = tree_of([("m1/a.c", "changed\n"), ("m2/b.c", "b\n")]);
        let diff = diff_trees(&before, &after);
        let g_after = plan_tasks(&m, &after).unwrap();
        assert_eq!(invalidate(&g_after, &diff, &Cache::default()), ids(&["m1", "m2", "link:T"]));
        assert!(invalidate(&g_after, &Patch::empty(), &Cache::default()).is_empty());

        // Reverting to previously built content hits the cache.
        let mut cache = Cache::default();
        cache.record_all(&plan_tasks(&m, &before).unwrap());
        let revert = diff_trees(&after, &before);
        let g_before = plan_tasks(&m, &before).unwrap();
        assert!(invalidate(&g_before, &revert, &cache).is_empty());

        // Unowned file dirties everything.
        let stray = diff_trees(&before, &tree_of([("m1/a.c", "a\n"), ("m2/b.c", "b\n"), ("README", "x\n")]));
        assert_eq!(invalidate(&g_before, &stray, &cache), g_before.all_ids());
    }

    fn chain() -> TaskGraph {
        TaskGraph::from_costs([("A", &[][..], 10.0), ("B", &["A"][..], 5.0)]).unwrap()
    }

    fn diamond() -> TaskGraph {
        TaskGraph::from_costs([
            ("A", &[][..], 2.0),
            ("B", &["A"][..], 3.0),
            ("C", &["A"][..], 4.0),
            ("D", &["B", "C"][..], 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn schedule_examples() {
        let g = chain();
        assert_eq!(schedule(&g, &g.all_ids(), 4).makespan_sec, 15.0);
        let g = TaskGraph::from_costs([("A", &[][..], 10.0), ("B", &[][..], 10.0)]).unwrap();
        assert_eq!(schedule(&g, &g.all_ids(), 2).makespan_sec, 10.0);
        let g = diamond();
        let s = schedule(&g, &g.all_ids(), 2);
        assert_eq!(s.makespan_sec, 7.0);
        assert_eq!(
            s.assignments,
            vec![
                Assignment { task: "A".into(), worker: 0, start_sec: 0.0, end_sec: 2.0 },
                Assignment { task: "C".into(), worker: 0, start_sec: 2.0, end_sec: 6.0 },
                Assignment { task: "B".into(), worker: 1, start_sec: 2.0, end_sec: 5.0 },
                Assignment { task: "D".into(), worker: 0, start_sec: 6.0, end_sec: 7.0 },
            ]
        );
    }

    #[test]
    fn clean_tasks_are_instant() {
        let g = diamond();
        let s = schedule(&g, &ids(&["D"]), 2);
        assert_eq!(s.makespan_sec, 1.0);
        assert_eq!(s.assignments.len(), 1);
        assert_eq!(schedule(&g, &BTreeSet::new(), 3).makespan_sec, 0.0);
    }

    #[test]
    fn critical_path_examples() {
        let g = diamond();
        assert_eq!(critical_path(&g, &g.all_ids()), 7.0);
        let single = TaskGraph::from_costs([("X", &[][..], 5.0)]).unwrap();
        assert_eq!(critical_path(&single, &single.all_ids()), 5.0);
        assert_eq!(critical_path(&g, &BTreeSet::new()), 0.0);
    }

    #[test]
    fn speedup_examples() {
        let g = plan_tasks(&three_task_manifest(), &three_task_tree()).unwrap();
        let r = speedup_report(&g, &g.all_ids(), 1);
        assert_eq!(r.speedup, Speedup::Factor(1.0));
        let r = speedup_report(&g, &ids(&["m2", "link:T"]), 1);
        assert_eq!(r.monolithic_sec, 16.0);
        assert_eq!(r.scheduled_sec, 6.0);
        assert_eq!(r.speedup, Speedup::Factor(16.0 / 6.0));
        let r = speedup_report(&g, &BTreeSet::new(), 4);
        assert_eq!(r.speedup, Speedup::Clean);
        assert_eq!(serde_json::to_value(r.speedup).unwrap(), serde_json::json!("clean"));
    }

    #[test]
    fn cycle_rejected() {
        let err = TaskGraph::from_costs([("A", &["B"][..], 1.0), ("B", &["A"][..], 1.0)]).unwrap_err();
        assert!(matches!(err, Error::Cycle(_)));
    }

    #[test]
    fn cache_json_round_trip() {
        let mut c = Cache::default();
        c.record_all(&plan_tasks(&three_task_manifest(), &three_task_tree()).unwrap());
        assert_eq!(Cache::from_json(&c.to_json()).unwrap(), c);
        assert_eq!(c.entries.len(), 3);
    }
}
