//! Seeded synthetic repositories with a replayable commit stream.
//!
//! Layout of a generated tree:
//!
//! ```text
//! README.md                 open, owned by no module
//! src/mNN/fK.c              open
//! src/mNN/mx_0.c            mixed, carries marked regions
//! src/mNN/secret_0.c        internal
//! soc/sN/fK.c               open, tagged with soc sN
//! ```
//!
//! Internal commits edit the internal tree and keep markers balanced.
//! Community commits edit the derived open tree and are kept only when
//! they port back without conflict, so every generated stream replays.

use std::collections::BTreeSet;
use std::path::Path;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dualsync::{derive_open_subset, port_back, PathKind};
use crate::error::{Error, Result};
use crate::metrics::CommitRecord;
use crate::model::{
    load_manifest, AxesDoc, FeatureDef, Manifest, ManifestDoc, MarkerDoc, ModuleDef, RuleDoc, TargetDef, TestDef,
    Visibility,
};
use crate::patch::{apply_patch, diff_file, diff_trees, Patch};
use crate::tree::{join_lines, split_lines, SourceTree, MANIFEST_FILE};

pub const MARKER_BEGIN: &str = "@internal-begin";
pub const MARKER_END: &str = "@internal-end";
pub const HISTORY_FILE: &str = "commits.jsonl";

const IPS: [&str; 4] = ["gpu", "npu", "isp", "vpu"];
const WORDS: [&str; 12] = ["init", "probe", "reset", "poll", "irq", "map", "sync", "flush", "tune", "scan", "load", "park"];
const COMMUNITY_RETRIES: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixtureSpec {
    /// Total modules, SOC modules included.
    pub modules: usize,
    pub socs: usize,
    pub files_per_module: usize,
    pub features: usize,
    pub tests: usize,
    pub test_cost_sec: f64,
    pub targets: usize,
    pub link_cost_sec: f64,
    pub min_module_cost_sec: u32,
    pub max_module_cost_sec: u32,
    /// Each module depends on up to this many earlier modules.
    pub max_deps: usize,
    pub commits: usize,
    pub commits_per_day: u32,
    /// Fraction of commits authored on the open path.
    pub community_ratio: f64,
    /// Unix seconds of the first commit.
    pub start_unix: i64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            modules: 40,
            socs: 4,
            files_per_module: 5,
            features: 20,
            tests: 200,
            test_cost_sec: 60.0,
            targets: 4,
            link_cost_sec: 30.0,
            min_module_cost_sec: 60,
            max_module_cost_sec: 600,
            max_deps: 2,
            commits: 500,
            commits_per_day: 15,
            community_ratio: 0.02,
            start_unix: 1_704_067_200, // 2024-01-01T00:00:00Z
        }
    }
}

impl FixtureSpec {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("fixture spec: {m}")));
        if self.socs > self.modules || self.modules == 0 {
            return bad("need 0 < modules and socs <= modules");
        }
        if self.files_per_module < 3 {
            return bad("files_per_module must be at least 3");
        }
        if self.features == 0 || self.features > self.modules {
            return bad("features must be in 1..=modules");
        }
        if self.commits_per_day == 0 {
            return bad("commits_per_day must be positive");
        }
        if !(0.0..=1.0).contains(&self.community_ratio) {
            return bad("community_ratio must be in [0, 1]");
        }
        if self.min_module_cost_sec > self.max_module_cost_sec {
            return bad("min_module_cost_sec exceeds max_module_cost_sec");
        }
        if !(self.test_cost_sec >= 0.0 && self.link_cost_sec >= 0.0) {
            return bad("costs must be non-negative");
        }
        Ok(())
    }
}

/// One entry of the commit stream: the history record plus its patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitEntry {
    #[serde(flatten)]
    pub record: CommitRecord,
    #[serde(with = "patch_text")]
    pub patch: Patch,
}

mod patch_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::patch::{parse_patch, Patch};

    pub fn serialize<S: Serializer>(p: &Patch, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(p)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Patch, D::Error> {
        let text = String::deserialize(d)?;
        parse_patch(&text).map_err(serde::de::Error::custom)
    }
}

pub fn commit_stream_to_jsonl(commits: &[CommitEntry]) -> String {
    let mut out = String::new();
    for c in commits {
        out.push_str(&serde_json::to_string(c).expect("commit serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_commit_stream(text: &str) -> Result<Vec<CommitEntry>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: CommitEntry =
            serde_json::from_str(line).map_err(|e| Error::Parse(format!("commit stream line {}: {e}", i + 1)))?;
        out.push(entry);
    }
    Ok(out)
}

/// Reduces a commit stream to the `(kind, patch)` sequence replayed by the
/// round-trip check.
pub fn replay_sequence(commits: &[CommitEntry]) -> Vec<(PathKind, Patch)> {
    commits.iter().map(|c| (c.record.path_kind, c.patch.clone())).collect()
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub tree: SourceTree,
    pub manifest_text: String,
    pub commits: Vec<CommitEntry>,
}

impl Fixture {
    pub fn manifest(&self) -> Manifest {
        load_manifest(&self.manifest_text).expect("generated manifest is valid")
    }

    pub fn history_jsonl(&self) -> String {
        commit_stream_to_jsonl(&self.commits)
    }

    /// Digest over tree, manifest and commit stream.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.tree.digest());
        h.update(self.manifest_text.as_bytes());
        h.update(self.history_jsonl().as_bytes());
        h.finalize().into()
    }

    pub fn digest_hex(&self) -> String {
        hex::encode(self.digest())
    }

    /// Writes `<dir>/repo/` (tree plus `dcc.json`) and `<dir>/commits.jsonl`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        let repo = dir.join("repo");
        self.tree.write_dir(&repo)?;
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| Error::Io { path, source }
        };
        let manifest_path = repo.join(MANIFEST_FILE);
        std::fs::write(&manifest_path, &self.manifest_text).map_err(io(&manifest_path))?;
        let history_path = dir.join(HISTORY_FILE);
        std::fs::write(&history_path, self.history_jsonl()).map_err(io(&history_path))?;
        Ok(())
    }
}

struct ModulePlan {
    id: String,
    dir: String,
    soc: Option<String>,
}

fn module_plans(spec: &FixtureSpec) -> Vec<ModulePlan> {
    let plain = spec.modules - spec.socs;
    let mut out = Vec::with_capacity(spec.modules);
    for i in 0..plain {
        out.push(ModulePlan { id: format!("m{i:02}"), dir: format!("src/m{i:02}"), soc: None });
    }
    for i in 1..=spec.socs {
        out.push(ModulePlan { id: format!("soc_s{i}"), dir: format!("soc/s{i}"), soc: Some(format!("s{i}")) });
    }
    out
}

fn code_line(rng: &mut ChaCha8Rng, prefix: &str) -> String {
    let word = WORDS.choose(rng).expect("non-empty");
    let n: u32 = rng.gen_range(0..10_000);
    let v: u32 = rng.gen_range(0..256);
    format!("int {prefix}_{word}{n}(void) {{ return {v}; }}")
}

fn region_block(rng: &mut ChaCha8Rng, prefix: &str) -> Vec<String> {
    let mut block = vec![format!("// {MARKER_BEGIN}")];
    for _ in 0..rng.gen_range(1..=3) {
        block.push(format!("static const int {prefix}_secret{} = {};", rng.gen_range(0..10_000u32), rng.gen_range(0..256u32)));
    }
    block.push(format!("// {MARKER_END}"));
    block
}

fn file_body(rng: &mut ChaCha8Rng, path: &str, prefix: &str, regions: usize) -> String {
    let mut lines = vec![format!("// {path}")];
    for _ in 0..rng.gen_range(6..=16) {
        lines.push(code_line(rng, prefix));
    }
    for _ in 0..regions {
        let at = region_free_slot(&lines, rng);
        let block = region_block(rng, prefix);
        lines.splice(at..at, block);
    }
    join_lines(&lines)
}

fn is_marker(line: &str) -> bool {
    line.contains(MARKER_BEGIN) || line.contains(MARKER_END)
}

/// An insertion index (1..=len, after the header) outside every region.
fn region_free_slot(lines: &[String], rng: &mut ChaCha8Rng) -> usize {
    let mut depth = 0usize;
    let mut free = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if i >= 1 && depth == 0 {
            free.push(i);
        }
        if line.contains(MARKER_BEGIN) {
            depth += 1;
        } else if line.contains(MARKER_END) {
            depth -= 1;
        }
    }
    free.push(lines.len());
    *free.choose(rng).expect("end slot exists")
}

fn build_manifest(spec: &FixtureSpec, plans: &[ModulePlan], rng: &mut ChaCha8Rng) -> ManifestDoc {
    let mut rules = vec![
        RuleDoc::new("src/*/secret_*.c", Visibility::Internal),
        RuleDoc::new("src/*/mx_*.c", Visibility::Mixed),
    ];
    for (k, p) in plans.iter().filter(|p| p.soc.is_some()).enumerate() {
        let mut r = RuleDoc::new(format!("{}/**", p.dir), Visibility::Open);
        r.soc = vec![p.soc.clone().expect("soc module")];
        r.ip = vec![IPS[k % IPS.len()].to_owned()];
        rules.push(r);
    }
    rules.push(RuleDoc::new("**", Visibility::Open));

    let axes = AxesDoc {
        soc: plans.iter().filter_map(|p| p.soc.clone()).collect(),
        ip: IPS.iter().take(spec.socs.min(IPS.len())).map(|s| s.to_string()).collect(),
        ..AxesDoc::default()
    };

    let mut modules = Vec::with_capacity(plans.len());
    for (i, p) in plans.iter().enumerate() {
        let lo = i.saturating_sub(8);
        let k = rng.gen_range(0..=spec.max_deps.min(i - lo));
        let mut deps: Vec<String> = (lo..i).choose_multiple(rng, k).into_iter().map(|j| plans[j].id.clone()).collect();
        deps.sort();
        let cost = rng.gen_range(spec.min_module_cost_sec..=spec.max_module_cost_sec);
        modules.push(ModuleDef { id: p.id.clone(), globs: vec![format!("{}/**", p.dir)], deps, cost_sec: f64::from(cost) });
    }

    let targets = (0..spec.targets)
        .map(|t| {
            let mut members: Vec<String> = plans
                .iter()
                .enumerate()
                .filter(|(i, _)| i % spec.targets == t || rng.gen_bool(0.35))
                .map(|(_, p)| p.id.clone())
                .collect();
            members.sort();
            TargetDef { id: format!("bin{t}"), modules: members, link_cost_sec: spec.link_cost_sec }
        })
        .collect();

    // Features partition the modules as evenly as the counts allow.
    let mut order: Vec<usize> = (0..plans.len()).collect();
    order.shuffle(rng);
    let mut feature_globs: Vec<Vec<String>> = vec![Vec::new(); spec.features];
    for (slot, &m) in order.iter().enumerate() {
        feature_globs[slot % spec.features].push(format!("{}/**", plans[m].dir));
    }
    let features = feature_globs
        .into_iter()
        .enumerate()
        .map(|(f, mut globs)| {
            globs.sort();
            FeatureDef { id: format!("f{f:02}"), globs }
        })
        .collect();

    let tests = (0..spec.tests)
        .map(|t| {
            let mut fs = BTreeSet::from([t % spec.features]);
            if rng.gen_bool(0.1) {
                fs.insert(rng.gen_range(0..spec.features));
            }
            TestDef {
                id: format!("t{t:03}"),
                features: fs.into_iter().map(|f| format!("f{f:02}")).collect(),
                cost_sec: spec.test_cost_sec,
            }
        })
        .collect();

    ManifestDoc {
        marker: MarkerDoc { begin: MARKER_BEGIN.to_owned(), end: MARKER_END.to_owned() },
        axes,
        rules,
        modules,
        targets,
        features,
        tests,
    }
}

fn build_tree(spec: &FixtureSpec, plans: &[ModulePlan], rng: &mut ChaCha8Rng) -> SourceTree {
    let mut tree = SourceTree::new();
    tree.insert("README.md", "Synthetic firmware tree.\n").expect("valid path");
    for p in plans {
        let prefix = p.id.clone();
        let mut names: Vec<(String, usize)> = Vec::new();
        if p.soc.is_some() {
            names.extend((0..spec.files_per_module).map(|k| (format!("f{k}.c"), 0)));
        } else {
            names.push(("mx_0.c".to_owned(), rng.gen_range(1..=2)));
            names.push(("secret_0.c".to_owned(), 0));
            names.extend((0..spec.files_per_module - 2).map(|k| (format!("f{k}.c"), 0)));
        }
        for (name, regions) in names {
            let path = format!("{}/{name}", p.dir);
            let body = file_body(rng, &path, &prefix, regions);
            tree.insert(path, &body).expect("valid path");
        }
    }
    tree
}

/// Applies one marker-preserving edit to `content`.
fn edit_lines(rng: &mut ChaCha8Rng, content: &str, prefix: &str, allow_regions: bool) -> String {
    let mut lines: Vec<String> = split_lines(content).into_iter().map(str::to_owned).collect();
    let editable: Vec<usize> = (1..lines.len()).filter(|&i| !is_marker(&lines[i])).collect();
    let roll = rng.gen_range(0..100);
    if allow_regions && roll < 10 {
        let at = region_free_slot(&lines, rng);
        let block = region_block(rng, prefix);
        lines.splice(at..at, block);
    } else if roll < 45 && !editable.is_empty() {
        let i = *editable.choose(rng).expect("non-empty");
        lines[i] = code_line(rng, prefix);
    } else if roll < 65 && editable.len() > 3 {
        let i = *editable.choose(rng).expect("non-empty");
        lines.remove(i);
    } else {
        let at = rng.gen_range(1..=lines.len());
        for _ in 0..rng.gen_range(1..=3) {
            lines.insert(at, code_line(rng, prefix));
        }
    }
    join_lines(&lines)
}

fn prefix_of(path: &str) -> String {
    let mut parts = path.split('/');
    match (parts.next(), parts.next()) {
        (Some("soc"), Some(s)) => format!("soc_{s}"),
        (_, Some(m)) => m.to_owned(),
        _ => "top".to_owned(),
    }
}

fn module_source_paths(tree: &SourceTree) -> Vec<String> {
    tree.paths().filter(|p| p.starts_with("src/") || p.starts_with("soc/")).map(str::to_owned).collect()
}

fn internal_commit(rng: &mut ChaCha8Rng, tree: &SourceTree, plans: &[ModulePlan]) -> Patch {
    let mut after = tree.clone();
    let paths = module_source_paths(tree);
    for _ in 0..rng.gen_range(1..=2) {
        if rng.gen_bool(0.03) {
            let p = &plans[rng.gen_range(0..plans.len())];
            let path = format!("{}/g{}.c", p.dir, rng.gen_range(0..1000u32));
            if !after.contains(&path) {
                let body = file_body(rng, &path, &p.id, 0);
                after.insert(path, &body).expect("valid path");
                continue;
            }
        }
        let path = paths.choose(rng).expect("tree has sources");
        let allow_regions = path.contains("/mx_");
        let content = after.get(path).expect("path from tree").to_owned();
        let edited = edit_lines(rng, &content, &prefix_of(path), allow_regions);
        after.insert(path.clone(), &edited).expect("valid path");
    }
    diff_trees(tree, &after)
}

/// A community patch on the open tree and its internal port, if one of the
/// attempts ports back cleanly.
fn community_commit(rng: &mut ChaCha8Rng, tree: &SourceTree, manifest: &Manifest) -> Result<Option<(Patch, Patch)>> {
    let (open, _) = derive_open_subset(tree, manifest)?;
    let candidates = module_source_paths(&open);
    for _ in 0..COMMUNITY_RETRIES {
        let path = candidates.choose(rng).expect("open tree has sources");
        let before = open.get(path).expect("path from tree");
        let after = edit_lines(rng, before, &prefix_of(path), false);
        let Some(fp) = diff_file(path, Some(before), Some(&after)) else { continue };
        let open_patch = Patch { files: vec![fp] };
        match port_back(&open_patch, tree, manifest) {
            Ok(back) => return Ok(Some((open_patch, back))),
            Err(e) if matches!(e.root(), Error::Conflict(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

pub fn gen_fixture(seed: u64, spec: &FixtureSpec) -> Result<Fixture> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plans = module_plans(spec);
    let doc = build_manifest(spec, &plans, &mut rng);
    let manifest_text = doc.to_json();
    let manifest = load_manifest(&manifest_text)?;
    let tree = build_tree(spec, &plans, &mut rng);

    let start = Utc.timestamp_opt(spec.start_unix, 0).single().ok_or_else(|| Error::Config("bad start_unix".into()))?;
    let spacing = 86_400 / i64::from(spec.commits_per_day);
    let mut clock: DateTime<Utc> = start;
    let mut current = tree.clone();
    let mut commits = Vec::with_capacity(spec.commits);

    for n in 0..spec.commits {
        clock += Duration::seconds(spacing / 2 + rng.gen_range(0..spacing.max(1)));
        let community = spec.community_ratio > 0.0 && rng.gen_bool(spec.community_ratio);
        let ported = if community { community_commit(&mut rng, &current, &manifest)? } else { None };
        let (kind, patch, internal_patch) = match ported {
            Some((open_patch, back)) => (PathKind::Open, open_patch, back),
            None => {
                let p = internal_commit(&mut rng, &current, &plans);
                (PathKind::Internal, p.clone(), p)
            }
        };
        let after = apply_patch(&current, &internal_patch)?;
        // Commits visible on both paths land on the other one after a lag.
        let crosses = match kind {
            PathKind::Open => true,
            PathKind::Internal => derive_open_subset(&current, &manifest)?.0 != derive_open_subset(&after, &manifest)?.0,
        };
        let merged_at = crosses.then(|| clock + Duration::seconds(rng.gen_range(3_600..=5 * 86_400)));
        let files = patch.touched_paths().into_iter().collect();
        commits.push(CommitEntry {
            record: CommitRecord { id: format!("c{n:04}"), timestamp: clock, path_kind: kind, files, merged_at },
            patch,
        });
        current = after;
    }

    Ok(Fixture { tree, manifest_text, commits })
}

/// Loads a stream written by [`Fixture::write_dir`] for replay.
pub fn load_patch_sequence(text: &str) -> Result<Vec<(PathKind, Patch)>> {
    Ok(replay_sequence(&parse_commit_stream(text)?))
}
