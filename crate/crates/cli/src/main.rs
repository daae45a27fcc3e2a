use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use dcc_core::buildsched::{critical_path, invalidate_detailed, plan_tasks, schedule, speedup_report, Cache, Speedup};
use dcc_core::dualsync::{check_round_trip, derive_open_subset, forward_patch, port_back, strip_file};
use dcc_core::fixture::{gen_fixture, load_patch_sequence, FixtureSpec};
use dcc_core::metrics::{late_commit_ratio, merge_lag, parse_history, DEFAULT_WINDOW_DAYS};
use dcc_core::model::validate_tree;
use dcc_core::patch::{apply_patch, parse_patch};
use dcc_core::pipeline::{run_pipeline, PipelineOptions};
use dcc_core::smartval::{build_trace_graph, select_tests, SelectionOutput};
use dcc_core::tailor::{impact_report, scaffold_soc, tailor_tree, ReleaseConfig};
use dcc_core::tree::MANIFEST_FILE;
use dcc_core::{load_manifest, Error, Manifest, Patch, SourceTree};

const EXIT_ERROR: u8 = 1;
const EXIT_VIOLATION: u8 = 2;

#[derive(Parser)]
#[command(name = "dcc", version, about = "Dual-path sync, change-based validation and build scheduling for a tagged code base")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Tree root.
    #[arg(long, global = true, default_value = ".")]
    root: PathBuf,
    /// Manifest path [default: <root>/dcc.json].
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Machine-readable output on stdout.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Report rule, marker and ownership findings for the tree.
    Validate,
    /// Derive the open subset of the tree.
    Derive,
    /// Strip marked regions from one file.
    Strip { file: PathBuf },
    /// Translate patches between the internal and open trees.
    #[command(subcommand)]
    Patch(PatchCmd),
    /// Replay a commit stream on both paths and compare after every step.
    CheckRoundtrip {
        #[arg(long)]
        commits: PathBuf,
    },
    /// Select the tests impacted by a diff.
    Select {
        #[arg(long)]
        diff: PathBuf,
    },
    /// Plan or simulate modular builds.
    #[command(subcommand)]
    Build(BuildCmd),
    /// Produce a release tree for a configuration.
    Tailor {
        #[arg(long)]
        config: PathBuf,
    },
    /// Plan (and optionally apply) the files for a new SOC.
    ScaffoldSoc {
        #[arg(long)]
        id: String,
        #[arg(long)]
        family: String,
        #[arg(long)]
        apply: bool,
    },
    /// Run sync, selection, invalidation and scheduling for one commit.
    Pipeline {
        #[arg(long)]
        diff: PathBuf,
        #[arg(long, default_value_t = 8)]
        workers: usize,
        /// Artifact cache; without it every task of the pre-diff tree counts as built.
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long)]
        commit_id: Option<String>,
    },
    /// Engineering KPIs over a JSON-lines commit history.
    #[command(subcommand)]
    Metrics(MetricsCmd),
    /// Generate a seeded repository and commit stream.
    GenFixture {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// JSON file overriding size parameters.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        commits: Option<usize>,
        #[arg(long)]
        community_ratio: Option<f64>,
    },
}

#[derive(Subcommand)]
enum PatchCmd {
    /// Internal patch → open patch.
    Forward { patch: PathBuf },
    /// Open (community) patch → internal patch.
    Back { patch: PathBuf },
}

#[derive(Subcommand)]
enum BuildCmd {
    /// List build tasks with their input hashes.
    Plan,
    /// Simulate a build of the tasks dirtied by a diff.
    Sim {
        #[arg(long, default_value_t = 8)]
        workers: usize,
        /// Without a diff every task is rebuilt.
        #[arg(long)]
        diff: Option<PathBuf>,
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Write the cache back with the simulated artifacts recorded.
        #[arg(long)]
        save_cache: bool,
    },
}

#[derive(Subcommand)]
enum MetricsCmd {
    /// Share of commits made shortly before milestones.
    Late {
        #[arg(long)]
        history: PathBuf,
        /// RFC 3339 instant; repeatable.
        #[arg(long = "milestone", required = true)]
        milestones: Vec<DateTime<Utc>>,
        #[arg(long, default_value_t = DEFAULT_WINDOW_DAYS)]
        window_days: f64,
    },
    /// Time for commits to land on the other development path.
    Lag {
        #[arg(long)]
        history: PathBuf,
    },
}

/// A condition reported with exit code 2.
#[derive(Debug)]
struct Violation(String);

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Violation {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Violation>().is_some() {
        return EXIT_VIOLATION;
    }
    match err.downcast_ref::<Error>().map(Error::root) {
        Some(Error::Marker(_)) => EXIT_VIOLATION,
        _ => EXIT_ERROR,
    }
}

struct Ctx<'a> {
    g: &'a Global,
}

impl Ctx<'_> {
    fn manifest_path(&self) -> PathBuf {
        self.g.manifest.clone().unwrap_or_else(|| self.g.root.join(MANIFEST_FILE))
    }

    fn manifest(&self) -> anyhow::Result<Manifest> {
        let path = self.manifest_path();
        let text = read(&path)?;
        load_manifest(&text).with_context(|| format!("loading {}", path.display()))
    }

    fn tree(&self) -> anyhow::Result<SourceTree> {
        Ok(SourceTree::load_dir(&self.g.root)?)
    }

    fn out_dir(&self, what: &str) -> anyhow::Result<&Path> {
        match &self.g.out {
            Some(p) => Ok(p),
            None => bail!("{what} needs --out <dir>"),
        }
    }

    /// Writes text to `--out` or stdout.
    fn emit_text(&self, text: &str) -> anyhow::Result<()> {
        match &self.g.out {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn report(&self, value: serde_json::Value, human: impl FnOnce() -> String) {
        if self.g.json {
            println!("{}", serde_json::to_string_pretty(&value).expect("json value"));
        } else {
            print!("{}", human());
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_patch(path: &Path) -> anyhow::Result<Patch> {
    parse_patch(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// `1h 02m 03s`, `4m 10s`, `12.5s`.
fn human(sec: f64) -> String {
    if sec < 60.0 {
        return format!("{sec:.1}s");
    }
    let s = sec.round() as u64;
    let (h, m, s) = (s / 3600, s / 60 % 60, s % 60);
    if h > 0 {
        format!("{h}h {m:02}m {s:02}s")
    } else {
        format!("{m}m {s:02}s")
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let ctx = Ctx { g: &cli.global };
    match &cli.command {
        Command::Validate => cmd_validate(&ctx),
        Command::Derive => cmd_derive(&ctx),
        Command::Strip { file } => cmd_strip(&ctx, file),
        Command::Patch(PatchCmd::Forward { patch }) => {
            let (m, tree, p) = (ctx.manifest()?, ctx.tree()?, read_patch(patch)?);
            ctx.emit_text(&forward_patch(&p, &tree, &m)?.to_string())
        }
        Command::Patch(PatchCmd::Back { patch }) => {
            let (m, tree, p) = (ctx.manifest()?, ctx.tree()?, read_patch(patch)?);
            ctx.emit_text(&port_back(&p, &tree, &m)?.to_string())
        }
        Command::CheckRoundtrip { commits } => cmd_check_roundtrip(&ctx, commits),
        Command::Select { diff } => cmd_select(&ctx, diff),
        Command::Build(BuildCmd::Plan) => cmd_build_plan(&ctx),
        Command::Build(BuildCmd::Sim { workers, diff, cache, save_cache }) => {
            cmd_build_sim(&ctx, *workers, diff.as_deref(), cache.as_deref(), *save_cache)
        }
        Command::Tailor { config } => cmd_tailor(&ctx, config),
        Command::ScaffoldSoc { id, family, apply } => cmd_scaffold(&ctx, id, family, *apply),
        Command::Pipeline { diff, workers, cache, commit_id } => {
            cmd_pipeline(&ctx, diff, *workers, cache.as_deref(), commit_id.clone())
        }
        Command::Metrics(MetricsCmd::Late { history, milestones, window_days }) => {
            let h = parse_history(&read(history)?)?;
            let ratio = late_commit_ratio(&h, milestones, *window_days);
            ctx.report(json!({ "commits": h.len(), "window_days": window_days, "late_ratio": ratio }), || {
                format!("{:.2}% of {} commits fall within {} days before a milestone\n", ratio * 100.0, h.len(), window_days)
            });
            Ok(())
        }
        Command::Metrics(MetricsCmd::Lag { history }) => {
            let lag = merge_lag(&parse_history(&read(history)?)?);
            ctx.report(serde_json::to_value(&lag)?, || match lag.stats {
                Some(s) => format!(
                    "merged {} unmerged {}\nmean {}  median {}  max {}\n",
                    lag.merged,
                    lag.unmerged,
                    human(s.mean_sec),
                    human(s.median_sec),
                    human(s.max_sec as f64)
                ),
                None => format!("no merged commits ({} unmerged)\n", lag.unmerged),
            });
            Ok(())
        }
        Command::GenFixture { seed, spec, commits, community_ratio } => {
            let mut s = match spec {
                Some(p) => serde_json::from_str(&read(p)?).map_err(|e| Error::Config(format!("fixture spec: {e}")))?,
                None => FixtureSpec::default(),
            };
            if let Some(n) = commits {
                s.commits = *n;
            }
            if let Some(r) = community_ratio {
                s.community_ratio = *r;
            }
            let out = ctx.out_dir("gen-fixture")?;
            let f = gen_fixture(*seed, &s)?;
            f.write_dir(out)?;
            ctx.report(json!({ "seed": seed, "files": f.tree.len(), "commits": f.commits.len(), "digest": f.digest_hex() }), || {
                format!("wrote {} files and {} commits to {} (digest {})\n", f.tree.len(), f.commits.len(), out.display(), f.digest_hex())
            });
            Ok(())
        }
    }
}

fn cmd_validate(ctx: &Ctx) -> anyhow::Result<()> {
    let (m, tree) = (ctx.manifest()?, ctx.tree()?);
    let report = validate_tree(&m, &tree);
    ctx.report(serde_json::to_value(&report)?, || {
        let mut s = String::new();
        for f in &report.findings {
            s.push_str(&format!("{}: {:?}\n", f.path, f.kind));
        }
        s.push_str(&format!("{} findings\n", report.findings.len()));
        s
    });
    if !report.derivable() {
        return Err(Violation("tree has marker findings that block derivation".into()).into());
    }
    Ok(())
}

fn cmd_derive(ctx: &Ctx) -> anyhow::Result<()> {
    let (m, tree) = (ctx.manifest()?, ctx.tree()?);
    let (open, map) = derive_open_subset(&tree, &m)?;
    if let Some(out) = &ctx.g.out {
        open.write_dir(out)?;
    }
    let regions = map.regions();
    ctx.report(json!({ "files": open.len(), "dropped": tree.len() - open.len(), "regions": regions }), || {
        format!("{} of {} files published, {} regions stripped\n", open.len(), tree.len(), regions.len())
    });
    Ok(())
}

fn cmd_strip(ctx: &Ctx, file: &Path) -> anyhow::Result<()> {
    let m = ctx.manifest()?;
    let text = read(file)?;
    let (stripped, _) = strip_file(&text, m.marker_begin(), m.marker_end())
        .map_err(|e| Error::from(e.with_path(&file.display().to_string())))?;
    ctx.emit_text(&stripped)
}

fn cmd_check_roundtrip(ctx: &Ctx, commits: &Path) -> anyhow::Result<()> {
    let (m, tree) = (ctx.manifest()?, ctx.tree()?);
    let seq = load_patch_sequence(&read(commits)?)?;
    let report = check_round_trip(&tree, &m, &seq)?;
    ctx.report(serde_json::to_value(&report)?, || {
        let mut s = format!(
            "replayed {} steps ({} internal, {} open), {} errors\n",
            report.steps_replayed,
            report.internal_steps,
            report.open_steps,
            report.errors.len()
        );
        for e in &report.errors {
            s.push_str(&format!("  step {} [{}]: {}\n", e.step, e.kind, e.message));
        }
        match &report.divergence {
            Some(d) => s.push_str(&format!("DIVERGED at step {}: {}\n", d.step, d.paths.join(", "))),
            None => s.push_str("open tree matches the derived subset at every step\n"),
        }
        s
    });
    if let Some(d) = &report.divergence {
        return Err(Violation(format!("open tree diverged at step {}", d.step)).into());
    }
    if !report.errors.is_empty() {
        bail!("{} steps could not be replayed", report.errors.len());
    }
    Ok(())
}

fn cmd_select(ctx: &Ctx, diff: &Path) -> anyhow::Result<()> {
    let (m, tree, p) = (ctx.manifest()?, ctx.tree()?, read_patch(diff)?);
    let graph = build_trace_graph(&m, &tree);
    let out = SelectionOutput::new(&select_tests(&graph, &p), &graph);
    ctx.report(serde_json::to_value(&out)?, || {
        format!(
            "{} tests ({:?}), {} of {} ({:.1}%)\n{}",
            out.tests.len(),
            out.reason,
            human(out.selected_cost_sec),
            human(out.full_cost_sec),
            out.ratio * 100.0,
            out.tests.iter().map(|t| format!("  {t}\n")).collect::<String>()
        )
    });
    Ok(())
}

fn cmd_build_plan(ctx: &Ctx) -> anyhow::Result<()> {
    let (m, tree) = (ctx.manifest()?, ctx.tree()?);
    let g = plan_tasks(&m, &tree)?;
    for w in &g.warnings {
        eprintln!("warning: {w}");
    }
    let tasks: Vec<_> = g
        .topo
        .iter()
        .map(|id| {
            let t = &g.tasks[id];
            json!({ "id": t.id, "deps": t.deps, "cost_sec": t.cost_sec, "hash": t.hash_hex(), "files": t.files.len() })
        })
        .collect();
    ctx.report(json!({ "tasks": tasks, "total_cost_sec": g.total_cost() }), || {
        let mut s = String::new();
        for id in &g.topo {
            let t = &g.tasks[id];
            s.push_str(&format!("{:<16} {:>10}  {}  deps: {}\n", t.id, human(t.cost_sec), &t.hash_hex()[..12], join(&t.deps)));
        }
        s.push_str(&format!("{} tasks, monolithic {}\n", g.len(), human(g.total_cost())));
        s
    });
    Ok(())
}

fn join(ids: &BTreeSet<String>) -> String {
    if ids.is_empty() {
        "-".to_owned()
    } else {
        ids.iter().cloned().collect::<Vec<_>>().join(",")
    }
}

fn load_cache(path: Option<&Path>) -> anyhow::Result<Cache> {
    match path {
        Some(p) if p.exists() => Ok(Cache::from_json(&read(p)?)?),
        _ => Ok(Cache::default()),
    }
}

fn cmd_build_sim(ctx: &Ctx, workers: usize, diff: Option<&Path>, cache_path: Option<&Path>, save: bool) -> anyhow::Result<()> {
    if workers == 0 {
        bail!("--workers must be at least 1");
    }
    let (m, tree) = (ctx.manifest()?, ctx.tree()?);
    let mut cache = load_cache(cache_path)?;
    let (graph, dirty, fallback) = match diff {
        Some(d) => {
            let p = read_patch(d)?;
            let graph = plan_tasks(&m, &apply_patch(&tree, &p)?)?;
            let inval = invalidate_detailed(&graph, &p, &cache);
            (graph, inval.dirty, inval.fallback)
        }
        None => {
            let graph = plan_tasks(&m, &tree)?;
            let dirty = graph.tasks.values().filter(|t| !cache.contains(&t.input_hash)).map(|t| t.id.clone()).collect();
            (graph, dirty, false)
        }
    };
    let sched = schedule(&graph, &dirty, workers);
    let report = speedup_report(&graph, &dirty, workers);
    let cp = critical_path(&graph, &dirty);
    if save {
        let Some(path) = cache_path else { bail!("--save-cache needs --cache <file>") };
        cache.record(&graph, &dirty);
        fs::write(path, cache.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    ctx.report(json!({ "report": report, "fallback": fallback, "schedule": sched }), || {
        let mut s = String::new();
        for a in &sched.assignments {
            s.push_str(&format!("w{:<3} {:>10} .. {:>10}  {}\n", a.worker, human(a.start_sec), human(a.end_sec), a.task));
        }
        let speedup = match report.speedup {
            Speedup::Clean => "clean (nothing to build)".to_owned(),
            Speedup::Factor(x) => format!("{x:.2}x"),
        };
        s.push_str(&format!(
            "{} of {} tasks dirty{}; makespan {} on {} workers (critical path {}), monolithic {}; speedup {}\n",
            dirty.len(),
            graph.len(),
            if fallback { " (unowned file: full rebuild)" } else { "" },
            human(sched.makespan_sec),
            workers,
            human(cp),
            human(report.monolithic_sec),
            speedup
        ));
        s
    });
    Ok(())
}

fn cmd_tailor(ctx: &Ctx, config: &Path) -> anyhow::Result<()> {
    let (m, tree) = (ctx.manifest()?, ctx.tree()?);
    let cfg = ReleaseConfig::from_json(&read(config)?)?;
    let out_dir = ctx.out_dir("tailor")?;
    let release = tailor_tree(&tree, &m, &cfg)?;
    release.write_dir(out_dir)?;
    ctx.report(json!({ "files": release.len(), "of": tree.len() }), || {
        format!("{} of {} files in the release, written to {}\n", release.len(), tree.len(), out_dir.display())
    });
    Ok(())
}

fn cmd_scaffold(ctx: &Ctx, id: &str, family: &str, apply: bool) -> anyhow::Result<()> {
    let (m, tree) = (ctx.manifest()?, ctx.tree()?);
    let plan = scaffold_soc(&m, id, family)?;
    let impact = impact_report(&plan, &build_trace_graph(&m, &tree), &m);
    if apply {
        for c in &plan.creates {
            let path = ctx.g.root.join(&c.path);
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(&path, &c.content).with_context(|| format!("writing {}", path.display()))?;
        }
        let mpath = ctx.manifest_path();
        fs::write(&mpath, &plan.manifest_after).with_context(|| format!("writing {}", mpath.display()))?;
    }
    ctx.report(json!({ "plan": plan, "impact": impact, "applied": apply }), || {
        let mut s = format!("soc {} from family {}: {} paths touched\n", plan.soc_id, plan.family, plan.impact_count);
        for c in &plan.creates {
            s.push_str(&format!("  create {}\n", c.path));
        }
        for e in &plan.edits {
            s.push_str(&format!("  edit   {}\n{}", e.path, e.patch));
        }
        if impact.is_isolated() {
            s.push_str("no feature shared with another SOC\n");
        } else {
            s.push_str(&format!("shares features with other SOCs: {}\n", join(&impact.cross_soc_overlap)));
        }
        if apply {
            s.push_str("applied\n");
        }
        s
    });
    if !impact.is_isolated() {
        return Err(Violation("scaffold touches features shared with other SOCs".into()).into());
    }
    Ok(())
}

fn cmd_pipeline(ctx: &Ctx, diff: &Path, workers: usize, cache_path: Option<&Path>, commit_id: Option<String>) -> anyhow::Result<()> {
    if workers == 0 {
        bail!("--workers must be at least 1");
    }
    let (m, tree, p) = (ctx.manifest()?, ctx.tree()?, read_patch(diff)?);
    let cache = match cache_path {
        Some(path) => load_cache(Some(path))?,
        None => {
            let mut c = Cache::default();
            c.record_all(&plan_tasks(&m, &tree)?);
            c
        }
    };
    let mut opts = PipelineOptions::for_manifest(&m, workers);
    opts.commit_id = commit_id;
    let r = run_pipeline(&tree, &m, &p, &cache, &opts)?;
    ctx.report(serde_json::to_value(&r)?, || {
        let mut s = String::new();
        if let Some(f) = &r.forward_patch {
            s.push_str(&format!("forward: {} files, +{} -{}\n", f.files, f.added, f.deleted));
        }
        s.push_str(&format!(
            "select:  {} tests ({:?}), {}\nbuild:   {} dirty tasks, makespan {}{}\nloop:    {} vs baseline {} (ratio {:.3})\n",
            r.selection.tests.len(),
            r.selection.reason,
            human(r.validation_sec),
            r.dirty_tasks.len(),
            human(r.build_makespan_sec),
            if r.build_fallback { " (full rebuild)" } else { "" },
            human(r.feedback_loop_sec),
            human(r.baseline_loop_sec),
            r.ratio
        ));
        s
    });
    if r.feedback_loop_sec > r.baseline_loop_sec {
        return Err(Violation("feedback loop exceeds the baseline".into()).into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::human;

    #[test]
    fn human_units() {
        assert_eq!(human(12.46), "12.5s");
        assert_eq!(human(250.0), "4m 10s");
        assert_eq!(human(3723.0), "1h 02m 03s");
    }
}
