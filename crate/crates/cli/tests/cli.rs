use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn dcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcc")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json stdout")
}

fn small_fixture(dir: &Path) {
    let spec = dir.join("spec.json");
    fs::write(&spec, r#"{"modules":8,"socs":2,"features":4,"tests":20,"commits":40,"community_ratio":0.2}"#).unwrap();
    let out = dcc(&["gen-fixture", "--seed", "3", "--spec", spec.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

const EDIT_M00: &str = "--- a/src/m00/f0.c\n+++ b/src/m00/f0.c\n@@ -1,1 +1,2 @@\n // src/m00/f0.c\n+int touched;\n";

#[test]
fn generated_fixture_validates_and_replays() {
    let tmp = TempDir::new().unwrap();
    small_fixture(tmp.path());
    let repo = tmp.path().join("repo");
    let root = repo.to_str().unwrap();
    assert_eq!(dcc(&["--root", root, "validate"]).status.code(), Some(0));

    let commits = tmp.path().join("commits.jsonl");
    let report = json(&dcc(&["--root", root, "--json", "check-roundtrip", "--commits", commits.to_str().unwrap()]));
    assert_eq!(report["steps_replayed"], 40);
    assert!(report["divergence"].is_null());

    let again = TempDir::new().unwrap();
    small_fixture(again.path());
    assert_eq!(fs::read(&commits).unwrap(), fs::read(again.path().join("commits.jsonl")).unwrap());
}

#[test]
fn broken_commit_stream_is_an_operational_error() {
    let tmp = TempDir::new().unwrap();
    small_fixture(tmp.path());
    let root = tmp.path().join("repo");
    let bad = r#"{"id":"x","timestamp":"2024-01-01T00:00:00Z","path_kind":"internal","files":["src/m00/f0.c"],"patch":"--- a/src/m00/f0.c\n+++ b/src/m00/f0.c\n@@ -1,1 +1,1 @@\n-nope\n+x\n"}"#;
    let path = write(tmp.path(), "bad.jsonl", &format!("{bad}\n"));
    let out = dcc(&["--root", root.to_str().unwrap(), "check-roundtrip", "--commits", &path]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn marker_violations_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let root = tmp.path();
    write(root, "dcc.json", r#"{"marker":{"begin":"@B","end":"@E"},"rules":[{"pattern":"m.c","visibility":"mixed"},{"pattern":"**","visibility":"open"}]}"#);
    write(root, "m.c", "a\n@B\nsecret\n");
    write(root, "o.c", "fine\n");
    let r = root.to_str().unwrap();
    assert_eq!(dcc(&["--root", r, "validate"]).status.code(), Some(2));
    assert_eq!(dcc(&["--root", r, "derive"]).status.code(), Some(2));

    write(root, "m.c", "a\n@B\nsecret\n@E\nb\n");
    let out = tmp.path().join("open");
    let report = json(&dcc(&["--root", r, "--json", "--out", out.to_str().unwrap(), "derive"]));
    assert_eq!(report["files"], 2);
    assert_eq!(fs::read_to_string(out.join("m.c")).unwrap(), "a\nb\n");

    let stripped = dcc(&["--root", r, "strip", root.join("m.c").to_str().unwrap()]);
    assert_eq!(String::from_utf8(stripped.stdout).unwrap(), "a\nb\n");
}

#[test]
fn patch_translation_both_ways() {
    let tmp = TempDir::new().unwrap();
    let root = tmp.path();
    write(root, "dcc.json", r#"{"marker":{"begin":"@B","end":"@E"},"rules":[{"pattern":"m.c","visibility":"mixed"},{"pattern":"**","visibility":"open"}]}"#);
    write(root, "m.c", "a\n@B\nh\n@E\nb\n");
    let r = root.to_str().unwrap();
    let internal = write(root, "i.patch", "--- a/m.c\n+++ b/m.c\n@@ -3,3 +3,3 @@\n h\n @E\n-b\n+B\n");
    let fwd = dcc(&["--root", r, "patch", "forward", &internal]);
    assert!(fwd.status.success());
    assert_eq!(String::from_utf8(fwd.stdout).unwrap(), "--- a/m.c\n+++ b/m.c\n@@ -1,2 +1,2 @@\n a\n-b\n+B\n");

    let open = write(root, "o.patch", "--- a/m.c\n+++ b/m.c\n@@ -1,2 +1,2 @@\n a\n-b\n+c\n");
    let back_path = root.join("back.patch");
    assert!(dcc(&["--root", r, "--out", back_path.to_str().unwrap(), "patch", "back", &open]).status.success());
    assert!(fs::read_to_string(back_path).unwrap().contains("+c\n"));

    // Ambiguous insertion next to a stripped region.
    let ambiguous = write(root, "amb.patch", "--- a/m.c\n+++ b/m.c\n@@ -1,2 +1,3 @@\n a\n+new\n b\n");
    assert_eq!(dcc(&["--root", r, "patch", "back", &ambiguous]).status.code(), Some(1));
}

#[test]
fn select_build_and_pipeline_on_fixture() {
    let tmp = TempDir::new().unwrap();
    small_fixture(tmp.path());
    let repo = tmp.path().join("repo");
    let root = repo.to_str().unwrap();
    let diff = write(tmp.path(), "d.patch", EDIT_M00);

    let sel = json(&dcc(&["--root", root, "--json", "select", "--diff", &diff]));
    assert_eq!(sel["reason"], "targeted");
    assert!(sel["ratio"].as_f64().unwrap() < 1.0);

    let plan = json(&dcc(&["--root", root, "--json", "build", "plan"]));
    assert_eq!(plan["tasks"].as_array().unwrap().len(), 8 + 4);

    let cache = tmp.path().join("cache.json");
    let cold = json(&dcc(&["--root", root, "--json", "build", "sim", "--workers", "1", "--cache", cache.to_str().unwrap(), "--save-cache"]));
    assert_eq!(cold["report"]["scheduled_sec"], cold["report"]["monolithic_sec"]);
    let warm = json(&dcc(&["--root", root, "--json", "build", "sim", "--workers", "1", "--cache", cache.to_str().unwrap()]));
    assert_eq!(warm["report"]["speedup"], "clean");

    let p = json(&dcc(&["--root", root, "--json", "pipeline", "--diff", &diff, "--workers", "8", "--commit-id", "c1"]));
    assert_eq!(p["commit_id"], "c1");
    assert!(p["feedback_loop_sec"].as_f64().unwrap() <= p["baseline_loop_sec"].as_f64().unwrap());

    let empty = write(tmp.path(), "empty.patch", "");
    let p = json(&dcc(&["--root", root, "--json", "pipeline", "--diff", &empty]));
    assert_eq!(p["ratio"], 0.0);

    let unmapped = write(tmp.path(), "readme.patch", "--- a/README.md\n+++ b/README.md\n@@ -1,1 +1,1 @@\n-Synthetic firmware tree.\n+Changed.\n");
    let p = json(&dcc(&["--root", root, "--json", "pipeline", "--diff", &unmapped]));
    assert_eq!(p["ratio"], 1.0);
    assert_eq!(p["build_fallback"], true);
}

#[test]
fn tailor_and_scaffold() {
    let tmp = TempDir::new().unwrap();
    small_fixture(tmp.path());
    let repo = tmp.path().join("repo");
    let root = repo.to_str().unwrap();

    let cfg = write(tmp.path(), "cfg.json", r#"{"socs":["s1"]}"#);
    let rel = tmp.path().join("rel");
    let out = json(&dcc(&["--root", root, "--json", "--out", rel.to_str().unwrap(), "tailor", "--config", &cfg]));
    assert!(out["files"].as_u64().unwrap() > 0);
    assert!(rel.join("soc/s1").exists() && !rel.join("soc/s2").exists());
    let bad = write(tmp.path(), "bad.json", r#"{"socs":["nope"]}"#);
    assert_eq!(dcc(&["--root", root, "--out", rel.to_str().unwrap(), "tailor", "--config", &bad]).status.code(), Some(1));

    let plan = json(&dcc(&["--root", root, "--json", "scaffold-soc", "--id", "s7", "--family", "s1", "--apply"]));
    assert_eq!(plan["plan"]["impact_count"], 4);
    assert_eq!(plan["impact"]["cross_soc_overlap"].as_array().unwrap().len(), 0);
    assert!(repo.join("soc/s7/init.c").exists());
    assert!(fs::read_to_string(repo.join("dcc.json")).unwrap().contains("soc/s7/**"));
    assert_eq!(dcc(&["--root", root, "validate"]).status.code(), Some(0));
    assert_eq!(dcc(&["--root", root, "scaffold-soc", "--id", "s7", "--family", "s1"]).status.code(), Some(1));
    assert_eq!(dcc(&["--root", root, "scaffold-soc", "--id", "s8", "--family", "zz"]).status.code(), Some(1));
}

#[test]
fn metrics_commands() {
    let tmp = TempDir::new().unwrap();
    let hist = write(
        tmp.path(),
        "h.jsonl",
        concat!(
            r#"{"id":"a","timestamp":"2024-03-01T00:00:00Z","path_kind":"open","merged_at":"2024-03-02T00:00:00Z"}"#,
            "\n",
            r#"{"id":"b","timestamp":"2024-03-11T00:00:00Z","path_kind":"internal","merged_at":"2024-04-06T00:00:00Z"}"#,
            "\n",
            r#"{"id":"c","timestamp":"2024-03-31T00:00:00Z","path_kind":"open","merged_at":"2024-04-03T00:00:00Z"}"#,
            "\n"
        ),
    );
    let lag = json(&dcc(&["--json", "metrics", "lag", "--history", &hist]));
    assert_eq!(lag["stats"]["median_sec"], 259_200.0);
    assert_eq!(lag["unmerged"], 0);
    let late = json(&dcc(&[
        "--json", "metrics", "late", "--history", &hist, "--milestone", "2024-03-13T00:00:00Z", "--milestone", "2024-03-21T00:00:00Z",
    ]));
    assert_eq!(late["late_ratio"], 2.0 / 3.0);
    let human = dcc(&["metrics", "lag", "--history", &hist]);
    assert!(String::from_utf8(human.stdout).unwrap().contains("median 72h 00m 00s"));
    let garbage = write(tmp.path(), "g.jsonl", "not json\n");
    assert_eq!(dcc(&["metrics", "lag", "--history", &garbage]).status.code(), Some(1));
}
