//! Oracles shared by the integration tests. Deliberately independent of the
//! library: globs are matched by a naive recursive matcher and rules are
//! resolved by a linear scan over the raw manifest JSON.

#![allow(dead_code)]

use std::collections::BTreeSet;

use serde_json::Value;

/// `**` spans whole segments (zero or more), `*` and `?` stay inside one.
pub fn glob_match(pattern: &str, path: &str) -> bool {
    let pat: Vec<&str> = pattern.split('/').collect();
    let segs: Vec<&str> = path.split('/').collect();
    match_segments(&pat, &segs)
}

fn match_segments(pat: &[&str], segs: &[&str]) -> bool {
    match pat.split_first() {
        None => segs.is_empty(),
        Some((&"**", rest)) => (0..=segs.len()).any(|k| match_segments(rest, &segs[k..])),
        Some((p, rest)) => match segs.split_first() {
            Some((s, srest)) => match_segment(p.as_bytes(), s.as_bytes()) && match_segments(rest, srest),
            None => false,
        },
    }
}

fn match_segment(p: &[u8], s: &[u8]) -> bool {
    match p.split_first() {
        None => s.is_empty(),
        Some((b'*', rest)) => (0..=s.len()).any(|k| match_segment(rest, &s[k..])),
        Some((b'?', rest)) => !s.is_empty() && match_segment(rest, &s[1..]),
        Some((c, rest)) => s.first() == Some(c) && match_segment(rest, &s[1..]),
    }
}

/// Visibility by first matching rule; `internal` when none matches.
pub fn oracle_visibility(manifest_json: &Value, path: &str) -> String {
    manifest_json["rules"]
        .as_array()
        .into_iter()
        .flatten()
        .find(|r| glob_match(r["pattern"].as_str().unwrap(), path))
        .map(|r| r["visibility"].as_str().unwrap().to_owned())
        .unwrap_or_else(|| "internal".to_owned())
}

/// Brute force over every (file, feature, test) triple. A touched file
/// without any feature selects the whole suite.
pub fn oracle_tests(manifest_json: &Value, touched: &BTreeSet<String>) -> BTreeSet<String> {
    let features = manifest_json["features"].as_array().cloned().unwrap_or_default();
    let tests = manifest_json["tests"].as_array().cloned().unwrap_or_default();
    let mut out = BTreeSet::new();
    for file in touched {
        let mut mapped = false;
        for f in &features {
            let covers = f["globs"].as_array().unwrap().iter().any(|g| glob_match(g.as_str().unwrap(), file));
            if !covers {
                continue;
            }
            mapped = true;
            for t in &tests {
                if t["features"].as_array().unwrap().iter().any(|x| x == &f["id"]) {
                    out.insert(t["id"].as_str().unwrap().to_owned());
                }
            }
        }
        if !mapped {
            return tests.iter().map(|t| t["id"].as_str().unwrap().to_owned()).collect();
        }
    }
    out
}

/// A schedulable task for the exhaustive oracle. Clean tasks take no
/// worker and no time.
#[derive(Debug, Clone)]
pub struct OTask {
    pub cost: f64,
    pub dirty: bool,
    pub deps: Vec<usize>,
}

/// Longest dirty-cost path.
pub fn oracle_critical_path(tasks: &[OTask]) -> f64 {
    let mut finish = vec![0.0f64; tasks.len()];
    // Tasks are indexed in a topological order (deps point to lower indices).
    for i in 0..tasks.len() {
        let start = tasks[i].deps.iter().map(|&d| finish[d]).fold(0.0, f64::max);
        finish[i] = start + if tasks[i].dirty { tasks[i].cost } else { 0.0 };
    }
    finish.into_iter().fold(0.0, f64::max)
}

/// Optimal makespan: the best serial schedule-generation result over every
/// topological order. Each task starts at the earliest instant at or after
/// its predecessors finish where fewer than `workers` tasks run throughout
/// its duration. Active schedules include an optimal one, so the minimum
/// over all orders is the optimum.
pub fn oracle_optimal_makespan(tasks: &[OTask], workers: usize) -> f64 {
    let n = tasks.len();
    let mut best = f64::INFINITY;
    let mut placed: Vec<Option<(f64, f64)>> = vec![None; n];
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    search(tasks, workers, &mut placed, &mut intervals, 0.0, &mut best);
    best
}

fn search(
    tasks: &[OTask],
    workers: usize,
    placed: &mut Vec<Option<(f64, f64)>>,
    intervals: &mut Vec<(f64, f64)>,
    current: f64,
    best: &mut f64,
) {
    if current >= *best {
        return;
    }
    if placed.iter().all(Option::is_some) {
        *best = current;
        return;
    }
    for i in 0..tasks.len() {
        if placed[i].is_some() || tasks[i].deps.iter().any(|&d| placed[d].is_none()) {
            continue;
        }
        let ready = tasks[i].deps.iter().map(|&d| placed[d].unwrap().1).fold(0.0, f64::max);
        let (start, end) = if tasks[i].dirty {
            let s = earliest_slot(intervals, ready, tasks[i].cost, workers);
            (s, s + tasks[i].cost)
        } else {
            (ready, ready)
        };
        placed[i] = Some((start, end));
        let pushed = tasks[i].dirty && tasks[i].cost > 0.0;
        if pushed {
            intervals.push((start, end));
        }
        search(tasks, workers, placed, intervals, current.max(end), best);
        if pushed {
            intervals.pop();
        }
        placed[i] = None;
    }
}

fn earliest_slot(intervals: &[(f64, f64)], ready: f64, cost: f64, workers: usize) -> f64 {
    if cost == 0.0 {
        return ready;
    }
    let mut candidates: Vec<f64> = vec![ready];
    candidates.extend(intervals.iter().map(|iv| iv.1).filter(|&e| e > ready));
    candidates.sort_by(f64::total_cmp);
    for t in candidates {
        let end = t + cost;
        // Concurrency only rises at interval starts, so checking `t` and
        // every start inside the window is enough.
        let mut points = vec![t];
        points.extend(intervals.iter().map(|iv| iv.0).filter(|&s| s > t && s < end));
        let fits = points
            .iter()
            .all(|&p| intervals.iter().filter(|iv| iv.0 <= p && p < iv.1).count() < workers);
        if fits {
            return t;
        }
    }
    unreachable!("the latest finish time always fits")
}
