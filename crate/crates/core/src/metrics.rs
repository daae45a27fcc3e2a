//! Engineering KPIs over commit-history logs.

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use crate::dualsync::PathKind;
use crate::error::{Error, Result};

pub const DEFAULT_WINDOW_DAYS: f64 = 14.0;

/// One line of the JSON-lines history log. Unknown fields are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    pub path_kind: PathKind,
    #[serde(default)]
    pub files: Vec<String>,
    /// When the commit landed on the other development path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub merged_at: Option<DateTime<Utc>>,
}

impl CommitRecord {
    pub fn lag(&self) -> Option<Duration> {
        self.merged_at.map(|m| m - self.timestamp)
    }
}

pub fn parse_history(text: &str) -> Result<Vec<CommitRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: CommitRecord =
            serde_json::from_str(line).map_err(|e| Error::Parse(format!("history line {}: {e}", i + 1)))?;
        if rec.merged_at.is_some_and(|m| m < rec.timestamp) {
            return Err(Error::Parse(format!("history line {}: commit `{}` merged before it was made", i + 1, rec.id)));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Fraction of commits made within `window_days` before (and including) any
/// milestone. A commit inside several windows counts once.
pub fn late_commit_ratio(history: &[CommitRecord], milestones: &[DateTime<Utc>], window_days: f64) -> f64 {
    if history.is_empty() {
        return 0.0;
    }
    let window = Duration::seconds((window_days * 86_400.0).round() as i64);
    let late = history
        .iter()
        .filter(|c| milestones.iter().any(|&m| m - window <= c.timestamp && c.timestamp <= m))
        .count();
    late as f64 / history.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagSummary {
    pub mean_sec: f64,
    pub median_sec: f64,
    pub max_sec: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeLag {
    pub merged: usize,
    pub unmerged: usize,
    /// Absent when no commit has been merged.
    pub stats: Option<LagSummary>,
}

pub fn merge_lag(history: &[CommitRecord]) -> MergeLag {
    let mut lags: Vec<i64> = history.iter().filter_map(|c| c.lag()).map(|d| d.num_seconds()).collect();
    lags.sort_unstable();
    let merged = lags.len();
    let unmerged = history.len() - merged;
    let stats = (!lags.is_empty()).then(|| {
        let n = lags.len();
        let median_sec = if n % 2 == 1 {
            lags[n / 2] as f64
        } else {
            (lags[n / 2 - 1] + lags[n / 2]) as f64 / 2.0
        };
        LagSummary {
            mean_sec: lags.iter().sum::<i64>() as f64 / n as f64,
            median_sec,
            max_sec: lags[n - 1],
        }
    });
    MergeLag { merged, unmerged, stats }
}
