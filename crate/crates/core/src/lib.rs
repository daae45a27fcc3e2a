//! Delivery-cost-control tooling for a dimension-tagged single code base.
//!
//! One internal tree, tagged along visibility / OS / SOC / IP / feature /
//! usage axes by a manifest, drives everything here:
//!
//! - [`dualsync`] derives the open-source subset and translates patches in
//!   both directions between the internal and open trees.
//! - [`smartval`] selects tests for a change from a file → feature → test graph.
//! - [`buildsched`] plans module build tasks, invalidates them by content
//!   hash and list-schedules the dirty ones on logical workers.
//! - [`tailor`] filters trees for release configurations and scaffolds new SOCs.
//! - [`pipeline`], [`metrics`] and [`fixture`] compose the stages, compute
//!   engineering KPIs over commit logs and generate seeded workloads.

pub mod buildsched;
pub mod dualsync;
pub mod error;
pub mod fixture;
pub mod metrics;
pub mod model;
pub mod patch;
pub mod pipeline;
pub mod smartval;
pub mod tailor;
pub mod tree;

pub use error::{Error, MarkerError, Result};
pub use model::{load_manifest, Manifest, TagAxes, Visibility};
pub use patch::Patch;
pub use tree::SourceTree;
