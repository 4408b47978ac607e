//! Cost modeling and placement simulation for segmented video streams in
//! tiered cloud storage.
//!
//! A video repository is modeled as a collection of videos, each a sequence
//! of independently storable GOPs (groups of pictures). The library answers
//! one question: given per-GOP view counts for the last accounting period,
//! what does each placement policy cost per month?
//!
//! The pieces:
//!
//! * [`pricing`] — the four-tier storage catalog and VM compute rate.
//! * [`repo`] — videos, GOPs, and selection of frequently accessed content.
//! * [`synth`] — deterministic long-tail workload synthesis.
//! * [`cluster`] — 1-D k-means (exact and Lloyd) and cluster→tier mapping.
//! * [`cost`] — the five placement policies and their cost breakdowns.
//! * [`sweep`] — experiment grids over FAV percentages, with CSV reports.

pub mod cluster;
pub mod cost;
pub mod pricing;
pub mod repo;
pub mod rng;
pub mod sweep;
pub mod synth;

pub use cluster::{assign_tiers, kmeans_1d_exact, kmeans_lloyd, Clustering, ClusterError, TierAssignment};
pub use cost::{
    cluster_storage_cost, evaluate_policy, total_cost, transcode_cost, ClusterConfig,
    ClusterMethod, CostBreakdown, CostError, PolicyId,
};
pub use pricing::{default_catalog, load_catalog, CatalogError, PricingCatalog, StorageTier, TierId};
pub use repo::{FavSelection, Gop, GopKey, RepoError, RepoTotals, Repository, Video, VideoId};
pub use rng::SplitMix64;
pub use sweep::{
    cluster_scatter_csv, compute_reduction, render_report, run_sweep, Aggregate, Report,
    SweepError, SweepResult, SweepRow, SweepSpec,
};
pub use synth::{synthesize, SynthError, SynthSpec};

/// Strictly positive and not NaN.
pub(crate) fn positive(v: f64) -> bool {
    v > 0.0
}
