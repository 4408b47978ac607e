//! Placement policies and their monthly cost breakdowns.
//!
//! Storage is charged once per period at the tier's monthly GB rate
//! (sizes are megabytes, so sums divide by 1024). Compute is charged per
//! access: every view of a non-stored GOP re-transcodes it on a VM billed
//! hourly. Hybrid policies pay storage for what they keep and compute for
//! the remainder.
//!
//! The five policies:
//!
//! * `FullPreTranscoding` — everything stored in the standard tier.
//! * `FullReTranscoding` — nothing stored; every view pays a transcode.
//! * `PartialPreTranscoding` — hot GOPs of FAV videos stored in the
//!   standard tier; everything else re-transcoded.
//! * `VideoClustering` — FAV videos clustered by video views (k = 4) and
//!   stored whole, one tier per cluster; non-FAV videos re-transcoded.
//! * `GopClustering` — hot GOPs of FAV videos clustered by GOP views
//!   (k = 4) and stored, one tier per cluster; all remaining GOPs
//!   re-transcoded.

use crate::cluster::{assign_tiers, kmeans_1d_exact, kmeans_lloyd, ClusterError, Clustering};
use crate::pricing::{PricingCatalog, TierId};
use crate::repo::{FavSelection, Gop, GopKey, Repository};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub const MB_PER_GB: f64 = 1024.0;
pub const SECONDS_PER_HOUR: f64 = 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PolicyId {
    #[serde(rename = "full-pre")]
    FullPreTranscoding,
    #[serde(rename = "full-re")]
    FullReTranscoding,
    #[serde(rename = "partial-pre")]
    PartialPreTranscoding,
    #[serde(rename = "video-clustering")]
    VideoClustering,
    #[serde(rename = "gop-clustering")]
    GopClustering,
}

impl PolicyId {
    pub const ALL: [PolicyId; 5] = [
        PolicyId::FullPreTranscoding,
        PolicyId::FullReTranscoding,
        PolicyId::PartialPreTranscoding,
        PolicyId::VideoClustering,
        PolicyId::GopClustering,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PolicyId::FullPreTranscoding => "full-pre",
            PolicyId::FullReTranscoding => "full-re",
            PolicyId::PartialPreTranscoding => "partial-pre",
            PolicyId::VideoClustering => "video-clustering",
            PolicyId::GopClustering => "gop-clustering",
        }
    }
}

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyId {
    type Err = CostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full-pre" => Ok(PolicyId::FullPreTranscoding),
            "full-re" => Ok(PolicyId::FullReTranscoding),
            "partial-pre" => Ok(PolicyId::PartialPreTranscoding),
            "video-clustering" => Ok(PolicyId::VideoClustering),
            "gop-clustering" => Ok(PolicyId::GopClustering),
            other => Err(CostError::UnknownPolicy(other.to_string())),
        }
    }
}

/// Which solver the clustering policies run, and with what k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub k: usize,
    pub method: ClusterMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterMethod {
    /// Exact dynamic-programming solver; deterministic, the default.
    Exact,
    /// Seeded Lloyd iterations.
    Lloyd { max_iters: usize, seed: u64 },
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig { k: 4, method: ClusterMethod::Exact }
    }
}

impl ClusterConfig {
    /// Runs the configured solver.
    pub fn run(&self, values: &[f64]) -> Result<Clustering, ClusterError> {
        match self.method {
            ClusterMethod::Exact => kmeans_1d_exact(values, self.k),
            ClusterMethod::Lloyd { max_iters, seed } => {
                kmeans_lloyd(values, self.k, max_iters, seed)
            }
        }
    }
}

/// Per-policy cost for one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub policy: PolicyId,
    pub storage_usd: f64,
    pub compute_usd: f64,
    pub total_usd: f64,
    /// Indexed by [`TierId::slot`]: standard, standard-ia, one-zone-ia,
    /// glacier.
    pub per_tier_usd: [f64; 4],
    /// Per-cluster storage cost, indexed by cluster label; empty for the
    /// non-clustering policies.
    pub per_cluster_usd: Vec<f64>,
}

impl CostBreakdown {
    pub fn per_tier(&self, id: TierId) -> f64 {
        self.per_tier_usd[id.slot()]
    }

    /// Checks the structural invariants: totals add up, per-tier costs sum
    /// to storage, nothing is negative.
    pub fn validate(&self) -> Result<(), CostError> {
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-12);
        if !rel(self.total_usd, self.storage_usd + self.compute_usd) {
            return Err(CostError::BrokenInvariant("total != storage + compute".into()));
        }
        let tier_sum: f64 = self.per_tier_usd.iter().sum();
        if !rel(self.storage_usd, tier_sum) {
            return Err(CostError::BrokenInvariant("storage != sum of per-tier".into()));
        }
        if self.storage_usd < 0.0
            || self.compute_usd < 0.0
            || self.total_usd < 0.0
            || self.per_tier_usd.iter().any(|&v| v < 0.0)
            || self.per_cluster_usd.iter().any(|&v| v < 0.0)
        {
            return Err(CostError::BrokenInvariant("negative cost component".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CostError {
    #[error("gop sizes must be non-negative")]
    NegativeSize,
    #[error("no cost breakdowns given")]
    EmptyInput,
    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),
    #[error("selection does not match repository: {0}")]
    InconsistentSelection(String),
    #[error("cost invariant violated: {0}")]
    BrokenInvariant(String),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

/// Monthly storage cost of one cluster: `sum(sizes_mb) * price / 1024`.
pub fn cluster_storage_cost(gop_sizes_mb: &[f64], tier_price: f64) -> Result<f64, CostError> {
    if gop_sizes_mb.iter().any(|&s| s < 0.0) {
        return Err(CostError::NegativeSize);
    }
    Ok(gop_sizes_mb.iter().sum::<f64>() * tier_price / MB_PER_GB)
}

/// Compute cost of serving every view of a GOP by re-transcoding it.
pub fn transcode_cost(gop: &Gop, vm_hourly_rate: f64) -> f64 {
    gop.views as f64 * gop.transcode_time_s * vm_hourly_rate / SECONDS_PER_HOUR
}

/// Sum of totals across breakdowns.
pub fn total_cost(breakdowns: &[CostBreakdown]) -> Result<f64, CostError> {
    if breakdowns.is_empty() {
        return Err(CostError::EmptyInput);
    }
    Ok(breakdowns.iter().map(|b| b.total_usd).sum())
}

fn check_selection(repo: &Repository, favs: &FavSelection) -> Result<(), CostError> {
    let map = repo.video_map();
    for id in &favs.fav_video_ids {
        if !map.contains_key(id) {
            return Err(CostError::InconsistentSelection(format!(
                "fav video {id} is not in the repository"
            )));
        }
    }
    for key in &favs.fav_gops {
        if !favs.fav_video_ids.contains(&key.video) {
            return Err(CostError::InconsistentSelection(format!(
                "fav gop of video {} outside the fav video set",
                key.video
            )));
        }
        let video = map[&key.video];
        if key.index >= video.gops.len() {
            return Err(CostError::InconsistentSelection(format!(
                "fav gop index {} out of range for video {}",
                key.index, key.video
            )));
        }
    }
    Ok(())
}

/// Evaluates one placement policy against a repository and FAV selection.
pub fn evaluate_policy(
    policy: PolicyId,
    repo: &Repository,
    favs: &FavSelection,
    catalog: &PricingCatalog,
    cluster_cfg: &ClusterConfig,
) -> Result<CostBreakdown, CostError> {
    check_selection(repo, favs)?;

    let mut storage_usd = 0.0;
    let mut compute_usd = 0.0;
    let mut per_tier_usd = [0.0; 4];
    let mut per_cluster_usd = Vec::new();
    let standard = catalog.by_rank(1);

    match policy {
        PolicyId::FullPreTranscoding => {
            let sizes: Vec<f64> =
                repo.videos.iter().flat_map(|v| v.gops.iter().map(|g| g.size_mb)).collect();
            let cost = cluster_storage_cost(&sizes, standard.price_per_gb_month)?;
            storage_usd = cost;
            per_tier_usd[standard.id.slot()] = cost;
        }
        PolicyId::FullReTranscoding => {
            for v in &repo.videos {
                for g in &v.gops {
                    compute_usd += transcode_cost(g, catalog.vm_hourly_rate);
                }
            }
        }
        PolicyId::PartialPreTranscoding => {
            let mut stored_sizes = Vec::new();
            for v in &repo.videos {
                let fav_video = favs.is_fav_video(v.id);
                for (i, g) in v.gops.iter().enumerate() {
                    if fav_video && favs.is_fav_gop(GopKey { video: v.id, index: i }) {
                        stored_sizes.push(g.size_mb);
                    } else {
                        compute_usd += transcode_cost(g, catalog.vm_hourly_rate);
                    }
                }
            }
            let cost = cluster_storage_cost(&stored_sizes, standard.price_per_gb_month)?;
            storage_usd = cost;
            per_tier_usd[standard.id.slot()] = cost;
        }
        PolicyId::VideoClustering => {
            // Whole FAV videos, clustered by their aggregate views.
            let mut fav_videos: Vec<_> =
                repo.videos.iter().filter(|v| favs.is_fav_video(v.id)).collect();
            fav_videos.sort_by_key(|v| v.id);
            let values: Vec<f64> = fav_videos.iter().map(|v| v.video_views as f64).collect();
            let clustering = cluster_cfg.run(&values)?;
            let assignment = assign_tiers(&clustering, catalog)?;

            let mut cluster_sizes: Vec<Vec<f64>> = vec![Vec::new(); clustering.k];
            for (v, &label) in fav_videos.iter().zip(&clustering.labels) {
                cluster_sizes[label].push(v.total_size_mb());
            }
            for (label, sizes) in cluster_sizes.iter().enumerate() {
                let tier = assignment.tier_of(label);
                let cost = cluster_storage_cost(sizes, catalog.tier(tier).price_per_gb_month)?;
                per_cluster_usd.push(cost);
                per_tier_usd[tier.slot()] += cost;
                storage_usd += cost;
            }
            for v in repo.videos.iter().filter(|v| !favs.is_fav_video(v.id)) {
                for g in &v.gops {
                    compute_usd += transcode_cost(g, catalog.vm_hourly_rate);
                }
            }
        }
        PolicyId::GopClustering => {
            // Hot GOPs of FAV videos, clustered by per-GOP views.
            let map = repo.video_map();
            let fav_keys: Vec<GopKey> = favs.fav_gops.iter().copied().collect();
            let values: Vec<f64> = fav_keys
                .iter()
                .map(|k| map[&k.video].gops[k.index].views as f64)
                .collect();
            let clustering = cluster_cfg.run(&values)?;
            let assignment = assign_tiers(&clustering, catalog)?;

            let mut cluster_sizes: Vec<Vec<f64>> = vec![Vec::new(); clustering.k];
            for (key, &label) in fav_keys.iter().zip(&clustering.labels) {
                cluster_sizes[label].push(map[&key.video].gops[key.index].size_mb);
            }
            for (label, sizes) in cluster_sizes.iter().enumerate() {
                let tier = assignment.tier_of(label);
                let cost = cluster_storage_cost(sizes, catalog.tier(tier).price_per_gb_month)?;
                per_cluster_usd.push(cost);
                per_tier_usd[tier.slot()] += cost;
                storage_usd += cost;
            }
            for v in &repo.videos {
                let fav_video = favs.is_fav_video(v.id);
                for (i, g) in v.gops.iter().enumerate() {
                    let stored = fav_video && favs.is_fav_gop(GopKey { video: v.id, index: i });
                    if !stored {
                        compute_usd += transcode_cost(g, catalog.vm_hourly_rate);
                    }
                }
            }
        }
    }

    let breakdown = CostBreakdown {
        policy,
        storage_usd,
        compute_usd,
        total_usd: storage_usd + compute_usd,
        per_tier_usd,
        per_cluster_usd,
    };
    breakdown.validate()?;
    Ok(breakdown)
}
