//! Video repository model.
//!
//! The unit of every placement decision is the GOP: a group of pictures that
//! can be stored, dropped, and re-transcoded independently of the rest of its
//! video. Frame types and macroblocks below the GOP are deliberately not
//! modeled. A repository is a flat list of videos, each an ordered GOP
//! sequence, with per-period view counts at both levels.
//!
//! Repositories serialize to a line-delimited JSON file, one video per line:
//!
//! ```text
//! {"id":1,"video_views":4000,"gops":[{"size_mb":12.5,"views":4000,"transcode_time_s":0.4}, ...]}
//! ```
//!
//! Numbers round-trip exactly (shortest-representation float encoding), so a
//! written file reloads to an equal repository.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;
use thiserror::Error;

/// Accounting period length that makes one period equal one month of the
/// storage rates.
pub const DEFAULT_PERIOD_DAYS: u32 = 30;

/// Fraction of a video's peak GOP views a GOP must reach to count as
/// frequently accessed within a FAV video.
pub const DEFAULT_GOP_HOTNESS_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VideoId(pub u64);

impl std::fmt::Display for VideoId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// One group of pictures. Position within its video is the index of this
/// entry in [`Video::gops`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gop {
    /// Stored size in megabytes (all kept formats folded together).
    pub size_mb: f64,
    /// Accesses in the last period.
    pub views: u64,
    /// VM seconds to regenerate this GOP on demand.
    pub transcode_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Video {
    pub id: VideoId,
    /// Accesses to the video in the last period; at least the peak GOP views.
    pub video_views: u64,
    pub gops: Vec<Gop>,
}

impl Video {
    pub fn total_size_mb(&self) -> f64 {
        self.gops.iter().map(|g| g.size_mb).sum()
    }

    pub fn max_gop_views(&self) -> u64 {
        self.gops.iter().map(|g| g.views).max().unwrap_or(0)
    }
}

/// Identity of a GOP across the whole repository.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GopKey {
    pub video: VideoId,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Repository {
    pub videos: Vec<Video>,
    /// Seed the repository was synthesized from, when it was synthesized.
    pub synthesis_seed: Option<u64>,
    pub period_days: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepoTotals {
    pub total_size_mb: f64,
    pub total_views: u64,
    pub gop_count: usize,
}

/// Outcome of FAV selection: the top videos by views, and within them the
/// GOPs above the hotness threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct FavSelection {
    pub fav_video_ids: BTreeSet<VideoId>,
    pub fav_gops: BTreeSet<GopKey>,
    pub fav_fraction: f64,
}

impl FavSelection {
    pub fn is_fav_video(&self, id: VideoId) -> bool {
        self.fav_video_ids.contains(&id)
    }

    pub fn is_fav_gop(&self, key: GopKey) -> bool {
        self.fav_gops.contains(&key)
    }
}

#[derive(Debug, Error)]
pub enum RepoError {
    #[error("repository has no videos")]
    EmptyRepository,
    #[error("fav_fraction must be in (0, 1], got {0}")]
    InvalidFavFraction(f64),
    #[error("gop hotness threshold must be in [0, 1], got {0}")]
    InvalidHotnessThreshold(f64),
    #[error("duplicate video id {0}")]
    DuplicateVideoId(VideoId),
    #[error("video {0} has no gops")]
    EmptyVideo(VideoId),
    #[error("video {video} gop {index}: {reason}")]
    InvalidGop { video: VideoId, index: usize, reason: String },
    #[error("video {0}: video_views is below its peak gop views")]
    ViewsBelowPeak(VideoId),
    #[error("period_days must be positive")]
    BadPeriod,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
}

impl Repository {
    /// Builds and validates a repository.
    pub fn new(
        videos: Vec<Video>,
        synthesis_seed: Option<u64>,
        period_days: u32,
    ) -> Result<Self, RepoError> {
        let repo = Repository { videos, synthesis_seed, period_days };
        repo.validate()?;
        Ok(repo)
    }

    pub fn validate(&self) -> Result<(), RepoError> {
        if self.period_days == 0 {
            return Err(RepoError::BadPeriod);
        }
        let mut seen = BTreeSet::new();
        for v in &self.videos {
            if !seen.insert(v.id) {
                return Err(RepoError::DuplicateVideoId(v.id));
            }
            if v.gops.is_empty() {
                return Err(RepoError::EmptyVideo(v.id));
            }
            for (i, g) in v.gops.iter().enumerate() {
                if !crate::positive(g.size_mb) {
                    return Err(RepoError::InvalidGop {
                        video: v.id,
                        index: i,
                        reason: "size_mb must be positive".into(),
                    });
                }
                if !crate::positive(g.transcode_time_s) {
                    return Err(RepoError::InvalidGop {
                        video: v.id,
                        index: i,
                        reason: "transcode_time_s must be positive".into(),
                    });
                }
            }
            if v.video_views < v.max_gop_views() {
                return Err(RepoError::ViewsBelowPeak(v.id));
            }
        }
        Ok(())
    }

    pub fn video(&self, id: VideoId) -> Option<&Video> {
        self.videos.iter().find(|v| v.id == id)
    }

    /// Lookup map over videos; build once when iterating selections.
    pub fn video_map(&self) -> BTreeMap<VideoId, &Video> {
        self.videos.iter().map(|v| (v.id, v)).collect()
    }

    /// Exact sums over every GOP in the repository.
    pub fn totals(&self) -> RepoTotals {
        let mut total_size_mb = 0.0;
        let mut total_views = 0u64;
        let mut gop_count = 0usize;
        for v in &self.videos {
            for g in &v.gops {
                total_size_mb += g.size_mb;
                total_views += g.views;
                gop_count += 1;
            }
        }
        RepoTotals { total_size_mb, total_views, gop_count }
    }

    /// Selects the frequently accessed videos and, inside them, the
    /// frequently accessed GOPs.
    ///
    /// The top `ceil(fav_fraction * N)` videos by `video_views` are FAV, ties
    /// broken by ascending id. Within a FAV video, a GOP qualifies when its
    /// views reach `gop_hotness_threshold` times the video's peak GOP views,
    /// so a threshold of zero selects every GOP of every FAV video.
    pub fn select_favs(
        &self,
        fav_fraction: f64,
        gop_hotness_threshold: f64,
    ) -> Result<FavSelection, RepoError> {
        if self.videos.is_empty() {
            return Err(RepoError::EmptyRepository);
        }
        if !(fav_fraction > 0.0 && fav_fraction <= 1.0) {
            return Err(RepoError::InvalidFavFraction(fav_fraction));
        }
        if !(0.0..=1.0).contains(&gop_hotness_threshold) {
            return Err(RepoError::InvalidHotnessThreshold(gop_hotness_threshold));
        }

        let n = self.videos.len();
        // Guard against products like 0.2*55 landing one ulp above the
        // integer and ceiling one video too far.
        let k = ((fav_fraction * n as f64) - 1e-9).ceil().max(1.0) as usize;
        let k = k.min(n);

        let mut order: Vec<&Video> = self.videos.iter().collect();
        order.sort_by(|a, b| b.video_views.cmp(&a.video_views).then(a.id.cmp(&b.id)));

        let mut fav_video_ids = BTreeSet::new();
        let mut fav_gops = BTreeSet::new();
        for v in &order[..k] {
            fav_video_ids.insert(v.id);
            let cutoff = gop_hotness_threshold * v.max_gop_views() as f64;
            for (i, g) in v.gops.iter().enumerate() {
                if g.views as f64 >= cutoff {
                    fav_gops.insert(GopKey { video: v.id, index: i });
                }
            }
        }
        Ok(FavSelection { fav_video_ids, fav_gops, fav_fraction })
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), RepoError> {
        for v in &self.videos {
            let line = serde_json::to_string(v).expect("video serializes");
            out.write_all(line.as_bytes())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn write_file(&self, path: &Path) -> Result<(), RepoError> {
        let file = std::fs::File::create(path)?;
        self.write_jsonl(std::io::BufWriter::new(file))
    }

    /// Reads a repository file. The file carries no synthesis metadata, so
    /// the seed comes back as `None` and the period as the default.
    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Self, RepoError> {
        let mut videos = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let video: Video = serde_json::from_str(&line)
                .map_err(|source| RepoError::Parse { line: i + 1, source })?;
            videos.push(video);
        }
        Repository::new(videos, None, DEFAULT_PERIOD_DAYS)
    }

    pub fn from_file(path: &Path) -> Result<Self, RepoError> {
        let file = std::fs::File::open(path)?;
        Self::read_jsonl(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gop(size_mb: f64, views: u64) -> Gop {
        Gop { size_mb, views, transcode_time_s: 1.0 }
    }

    fn video(id: u64, video_views: u64, gop_views: &[u64]) -> Video {
        Video {
            id: VideoId(id),
            video_views,
            gops: gop_views.iter().map(|&v| gop(10.0, v)).collect(),
        }
    }

    fn ten_video_repo() -> Repository {
        // video_views 100, 200, ..., 1000
        let videos = (1..=10).map(|i| video(i, i * 100, &[i * 100, 1])).collect();
        Repository::new(videos, None, 30).unwrap()
    }

    #[test]
    fn top_k_by_views() {
        let repo = ten_video_repo();
        let favs = repo.select_favs(0.3, 0.0).unwrap();
        let ids: Vec<u64> = favs.fav_video_ids.iter().map(|v| v.0).collect();
        assert_eq!(ids, vec![8, 9, 10]);
    }

    #[test]
    fn zero_threshold_takes_every_gop_of_fav_videos() {
        let repo = ten_video_repo();
        let favs = repo.select_favs(0.3, 0.0).unwrap();
        assert_eq!(favs.fav_gops.len(), 3 * 2);
    }

    #[test]
    fn long_tail_threshold_cutoff() {
        // Peak 100, threshold 0.3 -> cutoff 30 -> indices 0,1,2 stay.
        let v = video(1, 100, &[100, 90, 40, 10, 2]);
        let repo = Repository::new(vec![v], None, 30).unwrap();
        let favs = repo.select_favs(1.0, 0.3).unwrap();
        let idx: Vec<usize> = favs.fav_gops.iter().map(|k| k.index).collect();
        assert_eq!(idx, vec![0, 1, 2]);
    }

    #[test]
    fn view_ties_break_by_ascending_id() {
        let videos = vec![video(3, 50, &[50]), video(1, 50, &[50]), video(2, 99, &[99])];
        let repo = Repository::new(videos, None, 30).unwrap();
        let favs = repo.select_favs(0.5, 0.0).unwrap();
        let ids: Vec<u64> = favs.fav_video_ids.iter().map(|v| v.0).collect();
        // top-2: the 99-view video, then id 1 wins the 50-view tie
        assert_eq!(ids, vec![1, 2]);
    }

    #[test]
    fn empty_repository_rejected() {
        let repo = Repository { videos: vec![], synthesis_seed: None, period_days: 30 };
        assert!(matches!(repo.select_favs(0.5, 0.0), Err(RepoError::EmptyRepository)));
    }

    #[test]
    fn bad_fraction_rejected() {
        let repo = ten_video_repo();
        assert!(matches!(repo.select_favs(0.0, 0.0), Err(RepoError::InvalidFavFraction(_))));
        assert!(matches!(repo.select_favs(1.5, 0.0), Err(RepoError::InvalidFavFraction(_))));
    }

    #[test]
    fn totals_are_exact_sums() {
        let videos = vec![
            Video {
                id: VideoId(1),
                video_views: 9,
                gops: vec![gop(10.0, 9), gop(20.0, 0)],
            },
        ];
        let repo = Repository::new(videos, None, 30).unwrap();
        let t = repo.totals();
        assert_eq!(t.total_size_mb, 30.0);
        assert_eq!(t.total_views, 9);
        assert_eq!(t.gop_count, 2);
    }

    #[test]
    fn views_below_peak_rejected() {
        let v = Video { id: VideoId(1), video_views: 5, gops: vec![gop(1.0, 10)] };
        assert!(matches!(
            Repository::new(vec![v], None, 30),
            Err(RepoError::ViewsBelowPeak(VideoId(1)))
        ));
    }

    #[test]
    fn jsonl_round_trip() {
        let repo = ten_video_repo();
        let text = repo.to_jsonl_string();
        let back = Repository::read_jsonl(text.as_bytes()).unwrap();
        assert_eq!(repo.videos, back.videos);
        assert_eq!(back.synthesis_seed, None);
        // and the re-serialization is byte-identical
        assert_eq!(text, back.to_jsonl_string());
    }

    #[test]
    fn fraction_rounding_stays_within_one_video() {
        let repo = ten_video_repo();
        for k in 1..=10u64 {
            let f = k as f64 / 10.0;
            let favs = repo.select_favs(f, 0.0).unwrap();
            assert_eq!(favs.fav_video_ids.len(), k as usize, "f={f}");
        }
    }

    #[test]
    fn fav_monotone_in_fraction() {
        let repo = ten_video_repo();
        let small = repo.select_favs(0.2, 0.0).unwrap();
        let big = repo.select_favs(0.7, 0.0).unwrap();
        assert!(small.fav_video_ids.is_subset(&big.fav_video_ids));
    }
}
