//! Deterministic synthesis of long-tail video repositories.
//!
//! Popularity across videos follows a Zipf-like law: video at rank `j` gets
//! `max_video_views / j^exponent` views, rounded. Within a video, GOP views
//! decay geometrically from the start, and any GOP after the first may
//! receive a popularity spike that redraws its views uniformly up to the
//! video's views — hot segments can therefore appear anywhere in a video,
//! not only at its head.
//!
//! All randomness comes from one [`SplitMix64`] stream in a fixed order — videos in rank order, GOPs in index order, and
//! per GOP: count (once per video), size, transcode time, spike test, spike
//! views — so an identical spec reproduces a bit-identical repository.

use crate::repo::{Gop, Repository, Video, VideoId};
use crate::rng::SplitMix64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Generator parameters. The default is the 1,000-video preset used by fast
/// experiment sweeps; [`SynthSpec::full_scale`] switches to 50,000 videos.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub video_count: usize,
    pub seed: u64,
    /// GOPs per video, drawn uniformly (inclusive bounds).
    pub gop_count_range: (u32, u32),
    /// Stored megabytes per GOP, all kept formats combined.
    pub gop_size_mb_range: (f64, f64),
    /// VM seconds to regenerate one GOP on demand.
    pub transcode_time_s_range: (f64, f64),
    /// Zipf-like exponent of video popularity by rank.
    pub video_popularity_exponent: f64,
    /// Geometric per-position decay of GOP views inside a video, in (0, 1).
    pub intra_video_decay: f64,
    /// Probability that a GOP after the first gets its views redrawn
    /// uniformly in `[0, video_views]`.
    pub random_spike_prob: f64,
    /// Views of the rank-1 video.
    pub max_video_views: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            video_count: 1_000,
            seed: 42,
            gop_count_range: (30, 300),
            gop_size_mb_range: (6.0, 24.0),
            transcode_time_s_range: (0.2, 0.6),
            video_popularity_exponent: 0.8,
            intra_video_decay: 0.9,
            random_spike_prob: 0.1,
            max_video_views: 2_000,
        }
    }
}

impl SynthSpec {
    /// The fast preset: 1,000 videos.
    pub fn small(seed: u64) -> Self {
        SynthSpec { seed, ..SynthSpec::default() }
    }

    /// The full-scale preset: 50,000 videos.
    pub fn full_scale(seed: u64) -> Self {
        SynthSpec { video_count: 50_000, seed, ..SynthSpec::default() }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SynthError> {
        let spec: SynthSpec =
            toml::from_str(text).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        fn bad(msg: impl Into<String>) -> Result<(), SynthError> {
            Err(SynthError::InvalidSpec(msg.into()))
        }
        if self.video_count < 1 {
            return bad("video_count must be at least 1");
        }
        let (glo, ghi) = self.gop_count_range;
        if glo < 1 || glo > ghi {
            return bad("gop_count_range must satisfy 1 <= min <= max");
        }
        let (slo, shi) = self.gop_size_mb_range;
        if !crate::positive(slo) || slo > shi {
            return bad("gop_size_mb_range must satisfy 0 < min <= max");
        }
        let (tlo, thi) = self.transcode_time_s_range;
        if !crate::positive(tlo) || tlo > thi {
            return bad("transcode_time_s_range must satisfy 0 < min <= max");
        }
        if !crate::positive(self.video_popularity_exponent) {
            return bad("video_popularity_exponent must be positive");
        }
        if !(crate::positive(self.intra_video_decay) && self.intra_video_decay < 1.0) {
            return bad("intra_video_decay must be in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.random_spike_prob) {
            return bad("random_spike_prob must be in [0, 1]");
        }
        if self.max_video_views < 1 {
            return bad("max_video_views must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthesis spec: {0}")]
    InvalidSpec(String),
}

/// Generates a repository from the spec. Identical specs (including the
/// seed) produce bit-identical repositories.
pub fn synthesize(spec: &SynthSpec) -> Result<Repository, SynthError> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let mut videos = Vec::with_capacity(spec.video_count);

    for rank in 1..=spec.video_count as u64 {
        let video_views =
            (spec.max_video_views as f64 / (rank as f64).powf(spec.video_popularity_exponent))
                .round() as u64;
        let gop_count = rng.next_u64_in(spec.gop_count_range.0 as u64, spec.gop_count_range.1 as u64);

        let mut gops = Vec::with_capacity(gop_count as usize);
        let mut decay = 1.0f64;
        for index in 0..gop_count {
            let size_mb = rng.next_f64_in(spec.gop_size_mb_range.0, spec.gop_size_mb_range.1);
            let transcode_time_s =
                rng.next_f64_in(spec.transcode_time_s_range.0, spec.transcode_time_s_range.1);
            let views = if index == 0 {
                video_views
            } else {
                decay *= spec.intra_video_decay;
                let base = (video_views as f64 * decay).round() as u64;
                if rng.next_f64() < spec.random_spike_prob {
                    rng.next_u64_in(0, video_views)
                } else {
                    base
                }
            };
            gops.push(Gop { size_mb, views, transcode_time_s });
        }
        videos.push(Video { id: VideoId(rank), video_views, gops });
    }

    Ok(Repository {
        videos,
        synthesis_seed: Some(spec.seed),
        period_days: crate::repo::DEFAULT_PERIOD_DAYS,
    })
}
