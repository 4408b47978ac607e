//! 1-D k-means over GOP view counts, plus the cluster→tier mapping.
//!
//! Two solvers are provided. [`kmeans_1d_exact`] computes the globally
//! optimal partition by dynamic programming over the sorted values — in one
//! dimension the optimal clusters are contiguous intervals of the sorted
//! data, and the interval cost satisfies the quadrangle inequality, so each
//! DP layer can be filled with the divide-and-conquer argmin trick in
//! O(n log n). [`kmeans_lloyd`] is the usual seeded heuristic, kept for
//! scale comparisons and as a fidelity check against the exact solver.
//!
//! Cluster labels are ordered by centroid: label 0 is the hottest cluster.

use crate::pricing::{PricingCatalog, TierId};
use crate::rng::SplitMix64;
use thiserror::Error;

/// A partition of a value set into `k` clusters.
///
/// `labels` runs parallel to the input values; `centroids` and `sizes` are
/// indexed by label. Label 0 carries the highest centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub k: usize,
    pub labels: Vec<usize>,
    pub centroids: Vec<f64>,
    pub sizes: Vec<usize>,
    /// Within-cluster sum of squared deviations.
    pub objective: f64,
}

/// Bijective mapping from cluster labels to storage tiers: the hottest
/// cluster goes to the rank-1 (most expensive) tier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TierAssignment {
    /// Indexed by cluster label.
    pub cluster_to_tier: Vec<TierId>,
}

impl TierAssignment {
    pub fn tier_of(&self, label: usize) -> TierId {
        self.cluster_to_tier[label]
    }
}

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("cannot cluster an empty value set")]
    EmptyInput,
    #[error("k={k} is out of range for {len} values")]
    BadK { k: usize, len: usize },
    #[error("values must be finite")]
    NonFiniteValue,
    #[error("{clusters} clusters cannot be assigned to {tiers} tiers")]
    ClusterCountMismatch { clusters: usize, tiers: usize },
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
}

fn check_input(values: &[f64], k: usize) -> Result<(), ClusterError> {
    if values.is_empty() {
        return Err(ClusterError::EmptyInput);
    }
    if k < 1 || k > values.len() {
        return Err(ClusterError::BadK { k, len: values.len() });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ClusterError::NonFiniteValue);
    }
    Ok(())
}

/// Prefix sums over the sorted values for O(1) interval cost queries.
struct Prefix {
    sum: Vec<f64>,
    sumsq: Vec<f64>,
}

impl Prefix {
    fn new(sorted: &[f64]) -> Self {
        let mut sum = Vec::with_capacity(sorted.len() + 1);
        let mut sumsq = Vec::with_capacity(sorted.len() + 1);
        sum.push(0.0);
        sumsq.push(0.0);
        let (mut s, mut s2) = (0.0, 0.0);
        for &v in sorted {
            s += v;
            s2 += v * v;
            sum.push(s);
            sumsq.push(s2);
        }
        Prefix { sum, sumsq }
    }

    /// Sum of squared deviations of the inclusive interval `[i, j]`.
    fn cost(&self, i: usize, j: usize) -> f64 {
        let m = (j + 1 - i) as f64;
        let s = self.sum[j + 1] - self.sum[i];
        let s2 = self.sumsq[j + 1] - self.sumsq[i];
        (s2 - s * s / m).max(0.0)
    }

    fn mean(&self, i: usize, j: usize) -> f64 {
        (self.sum[j + 1] - self.sum[i]) / (j + 1 - i) as f64
    }
}

/// One DP layer: `cur[j] = min_s prev[s] + cost(s+1, j)`, filled by
/// divide-and-conquer over `j` exploiting the monotonicity of the optimal
/// split point.
struct LayerSolver<'a> {
    prefix: &'a Prefix,
    prev: &'a [f64],
}

impl LayerSolver<'_> {
    #[allow(clippy::needless_range_loop)]
    fn fill(&self, cur: &mut [f64], split: &mut [usize], jlo: usize, jhi: usize, slo: usize, shi: usize) {
        if jlo > jhi {
            return;
        }
        let jm = jlo + (jhi - jlo) / 2;
        let mut best = f64::INFINITY;
        let mut best_s = slo;
        for s in slo..=shi.min(jm - 1) {
            let cand = self.prev[s] + self.prefix.cost(s + 1, jm);
            if cand < best {
                best = cand;
                best_s = s;
            }
        }
        cur[jm] = best;
        split[jm] = best_s;
        if jm > jlo {
            self.fill(cur, split, jlo, jm - 1, slo, best_s);
        }
        if jm < jhi {
            self.fill(cur, split, jm + 1, jhi, best_s, shi);
        }
    }
}

/// Globally optimal 1-D k-means by dynamic programming. Deterministic; the
/// clusters are contiguous intervals of the sorted input.
pub fn kmeans_1d_exact(values: &[f64], k: usize) -> Result<Clustering, ClusterError> {
    check_input(values, k)?;
    let n = values.len();

    // Sort once, remembering original positions; ties keep input order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let prefix = Prefix::new(&sorted);

    // dp[r][j]: cost of grouping sorted[0..=j] into r+1 clusters.
    let mut prev: Vec<f64> = (0..n).map(|j| prefix.cost(0, j)).collect();
    let mut splits: Vec<Vec<usize>> = Vec::with_capacity(k);
    splits.push(Vec::new()); // layer 0 has no split points
    for r in 1..k {
        let mut cur = vec![f64::INFINITY; n];
        let mut split = vec![0usize; n];
        LayerSolver { prefix: &prefix, prev: &prev }
            .fill(&mut cur, &mut split, r, n - 1, r - 1, n - 2);
        splits.push(split);
        prev = cur;
    }

    // Recover the interval boundaries.
    let mut intervals = Vec::with_capacity(k);
    let mut j = n - 1;
    for split in splits[1..].iter().rev() {
        let s = split[j];
        intervals.push((s + 1, j));
        j = s;
    }
    intervals.push((0, j));
    intervals.reverse();

    Ok(build_from_intervals(values, &order, &sorted, &prefix, &intervals))
}

/// Builds a `Clustering` from ascending sorted intervals, relabeled so that
/// label 0 has the highest centroid.
fn build_from_intervals(
    values: &[f64],
    order: &[usize],
    sorted: &[f64],
    prefix: &Prefix,
    intervals: &[(usize, usize)],
) -> Clustering {
    let k = intervals.len();
    let mut labels = vec![0usize; values.len()];
    let mut centroids = vec![0.0; k];
    let mut sizes = vec![0usize; k];
    let mut objective = 0.0;
    for (idx, &(lo, hi)) in intervals.iter().enumerate() {
        let label = k - 1 - idx; // ascending interval -> descending label
        let mean = prefix.mean(lo, hi);
        centroids[label] = mean;
        sizes[label] = hi + 1 - lo;
        for p in lo..=hi {
            labels[order[p]] = label;
            let d = sorted[p] - mean;
            objective += d * d;
        }
    }
    Clustering { k, labels, centroids, sizes, objective }
}

/// Lloyd's algorithm with k-means++-style seeding, 1-D. Deterministic for a
/// given seed. Returns after convergence or `max_iters` passes.
pub fn kmeans_lloyd(
    values: &[f64],
    k: usize,
    max_iters: usize,
    seed: u64,
) -> Result<Clustering, ClusterError> {
    lloyd_with_history(values, k, max_iters, seed).map(|(c, _)| c)
}

/// Lloyd plus the per-iteration objective trace (used to assert that the
/// objective never increases).
pub(crate) fn lloyd_with_history(
    values: &[f64],
    k: usize,
    max_iters: usize,
    seed: u64,
) -> Result<(Clustering, Vec<f64>), ClusterError> {
    check_input(values, k)?;
    let n = values.len();
    let max_iters = max_iters.max(1);
    let mut rng = SplitMix64::new(seed);

    // k-means++ seeding: first center uniform, then D^2-weighted picks.
    let mut centers = Vec::with_capacity(k);
    centers.push(values[rng.next_u64_in(0, n as u64 - 1) as usize]);
    let mut dist2: Vec<f64> = values.iter().map(|v| (v - centers[0]) * (v - centers[0])).collect();
    while centers.len() < k {
        let total: f64 = dist2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.next_f64() * total;
            let mut cum = 0.0;
            let mut pick = n - 1;
            for (i, d) in dist2.iter().enumerate() {
                cum += d;
                if cum > target {
                    pick = i;
                    break;
                }
            }
            values[pick]
        } else {
            values[rng.next_u64_in(0, n as u64 - 1) as usize]
        };
        centers.push(next);
        for (i, v) in values.iter().enumerate() {
            let d = (v - next) * (v - next);
            if d < dist2[i] {
                dist2[i] = d;
            }
        }
    }

    let mut labels = vec![0usize; n];
    let mut history = Vec::new();
    for _ in 0..max_iters {
        // Assignment: nearest center, ties to the lowest index.
        let mut changed = false;
        for (i, v) in values.iter().enumerate() {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = (v - center) * (v - center);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        // Update: means of members; empty clusters keep their center.
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (i, v) in values.iter().enumerate() {
            sums[labels[i]] += v;
            counts[labels[i]] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c] / counts[c] as f64;
            }
        }
        let objective: f64 = values
            .iter()
            .enumerate()
            .map(|(i, v)| (v - centers[labels[i]]) * (v - centers[labels[i]]))
            .sum();
        history.push(objective);
        if !changed && history.len() > 1 {
            break;
        }
    }

    // Relabel so that label 0 carries the highest centroid.
    let mut by_centroid: Vec<usize> = (0..k).collect();
    by_centroid.sort_by(|&a, &b| centers[b].partial_cmp(&centers[a]).unwrap().then(a.cmp(&b)));
    let mut relabel = vec![0usize; k];
    for (new, &old) in by_centroid.iter().enumerate() {
        relabel[old] = new;
    }
    let labels: Vec<usize> = labels.into_iter().map(|l| relabel[l]).collect();
    let mut centroids = vec![0.0; k];
    let mut sizes = vec![0usize; k];
    for (new, &old) in by_centroid.iter().enumerate() {
        centroids[new] = centers[old];
    }
    for &l in &labels {
        sizes[l] += 1;
    }
    let objective = *history.last().expect("at least one iteration");

    Ok((Clustering { k, labels, centroids, sizes, objective }, history))
}

/// Maps clusters to storage tiers: clusters sorted by centroid descending
/// pair with tiers sorted by rank ascending, so the hottest cluster lands in
/// the most expensive tier. Centroid ties break toward the lower label.
pub fn assign_tiers(
    clustering: &Clustering,
    catalog: &PricingCatalog,
) -> Result<TierAssignment, ClusterError> {
    if clustering.k != catalog.tiers.len() {
        return Err(ClusterError::ClusterCountMismatch {
            clusters: clustering.k,
            tiers: catalog.tiers.len(),
        });
    }
    if let Some(label) = clustering.sizes.iter().position(|&s| s == 0) {
        return Err(ClusterError::EmptyCluster(label));
    }
    let mut labels: Vec<usize> = (0..clustering.k).collect();
    labels.sort_by(|&a, &b| {
        clustering.centroids[b]
            .partial_cmp(&clustering.centroids[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut cluster_to_tier = vec![TierId::Standard; clustering.k];
    for (pos, &label) in labels.iter().enumerate() {
        cluster_to_tier[label] = catalog.tiers[pos].id; // tiers held in rank order
    }
    Ok(TierAssignment { cluster_to_tier })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::default_catalog;

    /// Exhaustive search over all contiguous partitions of the sorted
    /// values; the independent optimality oracle for small inputs.
    fn brute_force_objective(values: &[f64], k: usize) -> f64 {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let prefix = Prefix::new(&sorted);
        fn rec(prefix: &Prefix, start: usize, n: usize, k: usize) -> f64 {
            if k == 1 {
                return prefix.cost(start, n - 1);
            }
            let mut best = f64::INFINITY;
            // first cluster is [start, end]; leave >= k-1 points after it
            for end in start..=(n - k) {
                let rest = rec(prefix, end + 1, n, k - 1);
                let cand = prefix.cost(start, end) + rest;
                if cand < best {
                    best = cand;
                }
            }
            best
        }
        rec(&prefix, 0, sorted.len(), k)
    }

    #[test]
    fn four_well_separated_pairs() {
        let values = [1.0, 2.0, 10.0, 11.0, 20.0, 21.0, 30.0, 31.0];
        let c = kmeans_1d_exact(&values, 4).unwrap();
        // pairs cluster together; label 0 is the hottest pair
        assert_eq!(c.labels, vec![3, 3, 2, 2, 1, 1, 0, 0]);
        assert_eq!(c.centroids, vec![30.5, 20.5, 10.5, 1.5]);
        let brute = brute_force_objective(&values, 4);
        assert!((c.objective - brute).abs() <= 1e-9 * brute.max(1.0));
        assert!((c.objective - 2.0).abs() < 1e-12); // four pairs, 0.5 each
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let values = [5.0, 1.0, 9.0, 3.0];
        let c = kmeans_1d_exact(&values, 4).unwrap();
        assert_eq!(c.objective, 0.0);
        assert_eq!(c.sizes, vec![1, 1, 1, 1]);
        // label 0 = highest value
        assert_eq!(c.labels, vec![1, 3, 0, 2]);
    }

    #[test]
    fn k_one_is_global_mean() {
        let values = [2.0, 4.0, 9.0];
        let c = kmeans_1d_exact(&values, 1).unwrap();
        assert!((c.centroids[0] - 5.0).abs() < 1e-12);
        let ssq: f64 = values.iter().map(|v| (v - 5.0) * (v - 5.0)).sum();
        assert!((c.objective - ssq).abs() < 1e-12);
    }

    #[test]
    fn lloyd_k_one_is_global_mean() {
        let values = [2.0, 4.0, 9.0];
        let c = kmeans_lloyd(&values, 1, 50, 0).unwrap();
        assert!((c.centroids[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn outlier_splits_off_regardless_of_seed() {
        let values = [0.0, 0.0, 0.0, 10.0];
        let brute = brute_force_objective(&values, 2);
        assert_eq!(brute, 0.0);
        for seed in 0..20 {
            let c = kmeans_lloyd(&values, 2, 100, seed).unwrap();
            assert_eq!(c.labels, vec![1, 1, 1, 0], "seed {seed}");
            assert_eq!(c.objective, 0.0);
        }
        let exact = kmeans_1d_exact(&values, 2).unwrap();
        assert_eq!(exact.labels, vec![1, 1, 1, 0]);
    }

    #[test]
    fn exact_matches_brute_force_on_random_instances() {
        let mut rng = SplitMix64::new(11);
        for trial in 0..50 {
            let n = rng.next_u64_in(4, 12) as usize;
            let k = rng.next_u64_in(1, 4.min(n as u64)) as usize;
            let values: Vec<f64> = (0..n).map(|_| rng.next_f64_in(0.0, 100.0)).collect();
            let c = kmeans_1d_exact(&values, k).unwrap();
            let brute = brute_force_objective(&values, k);
            assert!(
                (c.objective - brute).abs() <= 1e-9 * brute.max(1.0),
                "trial {trial}: dp {} vs brute {brute}",
                c.objective
            );
        }
    }

    /// Draws view counts from four bands like the hot-GOP scatter groups
    /// (0.9–2.0M, 2.0–5.0M, 4.2–6.5M, 7.0–9.5M views).
    fn banded_views(rng: &mut SplitMix64) -> Vec<f64> {
        let bands = [(0.9e6, 2.0e6), (2.0e6, 5.0e6), (4.2e6, 6.5e6), (7.0e6, 9.5e6)];
        let mut values = Vec::new();
        for &(lo, hi) in &bands {
            for _ in 0..40 {
                values.push(rng.next_f64_in(lo, hi));
            }
        }
        values
    }

    #[test]
    fn exact_beats_every_lloyd_start_on_banded_views() {
        let mut rng = SplitMix64::new(5);
        let values = banded_views(&mut rng);
        let exact = kmeans_1d_exact(&values, 4).unwrap();
        for seed in 0..10 {
            let lloyd = kmeans_lloyd(&values, 4, 100, seed).unwrap();
            assert!(exact.objective <= lloyd.objective + 1e-9 * exact.objective.max(1.0));
        }
    }

    #[test]
    fn lloyd_close_to_exact_on_long_tail_views() {
        // 10,000 view counts shaped like hot-GOP data: Zipf head scaled by
        // geometric positions. Best-of-10 Lloyd stays within 5% of optimal.
        let mut rng = SplitMix64::new(77);
        let mut values = Vec::with_capacity(10_000);
        for rank in 1..=500u64 {
            let video_views = 2.0e6 / (rank as f64).powf(0.8);
            for gop in 0..20 {
                let decayed = video_views * 0.9f64.powi(gop);
                values.push((decayed * rng.next_f64_in(0.8, 1.2)).max(0.0));
            }
        }
        let exact = kmeans_1d_exact(&values, 4).unwrap();
        let best_lloyd = (0..10)
            .map(|seed| kmeans_lloyd(&values, 4, 100, seed).unwrap().objective)
            .fold(f64::INFINITY, f64::min);
        assert!(best_lloyd >= exact.objective - 1e-9 * exact.objective);
        assert!(
            best_lloyd <= 1.05 * exact.objective,
            "lloyd {best_lloyd} vs exact {}",
            exact.objective
        );
    }

    #[test]
    fn lloyd_objective_never_increases() {
        let mut rng = SplitMix64::new(17);
        let values: Vec<f64> = (0..500).map(|_| rng.next_f64_in(0.0, 1000.0)).collect();
        for seed in 0..5 {
            let (_, history) = lloyd_with_history(&values, 4, 100, seed).unwrap();
            for w in history.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12);
            }
        }
    }

    #[test]
    fn input_validation() {
        assert!(matches!(kmeans_1d_exact(&[], 1), Err(ClusterError::EmptyInput)));
        assert!(matches!(kmeans_1d_exact(&[1.0], 0), Err(ClusterError::BadK { .. })));
        assert!(matches!(kmeans_1d_exact(&[1.0], 2), Err(ClusterError::BadK { .. })));
        assert!(matches!(kmeans_lloyd(&[], 1, 10, 0), Err(ClusterError::EmptyInput)));
        assert!(matches!(
            kmeans_1d_exact(&[1.0, f64::NAN], 1),
            Err(ClusterError::NonFiniteValue)
        ));
    }

    #[test]
    fn tier_assignment_follows_centroid_order() {
        // Means of the four scatter bands, hottest first.
        let clustering = Clustering {
            k: 4,
            labels: vec![0, 1, 2, 3],
            centroids: vec![8.2e6, 5.7e6, 3.4e6, 1.4e6],
            sizes: vec![1, 1, 1, 1],
            objective: 0.0,
        };
        let t = assign_tiers(&clustering, &default_catalog()).unwrap();
        assert_eq!(
            t.cluster_to_tier,
            vec![TierId::Standard, TierId::StandardIa, TierId::OneZoneIa, TierId::Glacier]
        );
    }

    #[test]
    fn ascending_centroids_map_in_reverse() {
        let clustering = Clustering {
            k: 4,
            labels: vec![0, 1, 2, 3],
            centroids: vec![1.0, 2.0, 3.0, 4.0],
            sizes: vec![1, 1, 1, 1],
            objective: 0.0,
        };
        let t = assign_tiers(&clustering, &default_catalog()).unwrap();
        assert_eq!(
            t.cluster_to_tier,
            vec![TierId::Glacier, TierId::OneZoneIa, TierId::StandardIa, TierId::Standard]
        );
    }

    #[test]
    fn empty_cluster_rejected() {
        let clustering = Clustering {
            k: 4,
            labels: vec![0, 1, 2],
            centroids: vec![4.0, 3.0, 2.0, 1.0],
            sizes: vec![1, 1, 1, 0],
            objective: 0.0,
        };
        assert!(matches!(
            assign_tiers(&clustering, &default_catalog()),
            Err(ClusterError::EmptyCluster(3))
        ));
    }

    #[test]
    fn cluster_count_mismatch_rejected() {
        let clustering = kmeans_1d_exact(&[1.0, 2.0, 3.0], 3).unwrap();
        assert!(matches!(
            assign_tiers(&clustering, &default_catalog()),
            Err(ClusterError::ClusterCountMismatch { clusters: 3, tiers: 4 })
        ));
    }

    #[test]
    fn scaling_preserves_partition() {
        let mut rng = SplitMix64::new(23);
        let values: Vec<f64> = (0..60).map(|_| rng.next_f64_in(0.0, 5000.0)).collect();
        let base = kmeans_1d_exact(&values, 4).unwrap();
        for c in [0.5, 2.0, 10.0] {
            let scaled: Vec<f64> = values.iter().map(|v| v * c).collect();
            let got = kmeans_1d_exact(&scaled, 4).unwrap();
            assert_eq!(base.labels, got.labels, "scale {c}");
        }
    }

    #[test]
    fn centroid_equals_member_mean() {
        let mut rng = SplitMix64::new(31);
        let values: Vec<f64> = (0..200).map(|_| rng.next_f64_in(0.0, 100.0)).collect();
        let c = kmeans_1d_exact(&values, 4).unwrap();
        for label in 0..c.k {
            let members: Vec<f64> = values
                .iter()
                .zip(&c.labels)
                .filter(|(_, &l)| l == label)
                .map(|(v, _)| *v)
                .collect();
            let mean: f64 = members.iter().sum::<f64>() / members.len() as f64;
            assert!((c.centroids[label] - mean).abs() <= 1e-9 * mean.abs().max(1.0));
        }
    }
}
