//! Experiment harness: sweep the FAV percentage, evaluate every policy, and
//! render the comparison artifacts.
//!
//! A sweep grid is `fav_percentages × seeds × policies`. Cells are
//! independent and run in parallel; rows are sorted canonically before any
//! serialization so re-running a sweep reproduces its CSV outputs byte for
//! byte. The report renderer also accepts externally supplied cost rows
//! (see [`SweepResult::from_csv`]), which makes published cost tables
//! checkable without re-running any synthesis.

use crate::cost::{evaluate_policy, ClusterConfig, CostBreakdown, CostError, PolicyId};
use crate::pricing::{PricingCatalog, TierId};
use crate::repo::{Repository, DEFAULT_GOP_HOTNESS_THRESHOLD};
use crate::synth::{synthesize, SynthError, SynthSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

/// FAV percentages studied by default: 5% through 30%.
pub const DEFAULT_FAV_PERCENTAGES: [f64; 6] = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30];

fn default_fav_percentages() -> Vec<f64> {
    DEFAULT_FAV_PERCENTAGES.to_vec()
}

fn default_seeds() -> Vec<u64> {
    vec![1, 2, 3, 4, 5]
}

fn default_policies() -> Vec<PolicyId> {
    PolicyId::ALL.to_vec()
}

fn default_threshold() -> f64 {
    DEFAULT_GOP_HOTNESS_THRESHOLD
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Declarative description of one sweep, loadable from a TOML manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    #[serde(default = "default_fav_percentages")]
    pub fav_percentages: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_policies")]
    pub policies: Vec<PolicyId>,
    /// Synthesis parameters; per cell the seed is replaced by the cell seed.
    #[serde(default)]
    pub synth: Option<SynthSpec>,
    /// Alternatively, an existing repository file used for every cell.
    #[serde(default)]
    pub repo: Option<PathBuf>,
    #[serde(default = "default_threshold")]
    pub gop_hotness_threshold: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            fav_percentages: default_fav_percentages(),
            seeds: default_seeds(),
            policies: default_policies(),
            synth: None,
            repo: None,
            gop_hotness_threshold: default_threshold(),
            output_dir: default_output_dir(),
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.fav_percentages.is_empty() {
            return Err(SweepError::InvalidSpec("fav_percentages is empty".into()));
        }
        for f in &self.fav_percentages {
            if !(*f > 0.0 && *f <= 1.0) {
                return Err(SweepError::InvalidSpec(format!(
                    "fav percentage {f} outside (0, 1]"
                )));
            }
        }
        if !self.fav_percentages.windows(2).all(|w| w[0] < w[1]) {
            return Err(SweepError::InvalidSpec(
                "fav_percentages must be strictly increasing".into(),
            ));
        }
        if self.seeds.is_empty() {
            return Err(SweepError::InvalidSpec("seeds is empty".into()));
        }
        if self.policies.is_empty() {
            return Err(SweepError::InvalidSpec("policies is empty".into()));
        }
        if self.synth.is_some() && self.repo.is_some() {
            return Err(SweepError::InvalidSpec(
                "give either synth parameters or a repo path, not both".into(),
            ));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SweepError> {
        let spec: SweepSpec =
            toml::from_str(text).map_err(|e| SweepError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> Result<Self, SweepError> {
        let text = std::fs::read_to_string(path).map_err(SweepError::Io)?;
        Self::from_toml_str(&text)
    }
}

/// One evaluated grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub fav_pct: f64,
    pub seed: u64,
    pub breakdown: CostBreakdown,
}

/// Mean and sample standard deviation of total cost across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub fav_pct: f64,
    pub policy: PolicyId,
    pub mean_total_usd: f64,
    pub stddev_total_usd: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    /// Sorted by (fav_pct, seed, policy order).
    pub rows: Vec<SweepRow>,
    /// Sorted by (fav_pct, policy order).
    pub aggregates: Vec<Aggregate>,
}

/// Rendered artifacts of one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Wide table: one row per FAV percentage, one column per policy.
    pub table_csv: String,
    /// Long form for plotting: fav_pct, policy, mean, stddev.
    pub curves_csv: String,
    pub summary_text: String,
}

#[derive(Debug, Clone)]
pub struct CellFailure {
    pub fav_pct: f64,
    pub seed: u64,
    pub policy: Option<PolicyId>,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Repo(#[from] crate::repo::RepoError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("reduction baseline must be positive")]
    DivisionByZero,
    #[error("result has no rows")]
    EmptyResult,
    #[error("csv: {0}")]
    Csv(String),
    #[error("{} cells failed; completed rows kept", failures.len())]
    Partial { failures: Vec<CellFailure>, completed: SweepResult },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn policy_order(p: PolicyId) -> usize {
    PolicyId::ALL.iter().position(|q| *q == p).unwrap()
}

fn sort_rows(rows: &mut [SweepRow]) {
    rows.sort_by(|a, b| {
        a.fav_pct
            .partial_cmp(&b.fav_pct)
            .unwrap()
            .then(a.seed.cmp(&b.seed))
            .then(policy_order(a.breakdown.policy).cmp(&policy_order(b.breakdown.policy)))
    });
}

impl SweepResult {
    /// Validates the rows against the cost invariants, sorts them
    /// canonically, and computes per-(fav_pct, policy) aggregates.
    pub fn from_rows(mut rows: Vec<SweepRow>) -> Result<Self, SweepError> {
        for row in &rows {
            row.breakdown.validate()?;
        }
        sort_rows(&mut rows);

        let mut groups: Vec<((u64, usize), Vec<f64>)> = Vec::new();
        for row in &rows {
            let key = (row.fav_pct.to_bits(), policy_order(row.breakdown.policy));
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, totals)) => totals.push(row.breakdown.total_usd),
                None => groups.push((key, vec![row.breakdown.total_usd])),
            }
        }
        let mut aggregates: Vec<Aggregate> = groups
            .into_iter()
            .map(|((bits, order), totals)| {
                let n = totals.len() as f64;
                let mean = totals.iter().sum::<f64>() / n;
                let stddev = if totals.len() > 1 {
                    (totals.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1.0)).sqrt()
                } else {
                    0.0
                };
                Aggregate {
                    fav_pct: f64::from_bits(bits),
                    policy: PolicyId::ALL[order],
                    mean_total_usd: mean,
                    stddev_total_usd: stddev,
                }
            })
            .collect();
        aggregates.sort_by(|a, b| {
            a.fav_pct
                .partial_cmp(&b.fav_pct)
                .unwrap()
                .then(policy_order(a.policy).cmp(&policy_order(b.policy)))
        });
        Ok(SweepResult { rows, aggregates })
    }

    pub fn aggregate(&self, fav_pct: f64, policy: PolicyId) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.fav_pct.to_bits() == fav_pct.to_bits() && a.policy == policy)
    }

    /// Serializes every row to the flat CSV record form.
    pub fn to_rows_csv(&self) -> String {
        let mut out = String::from(ROWS_CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let b = &row.breakdown;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                b.policy,
                row.fav_pct,
                row.seed,
                b.storage_usd,
                b.compute_usd,
                b.total_usd,
                b.per_tier_usd[0],
                b.per_tier_usd[1],
                b.per_tier_usd[2],
                b.per_tier_usd[3],
            ));
        }
        out
    }

    /// Parses cost rows from CSV. Besides the sweep's own output, this
    /// accepts reduced schemas: `fav_pct`, `policy` and `total_usd` are
    /// required, everything else is optional. Rows carrying only a total are
    /// ingested as compute-only so the structural invariants still hold.
    pub fn from_csv(text: &str) -> Result<Self, SweepError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| SweepError::Csv("empty file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let col = |name: &str| cols.iter().position(|c| *c == name);
        let policy_col =
            col("policy").ok_or_else(|| SweepError::Csv("missing `policy` column".into()))?;
        let fav_col =
            col("fav_pct").ok_or_else(|| SweepError::Csv("missing `fav_pct` column".into()))?;
        let total_col =
            col("total_usd").ok_or_else(|| SweepError::Csv("missing `total_usd` column".into()))?;
        let seed_col = col("seed");
        let storage_col = col("storage_usd");
        let compute_col = col("compute_usd");
        let tier_cols: Vec<Option<usize>> =
            TierId::ALL.iter().map(|t| col(t.as_str())).collect();

        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let get = |idx: usize| -> Result<&str, SweepError> {
                fields.get(idx).copied().ok_or_else(|| {
                    SweepError::Csv(format!("row {}: missing field {idx}", lineno + 2))
                })
            };
            let parse_f64 = |s: &str| -> Result<f64, SweepError> {
                s.parse::<f64>()
                    .map_err(|_| SweepError::Csv(format!("row {}: bad number `{s}`", lineno + 2)))
            };
            let policy: PolicyId = get(policy_col)?
                .parse()
                .map_err(|e| SweepError::Csv(format!("row {}: {e}", lineno + 2)))?;
            let fav_pct = parse_f64(get(fav_col)?)?;
            let total_usd = parse_f64(get(total_col)?)?;
            let seed = match seed_col {
                Some(i) => get(i)?.parse::<u64>().map_err(|_| {
                    SweepError::Csv(format!("row {}: bad seed", lineno + 2))
                })?,
                None => 0,
            };
            let storage_usd = match storage_col {
                Some(i) => parse_f64(get(i)?)?,
                None => 0.0,
            };
            let compute_usd = match compute_col {
                Some(i) => parse_f64(get(i)?)?,
                None => total_usd - storage_usd,
            };
            let mut per_tier_usd = [0.0; 4];
            let mut any_tier = false;
            for (slot, tc) in tier_cols.iter().enumerate() {
                if let Some(i) = tc {
                    per_tier_usd[slot] = parse_f64(get(*i)?)?;
                    any_tier = true;
                }
            }
            if !any_tier {
                per_tier_usd[0] = storage_usd;
            }
            rows.push(SweepRow {
                fav_pct,
                seed,
                breakdown: CostBreakdown {
                    policy,
                    storage_usd,
                    compute_usd,
                    total_usd,
                    per_tier_usd,
                    per_cluster_usd: vec![],
                },
            });
        }
        SweepResult::from_rows(rows)
    }
}

pub const ROWS_CSV_HEADER: &str =
    "policy,fav_pct,seed,storage_usd,compute_usd,total_usd,standard,standard-ia,one-zone-ia,glacier";

/// Runs the sweep grid. Repositories are synthesized once per seed and
/// shared across FAV levels, so a seed's workload is identical at every
/// percentage. Per-cell failures abort nothing: completed rows are returned
/// inside [`SweepError::Partial`].
pub fn run_sweep(spec: &SweepSpec, catalog: &PricingCatalog) -> Result<SweepResult, SweepError> {
    spec.validate()?;
    let cluster_cfg = ClusterConfig::default();

    let repos: Vec<(u64, Arc<Repository>)> = if let Some(path) = &spec.repo {
        let shared = Arc::new(Repository::from_file(path)?);
        spec.seeds.iter().map(|&s| (s, Arc::clone(&shared))).collect()
    } else {
        let base = spec.synth.clone().unwrap_or_default();
        let specs: Vec<SynthSpec> =
            spec.seeds.iter().map(|&seed| SynthSpec { seed, ..base.clone() }).collect();
        let generated: Result<Vec<Repository>, SynthError> =
            specs.par_iter().map(synthesize).collect();
        spec.seeds.iter().copied().zip(generated?.into_iter().map(Arc::new)).collect()
    };

    let cells: Vec<(f64, u64, Arc<Repository>)> = spec
        .fav_percentages
        .iter()
        .flat_map(|&f| repos.iter().map(move |(s, r)| (f, *s, Arc::clone(r))))
        .collect();

    let evaluated: Vec<(Vec<SweepRow>, Vec<CellFailure>)> = cells
        .par_iter()
        .map(|(fav_pct, seed, repo)| {
            let mut rows = Vec::new();
            let mut failures = Vec::new();
            match repo.select_favs(*fav_pct, spec.gop_hotness_threshold) {
                Ok(favs) => {
                    for &policy in &spec.policies {
                        match evaluate_policy(policy, repo, &favs, catalog, &cluster_cfg) {
                            Ok(breakdown) => rows.push(SweepRow {
                                fav_pct: *fav_pct,
                                seed: *seed,
                                breakdown,
                            }),
                            Err(e) => failures.push(CellFailure {
                                fav_pct: *fav_pct,
                                seed: *seed,
                                policy: Some(policy),
                                message: e.to_string(),
                            }),
                        }
                    }
                }
                Err(e) => failures.push(CellFailure {
                    fav_pct: *fav_pct,
                    seed: *seed,
                    policy: None,
                    message: e.to_string(),
                }),
            }
            (rows, failures)
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in evaluated {
        rows.extend(r);
        failures.extend(f);
    }
    let completed = SweepResult::from_rows(rows)?;
    if failures.is_empty() {
        Ok(completed)
    } else {
        Err(SweepError::Partial { failures, completed })
    }
}

/// Saving of `cost_a` relative to baseline `cost_b`, as a fraction of the
/// baseline: `(b - a) / b`.
pub fn compute_reduction(cost_a: f64, cost_b: f64) -> Result<f64, SweepError> {
    if !crate::positive(cost_b) {
        return Err(SweepError::DivisionByZero);
    }
    Ok((cost_b - cost_a) / cost_b)
}

/// Renders the comparison table, the plot-ready curves, and a text summary
/// with the proposed policy's reductions at the highest FAV percentage.
pub fn render_report(result: &SweepResult) -> Result<Report, SweepError> {
    if result.rows.is_empty() {
        return Err(SweepError::EmptyResult);
    }

    let mut fav_levels: Vec<f64> = Vec::new();
    for a in &result.aggregates {
        if fav_levels.last().map(|l| l.to_bits()) != Some(a.fav_pct.to_bits()) {
            fav_levels.push(a.fav_pct);
        }
    }
    let mut policies: Vec<PolicyId> = Vec::new();
    for p in PolicyId::ALL {
        if result.aggregates.iter().any(|a| a.policy == p) {
            policies.push(p);
        }
    }

    let mut table_csv = String::from("fav_pct");
    for p in &policies {
        table_csv.push(',');
        table_csv.push_str(p.as_str());
    }
    table_csv.push('\n');
    for &fav in &fav_levels {
        table_csv.push_str(&format!("{fav}"));
        for &p in &policies {
            table_csv.push(',');
            if let Some(a) = result.aggregate(fav, p) {
                table_csv.push_str(&format!("{}", a.mean_total_usd));
            }
        }
        table_csv.push('\n');
    }

    let mut curves_csv = String::from("fav_pct,policy,mean_total_usd,stddev_total_usd\n");
    for a in &result.aggregates {
        curves_csv.push_str(&format!(
            "{},{},{},{}\n",
            a.fav_pct, a.policy, a.mean_total_usd, a.stddev_total_usd
        ));
    }

    let mut summary = String::from("cost sweep summary (mean total USD per period)\n");
    for &fav in &fav_levels {
        let cheapest = policies
            .iter()
            .filter_map(|&p| result.aggregate(fav, p))
            .min_by(|a, b| a.mean_total_usd.partial_cmp(&b.mean_total_usd).unwrap());
        if let Some(best) = cheapest {
            summary.push_str(&format!(
                "fav_pct={:.0}%: cheapest policy {} at {}\n",
                fav * 100.0,
                best.policy,
                best.mean_total_usd
            ));
        }
    }
    let top_fav = *fav_levels.last().expect("non-empty");
    if let Some(proposed) = result.aggregate(top_fav, PolicyId::GopClustering) {
        for baseline in [PolicyId::VideoClustering, PolicyId::PartialPreTranscoding] {
            if let Some(base) = result.aggregate(top_fav, baseline) {
                let reduction =
                    compute_reduction(proposed.mean_total_usd, base.mean_total_usd)?;
                summary.push_str(&format!(
                    "at fav_pct={:.0}%, {} reduces cost by {:.2}% vs {}\n",
                    top_fav * 100.0,
                    PolicyId::GopClustering,
                    reduction * 100.0,
                    baseline
                ));
            }
        }
    }

    Ok(Report { table_csv, curves_csv, summary_text: summary })
}

impl Report {
    /// Writes `table.csv`, `curves.csv` and `summary.txt` into `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("table.csv"), &self.table_csv)?;
        std::fs::write(dir.join("curves.csv"), &self.curves_csv)?;
        std::fs::write(dir.join("summary.txt"), &self.summary_text)?;
        Ok(())
    }
}

/// Scatter dump of one GOP clustering: every hot GOP with its size, views,
/// cluster label and assigned tier. One row per FAV GOP.
pub fn cluster_scatter_csv(
    repo: &Repository,
    fav_fraction: f64,
    gop_hotness_threshold: f64,
    catalog: &PricingCatalog,
    cluster_cfg: &ClusterConfig,
) -> Result<String, SweepError> {
    let favs = repo.select_favs(fav_fraction, gop_hotness_threshold)?;
    let map = repo.video_map();
    let keys: Vec<_> = favs.fav_gops.iter().copied().collect();
    let values: Vec<f64> =
        keys.iter().map(|k| map[&k.video].gops[k.index].views as f64).collect();
    let clustering = cluster_cfg.run(&values).map_err(CostError::Cluster)?;
    let assignment =
        crate::cluster::assign_tiers(&clustering, catalog).map_err(CostError::Cluster)?;

    let mut out = String::from("video_id,gop_index,size_mb,views,cluster_label,tier_id\n");
    for (key, &label) in keys.iter().zip(&clustering.labels) {
        let gop = &map[&key.video].gops[key.index];
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            key.video,
            key.index,
            gop.size_mb,
            gop.views,
            label,
            assignment.tier_of(label)
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pricing::default_catalog;

    fn small_spec() -> SweepSpec {
        SweepSpec {
            fav_percentages: DEFAULT_FAV_PERCENTAGES.to_vec(),
            seeds: vec![1, 2],
            policies: PolicyId::ALL.to_vec(),
            synth: Some(SynthSpec {
                video_count: 100,
                gop_count_range: (5, 15),
                ..SynthSpec::default()
            }),
            ..SweepSpec::default()
        }
    }

    #[test]
    fn grid_cardinality() {
        let result = run_sweep(&small_spec(), &default_catalog()).unwrap();
        assert_eq!(result.rows.len(), 6 * 2 * 5);
        assert_eq!(result.aggregates.len(), 6 * 5);
    }

    #[test]
    fn full_re_is_constant_across_fav_levels() {
        let result = run_sweep(&small_spec(), &default_catalog()).unwrap();
        for seed in [1u64, 2] {
            let totals: Vec<f64> = result
                .rows
                .iter()
                .filter(|r| r.seed == seed && r.breakdown.policy == PolicyId::FullReTranscoding)
                .map(|r| r.breakdown.total_usd)
                .collect();
            assert_eq!(totals.len(), 6);
            for t in &totals {
                assert!((t - totals[0]).abs() <= 1e-9 * totals[0].max(1.0));
            }
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = run_sweep(&small_spec(), &default_catalog()).unwrap();
        let b = run_sweep(&small_spec(), &default_catalog()).unwrap();
        assert_eq!(a.to_rows_csv(), b.to_rows_csv());
        let ra = render_report(&a).unwrap();
        let rb = render_report(&b).unwrap();
        assert_eq!(ra.table_csv, rb.table_csv);
        assert_eq!(ra.curves_csv, rb.curves_csv);
        assert_eq!(ra.summary_text, rb.summary_text);
    }

    #[test]
    fn reduction_definition() {
        assert!((compute_reduction(390.0, 480.0).unwrap() - 0.1875).abs() < 1e-12);
        let r = compute_reduction(390.0, 533.0).unwrap();
        assert!((r - 143.0 / 533.0).abs() < 1e-12);
        assert_eq!(compute_reduction(5.0, 5.0).unwrap(), 0.0);
        assert!(matches!(compute_reduction(1.0, 0.0), Err(SweepError::DivisionByZero)));
    }

    /// Reference five-policy cost grid used as a fixture. Totals only.
    pub(crate) fn reference_costs_csv() -> String {
        let mut out = String::from("fav_pct,policy,total_usd\n");
        let rows: [(f64, [f64; 5]); 6] = [
            (0.05, [1596.0, 839.0, 694.0, 650.0, 600.0]),
            (0.10, [1596.0, 842.0, 662.0, 620.0, 590.0]),
            (0.15, [1596.0, 863.0, 643.0, 600.0, 560.0]),
            (0.20, [1596.0, 947.0, 613.0, 560.0, 520.0]),
            (0.25, [1596.0, 1424.0, 566.0, 530.0, 470.0]),
            (0.30, [1596.0, 3137.0, 533.0, 480.0, 390.0]),
        ];
        let policies = ["full-re", "full-pre", "partial-pre", "video-clustering", "gop-clustering"];
        for (fav, totals) in rows {
            for (p, t) in policies.iter().zip(totals) {
                out.push_str(&format!("{fav},{p},{t}\n"));
            }
        }
        out
    }

    #[test]
    fn fixture_report_reproduces_reference_reductions() {
        let result = SweepResult::from_csv(&reference_costs_csv()).unwrap();
        // the proposed policy is the minimum of the 30% row
        let row30: Vec<&Aggregate> =
            result.aggregates.iter().filter(|a| a.fav_pct == 0.30).collect();
        assert_eq!(row30.len(), 5);
        let min = row30
            .iter()
            .min_by(|a, b| a.mean_total_usd.partial_cmp(&b.mean_total_usd).unwrap())
            .unwrap();
        assert_eq!(min.policy, PolicyId::GopClustering);
        assert_eq!(min.mean_total_usd, 390.0);

        let report = render_report(&result).unwrap();
        assert!(report.summary_text.contains("18.75"), "{}", report.summary_text);
        assert!(report.summary_text.contains("26.83"), "{}", report.summary_text);

        let vs_videos = compute_reduction(390.0, 480.0).unwrap();
        assert_eq!(vs_videos, 0.1875);
        let vs_partial = compute_reduction(390.0, 533.0).unwrap();
        assert!((vs_partial - 0.27).abs() < 0.005);
    }

    #[test]
    fn single_cell_report_has_no_reductions() {
        let csv = "fav_pct,policy,total_usd\n0.30,full-pre,100\n";
        let result = SweepResult::from_csv(csv).unwrap();
        let report = render_report(&result).unwrap();
        assert_eq!(report.table_csv, "fav_pct,full-pre\n0.3,100\n");
        assert!(!report.summary_text.contains("reduces"));
    }

    #[test]
    fn curves_row_count_is_favs_times_policies() {
        let result = run_sweep(&small_spec(), &default_catalog()).unwrap();
        let report = render_report(&result).unwrap();
        let lines = report.curves_csv.lines().count();
        assert_eq!(lines, 1 + 6 * 5);
    }

    #[test]
    fn rows_csv_round_trips() {
        let result = run_sweep(&small_spec(), &default_catalog()).unwrap();
        let text = result.to_rows_csv();
        let back = SweepResult::from_csv(&text).unwrap();
        assert_eq!(result.rows.len(), back.rows.len());
        for (a, b) in result.rows.iter().zip(&back.rows) {
            assert_eq!(a.fav_pct, b.fav_pct);
            assert_eq!(a.seed, b.seed);
            assert_eq!(a.breakdown.policy, b.breakdown.policy);
            assert_eq!(a.breakdown.total_usd, b.breakdown.total_usd);
            assert_eq!(a.breakdown.per_tier_usd, b.breakdown.per_tier_usd);
        }
        assert_eq!(text, back.to_rows_csv());
    }

    #[test]
    fn too_few_fav_videos_is_a_partial_failure() {
        // 20 videos at 5% leaves one FAV video: video clustering cannot make
        // four clusters, every other policy still completes.
        let spec = SweepSpec {
            fav_percentages: vec![0.05],
            seeds: vec![1],
            synth: Some(SynthSpec {
                video_count: 20,
                gop_count_range: (8, 16),
                ..SynthSpec::default()
            }),
            ..SweepSpec::default()
        };
        match run_sweep(&spec, &default_catalog()) {
            Err(SweepError::Partial { failures, completed }) => {
                assert_eq!(failures.len(), 1);
                assert_eq!(failures[0].policy, Some(PolicyId::VideoClustering));
                assert_eq!(completed.rows.len(), 4);
            }
            other => panic!("expected partial failure, got {other:?}"),
        }
    }

    #[test]
    fn scatter_dump_labels_and_tiers() {
        let repo = synthesize(&SynthSpec {
            video_count: 50,
            gop_count_range: (5, 15),
            ..SynthSpec::default()
        })
        .unwrap();
        let csv = cluster_scatter_csv(
            &repo,
            0.3,
            0.05,
            &default_catalog(),
            &ClusterConfig::default(),
        )
        .unwrap();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "video_id,gop_index,size_mb,views,cluster_label,tier_id"
        );
        for line in lines {
            let fields: Vec<&str> = line.split(',').collect();
            let label: usize = fields[4].parse().unwrap();
            assert!(label < 4);
            assert!(TierId::ALL.iter().any(|t| t.as_str() == fields[5]));
        }
    }

    #[test]
    fn spec_validation() {
        let spec = SweepSpec { fav_percentages: vec![0.3, 0.2], ..SweepSpec::default() };
        assert!(matches!(spec.validate(), Err(SweepError::InvalidSpec(_))));

        let spec = SweepSpec { fav_percentages: vec![0.0, 0.2], ..SweepSpec::default() };
        assert!(spec.validate().is_err());

        let spec = SweepSpec { seeds: vec![], ..SweepSpec::default() };
        assert!(spec.validate().is_err());

        let spec = SweepSpec {
            synth: Some(SynthSpec::default()),
            repo: Some(PathBuf::from("x.jsonl")),
            ..SweepSpec::default()
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn spec_toml_round_trip_with_defaults() {
        let text = r#"
            fav_percentages = [0.1, 0.3]
            seeds = [7]

            [synth]
            video_count = 64
        "#;
        let spec = SweepSpec::from_toml_str(text).unwrap();
        assert_eq!(spec.fav_percentages, vec![0.1, 0.3]);
        assert_eq!(spec.seeds, vec![7]);
        assert_eq!(spec.policies, PolicyId::ALL.to_vec());
        assert_eq!(spec.synth.as_ref().unwrap().video_count, 64);
        assert_eq!(spec.gop_hotness_threshold, 0.05);
    }
}
