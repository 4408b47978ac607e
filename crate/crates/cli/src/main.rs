//! `goptier` — synthesize video repositories, price placement policies, and
//! sweep FAV percentages from the command line.
//!
//! Human-readable results go to stdout; machine-readable results only ever
//! go to files (CSV). Exit codes: 0 success, 1 I/O or runtime failure,
//! 2 invalid arguments or configuration.

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use goptier::cost::{evaluate_policy, ClusterConfig, CostBreakdown, PolicyId};
use goptier::pricing::{default_catalog, PricingCatalog, TierId};
use goptier::repo::Repository;
use goptier::sweep::{
    cluster_scatter_csv, render_report, run_sweep, SweepError, SweepResult, SweepSpec,
    ROWS_CSV_HEADER,
};
use goptier::synth::{synthesize, SynthSpec};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::OnceLock;

fn version_string() -> &'static str {
    static VERSION: OnceLock<String> = OnceLock::new();
    VERSION.get_or_init(|| {
        let cat = default_catalog();
        let tiers = cat
            .tiers
            .iter()
            .map(|t| format!("{}={}", t.id, t.price_per_gb_month))
            .collect::<Vec<_>>()
            .join(", ");
        format!(
            "{}\ndefault catalog (USD/GB-month): {tiers}; vm rate {} USD/h",
            env!("CARGO_PKG_VERSION"),
            cat.vm_hourly_rate
        )
    })
}

#[derive(Parser)]
#[command(name = "goptier", version = version_string(), about = "Tiered-storage cost simulator for segmented video workloads")]
struct Cli {
    /// Pricing catalog TOML; defaults to the built-in rates.
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,

    /// Worker threads for sweep cells; defaults to available parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic repository file.
    Synth {
        /// Synthesis parameters as a TOML file; flags override its values.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Number of videos.
        #[arg(long)]
        videos: Option<usize>,
        /// Generator seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Views of the most popular video.
        #[arg(long)]
        max_views: Option<u64>,
        /// Output repository file (one JSON video per line).
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Price one placement policy against a repository file.
    Cost {
        /// Repository file produced by `synth`.
        repo: PathBuf,
        /// One of: full-pre, full-re, partial-pre, video-clustering,
        /// gop-clustering.
        #[arg(long, value_parser = parse_policy)]
        policy: PolicyId,
        /// Fraction of videos treated as frequently accessed.
        #[arg(long, default_value_t = 0.30)]
        fav_pct: f64,
        /// Hot-GOP threshold relative to a video's peak GOP views.
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
        /// Append the breakdown as a CSV row to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Cluster the hot GOPs of a repository and dump the scatter CSV.
    Cluster {
        repo: PathBuf,
        #[arg(long, default_value_t = 0.30)]
        fav_pct: f64,
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
        /// Output CSV path; defaults to clusters.csv in the output dir.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a sweep described by a TOML manifest and write its reports.
    Sweep {
        spec: PathBuf,
        /// Overrides the manifest's output_dir.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Render table/curves/summary from a CSV of cost rows.
    Report {
        rows: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn parse_policy(s: &str) -> Result<PolicyId, String> {
    s.parse().map_err(|e| format!("{e}"))
}

/// Failures that stem from what the user asked for (exit 2) versus
/// everything else (exit 1).
enum CliError {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            CliError::Usage(e) => e,
            CliError::Runtime(e) => e,
        }
    }
}

fn usage(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Usage(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Runtime(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {:#}", err.error());
            ExitCode::from(err.code())
        }
    }
}

fn load_catalog_arg(path: &Option<PathBuf>) -> Result<PricingCatalog, CliError> {
    match path {
        None => Ok(default_catalog()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading catalog {}", p.display()))
                .map_err(runtime)?;
            goptier::pricing::load_catalog(&text).map_err(usage)
        }
    }
}

fn env_out_dir() -> PathBuf {
    std::env::var_os("GOPTIER_OUT_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

fn read_repo(path: &Path) -> Result<Repository, CliError> {
    Repository::from_file(path).map_err(|e| {
        runtime(anyhow!(e).context(format!("reading repository {}", path.display())))
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let catalog = load_catalog_arg(&cli.catalog)?;
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(usage(anyhow!("--jobs must be at least 1")));
        }
    }

    match cli.command {
        Command::Synth { spec, videos, seed, max_views, output } => {
            let mut synth_spec = match spec {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading spec {}", path.display()))
                        .map_err(runtime)?;
                    SynthSpec::from_toml_str(&text).map_err(usage)?
                }
                None => SynthSpec::default(),
            };
            if let Some(v) = videos {
                synth_spec.video_count = v;
            }
            if let Some(s) = seed {
                synth_spec.seed = s;
            }
            if let Some(m) = max_views {
                synth_spec.max_video_views = m;
            }
            let repo = synthesize(&synth_spec).map_err(usage)?;
            repo.write_file(&output)
                .map_err(|e| runtime(anyhow!(e).context(format!("writing {}", output.display()))))?;
            let t = repo.totals();
            println!(
                "wrote {}: videos={} gops={} total_size_mb={:.1} total_views={} seed={}",
                output.display(),
                repo.videos.len(),
                t.gop_count,
                t.total_size_mb,
                t.total_views,
                synth_spec.seed
            );
            Ok(())
        }

        Command::Cost { repo, policy, fav_pct, threshold, csv } => {
            let repository = read_repo(&repo)?;
            let favs = repository.select_favs(fav_pct, threshold).map_err(usage)?;
            let breakdown =
                evaluate_policy(policy, &repository, &favs, &catalog, &ClusterConfig::default())
                    .map_err(|e| runtime(anyhow!(e)))?;
            print_breakdown(&breakdown);
            if let Some(csv_path) = csv {
                append_cost_csv(&csv_path, fav_pct, repository.synthesis_seed.unwrap_or(0), &breakdown)
                    .map_err(runtime)?;
                println!("appended row to {}", csv_path.display());
            }
            Ok(())
        }

        Command::Cluster { repo, fav_pct, threshold, output } => {
            let repository = read_repo(&repo)?;
            let csv = cluster_scatter_csv(
                &repository,
                fav_pct,
                threshold,
                &catalog,
                &ClusterConfig::default(),
            )
            .map_err(map_sweep_error)?;
            let path = output.unwrap_or_else(|| env_out_dir().join("clusters.csv"));
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent).map_err(|e| runtime(anyhow!(e)))?;
                }
            }
            std::fs::write(&path, csv).map_err(|e| runtime(anyhow!(e)))?;
            println!("wrote {}", path.display());
            Ok(())
        }

        Command::Sweep { spec, out_dir } => {
            let sweep_spec = load_sweep_spec(&spec)?;
            let dir = out_dir.unwrap_or_else(|| sweep_spec.output_dir.clone());
            let result = match run_with_jobs(cli.jobs, || run_sweep(&sweep_spec, &catalog)) {
                Ok(result) => result,
                Err(SweepError::Partial { failures, .. }) => {
                    for f in &failures {
                        eprintln!(
                            "cell failed: fav_pct={} seed={} policy={}: {}",
                            f.fav_pct,
                            f.seed,
                            f.policy.map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
                            f.message
                        );
                    }
                    return Err(runtime(anyhow!("{} sweep cells failed", failures.len())));
                }
                Err(e) => return Err(map_sweep_error(e)),
            };
            write_sweep_outputs(&sweep_spec, &result, &dir, &catalog)?;
            Ok(())
        }

        Command::Report { rows, out_dir } => {
            let text = std::fs::read_to_string(&rows)
                .with_context(|| format!("reading rows {}", rows.display()))
                .map_err(runtime)?;
            let result = SweepResult::from_csv(&text).map_err(usage)?;
            let report = render_report(&result).map_err(map_sweep_error)?;
            let dir = out_dir.unwrap_or_else(env_out_dir);
            report.write_to(&dir).map_err(|e| runtime(anyhow!(e)))?;
            print!("{}", report.summary_text);
            println!("wrote {}", dir.join("table.csv").display());
            println!("wrote {}", dir.join("curves.csv").display());
            println!("wrote {}", dir.join("summary.txt").display());
            Ok(())
        }
    }
}

/// Runs `f` inside a bounded rayon pool when --jobs was given.
fn run_with_jobs<T: Send>(
    jobs: Option<usize>,
    f: impl FnOnce() -> Result<T, SweepError> + Send,
) -> Result<T, SweepError> {
    match jobs {
        None => f(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("thread pool");
            pool.install(f)
        }
    }
}

fn load_sweep_spec(path: &Path) -> Result<SweepSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading sweep spec {}", path.display()))
        .map_err(runtime)?;
    SweepSpec::from_toml_str(&text).map_err(usage)
}

fn map_sweep_error(e: SweepError) -> CliError {
    match e {
        SweepError::InvalidSpec(_) | SweepError::EmptyResult | SweepError::Csv(_) => {
            usage(anyhow!(e))
        }
        other => runtime(anyhow!(other)),
    }
}

fn write_sweep_outputs(
    spec: &SweepSpec,
    result: &SweepResult,
    dir: &Path,
    catalog: &PricingCatalog,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| runtime(anyhow!(e)))?;
    let report = render_report(result).map_err(map_sweep_error)?;
    report.write_to(dir).map_err(|e| runtime(anyhow!(e)))?;
    std::fs::write(dir.join("rows.csv"), result.to_rows_csv()).map_err(|e| runtime(anyhow!(e)))?;

    // Scatter dump of the hottest setting: highest FAV percentage, first seed.
    let top_fav = *spec.fav_percentages.last().expect("validated spec");
    let repo = match &spec.repo {
        Some(path) => Repository::from_file(path).map_err(|e| runtime(anyhow!(e)))?,
        None => {
            let base = spec.synth.clone().unwrap_or_default();
            let synth_spec = SynthSpec { seed: spec.seeds[0], ..base };
            synthesize(&synth_spec).map_err(|e| runtime(anyhow!(e)))?
        }
    };
    let scatter = cluster_scatter_csv(
        &repo,
        top_fav,
        spec.gop_hotness_threshold,
        catalog,
        &ClusterConfig::default(),
    )
    .map_err(map_sweep_error)?;
    std::fs::write(dir.join("clusters.csv"), scatter).map_err(|e| runtime(anyhow!(e)))?;

    print!("{}", report.summary_text);
    for name in ["table.csv", "curves.csv", "summary.txt", "rows.csv", "clusters.csv"] {
        println!("wrote {}", dir.join(name).display());
    }
    Ok(())
}

fn print_breakdown(b: &CostBreakdown) {
    println!("policy: {}", b.policy);
    println!("storage_usd: {}", b.storage_usd);
    println!("compute_usd: {}", b.compute_usd);
    println!("total_usd: {}", b.total_usd);
    for tier in TierId::ALL {
        println!("tier {}: {}", tier, b.per_tier(tier));
    }
    for (label, cost) in b.per_cluster_usd.iter().enumerate() {
        println!("cluster c{}: {}", label + 1, cost);
    }
}

fn append_cost_csv(
    path: &Path,
    fav_pct: f64,
    seed: u64,
    b: &CostBreakdown,
) -> anyhow::Result<()> {
    let needs_header = !path.exists() || std::fs::metadata(path)?.len() == 0;
    let mut file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    if needs_header {
        writeln!(file, "{ROWS_CSV_HEADER}")?;
    }
    writeln!(
        file,
        "{},{},{},{},{},{},{},{},{},{}",
        b.policy,
        fav_pct,
        seed,
        b.storage_usd,
        b.compute_usd,
        b.total_usd,
        b.per_tier_usd[0],
        b.per_tier_usd[1],
        b.per_tier_usd[2],
        b.per_tier_usd[3],
    )?;
    Ok(())
}
