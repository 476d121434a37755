use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_traits::ToPrimitive;
use serde::Serialize;

use kpivot::error::Result;
use kpivot::harness::{
    self, brute_force_result, constants_dump, mean_study, oracle_gap_study, parse_grid,
    parse_strategy, rate_study, summarize_runs, ExperimentConfig,
};
use kpivot::limitdist::{kde_density, silverman_bandwidth, EmpiricalDistribution, FixpointSampler};
use kpivot::output::{write_csv, write_json, Format};
use kpivot::sorter::run_experiment;
use kpivot::{enumerate_trees, exact};

/// Experiment runner for optimal K-pivot quicksort and its constants.
#[derive(Parser)]
#[command(name = "kpivot", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct OutputArgs {
    /// Write machine-readable results to this file.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format: csv | json.
    #[arg(long, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate all classification trees for K pivots.
    Trees {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo estimate of gamma_K = E[l_opt(D)].
    Gamma {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo estimate of sigma^2_K.
    Sigma2 {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        /// alpha_K estimate, required for k > 6.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// The Psi_n recursion up to n.
    Psi {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        /// Exact rational arithmetic (n <= 200).
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Dump the tabulated exact constants and the K=3 expansion.
    Constants {
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Sort uniform random keys and report comparison statistics.
    Sort {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        runs: u64,
        /// adaptive | fixed:<idx> | oracle
        #[arg(long, default_value = "adaptive")]
        strategy: String,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Mean of X_n across an n-grid with the leading term removed.
    MeanStudy {
        #[arg(long)]
        k: usize,
        /// Size grid, a:b:mult or a single integer.
        #[arg(long = "n-grid")]
        n_grid: String,
        #[arg(long, default_value_t = 400)]
        runs: u64,
        #[arg(long, default_value = "adaptive")]
        strategy: String,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Top-level adaptive-vs-oracle partition cost gap.
    OracleGap {
        #[arg(long)]
        k: usize,
        #[arg(long = "n-grid")]
        n_grid: String,
        #[arg(long, default_value_t = 2000)]
        runs: u64,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Sample the limit distribution Z_K (optionally a KDE curve).
    Zsample {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 30)]
        depth: u32,
        /// Emit a kernel density curve instead of raw samples.
        #[arg(long)]
        kde: bool,
        /// KDE bandwidth; Silverman's rule when omitted.
        #[arg(long)]
        bandwidth: Option<f64>,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Distances between Y_n and Z_K across an n-grid.
    RateStudy {
        #[arg(long)]
        k: usize,
        #[arg(long = "n-grid")]
        n_grid: String,
        #[arg(long, default_value_t = 10_000)]
        runs: u64,
        /// Reference Z_K sample size; must be >= runs.
        #[arg(long = "z-samples", default_value_t = 100_000)]
        z_samples: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact moments by enumerating all permutations (n <= 9).
    BruteForce {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "adaptive")]
        strategy: String,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Serialize)]
struct TreesReport {
    k: usize,
    count: usize,
    trees: Vec<TreeRow>,
}

#[derive(Serialize)]
struct TreeRow {
    canonical_index: usize,
    depths: Vec<u32>,
    tree: String,
}

#[derive(Serialize)]
struct EstimateReport {
    command: &'static str,
    k: usize,
    samples: u64,
    seed: u64,
    estimate: f64,
    std_error: f64,
}

fn emit<T: Serialize>(
    out: &OutputArgs,
    value: &T,
    header: &[&str],
    rows: Vec<Vec<String>>,
) -> Result<()> {
    if let Some(path) = &out.output {
        match out.format {
            Format::Json => write_json(path, value)?,
            Format::Csv => write_csv(path, header, &rows)?,
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Trees { k, seed: _, out } => {
            let ts = enumerate_trees(k)?;
            let report = TreesReport {
                k,
                count: ts.len(),
                trees: ts
                    .trees()
                    .iter()
                    .map(|t| TreeRow {
                        canonical_index: t.canonical_index(),
                        depths: t.depths().to_vec(),
                        tree: t.to_string(),
                    })
                    .collect(),
            };
            let rows = report
                .trees
                .iter()
                .map(|t| {
                    vec![
                        t.canonical_index.to_string(),
                        format!(
                            "[{}]",
                            t.depths
                                .iter()
                                .map(|d| d.to_string())
                                .collect::<Vec<_>>()
                                .join(" ")
                        ),
                        t.tree.clone(),
                    ]
                })
                .collect();
            emit(&out, &report, &["canonical_index", "depths", "tree"], rows)?;
            println!("trees: k={k} count={}", report.count);
        }
        Cmd::Gamma {
            k,
            samples,
            seed,
            out,
        } => {
            let (estimate, std_error) = kpivot::spacings::gamma_mc(k, samples, seed)?;
            let report = EstimateReport {
                command: "gamma",
                k,
                samples,
                seed,
                estimate,
                std_error,
            };
            let rows = vec![vec![
                k.to_string(),
                samples.to_string(),
                seed.to_string(),
                estimate.to_string(),
                std_error.to_string(),
            ]];
            emit(&out, &report, &["k", "samples", "seed", "estimate", "std_error"], rows)?;
            println!("gamma: k={k} estimate={estimate:.6} std_error={std_error:.2e}");
        }
        Cmd::Sigma2 {
            k,
            samples,
            alpha,
            seed,
            out,
        } => {
            let (estimate, std_error) = kpivot::spacings::sigma2_mc(k, samples, seed, alpha)?;
            let report = EstimateReport {
                command: "sigma2",
                k,
                samples,
                seed,
                estimate,
                std_error,
            };
            let rows = vec![vec![
                k.to_string(),
                samples.to_string(),
                seed.to_string(),
                estimate.to_string(),
                std_error.to_string(),
            ]];
            emit(&out, &report, &["k", "samples", "seed", "estimate", "std_error"], rows)?;
            println!("sigma2: k={k} estimate={estimate:.6} std_error={std_error:.2e}");
        }
        Cmd::Psi {
            k,
            n,
            exact: use_exact,
            seed: _,
            out,
        } => {
            #[derive(Serialize)]
            struct PsiReport {
                k: usize,
                n_max: usize,
                exact: bool,
                rows: Vec<PsiRow>,
            }
            #[derive(Serialize)]
            struct PsiRow {
                n: usize,
                psi: f64,
                psi_exact: Option<String>,
            }
            let gamma = exact::gamma_exact(k)?;
            let rows: Vec<PsiRow> = if use_exact {
                if n > 200 {
                    return Err(kpivot::Error::Config(
                        "exact psi supported for n <= 200".into(),
                    ));
                }
                exact::psi_dp_exact(k, n, &gamma)
                    .iter()
                    .enumerate()
                    .map(|(i, v)| PsiRow {
                        n: i,
                        psi: v.to_f64().unwrap(),
                        psi_exact: Some(format!("{}/{}", v.numer(), v.denom())),
                    })
                    .collect()
            } else {
                exact::psi_dp_f64(k, n, gamma.to_f64().unwrap())
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| PsiRow {
                        n: i,
                        psi: v,
                        psi_exact: None,
                    })
                    .collect()
            };
            let report = PsiReport {
                k,
                n_max: n,
                exact: use_exact,
                rows,
            };
            let csv_rows = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.psi.to_string(),
                        r.psi_exact.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            let last = report.rows.last().map(|r| r.psi).unwrap_or(0.0);
            emit(&out, &report, &["n", "psi", "psi_exact"], csv_rows)?;
            println!("psi: k={k} n={n} psi_n={last:.4}");
        }
        Cmd::Constants { seed: _, out } => {
            let dump = constants_dump();
            let rows = dump
                .table
                .iter()
                .map(|r| {
                    vec![
                        r.k.to_string(),
                        r.gamma.clone(),
                        r.alpha.clone(),
                        r.alpha_decimal.to_string(),
                    ]
                })
                .collect();
            emit(&out, &dump, &["k", "gamma", "alpha", "alpha_decimal"], rows)?;
            println!(
                "constants: {} tabulated rows, sigma2_3={:.6}",
                dump.table.len(),
                dump.k3.sigma2_3
            );
        }
        Cmd::Sort {
            k,
            n,
            runs,
            strategy,
            seed,
            out,
        } => {
            let strategy = parse_strategy(&strategy)?;
            let stats = run_experiment(k, n, runs, strategy, seed)?;
            let summary = summarize_runs(k, n, &stats);
            let rows = vec![vec![
                k.to_string(),
                n.to_string(),
                runs.to_string(),
                summary.mean_total.to_string(),
                summary.std_error.to_string(),
                summary.mean_partition.to_string(),
                summary.mean_pivot_sort.to_string(),
                summary.mean_base_case.to_string(),
            ]];
            emit(
                &out,
                &summary,
                &[
                    "k",
                    "n",
                    "runs",
                    "mean_total",
                    "std_error",
                    "mean_partition",
                    "mean_pivot_sort",
                    "mean_base_case",
                ],
                rows,
            )?;
            println!(
                "sort: k={k} n={n} runs={runs} mean_total={:.2}",
                summary.mean_total
            );
        }
        Cmd::MeanStudy {
            k,
            n_grid,
            runs,
            strategy,
            seed,
            out,
        } => {
            let cfg = ExperimentConfig {
                k,
                n_grid: parse_grid(&n_grid)?,
                runs,
                samples: 0,
                depth: 0,
                strategy: parse_strategy(&strategy)?,
                seed,
            };
            #[derive(Serialize)]
            struct MeanStudyReport {
                k: usize,
                runs: u64,
                seed: u64,
                rows: Vec<harness::MeanStudyRow>,
            }
            let rows = mean_study(&cfg)?;
            let report = MeanStudyReport { k, runs, seed, rows };
            let csv_rows = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.mean.to_string(),
                        r.std_error.to_string(),
                        r.residual.to_string(),
                    ]
                })
                .collect();
            emit(&out, &report, &["n", "mean", "std_error", "residual"], csv_rows)?;
            let last = report.rows.last().unwrap();
            println!(
                "mean-study: k={k} grid={:?} last_residual={:.4}",
                report.rows.iter().map(|r| r.n).collect::<Vec<_>>(),
                last.residual
            );
        }
        Cmd::OracleGap {
            k,
            n_grid,
            runs,
            seed,
            out,
        } => {
            #[derive(Serialize)]
            struct OracleGapReport {
                k: usize,
                runs: u64,
                seed: u64,
                rows: Vec<harness::OracleGapRow>,
            }
            let rows = oracle_gap_study(k, &parse_grid(&n_grid)?, runs, seed)?;
            let report = OracleGapReport { k, runs, seed, rows };
            let csv_rows = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.gap.to_string(),
                        r.std_error.to_string(),
                    ]
                })
                .collect();
            emit(&out, &report, &["n", "gap", "std_error"], csv_rows)?;
            let last = report.rows.last().unwrap();
            println!("oracle-gap: k={k} largest_n={} gap={:.4}", last.n, last.gap);
        }
        Cmd::Zsample {
            k,
            samples,
            depth,
            kde,
            bandwidth,
            seed,
            out,
        } => {
            let sampler = FixpointSampler::new(k, depth, None)?;
            let dist = EmpiricalDistribution::from_values(sampler.sample_pool(samples, seed));
            if kde {
                #[derive(Serialize)]
                struct KdeReport {
                    k: usize,
                    samples: usize,
                    depth: u32,
                    bandwidth: f64,
                    grid: Vec<f64>,
                    density: Vec<f64>,
                }
                let bw = bandwidth.unwrap_or_else(|| silverman_bandwidth(&dist));
                let lo = dist.values()[0] - 4.0 * bw;
                let hi = dist.values()[dist.size() - 1] + 4.0 * bw;
                let grid: Vec<f64> = (0..512)
                    .map(|i| lo + (hi - lo) * i as f64 / 511.0)
                    .collect();
                let density = kde_density(&dist, &grid, bw)?;
                let rows = grid
                    .iter()
                    .zip(&density)
                    .map(|(g, d)| vec![g.to_string(), d.to_string()])
                    .collect();
                let report = KdeReport {
                    k,
                    samples,
                    depth,
                    bandwidth: bw,
                    grid,
                    density,
                };
                emit(&out, &report, &["grid", "density"], rows)?;
                println!(
                    "zsample: k={k} kde bandwidth={bw:.4} var={:.6}",
                    dist.variance()
                );
            } else {
                #[derive(Serialize)]
                struct ZsampleReport {
                    k: usize,
                    samples: usize,
                    depth: u32,
                    seed: u64,
                    mean: f64,
                    variance: f64,
                    values: Vec<f64>,
                }
                let rows = dist.values().iter().map(|v| vec![v.to_string()]).collect();
                let report = ZsampleReport {
                    k,
                    samples,
                    depth,
                    seed,
                    mean: dist.mean(),
                    variance: dist.variance(),
                    values: dist.values().to_vec(),
                };
                emit(&out, &report, &["value"], rows)?;
                println!(
                    "zsample: k={k} samples={samples} mean={:.5} var={:.6}",
                    report.mean, report.variance
                );
            }
        }
        Cmd::RateStudy {
            k,
            n_grid,
            runs,
            z_samples,
            seed,
            out,
        } => {
            let result = rate_study(k, &parse_grid(&n_grid)?, runs, z_samples, seed)?;
            let rows = result
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.mean.to_string(),
                        r.variance.to_string(),
                        r.l2.to_string(),
                        r.ks.to_string(),
                    ]
                })
                .collect();
            emit(&out, &result, &["n", "mean", "variance", "l2", "ks"], rows)?;
            println!(
                "rate-study: k={k} l2_slope={:.3}{}",
                result.l2_slope,
                if result.outside_stated_range {
                    " (outside established rate-bound range)"
                } else {
                    ""
                }
            );
        }
        Cmd::BruteForce {
            k,
            n,
            strategy,
            seed: _,
            out,
        } => {
            let strategy = parse_strategy(&strategy)?;
            let result = brute_force_result(k, n, strategy)?;
            let rows = vec![vec![
                k.to_string(),
                n.to_string(),
                result.mean.clone(),
                result.variance.clone(),
            ]];
            emit(&out, &result, &["k", "n", "mean", "variance"], rows)?;
            println!(
                "brute-force: k={k} n={n} mean={} variance={}",
                result.mean, result.variance
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
