//! Command-line surface of the analysis pipeline.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 batch completed with per-day failures.

use betarank::covariates::load_covariates;
use betarank::distributions::BrfQuantile;
use betarank::error::Error;
use betarank::fitting::{rank_sample, FitSpace, NonPositivePolicy};
use betarank::model_selection::compare_models;
use betarank::od_network::{centralities, load_edgelist, Metric};
use betarank::pipeline::batch::{analyze_day, associations_for_day, run_batch, run_day};
use betarank::pipeline::plot_data::{
    emit_log_density_curve, emit_log_histogram, emit_qq, emit_rank_size, emit_trajectory,
};
use betarank::pipeline::synthetic::generate_synthetic_day;
use betarank::pipeline::RunConfig;
use betarank::regimes::{classify_regimes, hub_ranking, ModeMethod};
use chrono::{Datelike, NaiveDate};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "betarank",
    version,
    about = "Beta-rank-function analysis of daily origin-destination networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Degree,
    Strength,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::Degree => Metric::Degree,
            MetricArg::Strength => Metric::Strength,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum SpaceArg {
    #[default]
    Log,
    Raw,
}

impl From<SpaceArg> for FitSpace {
    fn from(s: SpaceArg) -> FitSpace {
        match s {
            SpaceArg::Log => FitSpace::Log,
            SpaceArg::Raw => FitSpace::Raw,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    BrfFit,
    Kde,
}

impl From<MethodArg> for ModeMethod {
    fn from(m: MethodArg) -> ModeMethod {
        match m {
            MethodArg::BrfFit => ModeMethod::BrfFit,
            MethodArg::Kde => ModeMethod::EmpiricalKde,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Histogram,
    RankSize,
    Qq,
    Trajectory,
}

#[derive(Subcommand)]
enum Command {
    /// Fit BRF, power law and lognormal to one sample file (one positive
    /// value per line) and print the comparison verdict as JSON
    Fit {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        space: SpaceArg,
        #[arg(long)]
        label: Option<String>,
    },
    /// Analyze one day's edgelist and write its artifact set
    AnalyzeDay {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        date: NaiveDate,
    },
    /// Run the batch over every day in the input directory
    Batch {
        #[arg(long)]
        config: PathBuf,
    },
    /// Top nodes of a month by mean centrality
    Hubs {
        #[arg(long)]
        config: PathBuf,
        /// Month as YYYY-MM
        #[arg(long)]
        month: String,
        #[arg(long, value_enum)]
        metric: MetricArg,
        #[arg(short = 'k', long, default_value_t = 20)]
        top: usize,
    },
    /// Classify one day's nodes into high/low regimes
    Regimes {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        date: NaiveDate,
        #[arg(long, value_enum)]
        metric: MetricArg,
        /// Override the configured mode method
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Association tests between covariates and regime membership on a date
    Covariates {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        date: NaiveDate,
    },
    /// Generate a synthetic daily edgelist
    Simulate {
        #[arg(long, default_value_t = 2000)]
        nodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "2020-01-01")]
        date: NaiveDate,
        #[arg(long, default_value_t = 80.0)]
        degree_scale: f64,
        #[arg(long, default_value_t = 0.4)]
        degree_a: f64,
        #[arg(long, default_value_t = 0.25)]
        degree_b: f64,
        #[arg(long, default_value_t = 500.0)]
        strength_scale: f64,
        #[arg(long, default_value_t = 0.6)]
        strength_a: f64,
        #[arg(long, default_value_t = 0.3)]
        strength_b: f64,
    },
    /// Emit plot-ready CSVs (histogram / rank-size / qq need --date;
    /// trajectory reads the batch aggregates)
    PlotData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        date: Option<NaiveDate>,
        #[arg(long, value_enum, default_value = "strength")]
        metric: MetricArg,
        /// Histogram bin count
        #[arg(long, default_value_t = 40)]
        bins: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own message; usage problems exit 1
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Usage(_) | Error::Config(_) => 1,
                _ => 2,
            })
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Fit { file, space, label } => {
            let values = read_value_file(&file)?;
            let label = label.unwrap_or_else(|| file.display().to_string());
            let sample = rank_sample(&values, label, NonPositivePolicy::Drop)?;
            let verdict = compare_models(&sample, space.into())?;
            println!("{}", to_json(&verdict)?);
            Ok(ExitCode::SUCCESS)
        }

        Command::AnalyzeDay { config, date } => {
            let config = RunConfig::load(&config)?;
            let file = day_file(&config, date)?;
            let bundle = run_day(&config, date, &file)?;
            println!(
                "{}",
                to_json(&serde_json::json!({
                    "date": date,
                    "nodes": bundle.node_count,
                    "edges": bundle.edge_count,
                    "total_weight": bundle.total_weight,
                    "output_dir": config.output_dir.join(date.to_string()),
                }))?
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Batch { config } => {
            let config = RunConfig::load(&config)?;
            let summary = run_batch(&config)?;
            for warning in &summary.warnings {
                eprintln!("warning: {warning}");
            }
            println!(
                "{}",
                to_json(&serde_json::json!({
                    "days_succeeded": summary.succeeded,
                    "days_failed": summary.failed,
                    "output_dir": summary.output_dir,
                }))?
            );
            Ok(if summary.failed > 0 { ExitCode::from(3) } else { ExitCode::SUCCESS })
        }

        Command::Hubs { config, month, metric, top } => {
            let config = RunConfig::load(&config)?;
            let (year, month_no) = parse_month(&month)?;
            let days = config.discover_days()?;
            let mut month_days = Vec::new();
            for (date, path) in &days {
                if date.year() == year && date.month() == month_no {
                    let net = load_edgelist(path, &config.edgelist, *date, config.row_errors)?;
                    month_days.push((*date, centralities(&net, config.self_loops)));
                }
            }
            let borrowed: Vec<(NaiveDate, &[betarank::od_network::NodeCentrality])> =
                month_days.iter().map(|(d, c)| (*d, c.as_slice())).collect();
            let ranking = hub_ranking(&borrowed, metric.into(), top)?;
            println!("{}", to_json(&ranking)?);
            Ok(ExitCode::SUCCESS)
        }

        Command::Regimes { config, date, metric, method } => {
            let config = RunConfig::load(&config)?;
            let file = day_file(&config, date)?;
            let net = load_edgelist(&file, &config.edgelist, date, config.row_errors)?;
            let cents = centralities(&net, config.self_loops);
            let mode_method = method.map(ModeMethod::from).unwrap_or(config.mode_method);
            let partition =
                classify_regimes(&cents, date, metric.into(), mode_method, config.fit_space)?;
            println!(
                "{}",
                to_json(&serde_json::json!({
                    "date": date,
                    "metric": partition.metric,
                    "mode_value": partition.mode_value,
                    "mode_method": partition.mode_method,
                    "fell_back_to_kde": partition.fell_back_to_kde,
                    "high": partition.high_count(),
                    "low": partition.low_count(),
                }))?
            );
            std::fs::create_dir_all(&config.output_dir)?;
            let out = config
                .output_dir
                .join(format!("regimes_{}_{date}.csv", partition.metric));
            let mut text = String::from("node,metric,label,mode_value\n");
            for (node, label) in &partition.assignments {
                text.push_str(&format!(
                    "{node},{},{label},{}\n",
                    partition.metric, partition.mode_value
                ));
            }
            std::fs::write(&out, text)?;
            eprintln!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::Covariates { config, date } => {
            let config = RunConfig::load(&config)?;
            if config.covariates.is_empty() {
                return Err(Error::Config("no covariate files configured".to_string()));
            }
            let reference = config.reference_point.ok_or_else(|| {
                Error::Config("reference_point required for the distance covariate".to_string())
            })?;
            let file = day_file(&config, date)?;
            let bundle = analyze_day(&config, date, &file)?;
            let (covariates, _) = load_covariates(&config.covariates, reference)?;
            let report = associations_for_day(&bundle, &covariates, &config)?;
            println!("{}", to_json(&report)?);
            std::fs::create_dir_all(config.output_dir.join("aggregate"))?;
            let out = config.output_dir.join("aggregate").join(format!("associations_{date}.json"));
            std::fs::write(&out, to_json(&report)? + "\n")?;
            eprintln!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }

        Command::Simulate {
            nodes,
            seed,
            out,
            date,
            degree_scale,
            degree_a,
            degree_b,
            strength_scale,
            strength_a,
            strength_b,
        } => {
            let degree = BrfQuantile::new(degree_scale, degree_a, degree_b)?;
            let strength = BrfQuantile::new(strength_scale, strength_a, strength_b)?;
            let (net, report) = generate_synthetic_day(nodes, &degree, &strength, date, seed)?;
            net.write_edgelist(&out)?;
            println!(
                "{}",
                to_json(&serde_json::json!({
                    "file": out,
                    "nodes": net.node_count(),
                    "edges": net.edge_count(),
                    "total_weight": net.total_weight(),
                    "degree_targets_clamped": report.degree_targets_clamped,
                    "strength_targets_raised": report.strength_targets_raised,
                    "degree_shortfall": report.degree_shortfall,
                    "strength_shortfall": report.strength_shortfall,
                }))?
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::PlotData { config, kind, date, metric, bins } => {
            let config = RunConfig::load(&config)?;
            let metric: Metric = metric.into();
            let plots_dir = config.output_dir.join("plots");
            std::fs::create_dir_all(&plots_dir)?;
            match kind {
                KindArg::Trajectory => {
                    let params = config
                        .output_dir
                        .join("aggregate")
                        .join(format!("params_{metric}.csv"));
                    if !params.is_file() {
                        return Err(Error::Usage(format!(
                            "{} not found; run `betarank batch` first",
                            params.display()
                        )));
                    }
                    let rows = read_trajectory_rows(&params)?;
                    let out = plots_dir.join(format!("trajectory_{metric}.csv"));
                    emit_trajectory(&rows, &out)?;
                    eprintln!("wrote {}", out.display());
                }
                KindArg::Histogram | KindArg::RankSize | KindArg::Qq => {
                    let date = date.ok_or_else(|| {
                        Error::Usage("this plot kind needs --date".to_string())
                    })?;
                    let file = day_file(&config, date)?;
                    let net = load_edgelist(&file, &config.edgelist, date, config.row_errors)?;
                    let cents = centralities(&net, config.self_loops);
                    let values: Vec<f64> =
                        cents.iter().map(|c| c.value(metric)).filter(|v| *v > 0.0).collect();
                    match kind {
                        KindArg::Histogram => {
                            let out = plots_dir.join(format!("histogram_{metric}_{date}.csv"));
                            emit_log_histogram(&values, bins, &out)?;
                            eprintln!("wrote {}", out.display());

                            let sample = rank_sample(
                                &values,
                                format!("{date}/{metric}"),
                                NonPositivePolicy::Drop,
                            )?;
                            let fit =
                                betarank::fitting::fit_dgbd(&sample, config.fit_space, None)?;
                            let params = fit.params.as_dgbd().expect("dgbd fit");
                            if params.a > 1e-6 && params.b > 1e-6 {
                                let dist = params.distribution();
                                let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
                                let lo = logs.iter().cloned().fold(f64::INFINITY, f64::min);
                                let hi = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                                let out = plots_dir.join(format!("density_{metric}_{date}.csv"));
                                emit_log_density_curve(&dist, (lo, hi), 256, &out)?;
                                eprintln!("wrote {}", out.display());
                            }
                        }
                        KindArg::RankSize => {
                            let sample = rank_sample(
                                &values,
                                format!("{date}/{metric}"),
                                NonPositivePolicy::Drop,
                            )?;
                            let brf =
                                betarank::fitting::fit_dgbd(&sample, config.fit_space, None)?;
                            let pl =
                                betarank::fitting::fit_power_law(&sample, config.fit_space)?;
                            let out = plots_dir.join(format!("rank_size_{metric}_{date}.csv"));
                            emit_rank_size(
                                &sample,
                                brf.params.as_dgbd().expect("dgbd fit"),
                                pl.params.as_dgbd(),
                                &out,
                            )?;
                            eprintln!("wrote {}", out.display());
                        }
                        KindArg::Qq => {
                            let pairs = betarank::fitting::qq_log_data(&values, None)?;
                            let out = plots_dir.join(format!("qq_{metric}_{date}.csv"));
                            emit_qq(&pairs, &out)?;
                            eprintln!("wrote {}", out.display());
                        }
                        KindArg::Trajectory => unreachable!(),
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn day_file(config: &RunConfig, date: NaiveDate) -> Result<PathBuf, Error> {
    let name = date.format(&config.filename_pattern).to_string();
    let path = config.input_dir.join(&name);
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::Usage(format!("no file {name} in {}", config.input_dir.display())))
    }
}

fn read_value_file(path: &Path) -> Result<Vec<f64>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Ingestion {
        path: path.to_path_buf(),
        row: None,
        message: e.to_string(),
    })?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Ingestion {
            path: path.to_path_buf(),
            row: Some(i as u64 + 1),
            message: format!("not a number: '{line}'"),
        })?;
        values.push(v);
    }
    Ok(values)
}

fn parse_month(text: &str) -> Result<(i32, u32), Error> {
    let parts: Vec<&str> = text.split('-').collect();
    let parsed = (|| {
        if parts.len() != 2 {
            return None;
        }
        let year: i32 = parts[0].parse().ok()?;
        let month: u32 = parts[1].parse().ok()?;
        (1..=12).contains(&month).then_some((year, month))
    })();
    parsed.ok_or_else(|| Error::Usage(format!("'{text}' is not a YYYY-MM month")))
}

fn read_trajectory_rows(params_csv: &Path) -> Result<Vec<(NaiveDate, f64, f64)>, Error> {
    let text = std::fs::read_to_string(params_csv)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let bad = |what: &str| Error::Ingestion {
            path: params_csv.to_path_buf(),
            row: Some(i as u64),
            message: format!("bad {what}"),
        };
        if cols.len() < 4 {
            return Err(bad("row"));
        }
        let date: NaiveDate = cols[0].parse().map_err(|_| bad("date"))?;
        let a: f64 = cols[2].parse().map_err(|_| bad("a"))?;
        let b: f64 = cols[3].parse().map_err(|_| bad("b"))?;
        rows.push((date, a, b));
    }
    Ok(rows)
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Error> {
    serde_json::to_string_pretty(value)
        .map_err(|e| Error::Numeric(format!("serialization failed: {e}")))
}
