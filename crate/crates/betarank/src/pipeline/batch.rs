//! Per-day analysis and the year-scale batch reduce.
//!
//! `run_day` computes the full artifact set for one edgelist (centralities,
//! in/out diagnostics, three-model comparison per metric and regime
//! partitions) and writes it under `output/<date>/`. `run_batch` fans
//! `run_day` over all discovered days, records a manifest entry per day,
//! then reduces aggregates in date order: parameter time series and
//! trajectories, concordance, monthly hubs, switching tables and
//! association reports.

use crate::covariates::{
    join_report, load_covariates, logistic_fit, rank_sum_test, AssociationReport,
    CovariateRecord, DesignMatrix, Regressor,
};
use crate::error::{Error, Result};
use crate::fitting::{rank_sample, NonPositivePolicy};
use crate::model_selection::{compare_models, floored_p, ComparisonVerdict};
use crate::od_network::{
    centralities, in_out_diagnostics, in_out_difference, load_edgelist, DailyNetwork,
    InOutDiagnostics, IngestReport, Metric, NodeCentrality, NodeId,
};
use crate::pipeline::config::RunConfig;
use crate::pipeline::plot_data::emit_trajectory;
use crate::regimes::{
    classify_values, concordance, hub_ranking, switching_nodes, ConcordanceReport,
    RegimeLabel, RegimePartition,
};
use chrono::{Datelike, NaiveDate};
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

// ============================================================================
// Per-day bundle
// ============================================================================

/// Analysis of one metric on one day.
#[derive(Debug, Clone, Serialize)]
pub struct MetricAnalysis {
    pub metric: Metric,
    pub verdict: ComparisonVerdict,
    pub partition: RegimePartition,
}

/// Everything computed for one day.
#[derive(Debug, Clone, Serialize)]
pub struct DayBundle {
    pub date: NaiveDate,
    pub node_count: usize,
    pub edge_count: usize,
    pub total_weight: u64,
    pub ingest: IngestReport,
    pub centralities: Vec<NodeCentrality>,
    pub in_out: Vec<InOutDiagnostics>,
    pub degree: MetricAnalysis,
    pub strength: MetricAnalysis,
}

/// Compute and write the full artifact set for one day.
///
/// All computation happens before any file is written, so a failing day
/// leaves no partial artifacts.
pub fn run_day(config: &RunConfig, date: NaiveDate, file: &Path) -> Result<DayBundle> {
    let bundle = analyze_day(config, date, file)?;
    let day_dir = config.output_dir.join(date.to_string());
    write_day(&bundle, &day_dir)?;
    Ok(bundle)
}

/// The computation half of [`run_day`]; writes nothing.
pub fn analyze_day(config: &RunConfig, date: NaiveDate, file: &Path) -> Result<DayBundle> {
    let net: DailyNetwork = load_edgelist(file, &config.edgelist, date, config.row_errors)?;
    let cents = centralities(&net, config.self_loops);

    let analyze_metric = |metric: Metric| -> Result<MetricAnalysis> {
        let values: Vec<f64> =
            cents.iter().map(|c| c.value(metric)).filter(|v| *v > 0.0).collect();
        let sample = rank_sample(&values, format!("{date}/{metric}"), NonPositivePolicy::Drop)?;
        let verdict = compare_models(&sample, config.fit_space)?;
        let pairs: Vec<(NodeId, f64)> =
            cents.iter().map(|c| (c.node.clone(), c.value(metric))).collect();
        let partition =
            classify_values(&pairs, date, metric, config.mode_method, config.fit_space)?;
        Ok(MetricAnalysis { metric, verdict, partition })
    };

    let degree = analyze_metric(Metric::Degree)?;
    let strength = analyze_metric(Metric::Strength)?;
    let in_out = vec![
        in_out_diagnostics(&cents, Metric::Degree)?,
        in_out_diagnostics(&cents, Metric::Strength)?,
    ];

    Ok(DayBundle {
        date,
        node_count: net.node_count(),
        edge_count: net.edge_count(),
        total_weight: net.total_weight(),
        ingest: net.ingest.clone(),
        centralities: cents,
        in_out,
        degree,
        strength,
    })
}

fn write_day(bundle: &DayBundle, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    crate::od_network::write_centralities_csv(&bundle.centralities, &dir.join("centralities.csv"))?;

    write_json(&dir.join("in_out.json"), &bundle.in_out)?;
    for metric in [Metric::Degree, Metric::Strength] {
        let diffs = in_out_difference(&bundle.centralities, metric);
        let mut f = create(&dir.join(format!("in_out_difference_{metric}.csv")))?;
        writeln!(f, "node,in_minus_out")?;
        for (node, d) in diffs {
            writeln!(f, "{node},{d}")?;
        }
    }

    write_json(&dir.join("verdict_degree.json"), &bundle.degree.verdict)?;
    write_json(&dir.join("verdict_strength.json"), &bundle.strength.verdict)?;
    write_partition_csv(&bundle.degree.partition, &dir.join("partition_degree.csv"))?;
    write_partition_csv(&bundle.strength.partition, &dir.join("partition_strength.csv"))?;
    write_json(&dir.join("ingest.json"), &bundle.ingest)?;
    Ok(())
}

fn write_partition_csv(p: &RegimePartition, path: &Path) -> Result<()> {
    let mut f = create(path)?;
    writeln!(f, "node,metric,label,mode_value")?;
    for (node, label) in &p.assignments {
        writeln!(f, "{node},{},{label},{}", p.metric, p.mode_value)?;
    }
    Ok(())
}

// ============================================================================
// Batch
// ============================================================================

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub date: NaiveDate,
    pub file: PathBuf,
    pub status: ManifestStatus,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifestStatus {
    Success,
    Failed,
}

/// One row of the fitted-parameter time series.
#[derive(Debug, Clone, Serialize)]
pub struct TimeSeriesRow {
    pub date: NaiveDate,
    pub metric: Metric,
    pub scale: f64,
    pub a: f64,
    pub b: f64,
    pub converged: bool,
    pub mode_value: f64,
    pub delta_aic_brf_vs_power_law: Option<f64>,
    pub best_by_ks: Option<String>,
    pub best_by_aic: Option<String>,
}

/// What `run_batch` hands back in memory (everything is also on disk).
#[derive(Debug)]
pub struct BatchSummary {
    pub manifest: Vec<ManifestEntry>,
    pub succeeded: usize,
    pub failed: usize,
    pub time_series: Vec<TimeSeriesRow>,
    pub concordance: Option<ConcordanceReport>,
    pub warnings: Vec<String>,
    pub output_dir: PathBuf,
}

/// Run every discovered day (in parallel when configured) and reduce the
/// aggregates in date order. Individual day failures are recorded in the
/// manifest and the batch continues; the batch itself fails only when no
/// day succeeds or the input directory has no matching files.
pub fn run_batch(config: &RunConfig) -> Result<BatchSummary> {
    let days = config.discover_days()?;
    if days.is_empty() {
        return Err(Error::usage(format!(
            "no files matching '{}' in {}",
            config.filename_pattern,
            config.input_dir.display()
        )));
    }
    config.check_event_dates(&days)?;
    std::fs::create_dir_all(&config.output_dir)?;
    let aggregate_dir = config.output_dir.join("aggregate");
    std::fs::create_dir_all(&aggregate_dir)?;

    // fan out per-day work; order of results == order of days
    let results: Vec<std::result::Result<DayBundle, String>> =
        super::map_ordered(&days, config.parallelism, |(date, path)| {
            run_day(config, *date, path).map_err(|e| e.to_string())
        });

    let mut manifest = Vec::with_capacity(days.len());
    let mut bundles: Vec<DayBundle> = Vec::new();
    for ((date, path), result) in days.iter().zip(results) {
        match result {
            Ok(bundle) => {
                manifest.push(ManifestEntry {
                    date: *date,
                    file: path.clone(),
                    status: ManifestStatus::Success,
                    error: None,
                });
                bundles.push(bundle);
            }
            Err(message) => manifest.push(ManifestEntry {
                date: *date,
                file: path.clone(),
                status: ManifestStatus::Failed,
                error: Some(message),
            }),
        }
    }

    let failed = manifest.iter().filter(|m| m.status == ManifestStatus::Failed).count();
    if bundles.is_empty() {
        write_json(&aggregate_dir.join("manifest.json"), &manifest)?;
        return Err(Error::BatchAllFailed { total: days.len() });
    }

    let mut warnings = Vec::new();

    // --- parameter time series and trajectories
    let mut time_series = Vec::new();
    for metric in [Metric::Degree, Metric::Strength] {
        let rows: Vec<TimeSeriesRow> = bundles
            .iter()
            .map(|b| time_series_row(b, metric))
            .collect();
        write_params_csv(&rows, &bundles, metric, &aggregate_dir)?;
        let trajectory: Vec<(NaiveDate, f64, f64)> =
            rows.iter().map(|r| (r.date, r.a, r.b)).collect();
        emit_trajectory(&trajectory, &aggregate_dir.join(format!("trajectory_{metric}.csv")))?;
        time_series.extend(rows);
    }

    // --- concordance
    let degree_parts: Vec<RegimePartition> =
        bundles.iter().map(|b| b.degree.partition.clone()).collect();
    let strength_parts: Vec<RegimePartition> =
        bundles.iter().map(|b| b.strength.partition.clone()).collect();
    let concordance_report =
        concordance(&degree_parts, &strength_parts, config.concordance_threshold_days)?;
    write_json(&aggregate_dir.join("concordance.json"), &concordance_report)?;
    {
        let mut f = create(&aggregate_dir.join("persistent_discordant.csv"))?;
        writeln!(f, "node,discordant_days")?;
        for (node, days) in &concordance_report.persistent_discordant {
            writeln!(f, "{node},{days}")?;
        }
    }

    // --- monthly hubs
    let hubs_dir = aggregate_dir.join("hubs");
    std::fs::create_dir_all(&hubs_dir)?;
    let mut by_month: BTreeMap<(i32, u32), Vec<(NaiveDate, &[NodeCentrality])>> = BTreeMap::new();
    for b in &bundles {
        by_month
            .entry((b.date.year(), b.date.month()))
            .or_default()
            .push((b.date, b.centralities.as_slice()));
    }
    for ((year, month), month_days) in &by_month {
        for metric in [Metric::Degree, Metric::Strength] {
            let ranking = hub_ranking(month_days, metric, config.hub_top_k)?;
            let mut f = create(&hubs_dir.join(format!("hubs_{metric}_{year}-{month:02}.csv")))?;
            writeln!(f, "rank,node,mean_{metric}")?;
            for (i, (node, mean)) in ranking.entries.iter().enumerate() {
                writeln!(f, "{},{node},{mean}", i + 1)?;
            }
        }
    }

    // --- switching tables for configured day pairs
    let by_date: BTreeMap<NaiveDate, &DayBundle> = bundles.iter().map(|b| (b.date, b)).collect();
    for (before, after) in &config.switching_pairs {
        match (by_date.get(before), by_date.get(after)) {
            (Some(b1), Some(b2)) => {
                for (metric, p1, p2) in [
                    (Metric::Degree, &b1.degree.partition, &b2.degree.partition),
                    (Metric::Strength, &b1.strength.partition, &b2.strength.partition),
                ] {
                    let switches = switching_nodes(p1, p2)?;
                    let mut f = create(
                        &aggregate_dir.join(format!("switching_{metric}_{before}_{after}.csv")),
                    )?;
                    writeln!(f, "node,from,to")?;
                    for s in switches {
                        writeln!(f, "{},{},{}", s.node, s.from, s.to)?;
                    }
                }
            }
            _ => warnings.push(format!(
                "switching pair {before}/{after}: one or both days missing or failed"
            )),
        }
    }

    // --- association tests on configured dates
    if !config.association_dates.is_empty() {
        let reference = config.reference_point.unwrap_or((0.0, 0.0));
        let (covariates, load_summary) = load_covariates(&config.covariates, reference)?;
        write_json(&aggregate_dir.join("covariate_load.json"), &load_summary)?;
        for date in &config.association_dates {
            match by_date.get(date) {
                Some(bundle) => {
                    let report = associations_for_day(bundle, &covariates, config)?;
                    write_json(
                        &aggregate_dir.join(format!("associations_{date}.json")),
                        &report,
                    )?;
                }
                None => warnings
                    .push(format!("association date {date}: day missing or failed")),
            }
        }
    }

    // --- marker metadata (no computational role)
    {
        let mut f = create(&aggregate_dir.join("markers.csv"))?;
        writeln!(f, "kind,start,end")?;
        for d in &config.event_dates {
            writeln!(f, "event,{d},{d}")?;
        }
        if let Some(v) = &config.vacation_period {
            writeln!(f, "vacation,{},{}", v.start, v.end)?;
        }
    }

    write_json(&aggregate_dir.join("manifest.json"), &manifest)?;

    Ok(BatchSummary {
        succeeded: bundles.len(),
        failed,
        manifest,
        time_series,
        concordance: Some(concordance_report),
        warnings,
        output_dir: config.output_dir.clone(),
    })
}

fn time_series_row(bundle: &DayBundle, metric: Metric) -> TimeSeriesRow {
    let analysis = match metric {
        Metric::Degree => &bundle.degree,
        Metric::Strength => &bundle.strength,
    };
    let (scale, a, b) = analysis
        .verdict
        .brf_params
        .as_ref()
        .and_then(|p| p.as_dgbd())
        .map(|p| (p.scale, p.a, p.b))
        .unwrap_or((f64::NAN, f64::NAN, f64::NAN));
    TimeSeriesRow {
        date: bundle.date,
        metric,
        scale,
        a,
        b,
        converged: analysis.verdict.brf.as_ref().map(|s| s.converged).unwrap_or(false),
        mode_value: analysis.partition.mode_value,
        delta_aic_brf_vs_power_law: analysis.verdict.delta_aic_brf_vs_power_law,
        best_by_ks: analysis.verdict.best_by_ks.map(|m| m.to_string()),
        best_by_aic: analysis.verdict.best_by_aic.map(|m| m.to_string()),
    }
}

fn write_params_csv(
    rows: &[TimeSeriesRow],
    bundles: &[DayBundle],
    metric: Metric,
    dir: &Path,
) -> Result<()> {
    let mut f = create(&dir.join(format!("params_{metric}.csv")))?;
    writeln!(
        f,
        "date,scale,a,b,converged,mode_value,mode_method,ks_brf,ks_power_law,ks_lognormal,\
         ks_lognormal_rawscale,aic_brf,aic_power_law,aic_lognormal,delta_aic_brf_vs_power_law,\
         best_by_ks,best_by_aic,n"
    )?;
    for (row, bundle) in rows.iter().zip(bundles) {
        let analysis = match metric {
            Metric::Degree => &bundle.degree,
            Metric::Strength => &bundle.strength,
        };
        let v = &analysis.verdict;
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let score = |s: &Option<crate::model_selection::ModelScore>,
                     pick: fn(&crate::model_selection::ModelScore) -> f64| {
            s.as_ref().map(|s| pick(s).to_string()).unwrap_or_default()
        };
        writeln!(
            f,
            "{},{},{},{},{},{},{:?},{},{},{},{},{},{},{},{},{},{},{}",
            row.date,
            row.scale,
            row.a,
            row.b,
            row.converged,
            row.mode_value,
            analysis.partition.mode_method,
            score(&v.brf, |s| s.ks_statistic),
            score(&v.power_law, |s| s.ks_statistic),
            score(&v.lognormal, |s| s.ks_statistic),
            opt(v.ks_lognormal_rawscale),
            score(&v.brf, |s| s.aic),
            score(&v.power_law, |s| s.aic),
            score(&v.lognormal, |s| s.aic),
            opt(row.delta_aic_brf_vs_power_law),
            row.best_by_ks.clone().unwrap_or_default(),
            row.best_by_aic.clone().unwrap_or_default(),
            v.n,
        )?;
    }
    Ok(())
}

// ============================================================================
// Associations
// ============================================================================

#[derive(Debug, Clone, Serialize)]
pub struct DayAssociations {
    pub date: NaiveDate,
    pub join: crate::covariates::JoinReport,
    pub reports: Vec<MetricAssociations>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricAssociations {
    pub metric: Metric,
    pub tests: Vec<AssociationReport>,
}

/// Rank-sum and logistic association tests for one analyzed day, joining
/// its partitions to the covariate table.
pub fn associations_for_day(
    bundle: &DayBundle,
    covariates: &BTreeMap<NodeId, CovariateRecord>,
    config: &RunConfig,
) -> Result<DayAssociations> {
    let nodes: Vec<NodeId> = bundle.centralities.iter().map(|c| c.node.clone()).collect();
    let join = join_report(covariates, &nodes);

    let mut reports = Vec::new();
    for (metric, partition) in [
        (Metric::Degree, &bundle.degree.partition),
        (Metric::Strength, &bundle.strength.partition),
    ] {
        // nodes with both a label and a covariate record
        let labeled: Vec<(&CovariateRecord, bool)> = partition
            .assignments
            .iter()
            .filter_map(|(node, label)| {
                covariates.get(node).map(|r| (r, *label == RegimeLabel::High))
            })
            .collect();

        let mut tests = Vec::new();
        // rank-sum for the two continuous covariates
        for regressor in [Regressor::Population, Regressor::Distance] {
            let high: Vec<f64> = labeled
                .iter()
                .filter(|(_, is_high)| *is_high)
                .map(|(r, _)| crate::covariates::covariate_value(r, regressor))
                .collect();
            let low: Vec<f64> = labeled
                .iter()
                .filter(|(_, is_high)| !*is_high)
                .map(|(r, _)| crate::covariates::covariate_value(r, regressor))
                .collect();
            let result = rank_sum_test(&high, &low)?;
            let mut report = AssociationReport::from_rank_sum(regressor, &result);
            report.p_value = floored_p(report.p_value);
            tests.push(report);
        }
        // logistic regressions group ~ covariate
        let labels: Vec<bool> = labeled.iter().map(|(_, h)| *h).collect();
        for regressor in [Regressor::Population, Regressor::Distance, Regressor::Marginalization] {
            let design = match regressor {
                Regressor::Marginalization => {
                    let levels: Vec<_> =
                        labeled.iter().map(|(r, _)| r.marginalization).collect();
                    DesignMatrix::from_marginalization(&levels, config.marginalization_encoding)
                }
                _ => DesignMatrix::single(
                    format!("{regressor:?}").to_lowercase(),
                    labeled
                        .iter()
                        .map(|(r, _)| crate::covariates::covariate_value(r, regressor))
                        .collect(),
                ),
            };
            let fit = logistic_fit(&labels, &design)?;
            let mut report = AssociationReport::from_logistic(regressor, &fit);
            report.p_value = floored_p(report.p_value);
            tests.push(report);
        }
        reports.push(MetricAssociations { metric, tests });
    }

    Ok(DayAssociations { date: bundle.date, join, reports })
}

// ============================================================================
// Small IO helpers
// ============================================================================

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::new(std::fs::File::create(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Numeric(format!("serialization failed: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::BrfQuantile;
    use crate::pipeline::synthetic::generate_synthetic_day;

    fn write_synthetic_days(dir: &Path, n_days: u32, n_nodes: usize, seed: u64) {
        let deg = BrfQuantile::new(30.0, 0.4, 0.25).unwrap();
        let str_ = BrfQuantile::new(150.0, 0.6, 0.3).unwrap();
        for i in 0..n_days {
            let date = NaiveDate::from_ymd_opt(2020, 3, 1 + i).unwrap();
            let (net, _) =
                generate_synthetic_day(n_nodes, &deg, &str_, date, seed + i as u64).unwrap();
            net.write_edgelist(&dir.join(format!("{date}.csv"))).unwrap();
        }
    }

    fn config_for(input: &Path, output: &Path) -> RunConfig {
        RunConfig {
            input_dir: input.to_path_buf(),
            filename_pattern: "%Y-%m-%d.csv".to_string(),
            output_dir: output.to_path_buf(),
            edgelist: Default::default(),
            row_errors: Default::default(),
            fit_space: Default::default(),
            mode_method: Default::default(),
            self_loops: Default::default(),
            parallelism: 1,
            seed: 0,
            concordance_threshold_days: 2,
            hub_top_k: 5,
            event_dates: vec![],
            vacation_period: None,
            switching_pairs: vec![],
            association_dates: vec![],
            covariates: vec![],
            reference_point: None,
            marginalization_encoding: Default::default(),
        }
    }

    #[test]
    fn run_day_writes_full_artifact_set() {
        let input = tempfile::tempdir().unwrap();
        let output = tempfile::tempdir().unwrap();
        write_synthetic_days(input.path(), 1, 400, 11);
        let config = config_for(input.path(), output.path());
        let date = NaiveDate::from_ymd_opt(2020, 3, 1).unwrap();
        let bundle =
            run_day(&config, date, &input.path().join("2020-03-01.csv")).unwrap();
        assert_eq!(bundle.node_count, 400);

        let day_dir = output.path().join("2020-03-01");
        for file in [
            "centralities.csv",
            "in_out.json",
            "in_out_difference_degree.csv",
            "in_out_difference_strength.csv",
            "verdict_degree.json",
            "verdict_strength.json",
            "partition_degree.csv",
            "partition_strength.csv",
            "ingest.json",
        ] {
            assert!(day_dir.join(file).is_file(), "missing {file}");
        }
    }

    #[test]
    fn malformed_day_leaves_no_artifacts() {
        let input = tempfile::tempdir().unwrap();
        let output = tempfile::tempdir().unwrap();
        std::fs::write(input.path().join("2020-03-01.csv"), "bogus header\n").unwrap();
        let config = config_for(input.path(), output.path());
        let date = NaiveDate::from_ymd_opt(2020, 3, 1).unwrap();
        assert!(run_day(&config, date, &input.path().join("2020-03-01.csv")).is_err());
        assert!(!output.path().join("2020-03-01").exists());
    }

    #[test]
    fn batch_over_synthetic_days() {
        let input = tempfile::tempdir().unwrap();
        let output = tempfile::tempdir().unwrap();
        write_synthetic_days(input.path(), 3, 400, 21);
        let mut config = config_for(input.path(), output.path());
        config.switching_pairs = vec![(
            NaiveDate::from_ymd_opt(2020, 3, 1).unwrap(),
            NaiveDate::from_ymd_opt(2020, 3, 3).unwrap(),
        )];
        let summary = run_batch(&config).unwrap();
        assert_eq!(summary.succeeded, 3);
        assert_eq!(summary.failed, 0);
        assert_eq!(summary.manifest.len(), 3);
        // two metrics per day
        assert_eq!(summary.time_series.len(), 6);

        let agg = output.path().join("aggregate");
        for file in [
            "params_degree.csv",
            "params_strength.csv",
            "trajectory_degree.csv",
            "trajectory_strength.csv",
            "concordance.json",
            "persistent_discordant.csv",
            "markers.csv",
            "manifest.json",
            "switching_degree_2020-03-01_2020-03-03.csv",
            "switching_strength_2020-03-01_2020-03-03.csv",
        ] {
            assert!(agg.join(file).is_file(), "missing {file}");
        }
        assert!(agg.join("hubs").join("hubs_degree_2020-03.csv").is_file());
    }

    #[test]
    fn failed_day_recorded_and_batch_continues() {
        let input = tempfile::tempdir().unwrap();
        let output = tempfile::tempdir().unwrap();
        write_synthetic_days(input.path(), 2, 400, 31);
        std::fs::write(input.path().join("2020-03-05.csv"), "nonsense\n").unwrap();
        let config = config_for(input.path(), output.path());
        let summary = run_batch(&config).unwrap();
        assert_eq!(summary.succeeded, 2);
        assert_eq!(summary.failed, 1);
        let failed: Vec<_> = summary
            .manifest
            .iter()
            .filter(|m| m.status == ManifestStatus::Failed)
            .collect();
        assert_eq!(failed.len(), 1);
        assert_eq!(failed[0].date, NaiveDate::from_ymd_opt(2020, 3, 5).unwrap());
        assert!(failed[0].error.is_some());
    }

    #[test]
    fn empty_input_dir_is_batch_error() {
        let input = tempfile::tempdir().unwrap();
        let output = tempfile::tempdir().unwrap();
        let config = config_for(input.path(), output.path());
        assert!(matches!(run_batch(&config), Err(Error::Usage(_))));
    }

    #[test]
    fn all_days_failed_is_batch_error() {
        let input = tempfile::tempdir().unwrap();
        let output = tempfile::tempdir().unwrap();
        std::fs::write(input.path().join("2020-03-01.csv"), "x\n").unwrap();
        let config = config_for(input.path(), output.path());
        assert!(matches!(
            run_batch(&config),
            Err(Error::BatchAllFailed { total: 1 })
        ));
    }

    #[test]
    fn serial_and_parallel_outputs_are_byte_identical() {
        let input = tempfile::tempdir().unwrap();
        write_synthetic_days(input.path(), 3, 300, 41);

        let out_serial = tempfile::tempdir().unwrap();
        let out_parallel = tempfile::tempdir().unwrap();
        let mut cfg1 = config_for(input.path(), out_serial.path());
        cfg1.parallelism = 1;
        let mut cfg2 = config_for(input.path(), out_parallel.path());
        cfg2.parallelism = 0;
        run_batch(&cfg1).unwrap();
        run_batch(&cfg2).unwrap();

        let mut compared = 0;
        for entry in walk(out_serial.path()) {
            let rel = entry.strip_prefix(out_serial.path()).unwrap();
            // manifests embed the input path, which is identical here; all
            // files must match byte for byte
            let other = out_parallel.path().join(rel);
            let left = std::fs::read(&entry).unwrap();
            let right = std::fs::read(&other)
                .unwrap_or_else(|_| panic!("missing {} in parallel run", rel.display()));
            assert_eq!(left, right, "mismatch in {}", rel.display());
            compared += 1;
        }
        assert!(compared > 10, "compared only {compared} files");
    }

    fn walk(dir: &Path) -> Vec<PathBuf> {
        let mut out = Vec::new();
        let mut stack = vec![dir.to_path_buf()];
        while let Some(d) = stack.pop() {
            for entry in std::fs::read_dir(&d).unwrap() {
                let path = entry.unwrap().path();
                if path.is_dir() {
                    stack.push(path);
                } else {
                    out.push(path);
                }
            }
        }
        out.sort();
        out
    }
}
