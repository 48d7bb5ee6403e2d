//! High/low mobility regimes.
//!
//! The log-centrality distribution of a day has a single interior peak (the
//! characteristic scale); nodes above it form the high-mobility regime,
//! nodes at or below it the low-mobility one. The mode is taken from the
//! day's fitted BRF by default, with a Gaussian-KDE estimate as the
//! empirical fallback and cross-check.

use crate::error::{Error, Result};
use crate::fitting::{fit_dgbd, rank_sample, FitSpace, NonPositivePolicy};
use crate::od_network::{Metric, NodeCentrality, NodeId};
use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Below this fitted tail exponent the log-density has no usable interior
/// peak and classification falls back to the empirical mode.
const MIN_TAIL_FOR_MODE: f64 = 1e-6;

// ============================================================================
// Types
// ============================================================================

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeMethod {
    /// Analytic mode of the day's fitted BRF distribution.
    #[default]
    BrfFit,
    /// Argmax of a Gaussian kernel density over log-values with Silverman
    /// bandwidth.
    EmpiricalKde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeLabel {
    High,
    Low,
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RegimeLabel::High => "high",
            RegimeLabel::Low => "low",
        })
    }
}

/// Values strictly above the mode are high; ties go low.
pub fn label_for(value: f64, mode_value: f64) -> RegimeLabel {
    if value > mode_value {
        RegimeLabel::High
    } else {
        RegimeLabel::Low
    }
}

/// Per-node high/low assignment for one day and one metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimePartition {
    pub date: NaiveDate,
    pub metric: Metric,
    /// Threshold in the observable's units.
    pub mode_value: f64,
    /// Method that actually produced `mode_value`.
    pub mode_method: ModeMethod,
    /// Set when the BRF-fit method was requested but had no interior mode
    /// and the empirical estimate was used instead.
    pub fell_back_to_kde: bool,
    pub assignments: BTreeMap<NodeId, RegimeLabel>,
}

impl RegimePartition {
    pub fn high_count(&self) -> usize {
        self.assignments.values().filter(|l| **l == RegimeLabel::High).count()
    }

    pub fn low_count(&self) -> usize {
        self.assignments.len() - self.high_count()
    }
}

/// A node that changed regime between two days.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SwitchRecord {
    pub node: NodeId,
    pub from: RegimeLabel,
    pub to: RegimeLabel,
}

/// Degree/strength label agreement over a set of days.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcordanceReport {
    /// Fraction of (node, day) pairs with equal degree and strength labels.
    pub pooled_fraction: f64,
    /// Mean over nodes of each node's own concordant-day fraction; the
    /// per-node variant of the same quantity, emitted for comparison.
    pub per_node_mean_fraction: f64,
    pub days: usize,
    pub pairs_counted: u64,
    pub threshold_days: u32,
    /// Nodes discordant on more than `threshold_days` days, with counts.
    pub persistent_discordant: BTreeMap<NodeId, u32>,
}

/// Top nodes of a month by mean centrality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HubRanking {
    /// Month as `YYYY-MM`.
    pub month: String,
    pub metric: Metric,
    pub k: usize,
    /// `(node, monthly mean)` sorted descending, ties broken by node id.
    pub entries: Vec<(NodeId, f64)>,
}

// ============================================================================
// Mode estimation and classification
// ============================================================================

/// Mode of a Gaussian kernel density over the log-values, in the
/// observable's units. Silverman bandwidth; grid argmax refined by
/// golden-section search.
pub fn kde_log_mode(values: &[f64]) -> Result<f64> {
    let logs: Vec<f64> = values
        .iter()
        .filter(|v| v.is_finite() && **v > 0.0)
        .map(|v| v.ln())
        .collect();
    if logs.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: logs.len() });
    }
    let n = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / n;
    let sd = (logs.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / (n - 1.0)).sqrt();

    let mut sorted = logs.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);

    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let h = 0.9 * spread * n.powf(-0.2);
    if !(h > 0.0) {
        // all log-values equal: the mode is that point
        return Ok(sorted[0].exp());
    }

    let density =
        |z: f64| -> f64 { logs.iter().map(|&zi| (-0.5 * ((z - zi) / h).powi(2)).exp()).sum() };

    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let grid_n = 1024usize;
    let step = (hi - lo) / (grid_n - 1) as f64;
    let mut best_i = 0usize;
    let mut best = f64::NEG_INFINITY;
    for i in 0..grid_n {
        let d = density(lo + i as f64 * step);
        if d > best {
            best = d;
            best_i = i;
        }
    }
    // refine inside the bracketing grid cells
    let mut a = lo + (best_i.saturating_sub(1)) as f64 * step;
    let mut b = (lo + (best_i + 1) as f64 * step).min(hi);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let m1 = b - phi * (b - a);
        let m2 = a + phi * (b - a);
        if density(m1) < density(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// Classify `(node, value)` pairs into regimes against the distribution
/// mode. Non-positive values cannot enter the mode estimate and are
/// labeled low.
pub fn classify_values(
    pairs: &[(NodeId, f64)],
    date: NaiveDate,
    metric: Metric,
    method: ModeMethod,
    space: FitSpace,
) -> Result<RegimePartition> {
    let positive: Vec<f64> = pairs.iter().map(|p| p.1).filter(|v| *v > 0.0).collect();

    let (mode_value, used, fell_back) = match method {
        ModeMethod::EmpiricalKde => {
            if positive.len() < 50 {
                return Err(Error::InsufficientData { needed: 50, got: positive.len() });
            }
            (kde_log_mode(&positive)?, ModeMethod::EmpiricalKde, false)
        }
        ModeMethod::BrfFit => {
            let sample =
                rank_sample(&positive, format!("{date}/{metric}"), NonPositivePolicy::Drop)?;
            let fit = fit_dgbd(&sample, space, None)?;
            let params = fit.params.as_dgbd().expect("dgbd fit");
            if fit.degenerate || params.a < MIN_TAIL_FOR_MODE || params.b < MIN_TAIL_FOR_MODE {
                // no interior peak; fall back to the empirical estimate
                (kde_log_mode(&positive)?, ModeMethod::EmpiricalKde, true)
            } else {
                let (_, z_star) = params.distribution().log_mode()?;
                (z_star.exp(), ModeMethod::BrfFit, false)
            }
        }
    };

    let assignments = pairs
        .iter()
        .map(|(node, value)| (node.clone(), label_for(*value, mode_value)))
        .collect();
    Ok(RegimePartition {
        date,
        metric,
        mode_value,
        mode_method: used,
        fell_back_to_kde: fell_back,
        assignments,
    })
}

/// [`classify_values`] over a day's centralities.
pub fn classify_regimes(
    cents: &[NodeCentrality],
    date: NaiveDate,
    metric: Metric,
    method: ModeMethod,
    space: FitSpace,
) -> Result<RegimePartition> {
    let pairs: Vec<(NodeId, f64)> =
        cents.iter().map(|c| (c.node.clone(), c.value(metric))).collect();
    classify_values(&pairs, date, metric, method, space)
}

// ============================================================================
// Switching, concordance, hubs
// ============================================================================

/// Nodes whose label differs between two partitions of the same metric,
/// compared on the intersection of the node sets. Sorted by node id.
pub fn switching_nodes(
    before: &RegimePartition,
    after: &RegimePartition,
) -> Result<Vec<SwitchRecord>> {
    if before.metric != after.metric {
        return Err(Error::usage(format!(
            "cannot compare partitions of different metrics ({} vs {})",
            before.metric, after.metric
        )));
    }
    Ok(before
        .assignments
        .iter()
        .filter_map(|(node, from)| {
            after.assignments.get(node).and_then(|to| {
                (from != to).then(|| SwitchRecord { node: node.clone(), from: *from, to: *to })
            })
        })
        .collect())
}

/// Pooled degree/strength concordance over all days, plus the set of
/// persistently discordant nodes (discordant on more than `threshold_days`
/// days).
///
/// Partitions are matched by date; a node counts on a day only when it has
/// both labels that day.
pub fn concordance(
    degree_partitions: &[RegimePartition],
    strength_partitions: &[RegimePartition],
    threshold_days: u32,
) -> Result<ConcordanceReport> {
    let strength_by_date: BTreeMap<NaiveDate, &RegimePartition> =
        strength_partitions.iter().map(|p| (p.date, p)).collect();

    let mut pairs = 0u64;
    let mut agreements = 0u64;
    let mut per_node: BTreeMap<&str, (u32, u32)> = BTreeMap::new(); // (discordant, labeled)
    let mut days = 0usize;

    for dp in degree_partitions {
        let Some(sp) = strength_by_date.get(&dp.date) else {
            continue;
        };
        days += 1;
        for (node, d_label) in &dp.assignments {
            let Some(s_label) = sp.assignments.get(node) else {
                continue;
            };
            pairs += 1;
            let entry = per_node.entry(node.as_str()).or_insert((0, 0));
            entry.1 += 1;
            if d_label == s_label {
                agreements += 1;
            } else {
                entry.0 += 1;
            }
        }
    }

    if days == 0 || pairs == 0 {
        return Err(Error::usage(
            "no overlapping dates between degree and strength partitions".to_string(),
        ));
    }

    let per_node_mean = per_node
        .values()
        .map(|(disc, tot)| 1.0 - *disc as f64 / *tot as f64)
        .sum::<f64>()
        / per_node.len() as f64;

    let persistent: BTreeMap<NodeId, u32> = per_node
        .iter()
        .filter(|(_, (disc, _))| *disc > threshold_days)
        .map(|(node, (disc, _))| (node.to_string(), *disc))
        .collect();

    Ok(ConcordanceReport {
        pooled_fraction: agreements as f64 / pairs as f64,
        per_node_mean_fraction: per_node_mean,
        days,
        pairs_counted: pairs,
        threshold_days,
        persistent_discordant: persistent,
    })
}

/// Top `k` nodes of a month by mean metric value over the days each node
/// appears (absence is missing data, not zero).
pub fn hub_ranking(
    days: &[(NaiveDate, &[NodeCentrality])],
    metric: Metric,
    k: usize,
) -> Result<HubRanking> {
    if days.is_empty() {
        return Err(Error::usage("hub ranking needs at least one day".to_string()));
    }
    let month = (days[0].0.year(), days[0].0.month());
    if days.iter().any(|(d, _)| (d.year(), d.month()) != month) {
        return Err(Error::usage("hub ranking expects days from a single month".to_string()));
    }

    let mut sums: BTreeMap<&str, (f64, u32)> = BTreeMap::new();
    for (_, cents) in days {
        for c in *cents {
            let entry = sums.entry(c.node.as_str()).or_insert((0.0, 0));
            entry.0 += c.value(metric);
            entry.1 += 1;
        }
    }

    let mut entries: Vec<(NodeId, f64)> = sums
        .into_iter()
        .map(|(node, (sum, n))| (node.to_string(), sum / n as f64))
        .collect();
    entries.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    entries.truncate(k);

    Ok(HubRanking { month: format!("{}-{:02}", month.0, month.1), metric, k, entries })
}

// Linear-interpolation quantile on a sorted slice.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < n {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[n - 1]
    }
}
