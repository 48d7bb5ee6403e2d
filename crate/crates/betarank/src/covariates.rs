//! Socioeconomic and geographic covariates: joining them to nodes and
//! testing their association with regime membership.
//!
//! Two tests are provided. The independent-samples rank-sum test compares a
//! covariate between the high and low groups (exact enumeration for small
//! samples, tie-corrected normal approximation otherwise), and a logistic
//! regression `group ~ covariate` is fitted by iteratively reweighted least
//! squares with Wald standard errors.

use crate::error::{Error, Result};
use crate::linalg;
use crate::od_network::NodeId;
use crate::special::standard_normal_cdf;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;

// ============================================================================
// Covariate records
// ============================================================================

/// Official deprivation level, ordered from least to most deprived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Marginalization {
    VeryLow,
    Low,
    Medium,
    High,
    VeryHigh,
}

impl Marginalization {
    /// Ordinal score 1 (very low) … 5 (very high).
    pub fn ordinal(self) -> f64 {
        match self {
            Marginalization::VeryLow => 1.0,
            Marginalization::Low => 2.0,
            Marginalization::Medium => 3.0,
            Marginalization::High => 4.0,
            Marginalization::VeryHigh => 5.0,
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        let norm: String = text
            .trim()
            .to_lowercase()
            .chars()
            .map(|c| if c == ' ' || c == '-' { '_' } else { c })
            .collect();
        match norm.as_str() {
            "very_low" | "1" => Some(Marginalization::VeryLow),
            "low" | "2" => Some(Marginalization::Low),
            "medium" | "3" => Some(Marginalization::Medium),
            "high" | "4" => Some(Marginalization::High),
            "very_high" | "5" => Some(Marginalization::VeryHigh),
            _ => None,
        }
    }

    pub const ALL: [Marginalization; 5] = [
        Marginalization::VeryLow,
        Marginalization::Low,
        Marginalization::Medium,
        Marginalization::High,
        Marginalization::VeryHigh,
    ];
}

/// Covariates for one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovariateRecord {
    pub node: NodeId,
    pub population: u64,
    pub marginalization: Marginalization,
    /// Planar coordinates in meters.
    pub centroid: (f64, f64),
    /// Euclidean distance from the centroid to the configured reference
    /// point, in meters.
    pub distance_to_center: f64,
}

/// One covariate file and the columns it contributes. Column references
/// follow the edgelist convention: header names with `has_headers`, 0-based
/// indices otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateFileSpec {
    pub path: PathBuf,
    pub key: String,
    #[serde(default)]
    pub population: Option<String>,
    #[serde(default)]
    pub marginalization: Option<String>,
    #[serde(default)]
    pub x: Option<String>,
    #[serde(default)]
    pub y: Option<String>,
    #[serde(default = "default_true")]
    pub has_headers: bool,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_true() -> bool {
    true
}

fn default_delimiter() -> char {
    ','
}

/// Counters from a covariate load.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CovariateLoadSummary {
    pub complete_records: usize,
    pub incomplete_dropped: usize,
}

/// Unmatched counts when joining covariates to a day's node set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct JoinReport {
    pub matched: usize,
    pub covariates_without_node: usize,
    pub nodes_without_covariate: usize,
}

/// Load and merge covariate files keyed by node id; the distance field is
/// computed against `reference`. Duplicate assignments to the same field of
/// the same node are an error listing the offending keys; records still
/// missing a field after all files are dropped and counted.
pub fn load_covariates(
    specs: &[CovariateFileSpec],
    reference: (f64, f64),
) -> Result<(BTreeMap<NodeId, CovariateRecord>, CovariateLoadSummary)> {
    #[derive(Default)]
    struct Partial {
        population: Option<u64>,
        marginalization: Option<Marginalization>,
        x: Option<f64>,
        y: Option<f64>,
    }

    let mut partials: BTreeMap<NodeId, Partial> = BTreeMap::new();
    for spec in specs {
        let mut duplicates: Vec<String> = Vec::new();
        let ingest_err = |row: Option<u64>, message: String| Error::Ingestion {
            path: spec.path.clone(),
            row,
            message,
        };

        let mut reader = csv::ReaderBuilder::new()
            .has_headers(spec.has_headers)
            .delimiter(spec.delimiter as u8)
            .flexible(true)
            .from_path(&spec.path)
            .map_err(|e| ingest_err(None, e.to_string()))?;
        let headers = if spec.has_headers {
            Some(reader.headers().map_err(|e| ingest_err(None, e.to_string()))?.clone())
        } else {
            None
        };
        let resolve = |name: &str| -> Result<usize> {
            match &headers {
                Some(h) => h
                    .iter()
                    .position(|c| c.trim() == name)
                    .ok_or_else(|| ingest_err(None, format!("column '{name}' not found"))),
                None => name
                    .parse::<usize>()
                    .map_err(|_| ingest_err(None, format!("'{name}' is not a column index"))),
            }
        };

        let key_i = resolve(&spec.key)?;
        let pop_i = spec.population.as_deref().map(resolve).transpose()?;
        let marg_i = spec.marginalization.as_deref().map(resolve).transpose()?;
        let x_i = spec.x.as_deref().map(resolve).transpose()?;
        let y_i = spec.y.as_deref().map(resolve).transpose()?;

        for (idx, record) in reader.records().enumerate() {
            let row_no = idx as u64 + 1;
            let record = record.map_err(|e| ingest_err(Some(row_no), e.to_string()))?;
            let field = |i: usize| record.get(i).map(|s| s.trim()).unwrap_or("");
            let key = field(key_i).to_string();
            if key.is_empty() {
                return Err(ingest_err(Some(row_no), "empty node key".to_string()));
            }
            let entry = partials.entry(key.clone()).or_default();
            if let Some(i) = pop_i {
                let v: u64 = field(i)
                    .parse()
                    .map_err(|_| ingest_err(Some(row_no), format!("bad population '{}'", field(i))))?;
                if entry.population.replace(v).is_some() {
                    duplicates.push(key.clone());
                }
            }
            if let Some(i) = marg_i {
                let v = Marginalization::parse(field(i)).ok_or_else(|| {
                    ingest_err(Some(row_no), format!("bad marginalization '{}'", field(i)))
                })?;
                if entry.marginalization.replace(v).is_some() {
                    duplicates.push(key.clone());
                }
            }
            if let Some(i) = x_i {
                let v: f64 = field(i)
                    .parse()
                    .map_err(|_| ingest_err(Some(row_no), format!("bad x coordinate '{}'", field(i))))?;
                if entry.x.replace(v).is_some() {
                    duplicates.push(key.clone());
                }
            }
            if let Some(i) = y_i {
                let v: f64 = field(i)
                    .parse()
                    .map_err(|_| ingest_err(Some(row_no), format!("bad y coordinate '{}'", field(i))))?;
                if entry.y.replace(v).is_some() {
                    duplicates.push(key.clone());
                }
            }
        }

        if !duplicates.is_empty() {
            duplicates.sort();
            duplicates.dedup();
            return Err(ingest_err(
                None,
                format!("duplicate keys: {}", duplicates.join(", ")),
            ));
        }
    }

    let mut records = BTreeMap::new();
    let mut summary = CovariateLoadSummary::default();
    for (node, p) in partials {
        match (p.population, p.marginalization, p.x, p.y) {
            (Some(population), Some(marginalization), Some(x), Some(y)) => {
                let distance = ((x - reference.0).powi(2) + (y - reference.1).powi(2)).sqrt();
                records.insert(
                    node.clone(),
                    CovariateRecord {
                        node,
                        population,
                        marginalization,
                        centroid: (x, y),
                        distance_to_center: distance,
                    },
                );
                summary.complete_records += 1;
            }
            _ => summary.incomplete_dropped += 1,
        }
    }
    Ok((records, summary))
}

/// Count matches and mismatches between a covariate table and a node set.
pub fn join_report(
    covariates: &BTreeMap<NodeId, CovariateRecord>,
    nodes: &[NodeId],
) -> JoinReport {
    let node_set: std::collections::BTreeSet<&str> = nodes.iter().map(|n| n.as_str()).collect();
    let matched = covariates.keys().filter(|k| node_set.contains(k.as_str())).count();
    JoinReport {
        matched,
        covariates_without_node: covariates.len() - matched,
        nodes_without_covariate: nodes.len() - matched,
    }
}

// ============================================================================
// Rank-sum test
// ============================================================================

/// Which group a covariate is shifted toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HighShiftedRight,
    HighShiftedLeft,
    NotApplicable,
}

/// Independent-samples rank-sum (Mann–Whitney) outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankSumResult {
    /// U statistic of the high group, with midrank tie handling.
    pub u_statistic: f64,
    pub n_high: usize,
    pub n_low: usize,
    /// Computed by exact enumeration (true) or normal approximation (false).
    pub exact: bool,
    pub p_two_sided: f64,
    /// One-sided p for the reported direction.
    pub p_one_sided: f64,
    pub direction: Direction,
}

const EXACT_ENUMERATION_MAX: usize = 12;

/// Rank-sum test of `group_high` against `group_low`.
///
/// Exact p by enumerating all C(n, n_high) rank assignments when
/// n_high + n_low ≤ 12; otherwise the normal approximation with tie
/// correction and a 0.5 continuity correction.
pub fn rank_sum_test(group_high: &[f64], group_low: &[f64]) -> Result<RankSumResult> {
    if group_high.is_empty() || group_low.is_empty() {
        return Err(Error::usage("rank-sum test needs both groups non-empty"));
    }
    let n1 = group_high.len();
    let n2 = group_low.len();
    let n = n1 + n2;

    // midranks over the pooled sample
    let mut pooled: Vec<(f64, bool)> = group_high
        .iter()
        .map(|&v| (v, true))
        .chain(group_low.iter().map(|&v| (v, false)))
        .collect();
    if pooled.iter().any(|(v, _)| !v.is_finite()) {
        return Err(Error::domain("rank-sum input contains non-finite values".to_string()));
    }
    pooled.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut ranks = vec![0.0f64; n];
    let mut tie_sizes: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && pooled[j + 1].0 == pooled[i].0 {
            j += 1;
        }
        let midrank = (i + 1 + j + 1) as f64 / 2.0;
        for rank in ranks.iter_mut().take(j + 1).skip(i) {
            *rank = midrank;
        }
        tie_sizes.push(j - i + 1);
        i = j + 1;
    }

    let rank_sum_high: f64 = pooled
        .iter()
        .zip(&ranks)
        .filter(|((_, is_high), _)| *is_high)
        .map(|(_, r)| *r)
        .sum();
    let u = rank_sum_high - (n1 * (n1 + 1)) as f64 / 2.0;
    let mean_u = (n1 * n2) as f64 / 2.0;

    let (p_greater, p_less, exact) = if n <= EXACT_ENUMERATION_MAX {
        let (ge, le, total) = enumerate_rank_assignments(&ranks, n1, rank_sum_high);
        (ge as f64 / total as f64, le as f64 / total as f64, true)
    } else {
        // tie-corrected variance
        let tie_term: f64 = tie_sizes
            .iter()
            .map(|&t| (t * t * t - t) as f64)
            .sum::<f64>()
            / (n * (n - 1)) as f64;
        let var = (n1 * n2) as f64 / 12.0 * ((n + 1) as f64 - tie_term);
        if var <= 0.0 {
            // every observation tied: no evidence either way
            (1.0, 1.0, false)
        } else {
            let sd = var.sqrt();
            let p_g = 1.0 - standard_normal_cdf((u - mean_u - 0.5) / sd);
            let p_l = standard_normal_cdf((u - mean_u + 0.5) / sd);
            (p_g, p_l, false)
        }
    };

    let direction = if u > mean_u {
        Direction::HighShiftedRight
    } else if u < mean_u {
        Direction::HighShiftedLeft
    } else {
        Direction::NotApplicable
    };
    let p_one_sided = match direction {
        Direction::HighShiftedRight => p_greater,
        Direction::HighShiftedLeft => p_less,
        Direction::NotApplicable => p_greater.min(p_less),
    };
    let p_two_sided = (2.0 * p_greater.min(p_less)).min(1.0);

    Ok(RankSumResult {
        u_statistic: u,
        n_high: n1,
        n_low: n2,
        exact,
        p_two_sided,
        p_one_sided,
        direction,
    })
}

// Walk all C(n, k) position subsets; count rank sums ≥ and ≤ the observed
// one. Counts are exact because midranks are fixed by the pooled sample.
fn enumerate_rank_assignments(ranks: &[f64], k: usize, observed: f64) -> (u64, u64, u64) {
    let n = ranks.len();
    let mut ge = 0u64;
    let mut le = 0u64;
    let mut total = 0u64;
    let mut indices: Vec<usize> = (0..k).collect();
    const EPS: f64 = 1e-9;
    loop {
        let sum: f64 = indices.iter().map(|&i| ranks[i]).sum();
        total += 1;
        if sum >= observed - EPS {
            ge += 1;
        }
        if sum <= observed + EPS {
            le += 1;
        }
        // next combination in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                return (ge, le, total);
            }
            i -= 1;
            if indices[i] != i + n - k {
                break;
            }
        }
        indices[i] += 1;
        for j in i + 1..k {
            indices[j] = indices[j - 1] + 1;
        }
    }
}

// ============================================================================
// Logistic regression (IRLS)
// ============================================================================

/// How the ordinal deprivation level enters the design matrix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalizationEncoding {
    /// Single column of ordinal scores 1–5 (default).
    #[default]
    Ordinal,
    /// Four indicator columns, very-low as the reference level.
    OneHot,
}

/// Named regression columns, without the intercept (added internally).
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl DesignMatrix {
    pub fn single(name: impl Into<String>, values: Vec<f64>) -> Self {
        DesignMatrix { names: vec![name.into()], columns: vec![values] }
    }

    pub fn from_marginalization(
        levels: &[Marginalization],
        encoding: MarginalizationEncoding,
    ) -> Self {
        match encoding {
            MarginalizationEncoding::Ordinal => DesignMatrix::single(
                "marginalization",
                levels.iter().map(|l| l.ordinal()).collect(),
            ),
            MarginalizationEncoding::OneHot => {
                let mut names = Vec::new();
                let mut columns = Vec::new();
                for level in &Marginalization::ALL[1..] {
                    names.push(format!("marginalization_{level:?}").to_lowercase());
                    columns.push(
                        levels.iter().map(|l| if l == level { 1.0 } else { 0.0 }).collect(),
                    );
                }
                DesignMatrix { names, columns }
            }
        }
    }

    fn n_rows(&self) -> usize {
        self.columns.first().map(|c| c.len()).unwrap_or(0)
    }
}

/// One fitted coefficient with its Wald statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
}

/// Maximum-likelihood logit fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogisticFit {
    /// Intercept first, then the design columns in order.
    pub coefficients: Vec<Coefficient>,
    pub deviance: f64,
    /// Deviance after each IRLS iteration; non-increasing by construction
    /// (step-halving).
    pub deviance_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Complete or quasi-complete separation detected; estimates diverge
    /// and p-values are not meaningful.
    pub separation: bool,
}

const IRLS_MAX_ITER: usize = 100;
const IRLS_STEP_TOL: f64 = 1e-8;
const MAX_STEP_HALVINGS: usize = 30;

/// Fit `P(label) = logistic(β0 + β·x)` by iteratively reweighted least
/// squares. Needs at least 10 observations with both classes present.
pub fn logistic_fit(labels: &[bool], design: &DesignMatrix) -> Result<LogisticFit> {
    let n = labels.len();
    if n < 10 {
        return Err(Error::usage(format!("logistic fit needs at least 10 observations, got {n}")));
    }
    if design.n_rows() != n {
        return Err(Error::usage(format!(
            "design matrix has {} rows for {n} labels",
            design.n_rows()
        )));
    }
    let positives = labels.iter().filter(|l| **l).count();
    if positives == 0 || positives == n {
        return Err(Error::usage("both classes must be present".to_string()));
    }

    let k = design.columns.len() + 1; // + intercept
    let row = |i: usize| -> Vec<f64> {
        let mut r = Vec::with_capacity(k);
        r.push(1.0);
        for col in &design.columns {
            r.push(col[i]);
        }
        r
    };
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();

    let deviance_of = |beta: &[f64]| -> f64 {
        let mut d = 0.0;
        for i in 0..n {
            let eta: f64 = row(i).iter().zip(beta).map(|(x, b)| x * b).sum();
            let p = logistic(eta).clamp(1e-12, 1.0 - 1e-12);
            d -= 2.0 * (y[i] * p.ln() + (1.0 - y[i]) * (1.0 - p).ln());
        }
        d
    };

    let mut beta = vec![0.0f64; k];
    let mut deviance = deviance_of(&beta);
    let mut trace = vec![deviance];
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..IRLS_MAX_ITER {
        iterations += 1;

        // weighted normal equations (X^T W X) δ = X^T (y − p)
        let mut xtwx = vec![0.0f64; k * k];
        let mut xtr = vec![0.0f64; k];
        for i in 0..n {
            let xi = row(i);
            let eta: f64 = xi.iter().zip(&beta).map(|(x, b)| x * b).sum();
            let p = logistic(eta);
            let w = (p * (1.0 - p)).max(1e-10);
            for a in 0..k {
                for b_ in 0..k {
                    xtwx[a * k + b_] += w * xi[a] * xi[b_];
                }
                xtr[a] += xi[a] * (y[i] - p);
            }
        }
        let Some(mut delta) = linalg::solve(xtwx, xtr, k) else {
            break; // singular information matrix; report current state
        };

        // step-halving keeps the deviance non-increasing
        let mut accepted = false;
        for _ in 0..=MAX_STEP_HALVINGS {
            let candidate: Vec<f64> = beta.iter().zip(&delta).map(|(b, d)| b + d).collect();
            let cand_dev = deviance_of(&candidate);
            if cand_dev <= deviance + 1e-12 {
                let max_step = delta.iter().fold(0.0f64, |m, d| m.max(d.abs()));
                beta = candidate;
                deviance = cand_dev;
                trace.push(deviance);
                accepted = true;
                if max_step < IRLS_STEP_TOL {
                    converged = true;
                }
                break;
            }
            for d in delta.iter_mut() {
                *d *= 0.5;
            }
        }
        if !accepted || converged {
            if !accepted {
                converged = true; // no descent direction left
            }
            break;
        }
    }

    let separation = deviance < 1e-6 || beta.iter().any(|b| b.abs() > 1e4);

    // Wald standard errors from the inverse information at the estimate.
    let mut xtwx = vec![0.0f64; k * k];
    for i in 0..n {
        let xi = row(i);
        let eta: f64 = xi.iter().zip(&beta).map(|(x, b)| x * b).sum();
        let p = logistic(eta);
        let w = (p * (1.0 - p)).max(1e-10);
        for a in 0..k {
            for b_ in 0..k {
                xtwx[a * k + b_] += w * xi[a] * xi[b_];
            }
        }
    }
    let cov = linalg::invert(&xtwx, k);

    let mut names = vec!["intercept".to_string()];
    names.extend(design.names.iter().cloned());
    let coefficients = beta
        .iter()
        .enumerate()
        .map(|(j, &estimate)| {
            let se = cov
                .as_ref()
                .map(|c| c[j * k + j].max(0.0).sqrt())
                .unwrap_or(f64::INFINITY);
            let z = if se > 0.0 && se.is_finite() { estimate / se } else { 0.0 };
            let p_value = 2.0 * (1.0 - standard_normal_cdf(z.abs()));
            Coefficient { name: names[j].clone(), estimate, std_error: se, z, p_value }
        })
        .collect();

    Ok(LogisticFit {
        coefficients,
        deviance,
        deviance_trace: trace,
        converged,
        iterations,
        separation,
    })
}

fn logistic(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta).exp())
}

// ============================================================================
// Association reports
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    RankSum,
    Logistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regressor {
    Population,
    Distance,
    Marginalization,
}

/// A serializable record of one association test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssociationReport {
    pub test: TestKind,
    pub regressor: Regressor,
    pub statistic: f64,
    /// Two-sided p, floored at the reporting limit when serialized.
    pub p_value: f64,
    pub direction: Direction,
    /// Logistic coefficients (empty for rank-sum tests).
    pub coefficients: Vec<Coefficient>,
    pub exact: Option<bool>,
    pub separation: Option<bool>,
}

impl AssociationReport {
    pub fn from_rank_sum(regressor: Regressor, r: &RankSumResult) -> Self {
        AssociationReport {
            test: TestKind::RankSum,
            regressor,
            statistic: r.u_statistic,
            p_value: r.p_two_sided,
            direction: r.direction,
            coefficients: Vec::new(),
            exact: Some(r.exact),
            separation: None,
        }
    }

    pub fn from_logistic(regressor: Regressor, fit: &LogisticFit) -> Self {
        // the regressor's p is the smallest non-intercept coefficient p
        let (stat, p) = fit
            .coefficients
            .iter()
            .skip(1)
            .map(|c| (c.z, c.p_value))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap_or((0.0, 1.0));
        AssociationReport {
            test: TestKind::Logistic,
            regressor,
            statistic: stat,
            p_value: p,
            direction: Direction::NotApplicable,
            coefficients: fit.coefficients.clone(),
            exact: None,
            separation: Some(fit.separation),
        }
    }
}

/// Convenience accessor used by tests and the pipeline.
pub fn covariate_value(record: &CovariateRecord, regressor: Regressor) -> f64 {
    match regressor {
        Regressor::Population => record.population as f64,
        Regressor::Distance => record.distance_to_center,
        Regressor::Marginalization => record.marginalization.ordinal(),
    }
}
