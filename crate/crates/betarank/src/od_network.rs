//! Daily origin-destination networks: edgelist ingestion, degree/strength
//! centralities and in/out diagnostics.
//!
//! A network is a dated, weighted, directed graph over opaque node
//! identifiers (census-area codes in the source data). Edge weights are
//! integer trip counts and are kept as integers so conservation checks
//! stay exact.

use crate::error::{Error, Result};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

pub type NodeId = String;

// ============================================================================
// Network representation
// ============================================================================

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub weight: u64,
}

/// Counters accumulated while ingesting an edgelist.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub rows_read: u64,
    pub merged_duplicates: u64,
    pub self_loops_seen: u64,
    pub malformed_skipped: u64,
}

/// A dated, weighted, directed graph. Edges are unique per (source, target)
/// pair and sorted, so identical inputs produce identical structures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DailyNetwork {
    pub date: NaiveDate,
    edges: Vec<Edge>,
    nodes: Vec<NodeId>,
    pub ingest: IngestReport,
}

impl DailyNetwork {
    /// Build a network from raw edges (duplicates merged by weight
    /// summation) plus any explicitly declared isolated nodes.
    pub fn new(
        date: NaiveDate,
        raw_edges: impl IntoIterator<Item = (NodeId, NodeId, u64)>,
        isolated: impl IntoIterator<Item = NodeId>,
    ) -> Result<Self> {
        let mut merged: BTreeMap<(NodeId, NodeId), u64> = BTreeMap::new();
        let mut report = IngestReport::default();
        for (source, target, weight) in raw_edges {
            if weight == 0 {
                return Err(Error::domain(format!(
                    "edge {source}->{target} has zero weight"
                )));
            }
            report.rows_read += 1;
            if source == target {
                report.self_loops_seen += 1;
            }
            merged
                .entry((source, target))
                .and_modify(|w| {
                    *w += weight;
                    report.merged_duplicates += 1;
                })
                .or_insert(weight);
        }

        let mut nodes: BTreeSet<NodeId> = BTreeSet::new();
        for (s, t) in merged.keys() {
            nodes.insert(s.clone());
            nodes.insert(t.clone());
        }
        nodes.extend(isolated);

        let edges = merged
            .into_iter()
            .map(|((source, target), weight)| Edge { source, target, weight })
            .collect();
        Ok(DailyNetwork { date, edges, nodes: nodes.into_iter().collect(), ingest: report })
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Sorted node identifiers.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Write the network back out as a `source,target,weight` CSV.
    pub fn write_edgelist(&self, path: &Path) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(file, "source,target,weight")?;
        for e in &self.edges {
            writeln!(file, "{},{},{}", e.source, e.target, e.weight)?;
        }
        file.flush()?;
        Ok(())
    }
}

// ============================================================================
// Edgelist ingestion
// ============================================================================

/// Where to find the three edge fields in a delimited file.
///
/// With `has_headers` the three names are matched against the header row;
/// without, they are parsed as 0-based column indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub source: String,
    pub target: String,
    pub weight: String,
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

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            source: "source".into(),
            target: "target".into(),
            weight: "weight".into(),
            has_headers: true,
            delimiter: ',',
        }
    }
}

/// How strictly to treat rows that fail to parse.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowErrorPolicy {
    /// Fail the load at the first malformed row, reporting its number.
    #[default]
    Fail,
    /// Skip malformed rows and count them in the ingest report.
    Skip,
}

/// Load one day's edgelist.
///
/// Duplicate (source, target) rows are merged by weight summation and
/// counted; self-loops are retained but flagged in the report. An empty
/// file, an unresolvable column, or (under [`RowErrorPolicy::Fail`]) a
/// malformed row is an ingestion error carrying the row number.
pub fn load_edgelist(
    path: &Path,
    mapping: &ColumnMapping,
    date: NaiveDate,
    on_error: RowErrorPolicy,
) -> Result<DailyNetwork> {
    let ingest_err = |row: Option<u64>, message: String| Error::Ingestion {
        path: path.to_path_buf(),
        row,
        message,
    };

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(mapping.has_headers)
        .delimiter(mapping.delimiter as u8)
        .flexible(true)
        .from_path(path)
        .map_err(|e| ingest_err(None, e.to_string()))?;

    // Resolve the three column indices.
    let headers = if mapping.has_headers {
        Some(reader.headers().map_err(|e| ingest_err(None, e.to_string()))?.clone())
    } else {
        None
    };
    let resolve = |name: &str| -> Result<usize> {
        match &headers {
            Some(h) => h
                .iter()
                .position(|c| c.trim() == name)
                .ok_or_else(|| ingest_err(None, format!("column '{name}' not found in header"))),
            None => name
                .parse::<usize>()
                .map_err(|_| ingest_err(None, format!("'{name}' is not a column index"))),
        }
    };
    let si = resolve(&mapping.source)?;
    let ti = resolve(&mapping.target)?;
    let wi = resolve(&mapping.weight)?;

    let mut raw: Vec<(NodeId, NodeId, u64)> = Vec::new();
    let mut malformed = 0u64;
    for (idx, record) in reader.records().enumerate() {
        let row_no = idx as u64 + 1;
        let parsed: std::result::Result<(NodeId, NodeId, u64), String> = (|| {
            let record = record.map_err(|e| e.to_string())?;
            let field = |i: usize, what: &str| -> std::result::Result<String, String> {
                record
                    .get(i)
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| format!("missing {what} field (column {i})"))
            };
            let source = field(si, "source")?;
            let target = field(ti, "target")?;
            let weight_str = field(wi, "weight")?;
            let weight: u64 = weight_str
                .parse()
                .map_err(|_| format!("non-numeric weight '{weight_str}'"))?;
            if weight == 0 {
                return Err("weight must be at least 1".to_string());
            }
            Ok((source, target, weight))
        })();
        match parsed {
            Ok(edge) => raw.push(edge),
            Err(msg) => match on_error {
                RowErrorPolicy::Fail => return Err(ingest_err(Some(row_no), msg)),
                RowErrorPolicy::Skip => malformed += 1,
            },
        }
    }

    if raw.is_empty() {
        return Err(ingest_err(None, "no usable edges in file".to_string()));
    }

    let mut net = DailyNetwork::new(date, raw, std::iter::empty())?;
    net.ingest.malformed_skipped = malformed;
    Ok(net)
}

// ============================================================================
// Centralities
// ============================================================================

/// Which centrality a computation runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Degree,
    Strength,
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Metric::Degree => "degree",
            Metric::Strength => "strength",
        })
    }
}

/// Whether self-loops contribute to centralities. Excluded by default: a
/// trip from an area to itself is not travel between areas. Inclusion
/// counts the loop once in each direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfLoopPolicy {
    #[default]
    Exclude,
    Include,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCentrality {
    pub node: NodeId,
    pub in_degree: u32,
    pub out_degree: u32,
    pub total_degree: u32,
    pub in_strength: u64,
    pub out_strength: u64,
    pub total_strength: u64,
}

impl NodeCentrality {
    pub fn value(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Degree => self.total_degree as f64,
            Metric::Strength => self.total_strength as f64,
        }
    }

    pub fn in_value(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Degree => self.in_degree as f64,
            Metric::Strength => self.in_strength as f64,
        }
    }

    pub fn out_value(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Degree => self.out_degree as f64,
            Metric::Strength => self.out_strength as f64,
        }
    }
}

/// Per-node degree and strength: in/out degree count distinct in/out
/// neighbors, in/out strength sum the incoming/outgoing edge weights, and
/// totals are in + out. Results are sorted by node id.
pub fn centralities(net: &DailyNetwork, self_loops: SelfLoopPolicy) -> Vec<NodeCentrality> {
    let mut by_node: BTreeMap<&str, NodeCentrality> = net
        .nodes()
        .iter()
        .map(|n| {
            (
                n.as_str(),
                NodeCentrality {
                    node: n.clone(),
                    in_degree: 0,
                    out_degree: 0,
                    total_degree: 0,
                    in_strength: 0,
                    out_strength: 0,
                    total_strength: 0,
                },
            )
        })
        .collect();

    for e in net.edges() {
        if e.source == e.target && self_loops == SelfLoopPolicy::Exclude {
            continue;
        }
        {
            let c = by_node.get_mut(e.source.as_str()).expect("source is a node");
            c.out_degree += 1;
            c.out_strength += e.weight;
        }
        {
            let c = by_node.get_mut(e.target.as_str()).expect("target is a node");
            c.in_degree += 1;
            c.in_strength += e.weight;
        }
    }

    let mut out: Vec<NodeCentrality> = by_node.into_values().collect();
    for c in &mut out {
        c.total_degree = c.in_degree + c.out_degree;
        c.total_strength = c.in_strength + c.out_strength;
    }
    out
}

/// Header used by [`write_centralities_csv`].
pub const CENTRALITY_CSV_HEADER: &str =
    "node,in_degree,out_degree,total_degree,in_strength,out_strength,total_strength";

pub fn write_centralities_csv(cents: &[NodeCentrality], path: &Path) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "{CENTRALITY_CSV_HEADER}")?;
    for c in cents {
        writeln!(
            file,
            "{},{},{},{},{},{},{}",
            c.node, c.in_degree, c.out_degree, c.total_degree, c.in_strength, c.out_strength,
            c.total_strength
        )?;
    }
    file.flush()?;
    Ok(())
}

// ============================================================================
// In/out diagnostics
// ============================================================================

/// Correlation and simple-regression summary of (in, out) centrality pairs.
/// The statistics are `None` when either coordinate has zero variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InOutDiagnostics {
    pub metric: Metric,
    /// Nodes entering the computation (zero-in and zero-out nodes excluded).
    pub n_used: usize,
    pub pearson_r: Option<f64>,
    pub r_squared: Option<f64>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Ordinary least squares `y = slope·x + intercept`;
/// returns `(slope, intercept, r²)`.
pub fn simple_ols(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let r = pearson(xs, ys)?;
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx, r * r))
}

/// Pearson correlation of (in, out) pairs and the OLS fit `in ~ out`.
///
/// Nodes with zero in *and* zero out for the metric are excluded; the
/// regression is undefined for them.
pub fn in_out_diagnostics(cents: &[NodeCentrality], metric: Metric) -> Result<InOutDiagnostics> {
    let pairs: Vec<(f64, f64)> = cents
        .iter()
        .filter(|c| c.in_value(metric) > 0.0 || c.out_value(metric) > 0.0)
        .map(|c| (c.in_value(metric), c.out_value(metric)))
        .collect();
    if pairs.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: pairs.len() });
    }
    let ins: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let outs: Vec<f64> = pairs.iter().map(|p| p.1).collect();

    let r = pearson(&ins, &outs);
    let fit = simple_ols(&outs, &ins); // in ~ out
    Ok(InOutDiagnostics {
        metric,
        n_used: pairs.len(),
        pearson_r: r,
        r_squared: fit.map(|f| f.2),
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
    })
}

/// Per-node signed `in − out` for the metric, sorted by absolute value
/// descending (ties broken by node id).
pub fn in_out_difference(cents: &[NodeCentrality], metric: Metric) -> Vec<(NodeId, i64)> {
    let mut diffs: Vec<(NodeId, i64)> = cents
        .iter()
        .map(|c| {
            let d = c.in_value(metric) as i64 - c.out_value(metric) as i64;
            (c.node.clone(), d)
        })
        .collect();
    diffs.sort_by(|x, y| y.1.abs().cmp(&x.1.abs()).then_with(|| x.0.cmp(&y.0)));
    diffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn date() -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 2, 17).unwrap()
    }

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    fn net_from(edges: &[(&str, &str, u64)]) -> DailyNetwork {
        DailyNetwork::new(
            date(),
            edges.iter().map(|(s, t, w)| (s.to_string(), t.to_string(), *w)),
            std::iter::empty(),
        )
        .unwrap()
    }

    // --- loading ---

    #[test]
    fn loads_three_row_file() {
        let f = write_tmp("source,target,weight\nA,B,2\nB,A,1\nA,C,5\n");
        let net = load_edgelist(f.path(), &ColumnMapping::default(), date(), RowErrorPolicy::Fail)
            .unwrap();
        assert_eq!(net.node_count(), 3);
        assert_eq!(net.edge_count(), 3);
        assert_eq!(net.total_weight(), 8);
    }

    #[test]
    fn duplicate_rows_merge_by_summation() {
        let f = write_tmp("source,target,weight\nA,B,2\nA,B,3\n");
        let net = load_edgelist(f.path(), &ColumnMapping::default(), date(), RowErrorPolicy::Fail)
            .unwrap();
        assert_eq!(net.edge_count(), 1);
        assert_eq!(net.edges()[0].weight, 5);
        assert_eq!(net.ingest.merged_duplicates, 1);
    }

    #[test]
    fn self_loops_are_kept_and_flagged() {
        let f = write_tmp("source,target,weight\nA,A,4\nA,B,1\n");
        let net = load_edgelist(f.path(), &ColumnMapping::default(), date(), RowErrorPolicy::Fail)
            .unwrap();
        assert_eq!(net.ingest.self_loops_seen, 1);
        assert_eq!(net.edge_count(), 2);
    }

    #[test]
    fn malformed_row_fails_with_row_number() {
        let f = write_tmp("source,target,weight\nA,B,2\nB,,1\n");
        let err = load_edgelist(f.path(), &ColumnMapping::default(), date(), RowErrorPolicy::Fail)
            .unwrap_err();
        match err {
            Error::Ingestion { row, .. } => assert_eq!(row, Some(2)),
            other => panic!("expected ingestion error, got {other}"),
        }
    }

    #[test]
    fn skip_policy_counts_malformed_rows() {
        let f = write_tmp("source,target,weight\nA,B,2\nB,,1\nC,D,x\nC,D,0\nD,E,3\n");
        let net = load_edgelist(f.path(), &ColumnMapping::default(), date(), RowErrorPolicy::Skip)
            .unwrap();
        assert_eq!(net.ingest.malformed_skipped, 3);
        assert_eq!(net.edge_count(), 2);
    }

    #[test]
    fn missing_column_is_error() {
        let f = write_tmp("src,dst,w\nA,B,2\n");
        assert!(load_edgelist(f.path(), &ColumnMapping::default(), date(), RowErrorPolicy::Fail)
            .is_err());
    }

    #[test]
    fn empty_file_is_error() {
        let f = write_tmp("source,target,weight\n");
        assert!(load_edgelist(f.path(), &ColumnMapping::default(), date(), RowErrorPolicy::Fail)
            .is_err());
    }

    #[test]
    fn headerless_index_mapping() {
        let f = write_tmp("A;B;2\nB;C;7\n");
        let mapping = ColumnMapping {
            source: "0".into(),
            target: "1".into(),
            weight: "2".into(),
            has_headers: false,
            delimiter: ';',
        };
        let net = load_edgelist(f.path(), &mapping, date(), RowErrorPolicy::Fail).unwrap();
        assert_eq!(net.edge_count(), 2);
        assert_eq!(net.total_weight(), 9);
    }

    // --- centralities ---

    #[test]
    fn single_edge_centralities() {
        let cents = centralities(&net_from(&[("A", "B", 7)]), SelfLoopPolicy::Exclude);
        let a = &cents[0];
        let b = &cents[1];
        assert_eq!((a.node.as_str(), a.out_degree, a.out_strength, a.in_degree), ("A", 1, 7, 0));
        assert_eq!((b.node.as_str(), b.in_degree, b.in_strength, b.out_degree), ("B", 1, 7, 0));
        assert_eq!(a.total_degree, 1);
        assert_eq!(b.total_strength, 7);
    }

    #[test]
    fn directed_triangle_totals() {
        let cents = centralities(
            &net_from(&[("A", "B", 1), ("B", "C", 2), ("C", "A", 3)]),
            SelfLoopPolicy::Exclude,
        );
        for c in &cents {
            assert_eq!(c.total_degree, 2);
        }
        let strength: BTreeMap<&str, u64> =
            cents.iter().map(|c| (c.node.as_str(), c.total_strength)).collect();
        assert_eq!(strength["A"], 4);
        assert_eq!(strength["B"], 3);
        assert_eq!(strength["C"], 5);
    }

    #[test]
    fn self_loop_policies() {
        let net = net_from(&[("A", "A", 4), ("A", "B", 1)]);
        let excl = centralities(&net, SelfLoopPolicy::Exclude);
        let a = excl.iter().find(|c| c.node == "A").unwrap();
        assert_eq!((a.total_degree, a.total_strength), (1, 1));

        let incl = centralities(&net, SelfLoopPolicy::Include);
        let a = incl.iter().find(|c| c.node == "A").unwrap();
        // the loop counts once in each direction
        assert_eq!((a.in_degree, a.out_degree, a.total_strength), (1, 2, 9));
    }

    #[test]
    fn matches_adjacency_matrix_oracle_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..20 {
            let n = rng.gen_range(5..50usize);
            let mut raw = Vec::new();
            for _ in 0..rng.gen_range(20..400) {
                let s = rng.gen_range(0..n);
                let t = rng.gen_range(0..n);
                if s == t {
                    continue;
                }
                raw.push((format!("n{s:03}"), format!("n{t:03}"), rng.gen_range(1..20u64)));
            }
            if raw.is_empty() {
                continue;
            }
            let net = DailyNetwork::new(date(), raw.clone(), std::iter::empty()).unwrap();
            let cents = centralities(&net, SelfLoopPolicy::Exclude);

            // Brute-force oracle: dense weight matrix.
            let mut w = vec![vec![0u64; n]; n];
            for (s, t, wt) in &raw {
                let si: usize = s[1..].parse().unwrap();
                let ti: usize = t[1..].parse().unwrap();
                w[si][ti] += wt;
            }
            for c in &cents {
                let i: usize = c.node[1..].parse().unwrap();
                let out_deg = (0..n).filter(|&j| w[i][j] > 0).count() as u32;
                let in_deg = (0..n).filter(|&j| w[j][i] > 0).count() as u32;
                let out_str: u64 = (0..n).map(|j| w[i][j]).sum();
                let in_str: u64 = (0..n).map(|j| w[j][i]).sum();
                assert_eq!(c.out_degree, out_deg, "node {}", c.node);
                assert_eq!(c.in_degree, in_deg);
                assert_eq!(c.out_strength, out_str);
                assert_eq!(c.in_strength, in_str);
                assert_eq!(c.total_degree, in_deg + out_deg);
                assert_eq!(c.total_strength, in_str + out_str);
            }

            // Conservation.
            let tot_in: u64 = cents.iter().map(|c| c.in_strength).sum();
            let tot_out: u64 = cents.iter().map(|c| c.out_strength).sum();
            assert_eq!(tot_in, tot_out);
            assert_eq!(tot_in, net.total_weight());
        }
    }

    #[test]
    fn degree_bounds_hold() {
        let net = net_from(&[("A", "B", 1), ("A", "C", 1), ("B", "C", 2)]);
        for c in centralities(&net, SelfLoopPolicy::Exclude) {
            assert!(c.in_degree as usize <= net.node_count() - 1);
            assert!(c.out_degree as usize <= net.node_count() - 1);
            assert!(c.in_strength >= c.in_degree as u64);
            assert!(c.out_strength >= c.out_degree as u64);
        }
    }

    #[test]
    fn ingestion_round_trip_preserves_centralities() {
        let net = net_from(&[("A", "B", 2), ("B", "A", 1), ("A", "C", 5), ("C", "C", 9)]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("day.csv");
        net.write_edgelist(&path).unwrap();
        let reloaded =
            load_edgelist(&path, &ColumnMapping::default(), date(), RowErrorPolicy::Fail).unwrap();
        assert_eq!(
            centralities(&net, SelfLoopPolicy::Exclude),
            centralities(&reloaded, SelfLoopPolicy::Exclude)
        );
    }

    // --- diagnostics ---

    #[test]
    fn identical_in_out_gives_perfect_line() {
        // symmetric edges: every node has in == out
        let net = net_from(&[("A", "B", 3), ("B", "A", 3), ("B", "C", 4), ("C", "B", 4)]);
        let cents = centralities(&net, SelfLoopPolicy::Exclude);
        let d = in_out_diagnostics(&cents, Metric::Strength).unwrap();
        assert!((d.pearson_r.unwrap() - 1.0).abs() < 1e-12);
        assert!((d.r_squared.unwrap() - 1.0).abs() < 1e-12);
        assert!((d.slope.unwrap() - 1.0).abs() < 1e-12);
        assert!(d.intercept.unwrap().abs() < 1e-9);
    }

    #[test]
    fn anti_correlation_on_signed_data() {
        // centrality values are non-negative, so perfect anti-correlation is
        // exercised on the raw helper with centered synthetic data
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let ys: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &ys).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_variance_is_undefined() {
        let xs = [1.0, 1.0, 1.0];
        let ys = [1.0, 2.0, 3.0];
        assert!(pearson(&xs, &ys).is_none());
    }

    #[test]
    fn r_squared_equals_pearson_squared() {
        let net = net_from(&[("A", "B", 5), ("B", "C", 2), ("C", "A", 9), ("A", "C", 1)]);
        let cents = centralities(&net, SelfLoopPolicy::Exclude);
        let d = in_out_diagnostics(&cents, Metric::Strength).unwrap();
        let r = d.pearson_r.unwrap();
        assert!((d.r_squared.unwrap() - r * r).abs() < 1e-12);
    }

    #[test]
    fn difference_single_edge_and_balanced_cycle() {
        let diffs = in_out_difference(
            &centralities(&net_from(&[("A", "B", 7)]), SelfLoopPolicy::Exclude),
            Metric::Strength,
        );
        assert_eq!(diffs[0], ("A".to_string(), -7));
        assert_eq!(diffs[1], ("B".to_string(), 7));

        let cycle = net_from(&[("A", "B", 2), ("B", "C", 2), ("C", "A", 2)]);
        let diffs =
            in_out_difference(&centralities(&cycle, SelfLoopPolicy::Exclude), Metric::Strength);
        assert!(diffs.iter().all(|(_, d)| *d == 0));
    }
}
