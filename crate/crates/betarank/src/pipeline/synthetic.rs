//! Synthetic daily networks with BRF-distributed degrees and strengths.
//!
//! Generation is two-phase. Phase one draws per-node total-degree targets
//! from the degree distribution and wires distinct directed edges by
//! weighted endpoint sampling until the targets are (approximately) spent.
//! Phase two draws total-strength targets from the strength distribution
//! and tops up edge weights, again by weighted endpoint sampling over the
//! remaining strength deficits. Everything runs off a single seeded
//! generator, so a seed pins the exact edgelist.

use crate::distributions::BrfQuantile;
use crate::error::{Error, Result};
use crate::od_network::DailyNetwork;
use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Counters describing how closely the targets were met.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SyntheticReport {
    /// Degree targets clamped to the feasible maximum `2(n−1)`.
    pub degree_targets_clamped: usize,
    /// Strength targets raised to the node's realized degree (strength can
    /// never be below degree).
    pub strength_targets_raised: usize,
    /// Total degree deficit left unwired when phase one ran out of distinct
    /// endpoints.
    pub degree_shortfall: u64,
    /// Total strength deficit left after phase two.
    pub strength_shortfall: u64,
}

/// Generate one synthetic day.
///
/// Both distributions are sampled with `seed`; the `degree` one in the
/// degree metric's units (rounded to at least 1), the `strength` one in
/// trip counts. Needs `n_nodes ≥ 10`.
pub fn generate_synthetic_day(
    n_nodes: usize,
    degree: &BrfQuantile,
    strength: &BrfQuantile,
    date: NaiveDate,
    seed: u64,
) -> Result<(DailyNetwork, SyntheticReport)> {
    if n_nodes < 10 {
        return Err(Error::usage(format!("need at least 10 nodes, got {n_nodes}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SyntheticReport::default();

    // --- targets
    let max_degree = 2 * (n_nodes as u64 - 1);
    let degree_targets: Vec<u64> = degree
        .sample_with(n_nodes, &mut rng)
        .into_iter()
        .map(|x| {
            let d = x.round().max(1.0) as u64;
            if d > max_degree {
                report.degree_targets_clamped += 1;
                max_degree
            } else {
                d
            }
        })
        .collect();
    let strength_targets_raw: Vec<u64> = strength
        .sample_with(n_nodes, &mut rng)
        .into_iter()
        .map(|x| x.round().max(1.0) as u64)
        .collect();

    // --- phase one: distinct directed edges against degree deficits
    let mut deficit = Sampler::from_weights(&degree_targets);
    let mut edge_weight: HashMap<(u32, u32), u64> = HashMap::new();
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n_nodes]; // incident, either direction
    let mut realized_degree = vec![0u64; n_nodes];

    while deficit.total() >= 2.0 {
        let s = deficit.sample(&mut rng);
        // pick a distinct partner: mask s out while drawing
        let s_weight = deficit.weight(s);
        deficit.set(s, 0.0);
        if deficit.total() < 1.0 {
            deficit.set(s, s_weight);
            break;
        }
        let mut t = deficit.sample(&mut rng);
        let mut placed = false;
        for _ in 0..30 {
            if !edge_weight.contains_key(&(s as u32, t as u32)) {
                placed = true;
                break;
            }
            t = deficit.sample(&mut rng);
        }
        deficit.set(s, s_weight);
        if !placed {
            // this endpoint's remaining partners are exhausted in practice;
            // retire one unit of its deficit so the loop terminates
            deficit.set(s, (s_weight - 1.0).max(0.0));
            report.degree_shortfall += 1;
            continue;
        }

        edge_weight.insert((s as u32, t as u32), 1);
        adjacency[s].push(t as u32);
        adjacency[t].push(s as u32);
        realized_degree[s] += 1;
        realized_degree[t] += 1;
        deficit.set(s, (deficit.weight(s) - 1.0).max(0.0));
        deficit.set(t, (deficit.weight(t) - 1.0).max(0.0));
    }
    report.degree_shortfall += deficit.total() as u64;

    // --- phase two: strength top-up over existing edges
    // after phase one every edge has weight 1, so realized strength equals
    // realized degree
    let mut remaining: Vec<u64> = (0..n_nodes)
        .map(|i| {
            let base = realized_degree[i];
            let target = strength_targets_raw[i];
            if target < base {
                report.strength_targets_raised += 1;
                0
            } else {
                target - base
            }
        })
        .collect();
    let mut topup = Sampler::from_weights(&remaining);

    let mut edges: Vec<((u32, u32), u64)> = edge_weight.into_iter().collect();
    edges.sort_unstable_by_key(|(k, _)| *k);
    let edge_index: HashMap<(u32, u32), usize> =
        edges.iter().enumerate().map(|(i, (k, _))| (*k, i)).collect();

    let mut guard = 0u64;
    let guard_max = 4 * remaining.iter().sum::<u64>().max(1);
    while topup.total() >= 1.0 && guard < guard_max {
        guard += 1;
        let i = topup.sample(&mut rng);
        if adjacency[i].is_empty() {
            // isolated node cannot absorb strength
            report.strength_shortfall += remaining[i];
            remaining[i] = 0;
            topup.set(i, 0.0);
            continue;
        }
        // favor partners that still need strength themselves
        let weights: Vec<f64> = adjacency[i].iter().map(|&j| remaining[j as usize] as f64).collect();
        let total_w: f64 = weights.iter().sum();
        let j = if total_w > 0.0 {
            let mut draw = rng.gen_range(0.0..total_w);
            let mut pick = adjacency[i].len() - 1;
            for (k, w) in weights.iter().enumerate() {
                if draw < *w {
                    pick = k;
                    break;
                }
                draw -= w;
            }
            adjacency[i][pick] as usize
        } else {
            adjacency[i][rng.gen_range(0..adjacency[i].len())] as usize
        };

        // block increment keeps the trip loop short without moving the
        // realized totals away from the targets
        let pair_min = remaining[i].min(remaining[j].max(1));
        let delta = (pair_min / 4).max(1);

        // orient along an existing edge between i and j
        let key = if let Some(&idx) = edge_index.get(&(i as u32, j as u32)) {
            idx
        } else if let Some(&idx) = edge_index.get(&(j as u32, i as u32)) {
            idx
        } else {
            continue;
        };
        edges[key].1 += delta;
        remaining[i] = remaining[i].saturating_sub(delta);
        remaining[j] = remaining[j].saturating_sub(delta);
        topup.set(i, remaining[i] as f64);
        topup.set(j, remaining[j] as f64);
    }
    report.strength_shortfall += remaining.iter().sum::<u64>();

    // --- assemble
    let width = (n_nodes as f64).log10().ceil().max(1.0) as usize;
    let name = |i: u32| format!("n{:0width$}", i, width = width);
    let raw = edges.iter().map(|((s, t), w)| (name(*s), name(*t), *w));
    let isolated = (0..n_nodes as u32).filter(|i| adjacency[*i as usize].is_empty()).map(name);
    let net = DailyNetwork::new(date, raw, isolated)?;
    Ok((net, report))
}

// ----------------------------------------------------------------------------
// Fenwick-tree weighted sampler with O(log n) update and draw.
// ----------------------------------------------------------------------------

struct Sampler {
    tree: Vec<f64>, // 1-indexed partial sums
    weights: Vec<f64>,
}

impl Sampler {
    fn from_weights(weights: &[u64]) -> Self {
        let mut s = Sampler { tree: vec![0.0; weights.len() + 1], weights: vec![0.0; weights.len()] };
        for (i, &w) in weights.iter().enumerate() {
            s.set(i, w as f64);
        }
        s
    }

    fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    fn total(&self) -> f64 {
        self.prefix(self.weights.len())
    }

    fn set(&mut self, i: usize, w: f64) {
        let delta = w - self.weights[i];
        if delta == 0.0 {
            return;
        }
        self.weights[i] = w;
        let mut idx = i + 1;
        while idx < self.tree.len() {
            self.tree[idx] += delta;
            idx += idx & idx.wrapping_neg();
        }
    }

    fn prefix(&self, count: usize) -> f64 {
        let mut idx = count;
        let mut sum = 0.0;
        while idx > 0 {
            sum += self.tree[idx];
            idx -= idx & idx.wrapping_neg();
        }
        sum
    }

    /// Draw an index with probability proportional to its weight.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = self.total();
        debug_assert!(total > 0.0);
        let mut remaining = rng.gen_range(0.0..total);
        // descend the implicit tree
        let mut pos = 0usize;
        let mut bit = self.tree.len().next_power_of_two() >> 1;
        while bit > 0 {
            let next = pos + bit;
            if next < self.tree.len() && self.tree[next] <= remaining {
                remaining -= self.tree[next];
                pos = next;
            }
            bit >>= 1;
        }
        // pos is the count of items with cumulative weight <= draw
        pos.min(self.weights.len() - 1)
    }
}
