//! Overlay growth under the D-hop rule: nodes talk in random pairs and a
//! pair gets a direct link only when the overlay offers no short enough
//! path. The average degree at saturation is compared with
//! `(2 N ln N)^(1/D)`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bfs::{BoundedBfs, PathRule};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopoError {
    #[error("node count must be at least 2, got {0}")]
    NodeCount(u32),
    #[error("hop budget D must be at least 1")]
    HopBudget,
    #[error("pair count must be at least 1")]
    PairCount,
    #[error("sampling stride must be at least 1")]
    Stride,
    #[error("predicted degree is undefined for N = {0} (needs N >= 2)")]
    Domain(f64),
}

/// How many random pairs to draw for a given N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairBudget {
    /// `ceil(c * N * ln N)` pairs.
    NLogN(f64),
    Fixed(u64),
}

impl Default for PairBudget {
    fn default() -> Self {
        PairBudget::NLogN(50.0)
    }
}

impl PairBudget {
    pub fn pairs_for(self, n: u32) -> u64 {
        match self {
            PairBudget::NLogN(c) => {
                let n = n as f64;
                ((c * n * n.ln()).ceil() as u64).max(1)
            }
            PairBudget::Fixed(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: u32,
    pub d: u32,
    pub pair_count: u64,
    pub seed: u64,
    pub comparison: PathRule,
    /// Degree is sampled every `stride` pairs.
    pub stride: u64,
    /// Saturation window: no link in the last `window` pairs.
    pub window: u64,
}

impl ExperimentConfig {
    /// Defaults: `50 N ln N` pairs, sampling every N pairs, window `10 N`.
    pub fn new(n: u32, d: u32, seed: u64) -> Self {
        Self {
            n,
            d,
            pair_count: PairBudget::default().pairs_for(n.max(2)),
            seed,
            comparison: PathRule::AtMostD,
            stride: n.max(1) as u64,
            window: 10 * n as u64,
        }
    }

    pub fn validate(&self) -> Result<(), TopoError> {
        if self.n < 2 {
            return Err(TopoError::NodeCount(self.n));
        }
        if self.d < 1 {
            return Err(TopoError::HopBudget);
        }
        if self.pair_count < 1 {
            return Err(TopoError::PairCount);
        }
        if self.stride < 1 {
            return Err(TopoError::Stride);
        }
        Ok(())
    }
}

/// The pair sequence of an experiment: uniform over unordered distinct
/// pairs, independent draws.
#[derive(Debug, Clone)]
pub struct PairSampler {
    rng: ChaCha8Rng,
    n: u32,
}

impl PairSampler {
    pub fn new(n: u32, seed: u64) -> Self {
        assert!(n >= 2, "pairs need two nodes");
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            n,
        }
    }
}

impl Iterator for PairSampler {
    type Item = (u32, u32);

    fn next(&mut self) -> Option<(u32, u32)> {
        let u = self.rng.gen_range(0..self.n);
        let mut v = self.rng.gen_range(0..self.n - 1);
        if v >= u {
            v += 1;
        }
        Some((u, v))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyStats {
    /// (pairs drawn so far, average degree), starting at (0, 0).
    pub degree_series: Vec<(u64, f64)>,
    pub final_degree: f64,
    pub edge_count: u64,
    pub links_created: u64,
    pub saturated: bool,
    /// Final adjacency lists.
    #[serde(skip)]
    pub adjacency: Vec<Vec<u32>>,
}

fn average_degree(edges: u64, n: u32) -> f64 {
    2.0 * edges as f64 / n as f64
}

pub fn run_topology_experiment(config: &ExperimentConfig) -> Result<TopologyStats, TopoError> {
    config.validate()?;
    let n = config.n;
    let bound = config.comparison.search_bound(config.d);
    let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n as usize];
    let mut bfs = BoundedBfs::new(n as usize);
    let mut edges = 0u64;
    let mut last_link = 0u64;
    let mut series = vec![(0, 0.0)];

    for (i, (u, v)) in PairSampler::new(n, config.seed).take(config.pair_count as usize).enumerate() {
        let drawn = i as u64 + 1;
        // An existing edge is a 1-hop path; checked apart so that a rule
        // rejecting 1-hop paths cannot create parallel edges.
        let linked = adjacency[u as usize].contains(&v);
        if !linked && bfs.distance(&adjacency, u, v, bound).is_none() {
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
            edges += 1;
            last_link = drawn;
        }
        if drawn.is_multiple_of(config.stride) || drawn == config.pair_count {
            series.push((drawn, average_degree(edges, n)));
        }
    }

    Ok(TopologyStats {
        degree_series: series,
        final_degree: average_degree(edges, n),
        edge_count: edges,
        links_created: edges,
        saturated: config.pair_count - last_link >= config.window.min(config.pair_count),
        adjacency,
    })
}

/// `(2 N ln N)^(1/D)`.
pub fn predicted_degree(n: f64, d: u32) -> Result<f64, TopoError> {
    if n.is_nan() || n < 2.0 {
        return Err(TopoError::Domain(n));
    }
    if d < 1 {
        return Err(TopoError::HopBudget);
    }
    Ok((2.0 * n * n.ln()).powf(1.0 / d as f64))
}

/// One experiment of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRun {
    pub n: u32,
    pub d: u32,
    pub seed: u64,
    pub pair_count: u64,
    pub final_degree: f64,
    pub predicted: f64,
    pub ratio: f64,
    pub saturated: bool,
}

/// Seed-averaged measurement for one (N, D).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: u32,
    pub d: u32,
    pub seeds: usize,
    pub measured_degree: f64,
    pub predicted: f64,
    pub ratio: f64,
    /// Every seed reached saturation.
    pub saturated: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Sorted by (D, N, seed).
    pub runs: Vec<ScalingRun>,
    /// Sorted by (D, N).
    pub rows: Vec<ScalingRow>,
    /// (N, D) combinations left out by a time budget.
    pub skipped: Vec<(u32, u32)>,
}

impl ScalingFit {
    fn from_runs(mut runs: Vec<ScalingRun>, skipped: Vec<(u32, u32)>) -> Self {
        runs.sort_by_key(|r| (r.d, r.n, r.seed));
        let mut rows: Vec<ScalingRow> = Vec::new();
        for group in runs.chunk_by(|a, b| (a.d, a.n) == (b.d, b.n)) {
            let first = &group[0];
            let measured = group.iter().map(|r| r.final_degree).sum::<f64>() / group.len() as f64;
            rows.push(ScalingRow {
                n: first.n,
                d: first.d,
                seeds: group.len(),
                measured_degree: measured,
                predicted: first.predicted,
                ratio: measured / first.predicted,
                saturated: group.iter().all(|r| r.saturated),
            });
        }
        Self { runs, rows, skipped }
    }

    pub fn ds(&self) -> Vec<u32> {
        let mut ds: Vec<u32> = self.rows.iter().map(|r| r.d).collect();
        ds.dedup();
        ds
    }

    pub fn rows_for(&self, d: u32) -> impl Iterator<Item = &ScalingRow> {
        self.rows.iter().filter(move |r| r.d == d)
    }

    /// max ratio / min ratio over N for fixed D.
    pub fn spread(&self, d: u32) -> Option<f64> {
        let ratios: Vec<f64> = self.rows_for(d).map(|r| r.ratio).collect();
        let max = ratios.iter().copied().reduce(f64::max)?;
        let min = ratios.iter().copied().reduce(f64::min)?;
        Some(max / min)
    }

    /// Seed-averaged degree never decreases as N grows, for fixed D.
    pub fn non_decreasing_in_n(&self, d: u32) -> bool {
        let degrees: Vec<f64> = self.rows_for(d).map(|r| r.measured_degree).collect();
        degrees.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn unsaturated(&self) -> impl Iterator<Item = &ScalingRun> {
        self.runs.iter().filter(|r| !r.saturated)
    }
}

fn scaling_run(n: u32, d: u32, seed: u64, budget: PairBudget) -> Result<ScalingRun, TopoError> {
    let config = ExperimentConfig {
        pair_count: budget.pairs_for(n),
        ..ExperimentConfig::new(n, d, seed)
    };
    let stats = run_topology_experiment(&config)?;
    let predicted = predicted_degree(n as f64, d)?;
    Ok(ScalingRun {
        n,
        d,
        seed,
        pair_count: config.pair_count,
        final_degree: stats.final_degree,
        predicted,
        ratio: stats.final_degree / predicted,
        saturated: stats.saturated,
    })
}

/// Runs every (N, D, seed) combination in parallel.
pub fn scaling_check(ns: &[u32], ds: &[u32], seeds: &[u64], budget: PairBudget) -> Result<ScalingFit, TopoError> {
    let combos: Vec<(u32, u32)> = ds.iter().flat_map(|d| ns.iter().map(move |n| (*n, *d))).collect();
    scaling_check_combos(&combos, seeds, budget)
}

/// Runs each listed (N, D) with every seed, in parallel.
pub fn scaling_check_combos(combos: &[(u32, u32)], seeds: &[u64], budget: PairBudget) -> Result<ScalingFit, TopoError> {
    let jobs: Vec<(u32, u32, u64)> = combos
        .iter()
        .flat_map(|(n, d)| seeds.iter().map(move |s| (*n, *d, *s)))
        .collect();
    let runs = jobs
        .into_par_iter()
        .map(|(n, d, s)| scaling_run(n, d, s, budget))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScalingFit::from_runs(runs, Vec::new()))
}

/// Like [`scaling_check`] but skips any (N, D) whose projected runtime would
/// overrun `limit`. N values are taken in increasing order; the projection
/// scales the slowest per-pair cost observed so far.
pub fn scaling_check_within(
    ns: &[u32],
    ds: &[u32],
    seeds: &[u64],
    budget: PairBudget,
    limit: Duration,
) -> Result<ScalingFit, TopoError> {
    // Assumed cost before anything has been measured.
    const PRIOR_SECS_PER_PAIR: f64 = 2e-6;
    let mut ns_sorted = ns.to_vec();
    ns_sorted.sort_unstable();
    ns_sorted.dedup();
    let start = Instant::now();
    let mut secs_per_pair = PRIOR_SECS_PER_PAIR;
    let mut runs = Vec::new();
    let mut skipped = Vec::new();
    let workers = rayon::current_num_threads().max(1) as f64;
    for &n in &ns_sorted {
        for &d in ds {
            let pairs = budget.pairs_for(n.max(2)) as f64;
            let waves = (seeds.len() as f64 / workers).ceil();
            let projected = pairs * secs_per_pair * waves;
            if start.elapsed().as_secs_f64() + projected > limit.as_secs_f64() {
                skipped.push((n, d));
                continue;
            }
            let group_start = Instant::now();
            let group = seeds
                .par_iter()
                .map(|s| scaling_run(n, d, *s, budget))
                .collect::<Result<Vec<_>, _>>()?;
            let observed = group_start.elapsed().as_secs_f64() / (pairs * waves).max(1.0);
            secs_per_pair = secs_per_pair.max(observed);
            runs.extend(group);
        }
    }
    Ok(ScalingFit::from_runs(runs, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_nodes_one_pair() {
        let config = ExperimentConfig {
            pair_count: 1,
            ..ExperimentConfig::new(2, 1, 0)
        };
        let stats = run_topology_experiment(&config).unwrap();
        assert_eq!(stats.edge_count, 1);
        assert_eq!(stats.final_degree, 1.0);
    }

    #[test]
    fn one_hop_budget_completes_the_graph() {
        let n = 9;
        let config = ExperimentConfig {
            pair_count: 5000,
            ..ExperimentConfig::new(n, 1, 3)
        };
        let stats = run_topology_experiment(&config).unwrap();
        assert_eq!(stats.links_created, (n * (n - 1) / 2) as u64);
        assert!(stats.saturated);
        assert_eq!(stats.final_degree, (n - 1) as f64);
    }

    #[test]
    fn strict_rule_with_one_hop_never_duplicates_edges() {
        let config = ExperimentConfig {
            pair_count: 2000,
            comparison: PathRule::StrictlyLessD,
            ..ExperimentConfig::new(6, 1, 1)
        };
        let stats = run_topology_experiment(&config).unwrap();
        assert_eq!(stats.edge_count, 15);
    }

    #[test]
    fn invalid_configs() {
        assert_eq!(
            run_topology_experiment(&ExperimentConfig::new(1, 3, 0)).unwrap_err(),
            TopoError::NodeCount(1)
        );
        assert_eq!(
            run_topology_experiment(&ExperimentConfig::new(4, 0, 0)).unwrap_err(),
            TopoError::HopBudget
        );
        let no_pairs = ExperimentConfig {
            pair_count: 0,
            ..ExperimentConfig::new(4, 2, 0)
        };
        assert_eq!(run_topology_experiment(&no_pairs).unwrap_err(), TopoError::PairCount);
    }

    #[test]
    fn default_pair_count_is_50_n_ln_n() {
        let config = ExperimentConfig::new(32, 3, 0);
        assert_eq!(config.pair_count, (50.0 * 32.0 * 32f64.ln()).ceil() as u64);
        assert_eq!(config.pair_count, 5546);
        assert_eq!(config.stride, 32);
        assert_eq!(config.window, 320);
    }

    #[test]
    fn predicted_degree_values() {
        let e = std::f64::consts::E;
        let got = predicted_degree(e, 1).unwrap();
        assert!((got - 2.0 * e).abs() < 1e-12);
        let p = predicted_degree(32.0, 3).unwrap();
        assert!((p - 6.0532).abs() < 1e-4, "{p}");
        assert!(matches!(predicted_degree(1.5, 3), Err(TopoError::Domain(_))));
        let mut last = f64::INFINITY;
        for d in 1..=10 {
            let p = predicted_degree(100.0, d).unwrap();
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn series_is_sampled_at_stride_and_monotone() {
        let config = ExperimentConfig {
            pair_count: 1000,
            stride: 64,
            ..ExperimentConfig::new(40, 3, 11)
        };
        let stats = run_topology_experiment(&config).unwrap();
        let xs: Vec<u64> = stats.degree_series.iter().map(|p| p.0).collect();
        assert_eq!(xs[0], 0);
        assert_eq!(xs[1], 64);
        assert_eq!(*xs.last().unwrap(), 1000);
        assert!(stats.degree_series.windows(2).all(|w| w[0].1 <= w[1].1));
        assert_eq!(stats.degree_series.last().unwrap().1, stats.final_degree);
    }

    #[test]
    fn single_n_spread_is_one() {
        let fit = scaling_check(&[32], &[3], &[1, 2], PairBudget::default()).unwrap();
        assert_eq!(fit.spread(3), Some(1.0));
        assert_eq!(fit.rows.len(), 1);
        assert_eq!(fit.runs.len(), 2);
    }

    #[test]
    fn zero_budget_skips_everything() {
        let fit = scaling_check_within(&[32, 64], &[3], &[1], PairBudget::default(), Duration::ZERO).unwrap();
        assert!(fit.rows.is_empty());
        assert_eq!(fit.skipped, vec![(32, 3), (64, 3)]);
    }
}
