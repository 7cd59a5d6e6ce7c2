use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bfs::PathRule;
use crate::types::NodeId;

use super::{OsclError, OverlayGraph};

/// Path measurements from a probe batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QosMetrics {
    loss_ratio: f64,
    mean_delay: f64,
    throughput: f64,
    sample_count: u32,
}

impl QosMetrics {
    pub fn new(loss_ratio: f64, mean_delay: f64, throughput: f64, sample_count: u32) -> Self {
        Self {
            loss_ratio,
            mean_delay,
            throughput,
            sample_count,
        }
    }

    pub fn sample_count(&self) -> u32 {
        self.sample_count
    }

    fn sampled(&self, value: f64) -> Result<f64, OsclError> {
        if self.sample_count == 0 {
            Err(OsclError::NoSamples)
        } else {
            Ok(value)
        }
    }

    pub fn loss_ratio(&self) -> Result<f64, OsclError> {
        self.sampled(self.loss_ratio)
    }

    /// Infinite when no probe was delivered.
    pub fn mean_delay(&self) -> Result<f64, OsclError> {
        self.sampled(self.mean_delay)
    }

    pub fn throughput(&self) -> Result<f64, OsclError> {
        self.sampled(self.throughput)
    }
}

/// Thresholds deciding whether an existing overlay path is good enough.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QosPolicy {
    /// D: the longest acceptable overlay path, in hops.
    pub max_path_hops: u32,
    pub max_loss: f64,
    pub max_delay: f64,
    pub min_throughput: f64,
    pub path_rule: PathRule,
}

impl Default for QosPolicy {
    fn default() -> Self {
        Self {
            max_path_hops: 3,
            max_loss: 0.05,
            max_delay: 200.0,
            min_throughput: 1.0,
            path_rule: PathRule::AtMostD,
        }
    }
}

impl QosPolicy {
    pub fn accepts_path(&self, hops: u32) -> bool {
        self.path_rule.accepts(hops, self.max_path_hops)
    }

    /// True iff a measured value breaks a threshold. Unsampled metrics carry
    /// no evidence either way.
    pub fn violated_by(&self, metrics: &QosMetrics) -> bool {
        metrics.sample_count > 0
            && (metrics.loss_ratio > self.max_loss
                || metrics.mean_delay > self.max_delay
                || metrics.throughput < self.min_throughput)
    }
}

/// Sends `probe_count` probes along `path`, each hop losing a probe
/// independently with its link's loss probability.
pub fn qos_monitor<R: Rng + ?Sized>(
    graph: &OverlayGraph,
    path: &[NodeId],
    probe_count: u32,
    rng: &mut R,
) -> Result<QosMetrics, OsclError> {
    if path.is_empty() {
        return Err(OsclError::EmptyPath);
    }
    if probe_count == 0 {
        return Err(OsclError::NoSamples);
    }
    let mut links = Vec::with_capacity(path.len() - 1);
    for hop in path.windows(2) {
        let edge = graph.edge(hop[0], hop[1]).ok_or(OsclError::BrokenPath {
            from: hop[0],
            to: hop[1],
        })?;
        links.push(edge.metrics);
    }
    let path_delay: f64 = links.iter().map(|m| m.delay_ms as f64).sum();
    let throughput = links.iter().map(|m| m.capacity).fold(f64::INFINITY, f64::min);
    let mut delivered = 0u32;
    for _ in 0..probe_count {
        let survived = links
            .iter()
            .all(|m| m.loss <= 0.0 || !rng.gen_bool(m.loss.min(1.0)));
        if survived {
            delivered += 1;
        }
    }
    let lost = probe_count - delivered;
    let mean_delay = if delivered == 0 { f64::INFINITY } else { path_delay };
    Ok(QosMetrics::new(
        lost as f64 / probe_count as f64,
        mean_delay,
        throughput,
        probe_count,
    ))
}
