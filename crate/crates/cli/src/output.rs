//! CSV tables and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use oscl_core::oscl::Oscl;
use oscl_core::topo::{ExperimentConfig, PairBudget, ScalingFit, TopologyStats};

use crate::scenario::ScenarioConfig;

pub const MANIFEST: &str = "manifest.json";

/// Writes through a sibling temp file so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))?;
    Ok(())
}

fn csv_bytes<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

#[derive(Serialize)]
struct SeriesRow {
    #[serde(rename = "N")]
    n: u32,
    #[serde(rename = "D")]
    d: u32,
    seed: u64,
    pair_index: u64,
    avg_degree: f64,
}

#[derive(Serialize)]
struct TopologySummaryRow {
    #[serde(rename = "N")]
    n: u32,
    #[serde(rename = "D")]
    d: u32,
    seed: u64,
    pair_count: u64,
    final_degree: f64,
    predicted: f64,
    ratio: f64,
    edges: u64,
    saturated: bool,
}

pub fn topology_series_csv(config: &ExperimentConfig, stats: &TopologyStats) -> Result<Vec<u8>> {
    csv_bytes(stats.degree_series.iter().map(|&(pair_index, avg_degree)| SeriesRow {
        n: config.n,
        d: config.d,
        seed: config.seed,
        pair_index,
        avg_degree,
    }))
}

pub fn topology_summary_csv(config: &ExperimentConfig, stats: &TopologyStats, predicted: f64) -> Result<Vec<u8>> {
    csv_bytes([TopologySummaryRow {
        n: config.n,
        d: config.d,
        seed: config.seed,
        pair_count: config.pair_count,
        final_degree: stats.final_degree,
        predicted,
        ratio: stats.final_degree / predicted,
        edges: stats.edge_count,
        saturated: stats.saturated,
    }])
}

#[derive(Serialize)]
struct SweepRunRow {
    #[serde(rename = "N")]
    n: u32,
    #[serde(rename = "D")]
    d: u32,
    seed: u64,
    pair_count: u64,
    final_degree: f64,
    predicted: f64,
    ratio: f64,
    saturated: bool,
}

#[derive(Serialize)]
struct FitRow {
    #[serde(rename = "N")]
    n: u32,
    #[serde(rename = "D")]
    d: u32,
    seeds: usize,
    measured_degree: f64,
    predicted: f64,
    ratio: f64,
    saturated: bool,
}

pub fn sweep_summary_csv(fit: &ScalingFit) -> Result<Vec<u8>> {
    csv_bytes(fit.runs.iter().map(|r| SweepRunRow {
        n: r.n,
        d: r.d,
        seed: r.seed,
        pair_count: r.pair_count,
        final_degree: r.final_degree,
        predicted: r.predicted,
        ratio: r.ratio,
        saturated: r.saturated,
    }))
}

pub fn sweep_fit_csv(fit: &ScalingFit) -> Result<Vec<u8>> {
    csv_bytes(fit.rows.iter().map(|r| FitRow {
        n: r.n,
        d: r.d,
        seeds: r.seeds,
        measured_degree: r.measured_degree,
        predicted: r.predicted,
        ratio: r.ratio,
        saturated: r.saturated,
    }))
}

#[derive(Serialize)]
struct MessageRow {
    time: u64,
    src: String,
    dst: String,
    relayer: String,
    msg_type: &'static str,
    name: String,
}

#[derive(Serialize)]
struct CounterRow {
    node: String,
    msg_type: &'static str,
    originated: u64,
    relayed: u64,
    received: u64,
    dropped: u64,
}

#[derive(Serialize)]
struct EmissionRow {
    time: u64,
    node: String,
    direction: &'static str,
    kind: &'static str,
    name: String,
    nonce: Option<u64>,
    face: u32,
}

pub fn messages_csv(net: &Oscl) -> Result<Vec<u8>> {
    let sys = net.system();
    csv_bytes(net.trace().log.iter().map(|r| MessageRow {
        time: r.time,
        src: sys.label(r.src),
        dst: sys.label(r.dst),
        relayer: r.relayer.map(|n| sys.label(n)).unwrap_or_default(),
        msg_type: r.msg_type.as_str(),
        name: r.name.to_string(),
    }))
}

pub fn counters_csv(net: &Oscl) -> Result<Vec<u8>> {
    let sys = net.system();
    csv_bytes(net.trace().counters.iter().map(|(node, t, c)| CounterRow {
        node: sys.label(node),
        msg_type: t.as_str(),
        originated: c.originated,
        relayed: c.relayed,
        received: c.received,
        dropped: c.dropped,
    }))
}

pub fn emissions_csv(net: &Oscl) -> Result<Vec<u8>> {
    let sys = net.system();
    csv_bytes(net.trace().emissions.iter().map(|e| EmissionRow {
        time: e.time,
        node: sys.label(e.node),
        direction: e.direction.as_str(),
        kind: e.kind.as_str(),
        name: e.name.to_string(),
        nonce: e.nonce,
        face: e.face.0,
    }))
}

/// Parameters of a sweep, including which (N, D) combinations actually ran.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub ns: Vec<u32>,
    pub ds: Vec<u32>,
    pub budget: PairBudget,
    pub time_budget_secs: f64,
    pub completed: Vec<(u32, u32)>,
    pub skipped: Vec<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunConfig {
    Topology(ExperimentConfig),
    Sweep(SweepConfig),
    Scenario(ScenarioConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config: RunConfig,
    pub seeds: Vec<u64>,
    pub version: String,
    pub outputs: Vec<String>,
    pub duration_ms: u64,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Writes every table into `dir`, then the manifest listing them.
pub fn write_run(dir: &Path, tables: &[(&str, Vec<u8>)], mut manifest: Manifest) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    manifest.outputs.clear();
    for (file, bytes) in tables {
        write_atomic(&dir.join(file), bytes)?;
        manifest.outputs.push(file.to_string());
    }
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    write_atomic(&dir.join(MANIFEST), &json)
}
