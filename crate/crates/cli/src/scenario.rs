//! Use-case replays: a metering gateway, a monitoring device and the NSCL,
//! with notifications either relayed by the NSCL or carried by the overlay.

use std::collections::BTreeSet;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use oscl_core::ndn::NdnConfig;
use oscl_core::oscl::{LinkDecision, LinkMetrics, Oscl, OsclConfig, QosPolicy};
use oscl_core::scl::{DiscoveryResult, M2mSystem, SclKind, Subscription};
use oscl_core::{Name, NodeId, SimTime};

pub const METER_APP: &str = "electricity_meter";
pub const METER_CONTAINER: &str = "meter_data";
pub const MONITOR_APP: &str = "energy_monitor";
/// Simulated time between two content-instance appends.
pub const APPEND_INTERVAL: SimTime = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDef {
    pub kind: SclKind,
    pub base: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkDef {
    pub a: String,
    pub b: String,
    pub metrics: LinkMetrics,
}

/// Routes `prefix` hop by hop along `path`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteDef {
    pub prefix: String,
    pub path: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTopology {
    pub nodes: Vec<NodeDef>,
    pub links: Vec<LinkDef>,
    pub routes: Vec<RouteDef>,
    /// Hosts the meter application.
    pub producer: String,
    /// Hosts the monitoring application.
    pub consumer: String,
}

fn node(kind: SclKind, base: &str) -> NodeDef {
    NodeDef {
        kind,
        base: base.to_string(),
    }
}

impl ScenarioTopology {
    /// NSCL, one gateway and one device; no overlay links.
    pub fn usecase1() -> Self {
        Self {
            nodes: vec![
                node(SclKind::Nscl, "NSCL"),
                node(SclKind::Gscl, "Gscl1"),
                node(SclKind::Dscl, "Dscl1"),
            ],
            links: Vec::new(),
            routes: Vec::new(),
            producer: "Gscl1".into(),
            consumer: "Dscl1".into(),
        }
    }

    /// NSCL, three gateways in a chain and a device behind the last one,
    /// with routes towards Gscl1 along the chain.
    pub fn usecase2() -> Self {
        let chain = ["Dscl1", "Gscl3", "Gscl2", "Gscl1"];
        let links = chain
            .windows(2)
            .map(|w| LinkDef {
                a: w[0].into(),
                b: w[1].into(),
                metrics: LinkMetrics {
                    delay_ms: 5,
                    loss: 0.0,
                    capacity: 100.0,
                },
            })
            .collect();
        Self {
            nodes: vec![
                node(SclKind::Nscl, "NSCL"),
                node(SclKind::Gscl, "Gscl1"),
                node(SclKind::Gscl, "Gscl2"),
                node(SclKind::Gscl, "Gscl3"),
                node(SclKind::Dscl, "Dscl1"),
            ],
            links,
            routes: vec![RouteDef {
                prefix: "Gscl1".into(),
                path: chain.iter().map(|s| s.to_string()).collect(),
            }],
            producer: "Gscl1".into(),
            consumer: "Dscl1".into(),
        }
    }

    /// Parses the line format
    ///
    /// ```text
    /// node=Gscl1 kind=gscl
    /// link=Dscl1,Gscl1 delay=5 loss=0 capacity=100
    /// route=Gscl1 path=Dscl1,Gscl1
    /// producer=Gscl1
    /// consumer=Dscl1
    /// ```
    ///
    /// Blank lines and lines starting with '#' are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut links = Vec::new();
        let mut routes = Vec::new();
        let (mut producer, mut consumer) = (None, None);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = || format!("line {}", lineno + 1);
            let mut fields = Vec::new();
            for token in line.split_whitespace() {
                let (k, v) = token
                    .split_once('=')
                    .ok_or_else(|| anyhow!("{}: expected key=value, got {token:?}", at()))?;
                fields.push((k, v));
            }
            let get = |key: &str| fields.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
            let (head, value) = fields[0];
            match head {
                "node" => {
                    let kind = get("kind")
                        .ok_or_else(|| anyhow!("{}: node needs kind=", at()))?
                        .parse::<SclKind>()
                        .map_err(|e| anyhow!("{}: {e}", at()))?;
                    nodes.push(node(kind, value));
                }
                "link" => {
                    let (a, b) = value
                        .split_once(',')
                        .ok_or_else(|| anyhow!("{}: link needs two comma-separated ends", at()))?;
                    let mut metrics = LinkMetrics::default();
                    if let Some(v) = get("delay") {
                        metrics.delay_ms = v.parse().with_context(|| format!("{}: delay", at()))?;
                    }
                    if let Some(v) = get("loss") {
                        metrics.loss = v.parse().with_context(|| format!("{}: loss", at()))?;
                        if !(0.0..=1.0).contains(&metrics.loss) {
                            bail!("{}: loss must lie in [0, 1]", at());
                        }
                    }
                    if let Some(v) = get("capacity") {
                        metrics.capacity = v.parse().with_context(|| format!("{}: capacity", at()))?;
                    }
                    links.push(LinkDef {
                        a: a.into(),
                        b: b.into(),
                        metrics,
                    });
                }
                "route" => {
                    let path = get("path").ok_or_else(|| anyhow!("{}: route needs path=", at()))?;
                    routes.push(RouteDef {
                        prefix: value.into(),
                        path: path.split(',').map(str::to_string).collect(),
                    });
                }
                "producer" => producer = Some(value.to_string()),
                "consumer" => consumer = Some(value.to_string()),
                other => bail!("{}: unknown record {other:?}", at()),
            }
        }
        let topology = Self {
            nodes,
            links,
            routes,
            producer: producer.ok_or_else(|| anyhow!("missing producer="))?,
            consumer: consumer.ok_or_else(|| anyhow!("missing consumer="))?,
        };
        topology.check()?;
        Ok(topology)
    }

    fn check(&self) -> Result<()> {
        let names: BTreeSet<&str> = self.nodes.iter().map(|n| n.base.as_str()).collect();
        if names.len() != self.nodes.len() {
            bail!("duplicate node names");
        }
        if self.nodes.iter().filter(|n| n.kind == SclKind::Nscl).count() != 1 {
            bail!("exactly one NSCL node is required");
        }
        let known = |n: &str| -> Result<()> {
            if names.contains(n) {
                Ok(())
            } else {
                bail!("unknown node {n:?}")
            }
        };
        for l in &self.links {
            known(&l.a)?;
            known(&l.b)?;
        }
        for r in &self.routes {
            for n in &r.path {
                known(n)?;
            }
        }
        known(&self.producer)?;
        known(&self.consumer)?;
        if self.producer == self.consumer {
            bail!("producer and consumer must differ");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub oscl: bool,
    pub appends: u32,
    pub seed: u64,
    /// Overlay path budget D.
    pub max_hops: u32,
    pub topology: ScenarioTopology,
}

impl ScenarioConfig {
    pub fn builtin(name: &str, oscl: bool, appends: u32) -> Result<Self> {
        let topology = match name {
            "usecase1" => ScenarioTopology::usecase1(),
            "usecase2" => ScenarioTopology::usecase2(),
            other => bail!("unknown scenario {other:?}"),
        };
        Ok(Self {
            name: name.to_string(),
            oscl,
            appends,
            seed: 1,
            max_hops: 3,
            topology,
        })
    }
}

/// Everything a replay produced, including the finished simulation.
#[derive(Debug)]
pub struct ScenarioOutcome {
    pub net: Oscl,
    pub nscl: NodeId,
    pub producer: NodeId,
    pub consumer: NodeId,
    pub discovery: DiscoveryResult,
    /// Overlay runs only.
    pub link: Option<LinkDecision>,
    pub subscription: Subscription,
    /// Overlay edges just before the link decision.
    pub edges_after_discovery: usize,
}

impl ScenarioOutcome {
    pub fn label(&self, id: NodeId) -> String {
        self.net.system().label(id)
    }

    pub fn meter_app(&self) -> Name {
        self.net
            .system()
            .get(self.producer)
            .expect("producer exists")
            .tree
            .application_name(METER_APP)
            .expect("valid name")
    }

    pub fn meter_container(&self) -> Name {
        self.net
            .system()
            .get(self.producer)
            .expect("producer exists")
            .tree
            .container_name(METER_APP, METER_CONTAINER)
            .expect("valid name")
    }
}

fn lookup(net: &Oscl, base: &str) -> Result<NodeId> {
    net.system()
        .by_base_name(base)
        .ok_or_else(|| anyhow!("unknown node {base:?}"))
}

/// Registration, application setup, discovery, subscription, then
/// `appends` content instances spaced `APPEND_INTERVAL` apart.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioOutcome> {
    config.topology.check()?;
    let base_lifetime = NdnConfig::default().pit_lifetime;
    // One subscription Interest outlives the whole run.
    let run_span = (config.appends as SimTime + 1) * APPEND_INTERVAL;
    let oscl_config = OsclConfig {
        policy: QosPolicy {
            max_path_hops: config.max_hops,
            ..QosPolicy::default()
        },
        seed: config.seed,
        subscription_lifetime: base_lifetime + run_span,
        ..OsclConfig::default()
    };
    let mut net = Oscl::new(M2mSystem::new(NdnConfig::default()), oscl_config);
    for n in &config.topology.nodes {
        net.add_scl(n.kind, &n.base)?;
    }
    for l in &config.topology.links {
        let (a, b) = (lookup(&net, &l.a)?, lookup(&net, &l.b)?);
        net.connect(a, b, l.metrics)?;
    }
    for r in &config.topology.routes {
        let prefix = Name::parse(&r.prefix)?;
        let path = r.path.iter().map(|n| lookup(&net, n)).collect::<Result<Vec<_>>>()?;
        net.add_routes_along(&path, &prefix)?;
    }
    let nscl = net.system().nscl().ok_or_else(|| anyhow!("no NSCL"))?;
    let producer = lookup(&net, &config.topology.producer)?;
    let consumer = lookup(&net, &config.topology.consumer)?;

    let ids: Vec<NodeId> = net.graph().vertices().filter(|id| *id != nscl).collect();
    for id in ids {
        net.system_mut().register_scl(id, nscl)?;
    }
    let sys = net.system_mut();
    let app = sys.create_application(producer, METER_APP)?;
    let container = sys.create_container(producer, METER_APP, METER_CONTAINER)?;
    sys.create_application(consumer, MONITOR_APP)?;

    let (discovery, link, subscription, edges_after_discovery);
    if config.oscl {
        discovery = net.discover(consumer, &app, config.max_hops, nscl)?;
        let metrics = match discovery.path() {
            Some(_) => Some(net.monitor(&discovery)?),
            None => None,
        };
        edges_after_discovery = net.graph().edge_count();
        link = Some(net.ensure_link(consumer, &discovery, metrics.as_ref())?);
        subscription = net.p2p_subscribe(consumer, &container, config.appends.max(1))?;
    } else {
        discovery = net.system_mut().centralized_discover(consumer, nscl, &app)?;
        edges_after_discovery = net.graph().edge_count();
        link = None;
        subscription = net.system_mut().subscribe_centralized(consumer, nscl, &container)?;
    }

    for i in 0..config.appends {
        net.advance(APPEND_INTERVAL)?;
        let payload = format!("reading-{i}").into_bytes();
        net.create_content_instance(producer, METER_APP, METER_CONTAINER, payload)?;
    }
    net.settle()?;

    Ok(ScenarioOutcome {
        net,
        nscl,
        producer,
        consumer,
        discovery,
        link,
        subscription,
        edges_after_discovery,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trips_usecase2_shape() {
        let text = "\
# chain
node=NSCL kind=nscl
node=Gscl1 kind=gscl
node=Dscl1 kind=dscl
link=Dscl1,Gscl1 delay=7 loss=0.0 capacity=50
route=Gscl1 path=Dscl1,Gscl1
producer=Gscl1
consumer=Dscl1
";
        let t = ScenarioTopology::parse(text).unwrap();
        assert_eq!(t.nodes.len(), 3);
        assert_eq!(t.links[0].metrics.delay_ms, 7);
        assert_eq!(t.links[0].metrics.capacity, 50.0);
        assert_eq!(t.routes[0].path, vec!["Dscl1", "Gscl1"]);
    }

    #[test]
    fn parse_rejects_bad_files() {
        assert!(ScenarioTopology::parse("node=A kind=gscl\nproducer=A\nconsumer=A").is_err());
        assert!(ScenarioTopology::parse("node=N kind=nscl\nlink=N\n").is_err());
        assert!(ScenarioTopology::parse("bogus=1").is_err());
        assert!(ScenarioTopology::parse("node=N kind=nscl\nnode=A kind=gscl\nnode=B kind=dscl\nlink=A,Z\nproducer=A\nconsumer=B").is_err());
        assert!(ScenarioTopology::parse("node=N kind=router").is_err());
    }

    #[test]
    fn custom_topology_runs() {
        let text = "node=NSCL kind=nscl\nnode=G kind=gscl\nnode=R kind=gscl\nnode=D kind=dscl\n\
                    link=D,R\nlink=R,G\nroute=G path=D,R,G\nproducer=G\nconsumer=D\n";
        let config = ScenarioConfig {
            name: "custom".into(),
            oscl: true,
            appends: 3,
            seed: 1,
            max_hops: 3,
            topology: ScenarioTopology::parse(text).unwrap(),
        };
        let out = run_scenario(&config).unwrap();
        assert_eq!(out.discovery.path_len(), Some(2));
        assert_eq!(out.net.system().get(out.consumer).unwrap().inbox.len(), 1 + 3);
    }
}
