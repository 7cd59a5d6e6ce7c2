use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::name::Name;
use crate::ndn::{Data, Emission, FaceKind, Interest, NdnError, Packet, PacketKind, DEFAULT_PIT_LIFETIME};
use crate::scl::{Delivery, DiscoveryResult, Locator, M2mSystem, Resource, SclError, SclKind, Subscription, SubscriptionMode};
use crate::trace::{Direction, EmissionRecord, MsgType, Role, Trace};
use crate::types::{FaceId, NodeId, SimTime};

use super::{qos_monitor, LinkMetrics, OsclError, OverlayGraph, QosMetrics, QosPolicy};

/// Last component of the name a subscriber expresses to watch a resource.
pub const SUBSCRIPTIONS: &str = "subscriptions";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OsclConfig {
    pub policy: QosPolicy,
    /// Metrics given to links created by [`Oscl::ensure_link`].
    pub direct_link: LinkMetrics,
    pub probe_count: u32,
    /// Cache lifetime of content-instance Data. Discovery answers and
    /// notifications are never cached.
    pub content_freshness: SimTime,
    /// Lifetime of subscription Interests.
    pub subscription_lifetime: SimTime,
    pub seed: u64,
}

impl Default for OsclConfig {
    fn default() -> Self {
        Self {
            policy: QosPolicy::default(),
            direct_link: LinkMetrics::default(),
            probe_count: 100,
            content_freshness: 1000,
            subscription_lifetime: DEFAULT_PIT_LIFETIME,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkDecision {
    ReusedPath,
    NewLink,
}

#[derive(Debug, Clone)]
enum Event {
    Arrive { node: NodeId, face: FaceId, packet: Packet },
    Refresh { subscription: usize },
}

#[derive(Debug, Clone)]
struct Scheduled {
    time: SimTime,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Reversed so the max-heap pops the earliest event first.
impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        (other.time, other.seq).cmp(&(self.time, self.seq))
    }
}

#[derive(Debug, Clone)]
struct P2pState {
    subscription: Subscription,
    origin: NodeId,
    name: Name,
    solicit: u32,
    hop_limit: u32,
}

/// A simulated M2M system with its overlay: one event loop drives every
/// node's forwarding engine.
#[derive(Debug, Clone)]
pub struct Oscl {
    system: M2mSystem,
    graph: OverlayGraph,
    config: OsclConfig,
    queue: BinaryHeap<Scheduled>,
    seq: u64,
    in_flight: usize,
    rng: ChaCha8Rng,
    /// (node, Data name) -> neighbour the Data last arrived from.
    data_hops: HashMap<(NodeId, Name), NodeId>,
    subscriptions: Vec<P2pState>,
}

impl Oscl {
    pub fn new(system: M2mSystem, config: OsclConfig) -> Self {
        let mut graph = OverlayGraph::new();
        for scl in system.instances() {
            graph.add_vertex(scl.id);
        }
        Self {
            system,
            graph,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            queue: BinaryHeap::new(),
            seq: 0,
            in_flight: 0,
            data_hops: HashMap::new(),
            subscriptions: Vec::new(),
        }
    }

    pub fn system(&self) -> &M2mSystem {
        &self.system
    }

    /// Direct access for registration and tree setup. Add instances through
    /// [`Oscl::add_scl`] so they join the overlay.
    pub fn system_mut(&mut self) -> &mut M2mSystem {
        &mut self.system
    }

    pub fn graph(&self) -> &OverlayGraph {
        &self.graph
    }

    pub fn config(&self) -> &OsclConfig {
        &self.config
    }

    pub fn trace(&self) -> &Trace {
        &self.system.trace
    }

    pub fn now(&self) -> SimTime {
        self.system.now()
    }

    pub fn add_scl(&mut self, kind: SclKind, base_name: &str) -> Result<NodeId, OsclError> {
        let id = self.system.add_scl(kind, base_name)?;
        self.graph.add_vertex(id);
        Ok(id)
    }

    fn require(&self, node: NodeId) -> Result<(), OsclError> {
        if self.graph.contains(node) {
            Ok(())
        } else {
            Err(OsclError::UnknownNode(node))
        }
    }

    /// Opens an overlay link, adding a face on each end. Returns false if the
    /// link already exists.
    pub fn connect(&mut self, u: NodeId, v: NodeId, metrics: LinkMetrics) -> Result<bool, OsclError> {
        self.require(u)?;
        self.require(v)?;
        if u == v {
            return Err(OsclError::SelfLoop(u));
        }
        if self.graph.has_edge(u, v) {
            return Ok(false);
        }
        let face_u = self.system.get_mut(u)?.ndn.add_face(FaceKind::Link { peer: v });
        let face_v = self.system.get_mut(v)?.ndn.add_face(FaceKind::Link { peer: u });
        self.graph.add_edge(u, v, face_u, face_v, metrics)
    }

    fn face_towards(&self, node: NodeId, peer: NodeId) -> Result<FaceId, OsclError> {
        self.system
            .get(node)?
            .ndn
            .face_to(peer)
            .ok_or(OsclError::BrokenPath { from: node, to: peer })
    }

    /// Routes `prefix` at `node` over its link to `via`.
    pub fn add_route(&mut self, node: NodeId, prefix: &Name, via: NodeId) -> Result<(), OsclError> {
        let face = self.face_towards(node, via)?;
        self.system.get_mut(node)?.ndn.fib_register(prefix, face)?;
        Ok(())
    }

    /// Routes `prefix` hop by hop along `path`, towards its last node.
    pub fn add_routes_along(&mut self, path: &[NodeId], prefix: &Name) -> Result<(), OsclError> {
        for hop in path.windows(2) {
            self.add_route(hop[0], prefix, hop[1])?;
        }
        Ok(())
    }

    pub fn next_nonce(&mut self) -> u64 {
        self.rng.gen()
    }

    // ---- event loop ----

    fn schedule(&mut self, time: SimTime, event: Event) {
        if matches!(event, Event::Arrive { .. }) {
            self.in_flight += 1;
        }
        self.seq += 1;
        self.queue.push(Scheduled {
            time,
            seq: self.seq,
            event,
        });
    }

    /// Runs until no packet is in flight. Timers due later stay queued.
    pub fn settle(&mut self) -> Result<(), OsclError> {
        while self.in_flight > 0 {
            let Some(next) = self.queue.pop() else { break };
            self.dispatch(next)?;
        }
        Ok(())
    }

    /// Runs every event due at or before `time`, then moves the clock there.
    pub fn run_until(&mut self, time: SimTime) -> Result<(), OsclError> {
        while self.queue.peek().is_some_and(|e| e.time <= time) {
            let next = self.queue.pop().expect("peeked");
            self.dispatch(next)?;
        }
        if time > self.now() {
            self.system.set_now(time);
        }
        Ok(())
    }

    pub fn advance(&mut self, ms: SimTime) -> Result<(), OsclError> {
        self.run_until(self.now() + ms)
    }

    fn dispatch(&mut self, scheduled: Scheduled) -> Result<(), OsclError> {
        self.system.set_now(scheduled.time);
        match scheduled.event {
            Event::Arrive { node, face, packet } => {
                self.in_flight -= 1;
                self.record(node, Direction::In, &packet, face);
                if let Packet::Data(data) = &packet {
                    if let Some(FaceKind::Link { peer }) = self.system.get(node)?.ndn.face_kind(face) {
                        self.data_hops.insert((node, data.name.clone()), peer);
                    }
                }
                self.process(node, face, packet, false)
            }
            Event::Refresh { subscription } => self.refresh(subscription),
        }
    }

    fn record(&mut self, node: NodeId, direction: Direction, packet: &Packet, face: FaceId) {
        let nonce = match packet {
            Packet::Interest(i) => Some(i.nonce),
            Packet::Data(_) => None,
        };
        let time = self.now();
        self.system.trace.emissions.push(EmissionRecord {
            time,
            node,
            direction,
            kind: packet.kind(),
            name: packet.name().clone(),
            nonce,
            face,
        });
    }

    /// Feeds `packet` to `node`'s forwarding engine and carries out the result.
    ///
    /// Counting: the packet continues as the same message on its first overlay
    /// copy; any further copy is a new message originated here. It ends here
    /// (received) when only the local application gets it or when it is
    /// absorbed by a pending entry, and is dropped otherwise.
    fn process(&mut self, node: NodeId, in_face: FaceId, packet: Packet, from_app: bool) -> Result<(), OsclError> {
        let now = self.now();
        let kind = packet.kind();
        let msg = MsgType::from(kind);
        let nonce = match &packet {
            Packet::Interest(i) => Some(i.nonce),
            Packet::Data(_) => None,
        };
        let emissions = {
            let ndn = &mut self.system.get_mut(node)?.ndn;
            match packet {
                Packet::Interest(i) => ndn.on_interest(i, in_face, now)?,
                Packet::Data(d) => ndn.on_data(d, in_face, now)?,
            }
        };

        let (mut to_overlay, mut to_app, mut dropped) = (0u32, 0u32, false);
        for e in &emissions {
            let (face, k) = match e {
                Emission::Interest { face, .. } => (*face, PacketKind::Interest),
                Emission::Data { face, .. } => (*face, PacketKind::Data),
                Emission::Drop { .. } => {
                    dropped = true;
                    continue;
                }
            };
            if k == kind {
                if face == FaceId::APP {
                    to_app += 1;
                } else {
                    to_overlay += 1;
                }
            }
        }
        let counters = &mut self.system.trace.counters;
        if from_app {
            counters.bump(node, msg, Role::Originated);
        }
        if to_overlay > 0 {
            if !from_app {
                counters.bump(node, msg, Role::Relayed);
            }
            for _ in 1..to_overlay {
                counters.bump(node, msg, Role::Originated);
            }
            for _ in 0..to_app {
                counters.bump(node, msg, Role::Originated);
                counters.bump(node, msg, Role::Received);
            }
        } else if to_app > 0 {
            counters.bump(node, msg, Role::Received);
            for _ in 1..to_app {
                counters.bump(node, msg, Role::Originated);
                counters.bump(node, msg, Role::Received);
            }
        } else if dropped {
            counters.bump(node, msg, Role::Dropped);
        } else {
            counters.bump(node, msg, Role::Received);
        }

        for e in emissions {
            let (face, out) = match e {
                Emission::Drop { name, .. } => {
                    let time = self.now();
                    self.system.trace.emissions.push(EmissionRecord {
                        time,
                        node,
                        direction: Direction::Drop,
                        kind,
                        name,
                        nonce,
                        face: in_face,
                    });
                    continue;
                }
                Emission::Interest { face, interest } => (face, Packet::Interest(interest)),
                Emission::Data { face, data } => (face, Packet::Data(data)),
            };
            if out.kind() != kind {
                // A cached answer is a new message.
                let out_msg = MsgType::from(out.kind());
                self.system.trace.counters.bump(node, out_msg, Role::Originated);
                if face == FaceId::APP {
                    self.system.trace.counters.bump(node, out_msg, Role::Received);
                }
            }
            self.record(node, Direction::Out, &out, face);
            if face == FaceId::APP {
                self.deliver_local(node, out)?;
            } else {
                self.transmit(node, face, out)?;
            }
        }
        Ok(())
    }

    fn transmit(&mut self, node: NodeId, face: FaceId, packet: Packet) -> Result<(), OsclError> {
        let Some(FaceKind::Link { peer }) = self.system.get(node)?.ndn.face_kind(face) else {
            return Err(NdnError::UnknownFace(face).into());
        };
        let edge = self
            .graph
            .edge(node, peer)
            .ok_or(OsclError::BrokenPath { from: node, to: peer })?;
        let metrics = edge.metrics;
        let peer_face = if node < peer { edge.faces.1 } else { edge.faces.0 };
        let now = self.now();
        let msg = MsgType::from(packet.kind());
        self.system.trace.event(now, node, peer, msg, packet.name());
        if metrics.loss > 0.0 && self.rng.gen_bool(metrics.loss.min(1.0)) {
            self.record(node, Direction::Lost, &packet, face);
            self.system.trace.counters.bump(node, msg, Role::Dropped);
            return Ok(());
        }
        self.schedule(
            now + metrics.delay_ms,
            Event::Arrive {
                node: peer,
                face: peer_face,
                packet,
            },
        );
        Ok(())
    }

    fn deliver_local(&mut self, node: NodeId, packet: Packet) -> Result<(), OsclError> {
        match packet {
            Packet::Interest(interest) => {
                if let Some(data) = self.answer(node, &interest.name)? {
                    self.process(node, FaceId::APP, Packet::Data(data), true)?;
                }
            }
            Packet::Data(data) => {
                let time = self.now();
                self.system.get_mut(node)?.inbox.push(Delivery {
                    time,
                    name: data.name,
                    payload: data.payload,
                    producer: data.producer,
                });
            }
        }
        Ok(())
    }

    /// The local application's response to an Interest it owns.
    fn answer(&mut self, node: NodeId, name: &Name) -> Result<Option<Data>, OsclError> {
        let freshness = self.config.content_freshness;
        let scl = self.system.get_mut(node)?;
        if name.len() > 1 && name.last().as_str() == SUBSCRIPTIONS {
            let target = name.prefix(name.len() - 1).expect("len > 1");
            if scl.tree.resolve(&target).is_ok() {
                scl.watches.insert(name.clone());
            }
            return Ok(None);
        }
        Ok(match scl.tree.resolve(name) {
            Ok(Resource::Instance(instance)) => Some(Data::new(name.clone(), instance.payload.clone(), freshness, node)),
            Ok(_) => Some(Data::new(name.clone(), scl.locator.to_wire(), 0, node)),
            Err(_) => None,
        })
    }

    // ---- consumer side ----

    /// Hands `interest` to `origin`'s forwarding engine as if its application
    /// had expressed it. Nothing moves until the loop runs.
    pub fn issue(&mut self, origin: NodeId, interest: Interest) -> Result<(), OsclError> {
        self.require(origin)?;
        self.process(origin, FaceId::APP, Packet::Interest(interest), true)
    }

    /// Issues `interest`, runs the network quiet and returns the answer that
    /// reached `origin`'s application, if any. On failure, waits until every
    /// pending entry for the name has lapsed.
    pub fn express(&mut self, origin: NodeId, interest: Interest) -> Result<Option<Delivery>, OsclError> {
        let name = interest.name.clone();
        let mark = self.system.get(origin)?.inbox.len();
        self.issue(origin, interest)?;
        self.settle()?;
        let answer = self.system.get(origin)?.inbox[mark..]
            .iter()
            .find(|d| d.name == name)
            .cloned();
        if answer.is_none() {
            self.wait_out(&name)?;
        }
        Ok(answer)
    }

    fn wait_out(&mut self, name: &Name) -> Result<(), OsclError> {
        let latest = self
            .system
            .instances()
            .filter_map(|s| s.ndn.pit().get(name).map(|e| e.expiry))
            .max();
        if let Some(expiry) = latest {
            self.run_until(expiry + 1)?;
            let now = self.now();
            let ids: Vec<NodeId> = self.graph.vertices().collect();
            for id in ids {
                self.system.get_mut(id)?.ndn.pit_expire(now);
            }
        }
        Ok(())
    }

    fn interest(&mut self, name: Name, scope: u32) -> Interest {
        let lifetime = self.system.ndn_config().pit_lifetime;
        Interest::new(name, self.next_nonce())
            .with_hop_limit(scope)
            .with_lifetime(lifetime)
    }

    /// Plain named read over the overlay.
    pub fn fetch(&mut self, origin: NodeId, name: &Name, scope: u32) -> Result<Option<Delivery>, OsclError> {
        if scope == 0 {
            return Err(OsclError::InvalidScope);
        }
        let interest = self.interest(name.clone(), scope);
        self.express(origin, interest)
    }

    /// Looks `target` up with an Interest limited to `scope` overlay hops.
    /// `Ok(None)` when nothing answered.
    pub fn distributed_discover(
        &mut self,
        origin: NodeId,
        target: &Name,
        scope: u32,
    ) -> Result<Option<DiscoveryResult>, OsclError> {
        self.require(origin)?;
        if scope == 0 {
            return Err(OsclError::InvalidScope);
        }
        let scl = self.system.get(origin)?;
        if scl.owns(target) {
            return Ok(scl
                .tree
                .resolve(target)
                .ok()
                .map(|_| DiscoveryResult::distributed(target.clone(), scl.locator.clone(), vec![origin])));
        }
        self.data_hops.retain(|(_, n), _| n != target);
        let interest = self.interest(target.clone(), scope);
        let Some(answer) = self.express(origin, interest)? else {
            return Ok(None);
        };
        let locator = match Locator::from_wire(answer.producer, &answer.payload) {
            Some(l) => l,
            None => self.system.get(answer.producer)?.locator.clone(),
        };
        let mut path = vec![origin];
        let mut at = origin;
        while at != answer.producer {
            match self.data_hops.get(&(at, target.clone())) {
                Some(prev) if !path.contains(prev) => {
                    path.push(*prev);
                    at = *prev;
                }
                _ => break,
            }
        }
        Ok(Some(DiscoveryResult::distributed(target.clone(), locator, path)))
    }

    /// Overlay discovery first, NSCL discovery as the backup.
    pub fn discover(
        &mut self,
        origin: NodeId,
        target: &Name,
        scope: u32,
        nscl: NodeId,
    ) -> Result<DiscoveryResult, OsclError> {
        if let Some(found) = self.distributed_discover(origin, target, scope)? {
            return Ok(found);
        }
        match self.system.centralized_discover(origin, nscl, target) {
            Ok(found) => Ok(found),
            Err(SclError::NotFound(_) | SclError::EmptyContainer(_)) => Err(OsclError::NotFound(target.clone())),
            Err(e) => Err(e.into()),
        }
    }

    /// Probes the path of a distributed discovery result.
    pub fn monitor(&mut self, found: &DiscoveryResult) -> Result<QosMetrics, OsclError> {
        let path = found.path().ok_or(OsclError::EmptyPath)?;
        let metrics = qos_monitor(&self.graph, path, self.config.probe_count, &mut self.rng)?;
        let now = self.now();
        let (src, dst) = (path[0], path[path.len() - 1]);
        self.system.trace.event(now, src, dst, MsgType::Probe, found.uri());
        Ok(metrics)
    }

    /// Keeps the discovered path or opens a direct link to the owner: always
    /// after a centralized discovery, otherwise when the path is longer than
    /// the policy allows or its measurements break a threshold.
    pub fn ensure_link(
        &mut self,
        origin: NodeId,
        found: &DiscoveryResult,
        metrics: Option<&QosMetrics>,
    ) -> Result<LinkDecision, OsclError> {
        let owner = found.locator().node;
        self.require(origin)?;
        self.require(owner)?;
        if origin == owner || self.graph.has_edge(origin, owner) {
            return Ok(LinkDecision::ReusedPath);
        }
        let policy = self.config.policy;
        let path_ok = found.path_len().is_some_and(|h| policy.accepts_path(h as u32));
        let quality_ok = !metrics.is_some_and(|m| policy.violated_by(m));
        if path_ok && quality_ok {
            return Ok(LinkDecision::ReusedPath);
        }
        self.connect(origin, owner, self.config.direct_link)?;
        let origin_base = self.system.get(origin)?.base_name.clone();
        let owner_base = self.system.get(owner)?.base_name.clone();
        let (to_owner, to_origin) = (self.face_towards(origin, owner)?, self.face_towards(owner, origin)?);
        self.system.get_mut(origin)?.ndn.fib_prefer(&owner_base, to_owner)?;
        self.system.get_mut(owner)?.ndn.fib_prefer(&origin_base, to_origin)?;
        let now = self.now();
        self.system.trace.event(now, origin, owner, MsgType::LinkUp, found.uri());
        Ok(LinkDecision::NewLink)
    }

    /// The overlay nodes an Interest for `name` from `origin` would visit
    /// under best-route forwarding, ending at the producer.
    pub fn route_walk(&self, origin: NodeId, name: &Name) -> Option<Vec<NodeId>> {
        let mut path = vec![origin];
        let mut in_face = FaceId::APP;
        loop {
            let at = *path.last().expect("non-empty");
            let ndn = &self.system.get(at).ok()?.ndn;
            let (_, entry) = ndn.fib().longest_prefix_match(name)?;
            let face = *entry.next_hops.iter().find(|f| **f != in_face)?;
            if face == FaceId::APP {
                return Some(path);
            }
            let Some(FaceKind::Link { peer }) = ndn.face_kind(face) else {
                return None;
            };
            if path.contains(&peer) {
                return None;
            }
            in_face = self.system.get(peer).ok()?.ndn.face_to(at)?;
            path.push(peer);
        }
    }

    /// Subscribes `origin` to `target` with one Interest soliciting `k` Data
    /// messages, one per content instance created under `target`.
    pub fn p2p_subscribe(&mut self, origin: NodeId, target: &Name, k: u32) -> Result<Subscription, OsclError> {
        self.subscribe(origin, target, k, false)
    }

    /// As [`Oscl::p2p_subscribe`], but re-expressed every half Interest
    /// lifetime whenever the subscriber no longer holds a live pending entry,
    /// so it outlives both `k` and the lifetime.
    pub fn p2p_subscribe_long_lived(
        &mut self,
        origin: NodeId,
        target: &Name,
        k: u32,
    ) -> Result<Subscription, OsclError> {
        self.subscribe(origin, target, k, true)
    }

    fn subscribe(&mut self, origin: NodeId, target: &Name, k: u32, long_lived: bool) -> Result<Subscription, OsclError> {
        self.require(origin)?;
        if k == 0 {
            return Err(OsclError::InvalidSolicitCount);
        }
        let name = target.child(SUBSCRIPTIONS)?;
        let path = self
            .route_walk(origin, &name)
            .filter(|p| p.len() > 1)
            .ok_or_else(|| OsclError::NoPath(target.clone()))?;
        let subscription = Subscription {
            subscriber: self.system.get(origin)?.locator.clone(),
            target: target.clone(),
            mode: SubscriptionMode::P2p { delivery_path: path.clone() },
            active: true,
        };
        let index = self.subscriptions.len();
        self.subscriptions.push(P2pState {
            subscription: subscription.clone(),
            origin,
            name,
            solicit: k,
            hop_limit: (path.len() - 1) as u32,
        });
        self.issue_subscription(index)?;
        self.settle()?;
        if long_lived {
            let at = self.now() + self.refresh_interval();
            self.schedule(at, Event::Refresh { subscription: index });
        }
        Ok(subscription)
    }

    fn refresh_interval(&self) -> SimTime {
        (self.config.subscription_lifetime / 2).max(1)
    }

    fn issue_subscription(&mut self, index: usize) -> Result<(), OsclError> {
        let state = &self.subscriptions[index];
        let (origin, name, solicit, hops) = (state.origin, state.name.clone(), state.solicit, state.hop_limit);
        let interest = Interest::new(name, self.next_nonce())
            .with_hop_limit(hops)
            .with_solicit_count(solicit)
            .with_lifetime(self.config.subscription_lifetime);
        self.issue(origin, interest)
    }

    fn refresh(&mut self, index: usize) -> Result<(), OsclError> {
        let state = &self.subscriptions[index];
        if !state.subscription.active {
            return Ok(());
        }
        let now = self.now();
        let live = self
            .system
            .get(state.origin)?
            .ndn
            .pit()
            .get(&state.name)
            .is_some_and(|e| e.is_live(now));
        if !live {
            self.issue_subscription(index)?;
        }
        let at = now + self.refresh_interval();
        self.schedule(at, Event::Refresh { subscription: index });
        Ok(())
    }

    /// Stops refreshing every overlay subscription of `origin` to `target`.
    pub fn cancel_subscription(&mut self, origin: NodeId, target: &Name) -> usize {
        let mut cancelled = 0;
        for s in &mut self.subscriptions {
            if s.origin == origin && &s.subscription.target == target && s.subscription.active {
                s.subscription.active = false;
                cancelled += 1;
            }
        }
        cancelled
    }

    /// Overlay subscriptions created so far.
    pub fn subscriptions(&self) -> impl Iterator<Item = &Subscription> {
        self.subscriptions.iter().map(|s| &s.subscription)
    }

    // ---- producer side ----

    /// Appends a content instance. Centralized subscribers are notified
    /// through the NSCL; every overlay watcher with a live pending entry
    /// gets one Data message back along its Interest's path.
    pub fn create_content_instance(
        &mut self,
        scl: NodeId,
        app: &str,
        container: &str,
        payload: Vec<u8>,
    ) -> Result<usize, OsclError> {
        let index = self.system.create_content_instance(scl, app, container, payload.clone())?;
        let now = self.now();
        let owner = self.system.get_mut(scl)?;
        let container_name = owner.tree.container_name(app, container)?;
        let mut ready = Vec::new();
        for watch in owner.watches.clone() {
            let target = watch.prefix(watch.len() - 1).expect("watch names have a parent");
            if !target.is_prefix_of(&container_name) {
                continue;
            }
            if owner.ndn.pit().get(&watch).is_some_and(|e| e.is_live(now)) {
                ready.push(watch);
            } else {
                owner.watches.remove(&watch);
            }
        }
        for watch in ready {
            let data = Data::new(watch, payload.clone(), 0, scl);
            self.process(scl, FaceId::APP, Packet::Data(data), true)?;
        }
        self.settle()?;
        Ok(index)
    }
}
