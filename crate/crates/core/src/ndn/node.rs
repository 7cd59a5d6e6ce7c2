use std::collections::{BTreeMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::name::{Name, PrefixTable};
use crate::types::{FaceId, NodeId, SimTime};

use super::cs::ContentStore;
use super::packet::{Data, Interest};
use super::pit::{Pit, PitEntry};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NdnError {
    #[error("face {0} does not exist on this node")]
    UnknownFace(FaceId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaceKind {
    /// The node's local application.
    App,
    /// An overlay link to another node.
    Link { peer: NodeId },
}

/// How an Interest that misses both the CS and the PIT picks its outgoing faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Strategy {
    /// First FIB next hop of the longest matching prefix.
    #[default]
    BestRoute,
    /// Every overlay face except the arrival face, unless the FIB says the
    /// name is produced locally.
    Flood,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FibEntry {
    pub prefix: Name,
    /// Preference order; never empty, no duplicates.
    pub next_hops: Vec<FaceId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DropReason {
    /// The (name, nonce) pair was already seen here.
    Loop,
    /// No usable next hop, or the hop limit is exhausted.
    NoRoute,
    /// Data with no live pending entry.
    Unsolicited,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::Loop => "loop",
            DropReason::NoRoute => "no-route",
            DropReason::Unsolicited => "unsolicited",
        }
    }
}

/// One outcome of processing a packet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Emission {
    Interest { face: FaceId, interest: Interest },
    Data { face: FaceId, data: Data },
    Drop { reason: DropReason, name: Name },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NdnConfig {
    pub cs_capacity: usize,
    pub pit_lifetime: SimTime,
    pub nonce_capacity: usize,
    pub strategy: Strategy,
}

impl Default for NdnConfig {
    fn default() -> Self {
        Self {
            cs_capacity: super::DEFAULT_CS_CAPACITY,
            pit_lifetime: super::DEFAULT_PIT_LIFETIME,
            nonce_capacity: super::DEFAULT_NONCE_CAPACITY,
            strategy: Strategy::BestRoute,
        }
    }
}

/// Recently seen (name, nonce) pairs, evicted first-in first-out.
#[derive(Debug, Clone)]
struct NonceSet {
    capacity: usize,
    seen: HashSet<(Name, u64)>,
    order: VecDeque<(Name, u64)>,
}

impl NonceSet {
    fn new(capacity: usize) -> Self {
        Self {
            capacity,
            seen: HashSet::new(),
            order: VecDeque::new(),
        }
    }

    fn contains(&self, name: &Name, nonce: u64) -> bool {
        self.seen.contains(&(name.clone(), nonce))
    }

    fn insert(&mut self, name: &Name, nonce: u64) {
        if self.capacity == 0 || !self.seen.insert((name.clone(), nonce)) {
            return;
        }
        self.order.push_back((name.clone(), nonce));
        while self.order.len() > self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.seen.remove(&old);
            }
        }
    }
}

/// Forwarding state of one node: Content Store, PIT, FIB and faces.
///
/// The node is a pure state machine. It never schedules anything itself;
/// callers feed packets in and carry the returned [`Emission`]s to their faces.
#[derive(Debug, Clone)]
pub struct NdnNode {
    id: NodeId,
    cs: ContentStore,
    pit: Pit,
    fib: PrefixTable<FibEntry>,
    faces: BTreeMap<FaceId, FaceKind>,
    next_face: u32,
    seen_nonces: NonceSet,
    strategy: Strategy,
}

impl NdnNode {
    pub fn new(id: NodeId, config: &NdnConfig) -> Self {
        let mut faces = BTreeMap::new();
        faces.insert(FaceId::APP, FaceKind::App);
        Self {
            id,
            cs: ContentStore::new(config.cs_capacity),
            pit: Pit::default(),
            fib: PrefixTable::new(),
            faces,
            next_face: 1,
            seen_nonces: NonceSet::new(config.nonce_capacity),
            strategy: config.strategy,
        }
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn set_strategy(&mut self, strategy: Strategy) {
        self.strategy = strategy;
    }

    pub fn cs(&self) -> &ContentStore {
        &self.cs
    }

    pub fn pit(&self) -> &Pit {
        &self.pit
    }

    pub fn fib(&self) -> &PrefixTable<FibEntry> {
        &self.fib
    }

    pub fn faces(&self) -> &BTreeMap<FaceId, FaceKind> {
        &self.faces
    }

    pub fn face_kind(&self, face: FaceId) -> Option<FaceKind> {
        self.faces.get(&face).copied()
    }

    /// The face linking this node to `peer`, if any.
    pub fn face_to(&self, peer: NodeId) -> Option<FaceId> {
        self.faces
            .iter()
            .find(|(_, k)| **k == FaceKind::Link { peer })
            .map(|(f, _)| *f)
    }

    pub fn add_face(&mut self, kind: FaceKind) -> FaceId {
        let face = FaceId(self.next_face);
        self.next_face += 1;
        self.faces.insert(face, kind);
        face
    }

    fn check_face(&self, face: FaceId) -> Result<(), NdnError> {
        if self.faces.contains_key(&face) {
            Ok(())
        } else {
            Err(NdnError::UnknownFace(face))
        }
    }

    /// Appends `face` to the next hops of `prefix`, creating the entry if needed.
    pub fn fib_register(&mut self, prefix: &Name, face: FaceId) -> Result<(), NdnError> {
        self.check_face(face)?;
        let entry = self.fib.get_or_insert_with(prefix, || FibEntry {
            prefix: prefix.clone(),
            next_hops: Vec::new(),
        });
        if !entry.next_hops.contains(&face) {
            entry.next_hops.push(face);
        }
        Ok(())
    }

    /// Makes `face` the first next hop of `prefix`.
    pub fn fib_prefer(&mut self, prefix: &Name, face: FaceId) -> Result<(), NdnError> {
        self.check_face(face)?;
        let entry = self.fib.get_or_insert_with(prefix, || FibEntry {
            prefix: prefix.clone(),
            next_hops: Vec::new(),
        });
        entry.next_hops.retain(|f| *f != face);
        entry.next_hops.insert(0, face);
        Ok(())
    }

    pub fn cs_lookup(&mut self, name: &Name, now: SimTime) -> Option<Data> {
        self.cs.lookup(name, now)
    }

    pub fn cs_insert(&mut self, data: Data, now: SimTime) {
        self.cs.insert(data, now);
    }

    /// Removes PIT entries whose expiry is before `now`.
    pub fn pit_expire(&mut self, now: SimTime) -> usize {
        self.pit.expire(now)
    }

    /// Processes an Interest arriving on `in_face`.
    ///
    /// Exactly one of: a cached Data back to `in_face`; aggregation into an
    /// existing pending entry (no emission); a loop drop; forwarding per the
    /// strategy with a new pending entry; or a no-route drop.
    pub fn on_interest(
        &mut self,
        interest: Interest,
        in_face: FaceId,
        now: SimTime,
    ) -> Result<Vec<Emission>, NdnError> {
        self.check_face(in_face)?;
        let name = interest.name.clone();

        if self.seen_nonces.contains(&name, interest.nonce)
            || self.pit.get(&name).is_some_and(|e| e.has_nonce(interest.nonce))
        {
            return Ok(vec![Emission::Drop {
                reason: DropReason::Loop,
                name,
            }]);
        }
        self.seen_nonces.insert(&name, interest.nonce);

        if let Some(data) = self.cs.lookup(&name, now) {
            return Ok(vec![Emission::Data { face: in_face, data }]);
        }

        if let Some(entry) = self.pit.get_mut(&name) {
            if entry.is_live(now) {
                entry.add_downstream(in_face, interest.nonce, interest.solicit_count);
                entry.expiry = entry.expiry.max(now.saturating_add(interest.lifetime));
                return Ok(Vec::new());
            }
            self.pit.remove(&name);
        }

        let out_faces = self.select_faces(&interest, in_face);
        if out_faces.is_empty() {
            return Ok(vec![Emission::Drop {
                reason: DropReason::NoRoute,
                name,
            }]);
        }

        let mut entry = PitEntry {
            name: name.clone(),
            downstream: Vec::new(),
            expiry: now.saturating_add(interest.lifetime),
        };
        entry.add_downstream(in_face, interest.nonce, interest.solicit_count);
        self.pit.insert(entry);

        Ok(out_faces
            .into_iter()
            .map(|face| {
                let mut fwd = interest.clone();
                // Handing the Interest to the local application is not an overlay hop.
                if face != FaceId::APP {
                    fwd.hop_limit -= 1;
                }
                Emission::Interest { face, interest: fwd }
            })
            .collect())
    }

    fn select_faces(&self, interest: &Interest, in_face: FaceId) -> Vec<FaceId> {
        let fib_hit = self.fib.longest_prefix_match(&interest.name).map(|(_, e)| e);
        let usable = |face: &FaceId| *face != in_face && (*face == FaceId::APP || interest.hop_limit > 0);
        match self.strategy {
            Strategy::BestRoute => {
                let Some(entry) = fib_hit else {
                    return Vec::new();
                };
                entry
                    .next_hops
                    .iter()
                    .find(|f| **f != in_face)
                    .filter(|f| usable(f))
                    .map(|f| vec![*f])
                    .unwrap_or_default()
            }
            Strategy::Flood => {
                if fib_hit.is_some_and(|e| e.next_hops.contains(&FaceId::APP)) && in_face != FaceId::APP {
                    return vec![FaceId::APP];
                }
                self.faces
                    .iter()
                    .filter(|(f, k)| matches!(k, FaceKind::Link { .. }) && usable(f))
                    .map(|(f, _)| *f)
                    .collect()
            }
        }
    }

    /// Processes a Data packet arriving on `in_face`.
    ///
    /// With a live pending entry, one copy goes to every downstream face still
    /// owed Data, the entry is dropped once nothing is owed, and the Data is
    /// cached. Otherwise the packet is dropped as unsolicited.
    pub fn on_data(&mut self, data: Data, in_face: FaceId, now: SimTime) -> Result<Vec<Emission>, NdnError> {
        self.check_face(in_face)?;
        let live = self.pit.get(&data.name).is_some_and(|e| e.is_live(now));
        if !live {
            if self.pit.get(&data.name).is_some() {
                self.pit.remove(&data.name);
            }
            return Ok(vec![Emission::Drop {
                reason: DropReason::Unsolicited,
                name: data.name,
            }]);
        }

        let entry = self.pit.get_mut(&data.name).expect("live entry");
        let mut out = Vec::new();
        for d in entry.downstream.iter_mut() {
            if d.owed > 0 && d.face != in_face {
                d.owed -= 1;
                out.push(Emission::Data {
                    face: d.face,
                    data: data.clone(),
                });
            }
        }
        if entry.remaining() == 0 {
            self.pit.remove(&data.name);
        }
        self.cs.insert(data, now);
        Ok(out)
    }
}
