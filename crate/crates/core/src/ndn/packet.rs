use serde::{Deserialize, Serialize};

use crate::name::Name;
use crate::types::{NodeId, SimTime};

/// A request for named content.
///
/// `hop_limit` is the remaining number of overlay hops the Interest may
/// travel; `solicit_count` is how many Data messages the requester wants
/// back on the same pending entry (1 for a plain fetch).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interest {
    pub name: Name,
    pub nonce: u64,
    pub hop_limit: u32,
    pub solicit_count: u32,
    pub lifetime: SimTime,
}

impl Interest {
    pub fn new(name: Name, nonce: u64) -> Self {
        Self {
            name,
            nonce,
            hop_limit: u32::MAX,
            solicit_count: 1,
            lifetime: super::DEFAULT_PIT_LIFETIME,
        }
    }

    pub fn with_hop_limit(mut self, hop_limit: u32) -> Self {
        self.hop_limit = hop_limit;
        self
    }

    /// Panics if `count` is zero.
    pub fn with_solicit_count(mut self, count: u32) -> Self {
        assert!(count >= 1, "solicit_count must be at least 1");
        self.solicit_count = count;
        self
    }

    pub fn with_lifetime(mut self, lifetime: SimTime) -> Self {
        self.lifetime = lifetime;
        self
    }
}

/// Named content. `producer` stands in for a content signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Data {
    pub name: Name,
    pub payload: Vec<u8>,
    /// How long a cached copy stays usable. Zero means "do not cache".
    pub freshness: SimTime,
    pub producer: NodeId,
}

impl Data {
    pub fn new(name: Name, payload: impl Into<Vec<u8>>, freshness: SimTime, producer: NodeId) -> Self {
        Self {
            name,
            payload: payload.into(),
            freshness,
            producer,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Packet {
    Interest(Interest),
    Data(Data),
}

impl Packet {
    pub fn name(&self) -> &Name {
        match self {
            Packet::Interest(i) => &i.name,
            Packet::Data(d) => &d.name,
        }
    }

    pub fn kind(&self) -> PacketKind {
        match self {
            Packet::Interest(_) => PacketKind::Interest,
            Packet::Data(_) => PacketKind::Data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PacketKind {
    Interest,
    Data,
}

impl PacketKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PacketKind::Interest => "interest",
            PacketKind::Data => "data",
        }
    }
}
