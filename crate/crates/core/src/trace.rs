//! Message log and per-node counters shared by the centralized baseline and
//! the overlay.
//!
//! A message is counted once as `originated` where it is created and ends with
//! exactly one of `received` or `dropped`. Nodes that forward it on the way
//! count it as `relayed`. When a node fans one message out into several
//! copies, every extra copy is a new message originated at that node.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::name::Name;
use crate::ndn::PacketKind;
use crate::types::{FaceId, NodeId, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MsgType {
    Register,
    DiscoverQuery,
    DiscoverResponse,
    Subscribe,
    Notify,
    Interest,
    Data,
    /// QoS probe batch; logged, never counted.
    Probe,
    /// Overlay link establishment; logged, never counted.
    LinkUp,
}

impl MsgType {
    pub const COUNTED: [MsgType; 7] = [
        MsgType::Register,
        MsgType::DiscoverQuery,
        MsgType::DiscoverResponse,
        MsgType::Subscribe,
        MsgType::Notify,
        MsgType::Interest,
        MsgType::Data,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MsgType::Register => "register",
            MsgType::DiscoverQuery => "discover_query",
            MsgType::DiscoverResponse => "discover_response",
            MsgType::Subscribe => "subscribe",
            MsgType::Notify => "notify",
            MsgType::Interest => "interest",
            MsgType::Data => "data",
            MsgType::Probe => "probe",
            MsgType::LinkUp => "link_up",
        }
    }

    pub fn is_counted(self) -> bool {
        !matches!(self, MsgType::Probe | MsgType::LinkUp)
    }
}

impl From<PacketKind> for MsgType {
    fn from(kind: PacketKind) -> Self {
        match kind {
            PacketKind::Interest => MsgType::Interest,
            PacketKind::Data => MsgType::Data,
        }
    }
}

impl fmt::Display for MsgType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Originated,
    Relayed,
    Received,
    Dropped,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleCounts {
    pub originated: u64,
    pub relayed: u64,
    pub received: u64,
    pub dropped: u64,
}

impl RoleCounts {
    pub fn get(&self, role: Role) -> u64 {
        match role {
            Role::Originated => self.originated,
            Role::Relayed => self.relayed,
            Role::Received => self.received,
            Role::Dropped => self.dropped,
        }
    }

    fn bump(&mut self, role: Role) {
        match role {
            Role::Originated => self.originated += 1,
            Role::Relayed => self.relayed += 1,
            Role::Received => self.received += 1,
            Role::Dropped => self.dropped += 1,
        }
    }
}

/// Per-node, per-type message counters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MessageCounters {
    counts: BTreeMap<(NodeId, MsgType), RoleCounts>,
}

impl MessageCounters {
    pub fn bump(&mut self, node: NodeId, msg_type: MsgType, role: Role) {
        if msg_type.is_counted() {
            self.counts.entry((node, msg_type)).or_default().bump(role);
        }
    }

    pub fn get(&self, node: NodeId, msg_type: MsgType) -> RoleCounts {
        self.counts.get(&(node, msg_type)).copied().unwrap_or_default()
    }

    pub fn count(&self, node: NodeId, msg_type: MsgType, role: Role) -> u64 {
        self.get(node, msg_type).get(role)
    }

    /// Sum over every node and message type.
    pub fn total(&self, role: Role) -> u64 {
        self.counts.values().map(|c| c.get(role)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, MsgType, RoleCounts)> + '_ {
        self.counts.iter().map(|((n, t), c)| (*n, *t, *c))
    }
}

/// One message-log row. NDN packets are logged once per overlay hop;
/// centralized messages once end to end, with the NSCL as `relayer`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub time: SimTime,
    pub src: NodeId,
    pub dst: NodeId,
    pub relayer: Option<NodeId>,
    pub msg_type: MsgType,
    pub name: Name,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    In,
    Out,
    Drop,
    Lost,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::In => "in",
            Direction::Out => "out",
            Direction::Drop => "drop",
            Direction::Lost => "lost",
        }
    }
}

/// Forwarding-engine activity at one node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmissionRecord {
    pub time: SimTime,
    pub node: NodeId,
    pub direction: Direction,
    pub kind: PacketKind,
    pub name: Name,
    pub nonce: Option<u64>,
    pub face: FaceId,
}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub log: Vec<MessageRecord>,
    pub counters: MessageCounters,
    pub emissions: Vec<EmissionRecord>,
}

impl Trace {
    /// Logs and counts an end-to-end message, optionally relayed.
    pub fn message(
        &mut self,
        time: SimTime,
        src: NodeId,
        dst: NodeId,
        relayer: Option<NodeId>,
        msg_type: MsgType,
        name: &Name,
    ) {
        self.log.push(MessageRecord {
            time,
            src,
            dst,
            relayer,
            msg_type,
            name: name.clone(),
        });
        self.counters.bump(src, msg_type, Role::Originated);
        if let Some(r) = relayer {
            self.counters.bump(r, msg_type, Role::Relayed);
        }
        self.counters.bump(dst, msg_type, Role::Received);
    }

    /// Logs an uncounted event row such as a probe batch or a new link.
    pub fn event(&mut self, time: SimTime, src: NodeId, dst: NodeId, msg_type: MsgType, name: &Name) {
        self.log.push(MessageRecord {
            time,
            src,
            dst,
            relayer: None,
            msg_type,
            name: name.clone(),
        });
    }

    /// Log rows of one type, in order.
    pub fn rows(&self, msg_type: MsgType) -> impl Iterator<Item = &MessageRecord> {
        self.log.iter().filter(move |r| r.msg_type == msg_type)
    }

    /// True iff every counted message has exactly one end.
    pub fn is_conserved(&self) -> bool {
        self.counters.total(Role::Originated)
            == self.counters.total(Role::Received) + self.counters.total(Role::Dropped)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relayed_message_counts_three_roles() {
        let mut t = Trace::default();
        let name = Name::parse("Gscl1").unwrap();
        t.message(0, NodeId(1), NodeId(2), Some(NodeId(0)), MsgType::Notify, &name);
        assert_eq!(t.counters.count(NodeId(1), MsgType::Notify, Role::Originated), 1);
        assert_eq!(t.counters.count(NodeId(0), MsgType::Notify, Role::Relayed), 1);
        assert_eq!(t.counters.count(NodeId(2), MsgType::Notify, Role::Received), 1);
        assert!(t.is_conserved());
    }

    #[test]
    fn events_are_logged_but_not_counted() {
        let mut t = Trace::default();
        let name = Name::parse("x").unwrap();
        t.event(3, NodeId(1), NodeId(2), MsgType::LinkUp, &name);
        assert_eq!(t.log.len(), 1);
        assert_eq!(t.counters.iter().count(), 0);
    }
}
