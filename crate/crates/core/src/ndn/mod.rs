//! Per-node named-data forwarding: Content Store, Pending Interest Table and
//! Forwarding Information Base, plus the Interest/Data packets they process.
//!
//! Interests may ask for more than one Data message (`solicit_count`); the
//! pending entry then stays alive until every downstream face has been served
//! that many times or the entry expires.

mod cs;
mod node;
mod packet;
mod pit;

pub use cs::ContentStore;
pub use node::{DropReason, Emission, FaceKind, FibEntry, NdnConfig, NdnError, NdnNode, Strategy};
pub use packet::{Data, Interest, Packet, PacketKind};
pub use pit::{Downstream, Pit, PitEntry};

use crate::types::SimTime;

pub const DEFAULT_PIT_LIFETIME: SimTime = 4000;
pub const DEFAULT_CS_CAPACITY: usize = 64;
pub const DEFAULT_NONCE_CAPACITY: usize = 1 << 16;
