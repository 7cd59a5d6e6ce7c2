//! Information-centric overlay service layer for ETSI-M2M style systems.
//!
//! * [`name`]: hierarchical names and longest-prefix tables.
//! * [`ndn`]: the per-node Interest/Data forwarding engine.
//! * [`scl`]: SCL instances, resource trees and the NSCL-centred baseline.
//! * [`oscl`]: the overlay: distributed discovery with centralized fallback,
//!   QoS monitoring, link establishment and P2P subscriptions.
//! * [`topo`]: the overlay degree experiment under a D-hop link rule.

pub mod bfs;
pub mod name;
pub mod ndn;
pub mod oscl;
pub mod scl;
pub mod topo;
pub mod trace;
mod types;

pub use name::{Name, NameComponent, NameError, PrefixTable};
pub use types::{FaceId, NodeId, SimTime};
