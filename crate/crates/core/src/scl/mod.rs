//! ETSI-M2M service capability layer entities and the NSCL-centred baseline.
//!
//! Every network, gateway and device is an [`SclInstance`] owning a
//! [`ResourceTree`] under its base name. In the baseline all discovery,
//! subscription and notification traffic between two non-NSCL instances is
//! relayed by the single NSCL.

mod resource;
mod system;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::name::{Name, NameError, PrefixTable};
use crate::ndn::NdnNode;
use crate::types::{NodeId, SimTime};

pub use resource::{
    Application, Container, ContentInstance, Resource, ResourceTree, APPLICATIONS, CONTAINERS, CONTENT_INSTANCES,
    LATEST, OLDEST,
};
pub use system::M2mSystem;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SclError {
    #[error("unknown SCL {0}")]
    UnknownScl(NodeId),
    #[error("{0} is already registered")]
    AlreadyRegistered(Name),
    #[error("{0} is not the NSCL")]
    NotAnNscl(Name),
    #[error("the NSCL does not register with itself")]
    NsclCannotRegister,
    #[error("{0} is not registered with the NSCL")]
    NotRegistered(Name),
    #[error("base name {0} is already in use")]
    DuplicateBaseName(Name),
    #[error("the system already has an NSCL")]
    DuplicateNscl,
    #[error("resource {0} already exists")]
    DuplicateName(Name),
    #[error("parent of {0} does not exist")]
    MissingParent(Name),
    #[error("resource {0} not found")]
    NotFound(Name),
    #[error("container of {0} is empty")]
    EmptyContainer(Name),
    #[error("invalid port {0}")]
    InvalidPort(u32),
    #[error(transparent)]
    Name(#[from] NameError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SclKind {
    Nscl,
    Gscl,
    Dscl,
}

impl SclKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SclKind::Nscl => "NSCL",
            SclKind::Gscl => "GSCL",
            SclKind::Dscl => "DSCL",
        }
    }
}

impl fmt::Display for SclKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SclKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nscl" => Ok(SclKind::Nscl),
            "gscl" => Ok(SclKind::Gscl),
            "dscl" => Ok(SclKind::Dscl),
            other => Err(format!("unknown SCL kind {other:?}")),
        }
    }
}

/// Simulated transport address of an SCL, used only to set up overlay links.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Locator {
    pub node: NodeId,
    pub host: String,
    pub port: u16,
}

impl Locator {
    pub fn new(node: NodeId, host: impl Into<String>, port: u32) -> Result<Self, SclError> {
        match u16::try_from(port) {
            Ok(p) if p >= 1 => Ok(Self {
                node,
                host: host.into(),
                port: p,
            }),
            _ => Err(SclError::InvalidPort(port)),
        }
    }

    /// `host:port`, as carried in discovery answers.
    pub fn to_wire(&self) -> Vec<u8> {
        format!("{}:{}", self.host, self.port).into_bytes()
    }

    pub fn from_wire(node: NodeId, bytes: &[u8]) -> Option<Self> {
        let text = std::str::from_utf8(bytes).ok()?;
        let (host, port) = text.rsplit_once(':')?;
        Self::new(node, host, port.parse().ok()?).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubscriptionMode {
    /// Subscription and notifications relayed by the NSCL.
    Centralized,
    /// Long-lived Interest over the overlay along `delivery_path`
    /// (subscriber first).
    P2p { delivery_path: Vec<NodeId> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subscription {
    pub subscriber: Locator,
    pub target: Name,
    pub mode: SubscriptionMode,
    pub active: bool,
}

impl Subscription {
    pub fn delivery_path(&self) -> Option<&[NodeId]> {
        match &self.mode {
            SubscriptionMode::Centralized => None,
            SubscriptionMode::P2p { delivery_path } => Some(delivery_path),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscoveryMethod {
    Distributed,
    Centralized,
}

/// Outcome of a successful discovery: the resource URI, its owner's locator
/// and, for overlay discovery only, the path that was opened.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscoveryResult {
    uri: Name,
    locator: Locator,
    path: Option<Vec<NodeId>>,
}

impl DiscoveryResult {
    /// `path` runs from the origin to the owner.
    pub fn distributed(uri: Name, locator: Locator, path: Vec<NodeId>) -> Self {
        assert!(!path.is_empty(), "a distributed discovery path has at least one node");
        Self {
            uri,
            locator,
            path: Some(path),
        }
    }

    pub fn centralized(uri: Name, locator: Locator) -> Self {
        Self {
            uri,
            locator,
            path: None,
        }
    }

    pub fn uri(&self) -> &Name {
        &self.uri
    }

    pub fn locator(&self) -> &Locator {
        &self.locator
    }

    pub fn path(&self) -> Option<&[NodeId]> {
        self.path.as_deref()
    }

    /// Hop count of the discovered path, if any.
    pub fn path_len(&self) -> Option<usize> {
        self.path.as_ref().map(|p| p.len() - 1)
    }

    pub fn method(&self) -> DiscoveryMethod {
        match self.path {
            Some(_) => DiscoveryMethod::Distributed,
            None => DiscoveryMethod::Centralized,
        }
    }
}

/// Something handed to an SCL's local application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivery {
    pub time: SimTime,
    pub name: Name,
    pub payload: Vec<u8>,
    pub producer: NodeId,
}

#[derive(Debug, Clone)]
pub struct SclInstance {
    pub id: NodeId,
    pub kind: SclKind,
    pub base_name: Name,
    pub tree: ResourceTree,
    pub locator: Locator,
    pub ndn: NdnNode,
    registered: bool,
    /// base name -> locator; only populated on the NSCL.
    registry: PrefixTable<Locator>,
    /// Centralized subscriptions targeting this SCL's resources.
    subscriptions: Vec<Subscription>,
    /// Overlay subscription names this SCL currently produces for.
    pub(crate) watches: BTreeSet<Name>,
    pub inbox: Vec<Delivery>,
}

impl SclInstance {
    pub fn is_registered(&self) -> bool {
        self.registered
    }

    pub fn registry(&self) -> &PrefixTable<Locator> {
        &self.registry
    }

    pub fn subscriptions(&self) -> &[Subscription] {
        &self.subscriptions
    }

    /// True iff `name` is this SCL's base name or lies under it.
    pub fn owns(&self, name: &Name) -> bool {
        self.base_name.is_prefix_of(name)
    }
}
