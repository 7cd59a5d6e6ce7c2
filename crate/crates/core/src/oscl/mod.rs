//! The overlay service layer: SCL instances meshed over named-data links.
//!
//! Discovery first tries an Interest over the overlay and falls back to the
//! NSCL. The discovered path is then measured and, if unsuitable, replaced by
//! a direct link. Subscriptions are long-lived Interests that solicit several
//! Data messages, so notifications never pass through the NSCL.

mod graph;
mod overlay;
mod qos;

use thiserror::Error;

use crate::name::{Name, NameError};
use crate::ndn::NdnError;
use crate::scl::SclError;
use crate::types::NodeId;

pub use graph::{Edge, LinkMetrics, OverlayGraph};
pub use overlay::{LinkDecision, Oscl, OsclConfig, SUBSCRIPTIONS};
pub use qos::{qos_monitor, QosMetrics, QosPolicy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OsclError {
    #[error("node {0} is not in the overlay")]
    UnknownNode(NodeId),
    #[error("link from {0} to itself")]
    SelfLoop(NodeId),
    #[error("no link between {from} and {to}")]
    BrokenPath { from: NodeId, to: NodeId },
    #[error("empty path")]
    EmptyPath,
    #[error("no probe samples")]
    NoSamples,
    #[error("discovery scope must be at least 1 hop")]
    InvalidScope,
    #[error("solicited Data count must be at least 1")]
    InvalidSolicitCount,
    #[error("no overlay route towards {0}")]
    NoPath(Name),
    #[error("{0} was found neither on the overlay nor through the NSCL")]
    NotFound(Name),
    #[error("the system has no NSCL")]
    NoNscl,
    #[error(transparent)]
    Name(#[from] NameError),
    #[error(transparent)]
    Scl(#[from] SclError),
    #[error(transparent)]
    Ndn(#[from] NdnError),
}
