use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bfs::bfs_bounded;
use crate::types::{FaceId, NodeId, SimTime};

use super::OsclError;

/// Per-link characteristics used by probes and packet transport.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkMetrics {
    pub delay_ms: SimTime,
    /// Independent per-packet loss probability in [0, 1].
    pub loss: f64,
    /// Units per second.
    pub capacity: f64,
}

impl Default for LinkMetrics {
    fn default() -> Self {
        Self {
            delay_ms: 5,
            loss: 0.0,
            capacity: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// Face on the lower-numbered endpoint, then on the higher one.
    pub faces: (FaceId, FaceId),
    pub metrics: LinkMetrics,
}

/// Undirected simple graph of overlay links between SCL instances.
#[derive(Debug, Clone, Default)]
pub struct OverlayGraph {
    vertices: BTreeSet<NodeId>,
    edges: BTreeMap<(NodeId, NodeId), Edge>,
    adjacency: Vec<Vec<u32>>,
}

fn key(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

impl OverlayGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, v: NodeId) {
        if self.vertices.insert(v) && self.adjacency.len() <= v.index() {
            self.adjacency.resize(v.index() + 1, Vec::new());
        }
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.vertices.contains(&v)
    }

    fn require(&self, v: NodeId) -> Result<(), OsclError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(OsclError::UnknownNode(v))
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = ((NodeId, NodeId), &Edge)> {
        self.edges.iter().map(|(k, e)| (*k, e))
    }

    pub fn edge(&self, u: NodeId, v: NodeId) -> Option<&Edge> {
        self.edges.get(&key(u, v))
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.edges.contains_key(&key(u, v))
    }

    /// Adds `{u, v}`. `face_u` and `face_v` are the faces on `u` and `v`.
    /// Returns false, leaving the graph unchanged, if the edge exists.
    pub fn add_edge(
        &mut self,
        u: NodeId,
        v: NodeId,
        face_u: FaceId,
        face_v: FaceId,
        metrics: LinkMetrics,
    ) -> Result<bool, OsclError> {
        self.require(u)?;
        self.require(v)?;
        if u == v {
            return Err(OsclError::SelfLoop(u));
        }
        if self.has_edge(u, v) {
            return Ok(false);
        }
        let faces = if u < v { (face_u, face_v) } else { (face_v, face_u) };
        self.edges.insert(key(u, v), Edge { faces, metrics });
        self.adjacency[u.index()].push(v.0);
        self.adjacency[v.index()].push(u.0);
        Ok(true)
    }

    pub fn remove_edge(&mut self, u: NodeId, v: NodeId) -> Option<Edge> {
        let edge = self.edges.remove(&key(u, v))?;
        self.adjacency[u.index()].retain(|w| *w != v.0);
        self.adjacency[v.index()].retain(|w| *w != u.0);
        Some(edge)
    }

    pub fn neighbours(&self, v: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.adjacency.get(v.index()).into_iter().flatten().map(|w| NodeId(*w))
    }

    pub fn adjacency(&self) -> &[Vec<u32>] {
        &self.adjacency
    }

    /// Shortest hop count from `u` to `v` if it is at most `bound`.
    pub fn path_length(&self, u: NodeId, v: NodeId, bound: u32) -> Result<Option<u32>, OsclError> {
        self.require(u)?;
        self.require(v)?;
        Ok(bfs_bounded(&self.adjacency, u.0, v.0, bound))
    }

    /// True iff consecutive entries of `path` are all linked.
    pub fn is_walk(&self, path: &[NodeId]) -> bool {
        !path.is_empty() && path.iter().all(|v| self.contains(*v)) && path.windows(2).all(|w| self.has_edge(w[0], w[1]))
    }
}
