//! Depth-bounded shortest-path search on unweighted undirected graphs.

use serde::{Deserialize, Serialize};

/// How a path length is compared against the hop budget D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathRule {
    /// A path of length <= D is acceptable.
    #[default]
    AtMostD,
    /// Only paths of length < D are acceptable.
    StrictlyLessD,
}

impl PathRule {
    /// Largest acceptable path length for budget `d`.
    pub fn search_bound(self, d: u32) -> u32 {
        match self {
            PathRule::AtMostD => d,
            PathRule::StrictlyLessD => d.saturating_sub(1),
        }
    }

    pub fn accepts(self, length: u32, d: u32) -> bool {
        length <= self.search_bound(d)
    }
}

/// Shortest distance from `src` to `dst` if it is at most `bound`.
///
/// `adjacency[v]` lists the neighbours of vertex `v`. Allocates scratch space
/// per call; use [`BoundedBfs`] for repeated queries on one graph.
pub fn bfs_bounded(adjacency: &[Vec<u32>], src: u32, dst: u32, bound: u32) -> Option<u32> {
    BoundedBfs::new(adjacency.len()).distance(adjacency, src, dst, bound)
}

/// Reusable scratch space for bidirectional bounded BFS.
///
/// Each query grows two frontiers, always expanding the smaller one, and
/// stops once their levels sum to the bound. Visit marks are generation
/// stamps so nothing is cleared between queries.
#[derive(Debug, Clone, Default)]
pub struct BoundedBfs {
    mark_src: Vec<u32>,
    mark_dst: Vec<u32>,
    generation: u32,
    frontier_src: Vec<u32>,
    frontier_dst: Vec<u32>,
    next: Vec<u32>,
}

impl BoundedBfs {
    pub fn new(vertices: usize) -> Self {
        Self {
            mark_src: vec![0; vertices],
            mark_dst: vec![0; vertices],
            ..Self::default()
        }
    }

    fn begin(&mut self, vertices: usize) {
        if self.mark_src.len() < vertices {
            self.mark_src.resize(vertices, 0);
            self.mark_dst.resize(vertices, 0);
        }
        if self.generation == u32::MAX {
            self.mark_src.fill(0);
            self.mark_dst.fill(0);
            self.generation = 0;
        }
        self.generation += 1;
        self.frontier_src.clear();
        self.frontier_dst.clear();
    }

    pub fn distance(&mut self, adjacency: &[Vec<u32>], src: u32, dst: u32, bound: u32) -> Option<u32> {
        if src == dst {
            return Some(0);
        }
        if bound == 0 {
            return None;
        }
        self.begin(adjacency.len());
        let g = self.generation;
        self.mark_src[src as usize] = g;
        self.mark_dst[dst as usize] = g;
        self.frontier_src.push(src);
        self.frontier_dst.push(dst);
        let (mut depth_src, mut depth_dst) = (0u32, 0u32);

        // Invariant: no path of length <= depth_src + depth_dst exists.
        while depth_src + depth_dst < bound {
            let expand_src = self.frontier_src.len() <= self.frontier_dst.len();
            let (frontier, mine, other) = if expand_src {
                (&mut self.frontier_src, &mut self.mark_src, &self.mark_dst)
            } else {
                (&mut self.frontier_dst, &mut self.mark_dst, &self.mark_src)
            };
            self.next.clear();
            for &u in frontier.iter() {
                for &w in &adjacency[u as usize] {
                    if other[w as usize] == g {
                        return Some(depth_src + depth_dst + 1);
                    }
                    if mine[w as usize] != g {
                        mine[w as usize] = g;
                        self.next.push(w);
                    }
                }
            }
            if self.next.is_empty() {
                return None;
            }
            std::mem::swap(frontier, &mut self.next);
            if expand_src {
                depth_src += 1;
            } else {
                depth_dst += 1;
            }
        }
        None
    }
}
