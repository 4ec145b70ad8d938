//! Undirected simple graphs stored in compressed sparse row form.

use alloc::vec::Vec;
use core::fmt;

mod analysis;
mod generators;

pub use analysis::{count_hubs, degree_histogram, giant_component};
pub use generators::{generate, generate_ba, generate_er};

/// Errors raised while building or generating graphs.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    /// An edge endpoint is not a valid node index.
    #[error("edge ({u}, {v}) references a node outside 0..{node_count}")]
    NodeOutOfRange {
        /// First endpoint.
        u: usize,
        /// Second endpoint.
        v: usize,
        /// Number of nodes in the graph.
        node_count: usize,
    },
    /// An edge joins a node to itself.
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    /// The same undirected edge was given twice.
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    /// The generator parameters are out of range.
    #[error("invalid graph spec: {0}")]
    InvalidSpec(&'static str),
}

/// Random graph model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Model {
    /// Erdős–Rényi `G(n, p)`.
    Er,
    /// Barabási–Albert preferential attachment.
    Ba,
}

impl Model {
    /// Lowercase name used in file names and on the command line.
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Er => "er",
            Model::Ba => "ba",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters of a random graph instance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GraphSpec {
    /// Which generator to use.
    pub model: Model,
    /// Number of nodes.
    pub node_count: usize,
    /// Target average degree `⟨k⟩`.
    pub avg_degree: f64,
    /// Seed of the generator's RNG.
    pub rng_seed: u64,
}

impl GraphSpec {
    /// Number of edges each new BA node attaches: `round(⟨k⟩ / 2)`.
    pub fn attachment_count(&self) -> usize {
        libm::round(self.avg_degree / 2.0) as usize
    }

    /// Edge probability of the ER model, `⟨k⟩ / (n − 1)`.
    pub fn edge_probability(&self) -> f64 {
        self.avg_degree / (self.node_count as f64 - 1.0)
    }

    /// Checks the parameter ranges of the selected model.
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.node_count == 0 {
            return Err(GraphError::InvalidSpec("node_count must be positive"));
        }
        if !(self.avg_degree.is_finite() && self.avg_degree > 0.0) {
            return Err(GraphError::InvalidSpec("avg_degree must be a positive number"));
        }
        match self.model {
            Model::Er => {
                if self.node_count < 2 || self.avg_degree > self.node_count as f64 - 1.0 {
                    return Err(GraphError::InvalidSpec(
                        "ER avg_degree must not exceed node_count - 1",
                    ));
                }
            }
            Model::Ba => {
                let m = self.attachment_count();
                if m < 1 {
                    return Err(GraphError::InvalidSpec("BA needs round(avg_degree / 2) >= 1"));
                }
                if self.node_count <= m + 1 {
                    return Err(GraphError::InvalidSpec(
                        "BA node_count must exceed round(avg_degree / 2) + 1",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// An undirected simple graph on nodes `0..node_count`.
///
/// Neighbor lists are sorted and stored back to back; `offsets[i]..offsets[i + 1]`
/// indexes the neighbors of node `i`.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("node_count", &self.node_count())
            .field("edge_count", &self.edge_count())
            .finish()
    }
}

impl Graph {
    /// Builds a graph from an undirected edge list.
    ///
    /// Each edge may be given in either orientation but only once.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let edges: Vec<(usize, usize)> = edges.into_iter().collect();
        let mut degree = alloc::vec![0usize; node_count];
        for &(u, v) in &edges {
            if u >= node_count || v >= node_count {
                return Err(GraphError::NodeOutOfRange { u, v, node_count });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..node_count].to_vec();
        let mut targets = alloc::vec![0usize; 2 * edges.len()];
        for &(u, v) in &edges {
            targets[cursor[u]] = v;
            cursor[u] += 1;
            targets[cursor[v]] = u;
            cursor[v] += 1;
        }
        for i in 0..node_count {
            let row = &mut targets[offsets[i]..offsets[i + 1]];
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                let (a, b) = if i < w[0] { (i, w[0]) } else { (w[0], i) };
                return Err(GraphError::DuplicateEdge(a, b));
            }
        }
        Ok(Graph { offsets, targets })
    }

    /// Graph with `node_count` nodes and no edges.
    pub fn empty(node_count: usize) -> Self {
        Graph {
            offsets: alloc::vec![0; node_count + 1],
            targets: Vec::new(),
        }
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Sorted neighbors of `node`.
    #[inline]
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.targets[self.offsets[node]..self.offsets[node + 1]]
    }

    /// Degree of `node`.
    #[inline]
    pub fn degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    /// Degrees of all nodes.
    pub fn degrees(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Sum of all degrees (twice the edge count).
    pub fn degree_sum(&self) -> usize {
        self.targets.len()
    }

    /// Mean degree `2E / N`.
    pub fn average_degree(&self) -> f64 {
        if self.node_count() == 0 {
            return 0.0;
        }
        self.degree_sum() as f64 / self.node_count() as f64
    }

    /// Whether `u` and `v` are adjacent.
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` pairs with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// Whether every node is reachable from node 0.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = alloc::vec![false; n];
        let mut stack = alloc::vec![0usize];
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            for &v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    stack.push(v);
                }
            }
        }
        reached == n
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn csr_roundtrip_of_edges() {
        let g = Graph::from_edges(4, [(2, 0), (1, 3), (0, 1)]).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 3)]);
        assert_eq!(g.degrees(), vec![2, 2, 1, 1]);
        assert_eq!(g.neighbors(0), &[1, 2]);
        assert!(g.has_edge(3, 1));
        assert!(!g.has_edge(2, 3));
    }

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(Graph::from_edges(3, [(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert_eq!(
            Graph::from_edges(3, [(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert!(matches!(
            Graph::from_edges(3, [(0, 3)]),
            Err(GraphError::NodeOutOfRange { .. })
        ));
    }

    #[test]
    fn spec_validation() {
        let er = |n, k| GraphSpec { model: Model::Er, node_count: n, avg_degree: k, rng_seed: 0 };
        let ba = |n, k| GraphSpec { model: Model::Ba, node_count: n, avg_degree: k, rng_seed: 0 };
        assert!(er(2, 1.0).validate().is_ok());
        assert!(er(10, 9.5).validate().is_err());
        assert!(er(10, 0.0).validate().is_err());
        assert!(er(1, 0.5).validate().is_err());
        assert!(ba(4, 6.0).validate().is_err());
        assert!(ba(5, 6.0).validate().is_ok());
        assert!(ba(100, 0.8).validate().is_err());
        assert_eq!(ba(100, 6.0).attachment_count(), 3);
        assert!((er(1000, 6.0).edge_probability() - 6.0 / 999.0).abs() < 1e-18);
    }

    #[test]
    fn connectivity() {
        assert!(fixtures::star4().is_connected());
        assert!(!Graph::from_edges(3, [(0, 1)]).unwrap().is_connected());
        assert!(Graph::empty(1).is_connected());
    }
}
