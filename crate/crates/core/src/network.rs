//! Static undirected networks, shortest-path stages and association weights.
//!
//! Node ids are 1-based at the API boundary ([`Network::new`], edge-list
//! files) and 0-based everywhere else.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::DMatrix;

use crate::error::{GnarError, Result};
use crate::partition::CommunityPartition;

/// Undirected simple graph on `d` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: usize,
    /// 0-based, each pair stored once with `a < b`, in input order.
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Network {
    /// Builds a network from 1-based edge pairs.
    ///
    /// Self-loops, duplicate edges (in either orientation) and out-of-range
    /// ids are rejected.
    pub fn new(nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if nodes == 0 {
            return Err(GnarError::EmptyNetwork);
        }
        let mut seen = BTreeSet::new();
        let mut stored = Vec::with_capacity(edges.len());
        let mut adjacency = vec![Vec::new(); nodes];
        for &(from, to) in edges {
            if from == 0 || to == 0 || from > nodes || to > nodes {
                return Err(GnarError::NodeOutOfRange { from, to, nodes });
            }
            if from == to {
                return Err(GnarError::SelfLoop(from));
            }
            let (a, b) = (from.min(to) - 1, from.max(to) - 1);
            if !seen.insert((a, b)) {
                return Err(GnarError::DuplicateEdge(from, to));
            }
            stored.push((a, b));
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            nodes,
            edges: stored,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    /// Edges as 0-based pairs with the smaller id first.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbours(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    /// Edge adjacency matrix (the first-stage matrix).
    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nodes, self.nodes);
        for &(a, b) in &self.edges {
            m[(a, b)] = 1.0;
            m[(b, a)] = 1.0;
        }
        m
    }

    /// Unweighted all-pairs shortest paths, one BFS per source node.
    pub fn distances(&self) -> DistanceMatrix {
        let n = self.nodes;
        let mut data = vec![None; n * n];
        let mut queue = VecDeque::new();
        for source in 0..n {
            let row = &mut data[source * n..(source + 1) * n];
            row[source] = Some(0);
            queue.clear();
            queue.push_back(source);
            while let Some(u) = queue.pop_front() {
                let du = row[u].expect("queued nodes have a distance");
                for &v in &self.adjacency[u] {
                    if row[v].is_none() {
                        row[v] = Some(du + 1);
                        queue.push_back(v);
                    }
                }
            }
        }
        DistanceMatrix { n, data }
    }
}

/// Shortest-path distances; `None` marks unreachable pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<Option<usize>>,
}

impl DistanceMatrix {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Option<usize> {
        self.data[i * self.n + j]
    }

    /// Largest finite off-diagonal distance, `None` when every node is isolated.
    pub fn r_max(&self) -> Option<usize> {
        self.data.iter().filter_map(|d| *d).filter(|&d| d > 0).max()
    }

    /// Number of `r`-stage neighbours of `i`.
    pub fn stage_size(&self, i: usize, r: usize) -> usize {
        (0..self.n).filter(|&j| self.get(i, j) == Some(r)).count()
    }
}

/// The binary matrices `S_1 .. S_rmax`, where `[S_r]_ij = 1` iff `d(i, j) = r`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageAdjacency {
    stages: Vec<DMatrix<f64>>,
}

impl StageAdjacency {
    pub fn from_distances(dist: &DistanceMatrix) -> Self {
        let n = dist.node_count();
        let r_max = dist.r_max().unwrap_or(0);
        let mut stages = vec![DMatrix::zeros(n, n); r_max];
        for i in 0..n {
            for j in 0..n {
                if let Some(r) = dist.get(i, j) {
                    if r > 0 {
                        stages[r - 1][(i, j)] = 1.0;
                    }
                }
            }
        }
        Self { stages }
    }

    pub fn r_max(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// `S_r` for `1 <= r <= r_max`.
    pub fn stage(&self, r: usize) -> Option<&DMatrix<f64>> {
        r.checked_sub(1).and_then(|idx| self.stages.get(idx))
    }

    pub fn iter(&self) -> impl Iterator<Item = &DMatrix<f64>> {
        self.stages.iter()
    }
}

/// Association weights `w_ij` in `[0, 1]` with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix(DMatrix<f64>);

impl WeightMatrix {
    /// Equal weight for every `r`-stage neighbour: `w_ij = 1 / |N_r(i)|` with `r = d(i, j)`.
    pub fn default_for(dist: &DistanceMatrix) -> Self {
        let n = dist.node_count();
        let r_max = dist.r_max().unwrap_or(0);
        let mut counts = vec![0usize; n * (r_max + 1)];
        for i in 0..n {
            for j in 0..n {
                if let Some(r) = dist.get(i, j) {
                    counts[i * (r_max + 1) + r] += 1;
                }
            }
        }
        let w = DMatrix::from_fn(n, n, |i, j| match dist.get(i, j) {
            Some(r) if r > 0 => 1.0 / counts[i * (r_max + 1) + r] as f64,
            _ => 0.0,
        });
        Self(w)
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(GnarError::InvalidWeights(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        for i in 0..m.nrows() {
            if m[(i, i)] != 0.0 {
                return Err(GnarError::InvalidWeights(format!(
                    "diagonal entry {} is nonzero",
                    i + 1
                )));
            }
        }
        if let Some(bad) = m.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(GnarError::InvalidWeights(format!(
                "weight {bad} outside [0, 1]"
            )));
        }
        Ok(Self(m))
    }

    /// Replaces individual entries, given as 1-based `(from, to, w)` triples.
    pub fn with_overrides(&self, overrides: &[(usize, usize, f64)]) -> Result<Self> {
        let n = self.0.nrows();
        let mut m = self.0.clone();
        for &(from, to, w) in overrides {
            if from == 0 || to == 0 || from > n || to > n {
                return Err(GnarError::NodeOutOfRange { from, to, nodes: n });
            }
            m[(from - 1, to - 1)] = w;
        }
        Self::from_matrix(m)
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn node_count(&self) -> usize {
        self.0.nrows()
    }

    /// `W_c`: entries outside `K_c x K_c` zeroed, the rest left as they are.
    pub fn mask(&self, part: &CommunityPartition, community: usize) -> Result<Self> {
        if community >= part.count() {
            return Err(GnarError::UnknownCommunity(community + 1));
        }
        if part.node_count() != self.node_count() {
            return Err(GnarError::DimensionMismatch(format!(
                "partition covers {} nodes, weights cover {}",
                part.node_count(),
                self.node_count()
            )));
        }
        let m = DMatrix::from_fn(self.0.nrows(), self.0.ncols(), |i, j| {
            if part.community_of(i) == community && part.community_of(j) == community {
                self.0[(i, j)]
            } else {
                0.0
            }
        });
        Ok(Self(m))
    }
}

/// A network together with its distances, stage matrices and weights, and
/// the cached products `W ⊙ S_r`.
#[derive(Debug, Clone)]
pub struct Topology {
    network: Network,
    distances: DistanceMatrix,
    stages: StageAdjacency,
    weights: WeightMatrix,
    weighted_stages: Vec<DMatrix<f64>>,
}

impl Topology {
    /// Uses equal neighbour weights.
    pub fn new(network: Network) -> Self {
        let distances = network.distances();
        let weights = WeightMatrix::default_for(&distances);
        Self::assemble(network, distances, weights)
    }

    pub fn with_weights(network: Network, weights: WeightMatrix) -> Result<Self> {
        if weights.node_count() != network.node_count() {
            return Err(GnarError::DimensionMismatch(format!(
                "weights cover {} nodes, network has {}",
                weights.node_count(),
                network.node_count()
            )));
        }
        let distances = network.distances();
        Ok(Self::assemble(network, distances, weights))
    }

    fn assemble(network: Network, distances: DistanceMatrix, weights: WeightMatrix) -> Self {
        let stages = StageAdjacency::from_distances(&distances);
        let weighted_stages = stages
            .iter()
            .map(|s| weights.as_matrix().component_mul(s))
            .collect();
        Self {
            network,
            distances,
            stages,
            weights,
            weighted_stages,
        }
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn distances(&self) -> &DistanceMatrix {
        &self.distances
    }

    pub fn stages(&self) -> &StageAdjacency {
        &self.stages
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    pub fn node_count(&self) -> usize {
        self.network.node_count()
    }

    /// Largest usable stage; 0 when the network has no edges.
    pub fn r_max(&self) -> usize {
        self.stages.r_max()
    }

    pub fn check_stage(&self, stage: usize) -> Result<()> {
        if stage > self.r_max() {
            return Err(GnarError::StageOutOfRange {
                stage,
                r_max: self.r_max(),
            });
        }
        Ok(())
    }

    /// `W ⊙ S_r`.
    pub fn weighted_stage(&self, stage: usize) -> Result<&DMatrix<f64>> {
        self.check_stage(stage)?;
        stage
            .checked_sub(1)
            .map(|idx| &self.weighted_stages[idx])
            .ok_or(GnarError::StageOutOfRange {
                stage,
                r_max: self.r_max(),
            })
    }

    /// `W_c ⊙ S_r`.
    pub fn community_stage(
        &self,
        stage: usize,
        part: &CommunityPartition,
        community: usize,
    ) -> Result<DMatrix<f64>> {
        let full = self.weighted_stage(stage)?;
        if community >= part.count() {
            return Err(GnarError::UnknownCommunity(community + 1));
        }
        Ok(DMatrix::from_fn(full.nrows(), full.ncols(), |i, j| {
            if part.community_of(i) == community && part.community_of(j) == community {
                full[(i, j)]
            } else {
                0.0
            }
        }))
    }
}
