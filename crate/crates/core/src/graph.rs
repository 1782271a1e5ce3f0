//! Weighted undirected graphs, builders and the normalized Laplacian.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::Rng;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("graph needs at least {min} vertices, got {got}")]
    TooFewVertices { min: usize, got: usize },
    #[error("weight matrix has {got} entries, expected {n}x{n}")]
    BadShape { n: usize, got: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("weight ({i},{j}) = {w} is negative or not finite")]
    BadWeight { i: usize, j: usize, w: f64 },
    #[error("weights ({i},{j}) and ({j},{i}) differ")]
    Asymmetric { i: usize, j: usize },
    #[error("vertex {0} is isolated (zero degree)")]
    IsolatedVertex(usize),
    #[error("vertex {vertex} out of range for a graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("k = {k} must satisfy 1 <= k < N = {n}")]
    BadNeighbourCount { k: usize, n: usize },
    #[error("sigma must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("points must share one dimension >= 1 and have finite coordinates")]
    BadPoints,
    #[error("unknown point cloud kind `{0}`")]
    UnknownCloud(String),
}

/// Dense symmetric matrix, row-major, mirrored on every write.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    /// Builds from a row-major buffer; only the upper triangle is read.
    pub fn from_upper(dim: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), dim * dim);
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, entries[i * dim + j]);
            }
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.dim + j] = v;
        self.entries[j * self.dim + i] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn max_abs(&self) -> f64 {
        crate::linalg::max_abs(&self.entries)
    }

    pub fn frobenius_norm(&self) -> f64 {
        crate::linalg::norm_sq(&self.entries).sqrt()
    }
}

/// Weighted undirected graph without self-loops.
///
/// Weights are stored densely; adjacency lists (ascending neighbour index) are
/// derived once at construction for traversals.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    weights: Vec<f64>,
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Validates a dense row-major weight matrix.
    pub fn from_dense(n: usize, weights: Vec<f64>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::TooFewVertices { min: 1, got: 0 });
        }
        if weights.len() != n * n {
            return Err(GraphError::BadShape {
                n,
                got: weights.len(),
            });
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut edge_count = 0;
        for i in 0..n {
            if weights[i * n + i] != 0.0 {
                return Err(GraphError::SelfLoop(i));
            }
            for j in 0..n {
                let w = weights[i * n + j];
                if !(w.is_finite() && w >= 0.0) {
                    return Err(GraphError::BadWeight { i, j, w });
                }
                if w != weights[j * n + i] {
                    return Err(GraphError::Asymmetric { i, j });
                }
                if w > 0.0 {
                    adjacency[i].push(j);
                    if i < j {
                        edge_count += 1;
                    }
                }
            }
        }
        Ok(Self {
            n,
            weights,
            adjacency,
            edge_count,
        })
    }

    /// Builds from an undirected edge list `(u, v, w)`. Duplicate edges must agree.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, GraphError> {
        let mut w = vec![0.0; n * n];
        for &(u, v, wt) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !(wt.is_finite() && wt >= 0.0) {
                return Err(GraphError::BadWeight { i: u, j: v, w: wt });
            }
            let cur = w[u * n + v];
            if cur != 0.0 && cur != wt {
                return Err(GraphError::Asymmetric { i: u, j: v });
            }
            w[u * n + v] = wt;
            w[v * n + u] = wt;
        }
        Self::from_dense(n, w)
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Undirected edges `(u, v, w)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for u in 0..self.n {
            for &v in &self.adjacency[u] {
                if u < v {
                    out.push((u, v, self.weight(u, v)));
                }
            }
        }
        out
    }

    pub fn degrees(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.adjacency[i].iter().map(|&j| self.weight(i, j)).sum())
            .collect()
    }

    /// Vertex of maximum degree among `candidates`, smallest index on ties.
    pub fn max_degree_vertex(&self, candidates: impl IntoIterator<Item = usize>) -> Option<usize> {
        let degrees = self.degrees();
        let mut best: Option<usize> = None;
        for v in candidates {
            best = match best {
                Some(b) if degrees[v] > degrees[b] || (degrees[v] == degrees[b] && v < b) => Some(v),
                Some(b) => Some(b),
                None => Some(v),
            };
        }
        best
    }

    /// BFS distances from `start`; `None` for unreachable vertices.
    pub fn bfs_distances(&self, start: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &w in &self.adjacency[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Largest BFS distance from `start` within its component.
    pub fn eccentricity(&self, start: usize) -> usize {
        self.bfs_distances(start)
            .into_iter()
            .flatten()
            .max()
            .unwrap_or(0)
    }

    /// Component label per vertex, labels in order of first appearance.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            let mut stack = vec![s];
            while let Some(v) = stack.pop() {
                for &w in &self.adjacency[v] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    /// `D^{-1/2} (D - W) D^{-1/2}`.
    pub fn normalized_laplacian(&self) -> Result<SymmetricMatrix, GraphError> {
        let d = self.degrees();
        if let Some(v) = d.iter().position(|&x| x <= 0.0) {
            return Err(GraphError::IsolatedVertex(v));
        }
        let inv_sqrt: Vec<f64> = d.iter().map(|x| 1.0 / x.sqrt()).collect();
        let mut lap = SymmetricMatrix::zeros(self.n);
        for i in 0..self.n {
            lap.set(i, i, 1.0);
            for &j in &self.adjacency[i] {
                if i < j {
                    lap.set(i, j, -self.weight(i, j) * inv_sqrt[i] * inv_sqrt[j]);
                }
            }
        }
        Ok(lap)
    }

    /// Vertices at hop distance exactly `k` from `start`, for `k = 1..=s_max`.
    pub fn k_hop_sets(&self, start: usize, s_max: usize) -> Result<Vec<Vec<usize>>, GraphError> {
        if start >= self.n {
            return Err(GraphError::VertexOutOfRange {
                vertex: start,
                n: self.n,
            });
        }
        let mut sets = vec![Vec::new(); s_max];
        for (v, d) in self.bfs_distances(start).into_iter().enumerate() {
            if let Some(d) = d {
                if d >= 1 && d <= s_max {
                    sets[d - 1].push(v);
                }
            }
        }
        Ok(sets)
    }
}

/// `rows x cols` grid, unit weights, 4-neighbourhood, row-major vertex order.
pub fn build_grid(rows: usize, cols: usize) -> Result<Graph, GraphError> {
    let n = rows * cols;
    if n < 2 {
        return Err(GraphError::TooFewVertices { min: 2, got: n });
    }
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1, 1.0));
            }
            if r + 1 < rows {
                edges.push((v, v + cols, 1.0));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// Unit-weight cycle on `n >= 3` vertices.
pub fn build_cycle(n: usize) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::TooFewVertices { min: 3, got: n });
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
    Graph::from_edges(n, &edges)
}

/// Star with one hub (vertex 0) and `leaves` unit-weight spokes.
pub fn build_star(leaves: usize) -> Result<Graph, GraphError> {
    if leaves < 1 {
        return Err(GraphError::TooFewVertices { min: 2, got: 1 });
    }
    let edges: Vec<_> = (1..=leaves).map(|i| (0, i, 1.0)).collect();
    Graph::from_edges(leaves + 1, &edges)
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_points(points: &[Vec<f64>]) -> Result<usize, GraphError> {
    let d = points.first().map(Vec::len).unwrap_or(0);
    if d == 0
        || points
            .iter()
            .any(|p| p.len() != d || p.iter().any(|x| !x.is_finite()))
    {
        return Err(GraphError::BadPoints);
    }
    Ok(d)
}

/// Indices of the `k` nearest neighbours of every point (excluding itself),
/// ordered by distance with ties broken by smaller index.
fn knn_indices(points: &[Vec<f64>], k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = points.len();
    (0..n)
        .map(|i| {
            let mut cand: Vec<(usize, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (j, squared_distance(&points[i], &points[j])))
                .collect();
            cand.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            cand.truncate(k);
            cand
        })
        .collect()
}

/// Mean Euclidean distance from each point to its k-th nearest neighbour.
pub fn mean_kth_neighbor_distance(points: &[Vec<f64>], k: usize) -> Result<f64, GraphError> {
    check_points(points)?;
    if k == 0 || k >= points.len() {
        return Err(GraphError::BadNeighbourCount { k, n: points.len() });
    }
    let nn = knn_indices(points, k);
    Ok(nn.iter().map(|l| l[k - 1].1.sqrt()).sum::<f64>() / points.len() as f64)
}

/// Symmetrized k-nearest-neighbour graph with Gaussian weights
/// `exp(-|p_i - p_j|^2 / (2 sigma^2))`. When `sigma` is `None` the mean
/// k-th-neighbour distance is used.
pub fn build_knn_points(
    points: &[Vec<f64>],
    k: usize,
    sigma: Option<f64>,
) -> Result<Graph, GraphError> {
    check_points(points)?;
    let n = points.len();
    if k == 0 || k >= n {
        return Err(GraphError::BadNeighbourCount { k, n });
    }
    let nn = knn_indices(points, k);
    let sigma = match sigma {
        Some(s) => s,
        None => nn.iter().map(|l| l[k - 1].1.sqrt()).sum::<f64>() / n as f64,
    };
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(GraphError::BadSigma(sigma));
    }
    let two_sigma_sq = 2.0 * sigma * sigma;
    let mut w = vec![0.0; n * n];
    for (i, list) in nn.iter().enumerate() {
        for &(j, d2) in list {
            let wt = (-d2 / two_sigma_sq).exp();
            w[i * n + j] = wt;
            w[j * n + i] = wt;
        }
    }
    Graph::from_dense(n, w)
}

/// Synthetic point-cloud families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudKind {
    /// Uniform on the unit sphere (normalized Gaussian triples).
    Sphere,
    /// `(t cos t, h, t sin t)` with `t ~ U[1.5 pi, 4.5 pi]`, `h ~ U[0, 21]`.
    SwissRoll,
    /// Regular planar lattice with unit spacing, `ceil(sqrt(n))` columns, `z = 0`.
    Grid2d,
}

impl FromStr for CloudKind {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sphere" => Ok(Self::Sphere),
            "swiss_roll" => Ok(Self::SwissRoll),
            "grid2d" => Ok(Self::Grid2d),
            other => Err(GraphError::UnknownCloud(other.to_string())),
        }
    }
}

impl fmt::Display for CloudKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sphere => "sphere",
            Self::SwissRoll => "swiss_roll",
            Self::Grid2d => "grid2d",
        })
    }
}

/// Generates `n >= 4` three-dimensional points, deterministic in `seed`.
pub fn generate_point_cloud(kind: CloudKind, n: usize, seed: u64) -> Result<Vec<Vec<f64>>, GraphError> {
    if n < 4 {
        return Err(GraphError::TooFewVertices { min: 4, got: n });
    }
    let mut rng = Rng::new(seed);
    let points = match kind {
        CloudKind::Sphere => (0..n)
            .map(|_| loop {
                let p = [rng.normal(), rng.normal(), rng.normal()];
                let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                if norm > 1e-12 {
                    break p.iter().map(|x| x / norm).collect();
                }
            })
            .collect(),
        CloudKind::SwissRoll => (0..n)
            .map(|_| {
                let t = 1.5 * PI + 3.0 * PI * rng.next_f64();
                let h = 21.0 * rng.next_f64();
                vec![t * t.cos(), h, t * t.sin()]
            })
            .collect(),
        CloudKind::Grid2d => {
            let side = (n as f64).sqrt().ceil() as usize;
            (0..n)
                .map(|i| vec![(i % side) as f64, (i / side) as f64, 0.0])
                .collect()
        }
    };
    Ok(points)
}
