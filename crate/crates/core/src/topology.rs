//! Communication graphs, Laplacians, and their spectral constants.
//!
//! Agents are indexed 1-based in every external format (files, generator
//! specs, error messages) and 0-based internally. The Laplacian acts on
//! stacked vectors block-wise; the `md x md` Kronecker matrix `L (x) I_d`
//! is never materialized.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("graph needs at least 2 agents, got {0}")]
    TooFewAgents(usize),
    #[error("cycle graph needs at least 3 agents, got {0}")]
    CycleTooSmall(usize),
    #[error("edge ({0}, {1}) is a self-loop (self-loops are implicit)")]
    SelfLoop(usize, usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge endpoint {0} out of range 1..={1}")]
    EndpointOutOfRange(usize, usize),
    #[error("malformed graph spec `{0}`: {1}")]
    MalformedSpec(String, String),
    #[error("malformed graph file: {0}")]
    MalformedFile(String),
    #[error("stacked vector has {got} entries, expected {want} (m={m} blocks of d={d})")]
    DimensionMismatch { got: usize, want: usize, m: usize, d: usize },
    #[error("graph is disconnected: found {multiplicity} near-zero Laplacian eigenvalues")]
    Disconnected { multiplicity: usize },
}

/// Undirected communication graph on agents `1..=m` (stored 0-based).
///
/// Neighborhoods include the agent itself: every node carries an implicit
/// self-loop, so `neighbors(i)` always contains `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    m: usize,
    /// Normalized unordered pairs `(i, j)` with `i < j`, 0-based.
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Build from a 1-based edge list. Rejects self-loops, duplicates, and
    /// endpoints outside `1..=m`.
    pub fn from_edge_list(m: usize, edges: &[(usize, usize)]) -> Result<Self, TopologyError> {
        if m < 2 {
            return Err(TopologyError::TooFewAgents(m));
        }
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == 0 || a > m {
                return Err(TopologyError::EndpointOutOfRange(a, m));
            }
            if b == 0 || b > m {
                return Err(TopologyError::EndpointOutOfRange(b, m));
            }
            if a == b {
                return Err(TopologyError::SelfLoop(a, b));
            }
            let key = (a.min(b) - 1, a.max(b) - 1);
            if !set.insert(key) {
                return Err(TopologyError::DuplicateEdge(key.0 + 1, key.1 + 1));
            }
        }
        Ok(Graph { m, edges: set })
    }

    pub fn agent_count(&self) -> usize {
        self.m
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Unordered edges, 1-based.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&(a, b)| (a + 1, b + 1))
    }

    /// Degree of 0-based agent `i`, excluding the implicit self-loop.
    pub fn degree(&self, i: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == i || b == i).count()
    }

    /// Neighborhood of 0-based agent `i`, including `i` itself, ascending.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == i {
                    Some(b)
                } else if b == i {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.push(i);
        out.sort_unstable();
        out
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.edges.contains(&(i.min(j), i.max(j)))
    }

    /// Single connected component check (BFS).
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.m];
        let mut queue = vec![0usize];
        seen[0] = true;
        while let Some(i) = queue.pop() {
            for j in self.neighbors(i) {
                if !seen[j] {
                    seen[j] = true;
                    queue.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Parse the plain-text graph file format: first line `m`, then one
    /// `i j` edge per line, 1-based.
    pub fn from_file_str(text: &str) -> Result<Self, TopologyError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let m: usize = lines
            .next()
            .ok_or_else(|| TopologyError::MalformedFile("empty file".into()))?
            .trim()
            .parse()
            .map_err(|e| TopologyError::MalformedFile(format!("bad agent count: {e}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut parts = line.split_whitespace();
            let a: usize = parts
                .next()
                .ok_or_else(|| TopologyError::MalformedFile(format!("bad edge line `{line}`")))?
                .parse()
                .map_err(|e| TopologyError::MalformedFile(format!("bad endpoint: {e}")))?;
            let b: usize = parts
                .next()
                .ok_or_else(|| TopologyError::MalformedFile(format!("bad edge line `{line}`")))?
                .parse()
                .map_err(|e| TopologyError::MalformedFile(format!("bad endpoint: {e}")))?;
            if parts.next().is_some() {
                return Err(TopologyError::MalformedFile(format!(
                    "edge line `{line}` has more than two fields"
                )));
            }
            edges.push((a, b));
        }
        Graph::from_edge_list(m, &edges)
    }

    /// Emit the plain-text graph file format (1-based).
    pub fn to_file_string(&self) -> String {
        let mut out = format!("{}\n", self.m);
        for (a, b) in self.edges() {
            out.push_str(&format!("{a} {b}\n"));
        }
        out
    }
}

/// Generator descriptor, parseable from strings like `path:5` or
/// `erdos_renyi:8:0.4:7`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GraphSpec {
    Path(usize),
    Cycle(usize),
    Complete(usize),
    Star(usize),
    ErdosRenyi { m: usize, p: f64, seed: u64 },
    EdgeList { m: usize, edges: Vec<(usize, usize)> },
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Path(m) => write!(f, "path:{m}"),
            GraphSpec::Cycle(m) => write!(f, "cycle:{m}"),
            GraphSpec::Complete(m) => write!(f, "complete:{m}"),
            GraphSpec::Star(m) => write!(f, "star:{m}"),
            GraphSpec::ErdosRenyi { m, p, seed } => write!(f, "erdos_renyi:{m}:{p}:{seed}"),
            GraphSpec::EdgeList { m, edges } => {
                write!(f, "edges:{m}:")?;
                for (idx, (a, b)) in edges.iter().enumerate() {
                    if idx > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}-{b}")?;
                }
                Ok(())
            }
        }
    }
}

impl From<GraphSpec> for String {
    fn from(s: GraphSpec) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for GraphSpec {
    type Error = TopologyError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl FromStr for GraphSpec {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| TopologyError::MalformedSpec(s.to_string(), msg.to_string());
        let mut parts = s.split(':');
        let kind = parts.next().ok_or_else(|| bad("empty spec"))?;
        let parse_m = |parts: &mut std::str::Split<'_, char>| -> Result<usize, TopologyError> {
            parts
                .next()
                .ok_or_else(|| bad("missing agent count"))?
                .parse()
                .map_err(|_| bad("bad agent count"))
        };
        let spec = match kind {
            "path" => GraphSpec::Path(parse_m(&mut parts)?),
            "cycle" => GraphSpec::Cycle(parse_m(&mut parts)?),
            "complete" => GraphSpec::Complete(parse_m(&mut parts)?),
            "star" => GraphSpec::Star(parse_m(&mut parts)?),
            "erdos_renyi" => {
                let m = parse_m(&mut parts)?;
                let p: f64 = parts
                    .next()
                    .ok_or_else(|| bad("missing edge probability"))?
                    .parse()
                    .map_err(|_| bad("bad edge probability"))?;
                let seed: u64 = parts
                    .next()
                    .ok_or_else(|| bad("missing seed"))?
                    .parse()
                    .map_err(|_| bad("bad seed"))?;
                GraphSpec::ErdosRenyi { m, p, seed }
            }
            "edges" => {
                let m = parse_m(&mut parts)?;
                let list = parts.next().ok_or_else(|| bad("missing edge list"))?;
                let mut edges = Vec::new();
                for pair in list.split(',').filter(|p| !p.is_empty()) {
                    let (a, b) = pair.split_once('-').ok_or_else(|| bad("bad edge pair"))?;
                    edges.push((
                        a.parse().map_err(|_| bad("bad endpoint"))?,
                        b.parse().map_err(|_| bad("bad endpoint"))?,
                    ));
                }
                GraphSpec::EdgeList { m, edges }
            }
            other => return Err(bad(&format!("unknown generator `{other}`"))),
        };
        if parts.next().is_some() {
            return Err(bad("trailing fields"));
        }
        Ok(spec)
    }
}

/// Build a graph from a generator descriptor or explicit edge list.
///
/// Generator output is deterministic given the spec (including the
/// Erdos-Renyi seed). A disconnected result is returned as-is; connectivity
/// is checked where it is required, not silently repaired here.
pub fn build_graph(spec: &GraphSpec) -> Result<Graph, TopologyError> {
    match *spec {
        GraphSpec::Path(m) => {
            let edges: Vec<_> = (1..m).map(|i| (i, i + 1)).collect();
            Graph::from_edge_list(m, &edges)
        }
        GraphSpec::Cycle(m) => {
            if m < 3 {
                return Err(TopologyError::CycleTooSmall(m));
            }
            let mut edges: Vec<_> = (1..m).map(|i| (i, i + 1)).collect();
            edges.push((m, 1));
            Graph::from_edge_list(m, &edges)
        }
        GraphSpec::Complete(m) => {
            let mut edges = Vec::new();
            for a in 1..=m {
                for b in (a + 1)..=m {
                    edges.push((a, b));
                }
            }
            Graph::from_edge_list(m, &edges)
        }
        GraphSpec::Star(m) => {
            let edges: Vec<_> = (2..=m).map(|b| (1, b)).collect();
            Graph::from_edge_list(m, &edges)
        }
        GraphSpec::ErdosRenyi { m, p, seed } => {
            if m < 2 {
                return Err(TopologyError::TooFewAgents(m));
            }
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for a in 1..=m {
                for b in (a + 1)..=m {
                    if rng.gen::<f64>() < p {
                        edges.push((a, b));
                    }
                }
            }
            Graph::from_edge_list(m, &edges)
        }
        GraphSpec::EdgeList { m, ref edges } => Graph::from_edge_list(m, edges),
    }
}

/// Sparse symmetric graph Laplacian acting block-wise on stacked vectors.
///
/// Row `i` holds `(j, L_ij)` pairs with `L_ii = |N_i| - 1` (the degree) and
/// `L_ij = -1` for every edge `(i, j)`, sorted by `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplacianOperator {
    m: usize,
    d: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

/// Build the Laplacian of `g` acting on blocks of dimension `d`.
pub fn laplacian(g: &Graph, d: usize) -> LaplacianOperator {
    let m = g.agent_count();
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut row: Vec<(usize, f64)> = g
            .neighbors(i)
            .into_iter()
            .map(|j| {
                if j == i {
                    (j, g.degree(i) as f64)
                } else {
                    (j, -1.0)
                }
            })
            .collect();
        row.sort_unstable_by_key(|&(j, _)| j);
        rows.push(row);
    }
    LaplacianOperator { m, d, rows }
}

impl LaplacianOperator {
    pub fn agent_count(&self) -> usize {
        self.m
    }

    pub fn block_dim(&self) -> usize {
        self.d
    }

    /// Sparse row `i` as `(column, coefficient)` pairs sorted by column.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Entry `L_ij` (dense view of the sparse row).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .find(|&&(c, _)| c == j)
            .map(|&(_, v)| v)
            .unwrap_or(0.0)
    }

    /// Block-wise action `(L (x) I_d) x` on a flat stacked vector of
    /// `m * d` entries. Block `i` of the result is `sum_{j in N_i} L_ij x_j`.
    pub fn apply_flat(&self, x: &[f64]) -> Result<Vec<f64>, TopologyError> {
        let want = self.m * self.d;
        if x.len() != want {
            return Err(TopologyError::DimensionMismatch {
                got: x.len(),
                want,
                m: self.m,
                d: self.d,
            });
        }
        let d = self.d;
        let mut out = vec![0.0; want];
        for i in 0..self.m {
            let block = &mut out[i * d..(i + 1) * d];
            for &(j, coeff) in &self.rows[i] {
                let src = &x[j * d..(j + 1) * d];
                for (o, s) in block.iter_mut().zip(src) {
                    *o += coeff * s;
                }
            }
        }
        Ok(out)
    }

    /// Dense `m x m` Laplacian (block dimension ignored).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut dense = DMatrix::zeros(self.m, self.m);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                dense[(i, j)] = v;
            }
        }
        dense
    }
}

/// Spectral constants of a connected graph's Laplacian.
///
/// `op_norm` is the largest eigenvalue; since `L (x) I_d` has the same
/// spectrum with multiplicity `d`, it is also the operator norm of the
/// block-wise action. `min_nonzero_singular` equals the smallest nonzero
/// eigenvalue (L is symmetric PSD).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralConstants {
    pub op_norm: f64,
    pub min_nonzero_singular: f64,
}

/// Eigen-decompose the Laplacian and extract `(lambda_max, lambda_min_nonzero)`.
///
/// Eigenvalues below `1e-9 * lambda_max` count as zero; a connected graph has
/// exactly one. More than one is reported as a disconnection error with the
/// multiplicity found.
pub fn spectral_constants(op: &LaplacianOperator) -> Result<SpectralConstants, TopologyError> {
    let dense = op.to_dense();
    let eig = dense.symmetric_eigen();
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lambda_max = *values.last().unwrap();
    let threshold = 1e-9 * lambda_max;
    let zero_count = values.iter().filter(|&&v| v <= threshold).count();
    if zero_count != 1 {
        return Err(TopologyError::Disconnected { multiplicity: zero_count });
    }
    let min_nonzero = values.iter().copied().find(|&v| v > threshold).unwrap();
    Ok(SpectralConstants { op_norm: lambda_max, min_nonzero_singular: min_nonzero })
}
