//! Weighted graphs in compressed sparse row form and the random-walk
//! transition model derived from them.
//!
//! A graph is valid once constructed: weights are nonnegative and finite,
//! every vertex has positive out-weight, undirected graphs are connected and
//! symmetric, directed graphs are strongly connected. The walk semantics
//! break down on anything less, so the constructors reject it up front.

use std::collections::VecDeque;
use std::io::BufRead;

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::error::{Error, Result};

/// Convergence tolerance for the stationary-distribution power iteration.
const POWER_ITERATION_TOL: f64 = 1e-13;
const POWER_ITERATION_MAX: usize = 1_000_000;

/// Weighted graph in compressed sparse row layout.
///
/// For undirected graphs both orientations of every edge are stored, so the
/// arc multiset is symmetric by construction. Adjacency lists are sorted by
/// target id and duplicate arcs are merged by summing their weights.
#[derive(Debug, Clone)]
pub struct Graph {
    vertex_count: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    directed: bool,
}

impl Graph {
    /// Builds a graph from an arc list. For undirected graphs each input
    /// edge inserts both orientations.
    pub fn from_edges(
        vertex_count: usize,
        edges: &[(usize, usize, f64)],
        directed: bool,
    ) -> Result<Self> {
        let mut arcs: Vec<(usize, usize, f64)> = Vec::with_capacity(edges.len() * 2);
        for &(src, dst, w) in edges {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "edge ({src}, {dst}) has invalid weight {w}"
                )));
            }
            if src >= vertex_count || dst >= vertex_count {
                return Err(Error::InvalidArgument(format!(
                    "edge ({src}, {dst}) out of range for {vertex_count} vertices"
                )));
            }
            arcs.push((src, dst, w));
            if !directed {
                arcs.push((dst, src, w));
            }
        }
        Self::from_arcs(vertex_count, arcs, directed)
    }

    /// Parses a whitespace-separated edge list: `src dst [weight]`, one edge
    /// per line, `#`-prefixed lines ignored, missing weight defaulting to 1.
    /// Vertex ids are nonnegative integers; the graph covers `0..=max_id`.
    pub fn from_edge_list<R: BufRead>(reader: R, directed: bool) -> Result<Self> {
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        let mut max_id: Option<usize> = None;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let src = parse_vertex(it.next(), line_no)?;
            let dst = parse_vertex(it.next(), line_no)?;
            let weight = match it.next() {
                None => 1.0,
                Some(tok) => tok.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid weight '{tok}'"),
                })?,
            };
            if it.next().is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "expected 'src dst [weight]'".to_string(),
                });
            }
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("negative weight {weight}"),
                });
            }
            max_id = Some(max_id.map_or(src.max(dst), |m| m.max(src).max(dst)));
            edges.push((src, dst, weight));
        }
        let vertex_count = max_id.map_or(0, |m| m + 1);
        Self::from_edges(vertex_count, &edges, directed)
    }

    fn from_arcs(
        vertex_count: usize,
        mut arcs: Vec<(usize, usize, f64)>,
        directed: bool,
    ) -> Result<Self> {
        arcs.sort_by_key(|&(s, t, _)| (s, t));

        let mut offsets = vec![0usize; vertex_count + 1];
        let mut targets = Vec::with_capacity(arcs.len());
        let mut weights = Vec::with_capacity(arcs.len());
        let mut i = 0;
        while i < arcs.len() {
            let (src, dst, mut w) = arcs[i];
            i += 1;
            while i < arcs.len() && arcs[i].0 == src && arcs[i].1 == dst {
                w += arcs[i].2;
                i += 1;
            }
            if w > 0.0 {
                targets.push(dst);
                weights.push(w);
                offsets[src + 1] += 1;
            }
        }
        for v in 0..vertex_count {
            offsets[v + 1] += offsets[v];
        }

        let graph = Graph {
            vertex_count,
            offsets,
            targets,
            weights,
            directed,
        };
        graph.validate()?;
        Ok(graph)
    }

    fn validate(&self) -> Result<()> {
        if self.vertex_count == 0 {
            return Ok(());
        }
        for v in 0..self.vertex_count {
            if self.out_weight(v) <= 0.0 {
                return Err(Error::DanglingVertex(v));
            }
        }
        // Every theorem downstream assumes irreducibility, so reject
        // disconnected inputs here rather than patching them.
        let fwd = bfs_depths(self, 0, false);
        if let Some(v) = fwd.iter().position(|d| d.is_none()) {
            return if self.directed {
                Err(Error::NotStronglyConnected(v))
            } else {
                Err(Error::Disconnected(v))
            };
        }
        if self.directed {
            let bwd = bfs_depths(self, 0, true);
            if let Some(v) = bwd.iter().position(|d| d.is_none()) {
                return Err(Error::NotStronglyConnected(v));
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Number of stored arcs (both orientations for undirected graphs).
    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    /// Edge count in the conventional sense: arcs for directed graphs,
    /// unordered pairs (self-loops counted once) for undirected ones.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            return self.arc_count();
        }
        let mut count = 0;
        for v in 0..self.vertex_count {
            count += self.neighbors(v).0.iter().filter(|&&u| u >= v).count();
        }
        count
    }

    /// Adjacency of `v`: parallel slices of targets and weights, sorted by
    /// target id.
    pub fn neighbors(&self, v: usize) -> (&[usize], &[f64]) {
        let lo = self.offsets[v];
        let hi = self.offsets[v + 1];
        (&self.targets[lo..hi], &self.weights[lo..hi])
    }

    /// Weighted out-degree d_v = sum of outgoing weights.
    pub fn out_weight(&self, v: usize) -> f64 {
        let (_, ws) = self.neighbors(v);
        ws.iter().sum()
    }
}

fn parse_vertex(tok: Option<&str>, line_no: usize) -> Result<usize> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line: line_no,
        message: "expected 'src dst [weight]'".to_string(),
    })?;
    tok.parse::<usize>().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("invalid vertex id '{tok}'"),
    })
}

/// BFS depths from `start`; `reverse` walks arcs backwards.
fn bfs_depths(g: &Graph, start: usize, reverse: bool) -> Vec<Option<usize>> {
    let n = g.vertex_count();
    let mut depth = vec![None; n];
    if n == 0 {
        return depth;
    }
    let rev_adj: Option<Vec<Vec<usize>>> = if reverse {
        let mut adj = vec![Vec::new(); n];
        for v in 0..n {
            for &u in g.neighbors(v).0 {
                adj[u].push(v);
            }
        }
        Some(adj)
    } else {
        None
    };
    depth[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let d = depth[v].unwrap();
        let push = |u: usize, depth: &mut Vec<Option<usize>>, queue: &mut VecDeque<usize>| {
            if depth[u].is_none() {
                depth[u] = Some(d + 1);
                queue.push_back(u);
            }
        };
        match &rev_adj {
            Some(adj) => {
                for &u in &adj[v] {
                    push(u, &mut depth, &mut queue);
                }
            }
            None => {
                for &u in g.neighbors(v).0 {
                    push(u, &mut depth, &mut queue);
                }
            }
        }
    }
    depth
}

/// BFS 2-coloring. Returns `Some(colors)` iff the graph is bipartite.
/// Requires an undirected connected graph.
pub fn detect_bipartite(g: &Graph) -> Result<Option<Vec<u8>>> {
    if g.is_directed() {
        return Err(Error::DirectedUnsupported);
    }
    let n = g.vertex_count();
    let mut color = vec![u8::MAX; n];
    if n == 0 {
        return Ok(Some(color));
    }
    color[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for &u in g.neighbors(v).0 {
            if color[u] == u8::MAX {
                color[u] = 1 - color[v];
                queue.push_back(u);
            } else if color[u] == color[v] {
                return Ok(None);
            }
        }
    }
    Ok(Some(color))
}

/// Period of the walk and its cyclic classes.
///
/// The period is the gcd over all arcs (u, v) of depth(u) + 1 - depth(v),
/// with depths taken from a BFS rooted at vertex 0; class `i` collects the
/// vertices whose depth is congruent to `i` mod the period.
pub fn compute_period(g: &Graph) -> Result<(usize, Vec<Vec<usize>>)> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let depth = bfs_depths(g, 0, false);
    if let Some(v) = depth.iter().position(|d| d.is_none()) {
        return Err(Error::NotStronglyConnected(v));
    }
    if g.is_directed() {
        let bwd = bfs_depths(g, 0, true);
        if let Some(v) = bwd.iter().position(|d| d.is_none()) {
            return Err(Error::NotStronglyConnected(v));
        }
    }
    let mut theta: usize = 0;
    for u in 0..n {
        let du = depth[u].unwrap();
        for &v in g.neighbors(u).0 {
            let dv = depth[v].unwrap();
            let diff = (du as i64 + 1 - dv as i64).unsigned_abs() as usize;
            theta = gcd(theta, diff);
        }
    }
    if theta == 0 {
        // Single vertex with a self-loop is the only way every arc keeps
        // depth difference zero.
        theta = 1;
    }
    let mut classes = vec![Vec::new(); theta];
    for v in 0..n {
        classes[depth[v].unwrap() % theta].push(v);
    }
    Ok((theta, classes))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Row-stochastic random-walk model over a graph: P_vc = w_vc / d_v plus the
/// stationary distribution, period, and bipartiteness of the chain.
#[derive(Debug, Clone)]
pub struct TransitionModel {
    graph: Graph,
    degrees: Vec<f64>,
    pi: Vec<f64>,
    period: usize,
    bipartite: bool,
    period_classes: Option<Vec<Vec<usize>>>,
}

impl TransitionModel {
    /// Derives the transition model of a valid graph.
    ///
    /// The stationary distribution is degree-normalized for undirected
    /// graphs. For directed graphs it is the left Perron vector of P,
    /// obtained by power iteration on the period-averaged chain
    /// (P + ... + P^period) / period, which is aperiodic whenever the graph
    /// is strongly connected.
    pub fn build(graph: Graph) -> Result<Self> {
        let n = graph.vertex_count();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let degrees: Vec<f64> = (0..n).map(|v| graph.out_weight(v)).collect();
        let (period, classes) = compute_period(&graph)?;
        let bipartite = if graph.is_directed() {
            false
        } else {
            detect_bipartite(&graph)?.is_some()
        };

        let pi = if graph.is_directed() {
            stationary_power_iteration(&graph, &degrees, period)?
        } else {
            let total: f64 = degrees.iter().sum();
            degrees.iter().map(|d| d / total).collect()
        };

        Ok(TransitionModel {
            graph,
            degrees,
            pi,
            period,
            bipartite,
            period_classes: (period > 1).then_some(classes),
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    /// Weighted out-degrees d_v.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Stationary distribution of the walk.
    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn bipartite(&self) -> bool {
        self.bipartite
    }

    /// Cyclic classes S_i of a periodic chain; `None` when aperiodic.
    pub fn period_classes(&self) -> Option<&[Vec<usize>]> {
        self.period_classes.as_deref()
    }

    /// Nonzero entries of row v of P, sorted by target id.
    pub fn prob_row(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (ts, ws) = self.graph.neighbors(v);
        let d = self.degrees[v];
        ts.iter().zip(ws.iter()).map(move |(&t, &w)| (t, w / d))
    }

    /// y = x P for a row vector x.
    pub fn left_multiply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.vertex_count();
        let mut y = vec![0.0; n];
        for v in 0..n {
            let xv = x[v];
            if xv != 0.0 {
                for (t, p) in self.prob_row(v) {
                    y[t] += xv * p;
                }
            }
        }
        y
    }

    /// B P for a dense matrix B with `vertex_count` columns.
    pub fn right_multiply_dense(&self, b: &Array2<f64>) -> Array2<f64> {
        let n = self.vertex_count();
        let rows = b.nrows();
        let mut out = Array2::zeros((rows, n));
        for v in 0..n {
            for (t, p) in self.prob_row(v) {
                for i in 0..rows {
                    out[[i, t]] += b[[i, v]] * p;
                }
            }
        }
        out
    }

    /// Dense copy of P.
    pub fn dense_transition(&self) -> Array2<f64> {
        let n = self.vertex_count();
        let mut p = Array2::zeros((n, n));
        for v in 0..n {
            for (t, prob) in self.prob_row(v) {
                p[[v, t]] = prob;
            }
        }
        p
    }

    /// Stationary distribution as an owned array.
    pub fn pi_array(&self) -> Array1<f64> {
        Array1::from_vec(self.pi.clone())
    }
}

fn stationary_power_iteration(graph: &Graph, degrees: &[f64], period: usize) -> Result<Vec<f64>> {
    let n = graph.vertex_count();
    let left_mul = |x: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; n];
        for v in 0..n {
            let (ts, ws) = graph.neighbors(v);
            let xv = x[v] / degrees[v];
            for (&t, &w) in ts.iter().zip(ws.iter()) {
                y[t] += xv * w;
            }
        }
        y
    };

    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..POWER_ITERATION_MAX {
        let mut acc = vec![0.0; n];
        let mut z = x.clone();
        for _ in 0..period {
            z = left_mul(&z);
            for (a, zi) in acc.iter_mut().zip(z.iter()) {
                *a += zi;
            }
        }
        let total: f64 = acc.iter().sum();
        for a in acc.iter_mut() {
            *a /= total;
        }
        let diff = x
            .iter()
            .zip(acc.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        x = acc;
        if diff < POWER_ITERATION_TOL {
            return Ok(x);
        }
    }
    Err(Error::NotIrreducible)
}

/// Machine-readable graph summary.
#[derive(Debug, Clone, Serialize)]
pub struct GraphSummary {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub directed: bool,
    pub period: usize,
    pub bipartite: bool,
    pub degree_min: f64,
    pub degree_max: f64,
}

impl GraphSummary {
    pub fn from_model(tm: &TransitionModel) -> Self {
        let degrees = tm.degrees();
        GraphSummary {
            vertex_count: tm.vertex_count(),
            edge_count: tm.graph().edge_count(),
            directed: tm.graph().is_directed(),
            period: tm.period(),
            bipartite: tm.bipartite(),
            degree_min: degrees.iter().copied().fold(f64::INFINITY, f64::min),
            degree_max: degrees.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Stock graphs used by experiments and tests.
pub mod gen {
    use super::Graph;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Path graph 0 - 1 - ... - (n-1) with unit weights.
    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|v| (v, v + 1, 1.0)).collect();
        Graph::from_edges(n, &edges, false).expect("path graph is valid")
    }

    /// Complete graph on n vertices with the given uniform edge weight.
    pub fn complete_weighted(n: usize, w: f64) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v, w));
            }
        }
        Graph::from_edges(n, &edges, false).expect("complete graph is valid")
    }

    /// Complete graph with unit weights.
    pub fn complete(n: usize) -> Graph {
        complete_weighted(n, 1.0)
    }

    /// Cycle 0 -> 1 -> ... -> (n-1) -> 0, directed or undirected.
    pub fn cycle(n: usize, directed: bool) -> Graph {
        let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n, 1.0)).collect();
        Graph::from_edges(n, &edges, directed).expect("cycle graph is valid")
    }

    /// Complete bipartite graph K_{a,b} with unit weights.
    pub fn complete_bipartite(a: usize, b: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..a {
            for v in 0..b {
                edges.push((u, a + v, 1.0));
            }
        }
        Graph::from_edges(a + b, &edges, false).expect("bipartite graph is valid")
    }

    /// Random connected undirected graph: a random spanning tree plus
    /// `extra_edges` random non-duplicate edges, unit weights.
    pub fn random_connected(n: usize, extra_edges: usize, seed: u64) -> Graph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        let mut present = std::collections::HashSet::new();
        for v in 1..n {
            let u = rng.random_range(0..v);
            edges.push((u, v, 1.0));
            present.insert((u, v));
        }
        let mut added = 0;
        let mut attempts = 0;
        while added < extra_edges && attempts < 100 * extra_edges.max(1) {
            attempts += 1;
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            let (u, v) = (u.min(v), u.max(v));
            if u == v || present.contains(&(u, v)) {
                continue;
            }
            present.insert((u, v));
            edges.push((u, v, 1.0));
            added += 1;
        }
        Graph::from_edges(n, &edges, false).expect("random connected graph is valid")
    }

    /// Two cliques of sizes `a` and `b` joined by a single bridge edge.
    pub fn two_cliques(a: usize, b: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..a {
            for v in (u + 1)..a {
                edges.push((u, v, 1.0));
            }
        }
        for u in 0..b {
            for v in (u + 1)..b {
                edges.push((a + u, a + v, 1.0));
            }
        }
        edges.push((a - 1, a, 1.0));
        Graph::from_edges(a + b, &edges, false).expect("two-clique graph is valid")
    }
}
