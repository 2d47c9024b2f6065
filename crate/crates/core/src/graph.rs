//! Stationary Bratteli diagrams presented as a finite oriented graph with a
//! distinguished one-edge loop, a choice function `tau` on edges, a symmetric
//! set of horizontal edge pairs and a scale parameter `rho`.
//!
//! Path words are stored as edge-index sequences; an infinite path is a word
//! together with the convention that it continues by repeated application of
//! `tau` to its last edge.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{BigMatrix, IntMatrix, PrimitivityReport};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub source: VertexId,
    pub range: VertexId,
}

/// Ordered horizontal pair `(from, to)`: two distinct edges with a common
/// source vertex, plus an orientation sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HorizontalPair {
    pub from: EdgeId,
    pub to: EdgeId,
    pub orientation: Orientation,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph matrix is not primitive (stable zero entry at {0:?})")]
    NonPrimitive(Option<(usize, usize)>),
    #[error("tau invalid: {0}")]
    TauInvalid(String),
    #[error("horizontal set invalid: {0}")]
    HorizontalInvalid(String),
    #[error("rho must lie strictly between 0 and 1, got {0}")]
    RhoOutOfRange(f64),
    #[error("star edge {0} is not a one-edge loop")]
    StarNotLoop(String),
    #[error("unknown id in graph description: {0}")]
    UnknownId(String),
    #[error("graph description malformed: {0}")]
    Malformed(String),
}

/// Validated stationary Bratteli diagram datum.
#[derive(Debug, Clone, PartialEq)]
pub struct BratteliGraph {
    pub vertices: Vec<String>,
    pub edges: Vec<Edge>,
    pub star_edge: EdgeId,
    /// `tau[e]` continues edge `e` one level deeper.
    pub tau: Vec<EdgeId>,
    pub horizontal: Vec<HorizontalPair>,
    pub rho: f64,
    /// per-vertex outgoing edge lists, derived
    out_edges: Vec<Vec<EdgeId>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WordMode {
    /// Finite word; continuation beyond the stored edges is unknown.
    Truncated,
    /// Word implicitly continued by repeated `tau` of the last edge.
    TauExtended,
}

/// Finite path word over the graph, optionally carrying the canonical
/// tau-continuation semantics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathWord {
    pub edges: Vec<EdgeId>,
    pub mode: WordMode,
}

impl PathWord {
    pub fn tau_extended(edges: Vec<EdgeId>) -> Self {
        PathWord {
            edges,
            mode: WordMode::TauExtended,
        }
    }

    pub fn truncated(edges: Vec<EdgeId>) -> Self {
        PathWord {
            edges,
            mode: WordMode::Truncated,
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

impl BratteliGraph {
    /// Validates all structural invariants and returns the graph, or the
    /// first violated invariant.
    pub fn new(
        vertices: Vec<String>,
        edges: Vec<Edge>,
        star_edge: EdgeId,
        tau: Vec<EdgeId>,
        horizontal: Vec<HorizontalPair>,
        rho: f64,
    ) -> Result<Self, GraphError> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(GraphError::RhoOutOfRange(rho));
        }
        let nv = vertices.len();
        if edges.is_empty() {
            return Err(GraphError::Malformed("no edges".into()));
        }
        for e in &edges {
            if e.source >= nv || e.range >= nv {
                return Err(GraphError::UnknownId(e.name.clone()));
            }
        }
        if star_edge >= edges.len() {
            return Err(GraphError::UnknownId(format!("star edge #{star_edge}")));
        }
        if tau.len() != edges.len() || tau.iter().any(|&t| t >= edges.len()) {
            return Err(GraphError::TauInvalid("tau is not total on edges".into()));
        }
        let star = &edges[star_edge];
        if star.source != star.range {
            return Err(GraphError::StarNotLoop(star.name.clone()));
        }
        let star_vertex = star.source;

        let mut out_edges = vec![Vec::new(); nv];
        for (i, e) in edges.iter().enumerate() {
            out_edges[e.source].push(i);
        }

        let graph = BratteliGraph {
            vertices,
            edges,
            star_edge,
            tau,
            horizontal,
            rho,
            out_edges,
        };

        let report = graph.graph_matrix().primitivity();
        if !report.primitive {
            return Err(GraphError::NonPrimitive(report.zero_entry));
        }

        graph.validate_tau(star_vertex)?;
        graph.validate_horizontal()?;
        Ok(graph)
    }

    fn validate_tau(&self, star_vertex: VertexId) -> Result<(), GraphError> {
        let dist = self.distance_to(star_vertex);
        for (e, &t) in self.tau.iter().enumerate() {
            let range = self.edges[e].range;
            if range == star_vertex {
                if t != self.star_edge {
                    return Err(GraphError::TauInvalid(format!(
                        "tau({}) must be the star loop",
                        self.edges[e].name
                    )));
                }
            } else {
                if self.edges[t].source != range {
                    return Err(GraphError::TauInvalid(format!(
                        "tau({}) does not start at range({})",
                        self.edges[e].name, self.edges[e].name
                    )));
                }
                let before = dist[range];
                let after = dist[self.edges[t].range];
                if after >= before {
                    return Err(GraphError::TauInvalid(format!(
                        "tau({}) does not move strictly closer to the star vertex",
                        self.edges[e].name
                    )));
                }
            }
        }
        Ok(())
    }

    fn validate_horizontal(&self) -> Result<(), GraphError> {
        use std::collections::HashSet;
        let mut pos = HashSet::new();
        let mut neg = HashSet::new();
        for h in &self.horizontal {
            if h.from == h.to {
                return Err(GraphError::HorizontalInvalid(format!(
                    "loop pair on edge {}",
                    self.edges[h.from].name
                )));
            }
            if self.edges[h.from].source != self.edges[h.to].source {
                return Err(GraphError::HorizontalInvalid(format!(
                    "pair ({}, {}) has mismatched sources",
                    self.edges[h.from].name, self.edges[h.to].name
                )));
            }
            let inserted = match h.orientation {
                Orientation::Positive => pos.insert((h.from, h.to)),
                Orientation::Negative => neg.insert((h.from, h.to)),
            };
            if !inserted {
                return Err(GraphError::HorizontalInvalid(format!(
                    "duplicate pair ({}, {})",
                    self.edges[h.from].name, self.edges[h.to].name
                )));
            }
        }
        // symmetric as an unordered set, with the negative part the reversal
        // of the positive part
        for &(a, b) in &pos {
            if !neg.contains(&(b, a)) {
                return Err(GraphError::HorizontalInvalid(format!(
                    "missing reversed pair ({}, {})",
                    self.edges[b].name, self.edges[a].name
                )));
            }
        }
        for &(a, b) in &neg {
            if !pos.contains(&(b, a)) {
                return Err(GraphError::HorizontalInvalid(format!(
                    "missing reversed pair ({}, {})",
                    self.edges[b].name, self.edges[a].name
                )));
            }
        }
        Ok(())
    }

    /// Directed graph distance from each vertex to `target` (number of edges).
    fn distance_to(&self, target: VertexId) -> Vec<usize> {
        // BFS on reversed adjacency
        let nv = self.vertices.len();
        let mut incoming = vec![Vec::new(); nv];
        for e in &self.edges {
            incoming[e.range].push(e.source);
        }
        let mut dist = vec![usize::MAX; nv];
        let mut queue = std::collections::VecDeque::new();
        dist[target] = 0;
        queue.push_back(target);
        while let Some(v) = queue.pop_front() {
            for &u in &incoming[v] {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    pub fn star_vertex(&self) -> VertexId {
        self.edges[self.star_edge].source
    }

    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out_edges[v]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn graph_matrix(&self) -> IntMatrix {
        let nv = self.vertices.len();
        let mut m = IntMatrix::zero(nv);
        for e in &self.edges {
            m.set(e.source, e.range, m.get(e.source, e.range) + 1);
        }
        m
    }

    pub fn is_primitive(&self) -> PrimitivityReport {
        self.graph_matrix().primitivity()
    }

    /// Exact number of paths of length `n` between every vertex pair: `A^n`.
    pub fn path_count(&self, n: usize) -> BigMatrix {
        self.graph_matrix().pow(n)
    }

    /// Appends the canonical tau-continuation of the last edge until the word
    /// has length `depth`; no-op when the word is already at least that long.
    pub fn tau_extend(&self, word: &PathWord, depth: usize) -> PathWord {
        let mut edges = word.edges.clone();
        if edges.is_empty() && depth > 0 {
            // extend the empty word from the star loop
            edges.push(self.star_edge);
        }
        while edges.len() < depth {
            let last = *edges.last().expect("nonempty");
            edges.push(self.tau[last]);
        }
        PathWord::tau_extended(edges)
    }

    /// `b_n(z) = 1` iff the word does not follow tau at position `n`.
    /// Positions beyond the explicit word follow tau by convention when the
    /// word is tau-extended.
    pub fn deviates_from_tau(&self, word: &PathWord, n: usize) -> Option<bool> {
        if n == 0 || n >= word.edges.len() {
            match word.mode {
                WordMode::TauExtended => Some(false),
                WordMode::Truncated => {
                    if n == 0 {
                        Some(false)
                    } else {
                        None
                    }
                }
            }
        } else {
            Some(self.tau[word.edges[n - 1]] != word.edges[n])
        }
    }

    /// Exact number of level-`n` horizontal edges,
    /// `#E_n = sum_v sum_h A^(n-1)[v, s2(h)]`.
    pub fn horizontal_count(&self, n: usize) -> BigInt {
        assert!(n >= 1, "horizontal edges start at level 1");
        let power = self.path_count(n - 1);
        let mut per_vertex = vec![0usize; self.vertices.len()];
        for h in &self.horizontal {
            per_vertex[self.edges[h.from].source] += 1;
        }
        let mut total = BigInt::zero();
        for (w, &count) in per_vertex.iter().enumerate() {
            if count > 0 {
                total += power.column_sum(w) * BigInt::from(count);
            }
        }
        total
    }

    /// Per-vertex multiplicities `#{h : s2(h) = w}` of the horizontal set.
    pub fn horizontal_source_multiplicities(&self) -> Vec<usize> {
        let mut per_vertex = vec![0usize; self.vertices.len()];
        for h in &self.horizontal {
            per_vertex[self.edges[h.from].source] += 1;
        }
        per_vertex
    }

    /// Brute-force enumeration of the level-`n` horizontal pairs; exponential
    /// in `n`, intended as an oracle for small `n`.
    pub fn horizontal_count_enumerated(&self, n: usize) -> BigInt {
        assert!(n >= 1);
        let mut total: u64 = 0;
        let prefixes = self.enumerate_paths(n - 1);
        for prefix in &prefixes {
            let end = if prefix.is_empty() {
                None
            } else {
                Some(self.edges[*prefix.last().unwrap()].range)
            };
            for h in &self.horizontal {
                let needed = self.edges[h.from].source;
                match end {
                    Some(v) if v != needed => continue,
                    _ => {}
                }
                total += 1;
            }
        }
        // a length-0 prefix imposes no source constraint; each h counted once
        // per compatible prefix, which is exactly the definition of H_n
        BigInt::from(total)
    }

    /// All paths of length `n` (any start vertex), as edge-index vectors.
    pub fn enumerate_paths(&self, n: usize) -> Vec<Vec<EdgeId>> {
        let mut paths: Vec<Vec<EdgeId>> = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::new();
            for p in &paths {
                let candidates: Vec<EdgeId> = match p.last() {
                    None => (0..self.edges.len()).collect(),
                    Some(&last) => self.out_edges[self.edges[last].range].clone(),
                };
                for e in candidates {
                    let mut q = p.clone();
                    q.push(e);
                    next.push(q);
                }
            }
            paths = next;
        }
        paths
    }

    /// Paths of length `n` starting at vertex `v`.
    pub fn enumerate_paths_from(&self, v: VertexId, n: usize) -> Vec<Vec<EdgeId>> {
        let mut paths: Vec<Vec<EdgeId>> = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::new();
            for p in &paths {
                let from = match p.last() {
                    None => v,
                    Some(&last) => self.edges[last].range,
                };
                for &e in &self.out_edges[from] {
                    let mut q = p.clone();
                    q.push(e);
                    next.push(q);
                }
            }
            paths = next;
        }
        paths
    }

    /// Telescoped diagram: edges are paths of length `p`, the matrix becomes
    /// `A^p` and the parameter `rho^p`. A telescoped pair is horizontal when
    /// the two paths agree before some index `i`, form an original horizontal
    /// pair at it, and follow the choice function afterwards; this makes the
    /// level sets of the two approximation graphs match up exactly (the
    /// level-`n` pairs collect the original levels `(n-1)p+1 ..= np`). The
    /// orientation is inherited from the pair at the splitting index.
    pub fn telescope(&self, p: usize) -> Result<BratteliGraph, GraphError> {
        assert!(p >= 1);
        let paths = self.enumerate_paths(p);
        let index_of: BTreeMap<Vec<EdgeId>, usize> = paths
            .iter()
            .enumerate()
            .map(|(i, path)| (path.clone(), i))
            .collect();

        let edges: Vec<Edge> = paths
            .iter()
            .map(|path| {
                let names: Vec<&str> = path.iter().map(|&e| self.edges[e].name.as_str()).collect();
                Edge {
                    name: names.join("."),
                    source: self.edges[path[0]].source,
                    range: self.edges[*path.last().unwrap()].range,
                }
            })
            .collect();

        let star_path = vec![self.star_edge; p];
        let star_edge = index_of[&star_path];

        // canonical continuation: iterate tau starting from the last edge
        let tau: Vec<EdgeId> = paths
            .iter()
            .map(|path| {
                let mut cont = Vec::with_capacity(p);
                let mut last = *path.last().unwrap();
                for _ in 0..p {
                    last = self.tau[last];
                    cont.push(last);
                }
                index_of[&cont]
            })
            .collect();

        let mut horizontal = Vec::new();
        let mut is_h: BTreeMap<(EdgeId, EdgeId), Orientation> = BTreeMap::new();
        for h in &self.horizontal {
            is_h.insert((h.from, h.to), h.orientation);
        }
        for (i, a) in paths.iter().enumerate() {
            for (j, b) in paths.iter().enumerate() {
                if i == j {
                    continue;
                }
                // split at the first differing index; both continuations
                // must follow the choice function from there on
                let mut split = None;
                for k in 0..p {
                    if a[k] != b[k] {
                        split = Some(k);
                        break;
                    }
                }
                let Some(k) = split else { continue };
                let Some(&orientation) = is_h.get(&(a[k], b[k])) else {
                    continue;
                };
                let canonical_after = (k + 1..p)
                    .all(|l| a[l] == self.tau[a[l - 1]] && b[l] == self.tau[b[l - 1]]);
                if canonical_after {
                    horizontal.push(HorizontalPair {
                        from: i,
                        to: j,
                        orientation,
                    });
                }
            }
        }

        BratteliGraph::new(
            self.vertices.clone(),
            edges,
            star_edge,
            tau,
            horizontal,
            self.rho.powi(p as i32),
        )
    }

    /// Reversed graph: all edge orientations flipped (matrix transposed). The
    /// caller supplies the choice function and horizontal set for the
    /// reversed graph; the star loop stays on the same vertex.
    pub fn reverse(
        &self,
        tau: Vec<EdgeId>,
        horizontal: Vec<HorizontalPair>,
        rho: f64,
    ) -> Result<BratteliGraph, GraphError> {
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|e| Edge {
                name: format!("{}~", e.name),
                source: e.range,
                range: e.source,
            })
            .collect();
        BratteliGraph::new(
            self.vertices.clone(),
            edges,
            self.star_edge,
            tau,
            horizontal,
            rho,
        )
    }

    /// Reversed graph with the maximal horizontal set and a canonical choice
    /// function (first outgoing edge that moves strictly closer to the star
    /// vertex).
    pub fn reverse_with_defaults(&self, rho: f64) -> Result<BratteliGraph, GraphError> {
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|e| Edge {
                name: format!("{}~", e.name),
                source: e.range,
                range: e.source,
            })
            .collect();
        let nv = self.vertices.len();
        let tau = canonical_tau(nv, &edges, self.star_edge)
            .ok_or_else(|| GraphError::TauInvalid("no descending choice function".into()))?;
        let horizontal = maximal_horizontal(&edges);
        BratteliGraph::new(
            self.vertices.clone(),
            edges,
            self.star_edge,
            tau,
            horizontal,
            rho,
        )
    }

    /// Connectivity of the approximation graph: every pair of distinct edges
    /// with a common source must be linked by a path of horizontal pairs.
    pub fn check_connectivity(&self) -> bool {
        let ne = self.edges.len();
        let mut adjacency = vec![Vec::new(); ne];
        for h in &self.horizontal {
            adjacency[h.from].push(h.to);
        }
        for v in 0..self.vertices.len() {
            let group = &self.out_edges[v];
            if group.len() < 2 {
                continue;
            }
            // BFS from the first edge of the group
            let mut seen = vec![false; ne];
            let mut queue = std::collections::VecDeque::new();
            seen[group[0]] = true;
            queue.push_back(group[0]);
            while let Some(e) = queue.pop_front() {
                for &f in &adjacency[e] {
                    if !seen[f] {
                        seen[f] = true;
                        queue.push_back(f);
                    }
                }
            }
            if group.iter().any(|&e| !seen[e]) {
                return false;
            }
        }
        true
    }

    /// Resolves an edge name to its index.
    pub fn edge_index(&self, name: &str) -> Option<EdgeId> {
        self.edges.iter().position(|e| e.name == name)
    }
}

/// Canonical descending choice function on a given edge list: edges into the
/// star vertex map to the star loop, all others to the first outgoing edge of
/// their range vertex that strictly decreases the distance to the star vertex.
pub fn canonical_tau(nv: usize, edges: &[Edge], star_edge: EdgeId) -> Option<Vec<EdgeId>> {
    let star_vertex = edges[star_edge].source;
    let mut incoming = vec![Vec::new(); nv];
    for e in edges {
        incoming[e.range].push(e.source);
    }
    let mut dist = vec![usize::MAX; nv];
    let mut queue = std::collections::VecDeque::new();
    dist[star_vertex] = 0;
    queue.push_back(star_vertex);
    while let Some(v) = queue.pop_front() {
        for &u in &incoming[v] {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    let mut tau = Vec::with_capacity(edges.len());
    for e in edges {
        if e.range == star_vertex {
            tau.push(star_edge);
        } else {
            let d = dist[e.range];
            if d == usize::MAX {
                return None;
            }
            let pick = edges
                .iter()
                .position(|f| f.source == e.range && dist[f.range] < d)?;
            tau.push(pick);
        }
    }
    Some(tau)
}

/// Maximal horizontal set on a given edge list: all ordered pairs of distinct
/// edges with a common source, lexicographically smaller index oriented `+`.
pub fn maximal_horizontal(edges: &[Edge]) -> Vec<HorizontalPair> {
    let mut out = Vec::new();
    for (i, a) in edges.iter().enumerate() {
        for (j, b) in edges.iter().enumerate() {
            if i != j && a.source == b.source {
                out.push(HorizontalPair {
                    from: i,
                    to: j,
                    orientation: if i < j {
                        Orientation::Positive
                    } else {
                        Orientation::Negative
                    },
                });
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// structured-text graph description (JSON)

#[derive(Debug, Serialize, Deserialize)]
pub struct GraphSpecFile {
    pub vertices: Vec<String>,
    /// (edge id, source vertex, range vertex)
    pub edges: Vec<(String, String, String)>,
    pub star_edge: String,
    pub tau: BTreeMap<String, String>,
    /// (from edge, to edge, "+" or "-")
    pub horizontal: Vec<(String, String, String)>,
    pub rho: f64,
}

/// Builds a validated graph from its structured description.
pub fn build_graph(spec: &GraphSpecFile) -> Result<BratteliGraph, GraphError> {
    let vertex_index: BTreeMap<&str, usize> = spec
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();
    let mut edges = Vec::new();
    let mut edge_index = BTreeMap::new();
    for (name, s, r) in &spec.edges {
        let &source = vertex_index
            .get(s.as_str())
            .ok_or_else(|| GraphError::UnknownId(s.clone()))?;
        let &range = vertex_index
            .get(r.as_str())
            .ok_or_else(|| GraphError::UnknownId(r.clone()))?;
        if edge_index.insert(name.clone(), edges.len()).is_some() {
            return Err(GraphError::Malformed(format!("duplicate edge id {name}")));
        }
        edges.push(Edge {
            name: name.clone(),
            source,
            range,
        });
    }
    let star_edge = *edge_index
        .get(&spec.star_edge)
        .ok_or_else(|| GraphError::UnknownId(spec.star_edge.clone()))?;
    let mut tau = vec![usize::MAX; edges.len()];
    for (from, to) in &spec.tau {
        let &f = edge_index
            .get(from)
            .ok_or_else(|| GraphError::UnknownId(from.clone()))?;
        let &t = edge_index
            .get(to)
            .ok_or_else(|| GraphError::UnknownId(to.clone()))?;
        tau[f] = t;
    }
    if tau.iter().any(|&t| t == usize::MAX) {
        return Err(GraphError::TauInvalid("tau is not total on edges".into()));
    }
    let mut horizontal = Vec::new();
    for (from, to, sign) in &spec.horizontal {
        let &f = edge_index
            .get(from)
            .ok_or_else(|| GraphError::UnknownId(from.clone()))?;
        let &t = edge_index
            .get(to)
            .ok_or_else(|| GraphError::UnknownId(to.clone()))?;
        let orientation = match sign.as_str() {
            "+" => Orientation::Positive,
            "-" => Orientation::Negative,
            other => {
                return Err(GraphError::Malformed(format!(
                    "orientation must be \"+\" or \"-\", got {other:?}"
                )))
            }
        };
        horizontal.push(HorizontalPair {
            from: f,
            to: t,
            orientation,
        });
    }
    BratteliGraph::new(spec.vertices.clone(), edges, star_edge, tau, horizontal, spec.rho)
}

pub fn parse_graph_file(text: &str) -> Result<BratteliGraph, GraphError> {
    let spec: GraphSpecFile =
        serde_json::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))?;
    build_graph(&spec)
}
