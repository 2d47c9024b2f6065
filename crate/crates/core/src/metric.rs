//! Connes spectral distance on path space in closed form, a Dijkstra oracle
//! on the finite approximation graph, and the Lipschitz comparison between a
//! diagram and its telescopings.

use std::collections::{BinaryHeap, HashMap};

use thiserror::Error;

use crate::graph::{BratteliGraph, EdgeId, PathWord, WordMode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("horizontal structure does not connect the words (edges {0} and {1})")]
    DisconnectedH(String, String),
    #[error("oracle target unreachable within depth {0}")]
    Unreachable(usize),
}

/// Closed-form spectral distance with an explicit bound on the contribution
/// of levels beyond the inspected depth.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceResult {
    pub value: f64,
    pub tail_bound: f64,
    /// first index at which the words differ (1-based); 0 for equal words
    pub n_xy: usize,
    /// length of a shortest horizontal path between the differing edges
    pub c_xy: usize,
}

/// `d(x, y) = c_xy rho^{n_xy} + sum_{m > n_xy} (b_m(x) + b_m(y)) rho^m`,
/// where `b_m(z)` is the horizontal path length needed to undo a deviation
/// from the choice function at position `m` (i.e. `z_m != tau(z_{m-1})`); for
/// a maximal horizontal set each deviation costs exactly one level-`m` edge.
/// Tau-extended words have exact zero tails; truncated words of length `N`
/// carry the geometric bound `rho^{N+1}/(1 - rho)` each from their first
/// unknown position.
pub fn connes_distance(
    g: &BratteliGraph,
    x: &PathWord,
    y: &PathWord,
    depth: usize,
) -> Result<DistanceResult, MetricError> {
    let xe = materialize(g, x, depth + 1);
    let ye = materialize(g, y, depth + 1);
    let rho = g.rho;

    let mut n_xy = 0usize;
    for i in 0..depth {
        if xe.edges.get(i) != ye.edges.get(i) {
            n_xy = i + 1;
            break;
        }
    }
    let tail_bound = truncation_tail(g, x, depth) + truncation_tail(g, y, depth);
    if n_xy == 0 {
        return Ok(DistanceResult {
            value: 0.0,
            tail_bound,
            n_xy: 0,
            c_xy: 0,
        });
    }

    let ex = xe.edges[n_xy - 1];
    let ey = ye.edges[n_xy - 1];
    if g.edges[ex].source != g.edges[ey].source {
        return Err(MetricError::DisconnectedH(
            g.edges[ex].name.clone(),
            g.edges[ey].name.clone(),
        ));
    }
    let c_xy = horizontal_path_length(g, ex, ey).ok_or_else(|| {
        MetricError::DisconnectedH(g.edges[ex].name.clone(), g.edges[ey].name.clone())
    })?;

    let mut value = c_xy as f64 * rho.powi(n_xy as i32);
    for m in (n_xy + 1)..=depth {
        value += (deviation_cost(g, &xe, m)? + deviation_cost(g, &ye, m)?) * rho.powi(m as i32);
    }
    Ok(DistanceResult {
        value,
        tail_bound,
        n_xy,
        c_xy,
    })
}

/// Horizontal path length from the canonical continuation to the actual edge
/// at position `m` (zero when the word follows the choice function there).
fn deviation_cost(g: &BratteliGraph, w: &PathWord, m: usize) -> Result<f64, MetricError> {
    if m < 2 || m > w.edges.len() {
        return Ok(0.0);
    }
    let canonical = g.tau[w.edges[m - 2]];
    let actual = w.edges[m - 1];
    if canonical == actual {
        return Ok(0.0);
    }
    horizontal_path_length(g, canonical, actual)
        .map(|c| c as f64)
        .ok_or_else(|| {
            MetricError::DisconnectedH(
                g.edges[canonical].name.clone(),
                g.edges[actual].name.clone(),
            )
        })
}

fn materialize(g: &BratteliGraph, w: &PathWord, depth: usize) -> PathWord {
    match w.mode {
        WordMode::TauExtended => g.tau_extend(w, depth),
        WordMode::Truncated => w.clone(),
    }
}

fn truncation_tail(g: &BratteliGraph, w: &PathWord, depth: usize) -> f64 {
    match w.mode {
        WordMode::TauExtended => 0.0,
        WordMode::Truncated => {
            // the deviation at position m needs edges m-1 and m, so the
            // first unknown position is len + 1
            let first_unknown = (w.len() + 1).min(depth + 1);
            g.rho.powi(first_unknown as i32) / (1.0 - g.rho)
        }
    }
}

/// Shortest horizontal path between two edges sharing a source (breadth
/// first search on the horizontal pair graph).
pub fn horizontal_path_length(g: &BratteliGraph, from: EdgeId, to: EdgeId) -> Option<usize> {
    if from == to {
        return Some(0);
    }
    let ne = g.edge_count();
    let mut adjacency = vec![Vec::new(); ne];
    for h in &g.horizontal {
        adjacency[h.from].push(h.to);
    }
    let mut dist = vec![usize::MAX; ne];
    let mut queue = std::collections::VecDeque::new();
    dist[from] = 0;
    queue.push_back(from);
    while let Some(e) = queue.pop_front() {
        for &f in &adjacency[e] {
            if dist[f] == usize::MAX {
                dist[f] = dist[e] + 1;
                if f == to {
                    return Some(dist[f]);
                }
                queue.push_back(f);
            }
        }
    }
    None
}

/// Dijkstra shortest path on the approximation graph restricted to levels
/// `<= depth`, with level-`n` edges of length `rho^n`. Independent oracle for
/// the closed-form distance.
pub fn geodesic_oracle(
    g: &BratteliGraph,
    x: &PathWord,
    y: &PathWord,
    depth: usize,
) -> Result<f64, MetricError> {
    assert!(depth <= 14, "oracle graphs grow exponentially with depth");
    let xk = canonical_key(g, x, depth);
    let yk = canonical_key(g, y, depth);
    if xk == yk {
        return Ok(0.0);
    }

    let mut index: HashMap<Vec<EdgeId>, usize> = HashMap::new();
    let mut adjacency: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut intern = |key: Vec<EdgeId>, adjacency: &mut Vec<Vec<(usize, f64)>>| -> usize {
        if let Some(&i) = index.get(&key) {
            return i;
        }
        let i = adjacency.len();
        adjacency.push(Vec::new());
        index.insert(key, i);
        i
    };

    // enumerate E_n for n <= depth
    let mut prefixes: Vec<Vec<EdgeId>> = vec![Vec::new()];
    for n in 1..=depth {
        let mut next = Vec::new();
        for prefix in &prefixes {
            let end = prefix.last().map(|&e| g.edges[e].range);
            for h in &g.horizontal {
                let v = g.edges[h.from].source;
                if let Some(w) = end {
                    if w != v {
                        continue;
                    }
                }
                if end.is_none() || end == Some(v) {
                    let mut a = prefix.clone();
                    a.push(h.from);
                    let mut b = prefix.clone();
                    b.push(h.to);
                    let ka = canonical_edges(g, a);
                    let kb = canonical_edges(g, b);
                    let ia = intern(ka, &mut adjacency);
                    let ib = intern(kb, &mut adjacency);
                    let len = g.rho.powi(n as i32);
                    adjacency[ia].push((ib, len));
                }
            }
            // grow prefixes for the next level
            let candidates: Vec<EdgeId> = match prefix.last() {
                None => (0..g.edge_count()).collect(),
                Some(&last) => g.out_edges(g.edges[last].range).to_vec(),
            };
            for e in candidates {
                let mut q = prefix.clone();
                q.push(e);
                next.push(q);
            }
        }
        prefixes = next;
    }

    let &start = index.get(&xk).ok_or(MetricError::Unreachable(depth))?;
    let &goal = index.get(&yk).ok_or(MetricError::Unreachable(depth))?;

    // Dijkstra
    #[derive(PartialEq)]
    struct Entry(f64, usize);
    impl Eq for Entry {}
    impl PartialOrd for Entry {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Entry {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            // reversed for a min-heap
            other.0.partial_cmp(&self.0).unwrap()
        }
    }
    let mut dist = vec![f64::INFINITY; adjacency.len()];
    let mut heap = BinaryHeap::new();
    dist[start] = 0.0;
    heap.push(Entry(0.0, start));
    while let Some(Entry(d, u)) = heap.pop() {
        if u == goal {
            return Ok(d);
        }
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adjacency[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Entry(nd, v));
            }
        }
    }
    Err(MetricError::Unreachable(depth))
}

/// Minimal explicit representative of a tau-extended word: trailing edges
/// that follow the choice function are dropped.
fn canonical_key(g: &BratteliGraph, w: &PathWord, depth: usize) -> Vec<EdgeId> {
    let full = g.tau_extend(w, depth);
    canonical_edges(g, full.edges)
}

fn canonical_edges(g: &BratteliGraph, mut edges: Vec<EdgeId>) -> Vec<EdgeId> {
    while edges.len() >= 2 {
        let k = edges.len();
        if g.tau[edges[k - 2]] == edges[k - 1] {
            edges.pop();
        } else {
            break;
        }
    }
    edges
}

/// Observed and theoretical Lipschitz constants between a diagram's distance
/// and its `p`-telescoping's.
#[derive(Debug, Clone)]
pub struct LipschitzReport {
    /// observed min and max of `d / d_p` over the samples
    pub observed_low: f64,
    pub observed_high: f64,
    /// theoretical sandwich `low * d_p <= d <= high * d_p`
    pub bound_low: f64,
    pub bound_high: f64,
    pub all_pass: bool,
    pub samples: usize,
}

/// Checks the Lipschitz equivalence `low * d_p <= d <= high * d_p` between
/// the distances of `g` and of its `p`-telescoping on the given word pairs.
/// The constants come from the extreme ratios of horizontal path lengths:
/// with `c_p = min c/c_p` and `C_p = max c/c_p` over same-source edge pairs,
/// the sandwich holds with `low = min(c_p, 1)` and
/// `high = p * rho^{1-p} * max(C_p, p)` (level-`n` terms of `d` fall between
/// the block-level terms of `d_p` scaled by `rho^{p-1}` and `1`, with up to
/// `p` of them per block).
pub fn telescoping_lipschitz_check(
    g: &BratteliGraph,
    p: usize,
    pairs: &[(PathWord, PathWord)],
    depth: usize,
) -> Result<LipschitzReport, MetricError> {
    assert!(p >= 1);
    let tele = g.telescope(p).expect("telescoping a valid graph");

    // ratio extremes over all same-source pairs of telescoped edges
    let mut c_low = f64::INFINITY;
    let mut c_high = 0.0_f64;
    let tele_paths = g.enumerate_paths(p);
    for (i, a) in tele_paths.iter().enumerate() {
        for (j, b) in tele_paths.iter().enumerate() {
            if i == j || g.edges[a[0]].source != g.edges[b[0]].source {
                continue;
            }
            let split = (0..p).find(|&k| a[k] != b[k]);
            let Some(k) = split else { continue };
            let (Some(c), Some(cp)) = (
                horizontal_path_length(g, a[k], b[k]),
                horizontal_path_length(&tele, i, j),
            ) else {
                continue;
            };
            if cp == 0 {
                continue;
            }
            let ratio = c as f64 / cp as f64;
            c_low = c_low.min(ratio);
            c_high = c_high.max(ratio);
        }
    }
    if !c_low.is_finite() {
        c_low = 1.0;
        c_high = 1.0;
    }
    let (bound_low, bound_high) = if p == 1 {
        (1.0, 1.0)
    } else {
        (
            c_low.min(1.0),
            p as f64 * g.rho.powi(1 - p as i32) * c_high.max(p as f64),
        )
    };

    let mut observed_low = f64::INFINITY;
    let mut observed_high = 0.0_f64;
    let mut all_pass = true;
    let tele_depth = depth / p;
    for (x, y) in pairs {
        let d = connes_distance(g, x, y, depth)?;
        let xt = telescope_word(g, x, p, tele_depth, &tele);
        let yt = telescope_word(g, y, p, tele_depth, &tele);
        let dp = connes_distance(&tele, &xt, &yt, tele_depth)?;
        if d.value == 0.0 && dp.value == 0.0 {
            continue;
        }
        let ratio = d.value / dp.value;
        observed_low = observed_low.min(ratio);
        observed_high = observed_high.max(ratio);
        let slack = 1e-9;
        if ratio < bound_low - slack || ratio > bound_high + slack {
            all_pass = false;
        }
    }
    Ok(LipschitzReport {
        observed_low,
        observed_high,
        bound_low,
        bound_high,
        all_pass,
        samples: pairs.len(),
    })
}

/// Rewrites a word over `g` as a word of `p`-blocks over the telescoping.
fn telescope_word(
    g: &BratteliGraph,
    w: &PathWord,
    p: usize,
    blocks: usize,
    tele: &BratteliGraph,
) -> PathWord {
    let full = g.tau_extend(w, blocks * p);
    let mut edges = Vec::with_capacity(blocks);
    for chunk in full.edges.chunks(p).take(blocks) {
        let names: Vec<&str> = chunk.iter().map(|&e| g.edges[e].name.as_str()).collect();
        let name = names.join(".");
        edges.push(tele.edge_index(&name).expect("telescoped edge exists"));
    }
    PathWord::tau_extended(edges)
}
