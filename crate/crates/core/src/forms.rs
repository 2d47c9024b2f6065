//! Level-`n` quadratic forms on path space, their limits, the Markov
//! contraction check, and the circle picture of the one-vertex two-loop
//! graph.
//!
//! Level convention: the level-`n` form averages over the horizontal pairs
//! whose paths share a prefix of length `n-1` and differ at position `n`,
//! with difference quotients scaled by `rho^{-n}` (the Dirac scale of that
//! level).

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::graph::{BratteliGraph, EdgeId, PathWord};
use crate::numeric::KahanComplex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("level {0} enumeration exceeds the exact-evaluation cap ({1} edges)")]
    DepthExceeded(usize, u64),
    #[error("circle coordinates need a one-vertex two-loop graph")]
    WrongGraph,
    #[error("observable not evaluable on this graph: {0}")]
    BadObservable(String),
}

pub type SampledFn = Arc<dyn Fn(&BratteliGraph, &PathWord) -> Complex64 + Send + Sync>;

/// Function on path space in one of four representations.
#[derive(Clone)]
pub enum ObservableFn {
    /// Locally constant, determined by the first `depth` edges.
    Cylinder {
        depth: usize,
        table: HashMap<Vec<EdgeId>, Complex64>,
    },
    /// Arbitrary evaluator on tau-extended words.
    Sampled { depth: usize, eval: SampledFn },
    /// Trigonometric polynomial `sum c_k e^{2 pi i k x}` pulled back through
    /// the binary circle coordinate; one-vertex two-loop graphs only.
    CircleTrig { coeffs: Vec<(i64, Complex64)> },
    /// Dynamical-eigenfunction evaluator carrying its frequency tag; built by
    /// the tiling module.
    EigenFn {
        beta: crate::numberfield::FieldElement,
        eval: SampledFn,
    },
}

impl std::fmt::Debug for ObservableFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ObservableFn::Cylinder { depth, table } => f
                .debug_struct("Cylinder")
                .field("depth", depth)
                .field("entries", &table.len())
                .finish(),
            ObservableFn::Sampled { depth, .. } => {
                f.debug_struct("Sampled").field("depth", depth).finish()
            }
            ObservableFn::CircleTrig { coeffs } => f
                .debug_struct("CircleTrig")
                .field("modes", &coeffs.len())
                .finish(),
            ObservableFn::EigenFn { beta, .. } => {
                f.debug_struct("EigenFn").field("beta", beta).finish()
            }
        }
    }
}

impl ObservableFn {
    /// Constant function, represented as a depth-0 cylinder table.
    pub fn constant(value: Complex64, _g: &BratteliGraph) -> Self {
        let mut table = HashMap::new();
        table.insert(Vec::new(), value);
        ObservableFn::Cylinder { depth: 0, table }
    }

    /// Indicator of the cylinder set of a finite word.
    pub fn indicator(gamma: Vec<EdgeId>) -> Self {
        let depth = gamma.len();
        let mut table = HashMap::new();
        table.insert(gamma, Complex64::new(1.0, 0.0));
        ObservableFn::Cylinder { depth, table }
    }

    /// Total cylinder table over all words of the given depth.
    pub fn cylinder_table(g: &BratteliGraph, depth: usize, values: &[Complex64]) -> Self {
        let words = g.enumerate_paths(depth);
        assert_eq!(words.len(), values.len(), "table must be total");
        let table = words.into_iter().zip(values.iter().copied()).collect();
        ObservableFn::Cylinder { depth, table }
    }

    pub fn circle_mode(k: i64) -> Self {
        ObservableFn::CircleTrig {
            coeffs: vec![(k, Complex64::new(1.0, 0.0))],
        }
    }

    /// Extra word depth the observable needs beyond the level being summed.
    pub fn depth_needed(&self) -> usize {
        match self {
            ObservableFn::Cylinder { depth, .. } => *depth,
            ObservableFn::Sampled { depth, .. } => *depth,
            ObservableFn::CircleTrig { .. } => 0,
            ObservableFn::EigenFn { .. } => 0,
        }
    }

    pub fn eval(&self, g: &BratteliGraph, word: &PathWord) -> Complex64 {
        match self {
            ObservableFn::Cylinder { depth, table } => {
                debug_assert!(word.len() >= *depth, "word shorter than cylinder depth");
                table
                    .get(&word.edges[..*depth])
                    .copied()
                    .unwrap_or_else(|| Complex64::new(0.0, 0.0))
            }
            ObservableFn::Sampled { eval, .. } => eval(g, word),
            ObservableFn::CircleTrig { coeffs } => {
                let x = circle_embed(g, word).expect("circle observable on a non-circle graph");
                let mut acc = Complex64::new(0.0, 0.0);
                for &(k, c) in coeffs {
                    acc += c * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 * x);
                }
                acc
            }
            ObservableFn::EigenFn { eval, .. } => eval(g, word),
        }
    }

    /// Real-valued view of the observable (imaginary parts dropped).
    pub fn real_part(self) -> ObservableFn {
        match self {
            ObservableFn::Cylinder { depth, table } => ObservableFn::Cylinder {
                depth,
                table: table
                    .into_iter()
                    .map(|(k, v)| (k, Complex64::new(v.re, 0.0)))
                    .collect(),
            },
            other => other,
        }
    }
}

/// Binary circle coordinate of a tau-extended word on the one-vertex
/// two-loop graph: `x = sum_i bit_i 2^{-i}` with the star loop reading 0.
/// (The tau tail is all zeros, so finite words give exact dyadic rationals.)
pub fn circle_embed(g: &BratteliGraph, word: &PathWord) -> Result<f64, FormError> {
    if g.vertices.len() != 1 || g.edge_count() != 2 {
        return Err(FormError::WrongGraph);
    }
    let mut x = 0.0;
    let mut scale = 1.0;
    for &e in &word.edges {
        scale *= 0.5;
        if e != g.star_edge {
            x += scale;
        }
    }
    Ok(x)
}

/// The level-`n` form
/// `q_n(f, h) = (1/#E_n) sum_{e in E_n} conj(delta_e f) delta_e h` with
/// `delta_e f = (f(r(e)) - f(s(e))) / rho^n`, by exact enumeration.
pub fn qn_form(
    g: &BratteliGraph,
    f: &ObservableFn,
    h: &ObservableFn,
    n: usize,
) -> Result<Complex64, FormError> {
    assert!(n >= 1);
    let total = g.horizontal_count(n).to_f64().unwrap();
    if total > 9e6 {
        return Err(FormError::DepthExceeded(n, total as u64));
    }
    let depth = n + f.depth_needed().max(h.depth_needed());
    let scale = g.rho.powi(-(n as i32));
    let mut acc = KahanComplex::new();
    let mut source = PathWord::tau_extended(Vec::with_capacity(depth));
    let mut range = PathWord::tau_extended(Vec::with_capacity(depth));
    for_each_path(g, n - 1, &mut |prefix| {
        let end = prefix.last().map(|&e| g.edges[e].range);
        for pair in &g.horizontal {
            let v = g.edges[pair.from].source;
            if let Some(w) = end {
                if w != v {
                    continue;
                }
            }
            build_word(g, prefix, pair.from, depth, &mut source);
            build_word(g, prefix, pair.to, depth, &mut range);
            let df = (f.eval(g, &range) - f.eval(g, &source)) * scale;
            let dh = (h.eval(g, &range) - h.eval(g, &source)) * scale;
            acc.add(df.conj() * dh);
        }
    });
    Ok(acc.value() / total)
}

fn build_word(g: &BratteliGraph, prefix: &[EdgeId], last: EdgeId, depth: usize, out: &mut PathWord) {
    out.edges.clear();
    out.edges.extend_from_slice(prefix);
    out.edges.push(last);
    let mut cur = last;
    while out.edges.len() < depth {
        cur = g.tau[cur];
        out.edges.push(cur);
    }
}

/// Depth-first traversal of all paths of length `n` with a reusable buffer.
pub fn for_each_path(g: &BratteliGraph, n: usize, visit: &mut dyn FnMut(&[EdgeId])) {
    let mut buffer = Vec::with_capacity(n);
    walk(g, n, &mut buffer, visit);
}

fn walk(g: &BratteliGraph, n: usize, buffer: &mut Vec<EdgeId>, visit: &mut dyn FnMut(&[EdgeId])) {
    if buffer.len() == n {
        visit(buffer);
        return;
    }
    match buffer.last() {
        None => {
            for e in 0..g.edge_count() {
                buffer.push(e);
                walk(g, n, buffer, visit);
                buffer.pop();
            }
        }
        Some(&last) => {
            let from = g.edges[last].range;
            // out_edges are cheap to copy as indices
            for &e in g.out_edges(from) {
                buffer.push(e);
                walk(g, n, buffer, visit);
                buffer.pop();
            }
        }
    }
}

/// `q_n` sequence with an extrapolated limit and convergence verdict.
#[derive(Debug, Clone)]
pub struct FormReport {
    pub values: Vec<Complex64>,
    pub limit: Complex64,
    pub converged: bool,
    pub cauchy: Vec<f64>,
}

/// Runs `q_n` up to level `N`, Aitken-extrapolates the tail, and flags
/// convergence when the last four Cauchy differences drop below
/// `1e-6 * scale`. Non-convergence is reported, not raised.
pub fn q_limit(
    g: &BratteliGraph,
    f: &ObservableFn,
    h: &ObservableFn,
    levels: usize,
) -> Result<FormReport, FormError> {
    assert!(levels >= 3);
    let mut values = Vec::with_capacity(levels);
    for n in 1..=levels {
        values.push(qn_form(g, f, h, n)?);
    }
    let m = values.len();
    let (x0, x1, x2) = (values[m - 3], values[m - 2], values[m - 1]);
    let denom = x2 - x1 * 2.0 + x0;
    let limit = if denom.norm() > 1e-14 * x2.norm().max(1e-30) {
        x2 - (x2 - x1) * (x2 - x1) / denom
    } else {
        x2
    };
    let scale = values
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.norm()))
        .max(1e-30);
    let cauchy: Vec<f64> = values
        .windows(2)
        .map(|w| (w[1] - w[0]).norm())
        .rev()
        .take(4)
        .collect();
    let converged = cauchy.iter().all(|&d| d < 1e-6 * scale);
    Ok(FormReport {
        values,
        limit,
        converged,
        cauchy,
    })
}

/// Smooth unit contraction approximating the restriction to [0,1]: identity
/// on [0,1], quadratic knees of width `eps`, constant outside; slopes lie in
/// [0,1] so composing with it can only shrink difference quotients.
pub fn unit_contraction(eps: f64, t: f64) -> f64 {
    if t >= 0.0 && t <= 1.0 {
        t
    } else if t > 1.0 {
        if t >= 1.0 + eps {
            1.0 + eps / 2.0
        } else {
            let u = t - 1.0;
            1.0 + u - u * u / (2.0 * eps)
        }
    } else if t <= -eps {
        -eps / 2.0
    } else {
        t + t * t / (2.0 * eps)
    }
}

/// Markov-property check at level `n`: the form does not increase when the
/// (real-valued) observable is composed with the unit contraction.
pub fn markov_check(
    g: &BratteliGraph,
    f: &ObservableFn,
    n: usize,
    eps: f64,
) -> Result<bool, FormError> {
    let clipped = compose_contraction(f.clone(), eps);
    let original = qn_form(g, f, f, n)?.re;
    let contracted = qn_form(g, &clipped, &clipped, n)?.re;
    Ok(contracted <= original + 1e-12 * original.abs().max(1.0))
}

fn compose_contraction(f: ObservableFn, eps: f64) -> ObservableFn {
    match f {
        ObservableFn::Cylinder { depth, table } => ObservableFn::Cylinder {
            depth,
            table: table
                .into_iter()
                .map(|(k, v)| (k, Complex64::new(unit_contraction(eps, v.re), 0.0)))
                .collect(),
        },
        other => {
            let inner = Arc::new(other);
            let inner2 = Arc::clone(&inner);
            ObservableFn::Sampled {
                depth: inner.depth_needed(),
                eval: Arc::new(move |g, w| {
                    Complex64::new(unit_contraction(eps, inner2.eval(g, w).re), 0.0)
                }),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn circle_embedding_binary_expansion() {
        let g = fixtures::dyadic_graph();
        let zero = g.tau_extend(&PathWord::tau_extended(vec![0]), 4);
        assert_eq!(circle_embed(&g, &zero).unwrap(), 0.0);
        let half = g.tau_extend(&PathWord::tau_extended(vec![1]), 4);
        assert_eq!(circle_embed(&g, &half).unwrap(), 0.5);
        let three_quarters = g.tau_extend(&PathWord::tau_extended(vec![1, 1]), 5);
        assert_eq!(circle_embed(&g, &three_quarters).unwrap(), 0.75);
    }

    #[test]
    fn circle_embedding_rejects_other_graphs() {
        let g = fixtures::fibonacci_graph(0.5);
        let w = PathWord::tau_extended(vec![0]);
        assert!(matches!(circle_embed(&g, &w), Err(FormError::WrongGraph)));
    }

    #[test]
    fn constant_observable_has_zero_form() {
        let g = fixtures::dyadic_graph();
        let f = ObservableFn::constant(Complex64::new(3.25, 0.0), &g);
        for n in 1..=6 {
            assert_eq!(qn_form(&g, &f, &f, n).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn cylinder_form_vanishes_beyond_depth() {
        let g = fixtures::fibonacci_graph(0.5);
        let gamma = vec![g.star_edge, g.edge_index("ab").unwrap()];
        let f = ObservableFn::indicator(gamma);
        for n in 3..=8 {
            let v = qn_form(&g, &f, &f, n).unwrap();
            assert_eq!(v, Complex64::new(0.0, 0.0), "level {n}");
        }
        // and it is generically nonzero at shallow levels
        assert!(qn_form(&g, &f, &f, 2).unwrap().norm() > 0.0);
    }

    #[test]
    fn dyadic_trig_form_value() {
        // q_n(e^{2 pi i x}) = (2 sin(pi 2^{-n}) 2^n)^2 at rho = 1/2
        let g = fixtures::dyadic_graph();
        let f = ObservableFn::circle_mode(1);
        for n in [5usize, 10, 15] {
            let q = qn_form(&g, &f, &f, n).unwrap();
            let expected = {
                let s = 2.0 * (std::f64::consts::PI * 0.5_f64.powi(n as i32)).sin()
                    * 2.0_f64.powi(n as i32);
                s * s
            };
            assert!(
                (q.re - expected).abs() < 1e-9 * expected,
                "n={n}: {} vs {expected}",
                q.re
            );
            assert!(q.im.abs() < 1e-10);
        }
    }

    #[test]
    fn dyadic_trig_form_converges_to_circle_laplacian() {
        let g = fixtures::dyadic_graph();
        for k in 1..=3i64 {
            let f = ObservableFn::circle_mode(k);
            let report = q_limit(&g, &f, &f, 18).unwrap();
            let expected = (2.0 * std::f64::consts::PI * k as f64).powi(2);
            assert!(
                (report.limit.re - expected).abs() < 1e-5 * expected,
                "k={k}: {} vs {expected}",
                report.limit.re
            );
            assert!(report.converged);
        }
    }

    #[test]
    fn riemann_rate_bound() {
        let g = fixtures::dyadic_graph();
        let kmax = 2i64;
        let f = ObservableFn::CircleTrig {
            coeffs: vec![
                (1, Complex64::new(0.6, 0.0)),
                (2, Complex64::new(0.0, 0.5)),
            ],
        };
        let mut prev: Option<f64> = None;
        for n in 4..=12usize {
            let q = qn_form(&g, &f, &f, n).unwrap().re;
            if let Some(p) = prev {
                let bound =
                    5.0 * 0.25_f64.powi(n as i32 - 1) * (2.0 * std::f64::consts::PI * kmax as f64).powi(4);
                assert!((q - p).abs() <= bound, "n={n}");
            }
            prev = Some(q);
        }
    }

    #[test]
    fn wrong_scale_diverges() {
        // rho = 1/4 makes the circle difference quotients blow up
        let g = fixtures::dyadic_graph_with_rho(0.25).unwrap();
        let f = ObservableFn::circle_mode(1);
        let report = q_limit(&g, &f, &f, 12).unwrap();
        assert!(!report.converged);
        assert!(report.values[11].re > 50.0 * report.values[5].re.max(1.0));
    }

    #[test]
    fn hermitian_and_positive() {
        let g = fixtures::fibonacci_graph(0.5);
        let words = g.enumerate_paths(2);
        let values_f: Vec<Complex64> = (0..words.len())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let values_h: Vec<Complex64> = (0..words.len())
            .map(|i| Complex64::new((i as f64 * 0.73).cos(), (i as f64 * 0.19).sin()))
            .collect();
        let f = ObservableFn::cylinder_table(&g, 2, &values_f);
        let h = ObservableFn::cylinder_table(&g, 2, &values_h);
        for n in 1..=6usize {
            let qfh = qn_form(&g, &f, &h, n).unwrap();
            let qhf = qn_form(&g, &h, &f, n).unwrap();
            assert!((qfh - qhf.conj()).norm() < 1e-12);
            let qff = qn_form(&g, &f, &f, n).unwrap();
            assert!(qff.re >= -1e-12);
            assert!(qff.im.abs() < 1e-12);
        }
    }

    #[test]
    fn contraction_is_a_unit_contraction() {
        let eps = 1e-3;
        let grid: Vec<f64> = (-40..80).map(|i| i as f64 * 0.05).collect();
        for &t in &grid {
            let v = unit_contraction(eps, t);
            assert!(v >= -eps && v <= 1.0 + eps);
            for &u in &grid {
                if u <= t {
                    let d = unit_contraction(eps, t) - unit_contraction(eps, u);
                    assert!(d >= -1e-12 && d <= t - u + 1e-12);
                }
            }
        }
    }

    #[test]
    fn markov_inequality_on_random_tables() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let g = fixtures::fibonacci_graph(0.5);
        let words = g.enumerate_paths(3);
        for _ in 0..10 {
            let values: Vec<Complex64> = (0..words.len())
                .map(|_| Complex64::new(rng.gen_range(-2.0..2.0), 0.0))
                .collect();
            let f = ObservableFn::cylinder_table(&g, 3, &values);
            assert!(markov_check(&g, &f, 10, 1e-3).unwrap());
        }
        // already valued in [0,1]: equality within floating point error
        let values: Vec<Complex64> = (0..words.len())
            .map(|i| Complex64::new((i % 7) as f64 / 7.0, 0.0))
            .collect();
        let f = ObservableFn::cylinder_table(&g, 3, &values);
        let q = qn_form(&g, &f, &f, 8).unwrap().re;
        let clipped = compose_contraction(f, 1e-3);
        let qc = qn_form(&g, &clipped, &clipped, 8).unwrap().re;
        assert!((q - qc).abs() < 1e-12 * q.max(1.0));
    }
}
