//! Ready-made example graphs and substitutions used throughout the test
//! suites and the documentation.

use crate::graph::{
    maximal_horizontal, BratteliGraph, Edge, GraphError, HorizontalPair, Orientation,
};
use crate::tiling::{Substitution1D, SubstitutionRules, TilingError};

/// One vertex, two loop edges `0` (the star loop) and `1`, `tau == 0`,
/// both horizontal pairs, `rho = 1/2`. Path space is the binary Cantor set.
pub fn dyadic_graph() -> BratteliGraph {
    dyadic_graph_with_rho(0.5).expect("valid fixture")
}

pub fn dyadic_graph_with_rho(rho: f64) -> Result<BratteliGraph, GraphError> {
    let edges = vec![
        Edge {
            name: "0".into(),
            source: 0,
            range: 0,
        },
        Edge {
            name: "1".into(),
            source: 0,
            range: 0,
        },
    ];
    BratteliGraph::new(
        vec!["v".into()],
        edges,
        0,
        vec![0, 0],
        vec![
            HorizontalPair {
                from: 0,
                to: 1,
                orientation: Orientation::Positive,
            },
            HorizontalPair {
                from: 1,
                to: 0,
                orientation: Orientation::Negative,
            },
        ],
        rho,
    )
}

/// Single-vertex graph with `m` loop edges, star loop first, maximal
/// horizontal set. Generalizes the dyadic fixture.
pub fn loop_graph(m: usize, rho: f64) -> BratteliGraph {
    let edges: Vec<Edge> = (0..m)
        .map(|i| Edge {
            name: format!("{i}"),
            source: 0,
            range: 0,
        })
        .collect();
    let horizontal = maximal_horizontal(&edges);
    BratteliGraph::new(vec!["v".into()], edges, 0, vec![0; m], horizontal, rho)
        .expect("valid fixture")
}

/// Graph of the Fibonacci substitution a -> ab, b -> a with matrix
/// [[1,1],[1,0]]; maximal horizontal set (the two ordered pairs at vertex a).
pub fn fibonacci_graph(rho: f64) -> BratteliGraph {
    // edges: e0 = a->a (star), e1 = b->a, e2 = a->b
    let edges = vec![
        Edge {
            name: "aa".into(),
            source: 0,
            range: 0,
        },
        Edge {
            name: "ba".into(),
            source: 1,
            range: 0,
        },
        Edge {
            name: "ab".into(),
            source: 0,
            range: 1,
        },
    ];
    let horizontal = maximal_horizontal(&edges);
    BratteliGraph::new(
        vec!["a".into(), "b".into()],
        edges,
        0,
        vec![0, 0, 1],
        horizontal,
        rho,
    )
    .expect("valid fixture")
}

/// Graph of the Tribonacci substitution a -> ab, b -> ac, c -> a with matrix
/// [[1,1,1],[1,0,0],[0,1,0]]; maximal horizontal set.
pub fn tribonacci_graph(rho: f64) -> BratteliGraph {
    // edges: e0 = a->a (star), e1 = b->a, e2 = a->b, e3 = c->b, e4 = a->c
    let edges = vec![
        Edge {
            name: "aa".into(),
            source: 0,
            range: 0,
        },
        Edge {
            name: "ba".into(),
            source: 1,
            range: 0,
        },
        Edge {
            name: "ab".into(),
            source: 0,
            range: 1,
        },
        Edge {
            name: "cb".into(),
            source: 2,
            range: 1,
        },
        Edge {
            name: "ac".into(),
            source: 0,
            range: 2,
        },
    ];
    let horizontal = maximal_horizontal(&edges);
    BratteliGraph::new(
        vec!["a".into(), "b".into(), "c".into()],
        edges,
        0,
        vec![0, 0, 1, 1, 3],
        horizontal,
        rho,
    )
    .expect("valid fixture")
}

/// Two-vertex graph with matrix [[2,1],[1,2]] (eigenvalues 3 and 1) and
/// maximal horizontal set, `rho = 1/2`. The eigenvalue-1 mode has zero
/// coordinate sum, so its edge-count coefficient vanishes identically.
pub fn ev1_graph() -> BratteliGraph {
    // edges from vertex 0: f0 = 0->0 (star), f1 = 0->0, f2 = 0->1
    // edges from vertex 1: f3 = 1->1, f4 = 1->1, f5 = 1->0
    let edges = vec![
        Edge {
            name: "p".into(),
            source: 0,
            range: 0,
        },
        Edge {
            name: "q".into(),
            source: 0,
            range: 0,
        },
        Edge {
            name: "r".into(),
            source: 0,
            range: 1,
        },
        Edge {
            name: "s".into(),
            source: 1,
            range: 1,
        },
        Edge {
            name: "t".into(),
            source: 1,
            range: 1,
        },
        Edge {
            name: "u".into(),
            source: 1,
            range: 0,
        },
    ];
    let horizontal = maximal_horizontal(&edges);
    BratteliGraph::new(
        vec!["x".into(), "y".into()],
        edges,
        0,
        vec![0, 0, 5, 5, 5, 0],
        horizontal,
        0.5,
    )
    .expect("valid fixture")
}

/// Three-vertex graph with matrix [[1,1,1],[1,1,1],[1,0,2]] (eigenvalues
/// 3, 1, 0) and the horizontal set restricted to vertices 0 and 1, so that
/// the eigenvalue-1 edge-count coefficient is nonzero and the heat trace
/// carries a genuine logarithmic term. `rho = 1/2`.
pub fn log_term_graph() -> BratteliGraph {
    let spec = [
        // (source, range)
        (0, 0), // g0 star
        (0, 1), // g1
        (0, 2), // g2
        (1, 0), // g3
        (1, 1), // g4
        (1, 2), // g5
        (2, 0), // g6
        (2, 2), // g7
        (2, 2), // g8
    ];
    let edges: Vec<Edge> = spec
        .iter()
        .enumerate()
        .map(|(i, &(s, r))| Edge {
            name: format!("g{i}"),
            source: s,
            range: r,
        })
        .collect();
    // tau: edges into vertex 0 -> star; into 1 -> g3; into 2 -> g6
    let tau = vec![0, 3, 6, 0, 3, 6, 0, 6, 6];
    // horizontal pairs only at vertices 0 and 1
    let mut horizontal = Vec::new();
    for group in [[0usize, 1, 2], [3, 4, 5]] {
        for &i in &group {
            for &j in &group {
                if i != j {
                    horizontal.push(HorizontalPair {
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
    }
    BratteliGraph::new(
        vec!["x".into(), "y".into(), "z".into()],
        edges,
        0,
        tau,
        horizontal,
        0.5,
    )
    .expect("valid fixture")
}

pub fn fibonacci_rules() -> SubstitutionRules {
    SubstitutionRules {
        alphabet: vec!["a".into(), "b".into()],
        rules: vec![
            ("a".into(), vec!["a".into(), "b".into()]),
            ("b".into(), vec!["a".into()]),
        ],
        h_tr: None,
        h_lg: None,
    }
}

pub fn tribonacci_rules() -> SubstitutionRules {
    SubstitutionRules {
        alphabet: vec!["a".into(), "b".into(), "c".into()],
        rules: vec![
            ("a".into(), vec!["a".into(), "b".into()]),
            ("b".into(), vec!["a".into(), "c".into()]),
            ("c".into(), vec!["a".into()]),
        ],
        h_tr: None,
        h_lg: None,
    }
}

pub fn thue_morse_rules() -> SubstitutionRules {
    SubstitutionRules {
        alphabet: vec!["a".into(), "b".into()],
        rules: vec![
            ("a".into(), vec!["a".into(), "b".into()]),
            ("b".into(), vec!["b".into(), "a".into()]),
        ],
        h_tr: None,
        h_lg: None,
    }
}

pub fn fibonacci_substitution() -> Result<Substitution1D, TilingError> {
    Substitution1D::build(&fibonacci_rules())
}

pub fn tribonacci_substitution() -> Result<Substitution1D, TilingError> {
    Substitution1D::build(&tribonacci_rules())
}
