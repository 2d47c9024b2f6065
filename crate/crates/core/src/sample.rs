//! Seeded random path sampling used by the metric checks and the CLI.

use rand::Rng;

use crate::graph::{BratteliGraph, PathWord, VertexId};

/// Uniform random edge walk of the given length starting at `v`.
pub fn random_word_from<R: Rng>(
    g: &BratteliGraph,
    v: VertexId,
    len: usize,
    rng: &mut R,
) -> PathWord {
    let mut edges = Vec::with_capacity(len);
    let mut at = v;
    for _ in 0..len {
        let out = g.out_edges(at);
        let e = out[rng.gen_range(0..out.len())];
        edges.push(e);
        at = g.edges[e].range;
    }
    PathWord::tau_extended(edges)
}

/// Two random tau-extended words sharing a start vertex (so their spectral
/// distance is finite).
pub fn random_pair<R: Rng>(g: &BratteliGraph, len: usize, rng: &mut R) -> (PathWord, PathWord) {
    let v = rng.gen_range(0..g.vertices.len());
    (
        random_word_from(g, v, len, rng),
        random_word_from(g, v, len, rng),
    )
}

/// Three random words from a common start vertex.
pub fn random_triple<R: Rng>(
    g: &BratteliGraph,
    len: usize,
    rng: &mut R,
) -> (PathWord, PathWord, PathWord) {
    let v = rng.gen_range(0..g.vertices.len());
    (
        random_word_from(g, v, len, rng),
        random_word_from(g, v, len, rng),
        random_word_from(g, v, len, rng),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use rand::SeedableRng;

    #[test]
    fn sampled_words_are_paths() {
        let g = fixtures::tribonacci_graph(0.5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let w = random_word_from(&g, 0, 10, &mut rng);
            for pair in w.edges.windows(2) {
                assert_eq!(g.edges[pair[0]].range, g.edges[pair[1]].source);
            }
        }
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let g = fixtures::fibonacci_graph(0.5);
        let mut a = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut b = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            assert_eq!(random_pair(&g, 8, &mut a), random_pair(&g, 8, &mut b));
        }
    }
}
