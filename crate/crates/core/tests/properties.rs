//! Property tests over randomized inputs: series/closed-form agreement for
//! the zeta function, exactness of field arithmetic, and metric symmetries.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;

use bratteli_spectra::fixtures;
use bratteli_spectra::graph::BratteliGraph;
use bratteli_spectra::metric::connes_distance;
use bratteli_spectra::numberfield::FieldElement;
use bratteli_spectra::sample;
use bratteli_spectra::spectral::zeta::{zeta_closed, zeta_series};
use bratteli_spectra::spectral::Spectra;

fn fixture(choice: u8, rho: f64) -> BratteliGraph {
    match choice % 3 {
        0 => fixtures::dyadic_graph_with_rho(rho).unwrap(),
        1 => fixtures::fibonacci_graph(rho),
        _ => fixtures::tribonacci_graph(rho),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn zeta_series_matches_closed_form(
        choice in 0u8..3,
        rho in 0.15f64..0.85,
        offset in 0.6f64..4.0,
        im in -3.0f64..3.0,
    ) {
        let g = fixture(choice, rho);
        let s = Spectra::analyze(&g).unwrap();
        let z = Complex64::new(s.spectral_dimension() + offset, im);
        let closed = zeta_closed(&s, z).unwrap();
        let (series, tail) = zeta_series(&s, z, 300).unwrap();
        prop_assert!((closed - series).norm() <= tail + 1e-9 * (1.0 + closed.norm()));
    }

    #[test]
    fn horizontal_counts_match_enumeration(choice in 0u8..3, n in 1usize..7) {
        let g = fixture(choice, 0.5);
        prop_assert_eq!(g.horizontal_count(n), g.horizontal_count_enumerated(n));
    }

    #[test]
    fn distance_is_symmetric_and_zero_on_diagonal(
        choice in 0u8..3,
        seed in 0u64..1_000,
    ) {
        let g = fixture(choice, 0.5);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let (x, y) = sample::random_pair(&g, 10, &mut rng);
        let dxy = connes_distance(&g, &x, &y, 10).unwrap();
        let dyx = connes_distance(&g, &y, &x, 10).unwrap();
        prop_assert_eq!(dxy.value, dyx.value);
        let dxx = connes_distance(&g, &x, &x, 10).unwrap();
        prop_assert_eq!(dxx.value, 0.0);
    }

    #[test]
    fn field_arithmetic_is_exact(
        coeffs_a in prop::collection::vec(-20i64..20, 3),
        coeffs_b in prop::collection::vec(-20i64..20, 3),
        coeffs_c in prop::collection::vec(-20i64..20, 3),
    ) {
        let sub = fixtures::tribonacci_substitution().unwrap();
        let field = &sub.field;
        let build = |v: &[i64]| FieldElement::from_coeffs(
            field,
            v.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect(),
        );
        let a = build(&coeffs_a);
        let b = build(&coeffs_b);
        let c = build(&coeffs_c);
        // distributivity, exactly
        let left = a.add(&b).mul(&c);
        let right = a.mul(&c).add(&b.mul(&c));
        prop_assert_eq!(&left, &right);
        // inverses, exactly
        if !a.is_zero() {
            let inv = a.inverse().unwrap();
            prop_assert_eq!(a.mul(&inv), FieldElement::one(field));
        }
        // embeddings respect multiplication to floating accuracy
        for j in 0..field.degree {
            let lhs = a.mul(&b).embed(j);
            let rhs = a.embed(j) * b.embed(j);
            prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn measure_is_additive_at_random_words(
        choice in 0u8..3,
        seed in 0u64..1_000,
        depth in 1usize..6,
    ) {
        let g = fixture(choice, 0.5);
        let s = Spectra::analyze(&g).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let w = sample::random_word_from(&g, 0, depth, &mut rng);
        let parent = bratteli_spectra::spectral_measure(&s, &w);
        let end = g.edges[*w.edges.last().unwrap()].range;
        let mut children = 0.0;
        for &e in g.out_edges(end) {
            let mut edges = w.edges.clone();
            edges.push(e);
            children += bratteli_spectra::spectral_measure(
                &s,
                &bratteli_spectra::PathWord::tau_extended(edges),
            );
        }
        prop_assert!((parent - children).abs() <= 1e-12);
    }

    #[test]
    fn tau_extension_is_idempotent(choice in 0u8..3, seed in 0u64..1_000, depth in 1usize..9) {
        let g = fixture(choice, 0.5);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let w = sample::random_word_from(&g, 0, depth, &mut rng);
        let e1 = g.tau_extend(&w, 12);
        let e2 = g.tau_extend(&e1, 12);
        prop_assert_eq!(&e1.edges, &e2.edges);
        let shorter = g.tau_extend(&e1, 5);
        prop_assert_eq!(&shorter.edges, &e1.edges);
    }
}
