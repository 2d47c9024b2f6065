//! Self-similar spectral triples on stationary Bratteli diagrams and 1-D
//! substitution tilings.
//!
//! The crate builds the combinatorial data (a finite graph with a
//! distinguished loop, a choice function, horizontal edge pairs and a scale
//! parameter), derives the analytic invariants of the associated triple —
//! zeta function with poles and residues, heat-trace expansions, spectral
//! states and measures, Connes distances, Dirichlet forms — and runs the
//! Pisot-substitution pipeline down to the Laplacian eigenvalues of the
//! transversal and longitudinal forms, with every closed form cross-checked
//! against an independent numeric route.

pub mod eigen;
pub mod fixtures;
pub mod forms;
pub mod graph;
pub mod matrix;
pub mod metric;
pub mod numberfield;
pub mod numeric;
pub mod poly;
pub mod report;
pub mod sample;
pub mod special;
pub mod spectral;
pub mod tiling;

pub use eigen::{edge_count_coefficients, eigen_decompose, perron_frobenius, EigenData, EigenError};
pub use forms::{circle_embed, markov_check, q_limit, qn_form, FormReport, ObservableFn};
pub use graph::{build_graph, parse_graph_file, BratteliGraph, GraphError, PathWord, WordMode};
pub use matrix::IntMatrix;
pub use metric::{connes_distance, geodesic_oracle, telescoping_lipschitz_check, DistanceResult};
pub use numberfield::{
    minimal_polynomial_of_pf, pisot_analyze, star_values, FieldElement, MinPoly, NumberField,
    PisotData,
};
pub use spectral::heat::{
    heat_trace_direct, heat_trace_expansion, log_log_slope, periodic_heat_coefficient,
    periodic_heat_coefficient_mean, tensor_heat_trace,
};
pub use spectral::state::{
    direct_sum_state, laplace_ratio_state, laplace_ratio_tensor, nonresonant_phase_check,
    spectral_measure, state_cesaro, StateWeights,
};
pub use spectral::zeta::{dirac_spectrum, poles_and_residues, zeta_closed, zeta_series, ZetaReport};
pub use spectral::{Spectra, SpectralError};
pub use tiling::{
    dirichlet_parameters, horizontal_geometry, laplacian_eigenvalue, microtile_vectors,
    omega_triple, q_lg_numeric, q_tr_numeric, return_vectors, FormSide, Substitution1D,
    SubstitutionRules, TilingError,
};
