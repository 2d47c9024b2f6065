//! Analytic invariants of the spectral triple attached to a diagram: zeta
//! function, heat trace, spectral state and measure, combinators for direct
//! sums and tensor products, and resonance diagnostics.

pub mod heat;
pub mod state;
pub mod zeta;

use num_complex::Complex64;
use thiserror::Error;

use crate::eigen::{edge_count_coefficients, eigen_decompose, EdgeCountCoefficients, EigenData, EigenError};
use crate::graph::BratteliGraph;
use crate::matrix::ScaledMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("evaluation point {0} is a pole")]
    AtPole(Complex64),
    #[error("Dirichlet series diverges at Re z = {0} (abscissa {1})")]
    DivergesAt(f64, f64),
    #[error("Laplace-ratio spread {spread} exceeds requested tolerance {tol}")]
    InsufficientDecay { spread: f64, tol: f64 },
    #[error("both direct-sum residues vanish")]
    BothResiduesZero,
    #[error("level enumeration too large: {0} edges")]
    DepthExceeded(u64),
}

/// Eigen data and edge-count coefficients of a graph, bundled with the graph
/// itself; the entry point for all analytic computations.
#[derive(Debug, Clone)]
pub struct Spectra {
    pub graph: BratteliGraph,
    pub eigen: EigenData,
    pub coeffs: EdgeCountCoefficients,
}

impl Spectra {
    pub fn analyze(graph: &BratteliGraph) -> Result<Self, SpectralError> {
        let eigen = eigen_decompose(&graph.graph_matrix())?;
        let coeffs = edge_count_coefficients(&eigen, graph)?;
        Ok(Spectra {
            graph: graph.clone(),
            eigen,
            coeffs,
        })
    }

    pub fn rho(&self) -> f64 {
        self.graph.rho
    }

    pub fn pf(&self) -> f64 {
        self.eigen.pf
    }

    /// Metric dimension `log pf / (-log rho)`.
    pub fn spectral_dimension(&self) -> f64 {
        self.eigen.pf.ln() / -self.graph.rho.ln()
    }

    /// Heat-trace log-period `r = -2 log rho`.
    pub fn heat_period(&self) -> f64 {
        -2.0 * self.graph.rho.ln()
    }

    /// Imaginary period of the zeta function, `2 pi / log(1/rho)`.
    pub fn zeta_period(&self) -> f64 {
        2.0 * std::f64::consts::PI / -self.graph.rho.ln()
    }

    /// `ln #E_n` for `n = 1..=n_max` in scaled arithmetic, valid far beyond
    /// the range where the counts fit a float.
    pub fn ln_edge_counts(&self, n_max: usize) -> Vec<f64> {
        let a = self.graph.graph_matrix();
        let weights = self.graph.horizontal_source_multiplicities();
        let mut out = Vec::with_capacity(n_max);
        let mut power = ScaledMatrix::identity(a.dim());
        let base = ScaledMatrix::from_int(&a);
        for _ in 1..=n_max {
            // ln sum_w m_w * colsum_w(A^(n-1))
            let mut terms: Vec<f64> = Vec::new();
            for (w, &m) in weights.iter().enumerate() {
                if m > 0 {
                    terms.push(power.ln_column_sum(w) + (m as f64).ln());
                }
            }
            let mut acc = f64::NEG_INFINITY;
            for t in terms {
                acc = crate::numeric::log_add_exp(acc, t);
            }
            out.push(acc);
            power = power.mul(&base);
        }
        out
    }
}
