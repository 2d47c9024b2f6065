//! Spectral analysis of small primitive integer matrices: eigenvalues from
//! the exact characteristic polynomial, biorthonormal left/right eigenvector
//! bases, Perron-Frobenius data in the normalization `sum R = 1`,
//! `sum R_i L_i = 1`, and the coefficients expressing horizontal edge counts
//! as combinations of eigenvalue powers.

use num_complex::Complex64;
use thiserror::Error;

use crate::graph::BratteliGraph;
use crate::matrix::IntMatrix;
use crate::poly::{char_poly, complex_roots, sort_by_modulus_then_arg};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EigenError {
    #[error("matrix is not primitive")]
    NonPrimitive,
    #[error("matrix is not diagonalizable; closed forms unavailable")]
    NotDiagonalizable,
    #[error("matrix dimension {0} exceeds the supported cap of 64")]
    DimensionTooLarge(usize),
}

/// Eigenvalue data of a primitive integer matrix.
#[derive(Debug, Clone)]
pub struct EigenData {
    /// Distinct eigenvalues, descending modulus, ties by ascending argument.
    pub eigenvalues: Vec<Complex64>,
    /// Algebraic multiplicities, parallel to `eigenvalues`.
    pub multiplicities: Vec<usize>,
    /// Right eigenvector bases per eigenvalue.
    pub right: Vec<Vec<Vec<Complex64>>>,
    /// Left eigenvector bases, biorthonormal to `right`.
    pub left: Vec<Vec<Vec<Complex64>>>,
    /// Perron-Frobenius eigenvalue.
    pub pf: f64,
    /// Positive right eigenvector, `sum R = 1`.
    pub r_vec: Vec<f64>,
    /// Positive left eigenvector, `sum R_i L_i = 1`.
    pub l_vec: Vec<f64>,
    pub diagonalizable: bool,
    dim: usize,
}

/// Coefficients expressing exact level edge counts through eigenvalue powers:
/// `#E_n = sum_j d[j] * lambda_j^(n-1) = sum_j c[j] * lambda_j^n`, where
/// `c[j] = d[j] / lambda_j` (left as zero when `lambda_j = 0`).
#[derive(Debug, Clone)]
pub struct EdgeCountCoefficients {
    pub c: Vec<Complex64>,
    pub d: Vec<Complex64>,
}

pub fn eigen_decompose(a: &IntMatrix) -> Result<EigenData, EigenError> {
    let dim = a.dim();
    if dim > 64 {
        return Err(EigenError::DimensionTooLarge(dim));
    }
    let primitivity = a.primitivity();
    if !primitivity.primitive {
        return Err(EigenError::NonPrimitive);
    }

    let p = char_poly(a);
    let mut roots = complex_roots(&p);
    sort_by_modulus_then_arg(&mut roots);

    let norm: f64 = a.entries().iter().map(|&x| x.abs() as f64).sum::<f64>() / dim as f64;
    let threshold = 1e-8 * norm.max(1.0);

    let mut eigenvalues = Vec::new();
    let mut multiplicities = Vec::new();
    let mut right = Vec::new();
    let mut left = Vec::new();
    let mut diagonalizable = true;

    let at = a.transpose();
    for &(lambda, mult) in &roots {
        let r_basis = nullspace(a, lambda, threshold);
        let l_basis = nullspace(&at, lambda, threshold);
        if r_basis.len() != mult || l_basis.len() != mult {
            diagonalizable = false;
        }
        eigenvalues.push(lambda);
        multiplicities.push(mult);
        right.push(r_basis);
        left.push(l_basis);
    }

    if diagonalizable {
        biorthonormalize(&mut right, &mut left);
    }

    // Perron-Frobenius data: the dominant root is real and simple under
    // primitivity; rebuild positive real vectors and apply the normalization.
    let pf = eigenvalues[0].re;
    let r_c = &right[0][0];
    let l_c = &left[0][0];
    let mut r_vec: Vec<f64> = r_c.iter().map(|z| z.re).collect();
    let mut l_vec: Vec<f64> = l_c.iter().map(|z| z.re).collect();
    if r_vec.iter().sum::<f64>() < 0.0 {
        for x in &mut r_vec {
            *x = -*x;
        }
    }
    if l_vec.iter().sum::<f64>() < 0.0 {
        for x in &mut l_vec {
            *x = -*x;
        }
    }
    refine_pf(a, &mut r_vec, pf);
    refine_pf(&at, &mut l_vec, pf);
    let r_sum: f64 = r_vec.iter().sum();
    for x in &mut r_vec {
        *x /= r_sum;
    }
    let rl: f64 = r_vec.iter().zip(&l_vec).map(|(r, l)| r * l).sum();
    for x in &mut l_vec {
        *x /= rl;
    }

    Ok(EigenData {
        eigenvalues,
        multiplicities,
        right,
        left,
        pf,
        r_vec,
        l_vec,
        diagonalizable,
        dim,
    })
}

/// `(pf, R, L)` with `sum R = 1` and `sum R_i L_i = 1`.
pub fn perron_frobenius(a: &IntMatrix) -> Result<(f64, Vec<f64>, Vec<f64>), EigenError> {
    let ed = eigen_decompose(a)?;
    Ok((ed.pf, ed.r_vec, ed.l_vec))
}

impl EigenData {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index of the eigenvalue equal to 1, if present.
    pub fn unit_eigenvalue_index(&self) -> Option<usize> {
        self.eigenvalues
            .iter()
            .position(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-10)
    }

    /// Reconstruction `sum_j lambda_j^n sum_l R^(j,l) (L^(j,l))^T` of `A^n`.
    pub fn reconstruct_power(&self, n: usize) -> Vec<Vec<Complex64>> {
        let d = self.dim;
        let mut out = vec![vec![Complex64::new(0.0, 0.0); d]; d];
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let factor = lambda.powu(n as u32);
            for l in 0..self.right[j].len() {
                for row in 0..d {
                    for col in 0..d {
                        out[row][col] += factor * self.right[j][l][row] * self.left[j][l][col];
                    }
                }
            }
        }
        out
    }
}

/// Edge-count coefficients of a graph's horizontal set:
/// `d[j] = sum_l (sum_v R^(j,l)_v) (sum_h L^(j,l)_{s2(h)})`, `c[j] = d[j]/lambda_j`.
pub fn edge_count_coefficients(
    ed: &EigenData,
    g: &BratteliGraph,
) -> Result<EdgeCountCoefficients, EigenError> {
    if !ed.diagonalizable {
        return Err(EigenError::NotDiagonalizable);
    }
    let weights = g.horizontal_source_multiplicities();
    let mut c = Vec::new();
    let mut d = Vec::new();
    for (j, &lambda) in ed.eigenvalues.iter().enumerate() {
        let mut dj = Complex64::new(0.0, 0.0);
        for l in 0..ed.right[j].len() {
            let r_sum: Complex64 = ed.right[j][l].iter().sum();
            let mut h_sum = Complex64::new(0.0, 0.0);
            for (w, &count) in weights.iter().enumerate() {
                h_sum += ed.left[j][l][w] * count as f64;
            }
            dj += r_sum * h_sum;
        }
        d.push(dj);
        if lambda.norm() > 1e-12 {
            c.push(dj / lambda);
        } else {
            c.push(Complex64::new(0.0, 0.0));
        }
    }
    Ok(EdgeCountCoefficients { c, d })
}

impl EdgeCountCoefficients {
    /// `#E_n` through the eigenvalue expansion (exact for diagonalizable
    /// matrices, up to floating-point error).
    pub fn edge_count(&self, eigenvalues: &[Complex64], n: usize) -> Complex64 {
        assert!(n >= 1);
        let mut total = Complex64::new(0.0, 0.0);
        for (j, &lambda) in eigenvalues.iter().enumerate() {
            let power = if n == 1 {
                Complex64::new(1.0, 0.0)
            } else {
                lambda.powu((n - 1) as u32)
            };
            total += self.d[j] * power;
        }
        total
    }
}

fn nullspace(a: &IntMatrix, lambda: Complex64, threshold: f64) -> Vec<Vec<Complex64>> {
    let n = a.dim();
    let mut m: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut z = Complex64::new(a.get(i, j) as f64, 0.0);
                    if i == j {
                        z -= lambda;
                    }
                    z
                })
                .collect()
        })
        .collect();

    // Gaussian elimination with partial pivoting; track pivot columns.
    let mut pivot_cols = Vec::new();
    let mut row = 0usize;
    for col in 0..n {
        let mut best = row;
        for r in row..n {
            if m[r][col].norm() > m[best][col].norm() {
                best = r;
            }
        }
        if m[best][col].norm() <= threshold {
            continue;
        }
        m.swap(row, best);
        let pivot = m[row][col];
        for c in 0..n {
            m[row][c] /= pivot;
        }
        for r in 0..n {
            if r != row {
                let factor = m[r][col];
                if factor.norm() > 0.0 {
                    for c in 0..n {
                        let sub = factor * m[row][c];
                        m[r][c] -= sub;
                    }
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
        if row == n {
            break;
        }
    }

    let free_cols: Vec<usize> = (0..n).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = Vec::new();
    for &free in &free_cols {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[free] = Complex64::new(1.0, 0.0);
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -m[r][free];
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut v {
            *z /= norm;
        }
        basis.push(v);
    }
    basis
}

/// One bi-orthonormalization pass: within each eigenvalue block, replace the
/// left basis by `G^{-1} L` with `G = L R^T` so that `R^(j,l) . L^(j',l') =
/// delta delta`.
fn biorthonormalize(right: &mut [Vec<Vec<Complex64>>], left: &mut [Vec<Vec<Complex64>>]) {
    for j in 0..right.len() {
        let m = right[j].len();
        if m == 0 || left[j].len() != m {
            continue;
        }
        let mut gram = vec![vec![Complex64::new(0.0, 0.0); m]; m];
        for (a, l) in left[j].iter().enumerate() {
            for (b, r) in right[j].iter().enumerate() {
                gram[a][b] = l.iter().zip(r.iter()).map(|(x, y)| x * y).sum();
            }
        }
        if let Some(inverse) = invert(&gram) {
            let dim = left[j][0].len();
            let old = left[j].clone();
            for b in 0..m {
                let mut v = vec![Complex64::new(0.0, 0.0); dim];
                for a in 0..m {
                    for k in 0..dim {
                        v[k] += inverse[b][a] * old[a][k];
                    }
                }
                left[j][b] = v;
            }
        }
    }
}

fn invert(m: &[Vec<Complex64>]) -> Option<Vec<Vec<Complex64>>> {
    let n = m.len();
    let mut a: Vec<Vec<Complex64>> = m.to_vec();
    let mut inv: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect();
    for col in 0..n {
        let mut best = col;
        for r in col..n {
            if a[r][col].norm() > a[best][col].norm() {
                best = r;
            }
        }
        if a[best][col].norm() < 1e-14 {
            return None;
        }
        a.swap(col, best);
        inv.swap(col, best);
        let pivot = a[col][col];
        for c in 0..n {
            a[col][c] /= pivot;
            inv[col][c] /= pivot;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                if f.norm() > 0.0 {
                    for c in 0..n {
                        let (sa, si) = (f * a[col][c], f * inv[col][c]);
                        a[r][c] -= sa;
                        inv[r][c] -= si;
                    }
                }
            }
        }
    }
    Some(inv)
}

/// A few inverse-power/Rayleigh steps to polish a Perron eigenvector.
fn refine_pf(a: &IntMatrix, v: &mut [f64], pf: f64) {
    let n = a.dim();
    for _ in 0..60 {
        let mut next = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                next[i] += a.get(i, j) as f64 * v[j];
            }
        }
        let norm: f64 = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (t, s) in v.iter_mut().zip(next.iter()) {
            *t = s / norm;
        }
    }
    // sign fix: make positive
    if v.iter().sum::<f64>() < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
    let _ = pf;
}
