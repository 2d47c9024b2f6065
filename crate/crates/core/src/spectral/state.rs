//! Spectral state and measure: the tail-invariant measure on path space, the
//! level-averaged (Cesaro) state, Laplace-transform ratio estimates for
//! weakly regular observables, and resonance diagnostics for tensor products.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use super::{Spectra, SpectralError};
use crate::forms::ObservableFn;
use crate::graph::PathWord;
use crate::numeric::{log_add_exp, KahanComplex};
use crate::special::{complex_gamma, ln_gamma, reg_lower_gamma};

/// Tail-invariant measure of the cylinder of a finite word:
/// `mu([gamma]) = pf^{-|gamma|} R_{r(gamma)}`.
pub fn spectral_measure(spectra: &Spectra, word: &PathWord) -> f64 {
    if word.edges.is_empty() {
        return 1.0;
    }
    let last = *word.edges.last().unwrap();
    let range = spectra.graph.edges[last].range;
    spectra.pf().powi(-(word.len() as i32)) * spectra.eigen.r_vec[range]
}

/// Number of level-`n` horizontal edges whose source path starts with `gamma`.
pub fn cylinder_count(spectra: &Spectra, gamma: &[usize], n: usize) -> BigInt {
    assert!(n >= 1);
    let g = &spectra.graph;
    if gamma.is_empty() {
        return g.horizontal_count(n);
    }
    if n >= gamma.len() + 1 {
        let power = g.path_count(n - 1 - gamma.len());
        let r_gamma = g.edges[*gamma.last().unwrap()].range;
        let mut total = BigInt::zero();
        for h in &g.horizontal {
            total += power.get(r_gamma, g.edges[h.from].source).clone();
        }
        total
    } else {
        // the prefix is forced; only the choice-function tail can still match
        let eps = gamma[n - 1];
        let mut cur = eps;
        let mut ok = true;
        for &expected in &gamma[n..] {
            cur = g.tau[cur];
            if cur != expected {
                ok = false;
                break;
            }
        }
        if !ok {
            return BigInt::zero();
        }
        let count = g.horizontal.iter().filter(|h| h.from == eps).count();
        BigInt::from(count)
    }
}

/// Level averages of an observable together with convergence diagnostics.
#[derive(Debug, Clone)]
pub struct CesaroReport {
    /// `Abar_n` for `n = 1..=N`
    pub values: Vec<Complex64>,
    pub final_value: Complex64,
    /// absolute Cauchy differences over the last five levels
    pub cauchy: Vec<f64>,
    pub converged: bool,
}

/// `Abar_N = (1/#E_N) sum_{e in E_N} obs(s(e))` for every level up to `N`.
/// Cylinder observables use exact path counting; other observables are
/// evaluated by full level enumeration (bounded to ~4e6 edges per level).
pub fn state_cesaro(
    spectra: &Spectra,
    obs: &ObservableFn,
    levels: usize,
) -> Result<CesaroReport, SpectralError> {
    let mut values = Vec::with_capacity(levels);
    for n in 1..=levels {
        values.push(level_average(spectra, obs, n)?);
    }
    Ok(diagnose(values))
}

fn diagnose(values: Vec<Complex64>) -> CesaroReport {
    let final_value = *values.last().expect("at least one level");
    let scale = values
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.norm()))
        .max(1e-30);
    let tail = values.len().saturating_sub(5);
    let cauchy: Vec<f64> = values
        .windows(2)
        .skip(tail.saturating_sub(1))
        .map(|w| (w[1] - w[0]).norm())
        .collect();
    let converged = !cauchy.is_empty() && cauchy.iter().all(|&d| d < 1e-6 * scale);
    CesaroReport {
        values,
        final_value,
        cauchy,
        converged,
    }
}

/// Convergence diagnostics for an externally supplied weight sequence.
pub fn diagnose_weights(values: Vec<Complex64>) -> CesaroReport {
    diagnose(values)
}

fn level_average(
    spectra: &Spectra,
    obs: &ObservableFn,
    n: usize,
) -> Result<Complex64, SpectralError> {
    let g = &spectra.graph;
    let total = g.horizontal_count(n);
    let total_f = total.to_f64().unwrap();
    if let ObservableFn::Cylinder { depth: _, table } = obs {
        let mut acc = KahanComplex::new();
        for (gamma, &value) in table {
            if value.norm() == 0.0 {
                continue;
            }
            let count = cylinder_count(spectra, gamma, n).to_f64().unwrap();
            acc.add(value * count);
        }
        return Ok(acc.value() / total_f);
    }
    if total_f > 4e6 {
        return Err(SpectralError::DepthExceeded(total_f as u64));
    }
    let mut acc = KahanComplex::new();
    let prefixes = g.enumerate_paths(n - 1);
    for prefix in &prefixes {
        let end = prefix.last().map(|&e| g.edges[e].range);
        for h in &g.horizontal {
            let source_vertex = g.edges[h.from].source;
            if let Some(v) = end {
                if v != source_vertex {
                    continue;
                }
            }
            let mut edges = prefix.clone();
            edges.push(h.from);
            let word = g.tau_extend(&PathWord::tau_extended(edges), n + obs.depth_needed());
            acc.add(obs.eval(g, &word));
        }
    }
    Ok(acc.value() / total_f)
}

// ---------------------------------------------------------------------------
// Laplace-transform ratio state

/// Per-level mean values of a diagonal observable; levels beyond the stored
/// range continue according to the chosen extension.
#[derive(Debug, Clone)]
pub enum StateWeights {
    Constant(Complex64),
    /// `Abar_n = e^{i n phi}`
    Phase { phi: f64 },
    /// explicit values for `n = 1..`, extended by the last value
    Table(Vec<Complex64>),
}

impl StateWeights {
    pub fn at(&self, n: usize) -> Complex64 {
        match self {
            StateWeights::Constant(c) => *c,
            StateWeights::Phase { phi } => Complex64::from_polar(1.0, phi * n as f64),
            StateWeights::Table(values) => {
                if values.is_empty() {
                    Complex64::zero()
                } else {
                    values[(n - 1).min(values.len() - 1)]
                }
            }
        }
    }

    pub fn ones() -> Self {
        StateWeights::Constant(Complex64::new(1.0, 0.0))
    }

    /// Observed cylinder averages up to `levels`, extended by the last value.
    pub fn from_observable(
        spectra: &Spectra,
        obs: &ObservableFn,
        levels: usize,
    ) -> Result<Self, SpectralError> {
        let report = state_cesaro(spectra, obs, levels)?;
        Ok(StateWeights::Table(report.values))
    }
}

/// Result of the Laplace-ratio limit estimate.
#[derive(Debug, Clone)]
pub struct LaplaceRatio {
    pub value: Complex64,
    /// disagreement between consecutive Richardson extrapolants
    pub spread: f64,
    pub per_s: Vec<(f64, Complex64)>,
}

/// Truncated Laplace transform of the heat-weighted trace profile
/// `f_A(x) = e^{-s0 x/2} sum_n Abar_n #E_n exp(-e^{-x} rho^{-2n})`,
/// evaluated termwise: `L[f_A](s) = sum_n Abar_n #E_n rho^{n(s0+2s)}
/// gamma_lower(s0/2+s, rho^{-2n})`.
fn laplace_transform(
    spectra: &Spectra,
    ln_counts: &[f64],
    weights: &StateWeights,
    s: f64,
) -> Complex64 {
    let rho = spectra.rho();
    let s0 = spectra.spectral_dimension();
    let sigma = s0 / 2.0 + s;
    let r = spectra.heat_period();
    let ln_gamma_sigma = ln_gamma(sigma);
    let mut acc = KahanComplex::new();
    for (idx, &ln_count) in ln_counts.iter().enumerate() {
        let n = idx + 1;
        let mut exponent = ln_count + (n as f64) * (s0 + 2.0 * s) * rho.ln() + ln_gamma_sigma;
        // incomplete-gamma correction matters only for the first few levels
        let ln_cut = (n as f64) * r;
        if ln_cut < 45.0 {
            let p = reg_lower_gamma(sigma, ln_cut.exp());
            if p <= 0.0 {
                continue;
            }
            exponent += p.ln();
        }
        if exponent < -745.0 {
            continue;
        }
        acc.add(weights.at(n) * exponent.exp());
    }
    acc.value()
}

fn levels_needed(r: f64, s_min: f64) -> usize {
    ((36.0 / (s_min * r)).ceil() as usize + 50).max(64)
}

/// Estimates `lim_{s->0+} L[f_A](s) / L[f_B](s)` on a decreasing `s` grid
/// with two-point Richardson extrapolation. The spread between consecutive
/// extrapolants is reported; when a tolerance is supplied and the spread
/// exceeds it the estimate is rejected.
pub fn laplace_ratio_state(
    spectra: &Spectra,
    weights_num: &StateWeights,
    weights_den: &StateWeights,
    s_grid: &[f64],
    tol: Option<f64>,
) -> Result<LaplaceRatio, SpectralError> {
    assert!(s_grid.len() >= 3, "need at least three s values");
    let s_min = s_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let ln_counts = spectra.ln_edge_counts(levels_needed(spectra.heat_period(), s_min));
    let per_s: Vec<(f64, Complex64)> = s_grid
        .iter()
        .map(|&s| {
            let num = laplace_transform(spectra, &ln_counts, weights_num, s);
            let den = laplace_transform(spectra, &ln_counts, weights_den, s);
            (s, num / den)
        })
        .collect();
    finish_ratio(per_s, tol)
}

fn finish_ratio(
    per_s: Vec<(f64, Complex64)>,
    tol: Option<f64>,
) -> Result<LaplaceRatio, SpectralError> {
    let mut extrapolants = Vec::new();
    for w in per_s.windows(2) {
        let (s1, v1) = w[0];
        let (s2, v2) = w[1];
        debug_assert!((s1 / s2 - 2.0).abs() < 1e-9, "grid must halve");
        extrapolants.push(v2 * 2.0 - v1);
    }
    let value = *extrapolants.last().expect("grid of >= 3 values");
    let spread = if extrapolants.len() >= 2 {
        (extrapolants[extrapolants.len() - 1] - extrapolants[extrapolants.len() - 2]).norm()
    } else {
        f64::INFINITY
    };
    if let Some(tol) = tol {
        if spread > tol {
            return Err(SpectralError::InsufficientDecay { spread, tol });
        }
    }
    Ok(LaplaceRatio {
        value,
        spread,
        per_s,
    })
}

/// Laplace-ratio state on the tensor product of two triples, with the
/// weighted observable acting on the first factor and the identity on the
/// second: `lim L[f_A f'_1](s) / L[f_1 f'_1](s)`.
pub fn laplace_ratio_tensor(
    s1: &Spectra,
    weights_on_first: &StateWeights,
    s2: &Spectra,
    s_grid: &[f64],
    tol: Option<f64>,
) -> Result<LaplaceRatio, SpectralError> {
    assert!(s_grid.len() >= 3);
    let s_min = s_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let r1 = s1.heat_period();
    let r2 = s2.heat_period();
    let n1 = levels_needed(r1, s_min);
    let n2 = levels_needed(r2, s_min);
    let ln1 = s1.ln_edge_counts(n1);
    let ln2 = s2.ln_edge_counts(n2);
    let s0_total = s1.spectral_dimension() + s2.spectral_dimension();

    // exponent of the (n, m) term, or -inf when it cannot contribute
    let term_exponent = |sigma: f64, ln_gamma_sigma: f64, n: usize, m: usize| -> f64 {
        let ln_mu = log_add_exp((n as f64) * r1, (m as f64) * r2);
        let mut exponent = ln1[n - 1] + ln2[m - 1] - sigma * ln_mu + ln_gamma_sigma;
        if ln_mu < 45.0 {
            let p = reg_lower_gamma(sigma, ln_mu.exp());
            if p <= 0.0 {
                return f64::NEG_INFINITY;
            }
            exponent += p.ln();
        }
        exponent
    };

    let transform = |weights: &StateWeights, s: f64| -> Complex64 {
        let sigma = s0_total / 2.0 + s;
        let lg = ln_gamma(sigma);
        let mut acc = KahanComplex::new();
        for n in 1..=ln1.len() {
            // terms concentrate along the ridge m*r2 ~= n*r1; walk outward
            let center = ((n as f64) * r1 / r2).round().max(1.0) as usize;
            let center = center.min(ln2.len());
            let mut best = f64::NEG_INFINITY;
            let weight = weights.at(n);
            let mut m = center;
            while m <= ln2.len() {
                let e = term_exponent(sigma, lg, n, m);
                best = best.max(e);
                if e < best - 42.0 || e < -745.0 {
                    break;
                }
                acc.add(weight * e.exp());
                m += 1;
            }
            let mut m = center;
            while m > 1 {
                m -= 1;
                let e = term_exponent(sigma, lg, n, m);
                best = best.max(e);
                if e < best - 42.0 || e < -745.0 {
                    break;
                }
                acc.add(weight * e.exp());
            }
        }
        acc.value()
    };

    let per_s: Vec<(f64, Complex64)> = s_grid
        .iter()
        .map(|&s| {
            let num = transform(weights_on_first, s);
            let den = transform(&StateWeights::ones(), s);
            (s, num / den)
        })
        .collect();
    finish_ratio(per_s, tol)
}

// ---------------------------------------------------------------------------
// resonance and direct sums

/// Result of the non-resonance scan for a phase against the lattice
/// `phi + 2 pi k + 2 pi (log rho / log rho') k'`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceCheck {
    /// `Some((k, k'))` when a lattice point annihilates the phase
    pub resonant_at: Option<(i64, i64)>,
    pub min_gap: f64,
    pub k_max: i64,
}

pub fn nonresonant_phase_check(phi: f64, rho: f64, rho_prime: f64, k_max: i64) -> ResonanceCheck {
    assert!(phi > 0.0 && phi < 2.0 * std::f64::consts::PI);
    assert!(rho > 0.0 && rho < 1.0 && rho_prime > 0.0 && rho_prime < 1.0);
    let two_pi = 2.0 * std::f64::consts::PI;
    let ratio = rho.ln() / rho_prime.ln();
    let mut min_gap = f64::INFINITY;
    let mut resonant_at = None;
    for kp in -k_max..=k_max {
        let x = phi + two_pi * ratio * kp as f64;
        // distance to the nearest multiple of 2 pi; the witness k is -round
        let k = -(x / two_pi).round() as i64;
        if k.abs() > k_max {
            continue;
        }
        let gap = (x + two_pi * k as f64).abs();
        if gap < min_gap {
            min_gap = gap;
            if gap < 1e-9 {
                resonant_at = Some((k, kp));
            }
        }
    }
    ResonanceCheck {
        resonant_at,
        min_gap,
        k_max,
    }
}

/// Spectral state of a direct sum from the summands' states and residues:
/// `(c1 T1 + c2 T2)/(c1 + c2)`.
pub fn direct_sum_state(
    c1: f64,
    c2: f64,
    t1: Complex64,
    t2: Complex64,
) -> Result<Complex64, SpectralError> {
    if c1 + c2 <= 0.0 {
        return Err(SpectralError::BothResiduesZero);
    }
    Ok((t1 * c1 + t2 * c2) / (c1 + c2))
}

/// Residues of two triples at the direct sum's abscissa: the summand with the
/// smaller abscissa contributes zero.
pub fn direct_sum_residues(s1: &Spectra, s2: &Spectra) -> (f64, f64) {
    let d1 = s1.spectral_dimension();
    let d2 = s2.spectral_dimension();
    let r1 = s1.coeffs.c[0].re / -s1.rho().ln();
    let r2 = s2.coeffs.c[0].re / -s2.rho().ln();
    if (d1 - d2).abs() < 1e-12 {
        (r1, r2)
    } else if d1 > d2 {
        (r1, 0.0)
    } else {
        (0.0, r2)
    }
}

/// Mean over the common period structure of the product of two leading
/// heat-coefficient functions, `mean(f1 f2)` with
/// `f_i = c_i * phc(r_i, a_i, .)`: only Fourier pairs with
/// `k1/r1 + k2/r2 = 0` survive. A rational relation `r1/r2 = p/q` (small
/// denominators) activates the whole sublattice; otherwise only `(0,0)`.
pub fn tensor_leading_mean(
    c1: Complex64,
    r1: f64,
    a1: Complex64,
    c2: Complex64,
    r2: f64,
    a2: Complex64,
    k_max: i64,
) -> Complex64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let coeff = |c: Complex64, r: f64, a: Complex64, k: i64| -> Complex64 {
        let arg = (a + Complex64::new(0.0, two_pi * k as f64)) / r;
        match complex_gamma(arg) {
            Ok(g) => c * g / r,
            Err(_) => Complex64::zero(),
        }
    };
    // detect r1/r2 = p/q with small p, q
    let ratio = r1 / r2;
    let mut relation = None;
    for q in 1..=32_i64 {
        let p = (ratio * q as f64).round();
        if p.abs() >= 1.0 && (ratio * q as f64 - p).abs() < 1e-9 * q as f64 {
            relation = Some((p as i64, q));
            break;
        }
    }
    let mut acc = coeff(c1, r1, a1, 0) * coeff(c2, r2, a2, 0);
    if let Some((p, q)) = relation {
        // k1 = p j, k2 = -q j solve k1/r1 + k2/r2 = 0 given r1/r2 = p/q
        let mut j = 1i64;
        while p.abs() * j <= k_max && q * j <= k_max {
            acc += coeff(c1, r1, a1, p * j) * coeff(c2, r2, a2, -q * j);
            acc += coeff(c1, r1, a1, -p * j) * coeff(c2, r2, a2, q * j);
            j += 1;
        }
    }
    acc
}
