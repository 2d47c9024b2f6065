//! Heat trace of the squared Dirac operator: the direct spectral series, its
//! small-`t` expansion in log-periodic coefficient functions, and tensor
//! combinators.

use num_complex::Complex64;
use num_traits::ToPrimitive;

use super::{Spectra, SpectralError};
use crate::numeric::{linear_fit, KahanComplex, KahanSum};
use crate::special::complex_gamma;

/// The r-periodic coefficient function
/// `(1/r) sum_{|k|<=K} Gamma(a/r + 2 pi i k/r) e^{2 pi i k sigma / r}`.
/// Gamma decays super-exponentially on vertical lines, so `K = 40` already
/// leaves a truncation error far below 1e-12.
pub fn periodic_heat_coefficient(r: f64, a: Complex64, sigma: f64, k_max: usize) -> Complex64 {
    assert!(r > 0.0 && a.re > 0.0 && k_max >= 1);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut acc = KahanComplex::new();
    for k in -(k_max as i64)..=(k_max as i64) {
        let arg = (a + Complex64::new(0.0, two_pi * k as f64)) / r;
        if let Ok(g) = complex_gamma(arg) {
            let phase = Complex64::from_polar(1.0, two_pi * k as f64 * sigma / r);
            acc.add(g * phase);
        }
    }
    acc.value() / r
}

/// Mean of `periodic_heat_coefficient(r, a, ., K)` over one period, computed
/// by uniform trapezoid sampling (exact for a trigonometric polynomial once
/// the grid outnumbers the modes).
pub fn periodic_heat_coefficient_mean(r: f64, a: Complex64, k_max: usize) -> Complex64 {
    let n = 2 * k_max + 9;
    let mut acc = KahanComplex::new();
    for i in 0..n {
        let sigma = r * i as f64 / n as f64;
        acc.add(periodic_heat_coefficient(r, a, sigma, k_max));
    }
    acc.value() / n as f64
}

/// Direct heat trace `sum_{n>=1} #E_n e^{-t rho^{-2n}}` with adaptive
/// truncation: level sums stop once the term bound `pf^n e^{-t rho^{-2n}}`
/// drops below `eps` times the partial sum past the peak.
pub fn heat_trace_direct(spectra: &Spectra, t: f64, eps: f64) -> f64 {
    assert!(t > 0.0 && eps > 0.0);
    let rho = spectra.rho();
    let pf = spectra.pf();
    let a = spectra.graph.graph_matrix();
    let weights = spectra.graph.horizontal_source_multiplicities();
    let mut acc = KahanSum::new();
    let mut power = a.pow(0);
    let mut past_peak = false;
    let mut pf_n = 1.0;
    for n in 1..=100_000 {
        // #E_n from A^{n-1}
        let mut count = KahanSum::new();
        for (w, &m) in weights.iter().enumerate() {
            if m > 0 {
                count.add(power.column_sum(w).to_f64().unwrap_or(f64::INFINITY) * m as f64);
            }
        }
        let scale = t * rho.powi(-2 * n as i32);
        let term = count.value() * (-scale).exp();
        acc.add(term);
        pf_n *= pf;
        if scale > 1.0 {
            past_peak = true;
        }
        if past_peak && pf_n * (-scale).exp() < eps * acc.value().max(f64::MIN_POSITIVE) {
            break;
        }
        power = power.mul(&a.to_big());
    }
    acc.value()
}

/// Small-`t` expansion of the heat trace: the singular part
/// `sum_{|lambda_j|>1} c_j f_{r, log lambda_j}(-log t) t^{log lambda_j / (2 log rho)}`
/// plus the logarithmic term `c_{j0} (-log t)/r` contributed by a unit
/// eigenvalue. The difference to the direct trace stays bounded as `t -> 0`.
pub fn heat_trace_expansion(
    spectra: &Spectra,
    t: f64,
    k_max: usize,
) -> Result<f64, SpectralError> {
    assert!(t > 0.0 && t < 1.0);
    let r = spectra.heat_period();
    let log_rho = spectra.rho().ln();
    let ln_t = t.ln();
    let mut acc = KahanComplex::new();
    for (j, &lambda) in spectra.eigen.eigenvalues.iter().enumerate() {
        if lambda.norm() <= 1.0 {
            continue;
        }
        let log_lambda = lambda.ln();
        let coeff = spectra.coeffs.c[j];
        if coeff.norm() < 1e-14 {
            continue;
        }
        let periodic = periodic_heat_coefficient(r, log_lambda, -ln_t, k_max);
        let power = (log_lambda / (2.0 * log_rho) * ln_t).exp();
        acc.add(coeff * periodic * power);
    }
    if let Some(j0) = spectra.eigen.unit_eigenvalue_index() {
        acc.add(spectra.coeffs.c[j0] * (-ln_t / r));
    }
    let value = acc.value();
    debug_assert!(value.im.abs() < 1e-6 * value.re.abs().max(1.0));
    Ok(value.re)
}

/// Tensor heat trace: the product of the factor traces, together with the
/// direct double sum over both spectra for cross-validation.
pub fn tensor_heat_trace(
    s1: &Spectra,
    s2: &Spectra,
    t: f64,
    eps: f64,
) -> (f64, f64) {
    let product = heat_trace_direct(s1, t, eps) * heat_trace_direct(s2, t, eps);

    // double sum with both level ranges chosen as in the direct evaluator
    let levels = |s: &Spectra| -> Vec<f64> {
        let rho = s.rho();
        let mut out = Vec::new();
        let a = s.graph.graph_matrix();
        let weights = s.graph.horizontal_source_multiplicities();
        let mut power = a.pow(0);
        for n in 1..=100_000usize {
            let mut count = 0.0;
            for (w, &m) in weights.iter().enumerate() {
                if m > 0 {
                    count += power.column_sum(w).to_f64().unwrap_or(f64::INFINITY) * m as f64;
                }
            }
            out.push(count);
            let scale = t * rho.powi(-2 * n as i32);
            if scale > 1.0 && s.pf().powi(n as i32) * (-scale).exp() < eps {
                break;
            }
            power = power.mul(&a.to_big());
        }
        out
    };
    let c1 = levels(s1);
    let c2 = levels(s2);
    let mut acc = KahanSum::new();
    for (n, &count1) in c1.iter().enumerate() {
        let e1 = t * s1.rho().powi(-2 * (n as i32 + 1));
        for (m, &count2) in c2.iter().enumerate() {
            let e2 = t * s2.rho().powi(-2 * (m as i32 + 1));
            let exponent = e1 + e2;
            if exponent < 740.0 {
                acc.add(count1 * count2 * (-exponent).exp());
            }
        }
    }
    (product, acc.value())
}

/// Least-squares slope of `ln f` against `ln t` over a logarithmic grid; for
/// a heat trace the metric dimension is `-2 * slope`.
pub fn log_log_slope(samples: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = samples.iter().map(|&(t, _)| t.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, v)| v.ln()).collect();
    linear_fit(&xs, &ys).1
}

/// Fits `a + b(-log t)` to `heat_trace_direct - (dominant singular term)`
/// over a logarithmic `t` grid; recovers the coefficient of the logarithmic
/// heat-trace term contributed by a unit eigenvalue.
pub fn log_term_fit(
    spectra: &Spectra,
    t_lo: f64,
    t_hi: f64,
    points: usize,
    k_max: usize,
) -> Result<(f64, f64), SpectralError> {
    let r = spectra.heat_period();
    let log_rho = spectra.rho().ln();
    let mut xs = Vec::with_capacity(points);
    let mut ys = Vec::with_capacity(points);
    for i in 0..points {
        let f = i as f64 / (points - 1) as f64;
        let t = t_lo * (t_hi / t_lo).powf(f);
        let direct = heat_trace_direct(spectra, t, 1e-12);
        // subtract every |lambda| > 1 singular term, keep log term + remainder
        let mut singular = KahanComplex::new();
        for (j, &lambda) in spectra.eigen.eigenvalues.iter().enumerate() {
            if lambda.norm() <= 1.0 || spectra.coeffs.c[j].norm() < 1e-14 {
                continue;
            }
            let log_lambda = lambda.ln();
            let periodic = periodic_heat_coefficient(r, log_lambda, -t.ln(), k_max);
            let power = (log_lambda / (2.0 * log_rho) * t.ln()).exp();
            singular.add(spectra.coeffs.c[j] * periodic * power);
        }
        xs.push(-t.ln());
        ys.push(direct - singular.value().re);
    }
    let (a, b) = linear_fit(&xs, &ys);
    Ok((a, b))
}
