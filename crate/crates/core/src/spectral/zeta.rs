//! Zeta function of the triple: Dirichlet series over the Dirac spectrum,
//! rational-in-`rho^z` closed form, pole lattice and residues.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;

use super::{Spectra, SpectralError};
use crate::numeric::KahanComplex;

/// `|D|` spectrum up to level `N`: eigenvalue `rho^{-n}` with multiplicity
/// `#E_n` for `n = 1..=N`.
pub fn dirac_spectrum(spectra: &Spectra, levels: usize) -> Vec<(f64, BigInt)> {
    (1..=levels)
        .map(|n| {
            (
                spectra.rho().powi(-(n as i32)),
                spectra.graph.horizontal_count(n),
            )
        })
        .collect()
}

/// Meromorphic closed form `zeta(z) = sum_k d_k rho^z / (1 - lambda_k rho^z)`
/// (`d_k = lambda_k c_k`), valid on all of C away from the pole lattice.
pub fn zeta_closed(spectra: &Spectra, z: Complex64) -> Result<Complex64, SpectralError> {
    let rho_z = Complex64::new(spectra.rho(), 0.0).powc(z);
    let mut acc = KahanComplex::new();
    for (k, &lambda) in spectra.eigen.eigenvalues.iter().enumerate() {
        let denom = Complex64::new(1.0, 0.0) - lambda * rho_z;
        if denom.norm() < 1e-9 * (1.0 + (lambda * rho_z).norm()) {
            return Err(SpectralError::AtPole(z));
        }
        acc.add(spectra.coeffs.d[k] * rho_z / denom);
    }
    Ok(acc.value())
}

/// Truncated Dirichlet series `sum_{n<=N} #E_n rho^{nz}` with a geometric
/// bound on the discarded tail. Requires `Re z` above the abscissa.
pub fn zeta_series(
    spectra: &Spectra,
    z: Complex64,
    levels: usize,
) -> Result<(Complex64, f64), SpectralError> {
    let s0 = spectra.spectral_dimension();
    if z.re <= s0 {
        return Err(SpectralError::DivergesAt(z.re, s0));
    }
    let rho = spectra.rho();
    let pf = spectra.pf();
    let mut acc = KahanComplex::new();
    let mut growth_bound: f64 = 0.0;
    let rho_z = Complex64::new(rho, 0.0).powc(z);
    let mut rho_nz = Complex64::new(1.0, 0.0);
    for n in 1..=levels {
        rho_nz *= rho_z;
        let count = spectra.graph.horizontal_count(n).to_f64().unwrap();
        growth_bound = growth_bound.max(count / pf.powi(n as i32));
        acc.add(rho_nz * count);
    }
    let q = pf * rho.powf(z.re);
    let tail = 2.0 * growth_bound * q.powi(levels as i32 + 1) / (1.0 - q);
    Ok((acc.value(), tail))
}

/// One pole of the zeta function with its residue and the relative error of
/// an independent numeric limit check `(z - z0) zeta(z0 + 1e-6)`.
#[derive(Debug, Clone)]
pub struct Pole {
    pub location: Complex64,
    pub residue: Complex64,
    /// relative deviation of the numeric limit, when checked
    pub numeric_check: Option<f64>,
}

/// Zeta-function report: metric dimension, pole lattice and residues.
#[derive(Debug, Clone)]
pub struct ZetaReport {
    pub s0: f64,
    /// imaginary lattice period `2 pi / log(1/rho)`
    pub period: f64,
    pub poles: Vec<Pole>,
    /// `(c_k, lambda_k)` pairs of the closed form
    pub closed_form_coeffs: Vec<(Complex64, Complex64)>,
    pub warnings: Vec<String>,
}

/// Residue normalization note carried into every report. Two candidate
/// normalizations differ by a factor `lambda_j`; the geometric-series closed
/// form gives `c_j / (-log rho)` and the numeric pole limit confirms it
/// (`1/ln 2`, not `2/ln 2`, on the one-vertex two-loop graph), so that value
/// is the one reported.
pub const RESIDUE_NORMALIZATION_WARNING: &str = "residues are c_j/(-log rho) as derived from the \
geometric-series closed form; the alternative normalization c_j*lambda_j/(-log rho) disagrees \
with the numeric limit (z-z0)*zeta(z) and is not used";

/// Poles `(log lambda_j + 2 pi i k)/(-log rho)` for `|k| <= k_max` with
/// residues `c_j/(-log rho)`; residues on the `|k| <= 2` sublattice are
/// verified against the numeric limit.
pub fn poles_and_residues(spectra: &Spectra, k_max: i64) -> Result<ZetaReport, SpectralError> {
    let rho = spectra.rho();
    let neg_log_rho = -rho.ln();
    let mut poles = Vec::new();
    for (j, &lambda) in spectra.eigen.eigenvalues.iter().enumerate() {
        let c = spectra.coeffs.c[j];
        if lambda.norm() < 1e-12 || c.norm() < 1e-12 {
            continue;
        }
        let log_lambda = lambda.ln();
        let residue = c / neg_log_rho;
        for k in -k_max..=k_max {
            let location = (log_lambda + Complex64::new(0.0, 2.0 * std::f64::consts::PI * k as f64))
                / neg_log_rho;
            let numeric_check = if k.abs() <= 2 {
                let eps = 1e-6;
                let z = location + Complex64::new(eps, 0.0);
                match zeta_closed(spectra, z) {
                    Ok(v) => {
                        let estimate = (z - location) * v;
                        Some((estimate - residue).norm() / residue.norm())
                    }
                    Err(_) => None,
                }
            } else {
                None
            };
            poles.push(Pole {
                location,
                residue,
                numeric_check,
            });
        }
    }
    Ok(ZetaReport {
        s0: spectra.spectral_dimension(),
        period: spectra.zeta_period(),
        poles,
        closed_form_coeffs: spectra
            .coeffs
            .c
            .iter()
            .zip(spectra.eigen.eigenvalues.iter())
            .map(|(&c, &l)| (c, l))
            .collect(),
        warnings: vec![RESIDUE_NORMALIZATION_WARNING.to_string()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn dyadic() -> Spectra {
        Spectra::analyze(&fixtures::dyadic_graph()).unwrap()
    }

    #[test]
    fn dyadic_dirac_spectrum() {
        let s = dyadic();
        let spec = dirac_spectrum(&s, 3);
        assert_eq!(spec.len(), 3);
        assert_eq!(spec[0], (2.0, BigInt::from(2)));
        assert_eq!(spec[1], (4.0, BigInt::from(4)));
        assert_eq!(spec[2], (8.0, BigInt::from(8)));
        assert!(dirac_spectrum(&s, 0).is_empty());
    }

    #[test]
    fn fibonacci_dirac_multiplicities_match_enumeration() {
        let g = fixtures::fibonacci_graph(0.5);
        let s = Spectra::analyze(&g).unwrap();
        let spec = dirac_spectrum(&s, 2);
        assert_eq!(spec[0].1, g.horizontal_count_enumerated(1));
        assert_eq!(spec[1].1, g.horizontal_count_enumerated(2));
    }

    #[test]
    fn dyadic_zeta_at_two_is_one() {
        let s = dyadic();
        let v = zeta_closed(&s, Complex64::new(2.0, 0.0)).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        let (series, tail) = zeta_series(&s, Complex64::new(2.0, 0.0), 50).unwrap();
        assert!((series.re - 1.0).abs() < 1e-12 + tail);
    }

    #[test]
    fn dyadic_zeta_pole_rejected() {
        let s = dyadic();
        assert!(matches!(
            zeta_closed(&s, Complex64::new(1.0, 0.0)),
            Err(SpectralError::AtPole(_))
        ));
    }

    #[test]
    fn series_diverges_below_abscissa() {
        let s = dyadic();
        assert!(matches!(
            zeta_series(&s, Complex64::new(0.9, 0.0), 10),
            Err(SpectralError::DivergesAt(_, _))
        ));
    }

    #[test]
    fn closed_form_matches_series_on_half_plane() {
        for g in [
            fixtures::fibonacci_graph(0.5),
            fixtures::ev1_graph(),
            fixtures::tribonacci_graph(0.4),
        ] {
            let s = Spectra::analyze(&g).unwrap();
            for &(re, im) in &[(3.0, 0.0), (2.5, 1.0), (4.0, -2.0)] {
                let z = Complex64::new(re, im);
                if re <= s.spectral_dimension() {
                    continue;
                }
                let closed = zeta_closed(&s, z).unwrap();
                let (series, tail) = zeta_series(&s, z, 200).unwrap();
                assert!(
                    (closed - series).norm() <= tail + 1e-10,
                    "z={z}: closed {closed} series {series} tail {tail}"
                );
            }
        }
    }

    #[test]
    fn dyadic_pole_and_residue() {
        let s = dyadic();
        let report = poles_and_residues(&s, 0).unwrap();
        assert!((report.s0 - 1.0).abs() < 1e-15);
        assert_eq!(report.poles.len(), 1);
        let pole = &report.poles[0];
        assert!((pole.location - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let expected = 1.0 / std::f64::consts::LN_2;
        assert!((pole.residue.re - expected).abs() < 1e-9);
        assert!(pole.numeric_check.unwrap() < 1e-4);
        assert!(!report.warnings.is_empty());
    }

    #[test]
    fn ev1_has_pole_at_zero_from_unit_eigenvalue() {
        let g = fixtures::ev1_graph();
        let s = Spectra::analyze(&g).unwrap();
        // the unit eigenvalue coefficient vanishes for this symmetric graph,
        // so no pole at 0 survives; the log-term fixture does carry one
        let report = poles_and_residues(&s, 0).unwrap();
        assert!(report
            .poles
            .iter()
            .all(|p| (p.location - Complex64::new(0.0, 0.0)).norm() > 1e-6));

        let g2 = fixtures::log_term_graph();
        let s2 = Spectra::analyze(&g2).unwrap();
        let report2 = poles_and_residues(&s2, 0).unwrap();
        assert!(report2
            .poles
            .iter()
            .any(|p| (p.location - Complex64::new(0.0, 0.0)).norm() < 1e-9));
    }

    #[test]
    fn residues_verified_numerically_on_all_fixtures() {
        for g in [
            fixtures::dyadic_graph(),
            fixtures::fibonacci_graph(0.5),
            fixtures::log_term_graph(),
        ] {
            let s = Spectra::analyze(&g).unwrap();
            let report = poles_and_residues(&s, 1).unwrap();
            for pole in &report.poles {
                if let Some(err) = pole.numeric_check {
                    assert!(err < 1e-4, "pole {:?}: {err}", pole.location);
                }
            }
        }
    }

    #[test]
    fn pole_lattice_periodicity() {
        let s = dyadic();
        let report = poles_and_residues(&s, 3).unwrap();
        assert_eq!(report.poles.len(), 7);
        let period = report.period;
        for pole in &report.poles {
            assert!((pole.location.re - 1.0).abs() < 1e-12);
            let k = pole.location.im / period;
            assert!((k - k.round()).abs() < 1e-9);
        }
    }
}
