//! Exact arithmetic in the number field generated by a dilation factor:
//! minimal polynomials certified by exhaustive conjugation-closed factor
//! search, field elements as rational coefficient vectors, Galois embeddings,
//! Pisot diagnostics, and the (reduced) star maps summing conjugate values.

use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::matrix::IntMatrix;
use crate::poly::{char_poly, complex_roots, sort_by_modulus_then_arg, RatPoly};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("dilation factor is rational ({0}); the Pisot pipeline refuses it")]
    IrrationalityViolation(f64),
    #[error("polynomial is not monic")]
    NotMonic,
    #[error("polynomial of degree {0} exceeds the supported cap of 8")]
    DegreeTooLarge(usize),
    #[error("polynomial is reducible over the integers (factor of degree {0})")]
    Reducible(usize),
    #[error("polynomial has no real root greater than 1")]
    NoDilationRoot,
    #[error("division by zero field element")]
    DivisionByZero,
    #[error("the dilation factor is not Pisot")]
    NotPisot,
    #[error("malformed rational coefficient: {0}")]
    BadCoefficient(String),
}

/// Monic irreducible integer polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinPoly {
    pub coeffs: Vec<BigInt>,
}

impl MinPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn to_rat_poly(&self) -> RatPoly {
        RatPoly::new(
            self.coeffs
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
        )
    }
}

/// The field `Q(theta)`: certified minimal polynomial, refined conjugate
/// roots (the designated real root `theta > 1` first), and exact power sums
/// for traces.
#[derive(Debug)]
pub struct NumberField {
    pub min_poly: MinPoly,
    pub degree: usize,
    /// roots with `theta` first, then descending modulus / ascending argument
    pub roots: Vec<Complex64>,
    power_sums: Vec<BigRational>,
}

impl PartialEq for NumberField {
    fn eq(&self, other: &Self) -> bool {
        self.min_poly == other.min_poly
    }
}

impl NumberField {
    /// Validates monicity, the degree cap, irreducibility (by exhaustive
    /// search over conjugation-closed root subsets with exact division
    /// checks), and the existence of a real root above 1.
    pub fn new(min_poly: MinPoly) -> Result<Arc<Self>, FieldError> {
        let degree = min_poly.degree();
        if degree == 0 || !min_poly.coeffs.last().unwrap().is_one() {
            return Err(FieldError::NotMonic);
        }
        if degree > 8 {
            return Err(FieldError::DegreeTooLarge(degree));
        }
        let rp = min_poly.to_rat_poly();
        let root_data = complex_roots(&rp);
        if root_data.iter().any(|&(_, m)| m > 1) {
            // a repeated root means a square factor, hence reducible
            return Err(FieldError::Reducible(degree / 2));
        }
        let mut roots: Vec<(Complex64, usize)> = root_data;
        sort_by_modulus_then_arg(&mut roots);
        let flat: Vec<Complex64> = roots.iter().map(|r| r.0).collect();

        if degree > 1 {
            if let Some(found) = integer_factor(&rp, &flat, None) {
                if found.len() < degree {
                    return Err(FieldError::Reducible(found.len()));
                }
            }
        }

        // designated generator: a real root > 1
        let theta_idx = flat
            .iter()
            .position(|z| z.im == 0.0 && z.re > 1.0)
            .ok_or(FieldError::NoDilationRoot)?;
        let mut ordered = flat.clone();
        let theta = ordered.remove(theta_idx);
        let mut final_roots = vec![theta];
        final_roots.extend(ordered);

        let power_sums = newton_power_sums(&min_poly, degree);
        Ok(Arc::new(NumberField {
            min_poly,
            degree,
            roots: final_roots,
            power_sums,
        }))
    }

    pub fn theta(&self) -> f64 {
        self.roots[0].re
    }

    /// Constant term has modulus 1 (the generator is a unit).
    pub fn unimodular(&self) -> bool {
        self.min_poly.coeffs[0].abs().is_one()
    }
}

/// Newton-identity power sums `s_k = sum_j theta_j^k` for `k < degree`.
fn newton_power_sums(min_poly: &MinPoly, degree: usize) -> Vec<BigRational> {
    let c: Vec<BigRational> = min_poly
        .coeffs
        .iter()
        .map(|x| BigRational::from_integer(x.clone()))
        .collect();
    let mut s = vec![BigRational::from_integer(BigInt::from(degree as i64))];
    for k in 1..degree {
        let mut acc = -&c[degree - k] * BigRational::from_integer(BigInt::from(k as i64));
        for i in 1..k {
            let term = &c[degree - i] * &s[k - i];
            acc -= term;
        }
        s.push(acc);
    }
    s
}

/// Smallest conjugation-closed subset of `roots` (optionally required to
/// contain a distinguished index) whose monic product has integer
/// coefficients and divides `p` exactly. Returns the member indices.
fn integer_factor(p: &RatPoly, roots: &[Complex64], must_contain: Option<usize>) -> Option<Vec<usize>> {
    // conjugation classes: real singletons and conjugate pairs
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        if roots[i].im == 0.0 {
            classes.push(vec![i]);
        } else {
            let partner = (0..roots.len())
                .find(|&j| !used[j] && (roots[j] - roots[i].conj()).norm() < 1e-9);
            match partner {
                Some(j) => {
                    used[j] = true;
                    classes.push(vec![i, j]);
                }
                None => classes.push(vec![i]),
            }
        }
    }
    let required_class = must_contain.map(|idx| {
        classes
            .iter()
            .position(|c| c.contains(&idx))
            .expect("root belongs to a class")
    });

    let total = classes.len();
    let mut candidates: Vec<u32> = (1..(1u32 << total)).collect();
    candidates.sort_by_key(|mask| {
        classes
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, c)| c.len())
            .sum::<usize>()
    });
    for mask in candidates {
        if let Some(req) = required_class {
            if mask & (1 << req) == 0 {
                continue;
            }
        }
        let members: Vec<usize> = classes
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .flat_map(|(_, c)| c.iter().copied())
            .collect();
        if members.len() == roots.len() && must_contain.is_none() {
            continue; // proper factors only when testing irreducibility
        }
        // multiply out and round
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &idx in &members {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i] -= c * roots[idx];
                next[i + 1] += c;
            }
            coeffs = next;
        }
        if coeffs
            .iter()
            .any(|c| c.im.abs() > 1e-6 || (c.re - c.re.round()).abs() > 1e-6)
        {
            continue;
        }
        let candidate = RatPoly::new(
            coeffs
                .iter()
                .map(|c| BigRational::from_integer(BigInt::from(c.re.round() as i64)))
                .collect(),
        );
        let (_, rem) = p.div_rem(&candidate);
        if rem.is_zero() {
            return Some(members);
        }
    }
    None
}

/// Element of `Q(theta)` as an exact rational coefficient vector modulo the
/// minimal polynomial.
#[derive(Clone)]
pub struct FieldElement {
    pub field: Arc<NumberField>,
    /// length == field.degree, ascending powers of theta
    pub coeffs: Vec<BigRational>,
}

impl std::fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("{c}*t"),
                _ => format!("{c}*t^{i}"),
            })
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.coeffs == other.coeffs
    }
}

impl FieldElement {
    pub fn zero(field: &Arc<NumberField>) -> Self {
        FieldElement {
            field: Arc::clone(field),
            coeffs: vec![BigRational::zero(); field.degree],
        }
    }

    pub fn one(field: &Arc<NumberField>) -> Self {
        Self::from_rational(field, BigRational::one())
    }

    pub fn from_rational(field: &Arc<NumberField>, q: BigRational) -> Self {
        let mut coeffs = vec![BigRational::zero(); field.degree];
        coeffs[0] = q;
        FieldElement {
            field: Arc::clone(field),
            coeffs,
        }
    }

    pub fn from_integer(field: &Arc<NumberField>, n: i64) -> Self {
        Self::from_rational(field, BigRational::from_integer(BigInt::from(n)))
    }

    pub fn theta(field: &Arc<NumberField>) -> Self {
        let mut coeffs = vec![BigRational::zero(); field.degree];
        if field.degree == 1 {
            // rational field: theta is the (integer) root itself
            coeffs[0] = BigRational::from_integer(-field.min_poly.coeffs[0].clone());
        } else {
            coeffs[1] = BigRational::one();
        }
        FieldElement {
            field: Arc::clone(field),
            coeffs,
        }
    }

    pub fn from_coeffs(field: &Arc<NumberField>, coeffs: Vec<BigRational>) -> Self {
        assert_eq!(coeffs.len(), field.degree);
        FieldElement {
            field: Arc::clone(field),
            coeffs,
        }
    }

    /// Parses coefficients given as integers or `p/q` strings.
    pub fn from_coeff_strings(field: &Arc<NumberField>, parts: &[String]) -> Result<Self, FieldError> {
        let mut coeffs = vec![BigRational::zero(); field.degree];
        for (i, text) in parts.iter().enumerate() {
            if i >= field.degree {
                return Err(FieldError::BadCoefficient(format!(
                    "too many coefficients for degree {}",
                    field.degree
                )));
            }
            coeffs[i] = parse_rational(text)?;
        }
        Ok(FieldElement {
            field: Arc::clone(field),
            coeffs,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &FieldElement) -> FieldElement {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        FieldElement {
            field: Arc::clone(&self.field),
            coeffs,
        }
    }

    pub fn sub(&self, other: &FieldElement) -> FieldElement {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        FieldElement {
            field: Arc::clone(&self.field),
            coeffs,
        }
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement {
            field: Arc::clone(&self.field),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn mul(&self, other: &FieldElement) -> FieldElement {
        let j = self.field.degree;
        let mut conv = vec![BigRational::zero(); 2 * j - 1];
        for (a, ca) in self.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (b, cb) in other.coeffs.iter().enumerate() {
                if !cb.is_zero() {
                    conv[a + b] += ca * cb;
                }
            }
        }
        self.reduce(conv)
    }

    pub fn scale(&self, q: &BigRational) -> FieldElement {
        FieldElement {
            field: Arc::clone(&self.field),
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    fn reduce(&self, conv: Vec<BigRational>) -> FieldElement {
        let rp = RatPoly::new(conv);
        let (_, rem) = rp.div_rem(&self.field.min_poly.to_rat_poly());
        let mut coeffs = rem.coeffs;
        coeffs.resize(self.field.degree, BigRational::zero());
        FieldElement {
            field: Arc::clone(&self.field),
            coeffs,
        }
    }

    /// Multiplicative inverse by the extended Euclidean algorithm modulo the
    /// minimal polynomial.
    pub fn inverse(&self) -> Result<FieldElement, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let a = RatPoly::new(self.coeffs.clone());
        let m = self.field.min_poly.to_rat_poly();
        let (g, u, _) = extended_gcd(&a, &m);
        // g is a nonzero constant for irreducible m and a != 0
        let g0 = g.coeffs[0].clone();
        let mut coeffs = u.coeffs.iter().map(|c| c / &g0).collect::<Vec<_>>();
        coeffs.resize(self.field.degree.max(coeffs.len()), BigRational::zero());
        let rp = RatPoly::new(coeffs);
        let (_, rem) = rp.div_rem(&m);
        let mut out = rem.coeffs;
        out.resize(self.field.degree, BigRational::zero());
        Ok(FieldElement {
            field: Arc::clone(&self.field),
            coeffs: out,
        })
    }

    /// Value at the `j`-th conjugate root (`j = 0` is theta itself).
    pub fn embed(&self, j: usize) -> Complex64 {
        let root = self.field.roots[j];
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * root + Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
        }
        acc
    }

    /// Real value at the designated root.
    pub fn to_real(&self) -> f64 {
        self.embed(0).re
    }

    /// Exact field trace `sum_j value(theta_j)`, a rational number.
    pub fn trace_exact(&self) -> BigRational {
        let mut acc = BigRational::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc += c * &self.field.power_sums[i];
            }
        }
        acc
    }
}

fn extended_gcd(a: &RatPoly, b: &RatPoly) -> (RatPoly, RatPoly, RatPoly) {
    let mut r0 = a.clone();
    let mut r1 = b.clone();
    let mut s0 = RatPoly::new(vec![BigRational::one()]);
    let mut s1 = RatPoly::zero();
    let mut t0 = RatPoly::zero();
    let mut t1 = RatPoly::new(vec![BigRational::one()]);
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(&r1);
        let s_next = sub_poly(&s0, &q.mul(&s1));
        let t_next = sub_poly(&t0, &q.mul(&t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s_next;
        t0 = t1;
        t1 = t_next;
    }
    (r0, s0, t0)
}

fn sub_poly(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let len = a.coeffs.len().max(b.coeffs.len());
    let mut out = vec![BigRational::zero(); len];
    for (i, c) in a.coeffs.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.coeffs.iter().enumerate() {
        out[i] -= c;
    }
    RatPoly::new(out)
}

pub fn parse_rational(text: &str) -> Result<BigRational, FieldError> {
    let trimmed = text.trim();
    if let Some((num, den)) = trimmed.split_once('/') {
        let n = BigInt::from_str(num.trim())
            .map_err(|_| FieldError::BadCoefficient(text.to_string()))?;
        let d = BigInt::from_str(den.trim())
            .map_err(|_| FieldError::BadCoefficient(text.to_string()))?;
        if d.is_zero() {
            return Err(FieldError::BadCoefficient(text.to_string()));
        }
        Ok(BigRational::new(n, d))
    } else {
        BigInt::from_str(trimmed)
            .map(BigRational::from_integer)
            .map_err(|_| FieldError::BadCoefficient(text.to_string()))
    }
}

// ---------------------------------------------------------------------------
// dilation-factor minimal polynomials and Pisot diagnostics

/// Minimal polynomial of `theta = pf^(1/d)` extracted from the characteristic
/// polynomial (substituted to the `theta` variable for `d > 1`), certified by
/// exact division. A rational `theta` is refused.
pub fn minimal_polynomial_of_pf(a: &IntMatrix, d: usize) -> Result<MinPoly, FieldError> {
    assert!(d >= 1);
    let mp = pf_minimal_poly(a, d)?;
    if mp.degree() == 1 {
        let theta = -mp.coeffs[0].to_f64().unwrap();
        return Err(FieldError::IrrationalityViolation(theta));
    }
    Ok(mp)
}

/// Like `minimal_polynomial_of_pf` but accepting rational dilation factors
/// (degree-1 fields).
pub fn pf_minimal_poly(a: &IntMatrix, d: usize) -> Result<MinPoly, FieldError> {
    let cp = char_poly(a);
    let substituted = if d == 1 {
        cp
    } else {
        let mut coeffs = vec![BigRational::zero(); cp.coeffs.len() * d - d + 1];
        for (i, c) in cp.coeffs.iter().enumerate() {
            coeffs[i * d] = c.clone();
        }
        RatPoly::new(coeffs)
    };
    let mut root_data = complex_roots(&substituted);
    sort_by_modulus_then_arg(&mut root_data);
    let flat: Vec<Complex64> = root_data.iter().map(|r| r.0).collect();
    // theta is the dominant positive real root
    let theta_idx = flat
        .iter()
        .position(|z| z.im == 0.0 && z.re > 1.0)
        .ok_or(FieldError::NoDilationRoot)?;
    let members = integer_factor(&substituted, &flat, Some(theta_idx))
        .ok_or(FieldError::NoDilationRoot)?;
    if members.len() > 8 {
        return Err(FieldError::DegreeTooLarge(members.len()));
    }
    // reconstruct integer coefficients of the certified factor
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &idx in &members {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (i, &c) in coeffs.iter().enumerate() {
            next[i] -= c * flat[idx];
            next[i + 1] += c;
        }
        coeffs = next;
    }
    Ok(MinPoly {
        coeffs: coeffs
            .iter()
            .map(|c| BigInt::from(c.re.round() as i64))
            .collect(),
    })
}

/// Galois data of the dilation factor: conjugates sorted by descending
/// modulus, the subleading modulus class, unimodularity, and phases.
#[derive(Debug, Clone)]
pub struct PisotData {
    pub theta: f64,
    /// conjugates other than theta, descending modulus then argument
    pub conjugates: Vec<Complex64>,
    pub degree: usize,
    /// number of conjugates sharing the subleading modulus
    pub l_count: usize,
    pub unimodular: bool,
    pub pisot: bool,
    /// phases `alpha_j in [0, 2 pi)` of the subleading conjugates
    pub phases: Vec<f64>,
}

/// Modulus ties among the subleading conjugates are grouped with this
/// (adjustable) threshold.
pub const SUBLEADING_TIE_THRESHOLD: f64 = 1e-9;

pub fn pisot_analyze(field: &NumberField) -> PisotData {
    let theta = field.theta();
    let conjugates: Vec<Complex64> = field.roots[1..].to_vec();
    let degree = field.degree;
    let pisot = degree > 1 && conjugates.iter().all(|z| z.norm() < 1.0 - 1e-10);
    let (l_count, phases) = if conjugates.is_empty() {
        (0, Vec::new())
    } else {
        let top = conjugates[0].norm();
        let tied: Vec<&Complex64> = conjugates
            .iter()
            .take_while(|z| (z.norm() - top).abs() < SUBLEADING_TIE_THRESHOLD)
            .collect();
        let phases = tied
            .iter()
            .map(|z| {
                let mut a = z.arg();
                if a < 0.0 {
                    a += 2.0 * std::f64::consts::PI;
                }
                a
            })
            .collect();
        // l_count follows the convention that the subleading class is
        // indexed 2..=L among all conjugates of theta
        (tied.len() + 1, phases)
    };
    PisotData {
        theta,
        conjugates,
        degree,
        l_count,
        unimodular: field.unimodular(),
        pisot,
        phases,
    }
}

/// Conjugate sums of a field element: the full star value
/// `sum_{j=2}^J p(theta_j)` and the reduced star value restricted to the
/// subleading modulus class `sum_{j=2}^L p(theta_j)`.
pub fn star_values(
    p: &FieldElement,
    pd: &PisotData,
) -> Result<(Complex64, Complex64), FieldError> {
    if !pd.pisot {
        return Err(FieldError::NotPisot);
    }
    let mut full = Complex64::new(0.0, 0.0);
    let mut reduced = Complex64::new(0.0, 0.0);
    for (idx, _) in pd.conjugates.iter().enumerate() {
        let value = p.embed(idx + 1);
        full += value;
        if idx + 2 <= pd.l_count {
            reduced += value;
        }
    }
    Ok((full, reduced))
}
