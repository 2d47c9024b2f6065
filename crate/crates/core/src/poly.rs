//! Exact rational polynomial arithmetic (characteristic polynomials,
//! square-free decomposition) and simultaneous complex root finding with
//! Newton refinement. Degrees here are tiny, so clarity beats asymptotics.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::matrix::IntMatrix;

/// Dense polynomial with exact rational coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatPoly {
    pub coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        RatPoly { coeffs }
    }

    pub fn from_integers(ints: &[i64]) -> Self {
        RatPoly::new(
            ints.iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn zero() -> Self {
        RatPoly::new(vec![BigRational::zero()])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn leading(&self) -> &BigRational {
        self.coeffs.last().expect("nonempty")
    }

    pub fn monic(&self) -> RatPoly {
        let lead = self.leading().clone();
        assert!(!lead.is_zero(), "zero polynomial has no monic form");
        RatPoly::new(self.coeffs.iter().map(|c| c / &lead).collect())
    }

    pub fn derivative(&self) -> RatPoly {
        if self.coeffs.len() <= 1 {
            return RatPoly::zero();
        }
        RatPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn mul(&self, other: &RatPoly) -> RatPoly {
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RatPoly::new(out)
    }

    /// Euclidean division; panics if the divisor is zero.
    pub fn div_rem(&self, divisor: &RatPoly) -> (RatPoly, RatPoly) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        if self.degree() < dd || self.is_zero() {
            return (RatPoly::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); self.degree() - dd + 1];
        let lead = divisor.leading().clone();
        for k in (0..quot.len()).rev() {
            let factor = &rem[k + dd] / &lead;
            if factor.is_zero() {
                continue;
            }
            quot[k] = factor.clone();
            for (j, c) in divisor.coeffs.iter().enumerate() {
                let idx = k + j;
                let sub = c * &factor;
                rem[idx] -= sub;
            }
        }
        (RatPoly::new(quot), RatPoly::new(rem))
    }

    pub fn gcd(&self, other: &RatPoly) -> RatPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
        }
        acc
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// True when every coefficient is an integer.
    pub fn is_integer(&self) -> bool {
        self.coeffs.iter().all(|c| c.denom().is_one())
    }

    pub fn integer_coeffs(&self) -> Option<Vec<BigInt>> {
        if !self.is_integer() {
            return None;
        }
        Some(self.coeffs.iter().map(|c| c.numer().clone()).collect())
    }
}

/// Characteristic polynomial `det(xI - A)` by the Faddeev-LeVerrier
/// recursion, exact over the rationals (coefficients are integers for an
/// integer matrix).
pub fn char_poly(a: &IntMatrix) -> RatPoly {
    let n = a.dim();
    let ab: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| BigRational::from_integer(BigInt::from(a.get(i, j))))
                .collect()
        })
        .collect();
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();
    // m = A M_{k-1} + c_{n-k+1} I, c = -tr(A M)/k
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for k in 1..=n {
        // am = A * m
        let mut am = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for l in 0..n {
                if ab[i][l].is_zero() {
                    continue;
                }
                for j in 0..n {
                    let term = &ab[i][l] * &m[l][j];
                    am[i][j] += term;
                }
            }
        }
        let mut trace = BigRational::zero();
        for i in 0..n {
            trace += &am[i][i];
        }
        let c = -trace / BigRational::from_integer(BigInt::from(k));
        coeffs[n - k] = c.clone();
        for i in 0..n {
            am[i][i] += &c;
        }
        m = am;
    }
    RatPoly::new(coeffs)
}

/// Yun's square-free decomposition: returns `(q_i, i)` pairs with
/// `p = prod q_i^i` up to a constant, each `q_i` square-free and monic.
pub fn squarefree_decomposition(p: &RatPoly) -> Vec<(RatPoly, usize)> {
    let p = p.monic();
    let dp = p.derivative();
    let g = p.gcd(&dp);
    if g.degree() == 0 {
        return vec![(p, 1)];
    }
    let mut out = Vec::new();
    let (mut w, _) = p.div_rem(&g);
    let (mut y, _) = dp.div_rem(&g);
    let mut i = 1;
    loop {
        // z = y - w'
        let wd = w.derivative();
        let mut z_coeffs = y.coeffs.clone();
        z_coeffs.resize(z_coeffs.len().max(wd.coeffs.len()), BigRational::zero());
        for (k, c) in wd.coeffs.iter().enumerate() {
            z_coeffs[k] -= c;
        }
        let z = RatPoly::new(z_coeffs);
        if z.is_zero() {
            if w.degree() > 0 {
                out.push((w.monic(), i));
            }
            break;
        }
        let q = w.gcd(&z);
        if q.degree() > 0 {
            out.push((q.clone(), i));
        }
        let (w2, _) = w.div_rem(&q);
        let (y2, _) = z.div_rem(&q);
        w = w2;
        y = y2;
        i += 1;
        if w.degree() == 0 {
            break;
        }
    }
    out
}

/// All complex roots of `p` with algebraic multiplicities, found on the
/// square-free factors by Durand-Kerner iteration and polished by Newton to
/// ~1e-13 relative accuracy. Real roots are returned with zero imaginary
/// part; complex roots appear in exact conjugate pairs.
pub fn complex_roots(p: &RatPoly) -> Vec<(Complex64, usize)> {
    let mut out = Vec::new();
    for (factor, multiplicity) in squarefree_decomposition(p) {
        // strip zero roots exactly
        let mut f = factor.clone();
        let mut zeros = 0usize;
        while f.coeffs.len() > 1 && f.coeffs[0].is_zero() {
            f = RatPoly::new(f.coeffs[1..].to_vec());
            zeros += 1;
        }
        if zeros > 0 {
            out.push((Complex64::new(0.0, 0.0), multiplicity * zeros));
        }
        if f.degree() == 0 {
            continue;
        }
        for root in squarefree_roots(&f) {
            out.push((root, multiplicity));
        }
    }
    out
}

fn squarefree_roots(p: &RatPoly) -> Vec<Complex64> {
    let coeffs = p.monic().coeffs_f64();
    let degree = coeffs.len() - 1;
    if degree == 1 {
        return vec![Complex64::new(-coeffs[0], 0.0)];
    }
    if degree == 2 {
        let b = coeffs[1];
        let c = coeffs[0];
        let disc = Complex64::new(b * b - 4.0 * c, 0.0).sqrt();
        let r1 = (-b + disc.re) / 2.0;
        let r2 = (-b - disc.re) / 2.0;
        if b * b - 4.0 * c >= 0.0 {
            return vec![Complex64::new(r1, 0.0), Complex64::new(r2, 0.0)];
        }
        let im = (4.0 * c - b * b).sqrt() / 2.0;
        return vec![
            Complex64::new(-b / 2.0, im),
            Complex64::new(-b / 2.0, -im),
        ];
    }

    // Durand-Kerner with roots started on a circle inside the Cauchy bound
    let bound = 1.0 + coeffs[..degree].iter().fold(0.0_f64, |m, &c| m.max(c.abs()));
    let mut roots: Vec<Complex64> = (0..degree)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / degree as f64 + 0.35;
            Complex64::from_polar(0.7 * bound, angle)
        })
        .collect();
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        let mut value = Complex64::new(0.0, 0.0);
        for &c in &coeffs[..degree] {
            value += acc * c;
            acc *= z;
        }
        value + acc
    };
    for _ in 0..600 {
        let mut shift = 0.0_f64;
        for i in 0..degree {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..degree {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            shift = shift.max(delta.norm());
        }
        if shift < 1e-14 * bound {
            break;
        }
    }

    // Newton polish on the exact rational polynomial
    let dp = p.derivative();
    for r in &mut roots {
        for _ in 0..8 {
            let f = p.eval_complex(*r);
            let d = dp.eval_complex(*r);
            if d.norm() == 0.0 {
                break;
            }
            let step = f / d;
            *r -= step;
            if step.norm() < 1e-15 * (1.0 + r.norm()) {
                break;
            }
        }
    }

    // canonicalize: snap near-real roots, pair conjugates exactly
    let scale = roots.iter().fold(1.0_f64, |m, r| m.max(r.norm()));
    for r in &mut roots {
        if r.im.abs() < 1e-9 * scale {
            r.im = 0.0;
        }
    }
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        if used[i] || roots[i].im == 0.0 {
            continue;
        }
        let mut best = None;
        let mut best_dist = f64::INFINITY;
        for j in 0..roots.len() {
            if j == i || used[j] || roots[j].im == 0.0 {
                continue;
            }
            let dist = (roots[j] - roots[i].conj()).norm();
            if dist < best_dist {
                best_dist = dist;
                best = Some(j);
            }
        }
        if let Some(j) = best {
            let re = 0.5 * (roots[i].re + roots[j].re);
            let im = 0.5 * (roots[i].im.abs() + roots[j].im.abs());
            let sign = roots[i].im.signum();
            roots[i] = Complex64::new(re, sign * im);
            roots[j] = Complex64::new(re, -sign * im);
            used[i] = true;
            used[j] = true;
        }
    }
    roots
}

/// Sorts values by descending modulus, ties broken by ascending principal
/// argument; used for stable eigenvalue and conjugate indexing.
pub fn sort_by_modulus_then_arg(values: &mut [(Complex64, usize)]) {
    values.sort_by(|a, b| {
        let (ma, mb) = (a.0.norm(), b.0.norm());
        mb.partial_cmp(&ma)
            .unwrap()
            .then(a.0.arg().partial_cmp(&b.0.arg()).unwrap())
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn char_poly_fibonacci() {
        let a = fixtures::fibonacci_graph(0.5).graph_matrix();
        let p = char_poly(&a);
        assert_eq!(p, RatPoly::from_integers(&[-1, -1, 1]));
    }

    #[test]
    fn char_poly_tribonacci() {
        let a = fixtures::tribonacci_graph(0.5).graph_matrix();
        let p = char_poly(&a);
        assert_eq!(p, RatPoly::from_integers(&[-1, -1, -1, 1]));
    }

    #[test]
    fn char_poly_log_term_fixture_has_roots_3_1_0() {
        let a = fixtures::log_term_graph().graph_matrix();
        let p = char_poly(&a);
        // x(x-1)(x-3) = x^3 - 4x^2 + 3x
        assert_eq!(p, RatPoly::from_integers(&[0, 3, -4, 1]));
    }

    #[test]
    fn roots_golden_mean() {
        let p = RatPoly::from_integers(&[-1, -1, 1]);
        let mut roots = complex_roots(&p);
        sort_by_modulus_then_arg(&mut roots);
        let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
        assert!((roots[0].0.re - phi).abs() < 1e-13);
        assert!((roots[1].0.re - (1.0 - 5.0_f64.sqrt()) / 2.0).abs() < 1e-13);
        assert_eq!(roots[0].1, 1);
    }

    #[test]
    fn roots_with_multiplicity() {
        // (x-2)^2 (x+1) = x^3 - 3x^2 + 4
        let p = RatPoly::from_integers(&[4, 0, -3, 1]);
        let mut roots = complex_roots(&p);
        sort_by_modulus_then_arg(&mut roots);
        assert_eq!(roots.len(), 2);
        assert!((roots[0].0.re - 2.0).abs() < 1e-12);
        assert_eq!(roots[0].1, 2);
        assert!((roots[1].0.re + 1.0).abs() < 1e-12);
        assert_eq!(roots[1].1, 1);
    }

    #[test]
    fn conjugate_pairs_are_exact() {
        // tribonacci: one real root, one conjugate pair
        let p = RatPoly::from_integers(&[-1, -1, -1, 1]);
        let roots = complex_roots(&p);
        let complex: Vec<Complex64> = roots
            .iter()
            .map(|r| r.0)
            .filter(|z| z.im != 0.0)
            .collect();
        assert_eq!(complex.len(), 2);
        assert_eq!(complex[0].re, complex[1].re);
        assert_eq!(complex[0].im, -complex[1].im);
    }

    #[test]
    fn division_and_gcd() {
        let a = RatPoly::from_integers(&[-1, 0, 1]); // x^2 - 1
        let b = RatPoly::from_integers(&[1, 1]); // x + 1
        let (q, r) = a.div_rem(&b);
        assert!(r.is_zero());
        assert_eq!(q, RatPoly::from_integers(&[-1, 1]));
        assert_eq!(a.gcd(&b), b.monic());
    }
}
