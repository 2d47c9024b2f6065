//! Square non-negative integer matrices indexed by graph vertices: exact
//! big-integer powers, primitivity tests and scaled floating-point powers for
//! log-scale asymptotics.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Square non-negative integer matrix; entry `(v, w)` counts edges with
/// source `v` and range `w`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    dim: usize,
    data: Vec<i64>,
}

/// Exact big-integer matrix, used for matrix powers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigMatrix {
    dim: usize,
    data: Vec<BigInt>,
}

/// Outcome of the primitivity test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitivityReport {
    pub primitive: bool,
    /// Smallest `N` with `A^N > 0` entrywise, when primitive.
    pub witness: Option<usize>,
    /// A zero entry of `A^N` at the Wielandt-style bound, when not primitive.
    pub zero_entry: Option<(usize, usize)>,
}

impl IntMatrix {
    pub fn new(dim: usize, data: Vec<i64>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix data length mismatch");
        assert!(data.iter().all(|&x| x >= 0), "entries must be non-negative");
        IntMatrix { dim, data }
    }

    pub fn zero(dim: usize) -> Self {
        IntMatrix {
            dim,
            data: vec![0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: i64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[i64] {
        &self.data
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut out = IntMatrix::zero(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn to_big(&self) -> BigMatrix {
        BigMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&x| BigInt::from(x)).collect(),
        }
    }

    /// Exact `A^n` as a big-integer matrix (`A^0` is the identity).
    pub fn pow(&self, n: usize) -> BigMatrix {
        let mut result = BigMatrix::identity(self.dim);
        let mut base = self.to_big();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Smallest `N <= (dim-1)*dim + 1` with `A^N > 0` entrywise, or a
    /// certificate that no such power exists.
    pub fn primitivity(&self) -> PrimitivityReport {
        let bound = (self.dim - 1) * self.dim + 1;
        let mut boolean: Vec<bool> = self.data.iter().map(|&x| x > 0).collect();
        for n in 1..=bound {
            if boolean.iter().all(|&b| b) {
                return PrimitivityReport {
                    primitive: true,
                    witness: Some(n),
                    zero_entry: None,
                };
            }
            if n < bound {
                boolean = bool_mul(self.dim, &boolean, &self.data);
            }
        }
        let hole = boolean.iter().position(|&b| !b).unwrap_or(0);
        PrimitivityReport {
            primitive: false,
            witness: None,
            zero_entry: Some((hole / self.dim, hole % self.dim)),
        }
    }

    /// `A^n` in scaled floating point: returns `(m, e)` with `A^n ~= m * 2^e`
    /// entrywise, usable far beyond what `f64` alone can represent.
    pub fn pow_scaled(&self, n: usize) -> ScaledMatrix {
        let mut result = ScaledMatrix::identity(self.dim);
        let base = ScaledMatrix::from_int(self);
        for _ in 0..n {
            result = result.mul(&base);
        }
        result
    }
}

fn bool_mul(dim: usize, left: &[bool], right: &[i64]) -> Vec<bool> {
    let mut out = vec![false; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            if left[i * dim + k] {
                for j in 0..dim {
                    if right[k * dim + j] > 0 {
                        out[i * dim + j] = true;
                    }
                }
            }
        }
    }
    out
}

impl BigMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![BigInt::zero(); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = BigInt::one();
        }
        BigMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &BigInt {
        &self.data[row * self.dim + col]
    }

    pub fn mul(&self, other: &BigMatrix) -> BigMatrix {
        assert_eq!(self.dim, other.dim);
        let dim = self.dim;
        let mut data = vec![BigInt::zero(); dim * dim];
        for i in 0..dim {
            for k in 0..dim {
                let a = &self.data[i * dim + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..dim {
                    let b = &other.data[k * dim + j];
                    if !b.is_zero() {
                        data[i * dim + j] += a * b;
                    }
                }
            }
        }
        BigMatrix { dim, data }
    }

    pub fn all_positive(&self) -> bool {
        self.data.iter().all(|x| x.is_positive())
    }

    /// Sum of the entries of column `col`.
    pub fn column_sum(&self, col: usize) -> BigInt {
        (0..self.dim).map(|row| self.get(row, col).clone()).sum()
    }
}

/// Floating-point matrix with a shared power-of-two exponent, so that entries
/// of `A^n` can be tracked in log scale for arbitrarily large `n`.
#[derive(Debug, Clone)]
pub struct ScaledMatrix {
    dim: usize,
    mantissa: Vec<f64>,
    exp2: i64,
}

impl ScaledMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut mantissa = vec![0.0; dim * dim];
        for i in 0..dim {
            mantissa[i * dim + i] = 1.0;
        }
        ScaledMatrix {
            dim,
            mantissa,
            exp2: 0,
        }
    }

    pub fn from_int(a: &IntMatrix) -> Self {
        ScaledMatrix {
            dim: a.dim(),
            mantissa: a.entries().iter().map(|&x| x as f64).collect(),
            exp2: 0,
        }
    }

    pub fn mul(&self, other: &ScaledMatrix) -> ScaledMatrix {
        assert_eq!(self.dim, other.dim);
        let dim = self.dim;
        let mut mantissa = vec![0.0; dim * dim];
        for i in 0..dim {
            for k in 0..dim {
                let a = self.mantissa[i * dim + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..dim {
                    mantissa[i * dim + j] += a * other.mantissa[k * dim + j];
                }
            }
        }
        let mut out = ScaledMatrix {
            dim,
            mantissa,
            exp2: self.exp2 + other.exp2,
        };
        out.normalize();
        out
    }

    fn normalize(&mut self) {
        let max = self
            .mantissa
            .iter()
            .fold(0.0_f64, |acc, &x| acc.max(x.abs()));
        if max == 0.0 {
            return;
        }
        let shift = max.log2().floor() as i64;
        if shift != 0 {
            let factor = (2.0_f64).powi(-shift as i32);
            for x in &mut self.mantissa {
                *x *= factor;
            }
            self.exp2 += shift;
        }
    }

    /// Natural logarithm of entry `(row, col)`; `-inf` for zero entries.
    pub fn ln_entry(&self, row: usize, col: usize) -> f64 {
        let m = self.mantissa[row * self.dim + col];
        if m <= 0.0 {
            f64::NEG_INFINITY
        } else {
            m.ln() + self.exp2 as f64 * std::f64::consts::LN_2
        }
    }

    /// Natural logarithm of the sum of column `col`.
    pub fn ln_column_sum(&self, col: usize) -> f64 {
        let s: f64 = (0..self.dim).map(|r| self.mantissa[r * self.dim + col]).sum();
        if s <= 0.0 {
            f64::NEG_INFINITY
        } else {
            s.ln() + self.exp2 as f64 * std::f64::consts::LN_2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib() -> IntMatrix {
        IntMatrix::new(2, vec![1, 1, 1, 0])
    }

    #[test]
    fn power_matches_fibonacci_recursion() {
        // A^n for the Fibonacci matrix holds consecutive Fibonacci numbers.
        let a = fib();
        let p10 = a.pow(10);
        assert_eq!(p10.get(0, 0), &BigInt::from(89));
        assert_eq!(p10.get(0, 1), &BigInt::from(55));
        assert_eq!(p10.get(1, 0), &BigInt::from(55));
        assert_eq!(p10.get(1, 1), &BigInt::from(34));
    }

    #[test]
    fn power_zero_is_identity() {
        let a = fib();
        assert_eq!(a.pow(0), BigMatrix::identity(2));
    }

    #[test]
    fn dyadic_power() {
        let a = IntMatrix::new(1, vec![2]);
        assert_eq!(a.pow(5).get(0, 0), &BigInt::from(32));
    }

    #[test]
    fn primitivity_witnesses() {
        assert_eq!(fib().primitivity().witness, Some(2));
        assert_eq!(IntMatrix::new(1, vec![2]).primitivity().witness, Some(1));
        let id = IntMatrix::new(2, vec![1, 0, 0, 1]);
        let report = id.primitivity();
        assert!(!report.primitive);
        assert!(report.zero_entry.is_some());
    }

    #[test]
    fn scaled_power_tracks_logs() {
        let a = fib();
        let s = a.pow_scaled(300);
        let exact = a.pow(300);
        // compare ln of the (0,0) entry against the exact big integer
        let exact_ln = {
            let (_, digits) = exact.get(0, 0).to_radix_be(2);
            // ln via bit length and the leading 53 bits
            let bits = digits.len();
            let mut lead = 0.0_f64;
            for &d in digits.iter().take(53) {
                lead = lead * 2.0 + d as f64;
            }
            lead.ln() + ((bits.saturating_sub(53)) as f64) * std::f64::consts::LN_2
        };
        assert!((s.ln_entry(0, 0) - exact_ln).abs() < 1e-9 * exact_ln.abs());
    }
}
