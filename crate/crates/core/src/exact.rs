//! Exact finite-sample null distribution of Δ̂* under exponentiality.
//!
//! Under the null the normalized spacings are i.i.d. exponential, so
//! `P(Δ̂* > x) = P(Σ (dᵢ − x) Dᵢ > 0)` and the tail is the signed mixture
//!
//! ```text
//! P(Δ̂* > x) = Σ_{i: x ≤ dᵢ} Π_{j≠i} (dᵢ − x)/(dᵢ − dⱼ).
//! ```
//!
//! Because `dᵢ − dⱼ = (j − i)/(n − 1)`, term `i` equals
//! `(−1)^{i−1} C(n−1, i−1) Aᵢ^{n−1} / (n−1)!` with `Aᵢ = (n−1)(dᵢ − x)`.
//! The terms alternate in sign and grow combinatorially, so double precision
//! loses every significant digit well before n = 100. Since every `f64` is a
//! dyadic rational, the whole sum is evaluated exactly over the integers and
//! only the final quotient is rounded, to `precision_bits` bits.
//!
//! The law does not depend on the exponential rate: Δ̂* is scale invariant.

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statistic::{coefficients, Coefficients};

/// Upper-tail levels of the published critical-value table.
pub const TABLE_LEVELS: [f64; 4] = [0.10, 0.05, 0.025, 0.01];

/// Sample sizes of the published critical-value table.
pub const TABLE_SIZES: [usize; 17] = [
    2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 25, 30, 40, 50, 75, 100,
];

/// Bisection stops once the bracket is narrower than this.
pub const CRITICAL_VALUE_TOLERANCE: f64 = 1e-12;
const MAX_BISECTIONS: usize = 60;

/// Exact null law of Δ̂* for a fixed sample size.
#[derive(Debug, Clone)]
pub struct ExactNull {
    coefficients: Coefficients,
    precision_bits: u32,
    /// `(−1)^{i−1} C(n−1, i−1)` for i = 1..n.
    signed_binomials: Vec<BigInt>,
    /// `(n−1)!`
    factorial: BigInt,
}

impl ExactNull {
    /// Null law for sample size `n ≥ 2`, rounding to `max(64, 16n)` bits.
    pub fn new(n: usize) -> Result<Self> {
        let bits = (16 * n).max(64).min(u32::MAX as usize) as u32;
        Self::with_precision(n, bits)
    }

    /// Null law with an explicit rounding precision (at least 64 bits).
    pub fn with_precision(n: usize, precision_bits: u32) -> Result<Self> {
        let coefficients = coefficients(n)?;
        if precision_bits < 64 {
            return Err(Error::Numeric(format!(
                "precision of {precision_bits} bits is below the 64-bit minimum"
            )));
        }
        let m = n - 1;
        let mut signed_binomials = Vec::with_capacity(n);
        let mut c = BigInt::one();
        for k in 0..n {
            let term = if k % 2 == 0 { c.clone() } else { -c.clone() };
            signed_binomials.push(term);
            // C(m, k+1) = C(m, k) (m − k)/(k + 1)
            c = c * BigInt::from(m - k) / BigInt::from(k + 1);
        }
        let factorial = (1..=m).fold(BigInt::one(), |acc, k| acc * BigInt::from(k));
        Ok(Self {
            coefficients,
            precision_bits,
            signed_binomials,
            factorial,
        })
    }

    pub fn n(&self) -> usize {
        self.coefficients.n()
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    /// `P(Δ̂* > x)` under the null, clamped to [0, 1]. NaN maps to NaN.
    pub fn survival(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x >= 0.5 {
            return 0.0;
        }
        if x < -0.5 {
            return 1.0;
        }
        let n = self.n();
        let m = n - 1;

        // x = mantissa · 2^exponent exactly; pick K so that 2^K (n−1)(dᵢ − x)
        // is an integer for every i.
        let (mantissa, exponent) = decompose(x);
        let k_shift = exponent.checked_neg().unwrap_or(0).max(1) as usize;
        let x_scaled: BigInt = {
            let shifted = BigInt::from(mantissa) * BigInt::from(m);
            let up = exponent + k_shift as i64;
            debug_assert!(up >= 0);
            shifted << (up as usize)
        };

        let mut numerator = BigInt::zero();
        for i in 1..=n {
            // 2^K (n−1) dᵢ = (n − 2i + 1) 2^(K−1)
            let half_term = BigInt::from(n as i64 - 2 * i as i64 + 1) << (k_shift - 1);
            let a = half_term - &x_scaled;
            if a.sign() == Sign::Minus {
                // x > dᵢ, and every later dⱼ is smaller still.
                break;
            }
            numerator += &self.signed_binomials[i - 1] * a.pow(m as u32);
        }
        let denominator = &self.factorial << (k_shift * m);
        ratio_to_f64(&numerator, &denominator, self.precision_bits).clamp(0.0, 1.0)
    }

    /// One-sided p-value of an observed statistic.
    pub fn p_value(&self, observed: f64) -> f64 {
        self.survival(observed)
    }

    /// The x with `P(Δ̂* > x) = alpha`, by bisection on [−1/2, 1/2].
    pub fn critical_value(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidLevel(alpha));
        }
        let (mut lo, mut hi) = (-0.5_f64, 0.5_f64);
        for _ in 0..MAX_BISECTIONS {
            if hi - lo <= CRITICAL_VALUE_TOLERANCE {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.survival(mid) > alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Critical values for every (size, level) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalTable {
    pub levels: Vec<f64>,
    pub sizes: Vec<usize>,
    /// `values[row][col]` is the critical value for `sizes[row]`, `levels[col]`.
    pub values: Vec<Vec<f64>>,
}

impl CriticalTable {
    pub fn get(&self, n: usize, alpha: f64) -> Option<f64> {
        let r = self.sizes.iter().position(|&s| s == n)?;
        let c = self.levels.iter().position(|&a| a == alpha)?;
        Some(self.values[r][c])
    }
}

/// Computes a table of exact critical values. Rows are evaluated in parallel.
pub fn critical_table(levels: &[f64], sizes: &[usize]) -> Result<CriticalTable> {
    if let Some(&bad) = levels.iter().find(|&&a| !(a > 0.0 && a < 1.0)) {
        return Err(Error::InvalidLevel(bad));
    }
    let values = sizes
        .par_iter()
        .map(|&n| {
            let null = ExactNull::new(n)?;
            levels.iter().map(|&a| null.critical_value(a)).collect()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(CriticalTable {
        levels: levels.to_vec(),
        sizes: sizes.to_vec(),
        values,
    })
}

/// `x = mantissa · 2^exponent` with an odd (or zero) mantissa.
fn decompose(x: f64) -> (i64, i64) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1 } else { -1 };
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mantissa, mut exponent) = if raw_exp == 0 {
        (frac as i64, -1074)
    } else {
        ((frac | (1u64 << 52)) as i64, raw_exp - 1075)
    };
    let tz = mantissa.trailing_zeros() as i64;
    mantissa >>= tz;
    exponent += tz;
    (sign * mantissa, exponent)
}

/// Rounds `num / den` (den > 0) to an f64 via a `bits`-bit integer quotient.
fn ratio_to_f64(num: &BigInt, den: &BigInt, bits: u32) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let negative = num.sign() == Sign::Minus;
    let q: BigInt = (num.abs() << bits as usize) / den;
    let qbits = q.bits();
    let (top, shift) = if qbits > 64 {
        let s = qbits - 64;
        ((&q >> s as usize).to_u64().unwrap_or(u64::MAX), s as i64)
    } else {
        (q.to_u64().unwrap_or(0), 0)
    };
    let v = ldexp(top as f64, shift - bits as i64);
    if negative {
        -v
    } else {
        v
    }
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return 0.0;
        }
    }
    x * 2f64.powi(e as i32)
}
