//! The scale-free departure statistic Δ̂* and its three equivalent forms.
//!
//! For an uncensored sample with order statistics `x(1) ≤ … ≤ x(n)` the
//! statistic is the ratio of the U-statistic
//!
//! ```text
//! Δ̂ = 2/(n(n−1)) Σ_{i<j} [ min(xᵢ, xⱼ) − (xᵢ + xⱼ)/4 ]
//! ```
//!
//! to the sample mean. It can be computed three ways:
//!
//! * from the normalized spacings `Dᵢ = (n−i+1)(x(i) − x(i−1))` as
//!   `Σ dᵢDᵢ / Σ Dᵢ` with `dᵢ = (n−2i+1)/(2(n−1))`,
//! * from the order statistics as `Σ (3n−4i+1) x(i) / (2n(n−1))` over the mean,
//! * from the pairwise kernel directly, in O(n²).
//!
//! The spacings form is the one the exact null law is stated in and is used
//! as the canonical value; the others exist for cross-validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summation::{sum, CompensatedSum};

/// An uncensored sample of lifetimes, held in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Sample {
    sorted: Vec<f64>,
}

impl Sample {
    /// Validates and sorts the observations.
    ///
    /// Requires at least two finite, nonnegative values, not all zero.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidSampleSize {
                n: values.len(),
                min: 2,
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidObservation { index, value });
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::DegenerateSample(
                "all observations are zero, so the mean vanishes".into(),
            ));
        }
        let mut sorted = values;
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Order statistics, ascending.
    pub fn order_statistics(&self) -> &[f64] {
        &self.sorted
    }

    pub fn mean(&self) -> f64 {
        sum(self.sorted.iter().copied()) / self.len() as f64
    }

    /// The sample with every observation multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::DegenerateSample(format!("scale factor {c} must be positive")));
        }
        Sample::new(self.sorted.iter().map(|x| x * c).collect())
    }

    /// Normalized spacings `Dᵢ = (n−i+1)(x(i) − x(i−1))`, with `x(0) = 0`.
    pub fn normalized_spacings(&self) -> Vec<f64> {
        let n = self.len();
        let mut prev = 0.0;
        self.sorted
            .iter()
            .enumerate()
            .map(|(k, &x)| {
                let d = (n - k) as f64 * (x - prev);
                prev = x;
                d
            })
            .collect()
    }
}

impl TryFrom<Vec<f64>> for Sample {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Sample::new(values)
    }
}

impl From<Sample> for Vec<f64> {
    fn from(s: Sample) -> Self {
        s.sorted
    }
}

/// The weights `dᵢ = (n−2i+1)/(2(n−1))`, i = 1..n.
///
/// They decrease strictly from 1/2 to −1/2, are antisymmetric about the
/// middle index and sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    n: usize,
    d: Vec<f64>,
}

impl Coefficients {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.d
    }

    /// `dᵢ` for the 1-based index `i`.
    pub fn get(&self, i: usize) -> f64 {
        self.d[i - 1]
    }
}

/// Builds the spacing weights for sample size `n ≥ 2`.
pub fn coefficients(n: usize) -> Result<Coefficients> {
    if n < 2 {
        return Err(Error::InvalidSampleSize { n, min: 2 });
    }
    let denom = 2.0 * (n - 1) as f64;
    let d = (1..=n)
        .map(|i| (n as f64 - 2.0 * i as f64 + 1.0) / denom)
        .collect();
    Ok(Coefficients { n, d })
}

/// Value of the statistic together with its numerator and denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatisticValue {
    /// Δ̂*, dimensionless, in [−1/2, 1/2].
    pub delta_star: f64,
    /// Δ̂, in time units.
    pub delta: f64,
    /// Sample mean, in time units.
    pub mean: f64,
}

/// Δ̂* from the normalized spacings. This is the canonical evaluation.
pub fn statistic_spacings(sample: &Sample) -> StatisticValue {
    let n = sample.len();
    let d = coefficients(n).expect("Sample guarantees n >= 2");
    let spacings = sample.normalized_spacings();

    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for (w, s) in d.as_slice().iter().zip(&spacings) {
        num.add(w * s);
        den.add(*s);
    }
    let total = den.value();
    let delta_star = num.value() / total;
    let mean = total / n as f64;
    StatisticValue {
        delta_star,
        delta: delta_star * mean,
        mean,
    }
}

/// Δ̂ from the weighted order statistics, divided by the mean.
pub fn statistic_orderstats(sample: &Sample) -> StatisticValue {
    let n = sample.len();
    let nf = n as f64;
    let scale = 2.0 * nf * (nf - 1.0);
    let delta = sum(sample
        .order_statistics()
        .iter()
        .enumerate()
        .map(|(k, &x)| (3.0 * nf - 4.0 * (k + 1) as f64 + 1.0) * x))
        / scale;
    let mean = sample.mean();
    StatisticValue {
        delta_star: delta / mean,
        delta,
        mean,
    }
}

/// Brute-force O(n²) evaluation with the symmetric kernel
/// `h(a, b) = min(a, b) − (a + b)/4`.
pub fn statistic_ustat_oracle(sample: &Sample) -> StatisticValue {
    let xs = sample.order_statistics();
    let n = xs.len();
    let mut acc = CompensatedSum::new();
    for i in 0..n {
        for j in (i + 1)..n {
            acc.add(xs[i].min(xs[j]) - 0.25 * (xs[i] + xs[j]));
        }
    }
    let delta = 2.0 * acc.value() / (n as f64 * (n as f64 - 1.0));
    let mean = sample.mean();
    StatisticValue {
        delta_star: delta / mean,
        delta,
        mean,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> Sample {
        Sample::new(v.to_vec()).unwrap()
    }

    #[test]
    fn coefficient_examples() {
        assert_eq!(coefficients(2).unwrap().as_slice(), &[0.5, -0.5]);
        assert_eq!(coefficients(3).unwrap().as_slice(), &[0.5, 0.0, -0.5]);
        assert!(matches!(
            coefficients(1),
            Err(Error::InvalidSampleSize { n: 1, min: 2 })
        ));
    }

    #[test]
    fn coefficient_invariants() {
        for n in 2..60 {
            let d = coefficients(n).unwrap();
            let d = d.as_slice();
            assert_eq!(d[0], 0.5);
            assert_eq!(d[n - 1], -0.5);
            assert!(sum(d.iter().copied()).abs() < 1e-14);
            for i in 0..n {
                assert_eq!(d[n - 1 - i], -d[i]);
                if i + 1 < n {
                    assert!(d[i] > d[i + 1]);
                }
            }
        }
    }

    #[test]
    fn hand_computed_values() {
        let v = statistic_spacings(&s(&[1.0, 3.0]));
        assert_eq!(v.delta_star, 0.0);
        assert_eq!(statistic_orderstats(&s(&[3.0, 1.0])).delta, 0.0);
        assert_eq!(statistic_ustat_oracle(&s(&[1.0, 3.0])).delta, 0.0);

        let x = s(&[4.0, 1.0, 2.0]);
        assert_eq!(x.normalized_spacings(), vec![3.0, 2.0, 2.0]);
        let v = statistic_spacings(&x);
        assert!((v.delta_star - 1.0 / 14.0).abs() < 1e-15);
        assert!((v.mean - 7.0 / 3.0).abs() < 1e-15);
        assert!((statistic_orderstats(&x).delta - 1.0 / 6.0).abs() < 1e-15);
        assert!((statistic_ustat_oracle(&x).delta - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn constant_sample_is_maximal() {
        let x = s(&[2.5; 7]);
        let v = statistic_spacings(&x);
        assert_eq!(v.delta_star, 0.5);
        assert_eq!(statistic_orderstats(&x).delta, 1.25);
        assert_eq!(statistic_orderstats(&x).delta_star, 0.5);
    }

    #[test]
    fn ties_are_allowed() {
        let v = statistic_spacings(&s(&[1.0, 1.0, 2.0, 2.0, 5.0]));
        let w = statistic_ustat_oracle(&s(&[1.0, 1.0, 2.0, 2.0, 5.0]));
        assert!((v.delta_star - w.delta_star).abs() < 1e-15);
    }

    #[test]
    fn ingestion_errors() {
        assert!(matches!(
            Sample::new(vec![1.0]),
            Err(Error::InvalidSampleSize { .. })
        ));
        assert!(matches!(
            Sample::new(vec![1.0, -0.5]),
            Err(Error::InvalidObservation { index: 1, .. })
        ));
        assert!(matches!(
            Sample::new(vec![1.0, f64::NAN]),
            Err(Error::InvalidObservation { .. })
        ));
        assert!(matches!(
            Sample::new(vec![0.0, 0.0, 0.0]),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn zero_observation_with_positive_rest() {
        let v = statistic_spacings(&s(&[0.0, 1.0, 2.0]));
        assert!(v.delta_star > -0.5 && v.delta_star < 0.5);
    }
}
