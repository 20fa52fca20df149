//! Large-sample test based on the limiting null law √n·Δ̂* → N(0, 1/12).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;
use crate::statistic::{statistic_spacings, Sample};
use crate::summation::{sample_variance, CompensatedSum};

/// Limiting null variance of √n·Δ̂* for exponential data of any rate.
pub const NULL_VARIANCE: f64 = 1.0 / 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub delta_star: f64,
    /// √(12n)·Δ̂*
    pub z: f64,
    pub p_value: f64,
    pub alpha: f64,
    /// Upper-α standard normal point.
    pub critical_z: f64,
    pub reject: bool,
}

/// Rejects exponentiality when √(12n)·Δ̂* exceeds the upper-α normal point.
pub fn asymptotic_test(sample: &Sample, alpha: f64) -> Result<AsymptoticReport> {
    let critical_z = normal::upper_quantile(alpha)?;
    let delta_star = statistic_spacings(sample).delta_star;
    Ok(standardize(delta_star, sample.len(), alpha, critical_z))
}

pub(crate) fn standardize(delta_star: f64, n: usize, alpha: f64, critical_z: f64) -> AsymptoticReport {
    let z = (n as f64 / NULL_VARIANCE).sqrt() * delta_star;
    AsymptoticReport {
        delta_star,
        z,
        p_value: normal::sf(z),
        alpha,
        critical_z,
        reject: z > critical_z,
    }
}

/// Plug-in estimate of the asymptotic variance of √n·Δ̂ (not Δ̂*).
///
/// Evaluates `ψ(x) = 2x·F̄ₙ(x) + 2∫₀ˣ y dFₙ(y) − x/2` at each observation with
/// the empirical distribution `Fₙ` and returns the sample variance of the ψ
/// values. Divide by the squared mean to compare with [`NULL_VARIANCE`].
pub fn influence_variance(sample: &Sample) -> Result<f64> {
    let psi = influence_values(sample);
    let v = sample_variance(&psi);
    if !v.is_finite() {
        return Err(Error::Numeric("influence variance is not finite".into()));
    }
    Ok(v)
}

/// ψ evaluated at each order statistic.
pub fn influence_values(sample: &Sample) -> Vec<f64> {
    let xs = sample.order_statistics();
    let n = xs.len();
    let nf = n as f64;
    let mut psi = Vec::with_capacity(n);
    let mut prefix = CompensatedSum::new();
    let mut k = 0;
    while k < n {
        // Tie group [k, end).
        let x = xs[k];
        let mut end = k;
        while end < n && xs[end] == x {
            prefix.add(xs[end]);
            end += 1;
        }
        let above = (n - end) as f64 / nf;
        let lower_moment = prefix.value() / nf;
        let value = 2.0 * x * above + 2.0 * lower_moment - 0.5 * x;
        psi.extend(std::iter::repeat(value).take(end - k));
        k = end;
    }
    psi
}
