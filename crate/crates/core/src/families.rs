//! Lifetime and censoring families, inversion sampling and seeded streams.
//!
//! | kind               | survival F̄(x)                         | null at |
//! |--------------------|----------------------------------------|---------|
//! | exponential        | exp(−λx)                               | any λ   |
//! | Weibull            | exp(−x^λ)                              | λ = 1   |
//! | linear failure rate| exp(−x − λx²/2)                        | λ = 0   |
//! | Makeham            | exp(−x − λ(e^{−x} + x − 1))            | λ = 0   |
//! | logistic           | 1 − 1/(1 + exp(−(x − location)/λ))     | (censoring only) |

use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAKEHAM_TOLERANCE: f64 = 1e-12;
const MAKEHAM_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Exponential,
    Weibull,
    LinearFailureRate,
    Makeham,
    Logistic,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Exponential => "exponential",
            FamilyKind::Weibull => "weibull",
            FamilyKind::LinearFailureRate => "lfr",
            FamilyKind::Makeham => "makeham",
            FamilyKind::Logistic => "logistic",
        }
    }

    /// Parameter value at which a lifetime family reduces to the unit exponential.
    pub fn null_parameter(self) -> Option<f64> {
        match self {
            FamilyKind::Exponential | FamilyKind::Weibull => Some(1.0),
            FamilyKind::LinearFailureRate | FamilyKind::Makeham => Some(0.0),
            FamilyKind::Logistic => None,
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exponential" | "exp" => Ok(FamilyKind::Exponential),
            "weibull" => Ok(FamilyKind::Weibull),
            "lfr" | "linear-failure-rate" | "linear_failure_rate" => {
                Ok(FamilyKind::LinearFailureRate)
            }
            "makeham" => Ok(FamilyKind::Makeham),
            "logistic" => Ok(FamilyKind::Logistic),
            other => Err(Error::InvalidConfig(format!("unknown family `{other}`"))),
        }
    }
}

/// A parametric family member.
///
/// `lambda` is the rate (exponential), shape (Weibull), quadratic hazard
/// coefficient (LFR), Makeham coefficient, or logistic scale.
/// `location` only affects the logistic family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub lambda: f64,
    #[serde(default)]
    pub location: f64,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, lambda: f64, location: f64) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidParameter {
            family: kind.name(),
            reason: reason.to_string(),
        };
        if !lambda.is_finite() {
            return Err(bad("parameter must be finite"));
        }
        if !location.is_finite() {
            return Err(bad("location must be finite"));
        }
        match kind {
            FamilyKind::Exponential | FamilyKind::Weibull | FamilyKind::Logistic
                if lambda <= 0.0 =>
            {
                return Err(bad("parameter must be positive"));
            }
            FamilyKind::LinearFailureRate | FamilyKind::Makeham if lambda < 0.0 => {
                return Err(bad("parameter must be nonnegative"));
            }
            _ => {}
        }
        if location != 0.0 && kind != FamilyKind::Logistic {
            return Err(bad("only the logistic family takes a location"));
        }
        Ok(Self {
            kind,
            lambda,
            location,
        })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(FamilyKind::Exponential, rate, 0.0)
    }

    pub fn weibull(shape: f64) -> Result<Self> {
        Self::new(FamilyKind::Weibull, shape, 0.0)
    }

    pub fn linear_failure_rate(lambda: f64) -> Result<Self> {
        Self::new(FamilyKind::LinearFailureRate, lambda, 0.0)
    }

    pub fn makeham(lambda: f64) -> Result<Self> {
        Self::new(FamilyKind::Makeham, lambda, 0.0)
    }

    pub fn logistic(scale: f64, location: f64) -> Result<Self> {
        Self::new(FamilyKind::Logistic, scale, location)
    }

    /// Same kind and location, different parameter.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.kind, lambda, self.location)
    }

    pub fn is_lifetime(&self) -> bool {
        self.kind != FamilyKind::Logistic
    }

    /// True when the family is exponential (of any rate).
    pub fn is_null(&self) -> bool {
        match self.kind {
            FamilyKind::Exponential => true,
            FamilyKind::Weibull => self.lambda == 1.0,
            FamilyKind::LinearFailureRate | FamilyKind::Makeham => self.lambda == 0.0,
            FamilyKind::Logistic => false,
        }
    }

    /// True for members of the increasing-MRL alternatives used in the power study.
    pub fn is_alternative(&self) -> bool {
        match self.kind {
            FamilyKind::Weibull => self.lambda > 1.0,
            FamilyKind::LinearFailureRate | FamilyKind::Makeham => self.lambda > 0.0,
            _ => false,
        }
    }

    fn check_lifetime_arg(&self, x: f64) -> Result<()> {
        if self.is_lifetime() && (x.is_nan() || x < 0.0) {
            return Err(Error::Domain {
                family: self.kind.name(),
                x,
            });
        }
        if x.is_nan() {
            return Err(Error::Domain {
                family: self.kind.name(),
                x,
            });
        }
        Ok(())
    }

    /// Cumulative hazard `−ln F̄(x)`.
    pub fn cumulative_hazard(&self, x: f64) -> Result<f64> {
        self.check_lifetime_arg(x)?;
        let l = self.lambda;
        Ok(match self.kind {
            FamilyKind::Exponential => l * x,
            FamilyKind::Weibull => x.powf(l),
            FamilyKind::LinearFailureRate => x + 0.5 * l * x * x,
            FamilyKind::Makeham => x + l * (x + (-x).exp_m1()),
            FamilyKind::Logistic => -self.survival(x)?.ln(),
        })
    }

    /// Hazard rate.
    pub fn hazard(&self, x: f64) -> Result<f64> {
        self.check_lifetime_arg(x)?;
        let l = self.lambda;
        Ok(match self.kind {
            FamilyKind::Exponential => l,
            FamilyKind::Weibull => {
                if x == 0.0 {
                    if l < 1.0 {
                        f64::INFINITY
                    } else if l == 1.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    l * x.powf(l - 1.0)
                }
            }
            FamilyKind::LinearFailureRate => 1.0 + l * x,
            FamilyKind::Makeham => 1.0 - l * (-x).exp_m1(),
            FamilyKind::Logistic => 1.0 / (l * (1.0 + (-(x - self.location) / l).exp())),
        })
    }

    /// Survival function F̄(x).
    pub fn survival(&self, x: f64) -> Result<f64> {
        self.check_lifetime_arg(x)?;
        if self.kind == FamilyKind::Logistic {
            let t = (x - self.location) / self.lambda;
            return Ok(1.0 / (1.0 + t.exp()));
        }
        Ok((-self.cumulative_hazard(x)?).exp())
    }

    /// Distribution function F(x).
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if self.kind == FamilyKind::Logistic {
            self.check_lifetime_arg(x)?;
            let t = (x - self.location) / self.lambda;
            return Ok(1.0 / (1.0 + (-t).exp()));
        }
        Ok(-(-self.cumulative_hazard(x)?).exp_m1())
    }

    /// ∂F̄(x; λ)/∂λ for the lifetime alternatives.
    pub fn survival_lambda_derivative(&self, x: f64) -> Result<f64> {
        let s = self.survival(x)?;
        let l = self.lambda;
        Ok(match self.kind {
            FamilyKind::Exponential => -x * s,
            FamilyKind::Weibull => {
                if x == 0.0 {
                    0.0
                } else {
                    -x.powf(l) * x.ln() * s
                }
            }
            FamilyKind::LinearFailureRate => -0.5 * x * x * s,
            FamilyKind::Makeham => -(x + (-x).exp_m1()) * s,
            FamilyKind::Logistic => {
                return Err(Error::InvalidParameter {
                    family: "logistic",
                    reason: "no alternative parameter derivative".into(),
                })
            }
        })
    }

    /// Inverse distribution function, `F(x) = u` for `0 < u < 1`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::InvalidProbability(u));
        }
        let l = self.lambda;
        // −ln(1 − u), the unit-exponential quantile.
        let e = -(-u).ln_1p();
        Ok(match self.kind {
            FamilyKind::Exponential => e / l,
            FamilyKind::Weibull => e.powf(1.0 / l),
            // (−1 + √(1 + 2λe))/λ, rationalized so λ → 0 needs no special branch.
            FamilyKind::LinearFailureRate => 2.0 * e / (1.0 + (1.0 + 2.0 * l * e).sqrt()),
            FamilyKind::Makeham => makeham_inverse_hazard(l, e)?,
            FamilyKind::Logistic => self.location + l * (u.ln() - (-u).ln_1p()),
        })
    }

    /// One draw by inversion.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let u: f64 = rng.sample(Open01);
        self.quantile(u)
    }

    /// `n` independent draws from a seeded stream.
    pub fn sample(&self, stream: &RngStream, n: usize) -> Result<Vec<f64>> {
        let mut rng = stream.rng();
        self.draws(&mut rng, n)
    }

    pub fn draws<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidSampleSize { n, min: 1 });
        }
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind == FamilyKind::Logistic {
            write!(f, "{}({}, location {})", self.kind, self.lambda, self.location)
        } else {
            write!(f, "{}({})", self.kind, self.lambda)
        }
    }
}

/// Solves `x + λ(e^{−x} + x − 1) = target` for x ≥ 0.
///
/// Newton on the strictly increasing cumulative hazard, started at the
/// exponential quantile and kept inside a shrinking bisection bracket.
fn makeham_inverse_hazard(lambda: f64, target: f64) -> Result<f64> {
    if lambda == 0.0 {
        return Ok(target);
    }
    let h = |x: f64| x + lambda * (x + (-x).exp_m1()) - target;
    let dh = |x: f64| 1.0 - lambda * (-x).exp_m1();
    // H(x) ≥ x, so the root lies in [0, target].
    let (mut lo, mut hi) = (0.0_f64, target);
    let mut x = target;
    for _ in 0..MAKEHAM_MAX_ITER {
        let fx = h(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let mut next = x - fx / dh(x);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= MAKEHAM_TOLERANCE * x.max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Numeric(format!(
        "Makeham quantile did not converge for lambda = {lambda}, target hazard = {target}"
    )))
}

/// A reproducible random substream.
///
/// Each `(master_seed, stream_index)` pair selects an independent ChaCha8
/// stream, so replicate `r` of an experiment draws the same numbers no matter
/// which worker runs it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const E_INV: f64 = 0.36787944117144233;

    #[test]
    fn survival_examples() {
        let w = FamilySpec::weibull(1.0).unwrap();
        assert!((w.survival(1.0).unwrap() - E_INV).abs() < 1e-16);
        let lfr = FamilySpec::linear_failure_rate(0.0).unwrap();
        for x in [0.0, 0.3, 2.0, 7.5] {
            assert!((lfr.survival(x).unwrap() - (-x).exp()).abs() < 1e-15);
        }
        // exp(−1 − 0.5·e⁻¹)
        let m = FamilySpec::makeham(0.5).unwrap();
        let expected = (-1.0 - 0.5 * E_INV).exp();
        assert!((m.survival(1.0).unwrap() - expected).abs() < 1e-15);
        assert!((m.survival(1.0).unwrap() - 0.306_070_53).abs() < 1e-8);
    }

    #[test]
    fn logistic_matches_formula() {
        let c = FamilySpec::logistic(0.5, 0.0).unwrap();
        assert!((c.cdf(0.0).unwrap() - 0.5).abs() < 1e-16);
        let x = 0.8;
        assert!((c.cdf(x).unwrap() - 1.0 / (1.0 + (-x / 0.5f64).exp())).abs() < 1e-16);
        assert!(c.survival(-3.0).is_ok());
    }

    #[test]
    fn domain_errors() {
        let w = FamilySpec::weibull(2.0).unwrap();
        assert!(matches!(w.survival(-1.0), Err(Error::Domain { .. })));
        assert!(matches!(w.quantile(0.0), Err(Error::InvalidProbability(_))));
        assert!(matches!(w.quantile(1.0), Err(Error::InvalidProbability(_))));
        assert!(FamilySpec::makeham(-0.1).is_err());
        assert!(FamilySpec::weibull(0.0).is_err());
        assert!(FamilySpec::new(FamilyKind::Weibull, 2.0, 1.0).is_err());
    }

    #[test]
    fn quantile_examples() {
        let u = 1.0 - E_INV;
        assert!((FamilySpec::makeham(0.0).unwrap().quantile(u).unwrap() - 1.0).abs() < 1e-15);
        assert!((FamilySpec::weibull(2.0).unwrap().quantile(u).unwrap() - 1.0).abs() < 1e-15);
        for u in [1e-9f64, 0.2, 0.5, 0.999] {
            let q0 = -(-u).ln_1p();
            let q = FamilySpec::linear_failure_rate(1e-14).unwrap().quantile(u).unwrap();
            assert!((q - q0).abs() <= 1e-12 * q0.max(1e-300));
        }
    }

    #[test]
    fn quantile_inverts_survival_across_grid() {
        let specs = [
            FamilySpec::exponential(0.7).unwrap(),
            FamilySpec::weibull(1.0).unwrap(),
            FamilySpec::weibull(1.6).unwrap(),
            FamilySpec::weibull(3.0).unwrap(),
            FamilySpec::linear_failure_rate(0.0).unwrap(),
            FamilySpec::linear_failure_rate(0.4).unwrap(),
            FamilySpec::linear_failure_rate(5.0).unwrap(),
            FamilySpec::makeham(0.0).unwrap(),
            FamilySpec::makeham(0.2).unwrap(),
            FamilySpec::makeham(0.8).unwrap(),
            FamilySpec::makeham(10.0).unwrap(),
            FamilySpec::logistic(0.5, 0.0).unwrap(),
            FamilySpec::logistic(2.0, 1.5).unwrap(),
        ];
        for f in specs {
            for k in 1..100 {
                let u = k as f64 / 100.0;
                let x = f.quantile(u).unwrap();
                let s = f.survival(x).unwrap();
                assert!((s - (1.0 - u)).abs() < 1e-10, "{f} u={u}: {s}");
            }
        }
    }

    #[test]
    fn null_reductions() {
        let nulls = [
            FamilySpec::weibull(1.0).unwrap(),
            FamilySpec::linear_failure_rate(0.0).unwrap(),
            FamilySpec::makeham(0.0).unwrap(),
        ];
        for f in nulls {
            assert!(f.is_null());
            for k in 0..200 {
                let x = k as f64 * 0.05;
                assert!((f.survival(x).unwrap() - (-x).exp()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn makeham_hazard_monotone() {
        for &l in &[0.0, 0.1, 0.8, 5.0] {
            let f = FamilySpec::makeham(l).unwrap();
            let mut prev = 0.0;
            for k in 0..500 {
                let h = f.cumulative_hazard(k as f64 * 0.02).unwrap();
                assert!(h >= 0.0 && h >= prev);
                prev = h;
            }
        }
    }

    #[test]
    fn lambda_derivative_matches_difference() {
        for f in [
            FamilySpec::weibull(1.3).unwrap(),
            FamilySpec::linear_failure_rate(0.4).unwrap(),
            FamilySpec::makeham(0.6).unwrap(),
        ] {
            let h = 1e-6;
            let up = f.with_lambda(f.lambda + h).unwrap();
            let down = f.with_lambda(f.lambda - h).unwrap();
            for &x in &[0.1, 0.9, 2.5] {
                let fd = (up.survival(x).unwrap() - down.survival(x).unwrap()) / (2.0 * h);
                let an = f.survival_lambda_derivative(x).unwrap();
                assert!((fd - an).abs() < 1e-8, "{f} x={x}");
            }
        }
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let f = FamilySpec::makeham(0.5).unwrap();
        let a = f.sample(&RngStream::new(9, 3), 50).unwrap();
        let b = f.sample(&RngStream::new(9, 3), 50).unwrap();
        let c = f.sample(&RngStream::new(9, 4), 50).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
