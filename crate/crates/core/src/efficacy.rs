//! Pitman asymptotic efficacy against the three alternative families, and
//! the asymptotic relative efficiency of the censored test.
//!
//! With `W(λ) = E min(X₁, X₂) = ∫ F̄²` and `μ(λ) = ∫ F̄`, the population
//! statistic is `Δ*(λ) = W/μ − 1/2`, so the efficacy is
//! `√12 · |d/dλ (W/μ)|` at the null parameter, divided by the null standard
//! deviation `1/√12`.

use serde::{Deserialize, Serialize};

use crate::asymptotic::NULL_VARIANCE;
use crate::censored::{ipcw_statistic, CensoredSample};
use crate::error::{Error, Result};
use crate::families::{FamilyKind, FamilySpec};
use crate::quadrature::integrate;
use crate::sim::replicate;

/// Absolute tolerance for the survival-power integrals.
pub const QUADRATURE_TOLERANCE: f64 = 1e-13;
/// Step in λ for the finite-difference derivatives.
pub const DERIVATIVE_STEP: f64 = 1e-5;
/// Integrals are truncated where F̄ falls below this; the remainder is added
/// from the local hazard.
const TAIL_SURVIVAL: f64 = 1e-13;

/// `∫₀^∞ g(x) dx` where `|g| ≲ F̄(x)^power` in the tail.
fn integrate_lifetime<G: Fn(f64) -> f64>(family: &FamilySpec, power: i32, g: G) -> Result<f64> {
    if !family.is_lifetime() {
        return Err(Error::InvalidParameter {
            family: family.kind.name(),
            reason: "functionals are defined for lifetime families only".into(),
        });
    }
    let mut upper = 1.0;
    while family.survival(upper)? > TAIL_SURVIVAL {
        upper *= 2.0;
        if upper > 1e6 {
            return Err(Error::Numeric(format!("{family} has no usable upper cutoff")));
        }
    }
    let head = integrate(&g, 0.0, 1.0, 0.5 * QUADRATURE_TOLERANCE)?;
    let body = integrate(&g, 1.0, upper, 0.5 * QUADRATURE_TOLERANCE)?;
    // ∫_U^∞ F̄^k ≈ F̄(U)^k / (k·hazard(U)) for a slowly varying hazard.
    let tail = g(upper) / (power as f64 * family.hazard(upper)?);
    Ok(head.value + body.value + tail)
}

/// `W = E min(X₁, X₂) = ∫₀^∞ F̄(x)² dx`.
pub fn w_functional(family: &FamilySpec) -> Result<f64> {
    integrate_lifetime(family, 2, |x| {
        let s = family.survival(x).unwrap_or(f64::NAN);
        s * s
    })
}

/// `μ = ∫₀^∞ F̄(x) dx`.
pub fn mean_functional(family: &FamilySpec) -> Result<f64> {
    integrate_lifetime(family, 1, |x| family.survival(x).unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficacyResult {
    pub family: FamilyKind,
    pub lambda0: f64,
    pub pae: f64,
    /// W(λ₀)
    pub w: f64,
    /// W′(λ₀)
    pub w_prime: f64,
    /// μ′(λ₀)
    pub mean_prime: f64,
}

fn alternative_null(kind: FamilyKind) -> Result<f64> {
    match kind {
        FamilyKind::Weibull | FamilyKind::LinearFailureRate | FamilyKind::Makeham => {
            Ok(kind.null_parameter().expect("lifetime family"))
        }
        other => Err(Error::InvalidParameter {
            family: other.name(),
            reason: "efficacy is defined for the weibull, lfr and makeham alternatives".into(),
        }),
    }
}

fn assemble(kind: FamilyKind, lambda0: f64, w: f64, mean: f64, w_prime: f64, mean_prime: f64) -> EfficacyResult {
    // d/dλ (W/μ) = (W′μ − Wμ′)/μ², with μ(λ₀) = 1 for all three families.
    let slope = (w_prime * mean - w * mean_prime) / (mean * mean);
    EfficacyResult {
        family: kind,
        lambda0,
        pae: (slope / NULL_VARIANCE.sqrt()).abs(),
        w,
        w_prime,
        mean_prime,
    }
}

/// Efficacy with W′ and μ′ from finite differences of the quadratures.
///
/// Central differences at the Weibull null λ₀ = 1; second-order forward
/// differences (stencil 0, h, 2h) at λ₀ = 0 for the LFR and Makeham families,
/// which are undefined for λ < 0.
pub fn pae(kind: FamilyKind) -> Result<EfficacyResult> {
    let lambda0 = alternative_null(kind)?;
    let at = |l: f64| -> Result<(f64, f64)> {
        let f = FamilySpec::new(kind, l, 0.0)?;
        Ok((w_functional(&f)?, mean_functional(&f)?))
    };
    let h = DERIVATIVE_STEP;
    let (w0, m0) = at(lambda0)?;
    let (w_prime, mean_prime) = if lambda0 > 0.0 {
        let (wp, mp) = at(lambda0 + h)?;
        let (wm, mm) = at(lambda0 - h)?;
        ((wp - wm) / (2.0 * h), (mp - mm) / (2.0 * h))
    } else {
        let (w1, m1) = at(lambda0 + h)?;
        let (w2, m2) = at(lambda0 + 2.0 * h)?;
        (
            (-3.0 * w0 + 4.0 * w1 - w2) / (2.0 * h),
            (-3.0 * m0 + 4.0 * m1 - m2) / (2.0 * h),
        )
    };
    Ok(assemble(kind, lambda0, w0, m0, w_prime, mean_prime))
}

/// Efficacy with W′ = ∫ 2F̄ ∂F̄/∂λ and μ′ = ∫ ∂F̄/∂λ integrated directly.
pub fn pae_from_derivative_integrands(kind: FamilyKind) -> Result<EfficacyResult> {
    let lambda0 = alternative_null(kind)?;
    let f = FamilySpec::new(kind, lambda0, 0.0)?;
    let w0 = w_functional(&f)?;
    let m0 = mean_functional(&f)?;
    let w_prime = integrate_lifetime(&f, 2, |x| {
        2.0 * f.survival(x).unwrap_or(f64::NAN) * f.survival_lambda_derivative(x).unwrap_or(f64::NAN)
    })?;
    let mean_prime = integrate_lifetime(&f, 1, |x| f.survival_lambda_derivative(x).unwrap_or(f64::NAN))?;
    Ok(assemble(kind, lambda0, w0, m0, w_prime, mean_prime))
}

/// Settings for the Monte Carlo relative-efficiency study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreConfig {
    /// Censoring distribution; `None` means no censoring.
    pub censoring: Option<FamilySpec>,
    /// Rate of the exponential lifetimes.
    pub null_rate: f64,
    pub n: usize,
    pub replications: usize,
    pub master_seed: u64,
}

impl AreConfig {
    pub const DEFAULT_N: usize = 400;
    pub const DEFAULT_REPLICATIONS: usize = 20_000;
    pub const MIN_REPLICATIONS: usize = 10_000;

    pub fn new(censoring: Option<FamilySpec>, master_seed: u64) -> Self {
        Self {
            censoring,
            null_rate: 1.0,
            n: Self::DEFAULT_N,
            replications: Self::DEFAULT_REPLICATIONS,
            master_seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreResult {
    pub config: AreConfig,
    /// (1/12) / σ̂²c0
    pub are: f64,
    pub standard_error: f64,
    /// Monte Carlo variance of √n·Δ̂*c.
    pub variance: f64,
    pub failures: usize,
    pub mean_censored_fraction: f64,
}

/// Relative efficiency of the censored statistic with respect to the
/// uncensored one, `(1/12)/σ²c0`, with σ²c0 the Monte Carlo variance of
/// √n·Δ̂*c under exponential lifetimes.
///
/// Replicates whose sample cannot be analysed (fewer than two events, or an
/// event beyond the censoring support) are counted as failures; more than 1%
/// failures aborts the study.
pub fn are_censored(cfg: &AreConfig) -> Result<AreResult> {
    if cfg.replications < AreConfig::MIN_REPLICATIONS {
        return Err(Error::InvalidConfig(format!(
            "at least {} replications are required, got {}",
            AreConfig::MIN_REPLICATIONS,
            cfg.replications
        )));
    }
    if cfg.n < 2 {
        return Err(Error::InvalidSampleSize { n: cfg.n, min: 2 });
    }
    let lifetimes = FamilySpec::exponential(cfg.null_rate)?;
    let n = cfg.n;
    let outcomes = replicate(cfg.replications, cfg.master_seed, |rng| -> Result<Option<(f64, f64)>> {
        let x = lifetimes.draws(rng, n)?;
        let cs = match &cfg.censoring {
            Some(c) => {
                let times = c.draws(rng, n)?;
                CensoredSample::from_lifetimes(&x, &times)
            }
            None => CensoredSample::from_lifetimes(&x, &vec![f64::INFINITY; n]),
        };
        let cs = match cs {
            Ok(cs) => cs,
            Err(Error::DegenerateSample(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        match ipcw_statistic(&cs) {
            Ok(est) => Ok(Some(((n as f64).sqrt() * est.delta_c_star(), cs.censored_fraction()))),
            Err(Error::UnestimableTail { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    });
    let mut values = Vec::with_capacity(cfg.replications);
    let mut fractions = Vec::with_capacity(cfg.replications);
    let mut failures = 0;
    for o in outcomes {
        match o? {
            Some((z, f)) => {
                values.push(z);
                fractions.push(f);
            }
            None => failures += 1,
        }
    }
    if failures * 100 > cfg.replications {
        return Err(Error::Numeric(format!(
            "{failures} of {} replicates could not be analysed (more than 1%)",
            cfg.replications
        )));
    }
    let m = values.len() as f64;
    let mean = crate::summation::sum(values.iter().copied()) / m;
    let variance = crate::summation::sum(values.iter().map(|v| (v - mean).powi(2))) / (m - 1.0);
    let fourth = crate::summation::sum(values.iter().map(|v| (v - mean).powi(4))) / m;
    let var_se = ((fourth - variance * variance).max(0.0) / m).sqrt();
    let are = NULL_VARIANCE / variance;
    Ok(AreResult {
        config: *cfg,
        are,
        standard_error: are * var_se / variance,
        variance,
        failures,
        mean_censored_fraction: crate::summation::sum(fractions) / m,
    })
}
