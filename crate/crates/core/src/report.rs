//! A single report type for the exact, asymptotic and censored tests.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::asymptotic::asymptotic_test;
use crate::censored::{censored_test, CensoredSample};
use crate::error::{Error, Result};
use crate::exact::ExactNull;
use crate::statistic::{statistic_spacings, Sample};

/// Sample size above which `auto` switches from the exact to the asymptotic test.
pub const AUTO_EXACT_MAX_N: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Asymptotic,
    /// Exact up to a size threshold, asymptotic above it.
    Auto,
}

impl Method {
    /// Concrete method used for a sample of size `n`.
    pub fn resolve(self, n: usize, exact_max_n: usize) -> Method {
        match self {
            Method::Auto if n <= exact_max_n => Method::Exact,
            Method::Auto => Method::Asymptotic,
            m => m,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Asymptotic => "asymptotic",
            Method::Auto => "auto",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Method::Exact),
            "asymptotic" => Ok(Method::Asymptotic),
            "auto" => Ok(Method::Auto),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportMethod {
    Exact,
    Asymptotic,
    Censored,
}

impl fmt::Display for ReportMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportMethod::Exact => "exact",
            ReportMethod::Asymptotic => "asymptotic",
            ReportMethod::Censored => "censored",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub method: ReportMethod,
    pub n: usize,
    pub alpha: f64,
    /// Δ̂*, or Δ̂*c for censored data.
    pub delta_star: f64,
    /// Δ̂, or Δ̂c.
    pub delta: f64,
    /// Sample mean, or the Kaplan–Meier weighted mean.
    pub mean: f64,
    /// Exact critical value of Δ̂* (exact method only).
    pub critical_value: Option<f64>,
    /// Standardized statistic (asymptotic and censored methods).
    pub z: Option<f64>,
    /// Upper-α normal point (asymptotic and censored methods).
    pub critical_z: Option<f64>,
    pub p_value: f64,
    pub reject: bool,
    /// Estimated standard deviation of √n·Δ̂*c (censored only).
    pub sigma_hat: Option<f64>,
    /// Fraction of censored records (censored only).
    pub censored_fraction: Option<f64>,
}

/// Tests exponentiality on complete data.
pub fn test_uncensored(sample: &Sample, method: Method, alpha: f64) -> Result<TestReport> {
    test_uncensored_with_threshold(sample, method, alpha, AUTO_EXACT_MAX_N)
}

pub fn test_uncensored_with_threshold(
    sample: &Sample,
    method: Method,
    alpha: f64,
    exact_max_n: usize,
) -> Result<TestReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidLevel(alpha));
    }
    let n = sample.len();
    let stat = statistic_spacings(sample);
    match method.resolve(n, exact_max_n) {
        Method::Exact => {
            let null = ExactNull::new(n)?;
            let c = null.critical_value(alpha)?;
            Ok(TestReport {
                method: ReportMethod::Exact,
                n,
                alpha,
                delta_star: stat.delta_star,
                delta: stat.delta,
                mean: stat.mean,
                critical_value: Some(c),
                z: None,
                critical_z: None,
                p_value: null.p_value(stat.delta_star),
                reject: stat.delta_star > c,
                sigma_hat: None,
                censored_fraction: None,
            })
        }
        _ => {
            let r = asymptotic_test(sample, alpha)?;
            Ok(TestReport {
                method: ReportMethod::Asymptotic,
                n,
                alpha,
                delta_star: stat.delta_star,
                delta: stat.delta,
                mean: stat.mean,
                critical_value: None,
                z: Some(r.z),
                critical_z: Some(r.critical_z),
                p_value: r.p_value,
                reject: r.reject,
                sigma_hat: None,
                censored_fraction: None,
            })
        }
    }
}

/// Tests exponentiality on right-censored data with the IPCW statistic.
pub fn test_censored(cs: &CensoredSample, alpha: f64) -> Result<TestReport> {
    let r = censored_test(cs, alpha)?;
    Ok(TestReport {
        method: ReportMethod::Censored,
        n: r.n,
        alpha,
        delta_star: r.delta_c_star,
        delta: r.delta_c,
        mean: r.mean_c,
        critical_value: None,
        z: Some(r.z),
        critical_z: Some(r.critical_z),
        p_value: r.p_value,
        reject: r.reject,
        sigma_hat: Some(r.sigma_hat),
        censored_fraction: Some(r.censored_fraction),
    })
}
