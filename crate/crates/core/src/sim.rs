//! Seeded Monte Carlo experiments: empirical size and power of the tests.
//!
//! Replicate `r` always draws from stream `r` of the master seed, and counts
//! are reduced in replicate order, so results do not depend on how many
//! worker threads run the experiment.

use std::fmt::Write as _;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::censored::{censored_test, CensoredSample};
use crate::error::{Error, Result};
use crate::exact::ExactNull;
use crate::families::{FamilySpec, RngStream};
use crate::normal;
use crate::statistic::{statistic_spacings, Sample};

/// Runs `f` once per replicate on its own stream, in parallel, returning
/// results in replicate order.
pub fn replicate<T, F>(replications: usize, master_seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    (0..replications as u64)
        .into_par_iter()
        .map(|r| f(&mut RngStream::new(master_seed, r).rng()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Exact,
    Asymptotic,
    Censored,
}

impl TestKind {
    pub fn name(self) -> &'static str {
        match self {
            TestKind::Exact => "exact",
            TestKind::Asymptotic => "asymptotic",
            TestKind::Censored => "censored",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub test_kind: TestKind,
    /// Lifetime distribution.
    pub family: FamilySpec,
    pub n: usize,
    pub replications: usize,
    pub alpha_levels: Vec<f64>,
    pub master_seed: u64,
    /// Independent censoring distribution; required for the censored test.
    #[serde(default)]
    pub censoring: Option<FamilySpec>,
}

impl ExperimentConfig {
    pub const MIN_REPLICATIONS: usize = 100;

    /// Asymptotic test at the 5% and 1% levels, the layout of the published tables.
    pub fn new(family: FamilySpec, n: usize, replications: usize, master_seed: u64) -> Self {
        Self {
            test_kind: TestKind::Asymptotic,
            family,
            n,
            replications,
            alpha_levels: vec![0.05, 0.01],
            master_seed,
            censoring: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < Self::MIN_REPLICATIONS {
            return Err(Error::InvalidConfig(format!(
                "replications must be at least {}, got {}",
                Self::MIN_REPLICATIONS,
                self.replications
            )));
        }
        if self.n < 2 {
            return Err(Error::InvalidSampleSize { n: self.n, min: 2 });
        }
        if self.alpha_levels.is_empty() {
            return Err(Error::InvalidConfig("no significance levels given".into()));
        }
        if let Some(&a) = self.alpha_levels.iter().find(|&&a| !(a > 0.0 && a < 1.0)) {
            return Err(Error::InvalidLevel(a));
        }
        if !self.family.is_lifetime() {
            return Err(Error::InvalidConfig(format!(
                "{} is not a lifetime family",
                self.family
            )));
        }
        match (self.test_kind, &self.censoring) {
            (TestKind::Censored, None) => Err(Error::InvalidConfig(
                "the censored test needs a censoring distribution".into(),
            )),
            (TestKind::Exact | TestKind::Asymptotic, Some(_)) => Err(Error::InvalidConfig(
                "censoring requires the censored test".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelOutcome {
    pub alpha: f64,
    pub rejections: usize,
    pub rejection_rate: f64,
    /// √(p̂(1 − p̂)/m) over the m analysable replicates.
    pub mc_standard_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub levels: Vec<LevelOutcome>,
    /// Replicates whose sample could not be analysed (censored test only).
    pub failures: usize,
}

impl ExperimentResult {
    pub fn level(&self, alpha: f64) -> Option<&LevelOutcome> {
        self.levels.iter().find(|l| l.alpha == alpha)
    }
}

/// Empirical size under an exponential lifetime distribution.
pub fn type1_error(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    if !cfg.family.is_null() {
        return Err(Error::InvalidConfig(format!(
            "{} is not exponential; use power()",
            cfg.family
        )));
    }
    run(cfg)
}

/// Empirical power under an increasing-MRL alternative.
pub fn power(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    if !cfg.family.is_alternative() {
        return Err(Error::InvalidConfig(format!(
            "{} is not an alternative member; use type1_error()",
            cfg.family
        )));
    }
    run(cfg)
}

/// Size or power, whichever the family calls for.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    if cfg.family.is_null() {
        type1_error(cfg)
    } else {
        power(cfg)
    }
}

enum Decision {
    Exact(Vec<f64>),
    Asymptotic(Vec<f64>),
    Censored,
}

fn run(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let decision = match cfg.test_kind {
        TestKind::Exact => {
            let null = ExactNull::new(cfg.n)?;
            Decision::Exact(
                cfg.alpha_levels
                    .iter()
                    .map(|&a| null.critical_value(a))
                    .collect::<Result<_>>()?,
            )
        }
        TestKind::Asymptotic => Decision::Asymptotic(
            cfg.alpha_levels
                .iter()
                .map(|&a| normal::upper_quantile(a))
                .collect::<Result<_>>()?,
        ),
        TestKind::Censored => Decision::Censored,
    };
    let n = cfg.n;
    let sqrt_12n = (12.0 * n as f64).sqrt();

    let outcomes = replicate(cfg.replications, cfg.master_seed, |rng| -> Result<Option<Vec<bool>>> {
        let x = cfg.family.draws(rng, n)?;
        match &decision {
            Decision::Exact(crit) => {
                let d = statistic_spacings(&Sample::new(x)?).delta_star;
                Ok(Some(crit.iter().map(|&c| d > c).collect()))
            }
            Decision::Asymptotic(crit) => {
                let z = sqrt_12n * statistic_spacings(&Sample::new(x)?).delta_star;
                Ok(Some(crit.iter().map(|&c| z > c).collect()))
            }
            Decision::Censored => {
                let c = cfg.censoring.as_ref().expect("validated");
                let times = c.draws(rng, n)?;
                let cs = match CensoredSample::from_lifetimes(&x, &times) {
                    Ok(cs) => cs,
                    Err(Error::DegenerateSample(_)) => return Ok(None),
                    Err(e) => return Err(e),
                };
                let mut out = Vec::with_capacity(cfg.alpha_levels.len());
                for &a in &cfg.alpha_levels {
                    match censored_test(&cs, a) {
                        Ok(r) => out.push(r.reject),
                        Err(Error::UnestimableTail { .. } | Error::Numeric(_)) => return Ok(None),
                        Err(e) => return Err(e),
                    }
                }
                Ok(Some(out))
            }
        }
    });

    let k = cfg.alpha_levels.len();
    let mut counts = vec![0usize; k];
    let mut failures = 0;
    for o in outcomes {
        match o? {
            Some(rejects) => {
                for (c, r) in counts.iter_mut().zip(rejects) {
                    *c += r as usize;
                }
            }
            None => failures += 1,
        }
    }
    let used = cfg.replications - failures;
    if used == 0 {
        return Err(Error::Numeric("no replicate could be analysed".into()));
    }
    let m = used as f64;
    let levels = cfg
        .alpha_levels
        .iter()
        .zip(counts)
        .map(|(&alpha, rejections)| {
            let p = rejections as f64 / m;
            LevelOutcome {
                alpha,
                rejections,
                rejection_rate: p,
                mc_standard_error: (p * (1.0 - p) / m).sqrt(),
            }
        })
        .collect();
    Ok(ExperimentResult {
        config: cfg.clone(),
        levels,
        failures,
    })
}

/// One row per (experiment, level).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub test: TestKind,
    pub family: String,
    pub lambda: f64,
    pub n: usize,
    pub alpha: f64,
    pub rejection_rate: f64,
    pub mc_standard_error: f64,
    pub failures: usize,
    pub replications: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteTable {
    pub rows: Vec<SuiteRow>,
}

impl SuiteTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn find(&self, family: &str, lambda: f64, n: usize, alpha: f64) -> Option<&SuiteRow> {
        self.rows
            .iter()
            .find(|r| r.family == family && r.lambda == lambda && r.n == n && r.alpha == alpha)
    }

    pub const CSV_HEADER: &'static str =
        "test,family,lambda,n,alpha,rejection_rate,mc_standard_error,failures,replications";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.test.name(),
                r.family,
                r.lambda,
                r.n,
                r.alpha,
                r.rejection_rate,
                r.mc_standard_error,
                r.failures,
                r.replications
            );
        }
        s
    }

    /// Grid layout of the published tables: one line per n, and for each
    /// λ the rejection rate at every level, with standard errors.
    pub fn to_grid(&self) -> String {
        let mut lambdas: Vec<(String, f64)> = Vec::new();
        let mut sizes: Vec<usize> = Vec::new();
        let mut alphas: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !lambdas.iter().any(|(f, l)| f == &r.family && *l == r.lambda) {
                lambdas.push((r.family.clone(), r.lambda));
            }
            if !sizes.contains(&r.n) {
                sizes.push(r.n);
            }
            if !alphas.contains(&r.alpha) {
                alphas.push(r.alpha);
            }
        }
        let mut s = String::from("n");
        for (f, l) in &lambdas {
            for a in &alphas {
                let _ = write!(s, "\t{f}({l}) {}%", a * 100.0);
            }
        }
        s.push('\n');
        for &n in &sizes {
            let _ = write!(s, "{n}");
            for (f, l) in &lambdas {
                for &a in &alphas {
                    match self.find(f, *l, n, a) {
                        Some(r) => {
                            let _ = write!(s, "\t{:.4} ({:.4})", r.rejection_rate, r.mc_standard_error);
                        }
                        None => s.push_str("\t-"),
                    }
                }
            }
            s.push('\n');
        }
        s
    }
}

/// Runs every configuration and flattens the results into table rows.
pub fn run_suite(configs: &[ExperimentConfig]) -> Result<SuiteTable> {
    let mut rows = Vec::new();
    for cfg in configs {
        let res = run_experiment(cfg)?;
        for l in &res.levels {
            rows.push(SuiteRow {
                test: cfg.test_kind,
                family: cfg.family.kind.name().to_string(),
                lambda: cfg.family.lambda,
                n: cfg.n,
                alpha: l.alpha,
                rejection_rate: l.rejection_rate,
                mc_standard_error: l.mc_standard_error,
                failures: res.failures,
                replications: cfg.replications,
            });
        }
    }
    Ok(SuiteTable { rows })
}

/// Sample sizes of the published size table.
pub const SIZE_TABLE_N: [usize; 10] = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100];
/// Sample sizes of the published power tables.
pub const POWER_TABLE_N: [usize; 5] = [60, 70, 80, 90, 100];
pub const WEIBULL_GRID: [f64; 4] = [1.2, 1.4, 1.6, 1.8];
pub const LFR_GRID: [f64; 4] = [0.2, 0.4, 0.6, 0.8];
pub const MAKEHAM_GRID: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

/// Configurations regenerating the size table (asymptotic test, 5% and 1%).
pub fn size_table_configs(replications: usize, master_seed: u64) -> Vec<ExperimentConfig> {
    SIZE_TABLE_N
        .iter()
        .map(|&n| {
            ExperimentConfig::new(
                FamilySpec::exponential(1.0).expect("valid"),
                n,
                replications,
                master_seed,
            )
        })
        .collect()
}

/// Configurations regenerating one power table for the given family grid.
pub fn power_table_configs(
    family: crate::families::FamilyKind,
    lambdas: &[f64],
    sizes: &[usize],
    replications: usize,
    master_seed: u64,
) -> Result<Vec<ExperimentConfig>> {
    let mut out = Vec::new();
    for &n in sizes {
        for &l in lambdas {
            out.push(ExperimentConfig::new(
                FamilySpec::new(family, l, 0.0)?,
                n,
                replications,
                master_seed,
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::FamilyKind;

    #[test]
    fn empty_suite() {
        let t = run_suite(&[]).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.to_csv().trim(), SuiteTable::CSV_HEADER);
    }

    #[test]
    fn validation() {
        let e = FamilySpec::exponential(1.0).unwrap();
        let mut cfg = ExperimentConfig::new(e, 20, 50, 1);
        assert!(run(&cfg).is_err());
        cfg.replications = 200;
        cfg.alpha_levels = vec![1.5];
        assert!(matches!(run(&cfg), Err(Error::InvalidLevel(_))));
        cfg.alpha_levels = vec![0.05];
        cfg.test_kind = TestKind::Censored;
        assert!(run(&cfg).is_err());
        assert!(power(&ExperimentConfig::new(e, 20, 200, 1)).is_err());
        let w = FamilySpec::weibull(1.4).unwrap();
        assert!(type1_error(&ExperimentConfig::new(w, 20, 200, 1)).is_err());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let w = FamilySpec::makeham(0.4).unwrap();
        let cfg = ExperimentConfig::new(w, 30, 300, 77);
        let a = power(&cfg).unwrap();
        let b = power(&cfg).unwrap();
        assert_eq!(a, b);
        let other = power(&ExperimentConfig { master_seed: 78, ..cfg }).unwrap();
        assert_ne!(a.levels[0].rejections, other.levels[0].rejections + 100_000);
    }

    #[test]
    fn standard_error_formula() {
        let cfg = ExperimentConfig::new(FamilySpec::exponential(2.0).unwrap(), 15, 400, 3);
        let r = type1_error(&cfg).unwrap();
        for l in &r.levels {
            let p = l.rejection_rate;
            assert!((l.mc_standard_error - (p * (1.0 - p) / 400.0).sqrt()).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn grid_rendering() {
        let cfgs = power_table_configs(FamilyKind::Weibull, &[1.4], &[20], 200, 5).unwrap();
        let t = run_suite(&cfgs).unwrap();
        let g = t.to_grid();
        assert!(g.starts_with("n\tweibull(1.4) 5%"));
        assert_eq!(g.lines().count(), 2);
        assert_eq!(t.to_csv().lines().count(), 3);
    }
}
