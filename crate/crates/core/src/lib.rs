//! Tests of exponentiality against renewal increasing mean residual life
//! (shock model) alternatives.
//!
//! The statistic Δ̂* is a scale-free U-statistic that is positive when the
//! mean residual life grows. It comes with
//!
//! * an exact finite-sample null law ([`ExactNull`]) and critical values,
//! * a large-sample normal test ([`asymptotic_test`]),
//! * an inverse-probability-of-censoring weighted version for right-censored
//!   data ([`censored_test`]),
//! * Pitman efficacies and censored relative efficiencies ([`efficacy`]),
//! * a seeded Monte Carlo harness for size and power studies ([`sim`]).
//!
//! ```
//! use rimrl::{test_uncensored, Method, Sample};
//!
//! let sample = Sample::new(vec![0.21, 1.34, 0.07, 2.61, 0.88, 0.45, 1.02])?;
//! let report = test_uncensored(&sample, Method::Exact, 0.05)?;
//! assert_eq!(report.reject, report.delta_star > report.critical_value.unwrap());
//! # Ok::<(), rimrl::Error>(())
//! ```

pub mod asymptotic;
pub mod censored;
pub mod efficacy;
mod error;
pub mod exact;
pub mod families;
pub mod normal;
pub mod quadrature;
pub mod report;
pub mod sim;
pub mod statistic;
pub mod summation;

pub use asymptotic::{asymptotic_test, AsymptoticReport, NULL_VARIANCE};
pub use censored::{censored_test, CensoredReport, CensoredSample, Record, StepSurvival};
pub use error::{Error, Result};
pub use exact::{critical_table, CriticalTable, ExactNull};
pub use families::{FamilyKind, FamilySpec, RngStream};
pub use report::{test_censored, test_uncensored, Method, ReportMethod, TestReport};
pub use statistic::{
    coefficients, statistic_orderstats, statistic_spacings, statistic_ustat_oracle, Coefficients,
    Sample, StatisticValue,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/statistic.md")]
    mod statistic {}
    #[doc = include_str!("../../../book/src/exact-null.md")]
    mod exact_null {}
    #[doc = include_str!("../../../book/src/asymptotic.md")]
    mod asymptotic {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/censoring.md")]
    mod censoring {}
    #[doc = include_str!("../../../book/src/efficacy.md")]
    mod efficacy {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
