//! Right-censored version of the test.
//!
//! Uncensored records are reweighted by the inverse of the Kaplan–Meier
//! estimate of the censoring survival, taken just before the event time.
//! The weighted U-statistic and weighted mean give Δ̂*c, and its variance is
//! estimated from per-record influence values that carry a censoring
//! martingale correction for the estimated weights.
//!
//! Ties between an event and a censoring at the same time are broken with the
//! event first, so the censored unit stays in the event's risk set and the
//! event is not at risk of being censored at that instant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;
use crate::statistic::Sample;
use crate::summation::{sample_variance, CompensatedSum};

/// One observation `(min(X, C), 1{X ≤ C})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub time: f64,
    pub event: bool,
}

impl Record {
    pub fn event(time: f64) -> Self {
        Self { time, event: true }
    }

    pub fn censored(time: f64) -> Self {
        Self { time, event: false }
    }
}

/// A right-censored sample, held sorted by time with events before
/// censorings at tied times. `original_index` maps back to input order.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoredSample {
    records: Vec<Record>,
    original_index: Vec<usize>,
}

impl CensoredSample {
    /// Requires n ≥ 2 finite nonnegative times and at least two events.
    pub fn new(records: Vec<Record>) -> Result<Self> {
        let n = records.len();
        if n < 2 {
            return Err(Error::InvalidSampleSize { n, min: 2 });
        }
        if let Some((index, r)) = records
            .iter()
            .enumerate()
            .find(|(_, r)| !(r.time.is_finite() && r.time >= 0.0))
        {
            return Err(Error::InvalidObservation {
                index,
                value: r.time,
            });
        }
        let events = records.iter().filter(|r| r.event).count();
        if events < 2 {
            return Err(Error::DegenerateSample(format!(
                "only {events} uncensored record(s); at least two are needed"
            )));
        }
        if records.iter().all(|r| !r.event || r.time == 0.0) {
            return Err(Error::DegenerateSample(
                "every event time is zero, so the weighted mean vanishes".into(),
            ));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            records[a]
                .time
                .total_cmp(&records[b].time)
                .then(records[b].event.cmp(&records[a].event))
        });
        Ok(Self {
            records: order.iter().map(|&i| records[i]).collect(),
            original_index: order,
        })
    }

    pub fn from_parts(times: &[f64], events: &[bool]) -> Result<Self> {
        if times.len() != events.len() {
            return Err(Error::InvalidConfig(format!(
                "{} times but {} status flags",
                times.len(),
                events.len()
            )));
        }
        Self::new(
            times
                .iter()
                .zip(events)
                .map(|(&time, &event)| Record { time, event })
                .collect(),
        )
    }

    /// Every observation treated as an event.
    pub fn uncensored(sample: &Sample) -> Self {
        let records: Vec<Record> = sample
            .order_statistics()
            .iter()
            .map(|&t| Record::event(t))
            .collect();
        let original_index = (0..records.len()).collect();
        Self {
            records,
            original_index,
        }
    }

    /// Pairs lifetimes with independent censoring times.
    ///
    /// A negative censoring time censors the unit at the origin.
    pub fn from_lifetimes(lifetimes: &[f64], censoring_times: &[f64]) -> Result<Self> {
        let records = lifetimes
            .iter()
            .zip(censoring_times)
            .map(|(&x, &c)| {
                if x <= c {
                    Record::event(x)
                } else {
                    Record::censored(c.max(0.0))
                }
            })
            .collect();
        Self::new(records)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records sorted by time, events first within ties.
    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn censored_fraction(&self) -> f64 {
        self.records.iter().filter(|r| !r.event).count() as f64 / self.len() as f64
    }

    /// Scaled copy; all times multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.records
                .iter()
                .map(|r| Record {
                    time: r.time * c,
                    event: r.event,
                })
                .collect(),
        )
    }

    /// Copy with the record at sorted position `k` removed.
    fn without(&self, k: usize) -> Result<Self> {
        let mut records = self.records.clone();
        records.remove(k);
        Self::new(records)
    }
}

/// Right-continuous, nonincreasing step function starting at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSurvival {
    pub jump_times: Vec<f64>,
    /// Value on `[jump_times[k], jump_times[k+1])`.
    pub values: Vec<f64>,
}

impl StepSurvival {
    /// S(t), including any jump at t.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.jump_times.partition_point(|&s| s <= t);
        if k == 0 {
            1.0
        } else {
            self.values[k - 1]
        }
    }

    /// S(t−), excluding any jump at t.
    pub fn value_at_minus(&self, t: f64) -> f64 {
        let k = self.jump_times.partition_point(|&s| s < t);
        if k == 0 {
            1.0
        } else {
            self.values[k - 1]
        }
    }
}

/// Distinct-time summary of the censoring process.
struct CensoringSteps {
    times: Vec<f64>,
    /// Censorings at each time.
    count: Vec<usize>,
    /// Units at risk of censoring at each time (events at that time excluded).
    at_risk: Vec<usize>,
}

fn censoring_steps(cs: &CensoredSample) -> CensoringSteps {
    let recs = cs.records();
    let n = recs.len();
    let mut steps = CensoringSteps {
        times: Vec::new(),
        count: Vec::new(),
        at_risk: Vec::new(),
    };
    let mut k = 0;
    while k < n {
        let t = recs[k].time;
        let mut end = k;
        let mut events = 0;
        while end < n && recs[end].time == t {
            if recs[end].event {
                events += 1;
            }
            end += 1;
        }
        let censored = end - k - events;
        if censored > 0 {
            steps.times.push(t);
            steps.count.push(censored);
            steps.at_risk.push(n - k - events);
        }
        k = end;
    }
    steps
}

/// Kaplan–Meier estimate of the censoring survival K_c, treating censoring
/// as the event of interest. Jumps occur only at censoring times.
pub fn km_censoring(cs: &CensoredSample) -> StepSurvival {
    let steps = censoring_steps(cs);
    let mut k = 1.0;
    let values = steps
        .count
        .iter()
        .zip(&steps.at_risk)
        .map(|(&c, &r)| {
            k *= 1.0 - c as f64 / r as f64;
            k
        })
        .collect();
    StepSurvival {
        jump_times: steps.times,
        values,
    }
}

/// IPCW weights `δᵢ / K̂(yᵢ−)` in sorted order.
fn ipcw_weights(cs: &CensoredSample, km: &StepSurvival) -> Result<Vec<f64>> {
    cs.records()
        .iter()
        .enumerate()
        .map(|(k, r)| {
            if !r.event {
                return Ok(0.0);
            }
            let g = km.value_at_minus(r.time);
            if g <= 0.0 {
                Err(Error::UnestimableTail {
                    index: cs.original_index[k],
                    time: r.time,
                })
            } else {
                Ok(1.0 / g)
            }
        })
        .collect()
}

/// Weighted U-statistic Δ̂c and weighted mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IpcwEstimate {
    pub delta_c: f64,
    pub mean_c: f64,
}

impl IpcwEstimate {
    pub fn delta_c_star(&self) -> f64 {
        self.delta_c / self.mean_c
    }
}

/// Δ̂c = 2/(n(n−1)) Σ_{i<j} h(yᵢ,yⱼ) wᵢwⱼ with h(a,b) = min(a,b) − (a+b)/4 and
/// wᵢ = δᵢ/K̂(yᵢ−); mean_c = (1/n) Σ yᵢwᵢ.
///
/// Evaluated in O(n log n) from the sorted records: the pair sum of minima is
/// Σᵢ wᵢyᵢ·(Σ_{j after i} wⱼ), ties included.
pub fn ipcw_statistic(cs: &CensoredSample) -> Result<IpcwEstimate> {
    let km = km_censoring(cs);
    let w = ipcw_weights(cs, &km)?;
    Ok(weighted_statistic(cs, &w))
}

fn weighted_statistic(cs: &CensoredSample, w: &[f64]) -> IpcwEstimate {
    let recs = cs.records();
    let n = recs.len() as f64;
    let total_w: f64 = crate::summation::sum(w.iter().copied());
    let mut after = total_w;
    let mut minima = CompensatedSum::new();
    let mut sums = CompensatedSum::new();
    let mut moment = CompensatedSum::new();
    for (r, &wi) in recs.iter().zip(w) {
        after -= wi;
        let wy = wi * r.time;
        minima.add(wy * after);
        sums.add(wy * (total_w - wi));
        moment.add(wy);
    }
    let pair_sum = minima.value() - 0.25 * sums.value();
    IpcwEstimate {
        delta_c: 2.0 * pair_sum / (n * (n - 1.0)),
        mean_c: moment.value() / n,
    }
}

/// Plug-in variance estimate for the censored statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensoredVariance {
    /// σ̂²₁c, variance of the per-record influence values.
    pub sigma1c_sq: f64,
    /// Estimated variance of √n·Δ̂*c, i.e. 4σ̂²₁c / mean_c².
    pub variance: f64,
    pub estimate: IpcwEstimate,
}

/// Influence-function variance estimate.
///
/// Each record contributes
///
/// ```text
/// φₖ = δₖ ĥ₁(yₖ)/K̂(yₖ−) + ∫ ŵ(t) dM̂ₖ(t)
/// ```
///
/// where `ĥ₁(x) = (1/n) Σⱼ wⱼ h(x, yⱼ)`, `ŵ(t)` is the average of `δĥ₁(y)/K̂(y−)`
/// over records with `y > t` divided by the at-risk proportion, and `M̂ₖ` is
/// the censoring counting process of record k minus its Nelson–Aalen
/// compensator.
pub fn censored_variance(cs: &CensoredSample) -> Result<CensoredVariance> {
    let km = km_censoring(cs);
    let w = ipcw_weights(cs, &km)?;
    let estimate = weighted_statistic(cs, &w);
    let phi = influence_values(cs, &w);
    let sigma1c_sq = sample_variance(&phi);
    let variance = 4.0 * sigma1c_sq / (estimate.mean_c * estimate.mean_c);
    if !variance.is_finite() {
        return Err(Error::Numeric(
            "censored variance estimate is not finite".into(),
        ));
    }
    Ok(CensoredVariance {
        sigma1c_sq,
        variance,
        estimate,
    })
}

fn influence_values(cs: &CensoredSample, w: &[f64]) -> Vec<f64> {
    let recs = cs.records();
    let n = recs.len();
    let nf = n as f64;
    let times: Vec<f64> = recs.iter().map(|r| r.time).collect();

    // Prefix sums over sorted order of w·y and w.
    let mut prefix_wy = Vec::with_capacity(n + 1);
    let mut prefix_w = Vec::with_capacity(n + 1);
    let (mut a, mut b) = (CompensatedSum::new(), CompensatedSum::new());
    prefix_wy.push(0.0);
    prefix_w.push(0.0);
    for (r, &wi) in recs.iter().zip(w) {
        a.add(wi * r.time);
        b.add(wi);
        prefix_wy.push(a.value());
        prefix_w.push(b.value());
    }
    let total_wy = prefix_wy[n];
    let total_w = prefix_w[n];

    // ĥ₁(yₖ) = (1/n)[Σ_{yⱼ≤x} wⱼyⱼ + x Σ_{yⱼ>x} wⱼ − (x W + Σ wⱼyⱼ)/4].
    let h1: Vec<f64> = times
        .iter()
        .map(|&x| {
            let upto = times.partition_point(|&t| t <= x);
            let below = prefix_wy[upto];
            let above_w = total_w - prefix_w[upto];
            (below + x * above_w - 0.25 * (x * total_w + total_wy)) / nf
        })
        .collect();
    let direct: Vec<f64> = h1.iter().zip(w).map(|(h, wi)| h * wi).collect();

    // Suffix sums of the direct terms for ŵ(t) = Σ_{y>t} direct / at_risk(t).
    let mut suffix = vec![0.0; n + 1];
    let mut acc = CompensatedSum::new();
    for k in (0..n).rev() {
        acc.add(direct[k]);
        suffix[k] = acc.value();
    }

    let steps = censoring_steps(cs);
    let w_hat: Vec<f64> = steps
        .times
        .iter()
        .zip(&steps.at_risk)
        .map(|(&t, &r)| suffix[times.partition_point(|&s| s <= t)] / r as f64)
        .collect();
    // Cumulative compensator Σ_{s ≤ t} ŵ(s) dΛ̂(s).
    let mut cumulative = Vec::with_capacity(w_hat.len());
    let mut acc = CompensatedSum::new();
    for ((wh, &c), &r) in w_hat.iter().zip(&steps.count).zip(&steps.at_risk) {
        acc.add(wh * c as f64 / r as f64);
        cumulative.push(acc.value());
    }

    recs.iter()
        .enumerate()
        .map(|(k, r)| {
            // Censoring times s at which record k is at risk: s < y, or s = y
            // when k itself is censored.
            let m = if r.event {
                steps.times.partition_point(|&s| s < r.time)
            } else {
                steps.times.partition_point(|&s| s <= r.time)
            };
            let compensator = if m == 0 { 0.0 } else { cumulative[m - 1] };
            let jump = if r.event {
                0.0
            } else {
                // Record k is censored, so its time is a censoring step.
                w_hat[m - 1]
            };
            direct[k] + jump - compensator
        })
        .collect()
}

/// Delete-one jackknife estimate of the variance of √n·Δ̂*c.
///
/// Each deletion re-estimates the censoring distribution. Deletions that
/// leave fewer than two events are an error.
pub fn jackknife_variance(cs: &CensoredSample) -> Result<f64> {
    let n = cs.len();
    let thetas = (0..n)
        .map(|k| {
            let reduced = cs.without(k)?;
            Ok(ipcw_statistic(&reduced)?.delta_c_star())
        })
        .collect::<Result<Vec<f64>>>()?;
    let nf = n as f64;
    let mean = crate::summation::sum(thetas.iter().copied()) / nf;
    let ss = crate::summation::sum(thetas.iter().map(|t| (t - mean) * (t - mean)));
    Ok(nf * (nf - 1.0) / nf * ss)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensoredReport {
    pub n: usize,
    pub delta_c: f64,
    pub mean_c: f64,
    pub delta_c_star: f64,
    /// Estimated standard deviation of √n·Δ̂*c.
    pub sigma_hat: f64,
    pub z: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub critical_z: f64,
    pub reject: bool,
    pub censored_fraction: f64,
}

/// Rejects when √n·Δ̂*c/σ̂ reaches the upper-α normal point.
pub fn censored_test(cs: &CensoredSample, alpha: f64) -> Result<CensoredReport> {
    let critical_z = normal::upper_quantile(alpha)?;
    let var = censored_variance(cs)?;
    let sigma_hat = var.variance.sqrt();
    let delta_c_star = var.estimate.delta_c_star();
    let n = cs.len();
    let z = if delta_c_star == 0.0 {
        0.0
    } else if sigma_hat > 0.0 {
        (n as f64).sqrt() * delta_c_star / sigma_hat
    } else {
        return Err(Error::Numeric(
            "estimated variance is zero for a nonzero statistic".into(),
        ));
    };
    Ok(CensoredReport {
        n,
        delta_c: var.estimate.delta_c,
        mean_c: var.estimate.mean_c,
        delta_c_star,
        sigma_hat,
        z,
        p_value: normal::sf(z),
        alpha,
        critical_z,
        reject: z >= critical_z,
        censored_fraction: cs.censored_fraction(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statistic::statistic_spacings;

    fn cs(recs: &[(f64, bool)]) -> CensoredSample {
        CensoredSample::new(
            recs.iter()
                .map(|&(time, event)| Record { time, event })
                .collect(),
        )
        .unwrap()
    }

    /// Direct O(n²) evaluation of the weighted pair sum.
    fn brute_force(c: &CensoredSample) -> IpcwEstimate {
        let km = km_censoring(c);
        let r = c.records();
        let n = r.len();
        let w: Vec<f64> = r
            .iter()
            .map(|x| if x.event { 1.0 / km.value_at_minus(x.time) } else { 0.0 })
            .collect();
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let h = r[i].time.min(r[j].time) - 0.25 * (r[i].time + r[j].time);
                s += h * w[i] * w[j];
            }
        }
        let mean = r.iter().zip(&w).map(|(x, wi)| x.time * wi).sum::<f64>() / n as f64;
        IpcwEstimate {
            delta_c: 2.0 * s / (n * (n - 1)) as f64,
            mean_c: mean,
        }
    }

    #[test]
    fn km_without_censoring_is_one() {
        let c = cs(&[(1.0, true), (2.0, true), (5.0, true)]);
        let km = km_censoring(&c);
        assert!(km.jump_times.is_empty());
        for t in [0.0, 1.0, 3.0, 10.0] {
            assert_eq!(km.value_at(t), 1.0);
            assert_eq!(km.value_at_minus(t), 1.0);
        }
    }

    #[test]
    fn km_examples() {
        let c = cs(&[(1.0, false), (2.0, true), (3.0, true)]);
        let km = km_censoring(&c);
        assert!((km.value_at(1.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(km.value_at_minus(1.0), 1.0);
        assert!((km.value_at_minus(2.0) - 2.0 / 3.0).abs() < 1e-15);

        // Risk set {1, 2} at t = 1.
        let c = CensoredSample::new(vec![
            Record::censored(1.0),
            Record::event(2.0),
            Record::event(0.5),
        ])
        .unwrap();
        let km = km_censoring(&c);
        assert_eq!(km.value_at_minus(2.0), 0.5);

        let c = cs(&[(1.0, true), (2.0, false), (0.5, true)]);
        assert_eq!(km_censoring(&c).value_at(2.0), 0.0);
    }

    #[test]
    fn events_precede_censorings_at_ties() {
        // At t = 2 the event leaves the censoring risk set: 1 of 1 censored.
        let c = cs(&[(1.0, true), (2.0, true), (2.0, false)]);
        let km = km_censoring(&c);
        assert_eq!(km.value_at(2.0), 0.0);
        assert_eq!(km.value_at_minus(2.0), 1.0);
        assert!(ipcw_statistic(&c).is_ok());
    }

    #[test]
    fn weighted_mean_by_hand() {
        let c = cs(&[(1.0, true), (3.0, true), (2.0, false)]);
        let km = km_censoring(&c);
        assert_eq!(km.value_at_minus(1.0), 1.0);
        assert_eq!(km.value_at_minus(3.0), 0.5);
        let est = ipcw_statistic(&c).unwrap();
        assert!((est.mean_c - 7.0 / 3.0).abs() < 1e-15);
        // Only the (1, 3) pair has both events: h = 1 − 1 = 0.
        assert!(est.delta_c.abs() < 1e-15);
    }

    #[test]
    fn fast_statistic_matches_brute_force() {
        let c = cs(&[
            (0.3, true),
            (1.2, false),
            (0.7, true),
            (2.2, true),
            (1.2, true),
            (0.1, false),
            (3.4, true),
            (0.9, false),
            (0.7, true),
            (5.0, false),
        ]);
        let fast = ipcw_statistic(&c).unwrap();
        let slow = brute_force(&c);
        assert!((fast.delta_c - slow.delta_c).abs() < 1e-14);
        assert!((fast.mean_c - slow.mean_c).abs() < 1e-14);
    }

    #[test]
    fn reduces_to_uncensored_statistic() {
        let s = Sample::new(vec![0.4, 2.2, 0.9, 1.1, 0.05, 3.3, 0.7]).unwrap();
        let c = CensoredSample::uncensored(&s);
        let est = ipcw_statistic(&c).unwrap();
        let u = statistic_spacings(&s);
        assert!((est.delta_c_star() - u.delta_star).abs() < 1e-15);
        assert!((est.mean_c - u.mean).abs() < 1e-15);
    }

    #[test]
    fn censoring_at_the_top_empties_km() {
        let c = cs(&[(1.0, true), (2.0, false), (0.5, true)]);
        let km = km_censoring(&c);
        assert_eq!(km.value_at(2.0), 0.0);
        assert_eq!(km.value_at_minus(2.0), 1.0);
        // Every event precedes the drop, so all weights stay finite.
        assert!(ipcw_statistic(&c).is_ok());
    }

    #[test]
    fn zero_weight_event_is_reported() {
        // StepSurvival that has already hit zero before an event time.
        let c = cs(&[(0.5, true), (1.0, true), (3.0, true)]);
        let km = StepSurvival {
            jump_times: vec![2.0],
            values: vec![0.0],
        };
        match ipcw_weights(&c, &km) {
            Err(Error::UnestimableTail { index, time }) => {
                assert_eq!(time, 3.0);
                assert_eq!(index, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scale_invariance() {
        let c = cs(&[(0.3, true), (1.2, false), (0.7, true), (2.2, true), (1.9, true)]);
        let a = ipcw_statistic(&c).unwrap();
        let b = ipcw_statistic(&c.scaled(4.5).unwrap()).unwrap();
        assert!((b.delta_c - 4.5 * a.delta_c).abs() < 1e-13);
        assert!((b.mean_c - 4.5 * a.mean_c).abs() < 1e-13);
        assert!((a.delta_c_star() - b.delta_c_star()).abs() < 1e-14);
    }

    #[test]
    fn variance_nondegenerate() {
        let c = cs(&[(1.0, true), (2.0, true)]);
        assert!(censored_variance(&c).unwrap().variance > 0.0);
    }

    #[test]
    fn uncensored_influence_matches_asymptotic_module() {
        let s = Sample::new(vec![0.4, 2.2, 0.9, 1.1, 0.05, 3.3, 0.7, 0.7]).unwrap();
        let v = censored_variance(&CensoredSample::uncensored(&s)).unwrap();
        let psi = crate::asymptotic::influence_variance(&s).unwrap();
        assert!((4.0 * v.sigma1c_sq - psi).abs() < 1e-13);
    }

    #[test]
    fn zero_statistic_gives_zero_z() {
        let c = cs(&[(1.0, true), (3.0, true)]);
        let r = censored_test(&c, 0.05).unwrap();
        assert_eq!(r.delta_c_star, 0.0);
        assert_eq!(r.z, 0.0);
        assert!(!r.reject);
    }

    #[test]
    fn ingestion_errors() {
        assert!(matches!(
            CensoredSample::new(vec![Record::event(1.0)]),
            Err(Error::InvalidSampleSize { .. })
        ));
        assert!(matches!(
            CensoredSample::new(vec![Record::event(1.0), Record::censored(2.0)]),
            Err(Error::DegenerateSample(_))
        ));
        assert!(matches!(
            CensoredSample::new(vec![Record::event(1.0), Record::event(-2.0)]),
            Err(Error::InvalidObservation { index: 1, .. })
        ));
        assert!(CensoredSample::from_parts(&[1.0, 2.0], &[true]).is_err());
    }

    #[test]
    fn negative_censoring_times_censor_at_origin() {
        let c = CensoredSample::from_lifetimes(&[1.0, 2.0, 0.5, 0.7], &[-0.3, 5.0, 9.0, 9.0]).unwrap();
        assert_eq!(c.records()[0], Record::censored(0.0));
        assert_eq!(c.censored_fraction(), 0.25);
    }

    #[test]
    fn jackknife_on_small_sample() {
        let c = cs(&[
            (0.3, true),
            (1.2, false),
            (0.7, true),
            (2.2, true),
            (1.9, true),
            (0.2, true),
        ]);
        let j = jackknife_variance(&c).unwrap();
        assert!(j.is_finite() && j > 0.0);
    }
}
