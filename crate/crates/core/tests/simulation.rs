use rimrl::censored::{censored_variance, jackknife_variance};
use rimrl::sim::{self, power, type1_error, ExperimentConfig, TestKind};
use rimrl::{CensoredSample, FamilyKind, FamilySpec, RngStream};

fn exponential() -> FamilySpec {
    FamilySpec::exponential(1.0).unwrap()
}

#[test]
fn exact_test_is_calibrated() {
    for n in [5, 20, 50] {
        let cfg = ExperimentConfig {
            test_kind: TestKind::Exact,
            alpha_levels: rimrl::exact::TABLE_LEVELS.to_vec(),
            ..ExperimentConfig::new(exponential(), n, 20_000, 11)
        };
        let r = type1_error(&cfg).unwrap();
        for l in &r.levels {
            let se = (l.alpha * (1.0 - l.alpha) / 20_000.0).sqrt();
            assert!(
                (l.rejection_rate - l.alpha).abs() <= 3.0 * se,
                "n = {n}, alpha = {}: {}",
                l.alpha,
                l.rejection_rate
            );
        }
    }
}

#[test]
fn power_grows_with_lambda_and_n() {
    for (kind, grid) in [
        (FamilyKind::Weibull, sim::WEIBULL_GRID),
        (FamilyKind::LinearFailureRate, sim::LFR_GRID),
        (FamilyKind::Makeham, sim::MAKEHAM_GRID),
    ] {
        let cfgs = sim::power_table_configs(kind, &grid, &[60, 100], 4_000, 5).unwrap();
        let t = sim::run_suite(&cfgs).unwrap();
        let name = kind.name();
        for alpha in [0.05, 0.01] {
            for n in [60, 100] {
                for w in grid.windows(2) {
                    let a = t.find(name, w[0], n, alpha).unwrap();
                    let b = t.find(name, w[1], n, alpha).unwrap();
                    let slack = 2.0 * (a.mc_standard_error.powi(2) + b.mc_standard_error.powi(2)).sqrt();
                    assert!(b.rejection_rate + slack >= a.rejection_rate, "{name} {w:?} n={n}");
                }
            }
            for &l in &grid {
                let a = t.find(name, l, 60, alpha).unwrap();
                let b = t.find(name, l, 100, alpha).unwrap();
                let slack = 2.0 * (a.mc_standard_error.powi(2) + b.mc_standard_error.powi(2)).sqrt();
                assert!(b.rejection_rate + slack >= a.rejection_rate, "{name} λ={l}");
            }
        }
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let cfg = ExperimentConfig::new(FamilySpec::makeham(0.6).unwrap(), 40, 2_000, 99);
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| power(&cfg).unwrap());
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| power(&cfg).unwrap());
    assert_eq!(one, four);
}

#[test]
fn exponential_rate_is_irrelevant() {
    let a = type1_error(&ExperimentConfig::new(exponential(), 30, 5_000, 3)).unwrap();
    let b = type1_error(&ExperimentConfig::new(FamilySpec::exponential(7.5).unwrap(), 30, 5_000, 3)).unwrap();
    for (x, y) in a.levels.iter().zip(&b.levels) {
        assert_eq!(x.rejections, y.rejections);
    }
}

/// One-sample Kolmogorov–Smirnov distance between draws and the model CDF.
fn ks_distance(spec: &FamilySpec, n: usize, seed: u64) -> f64 {
    let mut x = spec.sample(&RngStream::new(seed, 0), n).unwrap();
    x.sort_by(f64::total_cmp);
    let nf = n as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = spec.cdf(v).unwrap();
            (f - i as f64 / nf).abs().max((f - (i + 1) as f64 / nf).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn samplers_follow_their_distributions() {
    let n = 20_000;
    // Asymptotic 1% point of the Kolmogorov distribution.
    let crit = 1.628 / (n as f64).sqrt();
    let specs = [
        FamilySpec::exponential(2.0).unwrap(),
        FamilySpec::weibull(1.6).unwrap(),
        FamilySpec::linear_failure_rate(0.4).unwrap(),
        FamilySpec::makeham(0.5).unwrap(),
        FamilySpec::makeham(3.0).unwrap(),
        FamilySpec::logistic(0.5, 1.0).unwrap(),
    ];
    for (k, s) in specs.iter().enumerate() {
        let d = ks_distance(s, n, 100 + k as u64);
        assert!(d < crit, "{s}: D = {d}");
    }
}

#[test]
fn jackknife_agrees_with_plug_in() {
    // A single late event with a large 1/K̂ weight can inflate the jackknife
    // on one sample, so agreement is judged on the median over many.
    let n = 500;
    let mut ratios: Vec<f64> = (0..21)
        .map(|r| {
            let mut rng = RngStream::new(21, r).rng();
            let x = exponential().draws(&mut rng, n).unwrap();
            let c = FamilySpec::exponential(0.25).unwrap().draws(&mut rng, n).unwrap();
            let cs = CensoredSample::from_lifetimes(&x, &c).unwrap();
            jackknife_variance(&cs).unwrap() / censored_variance(&cs).unwrap().variance
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    let median = ratios[ratios.len() / 2];
    assert!((median - 1.0).abs() < 0.25, "median ratio {median}, all {ratios:?}");
}

#[test]
fn censored_experiment_reports_censoring() {
    let cfg = ExperimentConfig {
        test_kind: TestKind::Censored,
        censoring: Some(FamilySpec::exponential(0.25).unwrap()),
        ..ExperimentConfig::new(exponential(), 100, 500, 8)
    };
    let r = type1_error(&cfg).unwrap();
    assert_eq!(r.levels.len(), 2);
    assert!(r.failures < 5);
}

#[test]
fn censored_test_size_without_censoring() {
    let cfg = ExperimentConfig {
        test_kind: TestKind::Censored,
        alpha_levels: vec![0.05],
        censoring: Some(FamilySpec::exponential(1e-12).unwrap()),
        ..ExperimentConfig::new(exponential(), 200, 2_000, 4)
    };
    let r = type1_error(&cfg).unwrap();
    let p = r.levels[0].rejection_rate;
    assert!((0.03..=0.08).contains(&p), "{p}");
}

#[test]
fn censored_test_power_under_light_censoring() {
    let cfg = ExperimentConfig {
        test_kind: TestKind::Censored,
        alpha_levels: vec![0.05],
        // About 8% of Weibull(1.6) lifetimes fall beyond an Exp(0.1) censoring time.
        censoring: Some(FamilySpec::exponential(0.1).unwrap()),
        ..ExperimentConfig::new(FamilySpec::weibull(1.6).unwrap(), 200, 1_000, 4)
    };
    let r = power(&cfg).unwrap();
    assert!(r.levels[0].rejection_rate > 0.9, "{:?}", r.levels[0]);
}
