//! `rimrl`: exponentiality tests against increasing mean residual life.

mod input;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rimrl::efficacy::{self, AreConfig};
use rimrl::exact::{self, ExactNull};
use rimrl::report::{test_censored, test_uncensored_with_threshold, AUTO_EXACT_MAX_N};
use rimrl::sim::{self, ExperimentConfig, SuiteTable, TestKind};
use rimrl::{CensoredSample, Error, FamilyKind, FamilySpec, Method, Sample, TestReport};

use output::{opt, sig, Format};

#[derive(Parser)]
#[command(name = "rimrl", version, about = "Tests of exponentiality against increasing mean residual life")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a data file for exponentiality.
    Test(TestArgs),
    /// Exact critical values of Δ̂*.
    Critval(CritvalArgs),
    /// Pitman asymptotic efficacy of the test.
    Pae(PaeArgs),
    /// Monte Carlo size, power and efficiency studies.
    #[command(subcommand)]
    Simulate(SimulateCommand),
}

#[derive(Args)]
struct TestArgs {
    /// Delimited text file: time column, optional 0/1 status column.
    path: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    /// Largest n for which `auto` uses the exact test.
    #[arg(long, default_value_t = AUTO_EXACT_MAX_N)]
    exact_max_n: usize,
    /// Use the censored test with the status column.
    #[arg(long)]
    censored: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Asymptotic,
    Auto,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exact => Method::Exact,
            MethodArg::Asymptotic => Method::Asymptotic,
            MethodArg::Auto => Method::Auto,
        }
    }
}

#[derive(Args)]
struct CritvalArgs {
    #[arg(long, required_unless_present = "table")]
    n: Option<usize>,
    #[arg(long, required_unless_present = "table")]
    alpha: Option<f64>,
    /// Regenerate the whole table.
    #[arg(long, conflicts_with_all = ["n", "alpha"])]
    table: bool,
    /// Upper-tail levels of the table.
    #[arg(long, value_delimiter = ',', default_values_t = exact::TABLE_LEVELS)]
    levels: Vec<f64>,
    /// Sample sizes of the table.
    #[arg(long, value_delimiter = ',', default_values_t = exact::TABLE_SIZES)]
    sizes: Vec<usize>,
}

#[derive(Args)]
struct PaeArgs {
    /// weibull, lfr or makeham; all three when omitted.
    #[arg(long)]
    family: Option<FamilyKind>,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed; drawn from the OS when omitted and printed to stderr.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    /// Significance levels.
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.01])]
    levels: Vec<f64>,
}

#[derive(Args, Clone)]
struct Censoring {
    /// Censoring family.
    #[arg(long, default_value = "exponential")]
    censor_family: FamilyKind,
    /// Censoring parameter (rate, shape or scale).
    #[arg(long, default_value_t = 0.25)]
    censor_lambda: f64,
    /// Location of a logistic censoring distribution.
    #[arg(long, default_value_t = 0.0)]
    location: f64,
}

impl Censoring {
    fn spec(&self) -> rimrl::Result<FamilySpec> {
        FamilySpec::new(self.censor_family, self.censor_lambda, self.location)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SimTest {
    Exact,
    Asymptotic,
}

#[derive(Subcommand)]
enum SimulateCommand {
    /// Empirical size under exponential lifetimes.
    Type1 {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "asymptotic")]
        method: SimTest,
        #[command(flatten)]
        common: Common,
    },
    /// Empirical power under an alternative.
    Power {
        #[arg(long)]
        family: FamilyKind,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "asymptotic")]
        method: SimTest,
        #[command(flatten)]
        common: Common,
    },
    /// Size or power of the censored test.
    Censored {
        /// Lifetime family.
        #[arg(long, default_value = "exponential")]
        family: FamilyKind,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        censoring: Censoring,
        #[command(flatten)]
        common: Common,
    },
    /// Relative efficiency of the censored statistic.
    Are {
        #[arg(long, default_value_t = AreConfig::DEFAULT_N)]
        n: usize,
        #[arg(long, default_value_t = AreConfig::DEFAULT_REPLICATIONS)]
        reps: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Run without censoring.
        #[arg(long)]
        uncensored: bool,
        #[command(flatten)]
        censoring: Censoring,
    },
    /// Regenerate a published size or power table.
    Table {
        #[arg(value_enum)]
        which: TableKind,
        /// Sample sizes; the published ones when omitted.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Parameter grid; the published one when omitted.
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableKind {
    Size,
    Weibull,
    Lfr,
    Makeham,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Input(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numeric() {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Test(a) => cmd_test(a, cli.format),
        Command::Critval(a) => cmd_critval(a, cli.format),
        Command::Pae(a) => cmd_pae(a, cli.format),
        Command::Simulate(s) => cmd_simulate(s, cli.format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}

fn cmd_test(a: TestArgs, format: Format) -> Outcome {
    let text = fs::read_to_string(&a.path)
        .map_err(|e| Failure::Input(format!("{}: {e}", a.path.display())))?;
    let data = input::parse(&text).map_err(|e| Failure::Input(format!("{}: {e}", a.path.display())))?;
    let report = if a.censored {
        let status = data
            .status
            .ok_or_else(|| Failure::Input("--censored needs a status column".into()))?;
        test_censored(&CensoredSample::from_parts(&data.times, &status)?, a.alpha)?
    } else {
        test_uncensored_with_threshold(&Sample::new(data.times)?, a.method.into(), a.alpha, a.exact_max_n)?
    };
    match format {
        Format::Json => output::json(&report)?,
        Format::Csv => output::csv(&[report])?,
        Format::Text => print_report(&report),
    }
    Ok(())
}

fn print_report(r: &TestReport) {
    println!("method          {}", r.method);
    println!("n               {}", r.n);
    println!("delta*          {}", sig(r.delta_star));
    println!("delta           {}", sig(r.delta));
    println!("mean            {}", sig(r.mean));
    if let Some(c) = r.critical_value {
        println!("critical value  {}", sig(c));
    }
    if let Some(z) = r.z {
        println!("z               {}", sig(z));
        println!("critical z      {}", opt(r.critical_z));
    }
    if let Some(s) = r.sigma_hat {
        println!("sigma           {}", sig(s));
    }
    if let Some(f) = r.censored_fraction {
        println!("censored        {}", sig(f));
    }
    println!("p-value         {}", sig(r.p_value));
    println!("alpha           {}", r.alpha);
    println!(
        "decision        {}",
        if r.reject { "reject exponentiality" } else { "do not reject" }
    );
}

#[derive(Serialize)]
struct CritRow {
    n: usize,
    alpha: f64,
    critical_value: f64,
}

fn cmd_critval(a: CritvalArgs, format: Format) -> Outcome {
    if !a.table {
        let (n, alpha) = (a.n.expect("clap"), a.alpha.expect("clap"));
        let row = CritRow {
            n,
            alpha,
            critical_value: ExactNull::new(n)?.critical_value(alpha)?,
        };
        match format {
            Format::Json => output::json(&row)?,
            Format::Csv => output::csv(&[row])?,
            Format::Text => println!("{}", sig(row.critical_value)),
        }
        return Ok(());
    }
    let table = exact::critical_table(&a.levels, &a.sizes)?;
    match format {
        Format::Json => output::json(&table)?,
        Format::Csv => {
            let mut rows = Vec::new();
            for (i, &n) in table.sizes.iter().enumerate() {
                for (j, &alpha) in table.levels.iter().enumerate() {
                    rows.push(CritRow {
                        n,
                        alpha,
                        critical_value: table.values[i][j],
                    });
                }
            }
            output::csv(&rows)?
        }
        Format::Text => {
            print!("n");
            for l in &table.levels {
                print!("\t{}%", 100.0 * (1.0 - l));
            }
            println!();
            for (i, n) in table.sizes.iter().enumerate() {
                print!("{n}");
                for v in &table.values[i] {
                    print!("\t{}", sig(*v));
                }
                println!();
            }
        }
    }
    Ok(())
}

fn cmd_pae(a: PaeArgs, format: Format) -> Outcome {
    let kinds = match a.family {
        Some(k) => vec![k],
        None => vec![FamilyKind::Weibull, FamilyKind::LinearFailureRate, FamilyKind::Makeham],
    };
    let results = kinds
        .into_iter()
        .map(efficacy::pae)
        .collect::<rimrl::Result<Vec<_>>>()?;
    match format {
        Format::Json => output::json(&results)?,
        Format::Csv => output::csv(&results)?,
        Format::Text => {
            for r in &results {
                println!("{:<10}{}", r.family.name(), sig(r.pae));
            }
        }
    }
    Ok(())
}

fn seed_or_entropy(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

fn sim_kind(t: SimTest) -> TestKind {
    match t {
        SimTest::Exact => TestKind::Exact,
        SimTest::Asymptotic => TestKind::Asymptotic,
    }
}

fn experiment(test_kind: TestKind, family: FamilySpec, n: usize, c: &Common) -> ExperimentConfig {
    ExperimentConfig {
        test_kind,
        family,
        n,
        replications: c.reps,
        alpha_levels: c.levels.clone(),
        master_seed: seed_or_entropy(c.seed),
        censoring: None,
    }
}

fn emit_table(table: &SuiteTable, format: Format) -> Outcome {
    match format {
        Format::Json => output::json(table)?,
        Format::Csv => output::csv(&table.rows)?,
        Format::Text => print!("{}", table.to_grid()),
    }
    Ok(())
}

fn cmd_simulate(s: SimulateCommand, format: Format) -> Outcome {
    let configs = match s {
        SimulateCommand::Type1 { n, method, common } => {
            vec![experiment(sim_kind(method), FamilySpec::exponential(1.0)?, n, &common)]
        }
        SimulateCommand::Power {
            family,
            lambda,
            n,
            method,
            common,
        } => {
            let spec = FamilySpec::new(family, lambda, 0.0)?;
            if !spec.is_alternative() {
                return Err(Failure::Input(format!("{spec} is not an alternative")));
            }
            vec![experiment(sim_kind(method), spec, n, &common)]
        }
        SimulateCommand::Censored {
            family,
            lambda,
            n,
            censoring,
            common,
        } => {
            let mut cfg = experiment(TestKind::Censored, FamilySpec::new(family, lambda, 0.0)?, n, &common);
            cfg.censoring = Some(censoring.spec()?);
            vec![cfg]
        }
        SimulateCommand::Are {
            n,
            reps,
            seed,
            uncensored,
            censoring,
        } => {
            let c = if uncensored { None } else { Some(censoring.spec()?) };
            let mut cfg = AreConfig::new(c, seed_or_entropy(seed));
            cfg.n = n;
            cfg.replications = reps;
            let r = efficacy::are_censored(&cfg)?;
            match format {
                Format::Json => output::json(&r)?,
                Format::Csv => output::csv(&[AreRow::from(&r)])?,
                Format::Text => {
                    println!("are             {}", sig(r.are));
                    println!("standard error  {}", sig(r.standard_error));
                    println!("variance        {}", sig(r.variance));
                    println!("censored        {}", sig(r.mean_censored_fraction));
                    println!("failures        {}", r.failures);
                }
            }
            return Ok(());
        }
        SimulateCommand::Table {
            which,
            sizes,
            lambdas,
            common,
        } => {
            let seed = seed_or_entropy(common.seed);
            let mut cfgs = match which {
                TableKind::Size => {
                    let sizes = sizes.unwrap_or_else(|| sim::SIZE_TABLE_N.to_vec());
                    let mut cfgs = sim::size_table_configs(common.reps, seed);
                    cfgs.retain(|c| sizes.contains(&c.n));
                    for &n in &sizes {
                        if !cfgs.iter().any(|c| c.n == n) {
                            cfgs.push(ExperimentConfig::new(FamilySpec::exponential(1.0)?, n, common.reps, seed));
                        }
                    }
                    cfgs
                }
                TableKind::Weibull | TableKind::Lfr | TableKind::Makeham => {
                    let (kind, grid) = match which {
                        TableKind::Weibull => (FamilyKind::Weibull, sim::WEIBULL_GRID),
                        TableKind::Lfr => (FamilyKind::LinearFailureRate, sim::LFR_GRID),
                        _ => (FamilyKind::Makeham, sim::MAKEHAM_GRID),
                    };
                    let sizes = sizes.unwrap_or_else(|| sim::POWER_TABLE_N.to_vec());
                    let lambdas = lambdas.unwrap_or_else(|| grid.to_vec());
                    sim::power_table_configs(kind, &lambdas, &sizes, common.reps, seed)?
                }
            };
            for c in &mut cfgs {
                c.alpha_levels = common.levels.clone();
            }
            return emit_table(&sim::run_suite(&cfgs)?, format);
        }
    };
    emit_table(&sim::run_suite(&configs)?, format)
}

#[derive(Serialize)]
struct AreRow {
    n: usize,
    replications: usize,
    master_seed: u64,
    are: f64,
    standard_error: f64,
    variance: f64,
    mean_censored_fraction: f64,
    failures: usize,
}

impl From<&efficacy::AreResult> for AreRow {
    fn from(r: &efficacy::AreResult) -> Self {
        Self {
            n: r.config.n,
            replications: r.config.replications,
            master_seed: r.config.master_seed,
            are: r.are,
            standard_error: r.standard_error,
            variance: r.variance,
            mean_censored_fraction: r.mean_censored_fraction,
            failures: r.failures,
        }
    }
}
