//! The `relicmp` command line: CSV ingestion, dispatch and reporting.
//!
//! Exit codes: 0 on success, 2 when the data make the requested statistic
//! undefined, 1 for usage, I/O and parse errors. Errors are printed as one
//! line, `error: kind=<Kind> message=<text>`.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::coefficients::{Coefficient, LambdaKind, LambdaSpec};
use crate::data::ItemResponseMatrix;
use crate::error::{Error, Result};
use crate::inference::{
    compare, ksample_test, paired_test, pairwise_posthoc, Adjustment, Alternative, KSampleMethod, TestMethod,
    TestOptions,
};
use crate::resampling::{ResamplingPlan, DEFAULT_EXACT_CAP};
use crate::simulation::{plot_svg, run_type1_study, Grid, SimulationConfig};
use crate::variance::{group_stats_of, paired_stats, VarianceMethod};

mod ingest;
mod report;

pub use ingest::{ingest_csv, ingest_groups, CsvOptions};
pub use report::{CoefficientRow, GroupDescriptive, ReportDocument, RequestEcho};

#[derive(Debug, Parser)]
#[command(name = "relicmp", version, about = "Compare reliability coefficients across groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Omit the timestamp so identical runs give identical output.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Worker threads for resampling (default: all cores).
    #[arg(long, global = true, env = "RELICMP_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two independent groups: two files, or one file with --group-col.
    Compare(CompareArgs),
    /// K >= 2 independent groups.
    Ksample(KsampleArgs),
    /// Two occasions on the same examinees, side by side in one file.
    Paired(PairedArgs),
    /// Alpha and the six Guttman lambdas per group.
    Coefficients(CoefficientsArgs),
    /// Type-I error simulation study.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Input files have a header row.
    #[arg(long)]
    pub header: bool,
    /// Column with group labels (header name or 1-based index).
    #[arg(long)]
    pub group_col: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct CoefficientArgs {
    /// alpha or lambda1..lambda6.
    #[arg(long, default_value = "alpha")]
    pub coefficient: String,
    /// Part A of the lambda3 split: comma-separated 1-based item numbers.
    #[arg(long)]
    pub split: Option<String>,
    /// Lambda6 error variances: comma-separated values, or "smc" to derive
    /// them from squared multiple correlations.
    #[arg(long)]
    pub error_variances: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[arg(long)]
    pub method: Option<TestMethod>,
    #[arg(long, default_value = "adf")]
    pub variance: VarianceMethod,
    #[arg(long, default_value = "two-sided")]
    pub alternative: Alternative,
    /// Significance level; intervals are reported at 1 - level.
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    #[arg(long, default_value_t = 10_000)]
    pub replicates: usize,
    /// Random seed; drawn from system entropy and reported when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub coefficient: CoefficientArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(required = true, num_args = 1..=2)]
    pub files: Vec<PathBuf>,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub test: TestArgs,
}

#[derive(Debug, Clone, Args)]
pub struct KsampleArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub test: TestArgs,
    /// Also run all pairwise two-sample tests.
    #[arg(long)]
    pub posthoc: bool,
    #[arg(long, default_value = "none")]
    pub adjust: Adjustment,
}

#[derive(Debug, Clone, Args)]
pub struct PairedArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub header: bool,
    /// Items of the first occasion (default: half of the columns).
    #[arg(long)]
    pub k1: Option<usize>,
    #[command(flatten)]
    pub test: TestArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CoefficientsArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    #[command(flatten)]
    pub input: InputArgs,
    /// Part A of the lambda3 split (default: the first half of the items).
    #[arg(long)]
    pub split: Option<String>,
    /// Lambda6 error variances (default: smc).
    #[arg(long)]
    pub error_variances: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// paper-desk, paper-full or supplement.
    #[arg(long, default_value = "paper-desk")]
    pub grid: String,
    /// TOML grid definition; overrides --grid.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Also write an SVG chart of rejection rates.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

/// What a run produced, before it is written out.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: ReportDocument,
    /// Messages for stderr (chosen defaults, drawn seeds).
    pub messages: Vec<String>,
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("cannot parse '{p}' in {what}")))
        })
        .collect()
}

fn split_indices(s: &str) -> Result<Vec<usize>> {
    parse_list::<usize>(s, "--split")?
        .into_iter()
        .map(|i| {
            i.checked_sub(1)
                .ok_or_else(|| Error::InvalidSplit("item numbers start at 1".into()))
        })
        .collect()
}

fn with_error_variances(spec: LambdaSpec, s: Option<&str>) -> Result<LambdaSpec> {
    match s {
        None => Ok(spec),
        Some(v) if v.eq_ignore_ascii_case("smc") => Ok(spec.with_derived_error_variances()),
        Some(v) => Ok(spec.with_error_variances(parse_list(v, "--error-variances")?)),
    }
}

/// Builds the coefficient named on the command line.
pub fn coefficient_from_args(a: &CoefficientArgs) -> Result<Coefficient> {
    if a.coefficient == "alpha" {
        return Ok(Coefficient::Alpha);
    }
    let which: LambdaKind = a.coefficient.parse()?;
    let mut spec = LambdaSpec::new(which);
    if let Some(s) = &a.split {
        spec = spec.with_split(split_indices(s)?);
    }
    with_error_variances(spec, a.error_variances.as_deref()).map(Coefficient::Lambda)
}

fn options(t: &TestArgs) -> Result<TestOptions> {
    let opts = TestOptions {
        coefficient: coefficient_from_args(&t.coefficient)?,
        variance: t.variance,
        alternative: t.alternative,
        level: t.level,
    };
    if !(t.level > 0.0 && t.level < 1.0) {
        return Err(Error::InvalidArgument(format!("--level must lie in (0, 1), got {}", t.level)));
    }
    Ok(opts)
}

/// Draws a seed when the run is random and none was given.
fn resolve_seed(seed: Option<u64>, random: bool, messages: &mut Vec<String>) -> Option<u64> {
    if seed.is_some() || !random {
        return seed;
    }
    let s = rand::random::<u64>();
    messages.push(format!("no --seed given; using seed {s}"));
    Some(s)
}

fn plan(t: &TestArgs, seed: Option<u64>, workers: Option<usize>) -> ResamplingPlan {
    ResamplingPlan::permutation(t.replicates, seed.unwrap_or(0))
        .with_workers(workers)
        .with_exact_cap(DEFAULT_EXACT_CAP)
}

fn load_groups(files: &[PathBuf], input: &InputArgs) -> Result<Vec<(String, ItemResponseMatrix)>> {
    let opts = CsvOptions {
        header: input.header,
        group_col: input.group_col.clone(),
    };
    if input.group_col.is_some() {
        if files.len() != 1 {
            return Err(Error::InvalidArgument("--group-col takes exactly one input file".into()));
        }
        ingest_groups(&files[0], &opts)
    } else {
        files
            .iter()
            .map(|f| Ok((f.display().to_string(), ingest_csv(f, &opts)?)))
            .collect()
    }
}

fn describe(groups: &[(String, ItemResponseMatrix)], opts: &TestOptions) -> Result<Vec<GroupDescriptive>> {
    groups
        .iter()
        .map(|(label, m)| {
            let g = group_stats_of(m, &opts.coefficient, VarianceMethod::Adf)?;
            Ok(GroupDescriptive {
                label: label.clone(),
                n: g.n,
                k: g.k,
                estimate: g.estimate,
                variance_component: g.variance,
            })
        })
        .collect()
}

fn echo(sub: &str, inputs: &[PathBuf], t: Option<(&TestArgs, &str, Option<u64>)>) -> RequestEcho {
    RequestEcho {
        subcommand: sub.to_string(),
        inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
        method: t.map(|(_, m, _)| m.to_string()),
        variance: t.map(|(a, _, _)| a.variance.to_string()),
        alternative: t.map(|(a, _, _)| a.alternative.to_string()),
        level: t.map(|(a, _, _)| a.level),
        replicates: t.map(|(a, _, _)| a.replicates),
        seed: t.and_then(|(_, _, s)| s),
        coefficient: t.map(|(a, _, _)| a.coefficient.coefficient.clone()),
    }
}

fn run_compare(a: &CompareArgs, cli: &Cli) -> Result<RunOutput> {
    let mut messages = Vec::new();
    let opts = options(&a.test)?;
    let groups = load_groups(&a.files, &a.input)?;
    if groups.len() != 2 {
        return Err(Error::InvalidArgument(format!("compare needs exactly 2 groups, found {}", groups.len())));
    }
    let (d1, d2) = (&groups[0].1, &groups[1].1);
    let method = a.test.method.unwrap_or_else(|| {
        let m = if d1.cols() == d2.cols() {
            TestMethod::Permutation
        } else {
            TestMethod::Bootstrap
        };
        messages.push(format!("no --method given; using {m}"));
        m
    });
    let seed = resolve_seed(a.test.seed, method.is_random(), &mut messages);
    let mut report = ReportDocument::new(echo("compare", &a.files, Some((&a.test, method.name(), seed))), !cli.no_timestamp);
    report.groups = describe(&groups, &opts)?;
    report.results.push(compare(d1, d2, method, &plan(&a.test, seed, cli.workers), &opts)?);
    report.notes = messages.clone();
    Ok(RunOutput { report, messages })
}

fn run_ksample(a: &KsampleArgs, cli: &Cli) -> Result<RunOutput> {
    let mut messages = Vec::new();
    let opts = options(&a.test)?;
    let groups = load_groups(&a.files, &a.input)?;
    let method = a.test.method.unwrap_or(TestMethod::Asymptotic);
    let kmethod = match method {
        TestMethod::Asymptotic => KSampleMethod::Asymptotic,
        TestMethod::Permutation | TestMethod::Bootstrap => KSampleMethod::Resampling,
        TestMethod::ExactPermutation => {
            return Err(Error::Unsupported("the K-sample test has no exact enumeration".into()))
        }
    };
    let seed = resolve_seed(a.test.seed, method.is_random(), &mut messages);
    let data: Vec<ItemResponseMatrix> = groups.iter().map(|(_, m)| m.clone()).collect();
    let p = plan(&a.test, seed, cli.workers);
    if kmethod == KSampleMethod::Resampling && method == TestMethod::Permutation {
        let k0 = data[0].cols();
        if let Some(g) = data.iter().find(|g| g.cols() != k0) {
            return Err(Error::UnequalItemCounts { k1: k0, k2: g.cols() });
        }
    }
    let mut result = ksample_test(&data, kmethod, &p, &opts)?;
    if a.posthoc {
        result.pairwise = Some(pairwise_posthoc(&data, method, &p, &opts, a.adjust)?);
    }
    let mut report = ReportDocument::new(echo("ksample", &a.files, Some((&a.test, method.name(), seed))), !cli.no_timestamp);
    report.groups = describe(&groups, &opts)?;
    report.ksample = Some(result);
    report.notes = messages.clone();
    Ok(RunOutput { report, messages })
}

fn run_paired(a: &PairedArgs, cli: &Cli) -> Result<RunOutput> {
    let mut messages = Vec::new();
    let opts = options(&a.test)?;
    let data = ingest_csv(
        &a.file,
        &CsvOptions {
            header: a.header,
            group_col: None,
        },
    )?;
    let k = data.cols();
    let k1 = match a.k1 {
        Some(k1) => k1,
        None if k % 2 == 0 => k / 2,
        None => {
            return Err(Error::InvalidArgument(format!(
                "{k} columns cannot be halved; pass --k1"
            )))
        }
    };
    if k1 >= k {
        return Err(Error::InvalidArgument(format!("--k1 = {k1} leaves no items for the second occasion")));
    }
    let k2 = k - k1;
    let method = a.test.method.unwrap_or_else(|| {
        messages.push("no --method given; using bootstrap".into());
        TestMethod::Bootstrap
    });
    let seed = resolve_seed(a.test.seed, method.is_random(), &mut messages);
    let mut report = ReportDocument::new(
        echo("paired", std::slice::from_ref(&a.file), Some((&a.test, method.name(), seed))),
        !cli.no_timestamp,
    );
    let ps = paired_stats(&data, k1, k2, &opts.coefficient)?;
    for (label, g) in [("occasion1", &ps.first), ("occasion2", &ps.second)] {
        report.groups.push(GroupDescriptive {
            label: label.into(),
            n: g.n,
            k: g.k,
            estimate: g.estimate,
            variance_component: g.variance,
        });
    }
    report
        .results
        .push(paired_test(&data, k1, k2, method, &plan(&a.test, seed, cli.workers), &opts)?);
    report.notes = messages.clone();
    Ok(RunOutput { report, messages })
}

fn run_coefficients(a: &CoefficientsArgs, cli: &Cli) -> Result<RunOutput> {
    let groups = load_groups(&a.files, &a.input)?;
    let mut report = ReportDocument::new(echo("coefficients", &a.files, None), !cli.no_timestamp);
    let mut messages = Vec::new();
    for (label, m) in &groups {
        let k = m.cols();
        let split = match &a.split {
            Some(s) => split_indices(s)?,
            None => (0..k.div_ceil(2)).collect(),
        };
        let e2 = a.error_variances.as_deref().or(Some("smc"));
        let mut coefs = vec![Coefficient::Alpha];
        for which in LambdaKind::ALL {
            let spec = match which {
                LambdaKind::Lambda3 => LambdaSpec::new(which).with_split(split.clone()),
                LambdaKind::Lambda6 => with_error_variances(LambdaSpec::new(which), e2)?,
                _ => LambdaSpec::new(which),
            };
            coefs.push(Coefficient::Lambda(spec));
        }
        for c in coefs {
            let row = match group_stats_of(m, &c, VarianceMethod::Adf) {
                Ok(g) => CoefficientRow {
                    group: label.clone(),
                    coefficient: c.to_string(),
                    value: Some(g.estimate),
                    adf_variance: Some(g.variance),
                    std_error: Some((g.variance / g.n as f64).sqrt()),
                    error: None,
                },
                Err(e) if e.is_degenerate() => {
                    let cov = crate::covariance::sample_covariance(m)?;
                    CoefficientRow {
                        group: label.clone(),
                        coefficient: c.to_string(),
                        value: c.value(&cov).ok(),
                        adf_variance: None,
                        std_error: None,
                        error: Some(e.to_string()),
                    }
                }
                Err(e) => return Err(e),
            };
            report.coefficients.push(row);
        }
    }
    if a.split.is_none() {
        messages.push("no --split given; lambda3 splits the items into first and second half".into());
    }
    if a.error_variances.is_none() {
        messages.push("no --error-variances given; lambda6 uses smc-derived error variances".into());
    }
    report.notes = messages.clone();
    Ok(RunOutput { report, messages })
}

fn run_simulate(a: &SimulateArgs, cli: &Cli) -> Result<RunOutput> {
    let mut messages = Vec::new();
    let mut cfg = match &a.config {
        Some(p) => SimulationConfig::from_toml_str(&std::fs::read_to_string(p)?)?,
        None => SimulationConfig::grid(a.grid.parse::<Grid>()?),
    };
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(b) = a.replicates {
        cfg.replicates = b;
    }
    let seed = resolve_seed(a.seed.or(cfg.seed), true, &mut messages).expect("seed drawn");
    cfg.seed = Some(seed);
    let conds = cfg.conditions()?;
    let rows = run_type1_study(&conds, &cfg.methods, seed, cli.workers)?;
    if let Some(p) = &a.plot {
        std::fs::write(p, plot_svg(&rows, cfg.level))?;
    }
    let inputs: Vec<PathBuf> = a.config.iter().cloned().collect();
    let mut request = echo("simulate", &inputs, None);
    request.seed = Some(seed);
    request.replicates = Some(cfg.replicates);
    request.level = Some(cfg.level);
    if a.config.is_none() {
        request.method = Some(a.grid.clone());
    }
    let mut report = ReportDocument::new(request, !cli.no_timestamp);
    report.simulation = rows;
    report.notes = messages.clone();
    Ok(RunOutput { report, messages })
}

/// Runs a parsed command line.
pub fn run_request(cli: &Cli) -> Result<RunOutput> {
    if cli.workers == Some(0) {
        return Err(Error::InvalidArgument("--workers must be at least 1".into()));
    }
    match &cli.command {
        Command::Compare(a) => run_compare(a, cli),
        Command::Ksample(a) => run_ksample(a, cli),
        Command::Paired(a) => run_paired(a, cli),
        Command::Coefficients(a) => run_coefficients(a, cli),
        Command::Simulate(a) => run_simulate(a, cli),
    }
}

fn emit(cli: &Cli, out: &RunOutput) -> Result<()> {
    let default = match cli.command {
        Command::Simulate(_) => Format::Csv,
        _ => Format::Json,
    };
    let mut buf = Vec::new();
    match cli.format.unwrap_or(default) {
        Format::Json => {
            buf.extend_from_slice(out.report.to_json()?.as_bytes());
            buf.push(b'\n');
        }
        Format::Csv => out.report.write_csv(&mut buf)?,
    }
    match &cli.out {
        Some(p) => std::fs::write(p, buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}

/// Short machine-readable name of an error.
pub fn error_line(e: &Error) -> String {
    let msg = e.to_string().replace('\n', " ");
    format!("error: kind={} message={msg}", e.kind())
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_degenerate() {
        2
    } else {
        1
    }
}

/// Entry point of the binary.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: kind=Usage message={first}");
            return ExitCode::from(1);
        }
    };
    match run_request(&cli).and_then(|out| {
        for m in &out.messages {
            eprintln!("note: {m}");
        }
        emit(&cli, &out)
    }) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from([
            "relicmp",
            "compare",
            "a.csv",
            "b.csv",
            "--method",
            "exact-permutation",
            "--coefficient",
            "lambda3",
            "--split",
            "1,2",
            "--seed",
            "5",
            "--no-timestamp",
        ])
        .unwrap();
        let Command::Compare(a) = &cli.command else { panic!() };
        assert_eq!(a.test.method, Some(TestMethod::ExactPermutation));
        let c = coefficient_from_args(&a.test.coefficient).unwrap();
        match c {
            Coefficient::Lambda(s) => assert_eq!(s.split, Some(vec![0, 1])),
            _ => panic!(),
        }
        assert!(cli.no_timestamp);
    }

    #[test]
    fn error_lines_and_codes() {
        let e = Error::UnequalItemCounts { k1: 3, k2: 4 };
        assert_eq!(exit_code(&e), 2);
        assert!(error_line(&e).starts_with("error: kind=UnequalItemCounts message="));
        assert_eq!(exit_code(&Error::Parse { row: 1, col: 2, message: "x".into() }), 1);
    }

    #[test]
    fn smc_keyword() {
        let a = CoefficientArgs {
            coefficient: "lambda6".into(),
            split: None,
            error_variances: Some("smc".into()),
        };
        match coefficient_from_args(&a).unwrap() {
            Coefficient::Lambda(s) => assert!(s.derive_error_variances),
            _ => panic!(),
        }
        let bad = CoefficientArgs {
            coefficient: "omega".into(),
            split: None,
            error_variances: None,
        };
        assert!(coefficient_from_args(&bad).is_err());
    }
}
