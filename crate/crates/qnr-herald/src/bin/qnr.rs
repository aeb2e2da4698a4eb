//! Command-line front end: parameter sweeps, heralded distributions,
//! optimizer reports, oracle cross-checks, and Monte Carlo runs, emitted
//! as CSV or JSON tables.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qnr_herald::closed_form::{heralded_distribution, single_click_probability};
use qnr_herald::model::{thermal_distribution, truncation_cutoff};
use qnr_herald::optimizer::{
    approx_fidelity_opt, default_search_bound, find_fidelity_opt, optima_report,
};
use qnr_herald::oracle::{
    exact_click_given_n, exact_heralded_distribution, mc_click_probability, ExactOracleConfig,
    McConfig,
};
use qnr_herald::{
    closed_form, DetectorParams, QnrConfig, SourceParams, DEFAULT_TAIL_TOL,
};

#[derive(Parser)]
#[command(
    name = "qnr",
    about = "Click statistics and mode-count optimization for quasi-number-resolving single-photon heralding",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Photon-number distribution of the heralded arm before and after a
    /// single-click herald, with the enumeration oracle alongside when
    /// affordable
    Distribution(DistributionArgs),
    /// Single-click probability and single-photon fidelity as functions
    /// of the mode count M
    SweepM(SweepMArgs),
    /// Fidelity-optimal mode count over an (eta, delta) grid
    Contour(ContourArgs),
    /// Cross-check the analytic click probabilities against the exact
    /// enumeration oracle over a parameter grid
    Verify(VerifyArgs),
    /// Scan for the fidelity-optimal mode count and the probability
    /// local maximum, with the continuous-M approximations alongside
    Optimize(OptimizeArgs),
    /// Seeded Monte Carlo estimate of an m-click probability
    Mc(McArgs),
}

#[derive(Args)]
struct PhysicsArgs {
    /// Mean photon pairs per pump pulse
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Per-mode detection efficiency
    #[arg(long, default_value_t = 0.8)]
    eta: f64,
    /// Per-mode dark-count probability per detection window
    #[arg(long, default_value_t = 0.0005)]
    delta: f64,
    /// Relative mass allowed in the truncated thermal tail
    #[arg(long, default_value_t = DEFAULT_TAIL_TOL)]
    tail_tol: f64,
    /// Photon-number truncation override (default: derived from tail-tol)
    #[arg(long)]
    n_max: Option<u32>,
}

impl PhysicsArgs {
    fn source(&self) -> Result<SourceParams, CliError> {
        Ok(SourceParams::new(self.mu)?)
    }

    fn detector(&self) -> Result<DetectorParams, CliError> {
        Ok(DetectorParams::new(self.eta, self.delta)?)
    }

    fn n_max(&self, source: &SourceParams) -> Result<u32, CliError> {
        match self.n_max {
            Some(n) => Ok(n),
            None => Ok(truncation_cutoff(source, self.tail_tol)?),
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct DistributionArgs {
    /// Number of detection modes M
    #[arg(long, default_value_t = 1)]
    modes: u32,
    /// Highest photon number to list
    #[arg(long, default_value_t = 10)]
    n_display: u32,
    #[command(flatten)]
    physics: PhysicsArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepMArgs {
    /// Mode-count range start:end[:stride]
    #[arg(long, default_value = "1:100")]
    modes_range: String,
    #[command(flatten)]
    physics: PhysicsArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ContourArgs {
    /// Efficiency range lo:hi (linear spacing)
    #[arg(long, default_value = "0.5:0.9")]
    eta_range: String,
    #[arg(long, default_value_t = 5)]
    eta_steps: u32,
    /// Dark-count range lo:hi; must be strictly positive
    #[arg(long, default_value = "1e-4:2e-3")]
    delta_range: String,
    #[arg(long, default_value_t = 5)]
    delta_steps: u32,
    /// Space the delta grid logarithmically instead of linearly
    #[arg(long)]
    delta_log: bool,
    /// Mean photon pairs per pump pulse
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Scan bound for the integer argmax (default: derived from delta)
    #[arg(long)]
    search_bound: Option<u32>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Largest mode count in the grid
    #[arg(long, default_value_t = 5)]
    max_modes: u32,
    /// Photon-number truncation for both routes
    #[arg(long, default_value_t = 8)]
    max_photons: u32,
    /// Largest allowed |closed form - oracle| deviation
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Comma-separated mu grid
    #[arg(long, default_value = "0.2,1,2")]
    mu_grid: String,
    /// Comma-separated eta grid
    #[arg(long, default_value = "0.3,0.8,1")]
    eta_grid: String,
    /// Comma-separated delta grid
    #[arg(long, default_value = "0,0.0005,0.01")]
    delta_grid: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Scan bound for both integer scans (default: derived from delta)
    #[arg(long)]
    search_bound: Option<u32>,
    #[command(flatten)]
    physics: PhysicsArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct McArgs {
    /// Number of detection modes M
    #[arg(long, default_value_t = 8)]
    modes: u32,
    /// Click count whose probability is estimated
    #[arg(long, default_value_t = 1)]
    clicks: u32,
    /// Number of trials
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    /// RNG seed; required so every run is reproducible
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    physics: PhysicsArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug)]
enum CliError {
    Lib(qnr_herald::Error),
    Io(io::Error),
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<qnr_herald::Error> for CliError {
    fn from(e: qnr_herald::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

#[derive(Clone, Copy)]
enum Cell {
    Int(i64),
    Num(f64),
    Empty,
}

struct Table {
    columns: &'static [&'static str],
    rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &'static [&'static str]) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// 12 significant digits, scientific notation below 1e-4 in magnitude.
fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    if x.abs() < 1e-4 {
        format!("{x:.11e}")
    } else {
        let magnitude = x.abs().log10().floor() as i32;
        let decimals = (11 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    }
}

fn cell_str(cell: &Cell) -> String {
    match cell {
        Cell::Int(i) => i.to_string(),
        Cell::Num(x) => fmt_sig(*x),
        Cell::Empty => String::new(),
    }
}

fn cell_json(cell: &Cell) -> serde_json::Value {
    match cell {
        Cell::Int(i) => serde_json::Value::from(*i),
        // round-trip through the display format so CSV and JSON agree
        Cell::Num(x) => {
            let rounded: f64 = fmt_sig(*x).parse().unwrap_or(*x);
            serde_json::Value::from(rounded)
        }
        Cell::Empty => serde_json::Value::Null,
    }
}

fn write_table(table: &Table, output: &OutputArgs) -> Result<(), CliError> {
    let mut sink: Box<dyn Write> = match &output.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    match output.format {
        Format::Csv => {
            writeln!(sink, "{}", table.columns.join(","))?;
            for row in &table.rows {
                let fields: Vec<String> = row.iter().map(cell_str).collect();
                writeln!(sink, "{}", fields.join(","))?;
            }
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = table
                .rows
                .iter()
                .map(|row| {
                    table
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(&name, cell)| (name.to_string(), cell_json(cell)))
                        .collect::<serde_json::Map<_, _>>()
                        .into()
                })
                .collect();
            serde_json::to_writer_pretty(&mut sink, &rows)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            writeln!(sink)?;
        }
    }
    Ok(())
}

fn parse_range(text: &str, flag: &str) -> Result<(u32, u32, u32), CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let err = || CliError::Usage(format!("--{flag} expects start:end[:stride], got '{text}'"));
    if parts.len() < 2 || parts.len() > 3 {
        return Err(err());
    }
    let start: u32 = parts[0].parse().map_err(|_| err())?;
    let end: u32 = parts[1].parse().map_err(|_| err())?;
    let stride: u32 = if parts.len() == 3 {
        parts[2].parse().map_err(|_| err())?
    } else {
        1
    };
    if start < 1 || end < start || stride < 1 {
        return Err(err());
    }
    Ok((start, end, stride))
}

fn parse_real_range(text: &str, flag: &str) -> Result<(f64, f64), CliError> {
    let err = || CliError::Usage(format!("--{flag} expects lo:hi, got '{text}'"));
    let (lo, hi) = text.split_once(':').ok_or_else(err)?;
    let lo: f64 = lo.parse().map_err(|_| err())?;
    let hi: f64 = hi.parse().map_err(|_| err())?;
    if !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(err());
    }
    Ok((lo, hi))
}

fn parse_grid(text: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    let values: Result<Vec<f64>, _> = text.split(',').map(str::trim).map(str::parse).collect();
    match values {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError::Usage(format!(
            "--{flag} expects a comma-separated list of reals, got '{text}'"
        ))),
    }
}

fn grid_points(lo: f64, hi: f64, steps: u32, logarithmic: bool) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| {
            let t = f64::from(i) / f64::from(steps - 1);
            if logarithmic {
                (lo.ln() + t * (hi.ln() - lo.ln())).exp()
            } else {
                lo + t * (hi - lo)
            }
        })
        .collect()
}

fn cmd_distribution(args: &DistributionArgs) -> Result<ExitCode, CliError> {
    let source = args.physics.source()?;
    let detector = args.physics.detector()?;
    let n_max = args.physics.n_max(&source)?.max(args.n_display).max(1);
    let pre = thermal_distribution(&source, n_max);
    let heralded = heralded_distribution(args.modes, &source, &detector, n_max)?;
    let oracle = QnrConfig::new(args.modes, 1).ok().and_then(|cfg| {
        ExactOracleConfig::new(args.modes, n_max)
            .ok()
            .and_then(|_| exact_heralded_distribution(&cfg, &source, &detector, n_max).ok())
    });

    let mut table = Table::new(&[
        "n",
        "m_modes",
        "mu",
        "eta",
        "delta",
        "pre_herald",
        "post_herald",
        "oracle",
    ]);
    for n in 0..=args.n_display {
        table.push(vec![
            Cell::Int(i64::from(n)),
            Cell::Int(i64::from(args.modes)),
            Cell::Num(source.mu()),
            Cell::Num(detector.eta()),
            Cell::Num(detector.delta()),
            Cell::Num(pre.prob(n)),
            Cell::Num(heralded.distribution.prob(n)),
            oracle
                .as_ref()
                .map_or(Cell::Empty, |d| Cell::Num(d.prob(n))),
        ]);
    }
    write_table(&table, &args.output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep_m(args: &SweepMArgs) -> Result<ExitCode, CliError> {
    let source = args.physics.source()?;
    let detector = args.physics.detector()?;
    let (start, end, stride) = parse_range(&args.modes_range, "modes-range")?;

    let mut table = Table::new(&["m_modes", "mu", "eta", "delta", "p_click_1", "fidelity_1"]);
    let mut modes = start;
    while modes <= end {
        table.push(vec![
            Cell::Int(i64::from(modes)),
            Cell::Num(source.mu()),
            Cell::Num(detector.eta()),
            Cell::Num(detector.delta()),
            Cell::Num(single_click_probability(modes, &source, &detector)?),
            Cell::Num(closed_form::single_photon_fidelity(
                modes, &source, &detector,
            )?),
        ]);
        match modes.checked_add(stride) {
            Some(next) => modes = next,
            None => break,
        }
    }
    write_table(&table, &args.output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_contour(args: &ContourArgs) -> Result<ExitCode, CliError> {
    let source = SourceParams::new(args.mu)?;
    let (eta_lo, eta_hi) = parse_real_range(&args.eta_range, "eta-range")?;
    let (delta_lo, delta_hi) = parse_real_range(&args.delta_range, "delta-range")?;
    if delta_lo <= 0.0 {
        return Err(CliError::Usage(
            "contour grids require strictly positive dark-count probabilities".into(),
        ));
    }
    if args.eta_steps < 1 || args.delta_steps < 1 {
        return Err(CliError::Usage("grid steps must be at least 1".into()));
    }

    let mut table = Table::new(&[
        "eta",
        "delta",
        "mu",
        "m_fidelity_approx",
        "m_fidelity_scan",
        "fidelity_at_scan",
    ]);
    for &eta in &grid_points(eta_lo, eta_hi, args.eta_steps, false) {
        for &delta in &grid_points(delta_lo, delta_hi, args.delta_steps, args.delta_log) {
            let detector = DetectorParams::new(eta, delta)?;
            let bound = args
                .search_bound
                .unwrap_or_else(|| default_search_bound(&detector));
            let approx = approx_fidelity_opt(&source, &detector)?;
            let scan = find_fidelity_opt(&source, &detector, bound)?;
            table.push(vec![
                Cell::Num(eta),
                Cell::Num(delta),
                Cell::Num(source.mu()),
                Cell::Num(approx),
                Cell::Int(i64::from(scan.modes)),
                Cell::Num(scan.fidelity),
            ]);
        }
    }
    write_table(&table, &args.output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode, CliError> {
    if !args.tolerance.is_finite() || args.tolerance <= 0.0 {
        return Err(CliError::Usage("tolerance must be positive".into()));
    }
    let mu_grid = parse_grid(&args.mu_grid, "mu-grid")?;
    let eta_grid = parse_grid(&args.eta_grid, "eta-grid")?;
    let delta_grid = parse_grid(&args.delta_grid, "delta-grid")?;

    let mut table = Table::new(&[
        "m_modes",
        "m_clicks",
        "mu",
        "eta",
        "delta",
        "closed_form",
        "oracle",
        "abs_dev",
    ]);
    let mut max_dev = 0.0f64;
    for modes in 1..=args.max_modes {
        // one oracle table per (modes, detector), shared across mu and m
        for &eta in &eta_grid {
            for &delta in &delta_grid {
                let detector = DetectorParams::new(eta, delta)?;
                let oracle_cfg = ExactOracleConfig::new(modes, args.max_photons)?;
                let tables: Vec<Vec<f64>> = (0..=args.max_photons)
                    .map(|n| exact_click_given_n(n, &oracle_cfg, &detector))
                    .collect::<Result<_, _>>()?;
                for &mu in &mu_grid {
                    let source = SourceParams::new(mu)?;
                    let thermal = thermal_distribution(&source, args.max_photons);
                    for m in 0..=modes {
                        let config = QnrConfig::new(modes, m)?;
                        let closed = closed_form::click_probability(
                            &config,
                            &source,
                            &detector,
                            args.max_photons,
                        )?;
                        let oracle: f64 = (0..=args.max_photons)
                            .map(|n| thermal.prob(n) * tables[n as usize][m as usize])
                            .sum();
                        let dev = (closed - oracle).abs();
                        max_dev = max_dev.max(dev);
                        table.push(vec![
                            Cell::Int(i64::from(modes)),
                            Cell::Int(i64::from(m)),
                            Cell::Num(mu),
                            Cell::Num(eta),
                            Cell::Num(delta),
                            Cell::Num(closed),
                            Cell::Num(oracle),
                            Cell::Num(dev),
                        ]);
                    }
                }
            }
        }
    }
    write_table(&table, &args.output)?;
    let pass = max_dev <= args.tolerance;
    eprintln!(
        "verify: max |closed form - oracle| = {} over {} cases (tolerance {}): {}",
        fmt_sig(max_dev),
        table.rows.len(),
        fmt_sig(args.tolerance),
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<ExitCode, CliError> {
    let source = args.physics.source()?;
    let detector = args.physics.detector()?;
    let bound = args
        .search_bound
        .unwrap_or_else(|| default_search_bound(&detector));
    let report = optima_report(&source, &detector, bound)?;
    if report.fidelity_at_bound {
        eprintln!(
            "warning: fidelity argmax sits on the search bound {bound}; raise --search-bound"
        );
    }

    let mut table = Table::new(&[
        "mu",
        "eta",
        "delta",
        "search_bound",
        "m_fidelity_opt",
        "fidelity_at_opt",
        "m_fidelity_approx",
        "m_prob_local_max",
        "prob_at_local_max",
        "m_prob_approx",
    ]);
    table.push(vec![
        Cell::Num(source.mu()),
        Cell::Num(detector.eta()),
        Cell::Num(detector.delta()),
        Cell::Int(i64::from(report.search_bound)),
        Cell::Int(i64::from(report.m_fidelity_opt)),
        Cell::Num(report.fidelity_at_opt),
        report.m_fidelity_approx.map_or(Cell::Empty, Cell::Num),
        report
            .m_prob_local_max
            .map_or(Cell::Empty, |m| Cell::Int(i64::from(m))),
        report.prob_at_local_max.map_or(Cell::Empty, Cell::Num),
        report.m_prob_approx.map_or(Cell::Empty, Cell::Num),
    ]);
    write_table(&table, &args.output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_mc(args: &McArgs) -> Result<ExitCode, CliError> {
    let seed = args.seed.ok_or_else(|| {
        CliError::Usage("--seed is required; Monte Carlo runs must be reproducible".into())
    })?;
    let source = args.physics.source()?;
    let detector = args.physics.detector()?;
    let config = QnrConfig::new(args.modes, args.clicks)?;
    let mc = McConfig::new(args.trials, seed)?;
    let estimate = mc_click_probability(&config, &source, &detector, &mc)?;
    let n_max = args.physics.n_max(&source)?;
    let exact = closed_form::click_probability(&config, &source, &detector, n_max)?;

    let mut table = Table::new(&[
        "m_modes",
        "m_clicks",
        "mu",
        "eta",
        "delta",
        "trials",
        "seed",
        "estimate",
        "std_error",
        "exact",
    ]);
    table.push(vec![
        Cell::Int(i64::from(args.modes)),
        Cell::Int(i64::from(args.clicks)),
        Cell::Num(source.mu()),
        Cell::Num(detector.eta()),
        Cell::Num(detector.delta()),
        Cell::Int(args.trials as i64),
        Cell::Int(seed as i64),
        Cell::Num(estimate.estimate),
        Cell::Num(estimate.std_error),
        Cell::Num(exact),
    ]);
    write_table(&table, &args.output)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Distribution(args) => cmd_distribution(args),
        Command::SweepM(args) => cmd_sweep_m(args),
        Command::Contour(args) => cmd_contour(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Mc(args) => cmd_mc(args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
