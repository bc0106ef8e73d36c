//! Command-line front end.
//!
//! Every data product is CSV with reals printed as C `%.12e`
//! (`1.234567890123e-03`) and no locale or timestamp dependence, so
//! identical flags and seed give byte-identical files. Sweep points are
//! evaluated through [`crate::par`]; rows are assembled in grid order.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on numerical failures.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::bounds::{gain_db, helstrom_bound, sql_limit};
use crate::cascade::{
    run_strategy, strategy_global_chain, strategy_identical, strategy_nested_chain, Strategy,
};
use crate::error::Error as ModelError;
use crate::model::{operating_point_from_nbar, DeviceParams, Priors, StageKind};
use crate::montecarlo::simulate_cascade;
use crate::numerics::Rng;
use crate::par::{map_indexed, Execution};

/// Sweep CSV header.
pub const SWEEP_HEADER: &str = "nbar,strategy,segments,eta,nu,tau,xi,p0,pe,p_sql,p_helstrom,gain_db,fractions";
/// Bounds CSV header.
pub const BOUNDS_HEADER: &str = "nbar,p0,p_helstrom,p_sql";
/// Receiver curves in the `fig2` files, in column order.
pub const FIG2_CURVES: [(Strategy, usize); 8] = [
    (Strategy::Nested, 1),
    (Strategy::Nested, 2),
    (Strategy::Nested, 3),
    (Strategy::Nested, 4),
    (Strategy::Nested, 6),
    (Strategy::Identical, 2),
    (Strategy::Identical, 15),
    (Strategy::Global, 4),
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] ModelError),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

#[derive(Debug, Parser)]
#[command(name = "partrx", version, about = "Partitioned-interval binary coherent-state receiver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error probability over a log-spaced photon-number grid
    Sweep(SweepArgs),
    /// One strategy at one operating point, with the per-stage trace
    Optimize(OptimizeArgs),
    /// Monte Carlo check of the analytic error probability
    Validate(ValidateArgs),
    /// Helstrom bound and standard quantum limit table
    Bounds(BoundsArgs),
    /// The four error/gain tables for the ideal and non-ideal presets
    Fig2(Fig2Args),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Ideal,
    Nonideal,
}

#[derive(Debug, Clone, Args)]
pub struct DeviceArgs {
    /// Device parameter preset
    #[arg(long, value_enum, default_value = "ideal")]
    pub preset: Preset,
    /// Detector quantum efficiency (overrides the preset)
    #[arg(long)]
    pub eta: Option<f64>,
    /// Dark-count mean per segment (overrides the preset)
    #[arg(long)]
    pub nu: Option<f64>,
    /// Beam-splitter transmittance (overrides the preset)
    #[arg(long)]
    pub tau: Option<f64>,
    /// Mode-match factor (overrides the preset)
    #[arg(long)]
    pub xi: Option<f64>,
    /// Prior probability of H0
    #[arg(long, default_value_t = 0.5)]
    pub p0: f64,
}

impl DeviceArgs {
    pub fn params(&self) -> Result<DeviceParams, CliError> {
        let base = match self.preset {
            Preset::Ideal => DeviceParams::ideal(),
            Preset::Nonideal => DeviceParams::nonideal(),
        };
        DeviceParams::new(
            self.eta.unwrap_or(base.eta()),
            self.nu.unwrap_or(base.nu()),
            self.tau.unwrap_or(base.tau()),
            self.xi.unwrap_or(base.xi()),
        )
        .or_else(|e| usage(e.to_string()))
    }

    pub fn priors(&self) -> Result<Priors, CliError> {
        if !(self.p0 > 0.0 && self.p0 < 1.0) {
            return usage(format!("--p0 must lie strictly between 0 and 1, got {}", self.p0));
        }
        Priors::from_p0(self.p0).or_else(|e| usage(e.to_string()))
    }

    fn equal_priors(&self) -> bool {
        self.p0 == 0.5
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Smallest mean photon number
    #[arg(long, default_value_t = 0.05)]
    pub nbar_min: f64,
    /// Largest mean photon number
    #[arg(long, default_value_t = 10.0)]
    pub nbar_max: f64,
    /// Number of log-spaced grid points
    #[arg(long, default_value_t = 60)]
    pub points: usize,
}

impl GridArgs {
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        log_grid(self.nbar_min, self.nbar_max, self.points)
    }
}

/// `points` log-spaced values from `lo` to `hi`, both included.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, CliError> {
    if !(lo > 0.0 && lo.is_finite() && hi.is_finite() && lo <= hi) {
        return usage(format!("need 0 < --nbar-min <= --nbar-max, got {lo} and {hi}"));
    }
    if points < 1 {
        return usage("--points must be at least 1");
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|j| match j {
            0 => lo,
            j if j == points - 1 => hi,
            j => (a + (b - a) * j as f64 / (points - 1) as f64).exp(),
        })
        .collect())
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Strategies, comma separated
    #[arg(long, value_delimiter = ',', default_value = "nested")]
    pub strategy: Vec<Strategy>,
    /// Segment counts, comma separated
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub segments: Vec<usize>,
    #[command(flatten)]
    pub device: DeviceArgs,
    /// Seed for the global strategy's random starts
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Leave the SQL and gain columns as `nan` (required when --p0 != 0.5)
    #[arg(long)]
    pub no_gain: bool,
    /// Output file (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    /// Mean photon number
    #[arg(long)]
    pub nbar: f64,
    #[arg(long, default_value = "global")]
    pub strategy: Strategy,
    #[arg(long, default_value_t = 1)]
    pub segments: usize,
    #[command(flatten)]
    pub device: DeviceArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Mean photon number
    #[arg(long)]
    pub nbar: f64,
    #[arg(long, default_value = "nested")]
    pub strategy: Strategy,
    #[arg(long, default_value_t = 1)]
    pub segments: usize,
    #[command(flatten)]
    pub device: DeviceArgs,
    /// Seed for the partition search and the simulation
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Simulated symbols
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Single photon number instead of a grid
    #[arg(long)]
    pub nbar: Option<f64>,
    /// Prior probability of H0; the SQL column is `nan` unless 0.5
    #[arg(long, default_value_t = 0.5)]
    pub p0: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct Fig2Args {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Seed for the global strategy's random starts
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory
    #[arg(long, default_value = "fig2")]
    pub out: PathBuf,
}

/// C-style `%.12e`: twelve fraction digits, signed exponent of at least
/// two digits.
pub fn fmt_e12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn fractions_field(fractions: &[f64]) -> String {
    fractions.iter().map(|&f| fmt_e12(f)).collect::<Vec<_>>().join(";")
}

fn check_segments(segments: &[usize]) -> Result<(), CliError> {
    if segments.is_empty() || segments.iter().any(|&n| n < 1) {
        return usage("--segments must be at least 1");
    }
    Ok(())
}

fn operating_point(nbar: f64) -> Result<crate::model::OperatingPoint, CliError> {
    operating_point_from_nbar(nbar).or_else(|e| usage(e.to_string()))
}

fn gain_or_inf(pe: f64, p_sql: f64) -> f64 {
    gain_db(pe, p_sql).unwrap_or(if pe <= 0.0 { f64::INFINITY } else { f64::NAN })
}

/// Full sweep CSV, header included.
pub fn sweep_csv(args: &SweepArgs, exec: Execution) -> Result<String, CliError> {
    let grid = args.grid.grid()?;
    check_segments(&args.segments)?;
    if args.strategy.is_empty() {
        return usage("--strategy needs at least one value");
    }
    let params = args.device.params()?;
    let priors = args.device.priors()?;
    let equal = args.device.equal_priors();
    if !equal && !args.no_gain {
        return usage("the SQL and gain over it are defined for --p0 0.5 only; pass --no-gain");
    }

    let mut requests: Vec<(Strategy, usize)> = args
        .strategy
        .iter()
        .flat_map(|&s| args.segments.iter().map(move |&n| (s, n)))
        .collect();
    requests.sort();
    requests.dedup();

    let max_n = |strategy: Strategy| {
        requests.iter().filter(|r| r.0 == strategy).map(|r| r.1).max()
    };
    let (max_nested, max_global) = (max_n(Strategy::Nested), max_n(Strategy::Global));

    let rows = map_indexed(exec, grid.len(), |j| -> Result<String, CliError> {
        let nbar = grid[j];
        let op = operating_point(nbar)?;
        let helstrom = helstrom_bound(nbar, &priors)?;
        let p_sql = if equal { sql_limit(nbar)? } else { f64::NAN };
        // one chain per point serves every requested N; the global chain
        // draws the same numbers as a single `optimize` run with this seed
        let nested = match max_nested {
            Some(n) => strategy_nested_chain(n, &op, &priors, &params)?,
            None => Vec::new(),
        };
        let global = match max_global {
            Some(n) => strategy_global_chain(n, &op, &priors, &params, &mut Rng::new(args.seed))?,
            None => Vec::new(),
        };
        let mut out = String::new();
        for &(strategy, n) in &requests {
            let (partition, result) = match strategy {
                Strategy::Global => global[n - 1].clone(),
                Strategy::Nested => nested[n - 1].clone(),
                Strategy::Identical => strategy_identical(n, &op, &priors, &params)?,
            };
            let gain = if args.no_gain { f64::NAN } else { gain_or_inf(result.p_error, p_sql) };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                fmt_e12(nbar),
                strategy,
                n,
                fmt_e12(params.eta()),
                fmt_e12(params.nu()),
                fmt_e12(params.tau()),
                fmt_e12(params.xi()),
                fmt_e12(priors.p0()),
                fmt_e12(result.p_error),
                fmt_e12(if args.no_gain { f64::NAN } else { p_sql }),
                fmt_e12(helstrom),
                fmt_e12(gain),
                fractions_field(partition.fractions()),
            )
            .expect("write to String");
        }
        Ok(out)
    });

    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for row in rows {
        csv.push_str(&row?);
    }
    Ok(csv)
}

/// Human-readable report for one optimized receiver.
pub fn optimize_report(args: &OptimizeArgs) -> Result<String, CliError> {
    check_segments(&[args.segments])?;
    let params = args.device.params()?;
    let priors = args.device.priors()?;
    let op = operating_point(args.nbar)?;
    let (partition, result) = run_strategy(args.strategy, args.segments, &op, &priors, &params, args.seed)?;
    let helstrom = helstrom_bound(args.nbar, &priors)?;

    let mut r = String::new();
    let w = &mut r;
    writeln!(w, "strategy    {}", args.strategy).ok();
    writeln!(w, "segments    {}", args.segments).ok();
    writeln!(w, "nbar        {}", fmt_e12(args.nbar)).ok();
    writeln!(
        w,
        "device      eta={} nu={} tau={} xi={}",
        params.eta(),
        params.nu(),
        params.tau(),
        params.xi()
    )
    .ok();
    writeln!(w, "p0          {}", priors.p0()).ok();
    writeln!(w, "fractions   {:?}", partition.fractions()).ok();
    writeln!(w, "stage  kind      alpha_i             p0_i                beta_star           pe_i").ok();
    for s in &result.stages {
        let kind = match s.kind {
            StageKind::Measured => "measured",
            StageKind::NoOp => "no-op",
            StageKind::Certain => "certain",
        };
        writeln!(
            w,
            "{:<6} {:<9} {:<19} {:<19} {:<19} {}",
            s.index,
            kind,
            fmt_e12(s.alpha_i),
            fmt_e12(s.p0_i),
            fmt_e12(s.beta_star),
            fmt_e12(s.pe_stage)
        )
        .ok();
    }
    writeln!(w, "pe          {}", fmt_e12(result.p_error)).ok();
    writeln!(w, "p_helstrom  {}", fmt_e12(helstrom)).ok();
    if args.device.equal_priors() {
        let p_sql = sql_limit(args.nbar)?;
        writeln!(w, "p_sql       {}", fmt_e12(p_sql)).ok();
        writeln!(w, "gain_db     {}", fmt_e12(gain_or_inf(result.p_error, p_sql))).ok();
    } else {
        writeln!(w, "p_sql       n/a (unequal priors)").ok();
        writeln!(w, "gain_db     n/a (unequal priors)").ok();
    }
    Ok(r)
}

/// Monte Carlo report with a PASS/FAIL verdict at four standard errors of
/// the analytic error probability.
pub fn validate_report(args: &ValidateArgs) -> Result<String, CliError> {
    check_segments(&[args.segments])?;
    if args.trials < 1 {
        return usage("--trials must be at least 1");
    }
    let params = args.device.params()?;
    let priors = args.device.priors()?;
    let op = operating_point(args.nbar)?;
    let (partition, result) = run_strategy(args.strategy, args.segments, &op, &priors, &params, args.seed)?;
    let mut rng = Rng::for_stream(args.seed, 1 << 40);
    let mc = simulate_cascade(&partition, &op, &priors, &params, args.trials, &mut rng)?;
    let pe = result.p_error;
    let sigma = (pe * (1.0 - pe) / args.trials as f64).sqrt();
    let diff = (mc.p_hat - pe).abs();
    let pass = diff <= 4.0 * sigma;

    let mut r = String::new();
    let w = &mut r;
    writeln!(w, "strategy    {}", args.strategy).ok();
    writeln!(w, "segments    {}", args.segments).ok();
    writeln!(w, "nbar        {}", fmt_e12(args.nbar)).ok();
    writeln!(w, "fractions   {:?}", partition.fractions()).ok();
    writeln!(w, "analytic    {}", fmt_e12(pe)).ok();
    writeln!(w, "trials      {}", mc.trials).ok();
    writeln!(w, "errors      {}", mc.errors).ok();
    writeln!(w, "p_hat       {}", fmt_e12(mc.p_hat)).ok();
    writeln!(w, "std_err     {}", fmt_e12(mc.std_err)).ok();
    writeln!(w, "abs_diff    {}", fmt_e12(diff)).ok();
    writeln!(w, "limit_4sig  {}", fmt_e12(4.0 * sigma)).ok();
    writeln!(w, "verdict     {}", if pass { "PASS" } else { "FAIL" }).ok();
    Ok(r)
}

pub fn bounds_csv(args: &BoundsArgs) -> Result<String, CliError> {
    let grid = match args.nbar {
        Some(nbar) => {
            operating_point(nbar)?;
            vec![nbar]
        }
        None => args.grid.grid()?,
    };
    let priors = Priors::from_p0(args.p0).or_else(|e| usage(e.to_string()))?;
    let mut csv = String::from(BOUNDS_HEADER);
    csv.push('\n');
    for nbar in grid {
        let sql = if args.p0 == 0.5 { sql_limit(nbar)? } else { f64::NAN };
        writeln!(
            csv,
            "{},{},{},{}",
            fmt_e12(nbar),
            fmt_e12(args.p0),
            fmt_e12(helstrom_bound(nbar, &priors)?),
            fmt_e12(sql)
        )
        .ok();
    }
    Ok(csv)
}

/// Header of the `fig2` error tables.
pub fn fig2_error_header() -> String {
    let mut h = String::from("nbar");
    for (s, n) in FIG2_CURVES {
        write!(h, ",{s}_{n}").ok();
    }
    h.push_str(",p_helstrom,p_sql");
    h
}

/// Header of the `fig2` gain tables (dB over the SQL).
pub fn fig2_gain_header() -> String {
    let mut h = String::from("nbar");
    for (s, n) in FIG2_CURVES {
        write!(h, ",{s}_{n}").ok();
    }
    h.push_str(",helstrom,sql");
    h
}

/// Error probabilities of every [`FIG2_CURVES`] entry at one point.
pub fn fig2_point(nbar: f64, params: &DeviceParams, rng: &mut Rng) -> Result<Vec<f64>, ModelError> {
    let op = operating_point_from_nbar(nbar)?;
    let eq = Priors::equal();
    let nested = strategy_nested_chain(6, &op, &eq, params)?;
    let global = strategy_global_chain(4, &op, &eq, params, rng)?;
    FIG2_CURVES
        .iter()
        .map(|&(s, n)| match s {
            Strategy::Nested => Ok(nested[n - 1].1.p_error),
            Strategy::Global => Ok(global[n - 1].1.p_error),
            Strategy::Identical => Ok(strategy_identical(n, &op, &eq, params)?.1.p_error),
        })
        .collect()
}

/// The four `fig2` tables as `(file name, contents)`.
pub fn fig2_tables(args: &Fig2Args, exec: Execution) -> Result<Vec<(String, String)>, CliError> {
    let grid = args.grid.grid()?;
    let presets = [("ideal", DeviceParams::ideal()), ("nonideal", DeviceParams::nonideal())];
    let mut tables = Vec::new();
    for (name, params) in &presets {
        let rows = map_indexed(exec, grid.len(), |j| {
            fig2_point(grid[j], params, &mut Rng::new(args.seed))
        });
        let mut error = fig2_error_header();
        error.push('\n');
        let mut gain = fig2_gain_header();
        gain.push('\n');
        for (nbar, row) in grid.iter().zip(rows) {
            let row = row?;
            let p_sql = sql_limit(*nbar)?;
            let helstrom = helstrom_bound(*nbar, &Priors::equal())?;
            error.push_str(&fmt_e12(*nbar));
            gain.push_str(&fmt_e12(*nbar));
            for pe in &row {
                write!(error, ",{}", fmt_e12(*pe)).ok();
                write!(gain, ",{}", fmt_e12(gain_or_inf(*pe, p_sql))).ok();
            }
            writeln!(error, ",{},{}", fmt_e12(helstrom), fmt_e12(p_sql)).ok();
            writeln!(gain, ",{},{}", fmt_e12(gain_or_inf(helstrom, p_sql)), fmt_e12(0.0)).ok();
        }
        tables.push((format!("error_{name}.csv"), error));
        tables.push((format!("gain_{name}.csv"), gain));
    }
    Ok(tables)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let exec = Execution::default();
    match &cli.command {
        Command::Sweep(a) => emit(a.out.as_deref(), &sweep_csv(a, exec)?),
        Command::Optimize(a) => emit(a.out.as_deref(), &optimize_report(a)?),
        Command::Validate(a) => emit(a.out.as_deref(), &validate_report(a)?),
        Command::Bounds(a) => emit(a.out.as_deref(), &bounds_csv(a)?),
        Command::Fig2(a) => {
            let tables = fig2_tables(a, exec)?;
            fs::create_dir_all(&a.out)?;
            for (name, text) in &tables {
                fs::write(a.out.join(name), text)?;
            }
            Ok(())
        }
    }
}

/// Parses `args` and runs; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("partrx: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponent_format() {
        assert_eq!(fmt_e12(1.0), "1.000000000000e+00");
        assert_eq!(fmt_e12(0.00123), "1.230000000000e-03");
        assert_eq!(fmt_e12(-2.5e120), "-2.500000000000e+120");
        assert_eq!(fmt_e12(0.0), "0.000000000000e+00");
        assert_eq!(fmt_e12(f64::NAN), "nan");
        assert_eq!(fmt_e12(f64::INFINITY), "inf");
    }

    #[test]
    fn grid_endpoints_exact() {
        let g = log_grid(0.05, 10.0, 60).unwrap();
        assert_eq!(g.len(), 60);
        assert_eq!((g[0], g[59]), (0.05, 10.0));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(log_grid(0.3, 7.0, 1).unwrap(), vec![0.3]);
        assert!(log_grid(0.0, 1.0, 5).is_err());
        assert!(log_grid(2.0, 1.0, 5).is_err());
        assert!(log_grid(0.1, 1.0, 0).is_err());
    }

    #[test]
    fn fig2_headers() {
        assert_eq!(
            fig2_error_header(),
            "nbar,nested_1,nested_2,nested_3,nested_4,nested_6,identical_2,identical_15,global_4,p_helstrom,p_sql"
        );
        assert_eq!(
            fig2_gain_header(),
            "nbar,nested_1,nested_2,nested_3,nested_4,nested_6,identical_2,identical_15,global_4,helstrom,sql"
        );
    }

}
