//! The `xiboot` command line.
//!
//! Exit codes: 0 on success, 2 for invalid parameters or unusable data, 3
//! when `verify-theory` reports a failed check, and 4 for unreadable or
//! malformed files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::bootstrap::{
    bootstrap_distribution, ci_hybrid1, ci_hybrid2, var_b1, var_b2, BootstrapDistribution,
    ReplicateStatistic,
};
use crate::data::read_sample;
use crate::error::{Error, Result};
use crate::rank::{tie_summary, TieBreak};
use crate::sim::verify::{verify_theory, VerifyLevel};
use crate::sim::{parse_config_overrides, run_simulation, write_csv, write_json, SimulationConfig};
use crate::xi::{xi_general, xi_simple};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARAMETER: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Printed by `bootstrap` alongside every report.
pub const BOOTSTRAP_WARNING: &str = "\
WARNING: the standard nonparametric bootstrap is inconsistent for this statistic.
Its replicates centre near 1/e rather than at the sample value under independence,
and n times the bootstrap variance settles near 0.3835 instead of 2/5.
The intervals and variances below are diagnostics, not valid inference.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Parser)]
#[command(
    name = "xiboot",
    version,
    about = "Rank correlation, its bootstrap, and the simulation study"
)]
pub struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Machine-readable output. `simulate` defaults to csv, the other
    /// commands to a plain-text report.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the statistic on a two-column data file.
    Xi { input: PathBuf },
    /// Bootstrap diagnostics on a two-column data file.
    Bootstrap {
        input: PathBuf,
        /// Number of bootstrap replicates.
        #[arg(long = "boot", short = 'B', default_value_t = 500)]
        boot: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Run the coverage study.
    Simulate {
        /// Comma-separated correlations.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        rho: Option<Vec<f64>>,
        /// Comma-separated sample sizes.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        boot: Option<usize>,
        /// Interval level; repeat for several.
        #[arg(long)]
        alpha: Vec<f64>,
        /// `key=value` file applied after the flags above.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Check closed forms against enumeration and Monte Carlo oracles.
    VerifyTheory {
        #[arg(long, value_enum, default_value_t = Level::Fast)]
        level: Level,
    },
}

/// Process-level exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Io(_) => EXIT_IO,
        Error::Parameter { .. }
        | Error::DegenerateDenominator
        | Error::Precondition(_)
        | Error::Oracle(_) => EXIT_PARAMETER,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() {
                EXIT_PARAMETER
            } else {
                EXIT_OK
            };
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    if cli.workers == Some(0) {
        return Err(Error::param("workers", "need at least 1"));
    }
    let mut sink: Box<dyn Write + '_> = match &cli.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(&mut *out),
    };
    let code = match &cli.command {
        Command::Xi { input } => {
            xi_command(input, cli.format, &mut sink)?;
            EXIT_OK
        }
        Command::Bootstrap { input, boot, alpha } => {
            let seed = cli.seed.unwrap_or(SimulationConfig::default().master_seed);
            if !(*alpha > 0.0 && *alpha < 1.0) {
                return Err(Error::param("alpha", format!("{alpha} is outside (0, 1)")));
            }
            let sample = read_sample(input)?;
            let dist = in_pool(cli.workers, || {
                bootstrap_distribution(&sample, *boot, seed, ReplicateStatistic::Direct)
            })?;
            bootstrap_report(input, &dist, *alpha, seed, cli.format, &mut sink, err)?;
            EXIT_OK
        }
        Command::Simulate {
            rho,
            n,
            reps,
            boot,
            alpha,
            config,
        } => {
            let mut cfg = SimulationConfig::default();
            if let Some(v) = rho {
                cfg.rho_grid = v.clone();
            }
            if let Some(v) = n {
                cfg.n_grid = v.clone();
            }
            if let Some(v) = reps {
                cfg.replications = *v;
            }
            if let Some(v) = boot {
                cfg.bootstrap_size = *v;
            }
            if !alpha.is_empty() {
                cfg.alphas = alpha.clone();
            }
            if let Some(s) = cli.seed {
                cfg.master_seed = s;
            }
            if let Some(w) = cli.workers {
                cfg.workers = w;
            }
            if let Some(path) = config {
                cfg = parse_config_overrides(&cfg, path)?;
            }
            let result = run_simulation(&cfg)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => write_csv(&result, &mut sink)?,
                Format::Json => write_json(&result, &mut sink)?,
            }
            writeln!(err, "simulation finished in {:.2?}", result.wall_time)?;
            EXIT_OK
        }
        Command::VerifyTheory { level } => {
            let level = match level {
                Level::Fast => VerifyLevel::Fast,
                Level::Full => VerifyLevel::Full,
            };
            let report = in_pool(cli.workers, || verify_theory(level, cli.seed.unwrap_or(7)))?;
            match cli.format {
                Some(Format::Json) => {
                    serde_json::to_writer_pretty(&mut sink, &report)
                        .map_err(std::io::Error::from)?;
                    writeln!(sink)?;
                }
                Some(Format::Csv) => {
                    let mut w = csv::Writer::from_writer(&mut sink);
                    w.write_record([
                        "name",
                        "observed",
                        "expected",
                        "tolerance",
                        "passed",
                        "detail",
                    ])
                    .map_err(std::io::Error::other)?;
                    for c in &report.checks {
                        w.write_record([
                            c.name.clone(),
                            c.observed.to_string(),
                            c.expected.to_string(),
                            c.tolerance.to_string(),
                            c.passed.to_string(),
                            c.detail.clone(),
                        ])
                        .map_err(std::io::Error::other)?;
                    }
                    w.flush()?;
                }
                None => {
                    for c in &report.checks {
                        writeln!(sink, "{}", c.line())?;
                    }
                }
            }
            if report.passed() {
                EXIT_OK
            } else {
                writeln!(err, "verification failed:")?;
                for c in report.failures() {
                    writeln!(err, "  {}", c.line())?;
                }
                EXIT_VERIFICATION
            }
        }
    };
    sink.flush()?;
    Ok(code)
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match workers {
        None => f(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::param("workers", e.to_string()))?
            .install(f),
    }
}

#[derive(Serialize)]
struct XiReport {
    input: String,
    n: usize,
    xi_general: f64,
    xi_simple: Option<f64>,
    x_tied: usize,
    x_tie_groups: usize,
    y_tied: usize,
    y_tie_groups: usize,
}

fn xi_command(input: &Path, format: Option<Format>, out: &mut dyn Write) -> Result<()> {
    let sample = read_sample(input)?;
    let (x_tied, x_tie_groups) = tie_summary(sample.x());
    let (y_tied, y_tie_groups) = tie_summary(sample.y());
    let report = XiReport {
        input: input.display().to_string(),
        n: sample.len(),
        xi_general: xi_general(&sample, TieBreak::ByIndex)?.value,
        xi_simple: if sample.is_continuous() {
            Some(xi_simple(&sample, TieBreak::ByIndex)?.value)
        } else {
            None
        },
        x_tied,
        x_tie_groups,
        y_tied,
        y_tie_groups,
    };
    let simple = report.xi_simple.map(|v| v.to_string()).unwrap_or_default();
    match format {
        Some(Format::Json) => {
            serde_json::to_writer_pretty(&mut *out, &report).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
        Some(Format::Csv) => {
            writeln!(
                out,
                "n,xi_general,xi_simple,x_tied,x_tie_groups,y_tied,y_tie_groups"
            )?;
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                report.n, report.xi_general, simple, x_tied, x_tie_groups, y_tied, y_tie_groups
            )?;
        }
        None => {
            writeln!(out, "input       {}", report.input)?;
            writeln!(out, "n           {}", report.n)?;
            writeln!(out, "xi_n        {:.6}", report.xi_general)?;
            match report.xi_simple {
                Some(v) => writeln!(out, "xi_n simple {v:.6}")?,
                None => writeln!(out, "xi_n simple n/a (ties present)")?,
            }
            writeln!(out, "x ties      {x_tied} values in {x_tie_groups} groups")?;
            writeln!(out, "y ties      {y_tied} values in {y_tie_groups} groups")?;
        }
    }
    Ok(())
}

fn bootstrap_report(
    input: &Path,
    dist: &BootstrapDistribution,
    alpha: f64,
    seed: u64,
    format: Option<Format>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<()> {
    let (n, b) = (dist.source_n, dist.b_count());
    let (v1, v2) = (var_b1(dist)?, var_b2(dist)?);
    let (h1, h2) = (ci_hybrid1(dist, alpha)?, ci_hybrid2(dist, alpha)?);
    match format {
        Some(Format::Json) => {
            let doc = json!({
                "input": input.display().to_string(),
                "n": n,
                "bootstrap_size": b,
                "alpha": alpha,
                "seed": seed,
                "xi_n": dist.source_xi,
                "replicate_mean": dist.mean(),
                "var_b1": v1,
                "var_b2": v2,
                "hb1": [h1.lower, h1.upper],
                "hb2": [h2.lower, h2.upper],
                "degenerate_redraws": dist.degenerate_redraws,
                "warning": BOOTSTRAP_WARNING,
            });
            serde_json::to_writer_pretty(&mut *out, &doc).map_err(std::io::Error::from)?;
            writeln!(out)?;
            writeln!(err, "{BOOTSTRAP_WARNING}")?;
        }
        Some(Format::Csv) => {
            writeln!(out, "quantity,value")?;
            for (k, v) in [
                ("n", n as f64),
                ("xi_n", dist.source_xi),
                ("replicate_mean", dist.mean()),
                ("var_b1", v1),
                ("var_b2", v2),
                ("hb1_lower", h1.lower),
                ("hb1_upper", h1.upper),
                ("hb2_lower", h2.lower),
                ("hb2_upper", h2.upper),
                ("degenerate_redraws", dist.degenerate_redraws as f64),
            ] {
                writeln!(out, "{k},{v}")?;
            }
            writeln!(err, "{BOOTSTRAP_WARNING}")?;
        }
        None => {
            writeln!(out, "{BOOTSTRAP_WARNING}\n")?;
            writeln!(out, "n                 {n}")?;
            writeln!(out, "B                 {b} (seed {seed})")?;
            writeln!(out, "xi_n              {:.6}", dist.source_xi)?;
            writeln!(out, "replicate mean    {:.6}", dist.mean())?;
            writeln!(out, "V-B1 (n Var-hat)  {v1:.6}")?;
            writeln!(out, "V-B2              {v2:.6}")?;
            let pct = 100.0 * (1.0 - alpha);
            writeln!(
                out,
                "HB1 {pct:.0}%           [{:.6}, {:.6}]",
                h1.lower, h1.upper
            )?;
            writeln!(
                out,
                "HB2 {pct:.0}%           [{:.6}, {:.6}]",
                h2.lower, h2.upper
            )?;
            if dist.degenerate_redraws > 0 {
                writeln!(
                    out,
                    "degenerate resamples redrawn: {}",
                    dist.degenerate_redraws
                )?;
            }
        }
    }
    Ok(())
}
