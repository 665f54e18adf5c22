//! Command-line front end: `solve`, `table` and `diagnose`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{ConfigMap, OutputFormat, RunConfig};
use crate::error::{PsletError, Result};
use crate::expansion::expand_to_order;
use crate::report::{diagnose_record, solve_record, to_json};
use crate::table::{resolve_config_dir, TableConfig};
use crate::wavefunction::{WavefunctionSeries, DEFAULT_ORDERS, TRUST_RADIUS};

/// Partial sums within this relative distance of the last one count as
/// settled: agreement up to the last two of eight printed digits.
pub const DEFAULT_DIAGNOSE_TOLERANCE: f64 = 1e-6;

/// Exit status when a table row or comparison misses its tolerance.
pub const EXIT_TOLERANCE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "pslet", version, about = "Shifted-l expansion solver for radial bound states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one state and print the energy series and summed energies.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Also write the wavefunction over its trusted region as CSV.
        #[arg(long, value_name = "PATH")]
        psi_out: Option<PathBuf>,
        /// Samples in the wavefunction dump.
        #[arg(long, default_value_t = 401)]
        psi_points: usize,
    },
    /// Recompute a table from its config and compare with the reference values.
    Table {
        /// Table id, t1 .. t9.
        id: String,
        /// Directory with the table configs (default: $PSLET_CONFIG_DIR, then the shipped tables).
        #[arg(long, value_name = "DIR")]
        config_dir: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Report how the partial sums and Padé approximants settle.
    Diagnose {
        #[command(flatten)]
        run: RunArgs,
        /// Compare with the finite-difference reference solver.
        #[arg(long)]
        oracle: bool,
        /// Relative tolerance for the stabilization index.
        #[arg(long, default_value_t = DEFAULT_DIAGNOSE_TOLERANCE)]
        tolerance: f64,
    },
}

/// Flags shared by `solve` and `diagnose`. Each overrides the same key of
/// `--config`.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// Flat `key = value` config file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// harmonic | coulomb | npo | cutoff_coulomb | coulomb_log
    #[arg(long)]
    pub potential: Option<String>,
    /// Harmonic frequency.
    #[arg(long = "A", value_name = "A")]
    pub big_a: Option<String>,
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub a0: Option<String>,
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long)]
    pub c: Option<String>,
    #[arg(long)]
    pub mu: Option<String>,
    #[arg(long)]
    pub strength: Option<String>,
    /// 1, 2 or 3.
    #[arg(long)]
    pub dimension: Option<String>,
    #[arg(long)]
    pub l: Option<String>,
    #[arg(long)]
    pub m: Option<String>,
    /// even | odd (one dimension).
    #[arg(long)]
    pub parity: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    /// Kinetic coefficient s in -s d^2/dq^2.
    #[arg(long)]
    pub scale: Option<String>,
    #[arg(long)]
    pub n_terms: Option<String>,
    /// Padé orders, e.g. "3,3 4,4".
    #[arg(long)]
    pub pade: Option<String>,
    /// signed | magnitude
    #[arg(long)]
    pub report: Option<String>,
    /// json | csv | human
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    pub fn to_map(&self) -> Result<ConfigMap> {
        let mut map = match &self.config {
            Some(path) => ConfigMap::load(path)?,
            None => ConfigMap::new(),
        };
        let flags = [
            ("potential", &self.potential),
            ("A", &self.big_a),
            ("a", &self.a),
            ("a0", &self.a0),
            ("b", &self.b),
            ("c", &self.c),
            ("mu", &self.mu),
            ("strength", &self.strength),
            ("dimension", &self.dimension),
            ("l", &self.l),
            ("m", &self.m),
            ("parity", &self.parity),
            ("k", &self.k),
            ("scale", &self.scale),
            ("n_terms", &self.n_terms),
            ("pade", &self.pade),
            ("report", &self.report),
            ("format", &self.format),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                map.set(key, v);
            }
        }
        Ok(map)
    }

    pub fn to_config(&self) -> Result<RunConfig> {
        RunConfig::from_map(&self.to_map()?)
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit status. Records go to `stdout` unless `--out` is given;
/// errors go to `stderr` as a one-line JSON object with the error class.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let record = serde_json::json!({ "error": { "class": e.class(), "message": e.to_string() } });
            let _ = writeln!(stderr, "{record}");
            e.exit_code()
        }
    }
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| PsletError::Io(format!("{}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| PsletError::Io(e.to_string())),
    }
}

fn execute(command: &Command, stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Solve {
            run,
            psi_out,
            psi_points,
        } => {
            let config = run.to_config()?;
            let record = solve_record(&config)?;
            let text = match config.format {
                OutputFormat::Json => to_json(&record)?,
                OutputFormat::Csv => record.to_csv()?,
                OutputFormat::Human => record.to_human(),
            };
            emit(&text, run.out.as_deref(), stdout)?;
            if let Some(path) = psi_out {
                write_wavefunction(&config, path, *psi_points)?;
            }
            Ok(0)
        }
        Command::Diagnose { run, oracle, tolerance } => {
            let config = run.to_config()?;
            let record = diagnose_record(&config, *tolerance, *oracle)?;
            let text = match config.format {
                OutputFormat::Json => to_json(&record)?,
                OutputFormat::Csv => record.to_csv()?,
                OutputFormat::Human => record.to_human(),
            };
            emit(&text, run.out.as_deref(), stdout)?;
            Ok(0)
        }
        Command::Table {
            id,
            config_dir,
            format,
            out,
        } => {
            let format: OutputFormat = format.as_deref().unwrap_or("json").parse()?;
            let table = TableConfig::load(id, &resolve_config_dir(config_dir.as_deref()))?;
            let report = table.run();
            let text = match format {
                OutputFormat::Json => to_json(&report)?,
                OutputFormat::Csv => report.to_csv()?,
                OutputFormat::Human => report.to_human(),
            };
            emit(&text, out.as_deref(), stdout)?;
            Ok(if report.passed() { 0 } else { EXIT_TOLERANCE })
        }
    }
}

fn write_wavefunction(config: &RunConfig, path: &Path, points: usize) -> Result<()> {
    let expansion = expand_to_order(&config.setup()?, DEFAULT_ORDERS)?;
    let psi = WavefunctionSeries::from_expansion(&expansion, DEFAULT_ORDERS)?;
    let edge = 0.99 * TRUST_RADIUS;
    let lo = psi.q_of_y(-edge).max(0.0);
    let hi = psi.q_of_y(edge);
    let mut buf = Vec::new();
    psi.write_csv(&mut buf, lo, hi, points)?;
    std::fs::write(path, buf).map_err(|e| PsletError::Io(format!("{}: {e}", path.display())))
}
