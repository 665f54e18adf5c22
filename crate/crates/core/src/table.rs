//! Table reproduction: per-table config files listing rows, conventions,
//! reference values and tolerance classes.
//!
//! A table file is a flat `key = value` file. Run keys (`potential`, `a`,
//! `scale`, ...) and the table keys `title`, `source`, `compare`,
//! `tolerance` and `critical_tolerance` set defaults. Each `row = ...` line
//! holds whitespace-separated `key=value` tokens (shell quoting allowed)
//! overriding those defaults, plus `reference`, `status` and `note`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{is_critical, parse_lines, ConfigMap, RunConfig, RUN_KEYS};
use crate::error::{PsletError, Result};
use crate::report::{csv_text, fmt_value, solve};

/// Environment variable naming the directory holding `t1.conf` ...
pub const CONFIG_DIR_ENV: &str = "PSLET_CONFIG_DIR";
pub const TABLE_IDS: [&str; 9] = ["t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8", "t9"];

const TABLE_KEYS: &[&str] = &["title", "source", "compare", "tolerance", "critical_tolerance"];
const ROW_KEYS: &[&str] = &["reference", "source", "compare", "tolerance", "status", "note"];

/// The table configs shipped with the crate.
pub fn builtin_config_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/tables"))
}

/// `explicit`, else `$PSLET_CONFIG_DIR`, else the shipped configs.
pub fn resolve_config_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CONFIG_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(builtin_config_dir)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Tolerance {
    Relative(f64),
    Absolute(f64),
}

impl Tolerance {
    pub fn deviation(&self, computed: f64, reference: f64) -> f64 {
        match self {
            Tolerance::Relative(_) => (computed - reference).abs() / reference.abs(),
            Tolerance::Absolute(_) => (computed - reference).abs(),
        }
    }

    pub fn limit(&self) -> f64 {
        match *self {
            Tolerance::Relative(t) | Tolerance::Absolute(t) => t,
        }
    }
}

impl FromStr for Tolerance {
    type Err = PsletError;
    /// `rel:2e-5` or `abs:1e-6`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || PsletError::config("tolerance", format!("expected rel:<x> or abs:<x>, got {s:?}"));
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        let v: f64 = value.parse().map_err(|_| bad())?;
        if !(v >= 0.0) {
            return Err(bad());
        }
        match kind {
            "rel" => Ok(Tolerance::Relative(v)),
            "abs" => Ok(Tolerance::Absolute(v)),
            _ => Err(bad()),
        }
    }
}

impl std::fmt::Display for Tolerance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tolerance::Relative(t) => write!(f, "rel:{t:e}"),
            Tolerance::Absolute(t) => write!(f, "abs:{t:e}"),
        }
    }
}

/// Which computed quantity is held against the reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Compare {
    /// The reported final value.
    Final,
    /// The full partial sum `E_P`.
    PartialSum,
    Pade(usize, usize),
}

impl FromStr for Compare {
    type Err = PsletError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "final" => Ok(Compare::Final),
            "partial_sum" => Ok(Compare::PartialSum),
            _ => s
                .strip_prefix("E[")
                .and_then(|r| r.strip_suffix(']'))
                .and_then(|r| r.split_once(','))
                .and_then(|(n, m)| Some(Compare::Pade(n.parse().ok()?, m.parse().ok()?)))
                .ok_or_else(|| {
                    PsletError::config("compare", format!("expected final, partial_sum or E[n,m], got {s:?}"))
                }),
        }
    }
}

impl std::fmt::Display for Compare {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Compare::Final => f.write_str("final"),
            Compare::PartialSum => f.write_str("partial_sum"),
            Compare::Pade(n, m) => write!(f, "E[{n},{m}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    /// Row overrides in file order, e.g. `l=0 b=10`.
    pub label: String,
    pub config: RunConfig,
    pub reference: f64,
    pub source: String,
    pub compare: Compare,
    pub tolerance: Tolerance,
    /// Reported but not counted towards the exit status.
    pub excluded: bool,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableConfig {
    pub id: String,
    pub title: String,
    pub rows: Vec<TableRow>,
}

impl TableConfig {
    pub fn load(id: &str, dir: &Path) -> Result<Self> {
        if !TABLE_IDS.contains(&id) {
            return Err(PsletError::config("table", format!("unknown table {id:?}; expected t1..t9")));
        }
        let path = dir.join(format!("{id}.conf"));
        if !path.exists() {
            return Err(PsletError::config(
                "table",
                format!("no config for table {id} in {}", dir.display()),
            ));
        }
        let text = std::fs::read_to_string(&path)
            .map_err(|e| PsletError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(id, &text)
    }

    pub fn parse(id: &str, text: &str) -> Result<Self> {
        let mut defaults = ConfigMap::new();
        let mut row_lines = Vec::new();
        for (key, value) in parse_lines(text)? {
            if key == "row" {
                row_lines.push(value);
            } else if RUN_KEYS.contains(&key.as_str()) || TABLE_KEYS.contains(&key.as_str()) {
                defaults.set(&key, &value);
            } else {
                return Err(PsletError::config(&key, format!("unknown key in table {id}")));
            }
        }
        let rows = row_lines
            .iter()
            .enumerate()
            .map(|(i, line)| {
                parse_row(&defaults, line).map_err(|e| match e {
                    PsletError::Config { parameter, reason } => PsletError::Config {
                        parameter: format!("{id} row {}: {parameter}", i + 1),
                        reason,
                    },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.is_empty() {
            return Err(PsletError::config("row", format!("table {id} has no rows")));
        }
        Ok(TableConfig {
            id: id.to_string(),
            title: defaults.get("title").unwrap_or(id).to_string(),
            rows,
        })
    }

    /// Solves every row (concurrently) and collects results in row order.
    pub fn run(&self) -> TableReport {
        let rows: Vec<RowResult> = self
            .rows
            .par_iter()
            .enumerate()
            .map(|(i, row)| run_row(i + 1, row))
            .collect();
        let count = |s: RowStatus| rows.iter().filter(|r| r.status == s).count();
        let summary = Summary {
            rows: rows.len(),
            passed: count(RowStatus::Pass),
            failed: count(RowStatus::Fail),
            errors: count(RowStatus::Error),
            excluded: count(RowStatus::Excluded),
        };
        TableReport {
            table: self.id.clone(),
            title: self.title.clone(),
            rows,
            summary,
        }
    }
}

fn parse_row(defaults: &ConfigMap, line: &str) -> Result<TableRow> {
    let tokens = shlex::split(line).ok_or_else(|| PsletError::config("row", format!("unbalanced quotes in {line:?}")))?;
    let mut map = defaults.clone();
    let mut label = Vec::new();
    for token in tokens {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| PsletError::config("row", format!("expected key=value, got {token:?}")))?;
        if !RUN_KEYS.contains(&key) && !ROW_KEYS.contains(&key) && !TABLE_KEYS.contains(&key) {
            return Err(PsletError::config(key, "unknown row key"));
        }
        if RUN_KEYS.contains(&key) {
            label.push(format!("{key}={value}"));
        }
        map.set(key, value);
    }
    let mut run = ConfigMap::new();
    for key in RUN_KEYS {
        if let Some(v) = map.get(key) {
            run.set(key, v);
        }
    }
    let config = RunConfig::from_map(&run)?;
    let reference: f64 = map
        .parsed("reference")?
        .ok_or_else(|| PsletError::config("reference", "missing"))?;
    let compare: Compare = map.parsed("compare")?.unwrap_or(Compare::Final);
    if let Compare::Pade(n, m) = compare {
        if !config.pade.contains(&(n, m)) {
            return Err(PsletError::config("compare", format!("E[{n},{m}] is not among the requested approximants")));
        }
    }
    // an explicit row tolerance wins over the critical class
    let row_has_tolerance = line.split_whitespace().any(|t| t.starts_with("tolerance="));
    let tolerance = match map.parsed::<Tolerance>("critical_tolerance")? {
        Some(t) if is_critical(&config.potential) && !row_has_tolerance => t,
        _ => map
            .parsed("tolerance")?
            .ok_or_else(|| PsletError::config("tolerance", "missing"))?,
    };
    let excluded = match map.get("status").unwrap_or("check") {
        "check" => false,
        "excluded" => true,
        s => return Err(PsletError::config("status", format!("expected check or excluded, got {s:?}"))),
    };
    Ok(TableRow {
        label: label.join(" "),
        config,
        reference,
        source: map.get("source").unwrap_or("reference").to_string(),
        compare,
        tolerance,
        excluded,
        note: map.get("note").map(str::to_string),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Pass,
    Fail,
    Error,
    Excluded,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowError {
    pub class: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowResult {
    pub row: usize,
    pub label: String,
    pub critical: bool,
    pub compare: String,
    pub computed: Option<f64>,
    pub partial_sum: Option<f64>,
    pub e33: Option<f64>,
    pub e34: Option<f64>,
    pub e44: Option<f64>,
    pub final_value: Option<f64>,
    pub final_source: Option<String>,
    pub reference: f64,
    pub source: String,
    pub deviation: Option<f64>,
    pub tolerance: Tolerance,
    pub status: RowStatus,
    pub error: Option<RowError>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub rows: usize,
    pub passed: usize,
    pub failed: usize,
    pub errors: usize,
    pub excluded: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableReport {
    pub table: String,
    pub title: String,
    pub rows: Vec<RowResult>,
    pub summary: Summary,
}

impl TableReport {
    /// Every counted row passed.
    pub fn passed(&self) -> bool {
        self.summary.failed == 0 && self.summary.errors == 0
    }

    pub fn to_csv(&self) -> Result<String> {
        let header = [
            "row", "label", "E_P", "E[3,3]", "E[3,4]", "E[4,4]", "final", "compare", "computed",
            "reference", "source", "deviation", "tolerance", "status",
        ];
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.row.to_string(),
                    r.label.clone(),
                    fmt_value(r.partial_sum),
                    fmt_value(r.e33),
                    fmt_value(r.e34),
                    fmt_value(r.e44),
                    fmt_value(r.final_value),
                    r.compare.clone(),
                    fmt_value(r.computed),
                    fmt_value(Some(r.reference)),
                    r.source.clone(),
                    r.deviation.map(|d| format!("{d:.3e}")).unwrap_or_default(),
                    r.tolerance.to_string(),
                    format!("{:?}", r.status).to_lowercase(),
                ]
            })
            .collect();
        csv_text(&header, &rows)
    }

    pub fn to_human(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.table, self.title);
        for r in &self.rows {
            let status = format!("{:?}", r.status).to_uppercase();
            match &r.error {
                Some(e) => {
                    let _ = writeln!(s, "{:>3} {:<28} {status}: {} ({})", r.row, r.label, e.message, e.class);
                }
                None => {
                    let _ = writeln!(
                        s,
                        "{:>3} {:<28} {:>18} vs {:<14} {:<6} dev {:.2e} tol {}{} {status}",
                        r.row,
                        r.label,
                        fmt_value(r.computed),
                        fmt_value(Some(r.reference)),
                        r.source,
                        r.deviation.unwrap_or(f64::NAN),
                        r.tolerance,
                        if r.critical { " critical" } else { "" },
                    );
                }
            }
        }
        let m = &self.summary;
        let _ = writeln!(
            s,
            "{} rows: {} passed, {} failed, {} errors, {} excluded",
            m.rows, m.passed, m.failed, m.errors, m.excluded
        );
        s
    }
}

fn run_row(index: usize, row: &TableRow) -> RowResult {
    let mut out = RowResult {
        row: index,
        label: row.label.clone(),
        critical: row.config.critical(),
        compare: row.compare.to_string(),
        computed: None,
        partial_sum: None,
        e33: None,
        e34: None,
        e44: None,
        final_value: None,
        final_source: None,
        reference: row.reference,
        source: row.source.clone(),
        deviation: None,
        tolerance: row.tolerance,
        status: RowStatus::Error,
        error: None,
        note: row.note.clone(),
    };
    let (_, r) = match solve(&row.config) {
        Ok(v) => v,
        Err(e) => {
            out.error = Some(RowError {
                class: e.class().to_string(),
                message: e.to_string(),
            });
            if row.excluded {
                out.status = RowStatus::Excluded;
            }
            return out;
        }
    };
    let report = |v: f64| row.config.report.apply(v);
    out.partial_sum = Some(report(r.partial_sum()));
    out.e33 = r.pade_value(3, 3).map(report);
    out.e34 = r.pade_value(3, 4).map(report);
    out.e44 = r.pade_value(4, 4).map(report);
    out.final_value = Some(report(r.final_value));
    out.final_source = Some(r.final_source.label());
    out.computed = match row.compare {
        Compare::Final => out.final_value,
        Compare::PartialSum => out.partial_sum,
        Compare::Pade(n, m) => r.pade_value(n, m).map(report),
    };
    out.deviation = out.computed.map(|c| row.tolerance.deviation(c, row.reference));
    out.status = match out.deviation {
        _ if row.excluded => RowStatus::Excluded,
        Some(d) if d <= row.tolerance.limit() => RowStatus::Pass,
        Some(_) => RowStatus::Fail,
        None => {
            out.error = Some(RowError {
                class: "undefined".into(),
                message: format!("{} is undefined for this row", row.compare),
            });
            RowStatus::Error
        }
    };
    out
}
