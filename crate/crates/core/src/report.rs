//! Output records for single solves and diagnostics, and their JSON, CSV
//! and plain-text renderings.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::config::{ReportMode, RunConfig};
use crate::error::{PsletError, Result};
use crate::expansion::{assemble_energy, run_expansion, Dimension, EnergyResult, Expansion};
use crate::oracle::{compare, fd_solve_setup, OracleComparison};
use crate::pade::relative_difference;
use crate::potential::PotentialSpec;

/// Significant digits kept for floating-point values in JSON output.
pub const JSON_DIGITS: usize = 12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Inputs {
    pub potential: PotentialSpec,
    pub dimension: Dimension,
    pub angular: f64,
    pub k: usize,
    pub kinetic_scale: f64,
    pub n_terms: usize,
    pub report: ReportMode,
}

impl Inputs {
    fn of(config: &RunConfig) -> Self {
        Inputs {
            potential: config.potential,
            dimension: config.dimension,
            angular: config.dimension.lambda(),
            k: config.k,
            kinetic_scale: config.kinetic_scale,
            n_terms: config.n_terms,
            report: config.report,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PadeRecord {
    pub label: String,
    pub used: (usize, usize),
    pub value: Option<f64>,
    pub condition: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flags {
    pub stable: bool,
    pub divergent: bool,
    pub critical: bool,
    pub multiple_minima: bool,
}

/// One solve: inputs, classical point, series and summed energies.
/// Energies follow the report mode; corrections keep their sign.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveRecord {
    pub inputs: Inputs,
    pub q0: f64,
    pub w: f64,
    pub beta: f64,
    pub lbar: f64,
    pub e_minus2: f64,
    pub corrections: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub pade: Vec<PadeRecord>,
    pub final_value: f64,
    pub final_source: String,
    pub flags: Flags,
}

/// Runs the expansion and sums the series for `config`.
pub fn solve(config: &RunConfig) -> Result<(Expansion, EnergyResult)> {
    let expansion = run_expansion(&config.setup()?)?;
    let result = assemble_energy(&expansion.series, &config.pade)?;
    Ok((expansion, result))
}

pub fn solve_record(config: &RunConfig) -> Result<SolveRecord> {
    let (e, r) = solve(config)?;
    let report = |v: f64| config.report.apply(v);
    Ok(SolveRecord {
        inputs: Inputs::of(config),
        q0: e.point.q0,
        w: e.point.w,
        beta: e.point.beta,
        lbar: e.point.lbar,
        e_minus2: e.series.e_minus2,
        corrections: r.corrections.clone(),
        partial_sums: r.partial_sums.iter().map(|&v| report(v)).collect(),
        pade: r
            .pade
            .iter()
            .map(|p| PadeRecord {
                label: p.label(),
                used: p.used,
                value: p.value.map(report),
                condition: p.condition,
            })
            .collect(),
        final_value: report(r.final_value),
        final_source: r.final_source.label(),
        flags: Flags {
            stable: r.stable,
            divergent: r.divergent,
            critical: config.critical(),
            multiple_minima: e.point.multiplicity_warning,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceEntry {
    pub label: String,
    pub value: Option<f64>,
}

/// Convergence report for one configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnoseRecord {
    pub inputs: Inputs,
    pub lbar: f64,
    pub partial_sums: Vec<f64>,
    pub partial_sum_differences: Vec<f64>,
    /// Smallest `n` with `E_n .. E_last` all within `tolerance` of the last
    /// partial sum.
    pub stabilization_index: usize,
    pub pade_sequence: Vec<SequenceEntry>,
    pub pade_differences: Vec<f64>,
    pub pade_stable: bool,
    pub tolerance: f64,
    /// Relative spread `(max - min) / |E_last|` of `E_5 .. E_last`.
    pub partial_sum_spread: f64,
    pub critical: bool,
    pub critical_ratio: Option<f64>,
    pub final_value: f64,
    pub final_source: String,
    pub stable: bool,
    pub divergent: bool,
    pub oracle: Option<OracleComparison>,
}

pub fn diagnose_record(config: &RunConfig, tolerance: f64, with_oracle: bool) -> Result<DiagnoseRecord> {
    if !(tolerance > 0.0) {
        return Err(PsletError::config("tolerance", format!("must be > 0, got {tolerance}")));
    }
    let (_, r) = solve(config)?;
    let report = |v: f64| config.report.apply(v);
    let sums: Vec<f64> = r.partial_sums.iter().map(|&v| report(v)).collect();
    let last = *sums.last().unwrap();
    let mut stabilization_index = sums.len();
    for (i, s) in sums.iter().enumerate().rev() {
        if relative_difference(*s, last) > tolerance {
            break;
        }
        stabilization_index = i + 1;
    }
    let tail = &sums[sums.len().min(4)..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let partial_sum_spread = if tail.is_empty() { 0.0 } else { (hi - lo) / last.abs() };

    let oracle = if with_oracle {
        let o = fd_solve_setup(&config.setup()?)?;
        let mut c = compare(&r, o.energy);
        if config.report == ReportMode::Magnitude {
            c.oracle = c.oracle.abs();
            c.final_value = c.final_value.abs();
            c.closest_value = c.closest_value.abs();
        }
        Some(c)
    } else {
        None
    };

    Ok(DiagnoseRecord {
        inputs: Inputs::of(config),
        lbar: r.lbar,
        partial_sum_differences: sums
            .windows(2)
            .map(|w| relative_difference(w[0], w[1]))
            .collect(),
        partial_sums: sums,
        stabilization_index,
        pade_sequence: r
            .diagnostics
            .sequence
            .iter()
            .map(|p| SequenceEntry {
                label: p.label(),
                value: p.value.map(report),
            })
            .collect(),
        pade_differences: r.diagnostics.sequence_differences.clone(),
        pade_stable: r.diagnostics.stable,
        tolerance,
        partial_sum_spread,
        critical: config.critical(),
        critical_ratio: config.potential.npo_critical_ratio(),
        final_value: report(r.final_value),
        final_source: r.final_source.label(),
        stable: r.stable,
        divergent: r.divergent,
        oracle,
    })
}

/// Rounds `x` to `digits` significant digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_significant(n.as_f64().unwrap(), JSON_DIGITS);
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with floats rounded to [`JSON_DIGITS`] significant digits,
/// fields in declaration order, and a trailing newline.
pub fn to_json<T: Serialize>(record: &T) -> Result<String> {
    let mut v = serde_json::to_value(record).map_err(|e| PsletError::Io(e.to_string()))?;
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| PsletError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Fixed-width rendering used in CSV and text output.
pub fn fmt_value(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{}", round_significant(x, JSON_DIGITS)),
        Some(_) | None => String::new(),
    }
}

pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let io = |e: csv::Error| PsletError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| PsletError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| PsletError::Io(e.to_string()))
}

impl SolveRecord {
    /// One `quantity,value` line per energy.
    pub fn to_csv(&self) -> Result<String> {
        let mut rows = vec![
            vec!["q0".into(), fmt_value(Some(self.q0))],
            vec!["w".into(), fmt_value(Some(self.w))],
            vec!["beta".into(), fmt_value(Some(self.beta))],
            vec!["lbar".into(), fmt_value(Some(self.lbar))],
            vec!["E(-2)".into(), fmt_value(Some(self.e_minus2))],
        ];
        for (i, c) in self.corrections.iter().enumerate() {
            rows.push(vec![format!("E({i})"), fmt_value(Some(*c))]);
        }
        for (i, s) in self.partial_sums.iter().enumerate() {
            rows.push(vec![format!("E_{}", i + 1), fmt_value(Some(*s))]);
        }
        for p in &self.pade {
            rows.push(vec![p.label.clone(), fmt_value(p.value)]);
        }
        rows.push(vec!["final".into(), fmt_value(Some(self.final_value))]);
        csv_text(&["quantity", "value"], &rows)
    }

    pub fn to_human(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} {} k={} scale={}",
            self.inputs.potential.name(),
            self.inputs.dimension,
            self.inputs.k,
            self.inputs.kinetic_scale
        );
        let _ = writeln!(s, "q0 = {}  w = {}  beta = {}  lbar = {}", self.q0, self.w, self.beta, self.lbar);
        for (i, v) in self.partial_sums.iter().enumerate() {
            let _ = writeln!(s, "  E_{:<2} = {v:.12}", i + 1);
        }
        for p in &self.pade {
            match p.value {
                Some(v) => {
                    let _ = writeln!(s, "  {} = {v:.12}", p.label);
                }
                None => {
                    let _ = writeln!(s, "  {} = (undefined)", p.label);
                }
            }
        }
        let f = &self.flags;
        let _ = writeln!(
            s,
            "final = {:.12} ({}){}{}{}",
            self.final_value,
            self.final_source,
            if f.stable { "" } else { "  [not stable]" },
            if f.divergent { "  [divergent]" } else { "" },
            if f.critical { "  [critical]" } else { "" },
        );
        s
    }
}

impl DiagnoseRecord {
    pub fn to_csv(&self) -> Result<String> {
        let mut rows: Vec<Vec<String>> = self
            .partial_sums
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let diff = i.checked_sub(1).map(|j| self.partial_sum_differences[j]);
                vec![format!("E_{}", i + 1), fmt_value(Some(*v)), fmt_value(diff)]
            })
            .collect();
        let mut diffs = self.pade_differences.iter();
        for (i, p) in self.pade_sequence.iter().enumerate() {
            let diff = if i > 0 { diffs.next().copied() } else { None };
            rows.push(vec![p.label.clone(), fmt_value(p.value), fmt_value(diff)]);
        }
        csv_text(&["quantity", "value", "relative_change"], &rows)
    }

    pub fn to_human(&self) -> String {
        let mut s = String::new();
        for (i, v) in self.partial_sums.iter().enumerate() {
            let _ = writeln!(s, "E_{:<2} = {v:.12}", i + 1);
        }
        let _ = writeln!(
            s,
            "partial sums stabilize at E_{} (tolerance {:e}); spread of E_5.. = {:.3e}",
            self.stabilization_index, self.tolerance, self.partial_sum_spread
        );
        for p in &self.pade_sequence {
            let _ = writeln!(s, "{} = {}", p.label, fmt_value(p.value));
        }
        let _ = writeln!(s, "pade sequence stable: {}", self.pade_stable);
        if let Some(r) = self.critical_ratio {
            let _ = writeln!(s, "sqrt(a)/b = {r:.4}{}", if self.critical { " (critical)" } else { "" });
        }
        let _ = writeln!(s, "final = {:.12} ({})", self.final_value, self.final_source);
        if let Some(o) = &self.oracle {
            let _ = writeln!(
                s,
                "oracle = {:.10}  deviation = {:.3e} (relative {:.3e}); closest {} = {:.10}",
                o.oracle, o.absolute_deviation, o.relative_deviation, o.closest, o.closest_value
            );
        }
        s
    }
}
