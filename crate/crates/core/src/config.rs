//! Run configuration: flat `key = value` files, overridable by flags.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{PsletError, Result};
use crate::expansion::{Dimension, Parity, ProblemSetup, DEFAULT_PADE_REQUESTS, DEFAULT_TERMS};
use crate::potential::{make_potential, PotentialSpec};

/// Keys understood by [`RunConfig::from_map`].
pub const RUN_KEYS: &[&str] = &[
    "potential",
    "A",
    "a",
    "a0",
    "b",
    "c",
    "mu",
    "strength",
    "dimension",
    "l",
    "m",
    "parity",
    "k",
    "scale",
    "n_terms",
    "pade",
    "report",
    "format",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportMode {
    Signed,
    /// Energies are reported as `|E|`.
    Magnitude,
}

impl ReportMode {
    pub fn apply(&self, e: f64) -> f64 {
        match self {
            ReportMode::Signed => e,
            ReportMode::Magnitude => e.abs(),
        }
    }
}

impl FromStr for ReportMode {
    type Err = PsletError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signed" => Ok(ReportMode::Signed),
            "magnitude" => Ok(ReportMode::Magnitude),
            _ => Err(PsletError::config("report", format!("expected signed or magnitude, got {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Human,
}

impl FromStr for OutputFormat {
    type Err = PsletError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "human" => Ok(OutputFormat::Human),
            _ => Err(PsletError::config("format", format!("expected json, csv or human, got {s:?}"))),
        }
    }
}

/// Ordered `key -> value` pairs. Later insertions override earlier ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigMap(BTreeMap<String, String>);

impl ConfigMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines. `#` starts a comment; blank lines are
    /// skipped. Repeated keys keep the last value.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = ConfigMap::new();
        for (key, value) in parse_lines(text)? {
            map.set(&key, &value);
        }
        Ok(map)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PsletError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        let key = if key == "kinetic_scale" { "scale" } else { key };
        self.0.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn merge(&mut self, other: &ConfigMap) {
        for (k, v) in &other.0 {
            self.set(k, v);
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| PsletError::config(key, format!("cannot parse {v:?}: {e}")))
            })
            .transpose()
    }

    fn require<T: FromStr>(&self, key: &str, potential: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.parsed(key)?
            .ok_or_else(|| PsletError::config(key, format!("required for potential {potential}")))
    }
}

/// Splits a config text into `(key, value)` pairs in file order.
pub fn parse_lines(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            PsletError::config(&format!("line {}", n + 1), format!("expected key = value, got {line:?}"))
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(PsletError::config(&format!("line {}", n + 1), "empty key"));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Parses a list of Padé orders such as `2,2 3,3 4,4`.
pub fn parse_pade_requests(text: &str) -> Result<Vec<(usize, usize)>> {
    let bad = || PsletError::config("pade", format!("expected pairs like \"3,3 4,4\", got {text:?}"));
    let requests = text
        .split_whitespace()
        .map(|pair| {
            let (n, m) = pair.split_once(',').ok_or_else(bad)?;
            Ok((n.parse().map_err(|_| bad())?, m.parse().map_err(|_| bad())?))
        })
        .collect::<Result<Vec<_>>>()?;
    if requests.is_empty() {
        return Err(bad());
    }
    Ok(requests)
}

/// Everything needed for one solve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub dimension: Dimension,
    /// Number of radial nodes.
    pub k: usize,
    pub kinetic_scale: f64,
    pub n_terms: usize,
    pub pade: Vec<(usize, usize)>,
    pub report: ReportMode,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        if let Some(key) = map.keys().find(|k| !RUN_KEYS.contains(k)) {
            return Err(PsletError::config(key, "unknown key"));
        }
        let name = map
            .get("potential")
            .ok_or_else(|| PsletError::config("potential", "missing"))?;
        let potential = match name {
            "harmonic" => PotentialSpec::Harmonic {
                a: map.require("A", name)?,
            },
            "coulomb" => PotentialSpec::Coulomb {
                strength: map.parsed("strength")?.unwrap_or(1.0),
            },
            "npo" => PotentialSpec::Npo {
                a0: map.parsed("a0")?.unwrap_or(1.0),
                a: map.require("a", name)?,
                b: map.require("b", name)?,
            },
            "cutoff_coulomb" => PotentialSpec::CutoffCoulomb {
                c: map.require("c", name)?,
            },
            "coulomb_log" => PotentialSpec::CoulombLog {
                strength: map.parsed("strength")?.unwrap_or(1.0),
                mu: map.require("mu", name)?,
            },
            other => {
                return Err(PsletError::config(
                    "potential",
                    format!("unknown potential {other:?}; expected harmonic, coulomb, npo, cutoff_coulomb or coulomb_log"),
                ))
            }
        };
        potential.validate()?;

        let dimension = match map.parsed::<u8>("dimension")?.unwrap_or(3) {
            3 => Dimension::Three {
                l: map.parsed("l")?.unwrap_or(0),
            },
            2 => Dimension::Two {
                m: map.parsed("m")?.unwrap_or(0),
            },
            1 => Dimension::One(match map.get("parity").unwrap_or("even") {
                "even" => Parity::Even,
                "odd" => Parity::Odd,
                p => return Err(PsletError::config("parity", format!("expected even or odd, got {p:?}"))),
            }),
            d => return Err(PsletError::config("dimension", format!("expected 1, 2 or 3, got {d}"))),
        };

        let config = RunConfig {
            potential,
            dimension,
            k: map.parsed("k")?.unwrap_or(0),
            kinetic_scale: map.parsed("scale")?.unwrap_or(0.5),
            n_terms: map.parsed("n_terms")?.unwrap_or(DEFAULT_TERMS),
            pade: match map.get("pade") {
                Some(text) => parse_pade_requests(text)?,
                None => DEFAULT_PADE_REQUESTS.to_vec(),
            },
            report: map.parsed("report")?.unwrap_or(ReportMode::Signed),
            format: map.parsed("format")?.unwrap_or(OutputFormat::Json),
        };
        config.setup()?.validate()?;
        if let Some(&(n, m)) = config.pade.iter().find(|(n, m)| n + m + 1 > config.n_terms) {
            return Err(PsletError::config(
                "pade",
                format!("[{n},{m}] needs {} terms but n_terms = {}", n + m + 1, config.n_terms),
            ));
        }
        Ok(config)
    }

    pub fn setup(&self) -> Result<ProblemSetup> {
        Ok(
            ProblemSetup::in_dimension(make_potential(self.potential)?, self.dimension, self.k)
                .with_kinetic_scale(self.kinetic_scale)
                .with_terms(self.n_terms),
        )
    }

    /// `sqrt(a)/b` lies in the NPO critical range `[0.1, 30]`.
    pub fn critical(&self) -> bool {
        is_critical(&self.potential)
    }
}

pub fn is_critical(spec: &PotentialSpec) -> bool {
    spec.npo_critical_ratio()
        .is_some_and(|r| (0.1..=30.0).contains(&r))
}
