//! Energy series assembly, partial sums and Padé summation.

use serde::Serialize;

use crate::error::{PsletError, Result};
use crate::pade::{pade_entry, pade_table, relative_difference, PadeDiagnostics, PadeEntry};

/// Approximants computed by default: `E[N,M]` for `N, M` in `2..=4`.
pub const DEFAULT_PADE_REQUESTS: [(usize, usize); 9] = [
    (2, 2),
    (2, 3),
    (2, 4),
    (3, 2),
    (3, 3),
    (3, 4),
    (4, 2),
    (4, 3),
    (4, 4),
];

/// Successive relative differences below this make the Padé sequence
/// `E[2,2], E[3,3], E[3,4], E[4,4]` count as stable.
pub const STABILITY_TOLERANCE: f64 = 1e-8;

/// `E = lbar^2 E^(-2) + sum_n E^(n) lbar^(-n)`, in the units of the
/// original (not canonical) problem.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergySeries {
    pub e_minus2: f64,
    /// `E^(0), E^(1), ...`
    pub corrections: Vec<f64>,
    pub lbar: f64,
    pub kinetic_scale: f64,
}

impl EnergySeries {
    /// Classical term `lbar^2 E^(-2)`.
    pub fn leading(&self) -> f64 {
        self.lbar * self.lbar * self.e_minus2
    }

    /// Expansion variable `1/lbar`.
    pub fn z(&self) -> f64 {
        1.0 / self.lbar
    }

    /// The full partial sum through the last correction.
    pub fn total(&self) -> f64 {
        *self.partial_sums().last().unwrap()
    }

    /// `E_1 = lbar^2 E^(-2)`, `E_n = E_1 + E^(0) + ... + E^(n-2)/lbar^(n-2)`.
    pub fn partial_sums(&self) -> Vec<f64> {
        let z = self.z();
        let mut sums = Vec::with_capacity(self.corrections.len() + 1);
        let mut acc = self.leading();
        sums.push(acc);
        let mut zn = 1.0;
        for c in &self.corrections {
            acc += c * zn;
            zn *= z;
            sums.push(acc);
        }
        sums
    }
}

/// Where the reported eigenvalue came from.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalSource {
    Pade { denominator: usize, numerator: usize },
    PartialSum { terms: usize },
}

impl FinalSource {
    pub fn label(&self) -> String {
        match self {
            FinalSource::Pade {
                denominator,
                numerator,
            } => format!("E[{denominator},{numerator}]"),
            FinalSource::PartialSum { terms } => format!("E_{terms}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyResult {
    pub leading: f64,
    pub lbar: f64,
    pub corrections: Vec<f64>,
    /// `E_1 .. E_{n_terms + 1}`.
    pub partial_sums: Vec<f64>,
    /// The requested approximants, in request order.
    pub pade: Vec<PadeEntry>,
    pub diagnostics: PadeDiagnostics,
    /// The Padé sequence `E[2,2], E[3,3], E[3,4], E[4,4]` is stable.
    pub stable: bool,
    pub final_value: f64,
    pub final_source: FinalSource,
    /// Set when the partial sums were tighter than the Padé window and the
    /// final value is a partial sum.
    pub divergent: bool,
}

impl EnergyResult {
    /// `E[n,m]` if it was requested and is finite.
    pub fn pade_value(&self, n: usize, m: usize) -> Option<f64> {
        self.pade
            .iter()
            .find(|e| e.denominator == n && e.numerator == m)
            .and_then(|e| e.value)
    }

    /// The full partial sum `E_P`.
    pub fn partial_sum(&self) -> f64 {
        *self.partial_sums.last().unwrap()
    }
}

/// Sums the series: partial sums, the requested `[N,M]` approximants
/// (`N` the denominator degree), the stability diagnostics, and the final
/// reported value.
///
/// The final value is `E[4,4]` when the sequence `E[2,2], E[3,3], E[3,4],
/// E[4,4]` is stable, or when the window `E[3,3], E[3,4], E[4,4]` is at
/// least as tight as the tightest window of three consecutive partial sums.
/// Otherwise it is the centre of that partial-sum window.
pub fn assemble_energy(series: &EnergySeries, requests: &[(usize, usize)]) -> Result<EnergyResult> {
    let available = series.corrections.len();
    if let Some(&(n, m)) = requests.iter().find(|(n, m)| n + m + 1 > available) {
        return Err(PsletError::Arity {
            needed: n + m + 1,
            available,
        });
    }
    // Fit in the scaled variable: c_i z^i evaluated at 1.
    let z = series.z();
    let scaled: Vec<f64> = series
        .corrections
        .iter()
        .scan(1.0, |zn, c| {
            let v = c * *zn;
            *zn *= z;
            Some(v)
        })
        .collect();
    let leading = series.leading();

    let pade = requests
        .iter()
        .map(|&(n, m)| pade_entry(&scaled, 1.0, leading, n, m))
        .collect::<Result<Vec<_>>>()?;
    let diagnostics = pade_table(&scaled, 1.0, leading, STABILITY_TOLERANCE);
    let partial_sums = diagnostics.partial_sums.clone();

    let entry = |n: usize, m: usize| -> Option<f64> {
        if n + m + 1 > available {
            return None;
        }
        pade_entry(&scaled, 1.0, leading, n, m).ok().and_then(|e| e.value)
    };
    let stability_set: Vec<Option<f64>> = [(2, 2), (3, 3), (3, 4), (4, 4)]
        .iter()
        .map(|&(n, m)| entry(n, m))
        .collect();
    let stable = stability_set.iter().all(Option::is_some)
        && stability_set
            .windows(2)
            .all(|w| relative_difference(w[0].unwrap(), w[1].unwrap()) < STABILITY_TOLERANCE);

    let pade_window = [entry(3, 3), entry(3, 4), entry(4, 4)];
    let pade_spread = if pade_window.iter().all(Option::is_some) {
        spread(&pade_window.map(Option::unwrap))
    } else {
        f64::INFINITY
    };
    let (ps_spread, terms) = tightest_partial_sum(&partial_sums);

    let (final_value, final_source, divergent) = if stable || pade_spread <= ps_spread {
        (
            stability_set[3].or(pade_window[2]).unwrap(),
            FinalSource::Pade {
                denominator: 4,
                numerator: 4,
            },
            false,
        )
    } else {
        (
            partial_sums[terms - 1],
            FinalSource::PartialSum { terms },
            true,
        )
    };

    Ok(EnergyResult {
        leading,
        lbar: series.lbar,
        corrections: series.corrections.clone(),
        partial_sums,
        pade,
        diagnostics,
        stable,
        final_value,
        final_source,
        divergent,
    })
}

/// Relative spread `(max - min) / |last|` of a window.
fn spread(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let scale = values.last().map_or(0.0, |v| v.abs());
    if hi == lo {
        0.0
    } else {
        (hi - lo) / scale.max(f64::MIN_POSITIVE)
    }
}

/// The partial sum `E_i` (1-based) whose window `E_{i-1}, E_i, E_{i+1}` has
/// the smallest relative spread, with that spread. Later sums win ties.
fn tightest_partial_sum(sums: &[f64]) -> (f64, usize) {
    if sums.len() < 3 {
        return (f64::INFINITY, sums.len());
    }
    let mut best = (f64::INFINITY, sums.len());
    for i in 1..sums.len() - 1 {
        let s = spread(&sums[i - 1..=i + 1]);
        if s <= best.0 {
            best = (s, i + 1);
        }
    }
    best
}
