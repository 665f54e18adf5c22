//! The shifted-`l` expansion: canonical form, classical point, half-order
//! recursion and energy series.

mod classical;
mod energy;
mod recursion;

pub use classical::{classical_candidates, compute_b, ClassicalPoint};
pub use energy::{assemble_energy, EnergyResult, EnergySeries, FinalSource, DEFAULT_PADE_REQUESTS};
pub use recursion::{build_v, init_f, CoefficientTable, Recursion, RESIDUAL_TOLERANCE};

use serde::{Deserialize, Serialize};

use crate::error::{PsletError, Result};
use crate::potential::PotentialModel;

pub const DEFAULT_TERMS: usize = 9;
pub const MAX_TERMS: usize = 12;

/// Parity of a one-dimensional state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

/// Physical dimension and the quantum number fixing the centrifugal term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Dimension {
    One(Parity),
    /// Cylindrical symmetry with magnetic quantum number `m`.
    Two { m: i64 },
    /// Spherical symmetry with orbital quantum number `l`.
    Three { l: u32 },
}

impl Dimension {
    /// The effective angular number `Lambda` of the centrifugal term
    /// `Lambda (Lambda + 1) / q^2`.
    pub fn lambda(&self) -> f64 {
        match *self {
            Dimension::One(Parity::Even) => -1.0,
            Dimension::One(Parity::Odd) => 0.0,
            Dimension::Two { m } => m.unsigned_abs() as f64 - 0.5,
            Dimension::Three { l } => l as f64,
        }
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Dimension::One(Parity::Even) => write!(f, "1d even"),
            Dimension::One(Parity::Odd) => write!(f, "1d odd"),
            Dimension::Two { m } => write!(f, "2d m={m}"),
            Dimension::Three { l } => write!(f, "3d l={l}"),
        }
    }
}

/// A single bound-state problem
/// `H = -s d^2/dq^2 + s Lambda(Lambda+1)/q^2 + V(q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemSetup {
    pub potential: PotentialModel,
    /// `Lambda`.
    pub angular: f64,
    /// Number of radial nodes `k`.
    pub nodes: usize,
    /// `s` in the Hamiltonian above; `1/2` is the canonical value.
    pub kinetic_scale: f64,
    /// Number of energy corrections `E^(0)..E^(n_terms - 1)`.
    pub n_terms: usize,
}

impl ProblemSetup {
    pub fn new(potential: PotentialModel, angular: f64, nodes: usize) -> Self {
        ProblemSetup {
            potential,
            angular,
            nodes,
            kinetic_scale: 0.5,
            n_terms: DEFAULT_TERMS,
        }
    }

    pub fn in_dimension(potential: PotentialModel, dimension: Dimension, nodes: usize) -> Self {
        Self::new(potential, dimension.lambda(), nodes)
    }

    pub fn with_kinetic_scale(mut self, s: f64) -> Self {
        self.kinetic_scale = s;
        self
    }

    pub fn with_terms(mut self, n_terms: usize) -> Self {
        self.n_terms = n_terms;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.potential.spec().validate()?;
        if !(self.kinetic_scale > 0.0) || !self.kinetic_scale.is_finite() {
            return Err(PsletError::config(
                "kinetic_scale",
                format!("must be > 0, got {}", self.kinetic_scale),
            ));
        }
        if !(1..=MAX_TERMS).contains(&self.n_terms) {
            return Err(PsletError::config(
                "n_terms",
                format!("must be in 1..={MAX_TERMS}, got {}", self.n_terms),
            ));
        }
        if !self.angular.is_finite() || self.angular < -1.0 {
            return Err(PsletError::config(
                "l",
                format!("angular number must be >= -1, got {}", self.angular),
            ));
        }
        Ok(())
    }

    /// Factor restoring energies of the canonical problem to this one.
    pub fn energy_factor(&self) -> f64 {
        2.0 * self.kinetic_scale
    }
}

/// Rewrites the problem with kinetic coefficient 1/2 and potential
/// `V / (2 s)`; energies of the result are multiplied by `2 s` on assembly.
pub fn canonicalize(setup: &ProblemSetup) -> ProblemSetup {
    if setup.kinetic_scale == 0.5 {
        return *setup;
    }
    ProblemSetup {
        potential: setup.potential.scaled(1.0 / (2.0 * setup.kinetic_scale)),
        kinetic_scale: 0.5,
        ..*setup
    }
}

/// Finds the classical point of a canonical setup, choosing the
/// lowest-energy minimum when several exist.
pub fn solve_classical_point(setup: &ProblemSetup) -> Result<ClassicalPoint> {
    let candidates = classical_candidates(setup)?;
    if candidates.len() == 1 {
        return Ok(candidates[0]);
    }
    let mut best: Option<(f64, ClassicalPoint)> = None;
    for point in &candidates {
        let energy = match first_correction(setup, point) {
            Ok(e0) => point.leading_energy() + e0,
            Err(_) => continue,
        };
        if best.as_ref().map_or(true, |(e, _)| energy < *e) {
            best = Some((energy, *point));
        }
    }
    let (_, mut point) = best.ok_or_else(|| {
        PsletError::NoBoundState("no candidate minimum admits a consistent expansion".into())
    })?;
    point.multiplicity_warning = true;
    Ok(point)
}

fn first_correction(setup: &ProblemSetup, point: &ClassicalPoint) -> Result<f64> {
    let b = compute_b(point, &setup.potential, 4)?;
    let v = build_v(point, &b, 2);
    let mut rec = Recursion::new(point, setup.nodes, v)?;
    rec.solve_through(2)?;
    Ok(rec.table().eps[2] / (point.q0 * point.q0))
}

/// Everything produced by one solve.
#[derive(Clone, Debug)]
pub struct Expansion {
    /// The canonical problem the recursion ran on.
    pub canonical: ProblemSetup,
    pub point: ClassicalPoint,
    pub b: Vec<f64>,
    pub table: CoefficientTable,
    pub series: EnergySeries,
}

/// Runs the expansion through `E^(n_terms - 1)`.
pub fn run_expansion(setup: &ProblemSetup) -> Result<Expansion> {
    setup.validate()?;
    expand_to_order(setup, 2 * setup.n_terms)
}

/// Runs the recursion through half-order `half_orders` (which may exceed
/// the energy-term cap, e.g. for wavefunction reconstruction).
pub fn expand_to_order(setup: &ProblemSetup, half_orders: usize) -> Result<Expansion> {
    let canonical = canonicalize(setup);
    let point = solve_classical_point(&canonical)?;
    let b = compute_b(&point, &canonical.potential, half_orders + 2)?;
    let v = build_v(&point, &b, half_orders);
    let mut rec = Recursion::new(&point, canonical.nodes, v)?;
    rec.solve_through(half_orders)?;
    let table = rec.into_table();

    let factor = setup.energy_factor();
    let q02 = point.q0 * point.q0;
    let corrections = table
        .eps
        .iter()
        .enumerate()
        .skip(2)
        .step_by(2)
        .map(|(_, e)| factor * (e / q02))
        .collect();
    let series = EnergySeries {
        e_minus2: factor * point.e_minus2,
        corrections,
        lbar: point.lbar,
        kinetic_scale: setup.kinetic_scale,
    };
    Ok(Expansion {
        canonical,
        point,
        b,
        table,
        series,
    })
}
