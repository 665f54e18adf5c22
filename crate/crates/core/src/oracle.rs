//! Finite-difference reference solver.
//!
//! Discretizes `-s d^2/dq^2 + s Lambda(Lambda+1)/q^2 + V` with the 3-point
//! stencil on a uniform Dirichlet grid, locates the `(k+1)`-th eigenvalue by
//! Sturm-sequence bisection, and Richardson-extrapolates over `n` and `2n`.

use serde::Serialize;

use crate::error::{PsletError, Result};
use crate::expansion::{
    canonicalize, solve_classical_point, EnergyResult, FinalSource, ProblemSetup,
};
use crate::pade::relative_difference;
use crate::potential::PotentialModel;

pub const MIN_POINTS: usize = 200;
pub const DEFAULT_POINTS: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FdGrid {
    pub q_min: f64,
    pub q_max: f64,
    /// Interior points of the coarse grid; the fine grid has twice as many
    /// intervals.
    pub n_points: usize,
}

impl FdGrid {
    pub fn new(q_min: f64, q_max: f64, n_points: usize) -> Result<Self> {
        let grid = FdGrid {
            q_min,
            q_max,
            n_points,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q_min >= 0.0) || !self.q_max.is_finite() || self.q_max <= self.q_min {
            return Err(PsletError::Grid(format!(
                "need 0 <= q_min < q_max, got [{}, {}]",
                self.q_min, self.q_max
            )));
        }
        if self.n_points < MIN_POINTS {
            return Err(PsletError::Grid(format!(
                "n_points must be >= {MIN_POINTS}, got {}",
                self.n_points
            )));
        }
        Ok(())
    }

    /// The default grid around the classical point of `setup`:
    /// `[1e-6 q0, q0 + 40 q0 / sqrt(w lbar)]` with the upper end at least
    /// `10 q0`. Without a centrifugal term the wall sits at the origin.
    pub fn around(setup: &ProblemSetup) -> Result<Self> {
        let canonical = canonicalize(setup);
        let p = solve_classical_point(&canonical)?;
        let q_max = (p.q0 + 40.0 / (p.w * p.lbar).sqrt() * p.q0).max(10.0 * p.q0);
        let q_min = if centrifugal_free(setup.angular) { 0.0 } else { 1e-6 * p.q0 };
        FdGrid::new(q_min, q_max, DEFAULT_POINTS)
    }

    fn intervals(&self, refine: usize) -> usize {
        (self.n_points + 1) * refine
    }
}

/// Result of one extrapolated solve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FdSolution {
    pub energy: f64,
    pub coarse: f64,
    pub fine: f64,
    pub nodes: usize,
    pub grid: FdGrid,
}

fn centrifugal_free(angular: f64) -> bool {
    angular == 0.0 || angular == -1.0
}

struct Tridiagonal {
    diag: Vec<f64>,
    off: f64,
}

impl Tridiagonal {
    /// Dirichlet at both ends on the vertex grid; with `neumann` the
    /// origin is reflecting and the grid is cell-centred.
    fn build(
        model: &PotentialModel,
        angular: f64,
        s: f64,
        grid: &FdGrid,
        intervals: usize,
        neumann: bool,
    ) -> Result<Self> {
        let h = (grid.q_max - grid.q_min) / intervals as f64;
        let centrifugal = s * angular * (angular + 1.0);
        let kinetic = 2.0 * s / (h * h);
        let mut diag = (0..intervals)
            .filter_map(|i| match (neumann, i) {
                (true, _) => Some(grid.q_min + (i as f64 + 0.5) * h),
                (false, 0) => None,
                (false, _) => Some(grid.q_min + i as f64 * h),
            })
            .map(|q| {
                let v = model.eval(q)?;
                Ok(kinetic + centrifugal / (q * q) + v)
            })
            .collect::<Result<Vec<_>>>()?;
        if neumann {
            diag[0] -= s / (h * h);
        }
        Ok(Tridiagonal {
            diag,
            off: -s / (h * h),
        })
    }

    /// Number of eigenvalues below `lambda`.
    fn count_below(&self, lambda: f64) -> usize {
        let off2 = self.off * self.off;
        let mut count = 0;
        let mut d = 1.0;
        for (i, &a) in self.diag.iter().enumerate() {
            d = if i == 0 { a - lambda } else { a - lambda - off2 / d };
            if d == 0.0 {
                d = -f64::EPSILON * (a.abs() + lambda.abs()).max(f64::MIN_POSITIVE);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn bounds(&self) -> (f64, f64) {
        let r = 2.0 * self.off.abs();
        let lo = self.diag.iter().fold(f64::INFINITY, |m, &a| m.min(a)) - r;
        let hi = self.diag.iter().fold(f64::NEG_INFINITY, |m, &a| m.max(a)) + r;
        (lo, hi)
    }

    /// The `index`-th (0-based) eigenvalue by bisection.
    fn eigenvalue(&self, index: usize) -> f64 {
        let (mut lo, mut hi) = self.bounds();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for `lambda` by two steps of inverse iteration with a
    /// partially pivoted LU of `T - lambda`.
    fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.diag.len();
        let shift = lambda + 1e-10 * lambda.abs().max(self.off.abs() * 1e-6);
        let mut x = vec![1.0; n];
        for _ in 0..3 {
            x = self.solve_shifted(shift, &x);
            let norm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            x.iter_mut().for_each(|v| *v /= norm);
        }
        x
    }

    fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        // Gaussian elimination with partial pivoting on a tridiagonal
        // matrix; each row of U has up to two superdiagonals.
        let n = self.diag.len();
        let b = self.off;
        let mut u0: Vec<f64> = self.diag.iter().map(|a| a - shift).collect();
        let mut u1 = vec![b; n];
        let mut u2 = vec![0.0; n];
        let mut y = rhs.to_vec();
        let tiny = f64::EPSILON * b.abs();
        for i in 0..n.saturating_sub(1) {
            // rows i and i+1: row i = (u0[i], u1[i], u2[i]), row i+1 = (b, d, b)
            let sub = b;
            let (mut d_next, mut e_next) = (u0[i + 1], if i + 2 < n { b } else { 0.0 });
            if sub.abs() > u0[i].abs() {
                // swap rows
                let (a0, a1, a2) = (u0[i], u1[i], u2[i]);
                u0[i] = sub;
                u1[i] = d_next;
                u2[i] = e_next;
                y.swap(i, i + 1);
                let m = a0 / sub;
                d_next = a1 - m * u1[i];
                e_next = a2 - m * u2[i];
                y[i + 1] -= m * y[i];
            } else {
                let m = sub / u0[i];
                d_next -= m * u1[i];
                e_next -= m * u2[i];
                y[i + 1] -= m * y[i];
            }
            u0[i + 1] = d_next;
            u1[i + 1] = e_next;
            u2[i + 1] = 0.0;
            if u0[i].abs() < tiny {
                u0[i] = tiny;
            }
        }
        if u0[n - 1].abs() < tiny {
            u0[n - 1] = tiny;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = y[i];
            if i + 1 < n {
                acc -= u1[i] * x[i + 1];
            }
            if i + 2 < n {
                acc -= u2[i] * x[i + 2];
            }
            x[i] = acc / u0[i];
        }
        x
    }
}

/// Sign changes of `v`, ignoring entries below `1e-8` of its peak.
pub fn count_sign_changes(v: &[f64]) -> usize {
    let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = 1e-8 * peak;
    let mut last = 0.0;
    let mut changes = 0;
    for &x in v {
        if x.abs() <= floor {
            continue;
        }
        if last != 0.0 && (x > 0.0) != (last > 0.0) {
            changes += 1;
        }
        last = x;
    }
    changes
}

/// Solves on `grid` and on the grid with twice as many intervals, returning
/// the Richardson value `(4 E_fine - E_coarse) / 3`.
pub fn fd_solve(
    model: &PotentialModel,
    angular: f64,
    nodes: usize,
    kinetic_scale: f64,
    grid: &FdGrid,
) -> Result<FdSolution> {
    grid.validate()?;
    if !centrifugal_free(angular) && grid.q_min <= 0.0 {
        return Err(PsletError::Grid(
            "q_min must be > 0 with a centrifugal term".into(),
        ));
    }
    // Lambda = -1 is the even one-dimensional problem: u'(0) = 0.
    let neumann = angular == -1.0 && grid.q_min == 0.0;
    let solve = |refine: usize| -> Result<(f64, usize)> {
        let t = Tridiagonal::build(
            model,
            angular,
            kinetic_scale,
            grid,
            grid.intervals(refine),
            neumann,
        )?;
        let e = t.eigenvalue(nodes);
        let v = t.eigenvector(e);
        Ok((e, count_sign_changes(&v)))
    };
    let (coarse, _) = solve(1)?;
    let (fine, found) = solve(2)?;
    if found != nodes {
        return Err(PsletError::StateIdentification {
            expected: nodes,
            found,
        });
    }
    let energy = (4.0 * fine - coarse) / 3.0;
    if !energy.is_finite() || relative_difference(fine, coarse) > 1e-2 {
        return Err(PsletError::Grid(format!(
            "extrapolation did not converge: {coarse} vs {fine}"
        )));
    }
    Ok(FdSolution {
        energy,
        coarse,
        fine,
        nodes: found,
        grid: *grid,
    })
}

/// Solves `setup` on its default grid.
pub fn fd_solve_setup(setup: &ProblemSetup) -> Result<FdSolution> {
    let grid = FdGrid::around(setup)?;
    fd_solve(
        &setup.potential,
        setup.angular,
        setup.nodes,
        setup.kinetic_scale,
        &grid,
    )
}

/// PSLET result measured against an oracle value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleComparison {
    pub oracle: f64,
    pub final_value: f64,
    pub absolute_deviation: f64,
    pub relative_deviation: f64,
    /// Label and value of the partial sum or Padé entry nearest the oracle.
    pub closest: String,
    pub closest_value: f64,
    pub pade44_deviation: Option<f64>,
    /// `max - min` over the partial sums `E_5 .. E_last`.
    pub partial_sum_spread: f64,
    /// The partial-sum spread exceeds ten times the `E[4,4]` deviation.
    pub spread_dominates: bool,
}

pub fn compare(result: &EnergyResult, oracle: f64) -> OracleComparison {
    let mut candidates: Vec<(String, f64)> = result
        .partial_sums
        .iter()
        .enumerate()
        .map(|(i, &v)| (FinalSource::PartialSum { terms: i + 1 }.label(), v))
        .collect();
    candidates.extend(
        result
            .pade
            .iter()
            .filter_map(|e| e.value.map(|v| (e.label(), v))),
    );
    let (closest, closest_value) = candidates
        .into_iter()
        .min_by(|a, b| (a.1 - oracle).abs().total_cmp(&(b.1 - oracle).abs()))
        .unwrap_or_else(|| (result.final_source.label(), result.final_value));
    let tail = &result.partial_sums[result.partial_sums.len().min(4)..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let partial_sum_spread = if tail.is_empty() { 0.0 } else { hi - lo };
    let pade44_deviation = result.pade_value(4, 4).map(|v| (v - oracle).abs());
    let absolute_deviation = (result.final_value - oracle).abs();
    OracleComparison {
        oracle,
        final_value: result.final_value,
        absolute_deviation,
        relative_deviation: absolute_deviation / oracle.abs().max(f64::MIN_POSITIVE),
        closest,
        closest_value,
        pade44_deviation,
        partial_sum_spread,
        spread_dominates: pade44_deviation.is_some_and(|d| partial_sum_spread > 10.0 * d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{make_potential, PotentialSpec};

    fn setup(spec: PotentialSpec, l: f64, k: usize, s: f64) -> ProblemSetup {
        ProblemSetup::new(make_potential(spec).unwrap(), l, k).with_kinetic_scale(s)
    }

    #[test]
    fn hydrogen_ground_state() {
        let r = fd_solve_setup(&setup(PotentialSpec::Coulomb { strength: 1.0 }, 0.0, 0, 0.5)).unwrap();
        assert!((r.energy + 0.5).abs() < 1e-6, "{r:?}");
        assert_eq!(r.nodes, 0);
    }

    #[test]
    fn harmonic_p_state() {
        let r = fd_solve_setup(&setup(PotentialSpec::Harmonic { a: 1.0 }, 1.0, 0, 0.5)).unwrap();
        assert!((r.energy - 2.5).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn excited_state_has_its_nodes() {
        let r = fd_solve_setup(&setup(PotentialSpec::Harmonic { a: 1.0 }, 0.0, 2, 0.5)).unwrap();
        assert!((r.energy - 5.5).abs() < 1e-6, "{r:?}");
        assert_eq!(r.nodes, 2);
    }

    #[test]
    fn grid_validation() {
        assert!(FdGrid::new(0.0, 10.0, 100).is_err());
        assert!(FdGrid::new(5.0, 1.0, 1000).is_err());
        let m = make_potential(PotentialSpec::Coulomb { strength: 1.0 }).unwrap();
        let g = FdGrid::new(0.0, 40.0, 1000).unwrap();
        assert!(matches!(fd_solve(&m, 1.0, 0, 0.5, &g), Err(PsletError::Grid(_))));
    }

    #[test]
    fn even_one_dimensional_states() {
        use crate::expansion::{Dimension, Parity};
        let m = make_potential(PotentialSpec::Harmonic { a: 1.0 }).unwrap();
        let s = ProblemSetup::in_dimension(m, Dimension::One(Parity::Even), 1);
        let r = fd_solve_setup(&s).unwrap();
        assert!((r.energy - 2.5).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn sign_changes() {
        assert_eq!(count_sign_changes(&[1.0, 2.0, -1.0, 1e-12, -2.0, 3.0]), 2);
        assert_eq!(count_sign_changes(&[0.0, 0.0]), 0);
    }
}
