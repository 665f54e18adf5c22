//! Leading-order (pseudoclassical) solution: the minimum `q0` of the
//! leading energy term, the oscillator frequency, the shift, and the
//! scaled derivative coefficients `B_n`.

use crate::error::{PsletError, Result};
use crate::potential::PotentialModel;

use super::ProblemSetup;

const SCAN_MIN: f64 = 1e-4;
const SCAN_MAX: f64 = 1e4;
const SCAN_POINTS: usize = 400;
const BISECTION_RELATIVE: f64 = 1e-14;
const B1_TOLERANCE: f64 = 1e-10;

/// Leading-order data of the expansion, in canonical units
/// (kinetic coefficient 1/2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassicalPoint {
    pub q0: f64,
    /// Frequency of the leading harmonic oscillator in `x`.
    pub w: f64,
    pub beta: f64,
    /// Shifted angular momentum `Lambda - beta`.
    pub lbar: f64,
    /// Potential scale, equal to `lbar^2`.
    pub q_scale: f64,
    /// Leading energy coefficient `1/(2 q0^2) + V(q0)/Q`.
    pub e_minus2: f64,
    /// Several admissible minima were found; the lowest-energy one is kept.
    pub multiplicity_warning: bool,
}

impl ClassicalPoint {
    /// Builds the point data from a root `q0` of the minimum condition.
    pub fn at(model: &PotentialModel, angular: f64, nodes: usize, q0: f64) -> Result<Self> {
        let (v1, _) = model.derivatives(q0)?;
        if v1 <= 0.0 {
            return Err(PsletError::NoBoundState(format!(
                "V'(q0) = {v1} is not positive at q0 = {q0}"
            )));
        }
        let w2 = 3.0 + model.curvature_ratio(q0)?;
        if w2 <= 0.0 {
            return Err(PsletError::InvalidFrequency { q0, w2 });
        }
        let w = w2.sqrt();
        let beta = -(0.5 + (nodes as f64 + 0.5) * w);
        let lbar = angular - beta;
        if lbar <= 0.0 {
            return Err(PsletError::NoBoundState(format!(
                "shifted angular momentum {lbar} is not positive"
            )));
        }
        let q_scale = lbar * lbar;
        let e_minus2 = 0.5 / (q0 * q0) + model.eval(q0)? / q_scale;
        Ok(ClassicalPoint {
            q0,
            w,
            beta,
            lbar,
            q_scale,
            e_minus2,
            multiplicity_warning: false,
        })
    }

    /// Second derivative of the leading energy term with respect to `q0`
    /// at fixed `Q`.
    pub fn curvature(&self, model: &PotentialModel) -> Result<f64> {
        let (_, v2) = model.derivatives(self.q0)?;
        Ok(3.0 / self.q0.powi(4) + v2 / self.q_scale)
    }

    /// `lbar - sqrt(q0^3 V'(q0))`.
    pub fn minimum_residual(&self, model: &PotentialModel) -> Result<f64> {
        let (v1, _) = model.derivatives(self.q0)?;
        Ok(self.lbar - (self.q0.powi(3) * v1).sqrt())
    }

    /// Classical energy `lbar^2 E^(-2)`.
    pub fn leading_energy(&self) -> f64 {
        self.q_scale * self.e_minus2
    }
}

enum Probe {
    Undefined,
    BadFrequency(f64),
    Value(f64),
}

fn probe(model: &PotentialModel, angular: f64, nodes: usize, q: f64) -> Probe {
    let Ok((v1, v2)) = model.derivatives(q) else {
        return Probe::Undefined;
    };
    if !(v1 > 0.0) || !v1.is_finite() || !v2.is_finite() {
        return Probe::Undefined;
    }
    let Ok(ratio) = model.curvature_ratio(q) else {
        return Probe::Undefined;
    };
    let w2 = 3.0 + ratio;
    if w2 <= 0.0 {
        return Probe::BadFrequency(w2);
    }
    let beta = -(0.5 + (nodes as f64 + 0.5) * w2.sqrt());
    Probe::Value((q.powi(3) * v1).sqrt() + beta - angular)
}

fn refine(
    model: &PotentialModel,
    angular: f64,
    nodes: usize,
    mut lo: f64,
    mut hi: f64,
    mut g_lo: f64,
) -> Result<f64> {
    let mut g_hi = f64::NAN;
    while hi - lo > BISECTION_RELATIVE * lo {
        let mid = 0.5 * (lo + hi);
        match probe(model, angular, nodes, mid) {
            Probe::Value(g) => {
                if g == 0.0 {
                    return Ok(mid);
                }
                if g.signum() == g_lo.signum() {
                    lo = mid;
                    g_lo = g;
                } else {
                    hi = mid;
                    g_hi = g;
                }
            }
            Probe::BadFrequency(w2) => return Err(PsletError::InvalidFrequency { q0: mid, w2 }),
            Probe::Undefined => {
                return Err(PsletError::NoBoundState(format!(
                    "minimum condition undefined at q = {mid}"
                )))
            }
        }
    }
    if g_hi.is_nan() {
        if let Probe::Value(g) = probe(model, angular, nodes, hi) {
            g_hi = g;
        }
    }
    // one secant step on the final bracket
    let mut root = 0.5 * (lo + hi);
    if g_hi.is_finite() && g_hi != g_lo {
        let secant = hi - g_hi * (hi - lo) / (g_hi - g_lo);
        if secant >= lo && secant <= hi {
            root = secant;
        }
    }
    Ok(root)
}

/// All admissible minima of the leading energy term on the scan range.
pub fn classical_candidates(setup: &ProblemSetup) -> Result<Vec<ClassicalPoint>> {
    let model = &setup.potential;
    let angular = setup.angular;
    let nodes = setup.nodes;
    let ratio = (SCAN_MAX / SCAN_MIN).powf(1.0 / (SCAN_POINTS - 1) as f64);

    let mut candidates = Vec::new();
    let mut saw_bad_frequency: Option<(f64, f64)> = None;
    let mut prev: Option<(f64, f64)> = None;
    let mut q = SCAN_MIN;
    for _ in 0..SCAN_POINTS {
        match probe(model, angular, nodes, q) {
            Probe::Value(g) => {
                if g == 0.0 {
                    candidates.push(q);
                } else if let Some((q_prev, g_prev)) = prev {
                    if g_prev != 0.0 && g_prev.signum() != g.signum() {
                        candidates.push(refine(model, angular, nodes, q_prev, q, g_prev)?);
                    }
                }
                prev = Some((q, g));
            }
            Probe::BadFrequency(w2) => {
                saw_bad_frequency.get_or_insert((q, w2));
                prev = None;
            }
            Probe::Undefined => prev = None,
        }
        q *= ratio;
    }

    if candidates.is_empty() {
        return Err(match saw_bad_frequency {
            Some((q0, w2)) => PsletError::InvalidFrequency { q0, w2 },
            None => PsletError::NoBoundState(format!(
                "minimum condition has no root on [{SCAN_MIN}, {SCAN_MAX}]"
            )),
        });
    }

    let mut points = Vec::new();
    for q0 in candidates {
        let point = ClassicalPoint::at(model, angular, nodes, q0)?;
        if point.curvature(model)? > 0.0 {
            points.push(point);
        }
    }
    if points.is_empty() {
        return Err(PsletError::NoBoundState(
            "no root of the minimum condition is a minimum".into(),
        ));
    }
    Ok(points)
}

/// Scaled derivative coefficients `B_0..=B_max_index`:
/// `B_n = (-1)^n (n+1)/2 + V^(n)(q0) q0^(n+2) / (n! Q)`.
///
/// `B_0` is `q0^2 E^(-2)`; `B_1` vanishes at a true minimum.
pub fn compute_b(point: &ClassicalPoint, model: &PotentialModel, max_index: usize) -> Result<Vec<f64>> {
    let max_index = max_index.max(2);
    let taylor = model.taylor_at(point.q0, max_index)?;
    let mut power = point.q0 * point.q0 / point.q_scale;
    let b: Vec<f64> = taylor
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, t)| {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let value = sign * (n as f64 + 1.0) / 2.0 + t * power;
            power *= point.q0;
            value
        })
        .collect();
    if b[1].abs() > B1_TOLERANCE * b[2].abs() {
        return Err(PsletError::InconsistentClassicalPoint { b1: b[1], b2: b[2] });
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{make_potential, PotentialSpec};

    fn setup(spec: PotentialSpec, l: f64, k: usize) -> ProblemSetup {
        ProblemSetup::new(make_potential(spec).unwrap(), l, k)
    }

    fn single(s: &ProblemSetup) -> ClassicalPoint {
        let c = classical_candidates(s).unwrap();
        assert_eq!(c.len(), 1);
        c[0]
    }

    #[test]
    fn coulomb_ground_state_point() {
        let p = single(&setup(PotentialSpec::Coulomb { strength: 1.0 }, 0.0, 0));
        assert!((p.w - 1.0).abs() < 1e-13);
        assert!((p.beta + 1.0).abs() < 1e-13);
        assert!((p.lbar - 1.0).abs() < 1e-13);
        assert!((p.q0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_point_any_state() {
        for (l, k) in [(0.0, 0), (1.0, 2), (5.0, 1)] {
            let a = 1.7;
            let p = single(&setup(PotentialSpec::Harmonic { a }, l, k));
            assert!((p.w - 2.0).abs() < 1e-13);
            assert!((p.beta + (2.0 * k as f64 + 1.5)).abs() < 1e-13);
            assert!((p.lbar - (2.0 * k as f64 + l + 1.5)).abs() < 1e-13);
            assert!((a * p.q0 * p.q0 - p.lbar).abs() < 1e-12 * p.lbar);
        }
    }

    #[test]
    fn npo_frequency_tends_to_two_for_small_b() {
        let p = single(&setup(PotentialSpec::Npo { a0: 1.0, a: 5.0, b: 1e-9 }, 1.0, 0));
        assert!((p.w - 2.0).abs() < 1e-6);
    }

    #[test]
    fn npo_frequency_matches_closed_form() {
        let (a, b) = (10.0, 0.7);
        let s = setup(PotentialSpec::Npo { a0: 1.0, a, b }, 2.0, 1).with_kinetic_scale(1.0);
        let p = single(&crate::expansion::canonicalize(&s));
        let u = b * p.q0 * p.q0;
        let closed = 2.0
            * ((1.0 + 3.0 * u + 3.0 * u * u + u * u * u + a)
                / ((1.0 + 2.0 * u + u * u + a) * (1.0 + u)))
                .sqrt();
        assert!((p.w - closed).abs() < 1e-13);
        let rhs = p.q0 * p.q0 / (1.0 + u) * (1.0 + a + 2.0 * u + u * u).sqrt();
        assert!((2.0 + 0.5 * (1.0 + 3.0 * p.w) - rhs).abs() < 1e-12 * rhs);
    }

    #[test]
    fn point_invariants() {
        let s = setup(PotentialSpec::CutoffCoulomb { c: 0.5 }, 1.0, 0);
        let p = single(&s);
        let m = &s.potential;
        assert!((p.lbar - (1.0 - p.beta)).abs() <= 1e-13);
        assert!(p.minimum_residual(m).unwrap().abs() <= 1e-12 * p.lbar);
        let b = compute_b(&p, m, 4).unwrap();
        assert!((p.w * p.w - 2.0 * b[2]).abs() <= 1e-12 * p.w * p.w);
        assert!(p.curvature(m).unwrap() > 0.0);
        assert!(b[1].abs() <= 1e-10 * b[2].abs());
    }

    #[test]
    fn b_coefficients_of_exact_limits() {
        let h = setup(PotentialSpec::Harmonic { a: 1.3 }, 2.0, 1);
        let p = single(&h);
        let b = compute_b(&p, &h.potential, 6).unwrap();
        assert!((b[2] - 2.0).abs() < 1e-13);
        for (n, bn) in b.iter().enumerate().skip(3) {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((bn - sign * (n as f64 + 1.0) / 2.0).abs() < 1e-13);
        }

        let c = setup(PotentialSpec::Coulomb { strength: 1.0 }, 0.0, 0);
        let p = single(&c);
        let b = compute_b(&p, &c.potential, 3).unwrap();
        assert!((b[2] - 0.5).abs() < 1e-13);
        assert!(b[1].abs() < 1e-13);
    }

    #[test]
    fn rejects_inconsistent_point() {
        let s = setup(PotentialSpec::Coulomb { strength: 1.0 }, 0.0, 0);
        let mut p = single(&s);
        p.q0 *= 1.01;
        assert!(matches!(
            compute_b(&p, &s.potential, 4),
            Err(PsletError::InconsistentClassicalPoint { .. })
        ));
    }

    #[test]
    fn repulsive_potential_has_no_bound_state() {
        // V' < 0 everywhere on the scan range
        let m = make_potential(PotentialSpec::Coulomb { strength: 1.0 }).unwrap().scaled(-1.0);
        let s = ProblemSetup::new(m, 0.0, 0);
        assert!(matches!(classical_candidates(&s), Err(PsletError::NoBoundState(_))));
    }
}
