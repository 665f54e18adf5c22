//! Radial potentials: values, and Taylor coefficients to arbitrary order
//! built by composing truncated-series primitives on the closed forms.

use serde::{Deserialize, Serialize};

use crate::error::{PsletError, Result};
use crate::series::TaylorSeries;

/// Built-in radial potential families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `A^2 q^2 / 2`
    Harmonic { a: f64 },
    /// `-strength / q`
    Coulomb { strength: f64 },
    /// `a0 q^2 + a q^2 / (1 + b q^2)`
    Npo { a0: f64, a: f64, b: f64 },
    /// `-1 / (q + c)`
    CutoffCoulomb { c: f64 },
    /// `-strength / q + mu ln(q^2 + q)`
    CoulombLog { strength: f64, mu: f64 },
}

impl PotentialSpec {
    pub fn name(&self) -> &'static str {
        match self {
            PotentialSpec::Harmonic { .. } => "harmonic",
            PotentialSpec::Coulomb { .. } => "coulomb",
            PotentialSpec::Npo { .. } => "npo",
            PotentialSpec::CutoffCoulomb { .. } => "cutoff_coulomb",
            PotentialSpec::CoulombLog { .. } => "coulomb_log",
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn finite(name: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(PsletError::config(name, format!("must be finite, got {v}")))
            }
        }
        fn positive(name: &str, v: f64) -> Result<()> {
            finite(name, v)?;
            if v > 0.0 {
                Ok(())
            } else {
                Err(PsletError::config(name, format!("must be > 0, got {v}")))
            }
        }
        match *self {
            PotentialSpec::Harmonic { a } => positive("A", a),
            PotentialSpec::Coulomb { strength } => positive("strength", strength),
            PotentialSpec::Npo { a0, a, b } => {
                finite("a", a)?;
                positive("b", b)?;
                finite("a0", a0)?;
                if a0 < 0.0 {
                    return Err(PsletError::config("a0", format!("must be >= 0, got {a0}")));
                }
                Ok(())
            }
            PotentialSpec::CutoffCoulomb { c } => positive("c", c),
            PotentialSpec::CoulombLog { strength, mu } => {
                positive("strength", strength)?;
                finite("mu", mu)
            }
        }
    }

    /// NPO criticality ratio `sqrt(a) / b`; `None` for other families.
    pub fn npo_critical_ratio(&self) -> Option<f64> {
        match *self {
            PotentialSpec::Npo { a, b, .. } if a >= 0.0 => Some(a.sqrt() / b),
            _ => None,
        }
    }
}

/// A potential ready for evaluation: `factor * V_spec(q)`.
///
/// The factor is 1 for a freshly built model and absorbs the kinetic-scale
/// rescaling when a problem is put in canonical form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialModel {
    spec: PotentialSpec,
    factor: f64,
}

pub fn make_potential(spec: PotentialSpec) -> Result<PotentialModel> {
    spec.validate()?;
    Ok(PotentialModel { spec, factor: 1.0 })
}

impl PotentialModel {
    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn factor(&self) -> f64 {
        self.factor
    }

    /// The same potential multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> PotentialModel {
        PotentialModel {
            spec: self.spec,
            factor: self.factor * factor,
        }
    }

    /// True when the potential diverges at the origin.
    pub fn singular_at_origin(&self) -> bool {
        matches!(
            self.spec,
            PotentialSpec::Coulomb { .. } | PotentialSpec::CoulombLog { .. }
        )
    }

    pub fn check_domain(&self, q: f64) -> Result<()> {
        let fail = |reason: &str| {
            Err(PsletError::Domain {
                q,
                reason: reason.to_string(),
            })
        };
        if !q.is_finite() {
            return fail("q must be finite");
        }
        match self.spec {
            PotentialSpec::Coulomb { .. } if q <= 0.0 => fail("requires q > 0"),
            PotentialSpec::CoulombLog { .. } if q <= 0.0 || q * q + q <= 0.0 => {
                fail("requires q > 0 and q^2 + q > 0")
            }
            PotentialSpec::CutoffCoulomb { c } if q + c <= 0.0 => fail("requires q + c > 0"),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, q: f64) -> Result<f64> {
        self.check_domain(q)?;
        let v = match self.spec {
            PotentialSpec::Harmonic { a } => 0.5 * a * a * q * q,
            PotentialSpec::Coulomb { strength } => -strength / q,
            PotentialSpec::Npo { a0, a, b } => a0 * q * q + a * q * q / (1.0 + b * q * q),
            PotentialSpec::CutoffCoulomb { c } => -1.0 / (q + c),
            PotentialSpec::CoulombLog { strength, mu } => -strength / q + mu * (q * q + q).ln(),
        };
        Ok(self.factor * v)
    }

    /// Taylor coefficients `V^(n)(q0)/n!` for `n = 0..=order`.
    pub fn taylor_at(&self, q0: f64, order: usize) -> Result<TaylorSeries> {
        self.check_domain(q0)?;
        let q = TaylorSeries::variable(q0, order);
        let series = match self.spec {
            PotentialSpec::Harmonic { a } => q.mul(&q)?.scale(0.5 * a * a),
            PotentialSpec::Coulomb { strength } => q.recip()?.scale(-strength),
            PotentialSpec::Npo { a0, a, b } => {
                let q2 = q.mul(&q)?;
                let shell = q2.scale(b).offset(1.0).recip()?.scale(a).offset(a0);
                q2.mul(&shell)?
            }
            PotentialSpec::CutoffCoulomb { c } => q.offset(c).recip()?.scale(-1.0),
            PotentialSpec::CoulombLog { strength, mu } => {
                let coulomb = q.recip()?.scale(-strength);
                let log = q.mul(&q)?.add(&q)?.ln()?.scale(mu);
                coulomb.add(&log)?
            }
        };
        Ok(series.scale(self.factor))
    }

    /// First and second derivatives at `q`.
    pub fn derivatives(&self, q: f64) -> Result<(f64, f64)> {
        let t = self.taylor_at(q, 2)?;
        Ok((t.derivative(1), t.derivative(2)))
    }

    /// `q V''(q) / V'(q)`, exact for the pure power laws, where the generic
    /// quotient is off by an ulp that the recursion amplifies.
    pub fn curvature_ratio(&self, q: f64) -> Result<f64> {
        match self.spec {
            PotentialSpec::Harmonic { .. } => self.check_domain(q).map(|_| 1.0),
            PotentialSpec::Coulomb { .. } => self.check_domain(q).map(|_| -2.0),
            _ => {
                let (v1, v2) = self.derivatives(q)?;
                Ok(q * v2 / v1)
            }
        }
    }
}
