//! Wavefunctions `Psi = F(x) exp(U(x))` rebuilt from the recursion table.

use std::io::Write;
use std::sync::OnceLock;

use crate::error::{PsletError, Result};
use crate::expansion::{canonicalize, ClassicalPoint, CoefficientTable, Expansion, ProblemSetup};
use crate::oracle::count_sign_changes;
use crate::series::Poly;

/// Evaluations with `|y| >= TRUST_RADIUS` are extrapolations.
pub const TRUST_RADIUS: f64 = 1.0;
/// Half-orders summed by default: deep enough for 1e-8 log-derivatives on
/// `|y| < 0.5`, shallow enough that rounding amplified by the recursion
/// stays small.
pub const DEFAULT_ORDERS: usize = 28;
const GL_NODES: usize = 64;
const QUADRATURE_TOLERANCE: f64 = 1e-10;
const TAIL_FLOOR: f64 = 1e-16;

/// A value of `Psi` and whether it lies inside the trusted region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub value: f64,
    pub trusted: bool,
}

#[derive(Clone, Debug)]
pub struct WavefunctionSeries {
    pub point: ClassicalPoint,
    /// Half-orders summed.
    pub orders: usize,
    /// `N` with `integral |N Psi|^2 dq = 1`; `1` until normalized.
    pub normalization: f64,
    /// The canonical problem the table belongs to.
    canonical: ProblemSetup,
    /// `U(x)`, with `U(0) = 0`.
    u: Poly,
    /// `U'(x)`.
    u_prime: Poly,
    /// `F(x)`.
    f: Poly,
}

/// Sums `W_j` and `F_j` through half-order `orders` with weights
/// `lbar^(-j/2)`.
pub fn reconstruct(
    point: &ClassicalPoint,
    table: &CoefficientTable,
    canonical: &ProblemSetup,
    orders: usize,
) -> Result<WavefunctionSeries> {
    if table.orders_solved() <= orders {
        return Err(PsletError::Arity {
            needed: orders + 1,
            available: table.orders_solved(),
        });
    }
    let h = point.lbar.sqrt().recip();
    let mut u_prime = Poly::zero();
    let mut f = Poly::zero();
    let mut weight = 1.0;
    for j in 0..=orders {
        u_prime = &u_prime + &table.u_prime[j].scale(weight);
        f = &f + &table.nodal[j].scale(weight);
        weight *= h;
    }
    Ok(WavefunctionSeries {
        point: *point,
        orders,
        normalization: 1.0,
        canonical: *canonical,
        u: u_prime.integrate(),
        u_prime,
        f,
    })
}

impl WavefunctionSeries {
    pub fn from_expansion(expansion: &Expansion, orders: usize) -> Result<Self> {
        reconstruct(&expansion.point, &expansion.table, &expansion.canonical, orders)
    }

    /// `x = lbar^(1/2) (q - q0) / q0`.
    pub fn x_of(&self, q: f64) -> f64 {
        self.point.lbar.sqrt() * (q - self.point.q0) / self.point.q0
    }

    /// `y = (q - q0) / q0`.
    pub fn y_of(&self, q: f64) -> f64 {
        (q - self.point.q0) / self.point.q0
    }

    pub fn q_of_y(&self, y: f64) -> f64 {
        self.point.q0 * (1.0 + y)
    }

    pub fn trusted(&self, q: f64) -> bool {
        self.y_of(q).abs() < TRUST_RADIUS
    }

    /// `N F(x) exp(U(x))`.
    pub fn evaluate(&self, q: f64) -> Sample {
        let x = self.x_of(q);
        Sample {
            value: self.normalization * self.f.eval(x) * self.u.eval(x).exp(),
            trusted: self.trusted(q),
        }
    }

    /// `d ln Psi / dq`.
    pub fn log_derivative(&self, q: f64) -> f64 {
        let x = self.x_of(q);
        let dx = self.point.lbar.sqrt() / self.point.q0;
        dx * (self.u_prime.eval(x) + self.f.diff().eval(x) / self.f.eval(x))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        WavefunctionSeries {
            normalization: self.normalization * factor,
            ..self.clone()
        }
    }

    /// The trusted interval outside which `|Psi|^2 < 1e-16` of its value at
    /// `q0`. Fails if `Psi` stops decaying or the decay is not reached
    /// inside the trust radius.
    pub fn support(&self) -> Result<(f64, f64)> {
        let peak = self.evaluate(self.point.q0).value.powi(2);
        if !(peak > 0.0) || !peak.is_finite() {
            return Err(PsletError::TruncationUnreliable(
                "wavefunction vanishes or is not finite at q0".into(),
            ));
        }
        let step = 0.01 / self.point.lbar.sqrt();
        let edge = |dir: f64| -> Result<f64> {
            let mut y = 0.0;
            let mut last = peak;
            let mut decaying = false;
            loop {
                y += dir * step;
                let q = self.q_of_y(y);
                if y.abs() >= TRUST_RADIUS || q <= 0.0 {
                    return Err(PsletError::TruncationUnreliable(format!(
                        "|Psi|^2 has not fallen below {TAIL_FLOOR:e} of its peak before y = {:.3}",
                        y
                    )));
                }
                let v = self.evaluate(q).value.powi(2);
                if v < TAIL_FLOOR * peak {
                    return Ok(q);
                }
                // nodes make |Psi| dip; only a rise well past the turning
                // region counts as a growing tail
                if decaying && v > last && v > 1e-6 * peak && self.x_of(q).abs() > 6.0 {
                    return Err(PsletError::TruncationUnreliable(format!(
                        "non-decaying tail at y = {y:.3}"
                    )));
                }
                decaying |= v < last;
                last = v;
            }
        };
        Ok((edge(-1.0)?, edge(1.0)?))
    }

    /// `integral |Psi|^2 dq` over the support.
    pub fn norm_squared(&self) -> Result<f64> {
        let (a, b) = self.support()?;
        let mut panels = 1;
        let mut previous = integrate(|q| self.evaluate(q).value.powi(2), a, b, panels);
        loop {
            panels *= 2;
            let current = integrate(|q| self.evaluate(q).value.powi(2), a, b, panels);
            if (current - previous).abs() <= QUADRATURE_TOLERANCE * current.abs() {
                return Ok(current);
            }
            if panels >= 1 << 12 {
                return Err(PsletError::TruncationUnreliable(
                    "quadrature did not converge".into(),
                ));
            }
            previous = current;
        }
    }

    /// The factor `N` with `integral |N Psi|^2 dq = 1` for the current `Psi`.
    pub fn normalization_constant(&self) -> Result<f64> {
        Ok(self.norm_squared()?.sqrt().recip())
    }

    /// Folds the normalization constant into `Psi` and returns the total
    /// normalization.
    pub fn normalize(&mut self) -> Result<f64> {
        self.normalization *= self.normalization_constant()?;
        Ok(self.normalization)
    }

    /// `max |H Psi - E Psi| / max |Psi|` over `grid`, with the second
    /// derivative from 5-point differences. `energy` is in the units of
    /// `setup`.
    pub fn residual(&self, setup: &ProblemSetup, energy: f64, grid: &[f64]) -> Result<f64> {
        let canonical = canonicalize(setup);
        let e = energy / setup.energy_factor();
        let model = &canonical.potential;
        let centrifugal = canonical.angular * (canonical.angular + 1.0);
        let h = 0.01 * self.point.q0 / self.point.lbar.sqrt();
        let psi = |q: f64| self.evaluate(q).value;
        let mut worst = 0.0f64;
        let mut peak = 0.0f64;
        for &q in grid {
            let d2 = (-psi(q + 2.0 * h) + 16.0 * psi(q + h) - 30.0 * psi(q) + 16.0 * psi(q - h)
                - psi(q - 2.0 * h))
                / (12.0 * h * h);
            let p = psi(q);
            let hp = -0.5 * d2 + (0.5 * centrifugal / (q * q) + model.eval(q)?) * p;
            worst = worst.max((hp - e * p).abs());
            peak = peak.max(p.abs());
        }
        Ok(if peak > 0.0 { worst / peak } else { 0.0 })
    }

    /// Sign changes of `Psi` on a fine grid over the trusted region.
    pub fn count_nodes(&self) -> usize {
        let lo = (1.0 - 0.99 * TRUST_RADIUS).max(1e-6);
        let hi = 1.0 + 0.99 * TRUST_RADIUS;
        let n = 4000;
        let values: Vec<f64> = (0..=n)
            .map(|i| {
                let q = self.point.q0 * (lo + (hi - lo) * i as f64 / n as f64);
                self.evaluate(q).value
            })
            .filter(|v| v.is_finite())
            .collect();
        count_sign_changes(&values)
    }

    /// Writes `q, psi, psi2` rows for `points` equally spaced samples of
    /// `[q_lo, q_hi]`.
    pub fn write_csv<W: Write>(&self, out: &mut W, q_lo: f64, q_hi: f64, points: usize) -> Result<()> {
        let io = |e: std::io::Error| PsletError::Io(e.to_string());
        writeln!(out, "q,psi,psi2").map_err(io)?;
        let n = points.max(2) - 1;
        for i in 0..=n {
            let q = q_lo + (q_hi - q_lo) * i as f64 / n as f64;
            let v = self.evaluate(q).value;
            writeln!(out, "{q:.12e},{v:.12e},{:.12e}", v * v).map_err(io)?;
        }
        Ok(())
    }

    pub fn canonical(&self) -> &ProblemSetup {
        &self.canonical
    }
}

/// Composite Gauss-Legendre rule with `panels` equal panels.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = gauss_legendre();
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let half = 0.5 * width;
        total += nodes
            .iter()
            .zip(weights)
            .map(|(t, w)| w * f(mid + half * t))
            .sum::<f64>()
            * half;
    }
    total
}

/// 64-point Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_NODES;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, t);
                for m in 2..=n {
                    let p2 = ((2 * m - 1) as f64 * t * p1 - (m - 1) as f64 * p0) / m as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
                let dt = p1 / dp;
                t -= dt;
                if dt.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - t * t) * dp * dp);
            nodes[i] = -t;
            nodes[n - 1 - i] = t;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        (nodes, weights)
    })
}
