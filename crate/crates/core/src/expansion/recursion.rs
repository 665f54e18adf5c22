//! Half-order recursion for the logarithmic derivative of the wavefunction.
//!
//! With `Psi = F exp(U)` the shifted radial equation becomes a Riccati-type
//! identity. Expanding `U' = sum_j W_j(x) lbar^(-j/2)`,
//! `F = sum_j F_j(x) lbar^(-j/2)` and collecting the coefficient of
//! `lbar^(-j/2)` gives, for every half-order `j`,
//!
//! ```text
//! sum_{a+b=j} F_a S_b - sum_{a+b=j} F_a' W_b - F_j''/2 = 0,
//! S_b = -W_b'/2 - (1/2) sum_{c+d=b} W_c W_d + v_b - eps_b,
//! ```
//!
//! where `eps_j = q0^2 E^(j/2 - 1)` for even `j >= 2` and zero otherwise.
//! Because `W_0 = -w x` is fixed, the unknowns of order `j` enter linearly
//! and the system is triangular when equations are taken from the highest
//! power of `x` downwards. `W_j` has parity `(-1)^(j+1)`: its odd part is
//! `U^(j)` (coefficients `D_{m,j}`) and its even part is `G^(j-1)`
//! (coefficients `C_{m,j-1}`).

use crate::error::{PsletError, Result};
use crate::series::Poly;

use super::classical::ClassicalPoint;

/// Largest residual accepted at each order, relative to the largest
/// coefficient among the terms of that order's identity.
pub const RESIDUAL_TOLERANCE: f64 = 1e-11;

/// Perturbation polynomials `v^(0..=n_max)` in the oscillator coordinate.
///
/// Needs `b.len() >= n_max + 3`.
pub fn build_v(point: &ClassicalPoint, b: &[f64], n_max: usize) -> Vec<Poly> {
    assert!(b.len() >= n_max + 3, "need B up to index {}", n_max + 2);
    let shift = 2.0 * point.beta + 1.0;
    let quad = point.beta * (point.beta + 1.0) / 2.0;
    (0..=n_max)
        .map(|n| match n {
            0 => &Poly::monomial(b[2], 2) + &Poly::constant(shift / 2.0),
            1 => &Poly::monomial(-shift, 1) + &Poly::monomial(b[3], 3),
            _ => {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let mut coeffs = vec![0.0; n + 3];
                coeffs[n + 2] = b[n + 2];
                coeffs[n] = sign * shift * (n as f64 + 1.0) / 2.0;
                coeffs[n - 2] = sign * quad * (n as f64 - 1.0);
                Poly::new(coeffs)
            }
        })
        .collect()
}

/// Monic nodal polynomial of the leading oscillator `-(1/2) d^2 + w^2 x^2 / 2`
/// with `k` nodes.
pub fn init_f(k: usize, w: f64) -> Poly {
    let mut coeffs = vec![0.0; k + 1];
    coeffs[k] = 1.0;
    let mut p = k;
    while p >= 2 {
        p -= 2;
        coeffs[p] = (p as f64 + 2.0) * (p as f64 + 1.0) * coeffs[p + 2]
            / (2.0 * w * (p as f64 - k as f64));
    }
    Poly::new(coeffs)
}

/// Solved recursion data, indexed by half-order.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable {
    pub nodes: usize,
    /// `W_j`, the half-order pieces of `U'`.
    pub u_prime: Vec<Poly>,
    /// `F_j`; `F_0` is monic of degree `k`, later orders have degree `< k`.
    pub nodal: Vec<Poly>,
    /// `eps_j = q0^2 E^(j/2 - 1)` at even `j >= 2`, zero otherwise.
    pub eps: Vec<f64>,
    /// Largest residual coefficient of each solved order.
    pub residuals: Vec<f64>,
    /// Scale the residual of each order was measured against.
    pub residual_scales: Vec<f64>,
}

impl CoefficientTable {
    pub fn orders_solved(&self) -> usize {
        self.u_prime.len()
    }

    /// `D_{m,n}`: coefficient of `x^(2m-1)` in `U^(n)`.
    pub fn d(&self, m: usize, n: usize) -> f64 {
        if m == 0 {
            return 0.0;
        }
        self.u_prime.get(n).map_or(0.0, |w| w.coeff(2 * m - 1))
    }

    /// `C_{m,n}`: coefficient of `x^(2m)` in `G^(n)`.
    pub fn c(&self, m: usize, n: usize) -> f64 {
        self.u_prime.get(n + 1).map_or(0.0, |w| w.coeff(2 * m))
    }

    /// `a_p^(n)`: coefficient of `x^p` (`p < k`) in `F_n`.
    pub fn a(&self, p: usize, n: usize) -> f64 {
        if p >= self.nodes {
            return 0.0;
        }
        self.nodal.get(n).map_or(0.0, |f| f.coeff(p))
    }
}

/// Incremental solver: holds the known orders and solves the next one.
#[derive(Clone, Debug)]
pub struct Recursion {
    w: f64,
    v: Vec<Poly>,
    table: CoefficientTable,
}

impl Recursion {
    /// Starts the recursion and solves order zero: `W_0 = -w x`, `F_0` the
    /// oscillator nodal polynomial.
    pub fn new(point: &ClassicalPoint, k: usize, v: Vec<Poly>) -> Result<Self> {
        let mut rec = Recursion {
            w: point.w,
            v,
            table: CoefficientTable {
                nodes: k,
                u_prime: vec![Poly::monomial(-point.w, 1)],
                nodal: vec![init_f(k, point.w)],
                eps: vec![0.0],
                residuals: Vec::new(),
                residual_scales: Vec::new(),
            },
        };
        rec.check_residual(0)?;
        Ok(rec)
    }

    pub fn table(&self) -> &CoefficientTable {
        &self.table
    }

    pub fn into_table(self) -> CoefficientTable {
        self.table
    }

    pub fn max_order(&self) -> usize {
        self.v.len() - 1
    }

    /// Solves half-order `j`, which must be the next unsolved order.
    /// Returns `q0^2 E^(j/2 - 1)` at even `j`.
    pub fn solve_order(&mut self, j: usize) -> Result<Option<f64>> {
        let solved = self.table.orders_solved();
        if j != solved {
            return Err(PsletError::Contract(format!(
                "half-order {j} requested but orders 0..{solved} are solved"
            )));
        }
        if j > self.max_order() {
            return Err(PsletError::Arity {
                needed: j + 1,
                available: self.v.len(),
            });
        }
        if !(self.w > 0.0) || !self.w.is_finite() {
            return Err(PsletError::DegenerateOrder { order: j });
        }

        let k = self.table.nodes;
        let w = self.w;
        self.table.u_prime.push(Poly::zero());
        self.table.nodal.push(Poly::zero());
        self.table.eps.push(0.0);
        let (known, _) = self.identity(j);

        let f0 = self.table.nodal[0].clone();
        let top = (k + j + 2).max(known.degree().unwrap_or(0));
        let w_parity = (j + 1) % 2;
        let f_parity = (k + j) % 2;
        let mut wj = vec![0.0; j + 2];
        let mut fj = vec![0.0; k];
        let mut eps = 0.0;

        for power in (0..=top).rev() {
            let partial = linear_part(&f0, k, w, &wj, &fj, eps);
            let r = known.coeff(power) + partial.coeff(power);
            if power > k {
                let m = power - k - 1;
                if m < wj.len() && m % 2 == w_parity {
                    wj[m] = -r / w;
                }
            } else if power == k {
                if j % 2 == 0 {
                    eps = r;
                }
            } else if power % 2 == f_parity {
                fj[power] = -r / ((power as f64 - k as f64) * w);
            }
        }

        self.table.u_prime[j] = Poly::new(wj);
        self.table.nodal[j] = Poly::new(fj);
        self.table.eps[j] = eps;
        self.check_residual(j)?;
        Ok((j % 2 == 0).then_some(eps))
    }

    /// Solves every order up to and including `j_max`.
    pub fn solve_through(&mut self, j_max: usize) -> Result<()> {
        for j in self.table.orders_solved()..=j_max {
            self.solve_order(j)?;
        }
        Ok(())
    }

    fn check_residual(&mut self, j: usize) -> Result<()> {
        let (residual, scale) = self.identity(j);
        let norm = residual.max_abs();
        let limit = RESIDUAL_TOLERANCE * scale.max(f64::MIN_POSITIVE);
        self.table.residuals.push(norm);
        self.table.residual_scales.push(scale);
        if norm > limit || !norm.is_finite() {
            return Err(PsletError::RecursionInconsistency {
                order: j,
                norm,
                limit,
            });
        }
        Ok(())
    }

    /// The order-`j` identity evaluated with the current table, together
    /// with the largest coefficient among its individual terms.
    fn identity(&self, j: usize) -> (Poly, f64) {
        let t = &self.table;
        let mut scale: f64 = 0.0;
        let mut acc = vec![0.0; 0];
        let mut add = |p: &Poly, factor: f64| {
            if acc.len() < p.coeffs().len() {
                acc.resize(p.coeffs().len(), 0.0);
            }
            for (a, c) in acc.iter_mut().zip(p.coeffs()) {
                *a += factor * c;
                scale = scale.max(c.abs());
            }
        };
        for a in 0..=j {
            let b = j - a;
            let fa = &t.nodal[a];
            if fa.is_zero() {
                continue;
            }
            // F_a S_b, term by term
            add(&(fa * &t.u_prime[b].diff()), -0.5);
            for c in 0..=b {
                add(&(fa * &(&t.u_prime[c] * &t.u_prime[b - c])), -0.5);
            }
            add(&(fa * &self.v[b]), 1.0);
            if t.eps[b] != 0.0 {
                add(fa, -t.eps[b]);
            }
            add(&(&fa.diff() * &t.u_prime[b]), -1.0);
        }
        add(&t.nodal[j].diff().diff(), -0.5);
        (Poly::new(acc), scale)
    }
}

/// Linear action of the order-`j` unknowns on the identity, with the
/// order-zero operator reduced by `B_2 = w^2/2` and `beta` from the shift
/// condition.
fn linear_part(f0: &Poly, k: usize, w: f64, wj: &[f64], fj: &[f64], eps: f64) -> Poly {
    let wp = Poly::new(wj.to_vec());
    let fp = Poly::new(fj.to_vec());
    let x = Poly::monomial(1.0, 1);
    let u_term = &(&wp.diff().scale(-0.5) + &(&x * &wp).scale(w));
    let mut out = &(f0 * u_term) - &(&f0.diff() * &wp);
    out = &out + &fp.scale(-(k as f64) * w);
    out = &out + &(&x * &fp.diff()).scale(w);
    out = &out - &fp.diff().diff().scale(0.5);
    &out - &f0.scale(eps)
}
