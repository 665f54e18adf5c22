//! Padé approximants for summing the `1/lbar` energy series.
//!
//! `[N, M]` denotes a denominator of degree `N` and a numerator of degree
//! `M`; the approximant matches the first `N + M + 1` series coefficients.

use serde::Serialize;

use crate::error::{PsletError, Result};
use crate::series::Poly;

/// Condition estimate above which the denominator system is considered
/// defective.
pub const MAX_CONDITION: f64 = 1e14;

const POLE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PadeApproximant {
    pub numerator: Poly,
    /// Constant term is always 1.
    pub denominator: Poly,
    /// 1-norm condition estimate of the (equilibrated) denominator system.
    pub condition: f64,
}

impl PadeApproximant {
    pub fn eval(&self, z: f64) -> Result<f64> {
        eval_pade(self, z)
    }
}

/// Fits the `[n, m]` approximant (denominator degree `n`, numerator
/// degree `m`) to `coeffs`.
pub fn fit_pade(coeffs: &[f64], n: usize, m: usize) -> Result<PadeApproximant> {
    let needed = n + m + 1;
    if coeffs.len() < needed {
        return Err(PsletError::Arity {
            needed,
            available: coeffs.len(),
        });
    }
    let c = |i: isize| if i < 0 { 0.0 } else { coeffs[i as usize] };

    if coeffs[..needed].iter().all(|&x| x == 0.0) {
        return Ok(PadeApproximant {
            numerator: Poly::zero(),
            denominator: Poly::constant(1.0),
            condition: 1.0,
        });
    }

    let mut q = vec![1.0];
    let mut condition = 1.0;
    if n > 0 {
        let mut a = vec![vec![0.0; n]; n];
        let mut rhs = vec![0.0; n];
        for r in 1..=n {
            for i in 1..=n {
                a[r - 1][i - 1] = c((m + r) as isize - i as isize);
            }
            rhs[r - 1] = -c((m + r) as isize);
        }
        let (solution, cond) = solve_dense(a, rhs);
        condition = cond;
        if !(cond <= MAX_CONDITION) {
            return Err(PsletError::DegeneratePade {
                denominator: n,
                numerator: m,
                condition: cond,
            });
        }
        q.extend(solution);
    }

    let p: Vec<f64> = (0..=m)
        .map(|k| (0..=k.min(n)).map(|i| q[i] * c((k - i) as isize)).sum())
        .collect();
    Ok(PadeApproximant {
        numerator: Poly::new(p),
        denominator: Poly::new(q),
        condition,
    })
}

/// Fits `[n, m]`, stepping down along the diagonal to `[n-1, m-1]`, ... when
/// the table is defective. Returns the approximant and the order used.
pub fn fit_pade_with_fallback(
    coeffs: &[f64],
    n: usize,
    m: usize,
) -> Result<(PadeApproximant, (usize, usize))> {
    let (mut n, mut m) = (n, m);
    loop {
        match fit_pade(coeffs, n, m) {
            Ok(p) => return Ok((p, (n, m))),
            Err(PsletError::DegeneratePade { .. }) if n > 0 && m > 0 => {
                n -= 1;
                m -= 1;
            }
            Err(e) => return Err(e),
        }
    }
}

pub fn eval_pade(p: &PadeApproximant, z: f64) -> Result<f64> {
    let den = p.denominator.eval(z);
    if den.abs() <= POLE_TOLERANCE {
        return Err(PsletError::Pole { z });
    }
    Ok(p.numerator.eval(z) / den)
}

/// Gaussian elimination with partial pivoting on the row- and
/// column-equilibrated system; returns the solution and a 1-norm
/// condition estimate of the equilibrated matrix.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> (Vec<f64>, f64) {
    let n = b.len();
    for (row, rhs) in a.iter_mut().zip(b.iter_mut()) {
        let s = row.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if s > 0.0 {
            row.iter_mut().for_each(|x| *x /= s);
            *rhs /= s;
        }
    }
    let mut col_scale = vec![1.0; n];
    for (j, cs) in col_scale.iter_mut().enumerate() {
        let s = a.iter().fold(0.0f64, |m, row| m.max(row[j].abs()));
        if s > 0.0 {
            *cs = s;
            a.iter_mut().for_each(|row| row[j] /= s);
        }
    }
    let norm1 = (0..n)
        .map(|j| a.iter().map(|row| row[j].abs()).sum::<f64>())
        .fold(0.0, f64::max);

    // LU with partial pivoting, applied to [A | b | I]
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col] == 0.0 {
            return (vec![f64::NAN; n], f64::INFINITY);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        inv.swap(col, pivot);
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
            for k in 0..n {
                inv[r][k] -= f * inv[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in 0..n {
        x[i] = b[i] / a[i][i];
        for k in 0..n {
            inv[i][k] /= a[i][i];
        }
    }
    let inv_norm1 = (0..n)
        .map(|j| inv.iter().map(|row| row[j].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    for (xi, s) in x.iter_mut().zip(&col_scale) {
        *xi /= s;
    }
    (x, norm1 * inv_norm1)
}

/// One approximant of a Padé table evaluated at the expansion point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PadeEntry {
    pub denominator: usize,
    pub numerator: usize,
    /// Order actually used after any fallback.
    pub used: (usize, usize),
    /// `offset + P(z)`, or `None` when the entry is degenerate or has a pole.
    pub value: Option<f64>,
    pub condition: f64,
}

impl PadeEntry {
    pub fn label(&self) -> String {
        format!("E[{},{}]", self.denominator, self.numerator)
    }
}

/// Evaluates `[n, m]` (with diagonal fallback) at `z` and adds `offset`.
pub fn pade_entry(coeffs: &[f64], z: f64, offset: f64, n: usize, m: usize) -> Result<PadeEntry> {
    if coeffs.len() < n + m + 1 {
        return Err(PsletError::Arity {
            needed: n + m + 1,
            available: coeffs.len(),
        });
    }
    Ok(match fit_pade_with_fallback(coeffs, n, m) {
        Ok((p, used)) => PadeEntry {
            denominator: n,
            numerator: m,
            used,
            value: eval_pade(&p, z).ok().map(|v| offset + v),
            condition: p.condition,
        },
        Err(_) => PadeEntry {
            denominator: n,
            numerator: m,
            used: (n, m),
            value: None,
            condition: f64::INFINITY,
        },
    })
}

/// Stability diagnostics for a series evaluated at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PadeDiagnostics {
    /// `E[1,1], E[1,2], E[2,2], E[2,3], ...` as far as the terms allow.
    pub sequence: Vec<PadeEntry>,
    /// Relative differences between successive finite entries of `sequence`.
    pub sequence_differences: Vec<f64>,
    pub stable: bool,
    /// `E_1 = offset`, `E_n = offset + sum_{i < n-1} c_i z^i`.
    pub partial_sums: Vec<f64>,
    pub partial_sum_differences: Vec<f64>,
    /// Smallest `n` with every `E_m`, `m >= n`, within the tolerance of the
    /// last partial sum.
    pub stabilization_index: usize,
    pub tolerance: f64,
}

/// Relative difference guarded against a zero scale.
pub fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Builds the diagonal and super-diagonal Padé sequence and the partial-sum
/// stabilization report for the series `sum c_i z^i` shifted by `offset`.
pub fn pade_table(coeffs: &[f64], z: f64, offset: f64, tolerance: f64) -> PadeDiagnostics {
    let mut sequence = Vec::new();
    let mut n = 1;
    while 2 * n + 1 <= coeffs.len() {
        sequence.extend(pade_entry(coeffs, z, offset, n, n).ok());
        if 2 * n + 2 <= coeffs.len() {
            sequence.extend(pade_entry(coeffs, z, offset, n, n + 1).ok());
        }
        n += 1;
    }
    let finite: Vec<f64> = sequence.iter().filter_map(|e| e.value).collect();
    let sequence_differences: Vec<f64> = finite
        .windows(2)
        .map(|w| relative_difference(w[0], w[1]))
        .collect();
    let stable = !finite.is_empty()
        && finite.len() == sequence.len()
        && sequence_differences
            .iter()
            .rev()
            .take(2)
            .all(|&d| d <= tolerance);

    let mut partial_sums = Vec::with_capacity(coeffs.len() + 1);
    let mut acc = offset;
    let mut zn = 1.0;
    partial_sums.push(acc);
    for c in coeffs {
        acc += c * zn;
        zn *= z;
        partial_sums.push(acc);
    }
    let partial_sum_differences = partial_sums
        .windows(2)
        .map(|w| relative_difference(w[0], w[1]))
        .collect();
    let last = *partial_sums.last().unwrap();
    let mut stabilization_index = partial_sums.len();
    for (i, s) in partial_sums.iter().enumerate().rev() {
        if relative_difference(*s, last) <= tolerance {
            stabilization_index = i + 1;
        } else {
            break;
        }
    }

    PadeDiagnostics {
        sequence,
        sequence_differences,
        stable,
        partial_sums,
        partial_sum_differences,
        stabilization_index,
        tolerance,
    }
}
