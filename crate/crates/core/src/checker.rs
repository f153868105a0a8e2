//! Independent verification of realizations.
//!
//! [`markov_check`] compares `c^T A^{k-1} b` against the long-division
//! impulse response of the transfer function and never touches the
//! construction code. [`cone_check`] evaluates the residuals of
//! `F P = P A`, `P b = g`, `c^T = h^T P` for a claimed invariant cone.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::realization::Realization;
use crate::transfer::TransferFunction;

/// Default relative tolerance for Markov-parameter agreement.
pub const MARKOV_TOL: f64 = 1e-6;

/// Verification horizon `max(100, 3 M)`.
pub fn default_horizon(dim: usize) -> usize {
    100.max(3 * dim)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub horizon: usize,
    /// `max_k |r_k - t_k| / (1 + |t_k|)`.
    pub max_relative_error: f64,
    /// 1-based index attaining the maximum (0 when the horizon is empty).
    pub worst_index: usize,
    pub nonnegative: bool,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn markov_check(
    real: &Realization,
    tf: &TransferFunction,
    horizon: usize,
    tol: f64,
) -> VerificationReport {
    markov_check_values(real, &tf.impulse_response(horizon).values, tol)
}

/// [`markov_check`] against an explicit reference sequence `t_1, t_2, ...`.
pub fn markov_check_values(real: &Realization, expected: &[f64], tol: f64) -> VerificationReport {
    let horizon = expected.len();
    let actual = real.markov_parameters(horizon);
    let mut max_relative_error: f64 = 0.0;
    let mut worst_index = 0;
    for (k, (r, t)) in actual.iter().zip(expected).enumerate() {
        let err = (r - t).abs() / (1.0 + t.abs());
        if err > max_relative_error || !err.is_finite() {
            max_relative_error = if err.is_finite() { err } else { f64::INFINITY };
            worst_index = k + 1;
        }
    }
    let nonnegative = real.is_nonnegative();
    VerificationReport {
        horizon,
        max_relative_error,
        worst_index,
        nonnegative,
        tolerance: tol,
        pass: nonnegative && max_relative_error < tol,
    }
}

/// Residuals of the cone equations, all measured in the max norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub invariance_residual: f64,
    pub input_residual: f64,
    pub output_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn max_abs<'a>(it: impl Iterator<Item = &'a f64>) -> f64 {
    it.fold(0.0, |m, v| m.max(v.abs()))
}

/// Checks that the columns of `p` span an `f`-invariant cone realizing `triple`.
pub fn cone_check(
    f: &DMatrix<f64>,
    p: &DMatrix<f64>,
    g: &DVector<f64>,
    h: &DVector<f64>,
    triple: &Realization,
    tol: f64,
) -> Result<ConeReport> {
    let n = f.nrows();
    let m = triple.dim();
    if f.ncols() != n || p.nrows() != n || p.ncols() != m || g.len() != n || h.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "F {}x{}, P {}x{}, g {}, h {}, realization {m}",
            f.nrows(),
            f.ncols(),
            p.nrows(),
            p.ncols(),
            g.len(),
            h.len()
        )));
    }
    let invariance = f * p - p * triple.a();
    let input = p * triple.b() - g;
    let output = triple.c() - p.transpose() * h;
    let invariance_residual = max_abs(invariance.iter());
    let input_residual = max_abs(input.iter());
    let output_residual = max_abs(output.iter());
    Ok(ConeReport {
        invariance_residual,
        input_residual,
        output_residual,
        tolerance: tol,
        pass: invariance_residual < tol && input_residual < tol && output_residual < tol,
    })
}
