//! Zero patterns of the impulse response and the lower bounds on the
//! dimension of positive realizations that they yield.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partial_fraction::{expand, PartialFraction};
use crate::polynomial::binomial;
use crate::transfer::TransferFunction;

/// Relative zero tolerance used when none is given.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;
/// Horizons beyond this are refused rather than scanned.
const MAX_HORIZON: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroPattern {
    /// Largest index with `t_k = 0`, or 0.
    pub k0: usize,
    pub zero_indices: Vec<usize>,
    /// Every `t_k` with `k > horizon` is certified positive.
    pub horizon: usize,
    /// Absolute threshold applied to the normalized values.
    pub tolerance: f64,
}

/// Smallest `K` such that `sum_{j,i} |c_j^(i)| C(k-1, i-1) |λ_j|^(k-i) < 1`
/// for every `k >= K`, for a normalized expansion.
pub fn positivity_horizon(pf: &PartialFraction) -> Result<usize> {
    let envelope = |k: usize| -> f64 {
        pf.terms
            .iter()
            .flat_map(|t| {
                let r = t.pole.norm();
                t.coeffs.iter().enumerate().map(move |(i, c)| {
                    if k > i {
                        c.norm() * binomial(k - 1, i) * r.powi((k - 1 - i) as i32)
                    } else {
                        0.0
                    }
                })
            })
            .sum()
    };
    // each summand is non-increasing once k |λ| <= k - i + 1
    let settled = |k: usize| {
        pf.terms.iter().all(|t| {
            let r = t.pole.norm();
            (0..t.order()).all(|i| k as f64 * r <= (k - i) as f64)
        })
    };
    let mut k = 1;
    while !(k > pf.terms.iter().map(|t| t.order()).max().unwrap_or(0)
        && settled(k)
        && envelope(k) < 1.0)
    {
        k += 1;
        if k > MAX_HORIZON {
            return Err(Error::NotApplicable(format!(
                "positivity horizon exceeds {MAX_HORIZON}"
            )));
        }
    }
    Ok(k)
}

/// Finds the zero entries of the impulse response of a positive-dominant
/// expansion, scanning up to the certified positivity horizon.
///
/// `tol` is an absolute threshold on the normalized values `t_k / (γ λ0^(k-1))`;
/// by default it is `1e-9 (1 + max |t_k|)` over the scanned window. A value
/// below `-tol` is reported as [`Error::NegativeImpulse`].
pub fn zero_pattern_partial_fraction(
    pf: &PartialFraction,
    tol: Option<f64>,
) -> Result<ZeroPattern> {
    let original = pf.denormalize();
    let normalized = original.normalize()?;
    let horizon = positivity_horizon(&normalized)?;
    let values = normalized.impulse_response(horizon).values;
    let tolerance = tol.unwrap_or_else(|| {
        DEFAULT_ZERO_TOL * (1.0 + values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    });
    let mut zero_indices = Vec::new();
    for (i, &t) in values.iter().enumerate() {
        let k = i + 1;
        if t < -tolerance {
            return Err(Error::NegativeImpulse {
                index: k,
                value: original.impulse_value(k),
            });
        }
        if t.abs() <= tolerance {
            zero_indices.push(k);
        }
    }
    Ok(ZeroPattern {
        k0: zero_indices.last().copied().unwrap_or(0),
        zero_indices,
        horizon,
        tolerance,
    })
}

pub fn zero_pattern(tf: &TransferFunction, tol: Option<f64>) -> Result<ZeroPattern> {
    zero_pattern_partial_fraction(&expand(tf)?, tol)
}

/// `ceil(k0 / (n - 1))` for a function whose stable poles all lie in `(0, λ0)`.
pub fn theo2_lower_bound(pf: &PartialFraction, k0: usize) -> Result<usize> {
    let lambda0 = pf.dominant_pole;
    if let Some(t) = pf
        .terms
        .iter()
        .find(|t| !(t.is_real() && t.pole.re > 0.0 && t.pole.re < lambda0))
    {
        return Err(Error::NotApplicable(format!(
            "pole {} is not real in (0, {lambda0})",
            t.pole
        )));
    }
    if k0 == 0 {
        return Ok(1);
    }
    let n1 = pf.stable_degree();
    if n1 == 0 {
        return Err(Error::NotApplicable(
            "a single dominant pole has no zeros in its impulse response".into(),
        ));
    }
    Ok(k0.div_ceil(n1).max(1))
}

/// Smallest `M >= 1` with `M(M+1)/2 - 1 + M^2 >= n`.
pub fn mn2_lower_bound(n: usize) -> usize {
    // 2 (M(M+1)/2 - 1 + M^2) = 3M^2 + M - 2
    let target = 2 * n as u128;
    let mut m: u128 = 1;
    while 3 * m * m + m - 2 < target {
        m += 1;
    }
    m as usize
}

/// Bases and polynomial degrees of `f(x) = sum_j p_j(x) λ_j^x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootBoundInput {
    bases: Vec<f64>,
    degrees: Vec<usize>,
}

impl RootBoundInput {
    /// Bases must be positive and strictly decreasing.
    pub fn new(bases: Vec<f64>, degrees: Vec<usize>) -> Result<Self> {
        if bases.is_empty() || bases.len() != degrees.len() {
            return Err(Error::InvalidRootBoundInput(format!(
                "{} bases for {} degrees",
                bases.len(),
                degrees.len()
            )));
        }
        if bases.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
            return Err(Error::InvalidRootBoundInput(
                "bases must be positive".into(),
            ));
        }
        if bases.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidRootBoundInput(
                "bases must be strictly decreasing".into(),
            ));
        }
        Ok(Self { bases, degrees })
    }

    pub fn bases(&self) -> &[f64] {
        &self.bases
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }
}

/// Maximum number of distinct real roots, `sum_j (n_j + 1) - 1`.
pub fn exp_poly_root_bound(input: &RootBoundInput) -> usize {
    input.degrees.iter().map(|n| n + 1).sum::<usize>() - 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub k0: usize,
    pub zero_indices: Vec<usize>,
    pub theo2: Option<usize>,
    pub mn2: Option<usize>,
    pub horizon: usize,
    pub tolerance: f64,
}

/// Zero pattern plus both bounds where they apply. The second bound needs
/// `t_{k0-1} = t_{k0} = 0` (with `t_0 = 0` for strictly proper functions).
pub fn bounds_report_partial_fraction(
    pf: &PartialFraction,
    tol: Option<f64>,
) -> Result<BoundsReport> {
    let zp = zero_pattern_partial_fraction(pf, tol)?;
    let theo2 = theo2_lower_bound(&pf.denormalize(), zp.k0).ok();
    let mn2 = (zp.k0 == 1 || (zp.k0 >= 2 && zp.zero_indices.contains(&(zp.k0 - 1))))
        .then(|| mn2_lower_bound(zp.k0));
    Ok(BoundsReport {
        k0: zp.k0,
        zero_indices: zp.zero_indices,
        theo2,
        mn2,
        horizon: zp.horizon,
        tolerance: zp.tolerance,
    })
}

pub fn bounds_report(tf: &TransferFunction, tol: Option<f64>) -> Result<BoundsReport> {
    bounds_report_partial_fraction(&expand(tf)?, tol)
}
