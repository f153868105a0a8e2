//! The shift-and-construct loop: shift `H_m(z) = z H_{m-1}(z) - t_{m-1}`
//! until the dominant budget covers every pole block, realize `H_m` with
//! blocks, then prepend the delay chain for `t_1..t_{m-1}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blocks::{
    assemble, budget, build_blocks, hadjicostis_lift, per_pole_total, Block, BlockKind, BlockSpec,
    BudgetMode, BudgetPlan, DEFAULT_ALPHA,
};
use crate::checker::{default_horizon, markov_check_values, VerificationReport, MARKOV_TOL};
use crate::error::{Error, Result};
use crate::geometry::classify;
use crate::partial_fraction::{expand, first_negative, iteration_estimate, PartialFraction};
use crate::realization::Realization;
use crate::transfer::TransferFunction;

/// Number of impulse values scanned for a negative witness when the
/// dominant residue itself is not positive.
const WITNESS_SCAN: usize = 10_000;
/// Horizon and tolerance of the base-realization consistency check.
const BASE_CHECK_TERMS: usize = 50;
const BASE_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RealizeOptions {
    pub mode: BudgetMode,
    pub alpha: f64,
    /// Impulse values below `-negativity_tol` times the coefficient mass of
    /// the normalized input are treated as genuinely negative.
    pub negativity_tol: f64,
    pub max_shifts: Option<usize>,
    pub horizon: Option<usize>,
    pub verify_tol: f64,
}

impl Default for RealizeOptions {
    fn default() -> Self {
        Self {
            mode: BudgetMode::PerPole,
            alpha: DEFAULT_ALPHA,
            negativity_tol: 1e-10,
            max_shifts: None,
            horizon: None,
            verify_tol: MARKOV_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSummary {
    pub kind: BlockKind,
    pub dimension: usize,
    pub dominant_share: f64,
    pub pole: Option<Complex64>,
    pub polygon: Option<usize>,
    /// Share the construction needs, `2^{3/2} η / (α cos(π/m))`.
    pub proof_threshold: Option<f64>,
    /// The smaller `2η / cos(π/m)` figure, for comparison only.
    pub statement_threshold: Option<f64>,
}

impl BlockSummary {
    fn of(block: &Block) -> Self {
        let (pole, polygon, proof, statement) = match block.spec {
            BlockSpec::PositivePole { pole, .. } | BlockSpec::RealPole { pole, .. } => {
                (Some(Complex64::new(pole, 0.0)), None, None, None)
            }
            BlockSpec::ComplexPair { pair, alpha } => {
                let cos = (std::f64::consts::PI / pair.polygon as f64).cos();
                (
                    Some(pair.pole()),
                    Some(pair.polygon),
                    Some(crate::blocks::pair_threshold(&pair, alpha)),
                    Some(2.0 * pair.magnitude / cos),
                )
            }
            BlockSpec::DominantRemainder => (None, None, None, None),
        };
        Self {
            kind: block.kind(),
            dimension: block.dim(),
            dominant_share: block.dominant_share,
            pole,
            polygon,
            proof_threshold: proof,
            statement_threshold: statement,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmTrace {
    pub mode: BudgetMode,
    /// `m - 1`.
    pub shifts_performed: usize,
    /// `t_1..t_{m-1}` of the original function.
    pub prefix: Vec<f64>,
    pub iteration_cap: Option<usize>,
    /// Per-pole budget total of `H_1, H_2, ..., H_m` (normalized).
    pub budget_history: Vec<f64>,
    pub plan: Option<BudgetPlan>,
    pub blocks: Vec<BlockSummary>,
    pub predicted_dimension: Option<usize>,
    pub pre_lift_dimension: usize,
    pub final_dimension: usize,
    /// `γ` and `λ0` of the expansion; absent when a base realization was supplied.
    pub dominant_residue: Option<f64>,
    pub dominant_pole: Option<f64>,
    pub verification: VerificationReport,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Realized {
        realization: Realization,
        trace: Box<AlgorithmTrace>,
    },
    /// `t_index = value < 0`, so no positive realization exists.
    NoPositiveRealization {
        index: usize,
        value: f64,
    },
    Unsupported {
        reason: String,
    },
    IterationCapExceeded {
        cap: usize,
    },
}

impl Outcome {
    pub fn realization(&self) -> Option<&Realization> {
        match self {
            Outcome::Realized { realization, .. } => Some(realization),
            _ => None,
        }
    }

    pub fn trace(&self) -> Option<&AlgorithmTrace> {
        match self {
            Outcome::Realized { trace, .. } => Some(trace),
            _ => None,
        }
    }
}

/// Function whose impulse response a realization must reproduce.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    /// Reference values from the long-division recurrence.
    Transfer(&'a TransferFunction),
    /// Reference values from the closed form of the expansion.
    PartialFractions(&'a PartialFraction),
}

impl Target<'_> {
    pub fn impulse_response(&self, count: usize) -> Vec<f64> {
        match self {
            Target::Transfer(tf) => tf.impulse_response(count).values,
            Target::PartialFractions(pf) => pf.impulse_response(count).values,
        }
    }
}

fn witness(values: &[f64], tol: f64) -> Option<Outcome> {
    first_negative(values, tol).map(|index| Outcome::NoPositiveRealization {
        index,
        value: values[index - 1],
    })
}

/// Runs the full construction on a transfer function.
///
/// Input errors (malformed coefficients, failed expansion) are returned as
/// `Err`; everything the algorithm itself decides is an [`Outcome`].
pub fn realize(tf: &TransferFunction, opts: &RealizeOptions) -> Result<Outcome> {
    let pf = match expand(tf) {
        Ok(pf) => pf,
        Err(Error::NonpositiveDominantResidue(gamma)) => {
            let values = tf.impulse_response(WITNESS_SCAN).values;
            return Ok(
                witness(&values, opts.negativity_tol).unwrap_or(Outcome::Unsupported {
                    reason: format!("dominant residue {gamma} is not positive"),
                }),
            );
        }
        Err(Error::NotPrimitive(reason)) => {
            return Ok(Outcome::Unsupported {
                reason: format!("not primitive: {reason}"),
            })
        }
        Err(e) => return Err(e),
    };
    run(&pf, Target::Transfer(tf), opts)
}

/// Same as [`realize`] for a function given by its partial fractions.
pub fn realize_partial_fraction(pf: &PartialFraction, opts: &RealizeOptions) -> Result<Outcome> {
    if pf.dominant_residue <= 0.0 {
        let values = pf.impulse_response(WITNESS_SCAN).values;
        return Ok(
            witness(&values, opts.negativity_tol).unwrap_or(Outcome::Unsupported {
                reason: format!("dominant residue {} is not positive", pf.dominant_residue),
            }),
        );
    }
    run(pf, Target::PartialFractions(pf), opts)
}

fn run(pf: &PartialFraction, target: Target, opts: &RealizeOptions) -> Result<Outcome> {
    if let Some(t) = pf.terms.iter().find(|t| t.order() > 1) {
        return Ok(Outcome::Unsupported {
            reason: format!(
                "pole {} has order {}; only simple non-dominant poles are constructed",
                t.pole,
                t.order()
            ),
        });
    }
    let pf = pf.denormalize();
    let gamma = pf.dominant_residue;
    let lambda0 = pf.dominant_pole;
    let normalized = pf.normalize()?;
    let cap = opts
        .max_shifts
        .unwrap_or_else(|| 2 * iteration_estimate(&normalized));

    // shifted values inherit the rounding of the initial coefficients
    let scale = 1.0
        + normalized.dominant_residue
        + normalized
            .terms
            .iter()
            .map(|t| t.coeffs[0].norm())
            .sum::<f64>();
    let mut current = normalized;
    let mut prefix = Vec::new();
    let mut history = Vec::new();
    let (cls, plan) = loop {
        let cls = classify(&current)?;
        history.push(per_pole_total(&cls, opts.alpha));
        match budget(&cls, opts.mode, opts.alpha) {
            Ok(plan) => break (cls, plan),
            Err(Error::InsufficientBudget { .. }) => {}
            Err(e) => return Err(e),
        }
        let (t, next) = current.shift_once();
        let index = prefix.len() + 1;
        if t < -opts.negativity_tol * scale {
            return Ok(Outcome::NoPositiveRealization {
                index,
                value: t * gamma * lambda0.powi(index as i32 - 1),
            });
        }
        if prefix.len() == cap {
            return Ok(Outcome::IterationCapExceeded { cap });
        }
        prefix.push(t.max(0.0));
        current = next;
    };

    let blocks = build_blocks(&cls, &plan, opts.alpha)?;
    let assembly = assemble(blocks, plan.leftover)?;
    let pre_lift_dimension = assembly.realization.dim();
    let lifted = hadjicostis_lift(&assembly.realization, &prefix)?;
    let realization = lifted.rescaled(lambda0, gamma)?;
    let horizon = opts
        .horizon
        .unwrap_or_else(|| default_horizon(realization.dim()));
    let verification = markov_check_values(
        &realization,
        &target.impulse_response(horizon),
        opts.verify_tol,
    );
    let original_prefix = prefix
        .iter()
        .enumerate()
        .map(|(i, t)| t * gamma * lambda0.powi(i as i32))
        .collect();
    let trace = AlgorithmTrace {
        mode: opts.mode,
        shifts_performed: prefix.len(),
        prefix: original_prefix,
        iteration_cap: Some(cap),
        budget_history: history,
        blocks: assembly.blocks.iter().map(BlockSummary::of).collect(),
        predicted_dimension: Some(cls.predicted_dimension),
        plan: Some(plan),
        pre_lift_dimension,
        final_dimension: realization.dim(),
        dominant_residue: Some(gamma),
        dominant_pole: Some(lambda0),
        verification,
    };
    Ok(Outcome::Realized {
        realization,
        trace: Box::new(trace),
    })
}

/// Lifts a caller-supplied realization of the shifted function `H_m` to a
/// realization of `H`, with dimension `base.dim() + m - 1`.
pub fn realize_with_base(
    tf: &TransferFunction,
    base: &Realization,
    m: usize,
    opts: &RealizeOptions,
) -> Result<Outcome> {
    lift_base(Target::Transfer(tf), base, m, opts)
}

/// [`realize_with_base`] for a function given by its partial fractions.
pub fn realize_partial_fraction_with_base(
    pf: &PartialFraction,
    base: &Realization,
    m: usize,
    opts: &RealizeOptions,
) -> Result<Outcome> {
    lift_base(Target::PartialFractions(pf), base, m, opts)
}

fn lift_base(
    target: Target,
    base: &Realization,
    m: usize,
    opts: &RealizeOptions,
) -> Result<Outcome> {
    if m == 0 {
        return Err(Error::InvalidPartialFraction(
            "shift index m must be >= 1".into(),
        ));
    }
    let values = target.impulse_response(m - 1 + BASE_CHECK_TERMS);
    let scale = 1.0 + values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut prefix = Vec::with_capacity(m - 1);
    for (i, &t) in values[..m - 1].iter().enumerate() {
        if t < -opts.negativity_tol * scale {
            return Err(Error::NegativePrefix {
                index: i + 1,
                value: t,
            });
        }
        prefix.push(t.max(0.0));
    }
    let markov = base.markov_parameters(BASE_CHECK_TERMS);
    for (j, (r, t)) in markov.iter().zip(&values[m - 1..]).enumerate() {
        if (r - t).abs() > BASE_CHECK_TOL * (1.0 + t.abs()) {
            return Err(Error::BaseMismatch {
                index: m + j,
                expected: *t,
                actual: *r,
            });
        }
    }
    let realization = hadjicostis_lift(base, &prefix)?;
    let horizon = opts
        .horizon
        .unwrap_or_else(|| default_horizon(realization.dim()));
    let verification = markov_check_values(
        &realization,
        &target.impulse_response(horizon),
        opts.verify_tol,
    );
    let trace = AlgorithmTrace {
        mode: opts.mode,
        shifts_performed: m - 1,
        prefix,
        iteration_cap: None,
        budget_history: Vec::new(),
        plan: None,
        blocks: Vec::new(),
        predicted_dimension: None,
        pre_lift_dimension: base.dim(),
        final_dimension: realization.dim(),
        dominant_residue: None,
        dominant_pole: None,
        verification,
    };
    Ok(Outcome::Realized {
        realization,
        trace: Box::new(trace),
    })
}
