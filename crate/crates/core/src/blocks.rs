//! Elementary nonnegative blocks, the dominant-residue budget, block-diagonal
//! assembly and the delay-chain lift.
//!
//! Every block realizes `R/(z-1)` plus the pole terms it accounts for, where
//! `R` is its share of the unit dominant residue. Each block also carries the
//! cone model it was derived from (`F`, `P`, `g`, `h` with `F P = P A`,
//! `P b = g`, `c^T = h^T P`), so the construction can be re-verified
//! independently.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{in_polygon, PairAssignment, PoleClassification};
use crate::realization::Realization;

/// Default generator radius of the polygonal cone.
pub const DEFAULT_ALPHA: f64 = 0.5;
const SPOT_CHECK_TERMS: usize = 20;
const SPOT_CHECK_TOL: f64 = 1e-9;
const BARYCENTRIC_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    PositivePole,
    RealPole,
    ComplexPair,
    DominantRemainder,
}

/// Polar data of a conjugate pair `η e^{iϑ}/(z - ρ e^{iθ}) + conj`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    pub modulus: f64,
    pub angle: f64,
    pub magnitude: f64,
    pub phase: f64,
    pub polygon: usize,
}

impl PairSpec {
    pub fn from_assignment(a: &PairAssignment) -> Self {
        Self {
            modulus: a.pole.norm(),
            angle: a.pole.arg(),
            magnitude: a.coeff.norm(),
            phase: a.coeff.arg(),
            polygon: a.polygon,
        }
    }

    pub fn pole(&self) -> Complex64 {
        Complex64::from_polar(self.modulus, self.angle)
    }
}

/// Parameters a block was built from; enough to rebuild it with a larger share.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockSpec {
    PositivePole { pole: f64, coeff: f64 },
    RealPole { pole: f64, coeff: f64 },
    ComplexPair { pair: PairSpec, alpha: f64 },
    DominantRemainder,
}

/// Cone model `(F, P, g, h)` of a block.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeModel {
    pub f: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub g: DVector<f64>,
    pub h: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub spec: BlockSpec,
    pub dominant_share: f64,
    pub realization: Realization,
    pub model: ConeModel,
}

impl Block {
    pub fn kind(&self) -> BlockKind {
        match self.spec {
            BlockSpec::PositivePole { .. } => BlockKind::PositivePole,
            BlockSpec::RealPole { .. } => BlockKind::RealPole,
            BlockSpec::ComplexPair { .. } => BlockKind::ComplexPair,
            BlockSpec::DominantRemainder => BlockKind::DominantRemainder,
        }
    }

    pub fn dim(&self) -> usize {
        self.realization.dim()
    }

    /// `k`-th impulse value of the sub-function the block is meant to realize.
    pub fn target_impulse(&self, k: usize) -> f64 {
        let j = k as i32 - 1;
        self.dominant_share
            + match self.spec {
                BlockSpec::PositivePole { pole, coeff } | BlockSpec::RealPole { pole, coeff } => {
                    coeff * pole.powi(j)
                }
                BlockSpec::ComplexPair { pair, .. } => {
                    2.0 * pair.magnitude
                        * pair.modulus.powi(j)
                        * (j as f64 * pair.angle + pair.phase).cos()
                }
                BlockSpec::DominantRemainder => 0.0,
            }
    }

    fn magnitude(&self) -> f64 {
        self.dominant_share
            + match self.spec {
                BlockSpec::PositivePole { coeff, .. } | BlockSpec::RealPole { coeff, .. } => {
                    coeff.abs()
                }
                BlockSpec::ComplexPair { pair, .. } => 2.0 * pair.magnitude,
                BlockSpec::DominantRemainder => 0.0,
            }
    }

    /// Same block with dominant share `share`.
    pub fn with_share(&self, share: f64) -> Result<Block> {
        match self.spec {
            BlockSpec::PositivePole { pole, coeff } => {
                if share != 0.0 {
                    return Err(Error::BadPoleBlock(
                        "positive-pole blocks carry no dominant share".into(),
                    ));
                }
                positive_pole_block(pole, coeff)
            }
            BlockSpec::RealPole { pole, coeff } => real_pole_block(pole, coeff, share),
            BlockSpec::ComplexPair { pair, alpha } => complex_pair_block(&pair, share, alpha),
            BlockSpec::DominantRemainder => dominant_block(share),
        }
    }

    fn spot_check(self) -> Result<Block> {
        let scale = self.magnitude().max(f64::MIN_POSITIVE);
        let markov = self.realization.markov_parameters(SPOT_CHECK_TERMS);
        for (i, r) in markov.iter().enumerate() {
            let t = self.target_impulse(i + 1);
            if (r - t).abs() > SPOT_CHECK_TOL * scale {
                return Err(Error::BlockCheckFailed(format!(
                    "{:?} term {}: {r} vs {t}",
                    self.kind(),
                    i + 1
                )));
            }
        }
        Ok(self)
    }
}

fn column(values: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(values)
}

/// One-dimensional realization `A = [λ]`, `b = [c]`, `c = [1]` of `c/(z-λ)`.
pub fn positive_pole_block(pole: f64, coeff: f64) -> Result<Block> {
    if !(0.0..1.0).contains(&pole) || coeff <= 0.0 || !coeff.is_finite() {
        return Err(Error::BadPoleBlock(format!(
            "positive-pole block needs 0 <= λ < 1 and c > 0, got λ={pole}, c={coeff}"
        )));
    }
    let realization = Realization::from_rows(&[vec![pole]], &[coeff], &[1.0])?;
    let model = ConeModel {
        f: DMatrix::from_element(1, 1, pole),
        p: DMatrix::identity(1, 1),
        g: column(&[coeff]),
        h: column(&[1.0]),
    };
    Block {
        spec: BlockSpec::PositivePole { pole, coeff },
        dominant_share: 0.0,
        realization,
        model,
    }
    .spot_check()
}

/// Two-dimensional realization of `R/(z-1) + c/(z-λ)` for `R >= |c|`.
///
/// `A` has eigenvector `(1, 1)` for 1 and `(1, -1)` for `λ`; the input
/// `b = R (1, 1) + c (1, -1)` is nonnegative exactly when `R >= |c|`.
pub fn real_pole_block(pole: f64, coeff: f64, share: f64) -> Result<Block> {
    if !(pole > -1.0 && pole < 1.0) {
        return Err(Error::BadPoleBlock(format!(
            "real pole {pole} outside (-1, 1)"
        )));
    }
    if share < coeff.abs() {
        return Err(Error::BudgetTooSmall {
            required: coeff.abs(),
            available: share,
        });
    }
    let diag = 0.5 * (1.0 + pole);
    let off = 0.5 * (1.0 - pole);
    let realization = Realization::from_rows(
        &[vec![diag, off], vec![off, diag]],
        &[share + coeff, share - coeff],
        &[1.0, 0.0],
    )?;
    let model = ConeModel {
        f: DMatrix::from_diagonal(&column(&[1.0, pole])),
        p: DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, -0.5]),
        g: column(&[share, coeff]),
        h: column(&[1.0, 1.0]),
    };
    Block {
        spec: BlockSpec::RealPole { pole, coeff },
        dominant_share: share,
        realization,
        model,
    }
    .spot_check()
}

/// Dominant share a pair needs with generator radius `alpha`:
/// `2^{3/2} η / (α cos(π/m))`, i.e. `2^{5/2} η / cos(π/m)` at `α = 1/2`.
pub fn pair_threshold(pair: &PairSpec, alpha: f64) -> f64 {
    2f64.powf(1.5) * pair.magnitude / (alpha * (PI / pair.polygon as f64).cos())
}

/// Barycentric weights of `point` in the fan of triangles
/// `(v_0, v_k, v_{k+1})`, `k = 1..m-2`, of a convex polygon.
fn fan_weights(point: [f64; 2], verts: &[[f64; 2]]) -> Option<Vec<f64>> {
    let cross = |a: [f64; 2], b: [f64; 2]| a[0] * b[1] - a[1] * b[0];
    let sub = |a: [f64; 2], b: [f64; 2]| [a[0] - b[0], a[1] - b[1]];
    let m = verts.len();
    let v0 = verts[0];
    let rel = sub(point, v0);
    for k in 1..m - 1 {
        let e1 = sub(verts[k], v0);
        let e2 = sub(verts[k + 1], v0);
        let det = cross(e1, e2);
        let w1 = cross(rel, e2) / det;
        let w2 = cross(e1, rel) / det;
        let w0 = 1.0 - w1 - w2;
        if w0 >= -BARYCENTRIC_SLACK && w1 >= -BARYCENTRIC_SLACK && w2 >= -BARYCENTRIC_SLACK {
            let mut weights = vec![0.0; m];
            weights[0] = w0.max(0.0);
            weights[k] = w1.max(0.0);
            weights[k + 1] = w2.max(0.0);
            return Some(weights);
        }
    }
    None
}

/// `m`-dimensional realization of `R/(z-1) + η e^{iϑ}/(z - ρe^{iθ}) + conj`.
///
/// The cone generated by `g_k = (α cos(2πk/m), α sin(2πk/m), 1)` is invariant
/// under the rotation-scaling model `F` whenever `ρ e^{iθ}` lies in `P_m`.
/// Column `k` of `A` holds the fan-barycentric weights of `F g_k`, and `b`
/// holds `R` times the weights of the model input's cross-section point.
pub fn complex_pair_block(pair: &PairSpec, share: f64, alpha: f64) -> Result<Block> {
    let m = pair.polygon;
    if m < 3 {
        return Err(Error::BadPoleBlock(format!("polygon index {m} < 3")));
    }
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::BadPoleBlock(format!(
            "alpha {alpha} outside (0, 1/2]"
        )));
    }
    if !(share > 0.0 && share.is_finite()) {
        return Err(Error::BadPoleBlock(format!(
            "complex-pair block needs a positive share, got {share}"
        )));
    }
    let pole = pair.pole();
    if !in_polygon(pole, m) {
        return Err(Error::NotInPolygon {
            re: pole.re,
            im: pole.im,
            polygon: m,
        });
    }
    let required = pair_threshold(pair, alpha);
    if required > share * (1.0 + 1e-12) {
        return Err(Error::BudgetTooSmall {
            required,
            available: share,
        });
    }

    let (rho, theta) = (pair.modulus, pair.angle);
    let (eta, phase) = (pair.magnitude, pair.phase);
    let f = DMatrix::from_row_slice(
        3,
        3,
        &[
            rho * theta.cos(),
            -rho * theta.sin(),
            0.0,
            rho * theta.sin(),
            rho * theta.cos(),
            0.0,
            0.0,
            0.0,
            1.0,
        ],
    );
    let g = column(&[
        eta * (phase.cos() - phase.sin()),
        eta * (phase.cos() + phase.sin()),
        share,
    ]);
    let h = column(&[1.0, 1.0, 1.0]);
    let angles: Vec<f64> = (0..m).map(|k| 2.0 * PI * k as f64 / m as f64).collect();
    let p = DMatrix::from_fn(3, m, |i, k| match i {
        0 => alpha * angles[k].cos(),
        1 => alpha * angles[k].sin(),
        _ => 1.0,
    });
    let verts: Vec<[f64; 2]> = (0..m).map(|k| [p[(0, k)], p[(1, k)]]).collect();

    let image = &f * &p;
    let mut a = DMatrix::zeros(m, m);
    for k in 0..m {
        let point = [image[(0, k)], image[(1, k)]];
        let weights = fan_weights(point, &verts).ok_or(Error::DegenerateBarycentric(k))?;
        for (l, w) in weights.into_iter().enumerate() {
            a[(l, k)] = w;
        }
    }
    let input = [g[0] / share, g[1] / share];
    let b_weights = fan_weights(input, &verts).ok_or(Error::DegenerateBarycentric(m))?;
    let b = DVector::from_iterator(m, b_weights.into_iter().map(|w| w * share));
    let c = p.transpose() * &h;

    let realization = Realization::new(a, b, c)?;
    Block {
        spec: BlockSpec::ComplexPair { pair: *pair, alpha },
        dominant_share: share,
        realization,
        model: ConeModel { f, p, g, h },
    }
    .spot_check()
}

/// One-dimensional realization of `share/(z-1)`.
pub fn dominant_block(share: f64) -> Result<Block> {
    if !(share >= 0.0 && share.is_finite()) {
        return Err(Error::LeftoverNegative(share));
    }
    Block {
        spec: BlockSpec::DominantRemainder,
        dominant_share: share,
        realization: Realization::from_rows(&[vec![1.0]], &[share], &[1.0])?,
        model: ConeModel {
            f: DMatrix::identity(1, 1),
            p: DMatrix::identity(1, 1),
            g: column(&[share]),
            h: column(&[1.0]),
        },
    }
    .spot_check()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetMode {
    /// Each term takes exactly the share its block needs.
    PerPole,
    /// `sum |c_j| <= 2^{-5/2}` over the terms that need a share.
    ConservativeSum,
}

/// Share allotted to one pole term. For pairs, `statement_share` is the
/// smaller `2η / cos(π/m)` bound, reported alongside the one actually used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub pole: Complex64,
    pub share: f64,
    pub statement_share: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetPlan {
    pub allocations: Vec<Allocation>,
    pub total: f64,
    pub leftover: f64,
    pub mode: BudgetMode,
}

/// Summed `|c_j|` bound of the conservative mode.
pub fn conservative_limit() -> f64 {
    2f64.powf(-2.5)
}

fn per_pole_allocations(cls: &PoleClassification, alpha: f64) -> Vec<Allocation> {
    let mut out = Vec::new();
    for p in &cls.positive {
        out.push(Allocation {
            pole: Complex64::new(p.pole, 0.0),
            share: 0.0,
            statement_share: None,
        });
    }
    for r in &cls.real {
        out.push(Allocation {
            pole: Complex64::new(r.pole, 0.0),
            share: r.coeff.abs(),
            statement_share: None,
        });
    }
    for pa in &cls.pairs {
        let spec = PairSpec::from_assignment(pa);
        out.push(Allocation {
            pole: pa.pole,
            share: pair_threshold(&spec, alpha),
            statement_share: Some(2.0 * spec.magnitude / (PI / spec.polygon as f64).cos()),
        });
    }
    out
}

/// Total share the per-pole rule needs for `cls`.
pub fn per_pole_total(cls: &PoleClassification, alpha: f64) -> f64 {
    per_pole_allocations(cls, alpha)
        .iter()
        .map(|a| a.share)
        .sum()
}

/// `sum |c_j|` over the terms outside `N_1`, pairs counted twice.
pub fn residue_mass(cls: &PoleClassification) -> f64 {
    cls.real.iter().map(|r| r.coeff.abs()).sum::<f64>()
        + cls.pairs.iter().map(|p| 2.0 * p.coeff.norm()).sum::<f64>()
}

/// Splits the unit dominant residue among the blocks, or reports
/// [`Error::InsufficientBudget`] when another shift is needed.
pub fn budget(cls: &PoleClassification, mode: BudgetMode, alpha: f64) -> Result<BudgetPlan> {
    let mut allocations = per_pole_allocations(cls, alpha);
    let total: f64 = allocations.iter().map(|a| a.share).sum();
    match mode {
        BudgetMode::PerPole => {
            if total > 1.0 {
                return Err(Error::InsufficientBudget { required: total });
            }
            Ok(BudgetPlan {
                allocations,
                total,
                leftover: 1.0 - total,
                mode,
            })
        }
        BudgetMode::ConservativeSum => {
            let mass = residue_mass(cls);
            if mass > conservative_limit() || total > 1.0 {
                return Err(Error::InsufficientBudget {
                    required: total.max(mass / conservative_limit()),
                });
            }
            if total == 0.0 {
                return Ok(BudgetPlan {
                    allocations,
                    total,
                    leftover: 1.0,
                    mode,
                });
            }
            for a in allocations.iter_mut() {
                a.share /= total;
            }
            Ok(BudgetPlan {
                allocations,
                total: 1.0,
                leftover: 0.0,
                mode,
            })
        }
    }
}

/// Builds one block per classified term, in `N_1`, `N_2`, pairs order.
pub fn build_blocks(cls: &PoleClassification, plan: &BudgetPlan, alpha: f64) -> Result<Vec<Block>> {
    let mut shares = plan.allocations.iter().map(|a| a.share);
    let mut blocks = Vec::with_capacity(plan.allocations.len());
    for p in &cls.positive {
        shares.next();
        blocks.push(positive_pole_block(p.pole, p.coeff)?);
    }
    for r in &cls.real {
        let share = shares.next().unwrap_or(0.0);
        blocks.push(real_pole_block(r.pole, r.coeff, share)?);
    }
    for pa in &cls.pairs {
        let share = shares.next().unwrap_or(0.0);
        blocks.push(complex_pair_block(
            &PairSpec::from_assignment(pa),
            share,
            alpha,
        )?);
    }
    Ok(blocks)
}

/// Assembled realization with the blocks it was made of (after leftover routing).
#[derive(Debug, Clone)]
pub struct Assembly {
    pub realization: Realization,
    pub blocks: Vec<Block>,
}

/// Block-diagonal assembly. The unused dominant share `leftover` is folded
/// into the block with the largest share when one exists; otherwise a
/// one-dimensional `leftover/(z-1)` block is appended.
pub fn assemble(mut blocks: Vec<Block>, leftover: f64) -> Result<Assembly> {
    if leftover < -1e-12 || !leftover.is_finite() {
        return Err(Error::LeftoverNegative(leftover));
    }
    let leftover = leftover.max(0.0);
    let carrier = blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| b.dominant_share > 0.0)
        .max_by(|(_, x), (_, y)| x.dominant_share.total_cmp(&y.dominant_share))
        .map(|(i, _)| i);
    match carrier {
        Some(i) => {
            if leftover > 0.0 {
                let share = blocks[i].dominant_share + leftover;
                blocks[i] = blocks[i].with_share(share)?;
            }
        }
        None => blocks.push(dominant_block(leftover)?),
    }
    let parts: Vec<&Realization> = blocks.iter().map(|b| &b.realization).collect();
    let realization = Realization::direct_sum(&parts)?;
    Ok(Assembly {
        realization,
        blocks,
    })
}

/// Prepends a delay chain emitting `prefix` to a realization of the shifted
/// tail: the result's Markov sequence is `prefix` followed by `base`'s, and
/// its dimension is `base.dim() + prefix.len()`.
pub fn hadjicostis_lift(base: &Realization, prefix: &[f64]) -> Result<Realization> {
    if let Some((i, &v)) = prefix
        .iter()
        .enumerate()
        .find(|(_, &v)| v < 0.0 || !v.is_finite())
    {
        return Err(Error::NegativePrefix {
            index: i + 1,
            value: v,
        });
    }
    let chain = prefix.len();
    if chain == 0 {
        return Ok(base.clone());
    }
    let k = base.dim();
    let m = chain + k;
    let mut a = DMatrix::zeros(m, m);
    for i in 0..chain - 1 {
        a[(i + 1, i)] = 1.0;
    }
    a.view_mut((chain, chain - 1), (k, 1)).copy_from(base.b());
    a.view_mut((chain, chain), (k, k)).copy_from(base.a());
    let mut b = DVector::zeros(m);
    b[0] = 1.0;
    let mut c = DVector::zeros(m);
    c.rows_mut(0, chain).copy_from_slice(prefix);
    c.rows_mut(chain, k).copy_from(base.c());
    Realization::new(a, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::cone_check;
    use crate::geometry::{classify, minimal_polygon_index};
    use crate::partial_fraction::{PartialFraction, PoleTerm};

    fn assert_markov(real: &Realization, expected: &[f64], tol: f64) {
        let got = real.markov_parameters(expected.len());
        for (k, (a, b)) in got.iter().zip(expected).enumerate() {
            assert!(
                (a - b).abs() <= tol * (1.0 + b.abs()),
                "term {}: {a} vs {b}",
                k + 1
            );
        }
    }

    fn assert_certificate(block: &Block) {
        let m = &block.model;
        let report = cone_check(&m.f, &m.p, &m.g, &m.h, &block.realization, 1e-10).unwrap();
        assert!(report.pass, "{:?}: {report:?}", block.kind());
    }

    #[test]
    fn positive_pole_blocks() {
        let b = positive_pole_block(0.2, 0.12).unwrap();
        assert_eq!(b.realization.a()[(0, 0)], 0.2);
        assert_eq!(b.realization.b()[0], 0.12);
        assert_eq!(b.realization.c()[0], 1.0);
        let origin = positive_pole_block(0.0, 1.0).unwrap();
        assert_markov(&origin.realization, &[1.0, 0.0, 0.0, 0.0], 0.0);
        let cheb = positive_pole_block(0.5400962165, 0.3541501460).unwrap();
        assert_eq!(cheb.dim(), 1);
        assert_certificate(&cheb);
        assert!(positive_pole_block(1.0, 0.1).is_err());
        assert!(positive_pole_block(0.5, -0.1).is_err());
    }

    #[test]
    fn real_pole_block_h0_term() {
        let b = real_pole_block(0.4, -0.64, 0.64).unwrap();
        assert!((b.realization.b()[0]).abs() < 1e-15);
        assert!((b.realization.b()[1] - 1.28).abs() < 1e-15);
        assert_markov(&b.realization, &[0.0, 0.384, 0.5376], 1e-15);
        assert_certificate(&b);
    }

    #[test]
    fn real_pole_block_at_origin() {
        let b = real_pole_block(0.0, -1.0, 1.0).unwrap();
        assert_eq!(b.realization.a(), &DMatrix::from_element(2, 2, 0.5));
        assert_eq!(b.realization.b().as_slice(), &[0.0, 2.0]);
        assert_markov(&b.realization, &[0.0, 1.0, 1.0, 1.0], 0.0);
    }

    #[test]
    fn real_pole_block_budget_too_small() {
        assert!(matches!(
            real_pole_block(0.5, 0.1, 0.05),
            Err(Error::BudgetTooSmall { .. })
        ));
    }

    #[test]
    fn complex_pair_block_triangle() {
        let pair = PairSpec {
            modulus: 0.5,
            angle: PI / 2.0,
            magnitude: 0.01,
            phase: 0.0,
            polygon: 3,
        };
        let b = complex_pair_block(&pair, 0.12, 0.5).unwrap();
        assert_eq!(b.dim(), 3);
        // oracle: R + 2η ρ^(k-1) cos((k-1)π/2)
        let expected: Vec<f64> = (0..30)
            .map(|j| 0.12 + 0.02 * 0.5f64.powi(j) * (j as f64 * PI / 2.0).cos())
            .collect();
        assert!((expected[0] - 0.14).abs() < 1e-15 && (expected[2] - 0.115).abs() < 1e-15);
        assert_markov(&b.realization, &expected, 1e-12);
        assert_certificate(&b);
    }

    #[test]
    fn complex_pair_block_without_pair_part() {
        let pair = PairSpec {
            modulus: 0.3,
            angle: 1.0,
            magnitude: 0.0,
            phase: 0.4,
            polygon: minimal_polygon_index(Complex64::from_polar(0.3, 1.0)).unwrap(),
        };
        let b = complex_pair_block(&pair, 0.7, 0.5).unwrap();
        assert_markov(&b.realization, &[0.7; 25], 1e-13);
    }

    #[test]
    fn complex_pair_block_chebyshev_after_one_shift() {
        let lambda = Complex64::new(0.07522998673, 0.8455579204);
        let coeff = Complex64::new(-0.01050864690, -0.1411896961) * lambda;
        let pair = PairSpec {
            modulus: lambda.norm(),
            angle: lambda.arg(),
            magnitude: coeff.norm(),
            phase: coeff.arg(),
            polygon: 4,
        };
        let share = pair_threshold(&pair, 0.5);
        assert!((share - 8.0 * pair.magnitude).abs() < 1e-12);
        assert!((share - 0.9615).abs() < 1e-4);
        let b = complex_pair_block(&pair, share, 0.5).unwrap();
        assert_eq!(b.dim(), 4);
        assert_certificate(&b);
        assert!(b.realization.is_nonnegative());
    }

    #[test]
    fn complex_pair_block_errors() {
        let pair = PairSpec {
            modulus: 0.84890,
            angle: 1.482,
            magnitude: 0.1,
            phase: 0.0,
            polygon: 3,
        };
        assert!(matches!(
            complex_pair_block(&pair, 1.0, 0.5),
            Err(Error::NotInPolygon { .. })
        ));
        let pair = PairSpec { polygon: 4, ..pair };
        assert!(matches!(
            complex_pair_block(&pair, 0.1, 0.5),
            Err(Error::BudgetTooSmall { .. })
        ));
        assert!(complex_pair_block(&pair, 1.0, 0.6).is_err());
    }

    #[test]
    fn smaller_alpha_raises_threshold() {
        let pair = PairSpec {
            modulus: 0.5,
            angle: 2.0,
            magnitude: 0.02,
            phase: 1.0,
            polygon: 3,
        };
        assert!(pair_threshold(&pair, 0.25) > pair_threshold(&pair, 0.5));
        let b = complex_pair_block(&pair, pair_threshold(&pair, 0.25), 0.25).unwrap();
        assert_certificate(&b);
    }

    fn h(n: i32) -> PartialFraction {
        PartialFraction::new(
            1.0,
            1.0,
            vec![
                PoleTerm::real(0.4, -4.0 * 2.5f64.powi(n - 2)),
                PoleTerm::real(0.2, 3.0 * 5f64.powi(n - 2)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn budget_for_h0_and_h1() {
        let plan = budget(&classify(&h(0)).unwrap(), BudgetMode::PerPole, 0.5).unwrap();
        let shares: Vec<f64> = plan.allocations.iter().map(|a| a.share).collect();
        // N_1 term (pole 0.2) first, then the N_2 term (pole 0.4)
        assert_eq!(shares.len(), 2);
        assert_eq!(shares[0], 0.0);
        assert!((shares[1] - 0.64).abs() < 1e-15);
        assert!((plan.leftover - 0.36).abs() < 1e-15);

        let err = budget(&classify(&h(1)).unwrap(), BudgetMode::PerPole, 0.5).unwrap_err();
        match err {
            Error::InsufficientBudget { required } => assert!((required - 1.6).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn budget_for_empty_classification() {
        let cls = classify(&PartialFraction::new(1.0, 1.0, vec![]).unwrap()).unwrap();
        for mode in [BudgetMode::PerPole, BudgetMode::ConservativeSum] {
            let plan = budget(&cls, mode, 0.5).unwrap();
            assert_eq!((plan.total, plan.leftover), (0.0, 1.0));
        }
    }

    #[test]
    fn conservative_mode_spends_the_full_unit() {
        let pf = PartialFraction::new(1.0, 1.0, vec![PoleTerm::real(-0.5, 0.1)]).unwrap();
        let cls = classify(&pf).unwrap();
        let plan = budget(&cls, BudgetMode::ConservativeSum, 0.5).unwrap();
        assert_eq!(plan.leftover, 0.0);
        assert!((plan.allocations[0].share - 1.0).abs() < 1e-15);
        let pf = PartialFraction::new(1.0, 1.0, vec![PoleTerm::real(-0.5, 0.2)]).unwrap();
        assert!(budget(&classify(&pf).unwrap(), BudgetMode::ConservativeSum, 0.5).is_err());
        assert!(budget(&classify(&pf).unwrap(), BudgetMode::PerPole, 0.5).is_ok());
    }

    #[test]
    fn assemble_h0_folds_leftover() {
        let cls = classify(&h(0)).unwrap();
        let plan = budget(&cls, BudgetMode::PerPole, 0.5).unwrap();
        let blocks = build_blocks(&cls, &plan, 0.5).unwrap();
        let assembly = assemble(blocks, plan.leftover).unwrap();
        assert_eq!(assembly.realization.dim(), 3);
        assert_eq!(assembly.realization.dim(), cls.predicted_dimension);
        let expected = h(0).impulse_response(40).values;
        assert_markov(&assembly.realization, &expected, 1e-13);
        assert!((assembly.blocks[1].dominant_share - 1.0).abs() < 1e-15);
    }

    #[test]
    fn assemble_without_blocks() {
        let a = assemble(vec![], 1.0).unwrap();
        assert_eq!(a.realization.dim(), 1);
        assert_markov(&a.realization, &[1.0; 10], 0.0);
        assert!(matches!(
            assemble(vec![], -0.1),
            Err(Error::LeftoverNegative(_))
        ));
    }

    #[test]
    fn assemble_only_positive_poles_appends_dominant_block() {
        let pf = PartialFraction::new(1.0, 1.0, vec![PoleTerm::real(0.3, 0.5)]).unwrap();
        let cls = classify(&pf).unwrap();
        let plan = budget(&cls, BudgetMode::PerPole, 0.5).unwrap();
        let assembly = assemble(build_blocks(&cls, &plan, 0.5).unwrap(), plan.leftover).unwrap();
        assert_eq!(assembly.realization.dim(), cls.predicted_dimension + 1);
        assert_markov(
            &assembly.realization,
            &pf.impulse_response(30).values,
            1e-14,
        );
    }

    #[test]
    fn lift_examples() {
        let base = Realization::from_rows(&[vec![1.0]], &[1.0], &[1.0]).unwrap();
        assert_eq!(hadjicostis_lift(&base, &[]).unwrap(), base);
        let lifted = hadjicostis_lift(&base, &[2.0]).unwrap();
        assert_eq!(lifted.dim(), 2);
        assert_eq!(lifted.markov_parameters(4), vec![2.0, 1.0, 1.0, 1.0]);
        let longer = hadjicostis_lift(&base, &[3.0, 0.0, 5.0]).unwrap();
        assert_eq!(longer.markov_parameters(5), vec![3.0, 0.0, 5.0, 1.0, 1.0]);
        assert!(matches!(
            hadjicostis_lift(&base, &[1.0, -0.5]),
            Err(Error::NegativePrefix { index: 2, .. })
        ));
    }
}
