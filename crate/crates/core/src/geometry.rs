//! Regular-polygon regions `P_j` and the pole bucketing that fixes the
//! dimension of the simple-pole construction.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partial_fraction::PartialFraction;

/// Margin by which a point must clear every edge of a polygon.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Open regular `j`-gon with vertices at the `j`-th roots of unity:
/// `ρ cos((2k+1)π/j - θ) < cos(π/j)` for every `k`.
///
/// Points within [`BOUNDARY_TOL`] of an edge count as outside. The test is
/// evaluated on `(re, |im|)`, so it is exactly symmetric under conjugation.
pub fn in_polygon(z: Complex64, j: usize) -> bool {
    assert!(j >= 3, "polygon index must be at least 3");
    let (x, y) = (z.re, z.im.abs());
    let apothem = (PI / j as f64).cos();
    (0..j).all(|k| {
        let phi = (2 * k + 1) as f64 * PI / j as f64;
        x * phi.cos() + y * phi.sin() < apothem - BOUNDARY_TOL
    })
}

/// Smallest `j >= 3` with `z` in `P_j`.
pub fn minimal_polygon_index(z: Complex64) -> Result<usize> {
    let radius = z.norm();
    let err = Error::NoPolygonIndex { re: z.re, im: z.im };
    if radius.is_nan() || radius + 2.0 * BOUNDARY_TOL >= 1.0 {
        return Err(err);
    }
    // once the inscribed circle clears |z| membership is guaranteed
    let mut upper = 3;
    while (PI / upper as f64).cos() <= radius + 2.0 * BOUNDARY_TOL {
        upper += 1;
    }
    (3..=upper).find(|&j| in_polygon(z, j)).ok_or(err)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealPole {
    pub pole: f64,
    pub coeff: f64,
}

/// A conjugate pair, stored by its upper-half-plane member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairAssignment {
    pub pole: Complex64,
    pub coeff: Complex64,
    pub polygon: usize,
}

/// Bucketing of the stable poles: `N_1` nonnegative poles with positive
/// residue, `N_2` other real poles, and `N_j` pairs whose minimal polygon is
/// `P_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleClassification {
    pub positive: Vec<RealPole>,
    pub real: Vec<RealPole>,
    pub pairs: Vec<PairAssignment>,
    pub polygon_counts: BTreeMap<usize, usize>,
    pub predicted_dimension: usize,
}

impl PoleClassification {
    pub fn n1(&self) -> usize {
        self.positive.len()
    }

    pub fn n2(&self) -> usize {
        self.real.len()
    }

    /// `N_j` for `j >= 3`.
    pub fn pairs_in(&self, j: usize) -> usize {
        self.polygon_counts.get(&j).copied().unwrap_or(0)
    }

    /// `sum_j j N_j`.
    pub fn dimension_by_blocks(&self) -> usize {
        self.n1()
            + 2 * self.n2()
            + self
                .polygon_counts
                .iter()
                .map(|(j, n)| j * n)
                .sum::<usize>()
    }

    /// `(n-1) + N_2 + sum_{j>=3} (j-2) N_j`.
    pub fn dimension_by_degree(&self) -> usize {
        let stable_poles = self.n1() + self.n2() + 2 * self.pairs.len();
        stable_poles
            + self.n2()
            + self
                .polygon_counts
                .iter()
                .map(|(j, n)| (j - 2) * n)
                .sum::<usize>()
    }
}

/// Buckets the poles of a normalized, simple-pole expansion.
pub fn classify(pf: &PartialFraction) -> Result<PoleClassification> {
    let mut positive = Vec::new();
    let mut real = Vec::new();
    let mut pairs = Vec::new();
    for term in &pf.terms {
        if term.order() > 1 {
            return Err(Error::MultiplePoleUnsupported {
                re: term.pole.re,
                im: term.pole.im,
                order: term.order(),
            });
        }
        let coeff = term.residue();
        if term.is_real() {
            let entry = RealPole {
                pole: term.pole.re,
                coeff: coeff.re,
            };
            if term.pole.re >= 0.0 && coeff.re > 0.0 {
                positive.push(entry);
            } else {
                real.push(entry);
            }
        } else if term.pole.im > 0.0 {
            pairs.push(PairAssignment {
                pole: term.pole,
                coeff,
                polygon: minimal_polygon_index(term.pole)?,
            });
        }
    }
    let mut polygon_counts = BTreeMap::new();
    for p in &pairs {
        *polygon_counts.entry(p.polygon).or_insert(0) += 1;
    }
    let mut cls = PoleClassification {
        positive,
        real,
        pairs,
        polygon_counts,
        predicted_dimension: 0,
    };
    cls.predicted_dimension = cls.dimension_by_blocks();
    debug_assert_eq!(cls.predicted_dimension, cls.dimension_by_degree());
    Ok(cls)
}
